"""Trade-off curve containers and convex-envelope utilities.

Shared plumbing for the classical and quantum solvers: a `Curve` is an
ordered list of certified points, each carrying the witness that achieves
it, plus metadata (grid, config hash) for reproducibility.  The envelope
helpers turn a cloud of achieved (constraint, objective) pairs into the
piecewise-linear certified bound, remembering which achieved points span
each segment so callers can synthesize time-sharing witnesses.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from typing import Any, Optional, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "SolverConfig",
    "CurvePoint",
    "Curve",
    "Envelope",
    "EnvelopeValue",
    "ConvexityReport",
    "lower_envelope",
    "upper_envelope",
    "convexity_report",
    "fingerprint",
]


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        # tolist() may yield nested complex scalars, so recurse
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def fingerprint(data: Any) -> str:
    """Stable sha256 hex digest of a JSON-serializable structure."""
    blob = json.dumps(_jsonable(data), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the curve solvers.

    d_W / d_V only matter to the quantum solver and default to
    state-dependent values when left as None.  beta_grid overrides the
    default multiplier sweep of whichever solver receives the config.
    """

    restarts: int = 20
    seed: int = 0
    max_iters: int = 5000
    grad_step: float = 1e-5
    tol: float = 1e-9
    d_W: Optional[int] = None
    d_V: Optional[int] = None
    beta_grid: Optional[tuple] = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if not self.tol > 0:
            raise ValidationError("tol must be > 0")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if not self.grad_step > 0:
            raise ValidationError("grad_step must be > 0")
        if self.d_W is not None and self.d_W < 1:
            raise ValidationError("d_W must be >= 1")
        if self.d_V is not None and self.d_V < 1:
            raise ValidationError("d_V must be >= 1")
        if self.beta_grid is not None:
            grid = tuple(float(b) for b in self.beta_grid)
            if any(not np.isfinite(b) or b < 0 for b in grid):
                raise ValidationError("beta_grid entries must be finite and >= 0")
            object.__setattr__(self, "beta_grid", grid)

    def digest(self) -> str:
        return fingerprint({f.name: getattr(self, f.name) for f in fields(self)})


@dataclass(frozen=True)
class CurvePoint:
    abscissa: float
    value: float
    witness: Any
    achieved_constraint: float
    converged: bool


@dataclass(frozen=True)
class Curve:
    points: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        xs = [p.abscissa for p in pts]
        ys = [p.value for p in pts]
        if any(not np.isfinite(v) for v in xs + ys):
            raise ValidationError("curve points must be finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValidationError("curve abscissae must be strictly increasing")

    @property
    def abscissae(self) -> np.ndarray:
        return np.array([p.abscissa for p in self.points], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points], dtype=float)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class EnvelopeValue:
    """Envelope evaluated at one abscissa.

    left/right index into the original cloud; weight is the share of the
    right endpoint, so value = (1-weight)*y[left] + weight*y[right].
    """

    abscissa: float
    value: float
    left: int
    right: int
    weight: float
    clamped: bool


@dataclass(frozen=True)
class Envelope:
    """Lower (or sign-flipped upper) convex envelope of a point cloud."""

    vertex_x: np.ndarray
    vertex_y: np.ndarray
    vertex_index: np.ndarray  # indices into the cloud passed to lower_envelope

    def evaluate(self, grid: Sequence[float]) -> list:
        out = []
        vx, vy, vi = self.vertex_x, self.vertex_y, self.vertex_index
        for a in grid:
            a = float(a)
            clamped = False
            q = a
            if q <= vx[0]:
                clamped = q < vx[0] - 1e-12
                out.append(EnvelopeValue(a, float(vy[0]), int(vi[0]), int(vi[0]), 0.0, clamped))
                continue
            if q >= vx[-1]:
                clamped = q > vx[-1] + 1e-12
                out.append(EnvelopeValue(a, float(vy[-1]), int(vi[-1]), int(vi[-1]), 0.0, clamped))
                continue
            j = int(np.searchsorted(vx, q, side="right"))
            x0, x1 = vx[j - 1], vx[j]
            lam = float((q - x0) / (x1 - x0))
            val = float((1.0 - lam) * vy[j - 1] + lam * vy[j])
            if lam <= 1e-12:
                out.append(EnvelopeValue(a, float(vy[j - 1]), int(vi[j - 1]), int(vi[j - 1]), 0.0, False))
            elif lam >= 1.0 - 1e-12:
                out.append(EnvelopeValue(a, float(vy[j]), int(vi[j]), int(vi[j]), 0.0, False))
            else:
                out.append(EnvelopeValue(a, val, int(vi[j - 1]), int(vi[j]), lam, False))
        return out


def _cross(ox, oy, ax, ay, bx, by) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def lower_envelope(xs: Sequence[float], ys: Sequence[float]) -> Envelope:
    """Lower convex hull boundary of the cloud, left to right."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size == 0:
        raise ValidationError("envelope needs matching non-empty 1-D coordinate arrays")
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise ValidationError("envelope coordinates must be finite")
    order = np.lexsort((ys, xs))
    hull: list = []
    for k in order:
        x, y = xs[k], ys[k]
        if hull and x == xs[hull[-1]]:
            # equal abscissae are visited lowest-value first; keep that one
            continue
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            if _cross(xs[i], ys[i], xs[j], ys[j], x, y) <= 0.0:
                hull.pop()
            else:
                break
        hull.append(k)
    idx = np.array(hull, dtype=int)
    return Envelope(xs[idx], ys[idx], idx)


def upper_envelope(xs: Sequence[float], ys: Sequence[float]) -> Envelope:
    """Upper concave hull boundary, via the lower hull of the negated values."""
    env = lower_envelope(xs, -np.asarray(ys, dtype=float))
    return Envelope(env.vertex_x, -env.vertex_y, env.vertex_index)


@dataclass(frozen=True)
class ConvexityReport:
    min_second_difference: float
    at_index: int
    at_abscissa: float
    tolerance: float
    passed: bool


def convexity_report(xs: Sequence[float], ys: Sequence[float], tolerance: float = 1e-3) -> ConvexityReport:
    """Minimum discrete second difference over consecutive point triples.

    Uses the chord-gap form 2*(lam*y0 + (1-lam)*y2 - y1), which reduces to
    the plain second difference y0 - 2*y1 + y2 on uniformly spaced
    abscissae and stays a valid convexity measure on uneven ones.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 3:
        raise ValidationError("convexity check needs at least 3 points")
    if np.any(np.diff(xs) <= 0):
        raise ValidationError("convexity check needs strictly increasing abscissae")
    lam = (xs[2:] - xs[1:-1]) / (xs[2:] - xs[:-2])
    gaps = 2.0 * (lam * ys[:-2] + (1.0 - lam) * ys[2:] - ys[1:-1])
    k = int(np.argmin(gaps))
    worst = float(gaps[k])
    return ConvexityReport(worst, k + 1, float(xs[k + 1]), float(tolerance), worst >= -tolerance)
