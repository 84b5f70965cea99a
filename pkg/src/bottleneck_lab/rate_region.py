"""Rate region for compressing one part of a source next to a quantum helper.

A pure tripartite source spreads over a compressed side X, a target side
Y, and a reference.  The helper ships a squashed version of X at q_x
qubits per symbol, the main terminal ships Y at q_y, and the frontier of
workable pairs follows the inverse of the bottleneck frontier: maximize
I(Y;W) over channels whose leak I(W;YR) stays under 2*q_x, then
q_y = H(Y) - I(Y;W)/2 at the attained optimum.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Optional

import numpy as np

from .channels import isometry_from_params, params_from_isometry, stinespring_extend
from .classical_ib import _grid_to_array
from .curves import SolverConfig, convexity_report, fingerprint, lower_envelope
from .errors import ValidationError
from .solver import (
    QIBPoint,
    _default_quantum_config,
    _fresh,
    _matrices_from_params,
    _mixture_isometry,
    _Problem,
    _solve,
)
from .states import (
    DensityOperator,
    PureState,
    mutual_information,
    partial_trace,
    purify,
    tensor_pure,
    von_neumann_entropy,
)

__all__ = [
    "RatePair",
    "RegionBoundary",
    "AdditivityReport",
    "wak_boundary",
    "purity_complement_check",
    "additivity_check",
]

_SNAP = 1e-9
_SCALE_LIMIT = 4096  # largest two-copy ambient dimension this module will touch


@dataclass(frozen=True)
class RatePair:
    """One achievable (helper, primary) rate pair in qubits per symbol."""

    q_x: float
    q_y: float

    def __post_init__(self):
        for name in ("q_x", "q_y"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0.0:
                raise ValidationError(f"{name} must be finite and nonnegative, got {v}")


@dataclass(frozen=True)
class RegionBoundary:
    """Lower-left frontier of the achievable rate set.

    Points are sorted by helper rate and each carries a witness channel,
    stored with the cap 2*q_x as its abscissa and the attained I(Y;W) as
    its value, so witnesses replay through the same machinery curve
    points do.
    """

    points: tuple
    witnesses: tuple
    meta: dict

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValidationError("a boundary needs at least one point")
        if len(self.witnesses) != len(self.points):
            raise ValidationError("each boundary point needs exactly one witness")
        qx = np.array([p.q_x for p in self.points], dtype=float)
        qy = np.array([p.q_y for p in self.points], dtype=float)
        if np.any(np.diff(qx) <= 0.0):
            raise ValidationError("helper rates must be strictly increasing")
        if np.any(np.diff(qy) > 1e-9):
            raise ValidationError("primary rates must be non-increasing along the boundary")
        if qx.size >= 3 and not convexity_report(qx, qy, 1e-3).passed:
            raise ValidationError("boundary is not convex within tolerance")

    @property
    def q_x(self) -> np.ndarray:
        return np.array([p.q_x for p in self.points], dtype=float)

    @property
    def q_y(self) -> np.ndarray:
        return np.array([p.q_y for p in self.points], dtype=float)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class AdditivityReport:
    """Per-probe comparison of one copy against half of two copies."""

    probes: tuple
    single: tuple  # q_y of the single-copy boundary at each probe
    doubled: tuple  # half the two-copy q_y at twice each probe
    differences: tuple  # doubled - single
    passed: bool
    meta: dict


# ---------------------------------------------------------------------------
# shared plumbing


def _source_pure(source):
    """Pure source with X compressed, Y targeted, remaining labels reference."""
    if isinstance(source, DensityOperator):
        source = purify(source, ref_label=_fresh("R", source.labels))
    if not isinstance(source, PureState):
        raise ValidationError(f"expected a PureState, got {type(source).__name__}")
    if "X" not in source.labels or "Y" not in source.labels:
        raise ValidationError("pure source must carry subsystems labeled 'X' and 'Y'")
    refs = [l for l in source.labels if l not in ("X", "Y")]
    return source, refs


@dataclass
class _Attained:
    # one measured channel: both informations plus the isometry earning them
    a: float  # I(Y;W)
    r: float  # I(YR;W)
    mat: np.ndarray
    d_w: int
    d_v: int


class _Measurer:
    """Evaluates isometry matrices of varying output dims against one source."""

    def __init__(self, psi, x_labels, y_labels, ref_labels):
        self.psi = psi
        self.groups = (tuple(x_labels), tuple(y_labels), tuple(ref_labels))
        self._cache = {}

    def prime(self, prob: _Problem):
        self._cache[(prob.d_w, prob.d_v)] = prob

    def problem(self, d_w: int, d_v: int) -> _Problem:
        key = (d_w, d_v)
        if key not in self._cache:
            x, y, r = self.groups
            self._cache[key] = _Problem(self.psi, x, y, r, d_w, d_v)
        return self._cache[key]

    def measure(self, mat, d_w: int, d_v: int) -> _Attained:
        mats = np.asarray(mat, dtype=complex)[None, :, :]
        i_yw, i_yrw = self.problem(d_w, d_v).mis_of_matrices(mats)
        return _Attained(float(i_yw[0]), float(i_yrw[0]), np.asarray(mat, dtype=complex), d_w, d_v)


def _vertex_records(vertices, d_x, d_w, d_v) -> list:
    out = []
    for a, r, theta in vertices:
        mat = _matrices_from_params(theta[None, :], d_x, d_w, d_v)[0]
        out.append(_Attained(float(a), float(r), mat, d_w, d_v))
    return out


def _padded(mat, d_w, d_v, big_w, big_v):
    if (d_w, d_v) == (big_w, big_v):
        return mat
    out = np.zeros((big_w, big_v, mat.shape[1]), dtype=complex)
    out[:d_w, :d_v] = mat.reshape(d_w, d_v, mat.shape[1])  # zero padding leaves every MI unchanged
    return out.reshape(big_w * big_v, mat.shape[1])


def _best_under_cap(records, cap, measurer):
    """Largest attained I(Y;W) whose leak I(YR;W) stays under the cap.

    records are lower-hull vertices ordered by I(Y;W); the segment
    between two vertices is attained exactly by a flag mixture, so the
    crossing point is re-measured instead of interpolated.
    """
    rs = [p.r for p in records]
    k = -1
    for i, r in enumerate(rs):
        if r <= cap + _SNAP:
            k = i
    if k < 0:
        # cap below everything attained; report the least-leak vertex honestly
        j = int(np.argmin(rs))
        return records[j], False
    if k == len(records) - 1:
        return records[k], True
    lo, hi = records[k], records[k + 1]
    lam = (cap - lo.r) / (hi.r - lo.r)
    if lam <= _SNAP:
        return lo, True
    if lam >= 1.0 - _SNAP:
        return hi, hi.r <= cap + 1e-6
    big_w, big_v = max(lo.d_w, hi.d_w), max(lo.d_v, hi.d_v)
    mix = _mixture_isometry(
        _padded(lo.mat, lo.d_w, lo.d_v, big_w, big_v),
        _padded(hi.mat, hi.d_w, hi.d_v, big_w, big_v),
        lam,
        big_w,
        big_v,
    )
    got = measurer.measure(mix, 2 * big_w, 2 * big_v)
    return got, got.r <= cap + 1e-6


def _source_digest(psi: PureState) -> str:
    return fingerprint({"vector": psi.vector, "dims": list(psi.dims), "labels": list(psi.labels)})


# ---------------------------------------------------------------------------
# operations


def wak_boundary(
    psi_XYR, QX_grid, cfg: Optional[SolverConfig] = None, refine: bool = True
) -> RegionBoundary:
    """Least primary rate q_y for each helper rate q_x, with witnesses.

    One bottleneck hull is solved for the source and then inverted at
    the cap 2*q_x for every grid point, so adjacent points reuse the
    same flanking witnesses; q_y = H(Y) - I(Y;W)/2 at the measured
    crossing.  Values are attained, hence honest upper bounds on the
    true frontier.
    """
    cfg = cfg if cfg is not None else _default_quantum_config()
    psi, refs = _source_pure(psi_XYR)
    d_x = psi.dim_of("X")
    d_w = cfg.d_W if cfg.d_W is not None else d_x + 1
    d_v = cfg.d_V if cfg.d_V is not None else d_x * d_w
    prob = _Problem(psi, ["X"], ["Y"], refs, d_w, d_v)
    qx = _grid_to_array(QX_grid, prob.s_x, "helper rate")

    _, vertices = _solve(prob, cfg, "quantum-ib", None, refine=refine)
    measurer = _Measurer(psi, ["X"], ["Y"], refs)
    measurer.prime(prob)
    records = _vertex_records(vertices, d_x, d_w, d_v)

    points = []
    witnesses = []
    for q in qx:
        cap = 2.0 * float(q)
        rec, ok = _best_under_cap(records, cap, measurer)
        q_y = prob.s_y - 0.5 * rec.a
        if q_y < -1e-9:
            raise ValidationError(f"negative primary rate {q_y} from an attained point")
        theta = params_from_isometry(rec.mat, d_x, rec.d_w, rec.d_v)
        witnesses.append(
            QIBPoint(
                a=cap,
                value=rec.a,
                witness_params=theta,
                achieved_constraint=rec.r,
                converged=bool(ok),
                witness_d_w=rec.d_w,
                witness_d_v=rec.d_v,
            )
        )
        points.append(RatePair(q_x=float(q), q_y=max(0.0, float(q_y))))

    meta = {
        "kind": "wak-boundary",
        "source": _source_digest(psi),
        "config": cfg.digest(),
        "seed": cfg.seed,
        "d_w": d_w,
        "d_v": d_v,
        "grid": [float(q) for q in qx],
        "h_y": prob.s_y,
        "s_x": prob.s_x,
        "i_xy": prob.i_xy,
        "hull_info": [[rec.a, rec.r] for rec in records],
    }
    return RegionBoundary(points=tuple(points), witnesses=tuple(witnesses), meta=meta)


def purity_complement_check(
    theta, psi_XYR, d_w: Optional[int] = None, d_v: Optional[int] = None
) -> float:
    """Gap between two reads of the primary rate on one pure extension.

    On the pure output of a channel extension, I(Y;RV)/2 must equal
    H(Y) - I(Y;W)/2; both sides are computed through independent partial
    traces and the absolute difference returned.  This identity is what
    lets wak_boundary trade its minimization for a bottleneck maximum.
    """
    psi, refs = _source_pure(psi_XYR)
    d_x = psi.dim_of("X")
    if d_w is None:
        d_w = d_x + 1
    if d_v is None:
        d_v = d_x * d_w
    iso = isometry_from_params(np.asarray(theta, dtype=float), d_x, d_w, d_v)
    w_label = _fresh("W", psi.labels)
    v_label = _fresh("V", psi.labels + (w_label,))
    sigma = stinespring_extend(iso, psi, "X", w_label=w_label, v_label=v_label)
    h_y = von_neumann_entropy(partial_trace(sigma, ["Y"])).value
    i_yw = mutual_information(sigma, ["Y"], [w_label])
    i_yrv = mutual_information(sigma, ["Y"], refs + [v_label])
    return float(abs(0.5 * i_yrv - (h_y - 0.5 * i_yw)))


def _paired_isometry(m0, m1, d_w, d_v) -> np.ndarray:
    """Product channel on two source copies, rows regrouped to (WW, VV)."""
    d0, d1 = m0.shape[1], m1.shape[1]
    kron = np.kron(m0, m1).reshape(d_w, d_v, d_w, d_v, d0 * d1)
    return kron.transpose(0, 2, 1, 3, 4).reshape(d_w * d_w * d_v * d_v, d0 * d1)


def _thinned_multipliers(beta_grid):
    # the two-copy run is a probe, not a production sweep
    if beta_grid is None:
        return (0.0, 0.9, 2.0, 4.5, 10.0, 24.0)
    bg = tuple(float(b) for b in beta_grid)
    if len(bg) <= 6:
        return bg
    idx = np.unique(np.linspace(0, len(bg) - 1, 6).round().astype(int))
    return tuple(bg[int(i)] for i in idx)


def additivity_check(
    psi_XYR,
    QX_probes,
    cfg: Optional[SolverConfig] = None,
    doubled_dims: Optional[tuple] = None,
) -> AdditivityReport:
    """Half the two-copy boundary against the single-copy boundary.

    The two-copy hull is built from an exhaustive pairing of single-copy
    hull witnesses, each product evaluated exactly at its own dims, plus
    an independent small-dimension descent.  Products keep the doubled
    side from ever lagging the single one beyond numerical dust, and the
    descent probes whether joint encodings beat them; differences are
    expected in [-2e-2, 1e-6].
    """
    cfg = cfg if cfg is not None else _default_quantum_config()
    psi, refs = _source_pure(psi_XYR)
    ambient = int(np.prod(psi.dims))
    if ambient * ambient > _SCALE_LIMIT:
        raise ValidationError(
            f"two-copy source dimension {ambient * ambient} exceeds the desk-scale limit {_SCALE_LIMIT}"
        )
    d_x = psi.dim_of("X")
    d_w = cfg.d_W if cfg.d_W is not None else d_x + 1
    d_v = cfg.d_V if cfg.d_V is not None else d_x * d_w
    if (d_w * d_v) ** 2 > _SCALE_LIMIT:
        raise ValidationError(
            f"paired witnesses would need dimension {(d_w * d_v) ** 2}, over the desk-scale limit {_SCALE_LIMIT}"
        )

    prob1 = _Problem(psi, ["X"], ["Y"], refs, d_w, d_v)
    probes = _grid_to_array(QX_probes, prob1.s_x, "helper rate")
    _, verts1 = _solve(prob1, cfg, "quantum-ib", None, refine=True)
    meas1 = _Measurer(psi, ["X"], ["Y"], refs)
    meas1.prime(prob1)
    recs1 = _vertex_records(verts1, d_x, d_w, d_v)

    single = []
    for q in probes:
        rec, _ = _best_under_cap(recs1, 2.0 * float(q), meas1)
        single.append(prob1.s_y - 0.5 * rec.a)

    psi2 = tensor_pure(psi, psi, rename=("1", "2"))
    x2, y2 = ["X1", "X2"], ["Y1", "Y2"]
    refs2 = [r + "1" for r in refs] + [r + "2" for r in refs]
    if doubled_dims is None:
        dw2 = min(d_x * d_x, 4)
        dv2 = max(dw2, -(-(d_x * d_x) // dw2))
    else:
        dw2, dv2 = int(doubled_dims[0]), int(doubled_dims[1])
    cfg2 = dataclasses.replace(
        cfg,
        d_W=dw2,
        d_V=dv2,
        restarts=min(cfg.restarts, 4),
        max_iters=min(cfg.max_iters, 40),
        beta_grid=_thinned_multipliers(cfg.beta_grid),
    )
    prob2 = _Problem(psi2, x2, y2, refs2, dw2, dv2)
    _, verts2 = _solve(prob2, cfg2, "quantum-ib", None, refine=False)
    meas2 = _Measurer(psi2, x2, y2, refs2)
    meas2.prime(prob2)
    cand = _vertex_records(verts2, d_x * d_x, dw2, dv2)
    for i, j in combinations_with_replacement(range(len(recs1)), 2):
        pm = _paired_isometry(recs1[i].mat, recs1[j].mat, d_w, d_v)
        cand.append(meas2.measure(pm, d_w * d_w, d_v * d_v))
    env = lower_envelope([c.a for c in cand], [c.r for c in cand])
    hull2 = [cand[int(k)] for k in env.vertex_index]

    doubled = []
    diffs = []
    for q, s in zip(probes, single):
        rec, _ = _best_under_cap(hull2, 4.0 * float(q), meas2)
        half = 0.5 * (prob2.s_y - 0.5 * rec.a)
        doubled.append(half)
        diffs.append(half - s)
    passed = all(-2e-2 <= d <= 1e-6 for d in diffs)

    meta = {
        "kind": "additivity-check",
        "source": _source_digest(psi),
        "config": cfg.digest(),
        "doubled_config": cfg2.digest(),
        "dims": [d_w, d_v],
        "doubled_dims": [dw2, dv2],
        "pass_band": [-2e-2, 1e-6],
        "hull_sizes": [len(recs1), len(hull2)],
    }
    return AdditivityReport(
        probes=tuple(float(q) for q in probes),
        single=tuple(float(v) for v in single),
        doubled=tuple(float(v) for v in doubled),
        differences=tuple(float(v) for v in diffs),
        passed=bool(passed),
        meta=meta,
    )
