"""Variational bottleneck and funnel solvers for bipartite quantum states.

The decision variable is a Stinespring isometry on the compressed
subsystem, in the generator coordinates of `channels`.  Mutual
informations of the extended pure state are evaluated in batch straight
from reduced spectra, a masked finite-difference descent sweeps a family
of scalarized objectives, and certified points are read off the convex
envelope of everything the sweep achieved.  Interior grid abscissae are
witnessed by a flagged mixture of the two flanking envelope vertices, so
every reported value is reproducible from its witness parameters alone.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.random import SeedSequence, default_rng
from scipy.special import xlogy

from .channels import isometry_from_params, params_from_isometry, stinespring_extend
from .classical_ib import _grid_to_array
from .curves import Curve, SolverConfig, convexity_report, lower_envelope, upper_envelope
from .errors import ValidationError
from .states import (
    DensityOperator,
    PureState,
    mutual_information,
    partial_trace,
    purify,
    von_neumann_entropy,
)

__all__ = [
    "QIBPoint",
    "EquivalenceReport",
    "quantum_ib_curve",
    "quantum_pf_curve",
    "dimension_study",
    "normalize_curve",
    "ib_objective",
    "witness_information_pair",
    "equivalence_check",
    "convexity_check",
]

_LN2 = float(np.log(2.0))
_SNAP = 1e-9
_SWEEP_TAG = 11


@dataclass(frozen=True)
class QIBPoint:
    """One certified curve point.

    `witness_params` are generator coordinates of an isometry into a
    `witness_d_w`-dimensional bottleneck with a `witness_d_v`-dimensional
    environment (doubled dimensions for time-shared points); re-evaluating
    them reproduces `value` and `achieved_constraint`.
    """

    a: float
    value: float
    witness_params: np.ndarray
    achieved_constraint: float
    converged: bool
    witness_d_w: int
    witness_d_v: int

    def __post_init__(self):
        params = np.array(self.witness_params, dtype=float)
        params.setflags(write=False)
        object.__setattr__(self, "witness_params", params)

    @property
    def abscissa(self) -> float:
        return self.a


@dataclass(frozen=True)
class EquivalenceReport:
    lhs: float
    rhs: float
    gap: float


def _spectral_entropy(eigs: np.ndarray) -> np.ndarray:
    e = np.clip(eigs, 0.0, None)
    return -xlogy(e, e).sum(axis=-1) / _LN2


def _matrices_from_params(thetas: np.ndarray, d_in: int, d_w: int, d_v: int) -> np.ndarray:
    """Batched isometries exp(A)[:, :d_in] from packed generator rows."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    n = d_w * d_v
    if thetas.shape[1] != n * n:
        raise ValidationError(
            f"expected parameter vectors of length {n * n} for dims ({d_w}, {d_v})"
        )
    m = thetas.shape[0]
    rows, cols = np.triu_indices(n, k=1)
    h = np.zeros((m, n, n), dtype=complex)
    # hermitian H = A/i in the same packing the scalar path uses
    h[:, rows, cols] = thetas[:, n + 1 :: 2] - 1j * thetas[:, n::2]
    h[:, cols, rows] = thetas[:, n + 1 :: 2] + 1j * thetas[:, n::2]
    h[:, np.arange(n), np.arange(n)] = thetas[:, :n]
    eigs, vecs = np.linalg.eigh(h)
    spun = vecs * np.exp(1j * eigs)[:, None, :]
    return spun @ vecs[:, :d_in, :].conj().transpose(0, 2, 1)


class _Problem:
    """Precomputed tensors for one (pure source, d_W, d_V) instance.

    The source is held as a matrix from the compressed subsystem to the
    flattened (target, reference) side, so a batch of channel isometries
    turns into amplitudes with a single matmul.
    """

    def __init__(self, psi: PureState, x_labels, y_labels, ref_labels, d_w: int, d_v: int):
        self.x_labels = tuple(x_labels)
        self.y_labels = tuple(y_labels)
        self.ref_labels = tuple(ref_labels)
        self.d_x = int(np.prod([psi.dim_of(l) for l in self.x_labels]))
        self.d_y = int(np.prod([psi.dim_of(l) for l in self.y_labels]))
        self.d_r = int(np.prod([psi.dim_of(l) for l in self.ref_labels])) if self.ref_labels else 1
        if d_w < 1 or d_v < 1:
            raise ValidationError("bottleneck and environment dimensions must be >= 1")
        if d_w * d_v < self.d_x:
            raise ValidationError(
                f"d_W * d_V = {d_w * d_v} cannot host an isometry from dimension {self.d_x}"
            )
        self.d_w, self.d_v = int(d_w), int(d_v)
        self.n = self.d_w * self.d_v
        self.p = self.n * self.n
        self.psi = psi

        axes = [psi.axis_of(l) for l in self.x_labels + self.y_labels + self.ref_labels]
        axes += [k for k in range(len(psi.dims)) if k not in axes]  # degenerate, keeps reshape total
        tensor = psi.vector.reshape(psi.dims).transpose(axes)
        tensor = tensor.reshape(self.d_x, self.d_y, self.d_r)
        self.psi_mat = np.ascontiguousarray(tensor.reshape(self.d_x, self.d_y * self.d_r))

        rho_x = self.psi_mat @ self.psi_mat.conj().T
        rho_y = np.einsum("xyr,xzr->yz", tensor, tensor.conj())
        rho_r = np.einsum("xyr,xys->rs", tensor, tensor.conj())
        self.s_x = float(_spectral_entropy(np.linalg.eigvalsh(rho_x)))
        self.s_y = float(_spectral_entropy(np.linalg.eigvalsh(rho_y)))
        # the joint (X, Y) entropy equals the reference entropy by purity
        self.s_xy = float(_spectral_entropy(np.linalg.eigvalsh(rho_r)))
        self.i_xy = max(0.0, self.s_x + self.s_y - self.s_xy)
        self._chunk = max(1, int(6.0e7 / (16.0 * self.n * self.n)))

    def mis_of_matrices(self, mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = mats.shape[0]
        t = (mats @ self.psi_mat).reshape(m, self.d_w, self.d_v, self.d_y, self.d_r)
        rows_w = t.reshape(m, self.d_w, -1)
        rho_w = rows_w @ rows_w.conj().transpose(0, 2, 1)
        rows_v = t.transpose(0, 2, 1, 3, 4).reshape(m, self.d_v, -1)
        rho_v = rows_v @ rows_v.conj().transpose(0, 2, 1)
        s_w = _spectral_entropy(np.linalg.eigvalsh(rho_w))
        s_v = _spectral_entropy(np.linalg.eigvalsh(rho_v))
        if self.d_w * self.d_y <= self.d_v * self.d_r:
            rows_j = t.transpose(0, 1, 3, 2, 4).reshape(m, self.d_w * self.d_y, -1)
        else:
            # purity: the (target, bottleneck) entropy equals the complement's
            rows_j = t.transpose(0, 2, 4, 1, 3).reshape(m, self.d_v * self.d_r, -1)
        joint = rows_j @ rows_j.conj().transpose(0, 2, 1)
        s_wy = _spectral_entropy(np.linalg.eigvalsh(joint))
        i_yw = np.maximum(self.s_y + s_w - s_wy, 0.0)
        # I(YR;W) = S(X) + S(W) - S(V): S(YR) is untouched by the channel
        # and S(YRW) = S(V) on the extended pure state
        i_yrw = np.maximum(self.s_x + s_w - s_v, 0.0)
        return i_yw, i_yrw

    def mis(self, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        m = thetas.shape[0]
        i_yw = np.empty(m)
        i_yrw = np.empty(m)
        for lo in range(0, m, self._chunk):
            sl = slice(lo, min(lo + self._chunk, m))
            mats = _matrices_from_params(thetas[sl], self.d_x, self.d_w, self.d_v)
            i_yw[sl], i_yrw[sl] = self.mis_of_matrices(mats)
        return i_yw, i_yrw


def _problem_from_state(rho, d_w: Optional[int], d_v: Optional[int]) -> _Problem:
    if isinstance(rho, PureState):
        rho = rho.to_density()
    if not isinstance(rho, DensityOperator):
        raise ValidationError(f"expected a DensityOperator, got {type(rho).__name__}")
    if len(rho.labels) != 2:
        raise ValidationError("expected a bipartite state; the first subsystem is compressed")
    ref = "R"
    while ref in rho.labels:
        ref += "_"
    psi = purify(rho, ref_label=ref)
    d_x = rho.dims[0]
    if d_w is None:
        d_w = d_x + 1
    if d_v is None:
        d_v = d_x * d_w
    return _Problem(psi, [rho.labels[0]], [rho.labels[1]], [ref], d_w, d_v)


def _default_quantum_config() -> SolverConfig:
    # finite-difference iterations are costly; stall detection does the
    # real stopping, this only caps runaway rows
    return SolverConfig(max_iters=240, tol=1e-7)


# ---------------------------------------------------------------------------
# descent


def _descend(loss_of, theta0: np.ndarray, cfg: SolverConfig, max_iters: int):
    """Masked lockstep descent: rows run independently, stalled rows leave.

    loss_of(thetas, rows) evaluates a batch where row k of `thetas`
    belongs to the original restart index rows[k].
    """
    theta = np.array(theta0, dtype=float)
    m, p = theta.shape
    loss = loss_of(theta, np.arange(m))
    eta = np.full(m, 0.25)
    stall = np.zeros(m, dtype=int)
    done = np.zeros(m, dtype=bool)
    coord_blk = max(1, 4000 // max(1, m))
    for _ in range(max_iters):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        th = theta[act]
        grad = np.empty((act.size, p))
        blk = max(coord_blk, 4000 // act.size) if act.size else p
        for c0 in range(0, p, blk):
            k = min(blk, p - c0)
            pert = np.repeat(th[:, None, :], 2 * k, axis=1)
            ar = np.arange(k)
            pert[:, ar, c0 + ar] += cfg.grad_step
            pert[:, k + ar, c0 + ar] -= cfg.grad_step
            vals = loss_of(pert.reshape(-1, p), np.repeat(act, 2 * k)).reshape(act.size, 2, k)
            grad[:, c0 : c0 + k] = (vals[:, 0] - vals[:, 1]) / (2.0 * cfg.grad_step)
        gsq = np.einsum("ij,ij->i", grad, grad)
        base = loss[act]
        trial = eta[act].copy()
        new_th = th.copy()
        new_loss = base.copy()
        accepted = np.zeros(act.size, dtype=bool)
        searching = gsq > 0.0
        for _bt in range(40):
            rows = np.flatnonzero(searching)
            if rows.size == 0:
                break
            cand = th[rows] - trial[rows, None] * grad[rows]
            cand_loss = loss_of(cand, act[rows])
            ok = cand_loss <= base[rows] - 1e-4 * trial[rows] * gsq[rows]
            hit = rows[ok]
            new_th[hit] = cand[ok]
            new_loss[hit] = cand_loss[ok]
            accepted[hit] = True
            searching[hit] = False
            miss = rows[~ok]
            trial[miss] *= 0.5
            searching[miss] = trial[miss] > 1e-13
        improved = base - new_loss
        rel = cfg.tol * np.maximum(1.0, np.abs(new_loss))
        flat = (~accepted) | (improved <= rel)
        stall[act] = np.where(flat, stall[act] + 1, 0)
        eta[act] = np.where(accepted, np.minimum(trial * 1.5, 1.0), 0.25)
        theta[act] = new_th
        loss[act] = new_loss
        done[act] = stall[act] >= 2
    return theta, loss, done


# ---------------------------------------------------------------------------
# reference channels and witnesses


def _anchor_isometries(prob: _Problem) -> list:
    """Closed-form channels seeding the cloud: (matrix, usable-as-seed)."""
    d_x, d_v, n = prob.d_x, prob.d_v, prob.n
    out = []
    if prob.d_v >= d_x:
        const = np.zeros((n, d_x), dtype=complex)
        const[np.arange(d_x), np.arange(d_x)] = 1.0  # bottleneck pinned to |0>
        out.append((const, False))  # exact (0, 0) point, but a descent saddle
    if prob.d_w >= d_x:
        copy = np.zeros((n, d_x), dtype=complex)
        copy[np.arange(d_x) * d_v, np.arange(d_x)] = 1.0  # coherent relay
        out.append((copy, True))
    if prob.d_w >= d_x and prob.d_v >= d_x:
        basis = np.zeros((n, d_x), dtype=complex)
        basis[np.arange(d_x) * d_v + np.arange(d_x), np.arange(d_x)] = 1.0  # basis measurement kept
        out.append((basis, True))
    return out


def _mixture_isometry(m0: np.ndarray, m1: np.ndarray, lam: float, d_w: int, d_v: int) -> np.ndarray:
    """Flag-doubled direct sum: exact time sharing of two channels.

    The flag is copied into both outputs, so every mutual information of
    the extension is exactly the lam-mixture of the branch values.
    """
    d_in = m0.shape[1]
    out = np.zeros((2 * d_w, 2 * d_v, d_in), dtype=complex)
    out[:d_w, :d_v] = np.sqrt(1.0 - lam) * m0.reshape(d_w, d_v, d_in)
    out[d_w:, d_v:] = np.sqrt(lam) * m1.reshape(d_w, d_v, d_in)
    return out.reshape(4 * d_w * d_v, d_in)


# ---------------------------------------------------------------------------
# sweep engine

# objective orientations: weights (w_yw, w_yrw) applied to (I(Y;W), I(YR;W)),
# the hull coordinate order, its side, and the constraint sense at a grid point
_MODES = {
    "quantum-ib": {"weight": lambda b: (-b, 1.0), "x": 0, "hull": "lower", "sense": "floor"},
    "quantum-pf": {"weight": lambda b: (1.0, -b), "x": 1, "hull": "lower", "sense": "floor"},
    "quantum-pf-dual": {"weight": lambda b: (b, -1.0), "x": 0, "hull": "upper", "sense": "cap"},
}


def _default_multipliers(kind: str) -> tuple:
    if kind == "quantum-pf":
        slopes = list(np.linspace(0.0, 1.0, 9)) + [0.97, 0.99, 1.02]
        return tuple(sorted(set(round(s, 12) for s in slopes)))
    return (0.0,) + tuple(np.geomspace(0.9, 32.0, 12))


def _seed_rows(prob, cfg, b_indices, structured):
    """Restart seeds: structured channels first, then per-task randomness."""
    rows = []
    for b_idx in b_indices:
        for r_idx in range(cfg.restarts):
            if r_idx < len(structured):
                rows.append(structured[r_idx])
            else:
                ss = SeedSequence([cfg.seed, _SWEEP_TAG, int(b_idx), r_idx])
                rows.append(default_rng(ss).uniform(-np.pi, np.pi, prob.p))
    return np.array(rows)


class _Cloud:
    """Achieved (I(Y;W), I(YR;W), theta) triples, deduplicated lazily."""

    def __init__(self):
        self.x1 = []  # I(Y;W)
        self.x2 = []  # I(YR;W)
        self.thetas = []

    def add(self, i_yw, i_yrw, thetas):
        self.x1.extend(float(v) for v in np.atleast_1d(i_yw))
        self.x2.extend(float(v) for v in np.atleast_1d(i_yrw))
        arr = np.atleast_2d(thetas)
        self.thetas.extend(np.array(row) for row in arr)

    def coords(self, mode):
        xs = np.array(self.x1 if mode["x"] == 0 else self.x2)
        ys = np.array(self.x2 if mode["x"] == 0 else self.x1)
        return xs, ys

    def envelope(self, mode):
        xs, ys = self.coords(mode)
        env = lower_envelope(xs, ys) if mode["hull"] == "lower" else upper_envelope(xs, ys)
        return env


def _run_tasks(prob, cfg, mode, mults, b_start, structured, cloud, max_iters):
    mults = [float(b) for b in mults]
    if not mults:
        return
    weights = np.array(
        [mode["weight"](b) for b in mults for _ in range(cfg.restarts)], dtype=float
    )
    theta0 = _seed_rows(prob, cfg, range(b_start, b_start + len(mults)), structured)

    def loss_of(th, rows):
        i_yw, i_yrw = prob.mis(th)
        return weights[rows, 0] * i_yw + weights[rows, 1] * i_yrw

    theta, _, _ = _descend(loss_of, theta0, cfg, max_iters)
    i_yw, i_yrw = prob.mis(theta)
    cloud.add(i_yw, i_yrw, theta)


def _chord_multipliers(env, grid, used) -> list:
    """Hull slopes of segments spanning interior grid abscissae."""
    vx, vy = env.vertex_x, env.vertex_y
    fresh = []
    for g in grid:
        if g <= vx[0] + _SNAP or g >= vx[-1] - _SNAP:
            continue
        j = int(np.searchsorted(vx, g, side="right"))
        dx = vx[j] - vx[j - 1]
        if dx <= 1e-9:
            continue
        s = float((vy[j] - vy[j - 1]) / dx)
        if not np.isfinite(s) or s <= 0.0:
            continue
        if all(abs(s - u) > 1e-6 * max(1.0, abs(u)) for u in used + fresh):
            fresh.append(s)
    return fresh


def _penalty_refine(prob, cfg, mode, targets, cloud, max_iters):
    """Tighten each requested abscissa with a quadratic constraint penalty.

    Deterministic: warm starts are the two envelope vertices flanking the
    abscissa, the weight ladder doubles from 4 up to 1e6.
    """
    env = cloud.envelope(mode)
    vx = env.vertex_x
    starts, t_of_row = [], []
    for g in targets:
        if g <= vx[0] + _SNAP or g >= vx[-1] - _SNAP:
            continue
        if np.min(np.abs(vx - g)) <= _SNAP:
            continue
        j = int(np.searchsorted(vx, g, side="right"))
        for k in (j - 1, j):
            starts.append(cloud.thetas[int(env.vertex_index[k])])
            t_of_row.append(g)
    if not starts:
        return
    theta = np.array(starts)
    t_arr = np.array(t_of_row)
    sign = 1.0 if mode["sense"] == "floor" else -1.0
    mus = [4.0 * 2.0**k for k in range(18)] + [1e6]
    stage_iters = max(8, min(30, max_iters // 15))

    def loss_for(mu):
        def loss_of(th, rows):
            i_yw, i_yrw = prob.mis(th)
            con = i_yw if mode["x"] == 0 else i_yrw
            obj = i_yrw if mode["x"] == 0 else i_yw
            gap = sign * (t_arr[rows] - con)
            return sign * obj + mu * np.square(np.maximum(gap, 0.0))

        return loss_of

    for mu in mus:
        theta, _, _ = _descend(loss_for(mu), theta, cfg, stage_iters)
    i_yw, i_yrw = prob.mis(theta)
    cloud.add(i_yw, i_yrw, theta)


def _strict_certify(prob, cloud, mode, grid):
    """Grid points from single witnesses of the native size; no time sharing.

    For each abscissa the best feasible cloud point wins outright, so the
    resulting curve may be non-convex where the envelope would mix.
    """
    con_all, obj_all = cloud.coords(mode)
    floor = mode["sense"] == "floor"
    points = []
    for a in np.asarray(grid, dtype=float):
        feas = con_all >= a - 1e-6 if floor else con_all <= a + 1e-6
        if np.any(feas):
            idx = np.flatnonzero(feas)
            k = idx[np.argmin(obj_all[idx])] if floor else idx[np.argmax(obj_all[idx])]
            ok = True
        else:
            k = int(np.argmax(con_all)) if floor else int(np.argmin(con_all))
            ok = False
        points.append(
            QIBPoint(
                a=float(a),
                value=float(obj_all[k]),
                witness_params=np.array(cloud.thetas[int(k)]),
                achieved_constraint=float(con_all[k]),
                converged=ok,
                witness_d_w=prob.d_w,
                witness_d_v=prob.d_v,
            )
        )
    return points


def _certify(prob, cloud, mode, grid):
    """Grid points from the envelope, each with an exactly re-measured witness."""
    env = cloud.envelope(mode)
    sense = mode["sense"]
    sub = None  # doubled-dimension evaluator, built on first mixture
    points = []
    for ev in env.evaluate(grid):
        a = float(ev.abscissa)
        if ev.left == ev.right:
            k = ev.left
            x1, x2 = cloud.x1[k], cloud.x2[k]
            con, obj = (x1, x2) if mode["x"] == 0 else (x2, x1)
            theta, d_w, d_v = cloud.thetas[k], prob.d_w, prob.d_v
        else:
            lam = float(ev.weight)
            m_l = _matrices_from_params(cloud.thetas[ev.left], prob.d_x, prob.d_w, prob.d_v)[0]
            m_r = _matrices_from_params(cloud.thetas[ev.right], prob.d_x, prob.d_w, prob.d_v)[0]
            mix = _mixture_isometry(m_l, m_r, lam, prob.d_w, prob.d_v)
            theta = params_from_isometry(mix, prob.d_x, 2 * prob.d_w, 2 * prob.d_v)
            if sub is None:
                sub = _Problem(
                    prob.psi, prob.x_labels, prob.y_labels, prob.ref_labels,
                    2 * prob.d_w, 2 * prob.d_v,
                )
            i_yw, i_yrw = sub.mis(theta[None, :])
            x1, x2 = float(i_yw[0]), float(i_yrw[0])
            con, obj = (x1, x2) if mode["x"] == 0 else (x2, x1)
            d_w, d_v = sub.d_w, sub.d_v
        if sense == "floor":
            ok = con >= a - 1e-6
        else:
            ok = con <= a + 1e-6
        points.append(
            QIBPoint(
                a=a,
                value=float(obj),
                witness_params=theta,
                achieved_constraint=float(con),
                converged=bool(ok),
                witness_d_w=int(d_w),
                witness_d_v=int(d_v),
            )
        )
    return points, env


def _solve(prob, cfg, kind, grid, extra_isometries=(), refine=True, rounds=2, mixtures=True):
    """Shared driver: anchors, fused multiplier sweep, chord rounds,
    penalty refinement, certification.  Returns (curve, hull vertices).

    mixtures=False certifies from single witnesses of the native size
    instead of the envelope; the curve is then dimension-honest."""
    mode = _MODES[kind]
    cloud = _Cloud()
    structured = []
    for mat, seedable in _anchor_isometries(prob):
        theta = params_from_isometry(mat, prob.d_x, prob.d_w, prob.d_v)
        i_yw, i_yrw = prob.mis(theta[None, :])
        cloud.add(i_yw, i_yrw, theta[None, :])
        if seedable:
            structured.append(theta)
    for mat in extra_isometries:
        theta = params_from_isometry(np.asarray(mat, dtype=complex), prob.d_x, prob.d_w, prob.d_v)
        i_yw, i_yrw = prob.mis(theta[None, :])
        cloud.add(i_yw, i_yrw, theta[None, :])
        structured.append(theta)

    mults = list(cfg.beta_grid) if cfg.beta_grid is not None else list(_default_multipliers(kind))
    used = list(mults)
    # the source carries no reference exactly when it is pure; then both
    # informations coincide, the cloud sits on a line, and descent adds nothing
    degenerate = prob.d_r == 1
    if not degenerate:
        _run_tasks(prob, cfg, mode, mults, 0, structured, cloud, cfg.max_iters)

    if grid is None:
        xs, _ = cloud.coords(mode)
        top = float(xs.max())
        if kind != "quantum-pf":
            top = min(top, prob.i_xy)
        grid_arr = np.linspace(0.0, top, 9) if top > 1e-12 else np.array([0.0])
    else:
        upper = 2.0 * prob.s_x if kind == "quantum-pf" else prob.i_xy
        what = "funnel" if kind == "quantum-pf" else "bottleneck"
        grid_arr = _grid_to_array(grid, upper, what)

    if not degenerate:
        b_next = len(mults)
        for _ in range(rounds):
            fresh = _chord_multipliers(cloud.envelope(mode), grid_arr, used)
            if not fresh:
                break
            round_cfg = dataclasses.replace(cfg, restarts=min(cfg.restarts, 6))
            _run_tasks(prob, round_cfg, mode, fresh, b_next, structured, cloud, cfg.max_iters)
            used += fresh
            b_next += len(fresh)
        if refine:
            _penalty_refine(prob, cfg, mode, grid_arr, cloud, cfg.max_iters)

    if mixtures:
        points, env = _certify(prob, cloud, mode, grid_arr)
    else:
        points = _strict_certify(prob, cloud, mode, grid_arr)
        env = cloud.envelope(mode)
    meta = {
        "kind": kind,
        "restricted": not mixtures,
        "d_w": prob.d_w,
        "d_v": prob.d_v,
        "dims": [prob.d_x, prob.d_y, prob.d_r],
        "grid": [float(g) for g in grid_arr],
        "config": cfg.digest(),
        "seed": cfg.seed,
        "i_xy": prob.i_xy,
        "s_x": prob.s_x,
        "s_y": prob.s_y,
        "multipliers": [float(b) for b in used],
        "cloud": [[x, y] for x, y in zip(cloud.x1, cloud.x2)],
        "hull_x": [float(v) for v in env.vertex_x],
        "hull_y": [float(v) for v in env.vertex_y],
    }
    vertices = [
        (float(x), float(y), np.array(cloud.thetas[int(k)]))
        for x, y, k in zip(env.vertex_x, env.vertex_y, env.vertex_index)
    ]
    return Curve(points=tuple(points), meta=meta), vertices


# ---------------------------------------------------------------------------
# public operations


def quantum_ib_curve(rho_XY, cfg: Optional[SolverConfig] = None, grid=None, refine: bool = True) -> Curve:
    """Bottleneck curve: least I(YR;W) given I(Y;W) >= a, per grid abscissa a.

    Values are attained upper bounds carried by explicit witnesses; the
    curve is the convex lower envelope of the achieved cloud.
    """
    cfg = cfg if cfg is not None else _default_quantum_config()
    prob = _problem_from_state(rho_XY, cfg.d_W, cfg.d_V)
    curve, _ = _solve(prob, cfg, "quantum-ib", grid, refine=refine)
    return curve


def quantum_pf_curve(
    rho_XY, cfg: Optional[SolverConfig] = None, grid=None, dual: bool = False, refine: bool = True
) -> Curve:
    """Funnel curve: least I(Y;W) given I(YR;W) >= t.

    With dual=True, returns the flipped form instead: the largest
    attained I(YR;W) given I(Y;W) <= a, as an upper concave envelope.
    """
    cfg = cfg if cfg is not None else _default_quantum_config()
    prob = _problem_from_state(rho_XY, cfg.d_W, cfg.d_V)
    kind = "quantum-pf-dual" if dual else "quantum-pf"
    curve, _ = _solve(prob, cfg, kind, grid, refine=refine)
    return curve


def dimension_study(
    rho_XY, dW_list, cfg: Optional[SolverConfig] = None, grid=None, refine: bool = True
) -> list:
    """Bottleneck curves for ascending d_W values on a shared grid.

    Each run embeds the previous run's envelope vertices as exact anchors
    and warm starts, so curves are pointwise non-increasing in d_W up to
    solver noise.

    Every value is attained by a single isometry of the stated size: no
    time sharing, since the flag register would enlarge W.  A study curve
    can therefore be non-convex where the unrestricted envelope would mix.
    """
    dims = [int(k) for k in dW_list]
    if len(dims) == 0:
        raise ValidationError("dW_list must be non-empty")
    if any(b <= a for a, b in zip(dims, dims[1:])) or dims[0] < 1:
        raise ValidationError("dW_list must be strictly increasing and >= 1")
    cfg = cfg if cfg is not None else _default_quantum_config()
    if isinstance(rho_XY, PureState):
        rho_XY = rho_XY.to_density()
    d_x = rho_XY.dims[0]
    curves = []
    prev = None  # (vertices, d_w, d_v) of the previous run
    grid_arr = None if grid is None else np.asarray(list(grid), dtype=float)
    for d_w in dims:
        d_v = cfg.d_V if cfg.d_V is not None else d_x * d_w
        cfg_k = dataclasses.replace(cfg, d_W=d_w, d_V=d_v)
        prob = _problem_from_state(rho_XY, d_w, d_v)
        extras = []
        if prev is not None:
            verts, pw, pv = prev
            for _, _, theta in verts:
                small = _matrices_from_params(theta[None, :], d_x, pw, pv)[0]
                big = np.zeros((d_w, d_v, d_x), dtype=complex)
                big[:pw, :pv] = small.reshape(pw, pv, d_x)  # zero padding leaves every MI unchanged
                extras.append(big.reshape(d_w * d_v, d_x))
        curve, verts = _solve(prob, cfg_k, "quantum-ib", grid_arr, extras, refine=refine, mixtures=False)
        if grid_arr is None:
            grid_arr = np.array(curve.meta["grid"])
        curves.append(curve)
        prev = (verts, d_w, d_v)
    return curves


def normalize_curve(curve: Curve, rho_XY, mode: str) -> Curve:
    """Rescale to the unit square: abscissa by I(X;Y), value by 2 H(X).

    mode "ib" accepts bottleneck curves (quantum or classical); mode "pf"
    accepts only the dual funnel form, whose abscissa is an I(Y;W) level.
    """
    accepts = {
        "ib": ("quantum-ib", "classical-ib"),
        "pf": ("quantum-pf-dual",),
    }
    key = str(mode).lower()
    if key not in accepts:
        raise ValidationError(f"mode must be 'ib' or 'pf', got {mode!r}")
    kind = str(curve.meta.get("kind", ""))
    if kind not in accepts[key]:
        raise ValidationError(f"cannot normalize a {kind or 'kindless'} curve in {key} mode")
    if isinstance(rho_XY, PureState):
        rho_XY = rho_XY.to_density()
    if not isinstance(rho_XY, DensityOperator) or len(rho_XY.labels) != 2:
        raise ValidationError("expected the bipartite state the curve was computed from")
    lx, ly = rho_XY.labels
    i_xy = mutual_information(rho_XY, [lx], [ly])
    if i_xy <= 1e-12:
        raise ValidationError("I(X;Y) is zero; normalization undefined")
    h_x = von_neumann_entropy(partial_trace(rho_XY, [lx])).value
    den = 2.0 * h_x

    def unit(v: float, scale: float) -> float:
        u = v / scale
        if -1e-9 < u < 0.0:
            return 0.0
        if 1.0 < u < 1.0 + 1e-9:
            return 1.0
        return u

    points = []
    for pt in curve.points:
        changes = {
            "value": unit(pt.value, den),
            "achieved_constraint": unit(pt.achieved_constraint, i_xy),
        }
        if isinstance(pt, QIBPoint):
            changes["a"] = unit(pt.a, i_xy)
        else:
            changes["abscissa"] = unit(pt.abscissa, i_xy)
        points.append(dataclasses.replace(pt, **changes))
    meta = dict(curve.meta)
    meta["kind"] = kind + "-normalized"
    meta["abscissa_scale"] = float(i_xy)
    meta["value_scale"] = float(den)
    return Curve(points=tuple(points), meta=meta)


def _fresh(stem: str, taken) -> str:
    label = stem
    while label in taken:
        label += "_"
    return label


def ib_objective(theta, psi, beta: float, d_w: Optional[int] = None, d_v: Optional[int] = None):
    """Scalarized objective through the object-level pipeline.

    psi is a pure state with subsystems X (compressed), Y (target), and
    any further labels treated as reference.  Returns the triple
    (I(YR;W) - beta*I(Y;W), I(Y;W), I(YR;W)).  Slow but independent of
    the batched fast path, which is tested against it.
    """
    if isinstance(psi, DensityOperator):
        psi = purify(psi, ref_label=_fresh("R", psi.labels))
    if not isinstance(psi, PureState):
        raise ValidationError(f"expected a PureState, got {type(psi).__name__}")
    if "X" not in psi.labels or "Y" not in psi.labels:
        raise ValidationError("pure source must carry subsystems labeled 'X' and 'Y'")
    d_x = psi.dim_of("X")
    if d_w is None:
        d_w = d_x + 1
    if d_v is None:
        d_v = d_x * d_w
    iso = isometry_from_params(np.asarray(theta, dtype=float), d_x, d_w, d_v)
    w_label = _fresh("W", psi.labels)
    v_label = _fresh("V", psi.labels + (w_label,))
    sigma = stinespring_extend(iso, psi, "X", w_label=w_label, v_label=v_label)
    refs = [l for l in sigma.labels if l not in (w_label, v_label, "Y")]
    i_yw = mutual_information(sigma, ["Y"], [w_label])
    i_yrw = mutual_information(sigma, ["Y"] + refs, [w_label])
    return float(i_yrw - beta * i_yw), float(i_yw), float(i_yrw)


def witness_information_pair(rho_XY, point: QIBPoint) -> tuple[float, float]:
    """Re-measure a stored witness: returns (I(Y;W), I(YR;W))."""
    prob = _problem_from_state(rho_XY, point.witness_d_w, point.witness_d_v)
    i_yw, i_yrw = prob.mis(np.asarray(point.witness_params, dtype=float)[None, :])
    return float(i_yw[0]), float(i_yrw[0])


def equivalence_check(
    theta, rho_XY, d_w: Optional[int] = None, d_v: Optional[int] = None
) -> EquivalenceReport:
    """Two object-level routes to the compression cost of a channel.

    lhs extends the channel over a purification of rho_X alone and reads
    I(reference; W); rhs extends it over a purification of the full
    rho_XY and reads I(YR; W).  The two agree for every channel, which
    makes them mutual oracles.
    """
    if isinstance(rho_XY, PureState):
        rho_XY = rho_XY.to_density()
    if not isinstance(rho_XY, DensityOperator) or len(rho_XY.labels) != 2:
        raise ValidationError("expected a bipartite density operator")
    lx, ly = rho_XY.labels
    d_x = rho_XY.dims[0]
    if d_w is None:
        d_w = d_x + 1
    if d_v is None:
        d_v = d_x * d_w
    iso = isometry_from_params(np.asarray(theta, dtype=float), d_x, d_w, d_v)

    mirror = _fresh("C", rho_XY.labels)
    tau = purify(partial_trace(rho_XY, [lx]), ref_label=mirror)
    w1 = _fresh("W", tau.labels)
    v1 = _fresh("V", tau.labels + (w1,))
    tau_out = stinespring_extend(iso, tau, lx, w_label=w1, v_label=v1)
    lhs = mutual_information(tau_out, [mirror], [w1])

    ref = _fresh("R", rho_XY.labels)
    psi = purify(rho_XY, ref_label=ref)
    w2 = _fresh("W", psi.labels)
    v2 = _fresh("V", psi.labels + (w2,))
    sigma = stinespring_extend(iso, psi, lx, w_label=w2, v_label=v2)
    rhs = mutual_information(sigma, [ly, ref], [w2])
    return EquivalenceReport(lhs=float(lhs), rhs=float(rhs), gap=float(abs(lhs - rhs)))


def convexity_check(curve: Curve, tolerance: float = 1e-3):
    """Minimum second difference of a curve; concave duals are sign-flipped."""
    ys = curve.values
    if "pf-dual" in str(curve.meta.get("kind", "")):
        ys = -ys
    return convexity_report(curve.abscissae, ys, tolerance)
