"""Classical bottleneck and privacy-funnel curves on finite alphabets.

Everything here works on a joint probability table p(x, y) and searches
over stochastic encodings p(w|x).  Reported curve values are certified
upper bounds: each grid point stores an explicit channel witness whose
exact mutual informations reproduce the value, with time-sharing
realized as a disjoint-union alphabet when a grid abscissa falls inside
an envelope segment.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import rel_entr, softmax

from .channels import ConditionalChannel
from .curves import Curve, CurvePoint, SolverConfig, lower_envelope, upper_envelope
from .errors import InfeasibleError, ValidationError

__all__ = [
    "binary_entropy",
    "binary_entropy_inverse",
    "binary_convolution",
    "bsc_ib_oracle",
    "bsc_ib_iy",
    "bsc_ib_rate",
    "shannon_entropy",
    "shannon_mutual_information",
    "validate_joint_table",
    "channel_information_pair",
    "classical_ib_curve",
    "classical_ib_dual_curve",
    "classical_pf_curve",
    "multi_letter_pf_point",
]

LN2 = math.log(2.0)

_DEFAULT_CFG = SolverConfig()


# ---------------------------------------------------------------------------
# binary-entropy toolbox and the symmetric-channel oracle


def binary_entropy(u: float) -> float:
    if not 0.0 <= u <= 1.0:
        raise ValidationError(f"binary entropy argument {u} outside [0, 1]")
    if u in (0.0, 1.0):
        return 0.0
    return -(u * math.log2(u) + (1.0 - u) * math.log2(1.0 - u))


def binary_entropy_inverse(y: float) -> float:
    """The point u in [0, 1/2] with h(u) = y, by bisection."""
    if not 0.0 <= y <= 1.0:
        raise ValidationError(f"binary entropy inverse argument {y} outside [0, 1]")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        # h is flat at its maximum, so bisection cannot pin this point down
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binary_convolution(u: float, delta: float) -> float:
    return u * (1.0 - delta) + delta * (1.0 - u)


def bsc_ib_oracle(a: float, delta: float) -> float:
    """h(h^-1(a) * delta): exact bottleneck trade-off for a symmetric binary channel."""
    if not 0.0 <= a <= 1.0:
        raise ValidationError(f"oracle abscissa {a} outside [0, 1]")
    if not 0.0 <= delta <= 1.0:
        raise ValidationError(f"crossover probability {delta} outside [0, 1]")
    return binary_entropy(binary_convolution(binary_entropy_inverse(a), delta))


def bsc_ib_iy(rate: float, delta: float, p0: float = 0.5) -> float:
    """Best I(Y;W) at encoding rate I(X;W) = rate for a symmetric binary channel."""
    h_x = binary_entropy(p0)
    h_y = binary_entropy(binary_convolution(p0, delta))
    if not 0.0 <= rate <= h_x + 1e-12:
        raise ValidationError(f"rate {rate} outside [0, H(X)]")
    return h_y - bsc_ib_oracle(h_x - min(rate, h_x), delta)


def bsc_ib_rate(target_iy: float, delta: float, p0: float = 0.5) -> float:
    """Inverse of bsc_ib_iy: least rate whose best I(Y;W) reaches target_iy."""
    h_x = binary_entropy(p0)
    i_xy = bsc_ib_iy(h_x, delta, p0)
    if not -1e-12 <= target_iy <= i_xy + 1e-9:
        raise InfeasibleError(f"target {target_iy} outside [0, I(X;Y)={i_xy}]")
    target_iy = min(max(target_iy, 0.0), i_xy)
    lo, hi = 0.0, h_x
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if bsc_ib_iy(mid, delta, p0) < target_iy:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Shannon quantities on tables


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return float(-terms.sum())


def _mi_of_joint(joint: np.ndarray) -> float:
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    return float(rel_entr(joint, np.outer(px, py)).sum() / LN2)


def _log_normalize(lq: np.ndarray, axis: int) -> np.ndarray:
    """Normalize log-weights to log-probabilities along axis, -inf aware."""
    m = np.max(lq, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        z = np.log(np.exp(lq - m).sum(axis=axis, keepdims=True))
    return lq - m - z


def validate_joint_table(table) -> np.ndarray:
    arr = np.asarray(table, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError("joint table must be a non-empty 2-D array")
    if np.any(arr < -1e-12):
        raise ValidationError("joint table has negative entries")
    total = arr.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"joint table sums to {total}, not 1")
    arr = np.clip(arr, 0.0, None)
    return arr / arr.sum()


def shannon_mutual_information(table) -> float:
    return _mi_of_joint(validate_joint_table(table))


def channel_information_pair(table, rows) -> tuple:
    """(I(X;W), I(Y;W)) for encoding rows[x] = p(w|x) applied to the joint table."""
    pxy = validate_joint_table(table)
    q = np.asarray(rows, dtype=float).T  # (n_w, n_x)
    if q.ndim != 2 or q.shape[1] != pxy.shape[0]:
        raise ValidationError("encoding rows do not match the X alphabet")
    px = pxy.sum(axis=1)
    i_x = _mi_of_joint((q * px[None, :]).T)
    i_y = _mi_of_joint(q @ pxy)
    return i_x, i_y


def _drop_zero_symbols(pxy: np.ndarray):
    keep_x = np.flatnonzero(pxy.sum(axis=1) > 0)
    keep_y = np.flatnonzero(pxy.sum(axis=0) > 0)
    sub = pxy[np.ix_(keep_x, keep_y)]
    sub = sub / sub.sum()
    return sub, keep_x, keep_y


# ---------------------------------------------------------------------------
# alternating-minimization inner loop (bottleneck direction)


def _ib_objectives(q: np.ndarray, pxy: np.ndarray, px: np.ndarray):
    i_x = _mi_of_joint((q * px[None, :]).T)
    i_y = _mi_of_joint(q @ pxy)
    return i_x, i_y


def _mi_batch(joints: np.ndarray) -> np.ndarray:
    pa = joints.sum(axis=2, keepdims=True)
    pb = joints.sum(axis=1, keepdims=True)
    return rel_entr(joints, pa * pb).sum(axis=(1, 2)) / LN2


def _ib_objectives_batch(q: np.ndarray, pxy: np.ndarray, px: np.ndarray):
    i_x = _mi_batch(np.swapaxes(q * px[None, None, :], 1, 2))
    i_y = _mi_batch(q @ pxy)
    return i_x, i_y


def _ib_fixed_point_batch(pxy, px, pygx, q0, beta, tol, max_iters):
    """Self-consistent update q(w|x) ∝ q(w) 2^(-beta D(x,w)), D in bits.

    q0 stacks all restarts as (R, n_w, n_x); they advance in lockstep on
    shared numpy calls.  A restart counts as converged on a relative
    objective stall or a vanishing encoder update; the latter matters
    near critical multipliers where per-step progress crawls.
    """
    q = q0.copy()
    i_x, i_y = _ib_objectives_batch(q, pxy, px)
    obj = i_x - beta * i_y
    flags = np.zeros(q.shape[0], dtype=bool)
    for _ in range(max_iters):
        q_prev = q
        qw = q @ px  # (R, n_w)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = q @ pxy  # (R, n_w, n_y)
            qygw = np.where(qw[..., None] > 0, s / np.where(qw[..., None] > 0, qw[..., None], 1.0), 0.0)
            d_bits = rel_entr(pygx[None, None, :, :], qygw[:, :, None, :]).sum(axis=3) / LN2
            log_qw = np.where(qw > 0, np.log(np.where(qw > 0, qw, 1.0)), -np.inf)
        if beta == 0.0:
            lq = np.broadcast_to(log_qw[..., None], q.shape).copy()
        else:
            lq = log_qw[..., None] - (beta * LN2) * d_bits
        q = np.exp(_log_normalize(lq, axis=1))
        colsum = q.sum(axis=1, keepdims=True)
        q = np.where(colsum > 0, q / np.where(colsum > 0, colsum, 1.0), 1.0 / q.shape[1])
        i_x, i_y = _ib_objectives_batch(q, pxy, px)
        new_obj = i_x - beta * i_y
        stalled = np.abs(new_obj - obj) <= tol * np.maximum(1.0, np.abs(obj))
        frozen = np.abs(q - q_prev).max(axis=(1, 2)) <= 1e-11
        flags |= stalled | frozen
        obj = new_obj
        if flags.all():
            break
    return q, flags


def _structured_seeds(n_w, n_x, rng, restarts):
    """(restarts, n_w, n_x) stack: smoothed copy, smoothed constant, then random."""
    seeds = np.empty((restarts, n_w, n_x))
    copy = np.zeros((n_w, n_x))
    copy[np.arange(n_x) % n_w, np.arange(n_x)] = 1.0
    seeds[0] = 0.98 * copy + 0.02 / n_w
    if restarts > 1:
        const = np.zeros((n_w, n_x))
        const[0, :] = 1.0
        seeds[1] = 0.98 * const + 0.02 / n_w
    if restarts > 2:
        g = rng.gamma(1.0, size=(restarts - 2, n_w, n_x))
        seeds[2:] = g / g.sum(axis=1, keepdims=True)
    return seeds


def _default_beta_grid():
    return np.concatenate(([0.0], np.logspace(-3, 3, 60), [1e6]))


def _ib_cloud(pxy, px, pygx, n_w, cfg: SolverConfig, grid=None, dual=False, refine_rounds: int = 4):
    """Achieved (I(Y;W), I(X;W), q) triples across the multiplier sweep.

    After the base sweep, refinement rounds insert the chord slopes of
    hull segments that span a requested grid abscissa as extra
    multipliers: the fixed point at the chord slope sits exactly where
    the true curve dips deepest below that chord, so each round tightens
    the envelope where the output actually depends on it.
    """
    betas = np.asarray(cfg.beta_grid if cfg.beta_grid is not None else _default_beta_grid(), dtype=float)
    n_x = pxy.shape[0]
    cloud = []
    # exact anchor channels, independent of the sweep
    copy = np.zeros((n_w, n_x))
    copy[np.arange(n_x) % n_w, np.arange(n_x)] = 1.0
    const = np.zeros((n_w, n_x))
    const[0, :] = 1.0
    for q in (copy, const):
        i_x, i_y = _ib_objectives(q, pxy, px)
        cloud.append((i_y, i_x, q, True))

    def sweep(beta, seed_words):
        rng = np.random.default_rng(np.random.SeedSequence(seed_words))
        q0 = _structured_seeds(n_w, n_x, rng, cfg.restarts)
        q, flags = _ib_fixed_point_batch(pxy, px, pygx, q0, float(beta), cfg.tol, cfg.max_iters)
        i_x, i_y = _ib_objectives_batch(q, pxy, px)
        for r in range(cfg.restarts):
            cloud.append((float(i_y[r]), float(i_x[r]), q[r], bool(flags[r])))

    used = []
    for b_idx, beta in enumerate(betas):
        sweep(beta, [cfg.seed, 0x1B, b_idx])
        used.append(float(beta))
    for rnd in range(refine_rounds):
        if dual:
            env = upper_envelope([c[1] for c in cloud], [c[0] for c in cloud])
        else:
            env = lower_envelope([c[0] for c in cloud], [c[1] for c in cloud])
        fresh = []
        for x0, x1, y0, y1 in zip(env.vertex_x, env.vertex_x[1:], env.vertex_y, env.vertex_y[1:]):
            if x1 - x0 <= 1e-9 or abs(y1 - y0) <= 1e-12:
                continue
            if grid is not None and not np.any((grid > x0 + 1e-12) & (grid < x1 - 1e-12)):
                continue
            slope = (y1 - y0) / (x1 - x0)
            beta = float(1.0 / slope) if dual else float(slope)
            if beta <= 0:
                continue
            if all(abs(beta - b) > 1e-6 * max(1.0, abs(beta)) for b in used + fresh):
                fresh.append(beta)
        if not fresh:
            break
        for s_idx, beta in enumerate(fresh):
            sweep(beta, [cfg.seed, 0x1B2, rnd, s_idx])
        used.extend(fresh)
    return cloud


# ---------------------------------------------------------------------------
# witness synthesis shared by both curve directions


def _union_channel(q_left, q_right, lam):
    """Time-share: route into disjoint alphabets with weights (1-lam, lam).

    The block label is independent of X, so both I(X;W) and I(Y;W) mix
    exactly linearly between the two constituents.
    """
    return np.vstack(((1.0 - lam) * q_left, lam * q_right))


def _full_alphabet_rows(q, keep_x, n_x_full):
    n_w = q.shape[0]
    rows = np.full((n_x_full, n_w), 1.0 / n_w)
    rows[keep_x, :] = q.T
    return rows


def _grid_to_array(grid, upper, what):
    arr = np.asarray(list(grid), dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("grid must be a non-empty 1-D sequence")
    if np.any(np.diff(arr) <= 0):
        raise ValidationError("grid must be strictly increasing")
    if arr[0] < -1e-12:
        raise ValidationError("grid abscissae must be nonnegative")
    if arr[-1] > upper + 1e-9:
        raise InfeasibleError(f"{what} target {arr[-1]} exceeds the feasible maximum {upper}")
    return np.clip(arr, 0.0, upper)


def _points_from_envelope(env, grid, cloud, pxy_full, keep_x, constraint_slot):
    """Turn envelope evaluations into certified curve points.

    constraint_slot 0 means the cloud x-coordinate is the constraint
    (bottleneck direction); slot 1 means the cloud value is (funnel).
    """
    n_x_full = pxy_full.shape[0]
    points = []
    for ev in env.evaluate(grid):
        if ev.left == ev.right:
            q = cloud[ev.left][2]
            ok = cloud[ev.left][3]
        else:
            q = _union_channel(cloud[ev.left][2], cloud[ev.right][2], ev.weight)
            ok = cloud[ev.left][3] and cloud[ev.right][3]
        rows = _full_alphabet_rows(q, keep_x, n_x_full)
        i_x, i_y = channel_information_pair(pxy_full, rows)
        value, achieved = (i_x, i_y) if constraint_slot == 0 else (i_y, i_x)
        points.append(
            CurvePoint(
                abscissa=float(ev.abscissa),
                value=float(value),
                witness=ConditionalChannel(rows),
                achieved_constraint=float(achieved),
                converged=bool(ok),
            )
        )
    return points


# ---------------------------------------------------------------------------
# bottleneck curve


def classical_ib_curve(p, dW: int, grid, cfg: Optional[SolverConfig] = None) -> Curve:
    """Upper bounds on min I(X;W) subject to I(Y;W) >= target, per grid target."""
    cfg = cfg or _DEFAULT_CFG
    if dW < 1:
        raise ValidationError("dW must be >= 1")
    pxy_full = validate_joint_table(p)
    pxy, keep_x, keep_y = _drop_zero_symbols(pxy_full)
    px = pxy.sum(axis=1)
    pygx = pxy / px[:, None]
    i_xy = _mi_of_joint(pxy)
    grid_arr = _grid_to_array(grid, i_xy, "bottleneck")

    cloud = _ib_cloud(pxy, px, pygx, dW, cfg, grid=grid_arr)
    env = lower_envelope([c[0] for c in cloud], [c[1] for c in cloud])
    points = _points_from_envelope(env, grid_arr, cloud, pxy_full, keep_x, constraint_slot=0)
    meta = _curve_meta("classical-ib", grid_arr, dW, cfg, pxy_full, keep_x, keep_y, cloud)
    return Curve(tuple(points), meta)


def classical_ib_dual_curve(p, dW: int, grid, cfg: Optional[SolverConfig] = None) -> Curve:
    """Lower-bound-certified max I(Y;W) subject to I(X;W) <= rate, per grid rate."""
    cfg = cfg or _DEFAULT_CFG
    if dW < 1:
        raise ValidationError("dW must be >= 1")
    pxy_full = validate_joint_table(p)
    pxy, keep_x, keep_y = _drop_zero_symbols(pxy_full)
    px = pxy.sum(axis=1)
    pygx = pxy / px[:, None]
    h_x = shannon_entropy(px)
    grid_arr = _grid_to_array(grid, h_x, "dual bottleneck")

    cloud = _ib_cloud(pxy, px, pygx, dW, cfg, grid=grid_arr, dual=True)
    env = upper_envelope([c[1] for c in cloud], [c[0] for c in cloud])
    points = _points_from_envelope(env, grid_arr, cloud, pxy_full, keep_x, constraint_slot=1)
    meta = _curve_meta("classical-ib-dual", grid_arr, dW, cfg, pxy_full, keep_x, keep_y, cloud)
    return Curve(tuple(points), meta)


def _curve_meta(kind, grid_arr, dW, cfg, pxy_full, keep_x, keep_y, cloud, extra=None):
    px = pxy_full.sum(axis=1)
    py = pxy_full.sum(axis=0)
    meta = {
        "kind": kind,
        "d_w": int(dW),
        "grid": [float(g) for g in grid_arr],
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "i_xy": _mi_of_joint(pxy_full),
        "h_x": shannon_entropy(px),
        "h_y": shannon_entropy(py),
        "h_x_given_y": shannon_entropy(pxy_full) - shannon_entropy(py),
        "dropped_x": [int(i) for i in np.setdiff1d(np.arange(pxy_full.shape[0]), keep_x)],
        "dropped_y": [int(i) for i in np.setdiff1d(np.arange(pxy_full.shape[1]), keep_y)],
        "cloud": [(float(a), float(b)) for a, b, _, _ in cloud],
    }
    if extra:
        meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# privacy-funnel direction: multiplicative-update descent with flipped signs


def _pf_value_grad(q, pxy, px, py, betap):
    """L = I(Y;W) - betap*I(X;W) and dL/dq(w|x) on the current support."""
    qw = q @ px
    s = q @ pxy  # joint-ish (w, y) weights
    i_x = _mi_of_joint((q * px[None, :]).T)
    i_y = _mi_of_joint(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        qygw = np.where(qw[:, None] > 0, s / np.where(qw[:, None] > 0, qw[:, None], 1.0), 0.0)
        log_ratio_y = np.where(qygw > 0, np.log2(np.where(qygw > 0, qygw, 1.0)) - np.log2(py)[None, :], 0.0)
        e_score = (pxy / px[:, None]) @ log_ratio_y.T  # (x, w)
        ratio = np.where(qw[None, :] > 0, q.T / np.where(qw[None, :] > 0, qw[None, :], 1.0), 1.0)
        log_ratio_x = np.where(q.T > 0, np.log2(np.where(ratio > 0, ratio, 1.0)), 0.0)
    grad = px[:, None] * (e_score - betap * log_ratio_x)  # (x, w)
    return i_y - betap * i_x, grad.T, i_x, i_y


def _multiplicative_descent(q0, value_grad, tol, max_iters):
    """Exponentiated-gradient descent on per-column simplices.

    value_grad(q) -> (objective, gradient); the update q <- q*exp(-eta*grad)
    renormalized per column is the flipped-sign counterpart of the
    self-consistent bottleneck update, with backtracking on eta.
    """
    q = np.clip(q0, 1e-12, None)
    q = q / q.sum(axis=0, keepdims=True)
    val, grad = value_grad(q)
    eta = 1.0
    converged = False
    for _ in range(max_iters):
        qn = new_val = new_grad = None
        with np.errstate(divide="ignore"):
            log_q = np.log(q)  # -inf marks support lost to underflow; it stays lost
        while eta > 1e-14:
            qn = np.exp(_log_normalize(log_q - eta * grad, axis=0))
            new_val, new_grad = value_grad(qn)
            if new_val <= val - 1e-15:
                break
            eta *= 0.5
        else:
            converged = True  # no descent direction left at machine precision
            break
        small = abs(new_val - val) <= tol * max(1.0, abs(val))
        q, val, grad = qn, new_val, new_grad
        if small:
            converged = True
            break
        eta = min(eta * 1.3, 10.0)
    return q, val, converged


def _pf_descend(pxy, px, py, q0, betap, tol, max_iters):
    """Minimize I(Y;W) - betap*I(X;W) by exponentiated-gradient steps."""

    def value_grad(q):
        val, grad, _, _ = _pf_value_grad(q, pxy, px, py, betap)
        return val, grad

    q, _, converged = _multiplicative_descent(q0, value_grad, tol, max_iters)
    return q, converged


def _pf_polish(pxy, px, py, q, betap, tol):
    """Quasi-Newton polish on encoder logits."""
    n_w, n_x = q.shape

    def fun(z):
        qz = softmax(z.reshape(n_w, n_x), axis=0)
        val, grad, _, _ = _pf_value_grad(qz, pxy, px, py, betap)
        gz = qz * (grad - (qz * grad).sum(axis=0, keepdims=True))
        return val, gz.ravel()

    z0 = np.log(np.clip(q, 1e-12, None))
    res = minimize(fun, z0.ravel(), jac=True, method="L-BFGS-B", options={"maxiter": 400, "ftol": tol})
    qn = softmax(res.x.reshape(n_w, n_x), axis=0)
    return qn


def _set_partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1 :]
        yield [[head]] + part


def _pf_seeds(n_w, n_x, rng, restarts):
    seeds = []
    if n_x <= 4:
        for part in _set_partitions(list(range(n_x))):
            if len(part) > n_w:
                continue
            q = np.zeros((n_w, n_x))
            for w, block in enumerate(part):
                q[w, block] = 1.0
            seeds.append(q)
    else:
        copy = np.zeros((n_w, n_x))
        copy[np.arange(n_x) % n_w, np.arange(n_x)] = 1.0
        seeds.append(copy)
    const = np.zeros((n_w, n_x))
    const[0, :] = 1.0
    seeds.append(const)
    if n_w > n_x:
        erasure = np.zeros((n_w, n_x))
        erasure[np.arange(n_x), np.arange(n_x)] = 0.5
        erasure[n_x, :] += 0.5
        seeds.append(erasure)
    while len(seeds) < max(restarts, len(seeds)):
        g = rng.gamma(1.0, size=(n_w, n_x))
        seeds.append(g / g.sum(axis=0, keepdims=True))
    return seeds


def _default_betap_grid():
    fine = 1.0 - np.logspace(-4, -1, 10)
    return np.unique(np.concatenate((np.linspace(0.0, 1.0, 31), fine, [1.05])))


def _pf_cloud(pxy, px, py, n_w, cfg: SolverConfig):
    betaps = np.asarray(cfg.beta_grid if cfg.beta_grid is not None else _default_betap_grid(), dtype=float)
    n_x = pxy.shape[0]
    cloud = []
    seed_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5E]))
    for q in _pf_seeds(n_w, n_x, seed_rng, 0):
        i_x, i_y = _ib_objectives(q, pxy, px)
        cloud.append((i_x, i_y, q, True))
    for b_idx, betap in enumerate(betaps):
        for r_idx in range(cfg.restarts):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x50F, b_idx, r_idx]))
            seeds = _pf_seeds(n_w, n_x, rng, cfg.restarts)
            q0 = seeds[r_idx % len(seeds)]
            q0 = 0.995 * q0 + 0.005 / n_w
            q, ok = _pf_descend(pxy, px, py, q0, float(betap), cfg.tol, cfg.max_iters)
            q = _pf_polish(pxy, px, py, q, float(betap), cfg.tol)
            i_x, i_y = _ib_objectives(q, pxy, px)
            cloud.append((i_x, i_y, q, ok))
    return cloud


def _pf_penalty_refine(pxy, px, py, q_start, target, tol, max_iters):
    """Quadratic-penalty tightening of min I(Y;W) s.t. I(X;W) >= target."""
    q = q_start
    mu = 4.0
    while mu <= 1e6:

        def value_grad(qc, mu=mu):
            i_y_val, grad_iy, i_x, _ = _pf_value_grad(qc, pxy, px, py, 0.0)
            diff_val, grad_diff, _, _ = _pf_value_grad(qc, pxy, px, py, 1.0)
            grad_ix = grad_iy - grad_diff
            gap = max(0.0, target - i_x)
            return i_y_val + mu * gap * gap, grad_iy - 2.0 * mu * gap * grad_ix

        q, _, _ = _multiplicative_descent(q, value_grad, tol, max(50, max_iters // 10))
        mu *= 2.0
    return q


def classical_pf_curve(p, dW: int, grid, cfg: Optional[SolverConfig] = None, extra_seeds=None) -> Curve:
    """Upper bounds on min I(Y;W) subject to I(X;W) >= t, per grid t.

    meta["lower_bound"] carries the piecewise-linear floor
    max(0, t - H(X|Y)) alongside each grid point.  extra_seeds, if given,
    are full-alphabet encoder arrays (n_w, n_x) added as warm starts.
    """
    cfg = cfg or _DEFAULT_CFG
    if dW < 1:
        raise ValidationError("dW must be >= 1")
    pxy_full = validate_joint_table(p)
    pxy, keep_x, keep_y = _drop_zero_symbols(pxy_full)
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    h_x = shannon_entropy(px)
    h_x_given_y = shannon_entropy(pxy) - shannon_entropy(py)
    grid_arr = _grid_to_array(grid, h_x, "funnel")

    cloud = _pf_cloud(pxy, px, py, dW, cfg)
    for q in extra_seeds or ():
        q = np.asarray(q, dtype=float)[:, keep_x]
        q = q / q.sum(axis=0, keepdims=True)
        i_x, i_y = _ib_objectives(q, pxy, px)
        cloud.append((i_x, i_y, q, True))

    # second pass: tighten at the requested abscissae, feed results back
    env = lower_envelope([c[0] for c in cloud], [c[1] for c in cloud])
    for ev in env.evaluate(grid_arr):
        q0 = cloud[ev.left][2] if ev.left == ev.right else _union_channel(cloud[ev.left][2], cloud[ev.right][2], ev.weight)
        q0 = 0.995 * np.clip(q0, 0.0, None) + 0.005 / q0.shape[0]
        q = _pf_penalty_refine(pxy, px, py, q0, float(ev.abscissa), cfg.tol, cfg.max_iters)
        i_x, i_y = _ib_objectives(q, pxy, px)
        cloud.append((i_x, i_y, q, True))

    env = lower_envelope([c[0] for c in cloud], [c[1] for c in cloud])
    points = _points_from_envelope(env, grid_arr, cloud, pxy_full, keep_x, constraint_slot=1)
    points = [_pf_make_feasible(pt, pxy_full) for pt in points]
    lower = [float(max(0.0, t - h_x_given_y)) for t in grid_arr]
    meta = _curve_meta(
        "classical-pf", grid_arr, dW, cfg, pxy_full, keep_x, keep_y, cloud, extra={"lower_bound": lower}
    )
    return Curve(tuple(points), meta)


def _pf_make_feasible(pt: CurvePoint, pxy_full) -> CurvePoint:
    """Blend toward the copy channel until I(X;W) meets the funnel constraint."""
    if pt.achieved_constraint >= pt.abscissa - 1e-9:
        return pt
    rows = pt.witness.rows
    n_x = pxy_full.shape[0]
    copy_rows = np.eye(n_x)
    i_x_w = pt.achieved_constraint
    i_x_copy, _ = channel_information_pair(pxy_full, copy_rows)
    if i_x_copy <= pt.abscissa:
        lam = 1.0
    else:
        lam = min(1.0, max(0.0, (pt.abscissa - i_x_w) / (i_x_copy - i_x_w)))
    blended = np.hstack(((1.0 - lam) * rows, lam * copy_rows))
    i_x, i_y = channel_information_pair(pxy_full, blended)
    return CurvePoint(pt.abscissa, float(i_y), ConditionalChannel(blended), float(i_x), pt.converged)


# ---------------------------------------------------------------------------
# multi-letter funnel


def multi_letter_pf_point(p, n: int, t: float, dW: int, cfg: Optional[SolverConfig] = None) -> float:
    """(1/n) of the n-letter funnel value at total constraint n*t, n <= 2."""
    cfg = cfg or _DEFAULT_CFG
    if n not in (1, 2):
        raise ValidationError("only n = 1 or n = 2 is supported")
    pxy = validate_joint_table(p)
    n_x = pxy.shape[0]
    if n_x**n > 8:
        raise ValidationError(f"product alphabet size {n_x ** n} exceeds the supported scale")
    px = pxy.sum(axis=1)
    h_x = shannon_entropy(px)
    if t > h_x + 1e-9:
        raise InfeasibleError(f"funnel target {t} exceeds H(X) = {h_x}")
    t = min(max(float(t), 0.0), h_x)

    single = classical_pf_curve(pxy, dW, [t], cfg)
    if n == 1:
        return float(single.points[0].value)

    # a product of single-letter witnesses is feasible at 2t and both
    # warm-starts the two-letter search and caps the reported value
    p2 = np.kron(pxy, pxy)
    rows1 = single.points[0].witness.rows
    prod_rows = np.kron(rows1, rows1)
    two = classical_pf_curve(p2, dW, [2.0 * t], cfg, extra_seeds=[prod_rows.T])

    i_x2, i_y2 = channel_information_pair(p2, prod_rows)
    candidates = [0.5 * float(two.points[0].value)]
    if i_x2 >= 2.0 * t - 1e-6:
        candidates.append(0.5 * float(i_y2))
    return float(min(candidates))
