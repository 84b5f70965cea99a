"""Parametrized channels as Stinespring isometries.

A channel X -> W is represented by an isometry V : X -> W (x) V built
from the first d_in columns of exp(A(theta)), with A anti-Hermitian and
theta a real vector of length (d_W*d_V)^2.  The W (x) V index is
W-major: basis state (w, v) sits at row w*d_V + v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .states import DensityOperator, PureState, tensor_product

ISOMETRY_TOL = 1e-10

__all__ = [
    "StinespringIsometry",
    "ConditionalChannel",
    "FlaggedChannel",
    "isometry_from_params",
    "params_from_isometry",
    "antihermitian_from_params",
    "pack_antihermitian",
    "stinespring_extend",
    "apply_kraus",
    "flagged_mix",
    "classical_to_quantum_channel",
    "random_channel_params",
]


def _check_dims(d_in: int, d_w: int, d_v: int) -> None:
    if min(d_in, d_w, d_v) < 1:
        raise ValidationError(f"dimensions must be positive, got {(d_in, d_w, d_v)}")
    if d_w * d_v < d_in:
        raise ValidationError(
            f"d_W*d_V = {d_w * d_v} smaller than d_in = {d_in}; no isometry exists"
        )


def antihermitian_from_params(theta: np.ndarray, n: int) -> np.ndarray:
    """Assemble the n x n anti-Hermitian A: diagonal imaginary parts first,
    then (real, imaginary) pairs for the upper triangle in row-major order."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != n * n:
        raise ValidationError(f"theta has length {theta.shape[0]}, expected {n * n}")
    a = np.zeros((n, n), dtype=complex)
    a[np.diag_indices(n)] = 1j * theta[:n]
    rows, cols = np.triu_indices(n, k=1)
    x = theta[n::2]
    y = theta[n + 1::2]
    a[rows, cols] = x + 1j * y
    a[cols, rows] = -x + 1j * y
    return a


def pack_antihermitian(a: np.ndarray) -> np.ndarray:
    """Inverse of antihermitian_from_params."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    gap = float(np.max(np.abs(a + a.conj().T)))
    if gap > 1e-9:
        raise ValidationError(f"matrix is not anti-Hermitian: max |A + A^H| = {gap:.3e}")
    theta = np.empty(n * n, dtype=float)
    theta[:n] = np.imag(np.diag(a))
    rows, cols = np.triu_indices(n, k=1)
    theta[n::2] = np.real(a[rows, cols])
    theta[n + 1::2] = np.imag(a[rows, cols])
    return theta


@dataclass(frozen=True)
class StinespringIsometry:
    """Isometry V : C^{d_in} -> C^{d_W} (x) C^{d_V} derived from real params."""

    params: np.ndarray
    d_in: int
    d_w: int
    d_v: int
    matrix: np.ndarray

    def __init__(self, params, d_in: int, d_w: int, d_v: int):
        _check_dims(d_in, d_w, d_v)
        params = np.asarray(params, dtype=float).reshape(-1).copy()
        n = d_w * d_v
        a = antihermitian_from_params(params, n)
        h = a / 1j  # Hermitian
        eigs, vecs = np.linalg.eigh(h)
        full = (vecs * np.exp(1j * eigs)) @ vecs.conj().T
        matrix = np.ascontiguousarray(full[:, :d_in])
        defect = float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(d_in))))
        if defect > ISOMETRY_TOL:
            raise ValidationError(f"isometry defect {defect:.3e} > {ISOMETRY_TOL}")
        params.setflags(write=False)
        matrix.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "d_in", int(d_in))
        object.__setattr__(self, "d_w", int(d_w))
        object.__setattr__(self, "d_v", int(d_v))
        object.__setattr__(self, "matrix", matrix)

    def kraus(self) -> np.ndarray:
        """Stack of d_V Kraus operators; K[v][w, x] = V[w*d_V + v, x]."""
        resh = self.matrix.reshape(self.d_w, self.d_v, self.d_in)
        return np.ascontiguousarray(resh.transpose(1, 0, 2))

    def apply_to_density(self, state: DensityOperator, acted: str,
                         w_label: str = "W") -> DensityOperator:
        """Apply the channel (environment traced out) to one named subsystem."""
        return apply_kraus(state, self.kraus(), acted, w_label)


def isometry_from_params(theta, d_in: int, d_w: int, d_v: int) -> StinespringIsometry:
    """Build the isometry (first d_in columns of exp(A(theta)))."""
    return StinespringIsometry(theta, d_in, d_w, d_v)


def _complete_to_unitary(v: np.ndarray) -> np.ndarray:
    """Deterministically extend orthonormal columns v to a full unitary."""
    n, k = v.shape
    cols = [v[:, j] for j in range(k)]
    for j in range(n):
        cand = np.zeros(n, dtype=complex)
        cand[j] = 1.0
        for c in cols:
            cand = cand - c * np.vdot(c, cand)
        nrm = float(np.linalg.norm(cand))
        if nrm > 1e-7:
            # second orthogonalization pass for numerical hygiene
            cand = cand / nrm
            for c in cols:
                cand = cand - c * np.vdot(c, cand)
            cols.append(cand / np.linalg.norm(cand))
        if len(cols) == n:
            break
    if len(cols) != n:
        raise ValidationError("failed to complete isometry to a unitary")
    return np.stack(cols, axis=1)


def params_from_isometry(matrix: np.ndarray, d_in: int, d_w: int, d_v: int) -> np.ndarray:
    """Real parameter vector theta with isometry_from_params(theta) reproducing matrix.

    The columns are completed to a unitary U and theta packs the
    principal logarithm of U (via Schur, exact for normal matrices).
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = d_w * d_v
    if matrix.shape != (n, d_in):
        raise ValidationError(f"matrix shape {matrix.shape} != ({n}, {d_in})")
    defect = float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(d_in))))
    if defect > 1e-9:
        raise ValidationError(f"columns are not orthonormal: defect {defect:.3e}")
    u = _complete_to_unitary(matrix)
    t, q = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    a = (q * (1j * phases)) @ q.conj().T
    a = (a - a.conj().T) / 2
    return pack_antihermitian(a)


def stinespring_extend(iso: StinespringIsometry, psi: PureState, acted: str,
                       w_label: str = "W", v_label: str = "V") -> PureState:
    """Apply the isometry to one subsystem of a pure state.

    The acted subsystem is replaced in place by the W and V factors;
    every other subsystem is untouched.
    """
    axis = psi.axis_of(acted)
    if psi.dims[axis] != iso.d_in:
        raise ValidationError(
            f"subsystem {acted!r} has dimension {psi.dims[axis]}, isometry expects {iso.d_in}"
        )
    for lab in (w_label, v_label):
        if lab in psi.labels:
            raise ValidationError(f"output label {lab!r} already present in state")
    if w_label == v_label:
        raise ValidationError("w_label and v_label must differ")
    n_ax = len(psi.dims)
    pre = int(np.prod(psi.dims[:axis], dtype=int)) if axis else 1
    post = int(np.prod(psi.dims[axis + 1:], dtype=int)) if axis + 1 < n_ax else 1
    tens = psi.vector.reshape(pre, iso.d_in, post)
    out = np.einsum("ki,pij->pkj", iso.matrix, tens).reshape(-1)
    dims = psi.dims[:axis] + (iso.d_w, iso.d_v) + psi.dims[axis + 1:]
    labels = psi.labels[:axis] + (w_label, v_label) + psi.labels[axis + 1:]
    nrm = float(np.linalg.norm(out))
    if abs(nrm - 1.0) > 1e-12:
        out = out / nrm
    return PureState(out, dims, labels, validate=False)


def apply_kraus(state: DensityOperator | PureState, kraus: np.ndarray, acted: str,
                out_label: str = "W") -> DensityOperator:
    """Apply sum_k K_k rho K_k^H to one named subsystem of a state."""
    rho = state.to_density() if isinstance(state, PureState) else state
    kraus = np.asarray(kraus, dtype=complex)
    if kraus.ndim != 3:
        raise ValidationError(f"kraus stack must be 3-axis, got shape {kraus.shape}")
    d_out, d_in = kraus.shape[1], kraus.shape[2]
    axis = rho.axis_of(acted)
    if rho.dims[axis] != d_in:
        raise ValidationError(
            f"subsystem {acted!r} has dimension {rho.dims[axis]}, kraus expects {d_in}"
        )
    if out_label != acted and out_label in rho.labels:
        raise ValidationError(f"output label {out_label!r} already present in state")
    n_ax = len(rho.dims)
    pre = int(np.prod(rho.dims[:axis], dtype=int)) if axis else 1
    post = int(np.prod(rho.dims[axis + 1:], dtype=int)) if axis + 1 < n_ax else 1
    tens = rho.matrix.reshape(pre, d_in, post, pre, d_in, post)
    out = np.einsum("kai,piqrjs,kbj->paqrbs", kraus, tens, kraus.conj(),
                    optimize=True)
    side = pre * d_out * post
    dims = rho.dims[:axis] + (d_out,) + rho.dims[axis + 1:]
    labels = rho.labels[:axis] + (out_label,) + rho.labels[axis + 1:]
    return DensityOperator(out.reshape(side, side), dims, labels, validate=False)


@dataclass(frozen=True)
class ConditionalChannel:
    """Row-stochastic table p(w|x); row x gives the distribution of W."""

    rows: np.ndarray

    def __init__(self, rows):
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2:
            raise ValidationError(f"rows must be a matrix, got shape {rows.shape}")
        if np.any(rows < -1e-15):
            raise ValidationError(f"negative entries (min {rows.min():.3e})")
        gaps = np.abs(rows.sum(axis=1) - 1.0)
        if float(gaps.max()) > 1e-12:
            raise ValidationError(
                f"row sums deviate from 1 by up to {float(gaps.max()):.3e} > 1e-12"
            )
        rows = np.clip(rows, 0.0, None)
        rows = rows / rows.sum(axis=1, keepdims=True)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_in(self) -> int:
        return self.rows.shape[0]

    @property
    def n_out(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class FlaggedChannel:
    """lambda * N0 (x) |0><0| + (1 - lambda) * N1 (x) |1><1| on the flag register."""

    n0: StinespringIsometry
    n1: StinespringIsometry
    lam: float

    def apply(self, state: DensityOperator | PureState, acted: str,
              w_label: str = "W", flag_label: str = "W'") -> DensityOperator:
        """Output carries the channel output W plus the flag subsystem (appended last)."""
        rho = state.to_density() if isinstance(state, PureState) else state
        if flag_label in rho.labels or flag_label in (w_label,):
            raise ValidationError(f"flag label {flag_label!r} already present")
        branches = []
        for idx, iso in ((0, self.n0), (1, self.n1)):
            out = apply_kraus(rho, iso.kraus(), acted, w_label)
            proj = np.zeros((2, 2), dtype=complex)
            proj[idx, idx] = 1.0
            flag = DensityOperator(proj, (2,), (flag_label,), validate=False)
            branches.append(tensor_product(out, flag))
        mat = self.lam * branches[0].matrix + (1 - self.lam) * branches[1].matrix
        return DensityOperator(mat, branches[0].dims, branches[0].labels, validate=False)


def flagged_mix(n0: StinespringIsometry, n1: StinespringIsometry, lam: float) -> FlaggedChannel:
    """Flagged convex mixture of two channels sharing d_in and d_W."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda must be in [0, 1], got {lam!r}")
    if (n0.d_in, n0.d_w) != (n1.d_in, n1.d_w):
        raise ValidationError(
            f"branches disagree on (d_in, d_W): {(n0.d_in, n0.d_w)} vs {(n1.d_in, n1.d_w)}"
        )
    return FlaggedChannel(n0, n1, float(lam))


def classical_to_quantum_channel(c: ConditionalChannel) -> StinespringIsometry:
    """Measure-and-prepare isometry for p(w|x): rho -> sum p(w|x) <x|rho|x> |w><w|.

    The environment dimension is d_in*d_W so every (w, x) branch gets an
    orthogonal environment state.
    """
    d_in, d_w = c.n_in, c.n_out
    d_v = d_in * d_w
    mat = np.zeros((d_w * d_v, d_in), dtype=complex)
    for x in range(d_in):
        for w in range(d_w):
            v_idx = w * d_in + x  # orthogonal flag per (w, x)
            mat[w * d_v + v_idx, x] = np.sqrt(c.rows[x, w])
    theta = params_from_isometry(mat, d_in, d_w, d_v)
    iso = StinespringIsometry(theta, d_in, d_w, d_v)
    gap = float(np.max(np.abs(iso.matrix - mat)))
    if gap > 1e-9:
        raise ValidationError(f"parameter roundtrip failed to reproduce the isometry ({gap:.3e})")
    return iso


def random_channel_params(seed: int, d_in: int, d_w: int, d_v: int) -> np.ndarray:
    """Deterministic pseudo-random theta with entries in [-pi, pi]."""
    _check_dims(d_in, d_w, d_v)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), d_in, d_w, d_v]))
    return rng.uniform(-np.pi, np.pi, size=(d_w * d_v) ** 2)
