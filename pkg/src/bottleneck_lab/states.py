"""Finite-dimensional states on named subsystems.

Density operators and pure states carry an ordered list of subsystem
labels next to their dimension list, so partial traces, mutual
informations and purifications are addressed by name rather than by
axis index.  All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12
RANK_TOL = 1e-12

__all__ = [
    "DensityOperator",
    "PureState",
    "EntropyReport",
    "von_neumann_entropy",
    "entropy_of_spectrum",
    "partial_trace",
    "tensor_product",
    "tensor_pure",
    "purify",
    "mutual_information",
    "conditional_mutual_information",
    "embed_classical_joint",
]


def _as_labels(labels: Iterable[str]) -> tuple[str, ...]:
    out = tuple(str(x) for x in labels)
    if len(set(out)) != len(out):
        raise ValidationError(f"labels must be unique, got {out!r}")
    return out


def _check_dims(dims: Sequence[int], side: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValidationError(f"dims must be positive, got {dims!r}")
    if int(np.prod(dims)) != side:
        raise ValidationError(
            f"dims {dims!r} have product {int(np.prod(dims))}, expected {side}"
        )
    return dims


@dataclass(frozen=True)
class DensityOperator:
    """A density matrix on a tensor product of named subsystems.

    Parameters
    ----------
    matrix : complex array, square
        Hermitian, unit-trace, positive semidefinite (within tolerances).
    dims : sequence of int
        Subsystem dimensions; their product must equal the matrix side.
    labels : sequence of str
        One name per subsystem, unique, same length as ``dims``.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __init__(self, matrix, dims, labels, validate: bool = True):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {matrix.shape}")
        dims = _check_dims(dims, matrix.shape[0])
        labels = _as_labels(labels)
        if len(labels) != len(dims):
            raise ValidationError(
                f"got {len(labels)} labels for {len(dims)} subsystems"
            )
        if validate:
            herm_gap = float(np.max(np.abs(matrix - matrix.conj().T)))
            if herm_gap > HERM_TOL:
                raise ValidationError(
                    f"matrix is not Hermitian: max |M - M^H| = {herm_gap:.3e} > {HERM_TOL}"
                )
            trace_gap = abs(complex(np.trace(matrix)) - 1.0)
            if trace_gap > TRACE_TOL:
                raise ValidationError(
                    f"matrix does not have unit trace: |tr M - 1| = {trace_gap:.3e} > {TRACE_TOL}"
                )
            min_eig = float(np.min(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)))
            if min_eig < -PSD_TOL:
                raise ValidationError(
                    f"matrix is not positive semidefinite: min eigenvalue = {min_eig:.3e} < -{PSD_TOL}"
                )
        matrix = matrix.copy()
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    def dim_of(self, label: str) -> int:
        return self.dims[self.axis_of(label)]

    def axis_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(
                f"unknown subsystem {label!r}; state has {self.labels!r}"
            ) from None


@dataclass(frozen=True)
class PureState:
    """A unit vector on a tensor product of named subsystems."""

    vector: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __init__(self, vector, dims, labels, validate: bool = True):
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        dims = _check_dims(dims, vector.shape[0])
        labels = _as_labels(labels)
        if len(labels) != len(dims):
            raise ValidationError(
                f"got {len(labels)} labels for {len(dims)} subsystems"
            )
        if validate:
            norm_gap = abs(float(np.linalg.norm(vector)) - 1.0)
            if norm_gap > NORM_TOL:
                raise ValidationError(
                    f"vector is not normalized: | ||v|| - 1 | = {norm_gap:.3e} > {NORM_TOL}"
                )
        vector = vector.copy()
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def side(self) -> int:
        return self.vector.shape[0]

    def dim_of(self, label: str) -> int:
        return self.dims[self.axis_of(label)]

    def axis_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(
                f"unknown subsystem {label!r}; state has {self.labels!r}"
            ) from None

    def to_density(self) -> DensityOperator:
        v = self.vector
        return DensityOperator(np.outer(v, v.conj()), self.dims, self.labels,
                               validate=False)


@dataclass(frozen=True)
class EntropyReport:
    """Von Neumann entropy in bits plus the negative eigenvalue mass clipped away."""

    value: float
    clip_mass: float = field(default=0.0)


def entropy_of_spectrum(eigs: np.ndarray) -> tuple[float, float]:
    """Entropy in bits of a (nearly) probability spectrum.

    Eigenvalues in [-1e-10, 0) are clipped to zero and their absolute
    mass reported; anything more negative is an error.
    """
    eigs = np.asarray(eigs, dtype=float)
    min_eig = float(eigs.min()) if eigs.size else 0.0
    if min_eig < -PSD_TOL:
        raise ValidationError(
            f"spectrum is not positive semidefinite: min eigenvalue = {min_eig:.3e} < -{PSD_TOL}"
        )
    clip_mass = float(-eigs[eigs < 0.0].sum())
    lam = eigs[eigs > 0.0]
    value = float(-(lam * np.log2(lam)).sum()) if lam.size else 0.0
    return max(value, 0.0), clip_mass


def von_neumann_entropy(rho: DensityOperator) -> EntropyReport:
    """S(rho) = -sum_i lambda_i log2 lambda_i, computed on (M + M^H)/2.

    Returns
    -------
    EntropyReport
        ``value`` in bits, within [0, log2(dim)]; ``clip_mass`` is the
        total magnitude of small negative eigenvalues clipped to zero.
    """
    if not isinstance(rho, DensityOperator):
        raise ValidationError(f"expected a DensityOperator, got {type(rho).__name__}")
    herm = (rho.matrix + rho.matrix.conj().T) / 2
    eigs = np.linalg.eigvalsh(herm)
    value, clip_mass = entropy_of_spectrum(eigs)
    value = min(value, float(np.log2(rho.side))) if rho.side > 1 else 0.0
    return EntropyReport(value=value, clip_mass=clip_mass)


def _keep_axes(state, keep: Iterable[str]) -> list[int]:
    keep = list(keep)
    if len(set(keep)) != len(keep):
        raise ValidationError(f"duplicate labels in keep={keep!r}")
    for lab in keep:
        state.axis_of(lab)  # raises on unknown labels
    return [i for i, lab in enumerate(state.labels) if lab in set(keep)]


def partial_trace(state: DensityOperator | PureState, keep: Iterable[str]) -> DensityOperator:
    """Trace out every subsystem not named in ``keep``.

    The kept subsystems stay in their original order.  Accepts a pure
    state directly (cheaper than forming its density matrix first).
    """
    axes = _keep_axes(state, keep)
    if not axes:
        raise ValidationError("keep must name at least one subsystem")
    n = len(state.dims)
    kept_dims = tuple(state.dims[i] for i in axes)
    kept_labels = tuple(state.labels[i] for i in axes)
    d_keep = int(np.prod(kept_dims))

    if isinstance(state, PureState):
        perm = axes + [i for i in range(n) if i not in axes]
        mat = state.vector.reshape(state.dims).transpose(perm).reshape(d_keep, -1)
        out = mat @ mat.conj().T
    elif isinstance(state, DensityOperator):
        tens = state.matrix.reshape(state.dims + state.dims)
        # contract row/col axes of every traced subsystem pairwise
        row = list(range(n))
        col = list(range(n, 2 * n))
        for i in range(n):
            if i not in axes:
                col[i] = row[i]  # repeated index contracts, i.e. traces
        out_idx = [row[i] for i in axes] + [col[i] for i in axes]
        out = np.einsum(tens, row + col, out_idx).reshape(d_keep, d_keep)
    else:
        raise ValidationError(f"expected a state, got {type(state).__name__}")
    return DensityOperator(out, kept_dims, kept_labels, validate=False)


def _disambiguate(a_labels, b_labels, rename):
    clash = set(a_labels) & set(b_labels)
    if not clash:
        return tuple(a_labels), tuple(b_labels)
    if rename is None:
        raise ValidationError(
            f"label collision {sorted(clash)!r} and no rename policy given"
        )
    sa, sb = rename
    new_a = tuple(lab + sa if lab in clash else lab for lab in a_labels)
    new_b = tuple(lab + sb if lab in clash else lab for lab in b_labels)
    if set(new_a) & set(new_b):
        raise ValidationError(f"rename policy {rename!r} does not resolve the collision")
    return new_a, new_b


def tensor_product(a, b, rename: tuple[str, str] | None = None) -> DensityOperator:
    """Kronecker product of two states as a density operator.

    Colliding labels are suffixed with ``rename=(suffix_a, suffix_b)``;
    without a policy a collision is an error.
    """
    rho_a = a.to_density() if isinstance(a, PureState) else a
    rho_b = b.to_density() if isinstance(b, PureState) else b
    la, lb = _disambiguate(rho_a.labels, rho_b.labels, rename)
    return DensityOperator(
        np.kron(rho_a.matrix, rho_b.matrix),
        rho_a.dims + rho_b.dims,
        la + lb,
        validate=False,
    )


def tensor_pure(a: PureState, b: PureState, rename: tuple[str, str] | None = None) -> PureState:
    """Kronecker product of two pure states, kept pure."""
    la, lb = _disambiguate(a.labels, b.labels, rename)
    return PureState(np.kron(a.vector, b.vector), a.dims + b.dims, la + lb,
                     validate=False)


def purify(rho: DensityOperator, ref_label: str = "R") -> PureState:
    """Purification sum_i sqrt(lambda_i) |i>_ref |e_i> with the reference first.

    Eigenvalues are sorted descending and eigenvalues at or below the
    rank tolerance are dropped, so the reference dimension equals the
    spectral rank (a pure input gets a dimension-1 reference).  Each
    eigenvector's phase is fixed by making its first nonzero component
    real positive.
    """
    if ref_label in rho.labels:
        raise ValidationError(
            f"reference label {ref_label!r} already names a subsystem of the state"
        )
    herm = (rho.matrix + rho.matrix.conj().T) / 2
    eigs, vecs = np.linalg.eigh(herm)
    order = np.argsort(eigs)[::-1]
    eigs, vecs = eigs[order], vecs[:, order]
    if float(eigs.min()) < -PSD_TOL:
        raise ValidationError(
            f"matrix is not positive semidefinite: min eigenvalue = {float(eigs.min()):.3e}"
        )
    rank = int(np.sum(eigs > RANK_TOL))
    rank = max(rank, 1)
    eigs = np.clip(eigs[:rank], 0.0, None)
    vecs = vecs[:, :rank]
    # deterministic phase: first component of magnitude > tol made real positive
    for k in range(rank):
        v = vecs[:, k]
        nz = np.nonzero(np.abs(v) > 1e-12)[0]
        if nz.size:
            ph = v[nz[0]] / abs(v[nz[0]])
            vecs[:, k] = v * np.conj(ph)
    vector = (np.sqrt(eigs)[:, None] * vecs.T).reshape(-1)
    vector = vector / np.linalg.norm(vector)
    return PureState(vector, (rank,) + rho.dims, (ref_label,) + rho.labels,
                     validate=False)


def _entropy_of_part(state, labels) -> float:
    return von_neumann_entropy(partial_trace(state, labels)).value


def mutual_information(state: DensityOperator | PureState,
                       part_a: Iterable[str],
                       part_b: Iterable[str]) -> float:
    """I(A;B) = S(A) + S(B) - S(AB) in bits, clamped to be nonnegative.

    Subsystems outside A and B are traced out first.  A and B must be
    disjoint.
    """
    a = list(part_a)
    b = list(part_b)
    if set(a) & set(b):
        raise ValidationError(f"parts overlap: {sorted(set(a) & set(b))!r}")
    s_a = _entropy_of_part(state, a)
    s_b = _entropy_of_part(state, b)
    s_ab = _entropy_of_part(state, a + b)
    val = s_a + s_b - s_ab
    if val < -1e-9:
        raise ValidationError(
            f"mutual information {val:.3e} below -1e-9; inputs are inconsistent"
        )
    return max(val, 0.0)


def conditional_mutual_information(state: DensityOperator | PureState,
                                   part_a: Iterable[str],
                                   part_b: Iterable[str],
                                   part_c: Iterable[str]) -> float:
    """I(A;B|C) = S(AC) + S(BC) - S(ABC) - S(C), clamped to be nonnegative."""
    a, b, c = list(part_a), list(part_b), list(part_c)
    for x, y in [(a, b), (a, c), (b, c)]:
        if set(x) & set(y):
            raise ValidationError(f"parts overlap: {sorted(set(x) & set(y))!r}")
    val = (_entropy_of_part(state, a + c) + _entropy_of_part(state, b + c)
           - _entropy_of_part(state, a + b + c) - _entropy_of_part(state, c))
    if val < -1e-9:
        raise ValidationError(
            f"conditional mutual information {val:.3e} below -1e-9 violates strong subadditivity"
        )
    return max(val, 0.0)


def embed_classical_joint(table: np.ndarray,
                          labels: Sequence[str] = ("X", "Y")) -> DensityOperator:
    """Embed a joint probability table as a diagonal density operator.

    ``table`` has one axis per label; entry p(x, y, ...) becomes the
    diagonal weight of the basis state |x>|y>...
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != len(tuple(labels)):
        raise ValidationError(
            f"table has {table.ndim} axes but {len(tuple(labels))} labels were given"
        )
    if np.any(table < -1e-15):
        raise ValidationError(f"table has negative entries (min {table.min():.3e})")
    total = float(table.sum())
    if abs(total - 1.0) > 1e-12:
        raise ValidationError(f"table sums to {total!r}, expected 1 within 1e-12")
    diag = np.clip(table.reshape(-1), 0.0, None)
    return DensityOperator(np.diag(diag.astype(complex)), table.shape, tuple(labels),
                           validate=False)
