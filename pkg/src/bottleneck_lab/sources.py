"""Builtin source states used by the demos, the CLI, and the tests."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .states import DensityOperator, PureState, embed_classical_joint

__all__ = [
    "rho3",
    "bsc_table",
    "bsc_state",
    "classical_joint_state",
    "perfectly_correlated_table",
    "random_pure2q",
    "random_density",
    "random_classical_table",
    "bell_pair",
    "ghz",
]


def rho3(p: float = 0.4) -> DensityOperator:
    """Two-qubit mixture of (|00> + |11>)/sqrt(2) with weight p and |11> with 1 - p."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must be in [0, 1], got {p!r}")
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    w = np.zeros(4, dtype=complex)
    w[3] = 1.0
    mat = p * np.outer(v, v.conj()) + (1 - p) * np.outer(w, w.conj())
    return DensityOperator(mat, (2, 2), ("X", "Y"))


def bsc_table(delta: float, p0: float = 0.5) -> np.ndarray:
    """Joint table of a Bernoulli(1 - p0) input through a binary symmetric channel."""
    if not 0.0 <= delta <= 1.0:
        raise ValidationError(f"delta must be in [0, 1], got {delta!r}")
    if not 0.0 < p0 < 1.0:
        raise ValidationError(f"p0 must be in (0, 1), got {p0!r}")
    px = np.array([p0, 1 - p0])
    chan = np.array([[1 - delta, delta], [delta, 1 - delta]])
    return px[:, None] * chan


def bsc_state(delta: float, p0: float = 0.5) -> DensityOperator:
    """The binary-symmetric-channel joint embedded as a diagonal two-qubit state."""
    return embed_classical_joint(bsc_table(delta, p0))


def classical_joint_state(table: np.ndarray) -> DensityOperator:
    """Embed an explicit two-axis joint table with labels X, Y."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 2:
        raise ValidationError(f"expected a 2-axis table, got {table.ndim} axes")
    return embed_classical_joint(table)


def perfectly_correlated_table(d: int = 2) -> np.ndarray:
    """Uniform diagonal joint: X = Y with d equiprobable values."""
    return np.eye(d) / d


def random_pure2q(seed: int) -> PureState:
    """Seeded Haar-ish random two-qubit pure state with labels X, Y."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x95]))
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v = v / np.linalg.norm(v)
    return PureState(v, (2, 2), ("X", "Y"))


def random_density(seed: int, dims=(2, 2), labels=("X", "Y")) -> DensityOperator:
    """Seeded Ginibre random density operator on the given subsystems."""
    dims = tuple(int(d) for d in dims)
    side = int(np.prod(dims))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x51]))
    g = rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))
    mat = g @ g.conj().T
    mat = mat / np.trace(mat).real
    return DensityOperator(mat, dims, labels)


def random_classical_table(seed: int, shape=(2, 2)) -> np.ndarray:
    """Seeded random joint probability table (uniform Dirichlet)."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xC7]))
    t = rng.gamma(1.0, size=shape)
    return t / t.sum()


def bell_pair() -> PureState:
    """(|00> + |11>)/sqrt(2) with labels A, B."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return PureState(v, (2, 2), ("A", "B"))


def ghz() -> PureState:
    """(|000> + |111>)/sqrt(2) with labels A, B, C."""
    v = np.zeros(8, dtype=complex)
    v[0] = v[7] = 1 / np.sqrt(2)
    return PureState(v, (2, 2, 2), ("A", "B", "C"))


def ghz_dephased() -> DensityOperator:
    """Three perfectly correlated uniform bits: (|000><000| + |111><111|)/2."""
    mat = np.zeros((8, 8), dtype=complex)
    mat[0, 0] = mat[7, 7] = 0.5
    return DensityOperator(mat, (2, 2, 2), ("A", "B", "C"))
