"""Composite Hilbert space of a four-level atom and one truncated cavity mode.

Basis ordering is atom-major: ``index = level * (N_max + 1) + n`` with the
atomic levels ordered ``[g', e', g, e]``. Every other module relies on this
convention, so population slices of one atomic level are contiguous.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TruncationError

LEVELS = ("g'", "e'", "g", "e")
_ALIASES = {"gp": "g'", "ep": "e'", "g_prime": "g'", "e_prime": "e'"}

#: levels that do not couple to the cavity
NONINTERACTING = ("g'", "e'")
#: levels coupled ultrastrongly to the cavity
INTERACTING = ("g", "e")

MAX_TRUNCATION_LOSS = 1e-8


def level_index(level: str) -> int:
    """Position of an atomic level label in the fixed ordering."""
    label = _ALIASES.get(level, level)
    try:
        return LEVELS.index(label)
    except ValueError:
        raise ValueError(f"unknown atomic level {level!r}; expected one of {LEVELS}") from None


@dataclass(frozen=True)
class SpaceSpec:
    """Four-level atom tensored with a Fock ladder ``0..fock_cutoff``."""

    fock_cutoff: int
    atom_dim: int = 4

    def __post_init__(self):
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be an integer >= 1, got {self.fock_cutoff!r}")
        if self.atom_dim != 4:
            raise ValueError("the atom always has four levels")

    @property
    def n_fock(self) -> int:
        return self.fock_cutoff + 1

    @property
    def dim(self) -> int:
        return self.atom_dim * self.n_fock

    def index(self, level: str, n: int) -> int:
        if not 0 <= n <= self.fock_cutoff:
            raise ValueError(f"photon number {n} outside 0..{self.fock_cutoff}")
        return level_index(level) * self.n_fock + n

    def level_slice(self, level: str) -> slice:
        start = level_index(level) * self.n_fock
        return slice(start, start + self.n_fock)

    def basis_state(self, level: str, n: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(level, n)] = 1.0
        return _frozen(psi)

    def product_state(self, atom: np.ndarray, field: np.ndarray) -> np.ndarray:
        """Kronecker product of a length-4 atomic vector and a field vector."""
        atom = np.asarray(atom, dtype=complex)
        field = np.asarray(field, dtype=complex)
        if atom.shape != (4,) or field.shape != (self.n_fock,):
            raise ValueError("atom vector must have length 4 and field vector length N_max+1")
        return _frozen(np.kron(atom, field))

    def projector(self, levels) -> np.ndarray:
        """Diagonal projector onto all Fock states of the given atomic levels."""
        diag = np.zeros(self.dim)
        for level in levels:
            diag[self.level_slice(level)] = 1.0
        return _frozen(np.diag(diag).astype(complex))


def make_space(fock_cutoff: int) -> SpaceSpec:
    return SpaceSpec(fock_cutoff)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _field_annihilation(n_fock: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_fock)), k=1).astype(complex)


def annihilation(space: SpaceSpec) -> np.ndarray:
    """Cavity annihilation operator, identity on the atom factor.

    The matrix element that would lead above the cutoff is simply absent, so
    ``[a, a†] = 1`` only holds on photon numbers below ``N_max``.
    """
    return _frozen(np.kron(np.eye(4), _field_annihilation(space.n_fock)))


def creation(space: SpaceSpec) -> np.ndarray:
    return _frozen(annihilation(space).conj().T.copy())


def number_operator(space: SpaceSpec) -> np.ndarray:
    return _frozen(np.kron(np.eye(4), np.diag(np.arange(space.n_fock))).astype(complex))


def atom_operator(space: SpaceSpec, atom_matrix: np.ndarray) -> np.ndarray:
    """Lift a 4x4 atomic matrix to the composite space."""
    atom_matrix = np.asarray(atom_matrix, dtype=complex)
    if atom_matrix.shape != (4, 4):
        raise ValueError("atomic operator must be 4x4")
    return _frozen(np.kron(atom_matrix, np.eye(space.n_fock)))


def atomic_projector(space: SpaceSpec, m: str, n: str) -> np.ndarray:
    """``|m><n|`` on the atom, identity on the field."""
    sigma = np.zeros((4, 4), dtype=complex)
    sigma[level_index(m), level_index(n)] = 1.0
    return atom_operator(space, sigma)


def sigma_x(space: SpaceSpec) -> np.ndarray:
    """Pauli x on the interacting ``{g, e}`` pair, zero on ``{g', e'}``."""
    return _frozen(atomic_projector(space, "e", "g") + atomic_projector(space, "g", "e"))


def coherent_amplitudes(alpha: complex, n_fock: int) -> np.ndarray:
    """Truncated, renormalized coherent-state amplitudes on ``0..n_fock-1``.

    Raises
    ------
    TruncationError
        If ``|alpha|^2 > N_max / 3`` or the discarded tail exceeds 1e-8.
    """
    alpha = complex(alpha)
    cutoff = n_fock - 1
    if abs(alpha) ** 2 > cutoff / 3:
        raise TruncationError(
            f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds N_max/3 = {cutoff / 3:.4g}; raise the Fock cutoff"
        )
    c = np.empty(n_fock, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, n_fock):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    norm = np.linalg.norm(c)
    if 1.0 - norm > MAX_TRUNCATION_LOSS:
        raise TruncationError(
            f"coherent state alpha={alpha} loses {1.0 - norm:.3e} norm at N_max={cutoff}"
        )
    return c / norm


def coherent_state(space: SpaceSpec, alpha: complex) -> np.ndarray:
    """Field factor ``|alpha>`` (length ``N_max + 1``); pair with an atomic level via ``product_state``."""
    return _frozen(coherent_amplitudes(alpha, space.n_fock))


def analytic_cat(space: SpaceSpec, alpha: float, sign: str = "-") -> np.ndarray:
    """Deep-strong-coupling cat ansatz ``(|+>|-a> -/+ |->|+a>)/sqrt(2)``.

    ``|±> = (|e> ± |g>)/sqrt(2)``; ``sign='-'`` gives the Rabi ground doublet
    member ``C-``, ``sign='+'`` gives ``C+``. No weight on ``g'`` or ``e'``.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    s = -1.0 if sign == "-" else 1.0
    minus_alpha = coherent_amplitudes(-alpha, space.n_fock)
    plus_alpha = coherent_amplitudes(alpha, space.n_fock)
    plus = np.zeros(4, dtype=complex)
    minus = np.zeros(4, dtype=complex)
    plus[level_index("e")], plus[level_index("g")] = 1 / np.sqrt(2), 1 / np.sqrt(2)
    minus[level_index("e")], minus[level_index("g")] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    psi = (np.kron(plus, minus_alpha) + s * np.kron(minus, plus_alpha)) / np.sqrt(2)
    return _frozen(psi)


def partial_trace_field(psi_or_rho: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Reduced 4x4 atomic density matrix."""
    arr = np.asarray(psi_or_rho)
    if arr.ndim == 1:
        m = arr.reshape(4, space.n_fock)
        return m @ m.conj().T
    r = arr.reshape(4, space.n_fock, 4, space.n_fock)
    return np.einsum("anbn->ab", r)
