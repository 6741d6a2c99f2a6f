"""Figures of merit: bare populations, fidelities, post-selection and entanglement entropy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hilbert as hc
from .errors import NumericalError
from .spectrum import Eigensystem
from .validation import as_density_matrix

ENTROPY_EIG_FLOOR = 1e-14
PURITY_THRESHOLD = 0.97


@dataclass(frozen=True)
class PopulationTable:
    """``p[level, n]`` with levels in the order ``[g', e', g, e]``."""

    p: np.ndarray

    def __getitem__(self, level: str) -> np.ndarray:
        return self.p[hc.level_index(level)]

    @property
    def total(self) -> float:
        return float(self.p.sum())

    def marginal(self, levels) -> float:
        return float(sum(self[level].sum() for level in levels))


def bare_populations(state, space: hc.SpaceSpec) -> PopulationTable:
    """Diagonal of the state in the bare product basis, grouped by atomic level."""
    arr = np.asarray(state)
    diag = np.abs(arr) ** 2 if arr.ndim == 1 else np.diagonal(arr).real
    return PopulationTable(np.clip(diag, 0.0, None).reshape(4, space.n_fock))


def fidelity(rho, target) -> float:
    """``<target|rho|target>``; ``rho`` may also be a state vector."""
    target = np.asarray(target, dtype=complex)
    arr = np.asarray(rho)
    if arr.ndim == 1:
        return float(abs(np.vdot(target, arr)) ** 2)
    return float((target.conj() @ arr @ target).real)


def dephased_fidelity(rho, sigma) -> float:
    """Overlap of elementwise moduli, normalized by Cauchy-Schwarz.

    ``sum |rho_ij||sigma_ij| / sqrt(sum |rho_ij|^2 * sum |sigma_ij|^2)`` in the
    bare basis. Relative phases between branches are erased, so two pure
    states that differ only by such phases score 1.
    """
    a = np.abs(as_density_matrix(rho))
    b = np.abs(as_density_matrix(sigma))
    na, nb = np.sum(a * a), np.sum(b * b)
    if na == 0 or nb == 0:
        raise ValueError("dephased fidelity of a zero matrix is undefined")
    return float(np.sum(a * b) / np.sqrt(na * nb))


def swap_operator(space: hc.SpaceSpec) -> np.ndarray:
    """``sigma_e'g + sigma_g'e``: moves ``g -> e'`` and ``e -> g'``."""
    return hc.atomic_projector(space, "e'", "g") + hc.atomic_projector(space, "g'", "e")


def ideal_swapped_cat(eig: Eigensystem, space: hc.SpaceSpec, return_norm: bool = False):
    """The numerical ``C-`` eigenvector carried into the non-interacting levels."""
    psi = swap_operator(space) @ eig.c_minus
    norm = float(np.linalg.norm(psi))
    if norm == 0:
        raise NumericalError("C- has no weight on the interacting levels")
    psi = psi / norm
    return (psi, norm) if return_norm else psi


def swapped_analytic_cat(space: hc.SpaceSpec, alpha: float) -> np.ndarray:
    """Analytic ``C-`` ansatz mapped onto ``{g', e'}``."""
    return swap_operator(space) @ hc.analytic_cat(space, alpha, "-")


@dataclass(frozen=True)
class PostSelection:
    subspace: tuple
    kept_trace: float
    conditional_state: np.ndarray


def postselect(rho, space: hc.SpaceSpec, subspace=hc.NONINTERACTING) -> PostSelection:
    """Project onto the listed atomic levels (all photon numbers) and renormalize.

    Raises
    ------
    NumericalError
        If less than 1e-12 of the trace survives.
    """
    rho = as_density_matrix(rho, space.dim)
    keep = np.diag(space.projector(subspace)).real.astype(bool)
    block = np.zeros_like(rho)
    block[np.ix_(keep, keep)] = rho[np.ix_(keep, keep)]
    kept = float(np.trace(block).real)
    if kept < 1e-12:
        raise NumericalError(f"post-selection onto {tuple(subspace)} keeps trace {kept:.3e}")
    return PostSelection(tuple(subspace), kept, block / kept)


def _dominant_state(rho: np.ndarray):
    w, v = np.linalg.eigh(rho)
    return v[:, -1], float(np.real(np.trace(rho @ rho)))


def entanglement_entropy(state, space: hc.SpaceSpec, *, purity_threshold: float = PURITY_THRESHOLD, return_purity=False):
    """Atom-field von Neumann entropy in bits.

    Density-matrix input must be nearly pure (purity above
    ``purity_threshold``); its dominant eigenvector is used.
    """
    arr = np.asarray(state, dtype=complex)
    purity = 1.0
    if arr.ndim == 2:
        arr = 0.5 * (arr + arr.conj().T)
        arr, purity = _dominant_state(arr)
        if purity <= purity_threshold:
            raise NumericalError(
                f"state purity {purity:.4f} is below {purity_threshold}; pure-state entropy is not meaningful"
            )
    arr = arr / np.linalg.norm(arr)
    reduced = hc.partial_trace_field(arr, space)
    lam = np.linalg.eigvalsh(0.5 * (reduced + reduced.conj().T))
    lam = lam[lam > ENTROPY_EIG_FLOOR]
    s = float(-np.sum(lam * np.log2(lam)))
    s = max(s, 0.0)
    return (s, purity) if return_purity else s


def binary_entropy(p: float) -> float:
    """``H2(p)`` in bits."""
    return float(-sum(x * np.log2(x) for x in (p, 1 - p) if x > 0))
