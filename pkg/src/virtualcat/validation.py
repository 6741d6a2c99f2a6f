"""Input validation helpers shared by the estimators and the functional API."""
from __future__ import annotations

import numpy as np


def check_square(mat, name="matrix") -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square 2-D array, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError(f"{name} contains non-finite entries")
    return mat


def hermiticity_error(mat) -> float:
    mat = np.asarray(mat)
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


def check_hermitian(mat, name="operator", atol=1e-12) -> np.ndarray:
    """Return ``mat`` as a complex square array, rejecting non-Hermitian input.

    The tolerance is relative to the largest entry so that large Hamiltonians
    built from floating-point sums are not rejected spuriously.
    """
    mat = check_square(mat, name)
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    err = hermiticity_error(mat)
    if err > atol * scale:
        raise ValueError(f"{name} is not Hermitian (max |H - H^dag| = {err:.3e})")
    return mat


def check_state(psi, dim=None, atol=1e-10) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"state vector must be 1-D, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise ValueError(f"state vector has dimension {psi.shape[0]}, expected {dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state vector is not normalized (norm = {norm:.12f})")
    return psi


def check_density_matrix(rho, dim=None, atol=1e-10) -> np.ndarray:
    """Hermitian, unit-trace, positive semidefinite within ``atol``."""
    rho = check_hermitian(rho, "density matrix", atol=atol)
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"density matrix has dimension {rho.shape[0]}, expected {dim}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix trace is {tr:.12f}, expected 1")
    lam_min = np.linalg.eigvalsh(rho).min()
    if lam_min < -atol:
        raise ValueError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def as_density_matrix(state, dim=None, atol=1e-8) -> np.ndarray:
    """Promote a state vector to a projector; pass density matrices through.

    The default ``atol`` matches the norm drift the propagators accept.
    """
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        psi = check_state(arr, dim, atol)
        return np.outer(psi, psi.conj())
    return check_square(arr, "density matrix")
