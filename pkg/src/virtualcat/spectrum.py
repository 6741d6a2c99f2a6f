"""Extended Rabi Hamiltonian, its diagonalization, and dressed-state labels."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import hilbert as hc
from .errors import LabelingError, NumericalError
from .validation import check_hermitian

DEFAULT_FOCK_CUTOFF = 30
DEGENERACY_ATOL = 1e-9
LABEL_MIN_OVERLAP = 0.5


class ModelWarning(UserWarning):
    pass


def default_cutoff(coupling: float, omega_c: float = 0.5) -> int:
    """``max(30, ceil(10 (lambda/omega_c)^2 / 3))`` keeps coherent tails below 1e-8."""
    alpha = coupling / omega_c
    return max(DEFAULT_FOCK_CUTOFF, math.ceil(10 * alpha**2 / 3))


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in units of ``omega_q`` (which defaults to 1)."""

    omega_q: float = 1.0
    omega_c: float = 0.5
    coupling: float = 1.0
    omega_g: float = 9.0
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF

    def __post_init__(self):
        if self.omega_q <= 0 or self.omega_c <= 0:
            raise ValueError("omega_q and omega_c must be positive")
        if self.coupling < 0:
            raise ValueError("coupling must be non-negative")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ValueError("fock_cutoff must be an integer >= 1")
        if not math.isclose(self.omega_c, self.omega_q / 2, rel_tol=1e-12):
            warnings.warn(
                f"omega_c = {self.omega_c} differs from omega_q/2; the swapped ladders are no longer degenerate",
                ModelWarning,
                stacklevel=3,
            )
        if 0 < self.coupling <= 0.5 * self.omega_q:
            warnings.warn(
                f"coupling {self.coupling} is at or below 0.5 omega_q; the cat ansatz is poor here",
                ModelWarning,
                stacklevel=3,
            )

    @property
    def alpha(self) -> float:
        """Cat displacement ``lambda / omega_c``."""
        return self.coupling / self.omega_c

    @property
    def space(self) -> hc.SpaceSpec:
        return hc.make_space(self.fock_cutoff)

    def with_(self, **changes) -> "ModelParams":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ModelWarning)
            return replace(self, **changes)


def build_rabi(p: ModelParams, space: hc.SpaceSpec | None = None) -> np.ndarray:
    """``omega_q |e><e| + omega_c a†a + lambda sigma_x (a + a†)``.

    The photon-number term acts on every atomic level; the other two vanish on
    the ``{g', e'}`` block.
    """
    space = space or p.space
    a = hc.annihilation(space)
    x = a + a.conj().T
    h = (
        p.omega_q * hc.atomic_projector(space, "e", "e")
        + p.omega_c * hc.number_operator(space)
        + p.coupling * (hc.sigma_x(space) @ x)
    )
    return hc._frozen(0.5 * (h + h.conj().T))


def build_total(p: ModelParams, space: hc.SpaceSpec | None = None) -> np.ndarray:
    """Rabi part plus ``omega_q |e'><e'|`` plus the offset ``omega_g`` on ``{g, e}``."""
    space = space or p.space
    h = (
        build_rabi(p, space)
        + p.omega_q * hc.atomic_projector(space, "e'", "e'")
        + p.omega_g * (hc.atomic_projector(space, "e", "e") + hc.atomic_projector(space, "g", "g"))
    )
    return hc._frozen(h)


@dataclass(frozen=True)
class StateLabels:
    c_minus: int
    c_plus: int
    c_minus_overlap: float
    c_plus_overlap: float
    bare: dict = field(default_factory=dict)  # (level, n) -> eigen-index

    def index(self, level: str, n: int) -> int:
        return self.bare[(hc._ALIASES.get(level, level), n)]


@dataclass(frozen=True)
class Eigensystem:
    """Ascending energies and column eigenvectors with a fixed phase gauge."""

    energies: np.ndarray
    vectors: np.ndarray
    labels: StateLabels | None = None

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def vector(self, k: int) -> np.ndarray:
        return self.vectors[:, k]

    def require_labels(self) -> StateLabels:
        if self.labels is None:
            raise LabelingError("eigensystem has no state labels; run identify_states first")
        return self.labels

    @property
    def c_minus(self) -> np.ndarray:
        return self.vectors[:, self.require_labels().c_minus]

    def with_labels(self, labels: StateLabels) -> "Eigensystem":
        return replace(self, labels=labels)


def degenerate_clusters(energies: np.ndarray, atol: float) -> list[np.ndarray]:
    """Runs of consecutive (sorted) energies closer than ``atol``."""
    splits = np.where(np.diff(energies) > atol)[0] + 1
    return np.split(np.arange(len(energies)), splits)


def _align_to_bare(block: np.ndarray) -> np.ndarray:
    """Rotate a degenerate eigenbasis onto the bare product states it overlaps most.

    Picks the k basis rows carrying most weight and applies the unitary polar
    factor so that column j is as close as possible to the j-th chosen basis
    vector. Deterministic for a given subspace, whatever basis eigh returned.
    """
    k = block.shape[1]
    weight = np.sum(np.abs(block) ** 2, axis=1)
    # stable sort on rounded weights so near-ties resolve by basis index
    order = np.argsort(-np.round(weight, 9), kind="stable")
    rows = np.sort(order[:k])
    u, _, vh = np.linalg.svd(block[rows, :])
    rot = (u @ vh).conj().T
    return block @ rot


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    mags = np.abs(vectors)
    # tie-break equal magnitudes toward the lowest index
    pivot = np.argmax(np.round(mags, 12), axis=0)
    ph = vectors[pivot, np.arange(vectors.shape[1])]
    return vectors * (np.abs(ph) / ph)[None, :]


def diagonalize(h, degeneracy_atol: float = DEGENERACY_ATOL) -> Eigensystem:
    """Hermitian eigendecomposition with a reproducible gauge.

    Degenerate subspaces are rotated onto bare product states, and every
    eigenvector is scaled so its largest-magnitude amplitude is real positive.

    Raises
    ------
    ValueError
        If ``h`` is not Hermitian.
    NumericalError
        If any eigenpair residual exceeds ``1e-9 ||H||``.
    """
    h = check_hermitian(h, "Hamiltonian")
    energies, vectors = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(energies))))
    for cluster in degenerate_clusters(energies, degeneracy_atol * scale):
        if len(cluster) > 1:
            vectors[:, cluster] = _align_to_bare(vectors[:, cluster])
            energies[cluster] = np.mean(energies[cluster])
    vectors = _fix_phase(vectors)
    h_norm = max(float(np.linalg.norm(h, 2)), 1e-300)
    residual = np.linalg.norm(h @ vectors - vectors * energies[None, :], axis=0).max()
    if residual > 1e-9 * h_norm:
        raise NumericalError(f"eigenpair residual {residual:.3e} exceeds 1e-9 ||H||")
    return Eigensystem(hc._frozen(energies), hc._frozen(vectors))


def _best_match(overlaps: np.ndarray, what: str) -> tuple[int, float]:
    order = np.argsort(-overlaps, kind="stable")
    best = int(order[0])
    if overlaps[best] <= LABEL_MIN_OVERLAP:
        second = int(order[1]) if len(order) > 1 else best
        raise LabelingError(
            f"cannot label {what}: best overlap {overlaps[best]:.4f} (state {best}), "
            f"runner-up {overlaps[second]:.4f} (state {second})",
            candidates=[(best, float(overlaps[best])), (second, float(overlaps[second]))],
        )
    return best, float(overlaps[best])


def identify_states(eig: Eigensystem, p: ModelParams, space: hc.SpaceSpec | None = None) -> StateLabels:
    """Label ``C-``, ``C+`` by overlap with the cat ansatz and the bare-like ``g'``/``e'`` states.

    Energy ordering is useless here: with ``omega_g > omega_q`` the cat lies
    above ``|g', 0>``.
    """
    space = space or p.space
    vecs = eig.vectors
    cm_over = np.abs(vecs.conj().T @ hc.analytic_cat(space, p.alpha, "-")) ** 2
    cp_over = np.abs(vecs.conj().T @ hc.analytic_cat(space, p.alpha, "+")) ** 2
    c_minus, ov_m = _best_match(cm_over, "C-")
    c_plus, ov_p = _best_match(cp_over, "C+")
    if c_minus == c_plus:
        raise LabelingError(f"C- and C+ resolve to the same eigenstate {c_minus}")
    bare = {}
    taken = {}
    for level in hc.NONINTERACTING:
        for n in range(space.n_fock):
            idx = space.index(level, n)
            k, _ = _best_match(np.abs(vecs[idx, :]) ** 2, f"|{level},{n}>")
            if k in taken:
                raise LabelingError(f"|{level},{n}> and {taken[k]} both map to eigenstate {k}")
            taken[k] = f"|{level},{n}>"
            bare[(level, n)] = k
    return StateLabels(c_minus, c_plus, ov_m, ov_p, bare)


def dressed_eigensystem(p: ModelParams) -> Eigensystem:
    """Build, diagonalize and label the total Hamiltonian in one go."""
    eig = diagonalize(build_total(p))
    return eig.with_labels(identify_states(eig, p))


def carrier_frequency(eig: Eigensystem) -> float:
    """Ultrafast carrier ``E(C-) - E(|g', 0>)``."""
    labels = eig.require_labels()
    return float(eig.energies[labels.c_minus] - eig.energies[labels.index("g'", 0)])


def parity_operator(space: hc.SpaceSpec) -> np.ndarray:
    """``sigma_z e^{i pi a†a}`` with ``sigma_z = |e><e| - |g><g|`` and identity on ``{g', e'}``."""
    atom = np.diag([1.0, 1.0, -1.0, 1.0]).astype(complex)
    field = np.diag((-1.0) ** np.arange(space.n_fock)).astype(complex)
    return np.kron(atom, field)
