"""Drive terms: the ultrafast Gaussian kick and the calibrated multi-tone pi-pulse.

Every drive is factorized as ``f(t) * O`` with a real scalar profile and a
static Hermitian operator. No rotating-wave approximation is applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import hilbert as hc
from .errors import CalibrationError, LabelingError
from .spectrum import Eigensystem, ModelParams, default_cutoff, dressed_eigensystem

GAUSSIAN_SUPPORT_WIDTHS = 8.0
DEFAULT_RAMP_FRACTION = 0.1
ULTRAFAST_EPSILON = 0.5
ULTRAFAST_WIDTH = 0.01  # in units of 1/omega_q
CALIBRATION_CUTOFF = 20

ULTRAFAST_TERMS = ("s_eg'", "s_ge'")
MULTITONE_TERMS = ("s_eg'", "s_ge'", "s_eg")
_TERM_LEVELS = {"s_eg'": ("e", "g'"), "s_ge'": ("g", "e'"), "s_eg": ("e", "g")}


@dataclass(frozen=True)
class TimeDependentTerm:
    """``profile(t) * operator``; the profile is treated as zero outside ``[t_on, t_off]``."""

    operator: np.ndarray
    profile: Callable[[float], float]
    t_on: float
    t_off: float
    label: str = ""

    def __call__(self, t: float) -> float:
        return self.profile(t) if self.t_on <= t <= self.t_off else 0.0


@dataclass(frozen=True)
class PulseSpec:
    """Shape, timing and carrier content of one drive.

    ``amplitude`` is only meaningful for the multi-tone pulse and stays
    ``None`` until calibrated. ``carriers`` may be left empty; they are then
    derived from the dressed spectrum.
    """

    kind: str = "multitone"
    t0: float = 0.0
    epsilon: float = ULTRAFAST_EPSILON
    width: float = ULTRAFAST_WIDTH
    carriers: tuple = ()
    n_tones: int = 9
    duration: float = 140 * math.pi
    ramp_fraction: float = DEFAULT_RAMP_FRACTION
    amplitude: float | None = None
    operator_terms: tuple = field(default=None)

    def __post_init__(self):
        if self.kind not in ("ultrafast", "multitone"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.operator_terms is None:
            terms = ULTRAFAST_TERMS if self.kind == "ultrafast" else MULTITONE_TERMS
            object.__setattr__(self, "operator_terms", terms)
        if any(c <= 0 for c in self.carriers):
            raise ValueError("carrier frequencies must be positive")
        if self.kind == "ultrafast" and len(self.carriers) > 1:
            raise ValueError("the ultrafast pulse has exactly one carrier")
        if self.width <= 0 or self.duration <= 0:
            raise ValueError("pulse width and duration must be positive")
        if not 0 < self.ramp_fraction <= 0.5:
            raise ValueError("ramp_fraction must lie in (0, 0.5]")
        if self.kind == "multitone" and self.n_tones < 1:
            raise ValueError("n_tones must be >= 1")

    @property
    def envelope(self) -> str:
        return "gaussian" if self.kind == "ultrafast" else f"flattop({self.ramp_fraction})"

    def with_(self, **changes) -> "PulseSpec":
        return replace(self, **changes)


def drive_operator(space: hc.SpaceSpec, terms: Sequence[str]) -> np.ndarray:
    """Sum of the listed transition operators plus their Hermitian conjugates."""
    op = np.zeros((space.dim, space.dim), dtype=complex)
    for term in terms:
        try:
            m, n = _TERM_LEVELS[term]
        except KeyError:
            raise ValueError(f"unknown transition {term!r}") from None
        op += hc.atomic_projector(space, m, n)
    return hc._frozen(op + op.conj().T)


def gaussian_envelope(t, t0: float, epsilon: float = ULTRAFAST_EPSILON, width: float = ULTRAFAST_WIDTH):
    """Area-normalized Gaussian of total area ``pi * epsilon``."""
    t = np.asarray(t, dtype=float)
    return np.pi * epsilon * np.exp(-((t - t0) ** 2) / (2 * width**2)) / (width * np.sqrt(2 * np.pi))


def flattop_envelope(t, t0: float, duration: float, ramp_fraction: float = DEFAULT_RAMP_FRACTION):
    """Unit plateau on ``[t0, t0 + duration]`` with raised-cosine ramps of ``ramp_fraction * duration``."""
    s = (np.asarray(t, dtype=float) - t0) / duration
    r = ramp_fraction
    up = 0.5 * (1 - np.cos(np.pi * np.clip(s, 0, r) / r))
    down = 0.5 * (1 - np.cos(np.pi * np.clip(1 - s, 0, r) / r))
    env = np.minimum(up, down)
    return np.where((s < 0) | (s > 1), 0.0, env)


def flattop_area(duration: float, ramp_fraction: float = DEFAULT_RAMP_FRACTION) -> float:
    # each raised-cosine ramp contributes half its length
    return duration * (1 - ramp_fraction)


def ultrafast_pulse(
    p: ModelParams,
    eig: Eigensystem,
    t0: float,
    *,
    epsilon: float = ULTRAFAST_EPSILON,
    width: float | None = None,
    window=None,
    space: hc.SpaceSpec | None = None,
) -> TimeDependentTerm:
    """Gaussian kick at ``t0`` carried at ``E(C-) - E(|g', 0>)``.

    ``width`` defaults to ``0.01 / omega_q``. The profile is cut at eight
    widths, where it is below 1e-13 of its peak.
    """
    from .spectrum import carrier_frequency

    if window is not None and not window[0] <= t0 <= window[1]:
        raise ValueError(f"pulse time {t0} outside simulation window {tuple(window)}")
    space = space or p.space
    width = ULTRAFAST_WIDTH / p.omega_q if width is None else width
    omega_p = carrier_frequency(eig)
    if omega_p <= 0:
        raise ValueError(f"ultrafast carrier {omega_p} is not positive")

    def profile(t):
        return float(gaussian_envelope(t, t0, epsilon, width) * np.cos(omega_p * (t - t0)))

    half = GAUSSIAN_SUPPORT_WIDTHS * width
    return TimeDependentTerm(
        drive_operator(space, ULTRAFAST_TERMS), profile, t0 - half, t0 + half, label=f"ultrafast@{t0:g}"
    )


def tone_targets(n_tones: int) -> list[tuple[str, int]]:
    """Non-interacting states reached by the swap, in order of bare energy ``m omega_c``.

    Odd ``m`` maps to ``|g', m>`` and even ``m`` to ``|e', m - 2>``; these are
    the images of the odd-``e`` / even-``g`` photon content of ``C-``.
    """
    if n_tones < 1:
        raise ValueError("n_tones must be >= 1")
    return [("g'", m) if m % 2 else ("e'", m - 2) for m in range(1, n_tones + 1)]


def tone_frequencies(eig: Eigensystem, p: ModelParams, n_tones: int) -> list[float]:
    """Carriers ``E(C-) - E(target_i)`` for the ``n_tones`` lowest swap targets."""
    labels = eig.require_labels()
    e_cm = eig.energies[labels.c_minus]
    out = []
    for level, n in tone_targets(n_tones):
        if (level, n) not in labels.bare:
            raise LabelingError(f"tone target |{level},{n}> is not available at the current cutoff")
        out.append(float(e_cm - eig.energies[labels.bare[(level, n)]]))
    return out


def multitone_pulse(
    p: ModelParams,
    eig: Eigensystem,
    t0: float,
    n_tones: int,
    duration: float,
    amplitude: float | None,
    *,
    ramp_fraction: float = DEFAULT_RAMP_FRACTION,
    carriers: Sequence[float] | None = None,
    space: hc.SpaceSpec | None = None,
) -> TimeDependentTerm:
    """``A * env(t) * sum_i cos(w_i (t - t0))`` on the three transitions plus h.c."""
    if amplitude is None:
        raise CalibrationError("multi-tone pulse amplitude is not calibrated")
    space = space or p.space
    freqs = np.asarray(tone_frequencies(eig, p, n_tones) if carriers is None else carriers, dtype=float)
    if np.any(freqs <= 0):
        raise ValueError(f"non-positive tone frequency in {freqs}")
    amp = float(amplitude)

    def profile(t):
        env = flattop_envelope(t, t0, duration, ramp_fraction)
        if env == 0.0:
            return 0.0
        return float(amp * env * np.cos(freqs * (t - t0)).sum())

    return TimeDependentTerm(
        drive_operator(space, MULTITONE_TERMS), profile, t0, t0 + duration, label=f"multitone{n_tones}@{t0:g}"
    )


def check_no_overlap(terms: Sequence[TimeDependentTerm]) -> None:
    spans = sorted((t.t_on, t.t_off, t.label) for t in terms)
    for (a0, a1, la), (b0, b1, lb) in zip(spans, spans[1:]):
        if b0 < a1:
            raise ValueError(f"pulses {la} and {lb} overlap")


def build_pulse(p: ModelParams, eig: Eigensystem, spec: PulseSpec, space=None) -> TimeDependentTerm:
    if spec.kind == "ultrafast":
        return ultrafast_pulse(p, eig, spec.t0, epsilon=spec.epsilon, width=spec.width, space=space)
    return multitone_pulse(
        p,
        eig,
        spec.t0,
        spec.n_tones,
        spec.duration,
        spec.amplitude,
        ramp_fraction=spec.ramp_fraction,
        carriers=spec.carriers or None,
        space=space,
    )


def bright_state_amplitude(p: ModelParams, eig: Eigensystem, spec: PulseSpec, space=None) -> float:
    """Resonant rotating-wave estimate of the pi-pulse amplitude.

    Each tone couples ``C-`` to one target with matrix element ``M_i``; to
    leading order ``C-`` Rabi-flops into the bright combination at rate
    ``A * sqrt(sum M_i^2) / 2`` times the envelope.
    """
    space = space or p.space
    labels = eig.require_labels()
    op = drive_operator(space, spec.operator_terms)
    cm = eig.vectors[:, labels.c_minus]
    weights = [
        abs(eig.vectors[:, labels.bare[t]].conj() @ op @ cm) ** 2 for t in tone_targets(spec.n_tones)
    ]
    m_eff = math.sqrt(sum(weights))
    return math.pi / (m_eff * flattop_area(spec.duration, spec.ramp_fraction))


@dataclass
class CalibrationResult:
    amplitude: float
    transfer: float
    grid: np.ndarray
    grid_transfer: np.ndarray
    evaluations: list = field(default_factory=list)  # (amplitude, transfer) in evaluation order
    fock_cutoff: int = CALIBRATION_CUTOFF
    validated_transfer: float | None = None


def swap_transfer(p: ModelParams, eig: Eigensystem, spec: PulseSpec, amplitude: float, rtol=1e-8) -> float:
    """Population moved into ``{g', e'}`` by one dissipation-free multi-tone pulse from ``C-``."""
    from .dynamics import evolve_schrodinger
    from .spectrum import build_total

    space = p.space
    if amplitude == 0:
        return 0.0
    pulse = multitone_pulse(
        p, eig, spec.t0, spec.n_tones, spec.duration, amplitude, ramp_fraction=spec.ramp_fraction, space=space
    )
    proj = np.diag(space.projector(hc.NONINTERACTING)).real
    traj = evolve_schrodinger(
        build_total(p, space),
        [pulse],
        eig.c_minus,
        (spec.t0, spec.t0 + spec.duration),
        spec.duration,
        keep_states=True,
        rtol=rtol,
        eig=eig,
    )
    psi = traj.final_state
    return float(np.sum(proj * np.abs(psi) ** 2))


def _golden_section(fn, lo, hi, evals, tol):
    invphi = (math.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fn(c), fn(d)
    evals += [(c, fc), (d, fd)]
    while hi - lo > tol * (hi + lo) / 2:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = fn(c)
            evals.append((c, fc))
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = fn(d)
            evals.append((d, fd))


def calibrate_pi(
    p: ModelParams,
    spec: PulseSpec,
    *,
    grid_points: int = 9,
    grid_span: tuple = (0.25, 2.5),
    rel_tol: float = 2e-3,
    calibration_cutoff: int | None = None,
    validate_with: Eigensystem | None = None,
    min_transfer: float = 0.5,
) -> CalibrationResult:
    """Find the multi-tone amplitude that maximizes transfer into ``{g', e'}``.

    Trials run without dissipation at a reduced Fock cutoff. A geometric grid
    around the rotating-wave estimate brackets the first maximum, which is
    then refined by golden-section search. Passing ``validate_with`` (the
    production-cutoff eigensystem of ``p``) reruns the winner there.

    Raises
    ------
    CalibrationError
        If the best transfer stays below ``min_transfer``; the exception
        carries the scanned grid.
    """
    if spec.kind != "multitone":
        raise ValueError("only the multi-tone pulse needs calibration")
    cutoff = calibration_cutoff or max(CALIBRATION_CUTOFF, default_cutoff(p.coupling, p.omega_c) * 2 // 3)
    pc = p.with_(fock_cutoff=cutoff)
    eig = dressed_eigensystem(pc)
    local = spec.with_(t0=0.0)
    guess = bright_state_amplitude(pc, eig, local)
    grid = guess * np.geomspace(grid_span[0], grid_span[1], grid_points)
    cache = {}

    def transfer(a):
        if a not in cache:
            cache[a] = swap_transfer(pc, eig, local, a)
        return cache[a]

    grid_transfer = np.array([transfer(a) for a in grid])
    evals = list(zip(grid.tolist(), grid_transfer.tolist()))
    i = int(np.argmax(grid_transfer))
    lo = grid[i - 1] if i > 0 else grid[0] / (grid[1] / grid[0])
    hi = grid[i + 1] if i + 1 < grid.size else grid[-1] * (grid[1] / grid[0])
    _golden_section(transfer, lo, hi, evals, rel_tol)
    best_a, best_t = max(evals, key=lambda e: e[1])
    if best_t < min_transfer:
        raise CalibrationError(
            f"calibrated transfer {best_t:.3f} below {min_transfer}",
            sweep={"grid": grid.tolist(), "transfer": grid_transfer.tolist()},
        )
    result = CalibrationResult(best_a, best_t, grid, grid_transfer, evals, cutoff)
    if validate_with is not None:
        result.validated_transfer = swap_transfer(p, validate_with, local, best_a)
    return result
