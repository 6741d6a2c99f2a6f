"""Pure-state and Lindblad propagation in the dressed basis of the static Hamiltonian.

Both propagators work in the interaction picture of the static Hamiltonian
``H0`` expressed in its own eigenbasis. There the free evolution is a pure
phase, so pulse-free stretches are advanced in closed form (the dressed
dissipator acts elementwise on coherences and as a rate matrix on
populations), and only the stretches where a pulse profile is nonzero go
through the adaptive Runge-Kutta integrator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .drive import TimeDependentTerm
from .errors import IntegrationError, PositivityError
from .spectrum import Eigensystem, diagonalize
from .validation import check_density_matrix, check_hermitian, check_state

SCHRODINGER_RTOL = 1e-9
MASTER_RTOL = 1e-7
NORM_TOL = 1e-8
TRACE_TOL = 1e-7
HERMITICITY_TOL = 1e-9
POSITIVITY_TOL = 1e-7

#: atomic channels at 1e-4, cavity channel at 1e-5 (units of omega_q)
DEFAULT_RATES = {"s_eg'": 1e-4, "s_ge'": 1e-4, "s_eg": 1e-4, "a+a†": 1e-5}

_CHANNEL_OPERATORS = {
    "s_eg'": ("e", "g'"),
    "s_ge'": ("g", "e'"),
    "s_eg": ("e", "g"),
}


@dataclass(frozen=True)
class DissipationChannel:
    """System operator label and relaxation rate ``gamma`` (units of omega_q)."""

    system_operator: str
    gamma: float

    def __post_init__(self):
        if self.system_operator not in DEFAULT_RATES:
            raise ValueError(
                f"unknown dissipation channel {self.system_operator!r}; expected one of {list(DEFAULT_RATES)}"
            )
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    def matrix(self, space) -> np.ndarray:
        from . import hilbert as hc

        if self.system_operator == "a+a†":
            a = hc.annihilation(space)
            return a + a.conj().T
        m, n = _CHANNEL_OPERATORS[self.system_operator]
        return np.array(hc.atomic_projector(space, m, n))


def default_channels(scale: float = 1.0) -> list[DissipationChannel]:
    return [DissipationChannel(k, g * scale) for k, g in DEFAULT_RATES.items()]


@dataclass(frozen=True)
class RateMatrix:
    """Per-channel downward rates ``Gamma[k][m, n]``, nonzero only for ``E_n > E_m``."""

    per_channel: np.ndarray  # shape (n_channels, dim, dim)
    labels: tuple

    @property
    def total(self) -> np.ndarray:
        return self.per_channel.sum(axis=0)

    def decay_rates(self) -> np.ndarray:
        """Total outgoing rate of every eigenstate, summed over channels and targets."""
        return self.total.sum(axis=0)


def downward_mask(energies: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    """``mask[m, n]`` true when ``E_n - E_m`` exceeds the degeneracy tolerance."""
    e = np.asarray(energies)
    scale = max(1.0, float(np.max(np.abs(e)))) if e.size else 1.0
    return (e[None, :] - e[:, None]) > atol * scale


def lindblad_rates(eig: Eigensystem, channels: Sequence[DissipationChannel], operators=None) -> RateMatrix:
    """``gamma_k |<m|S_k|n>|^2`` in the eigenbasis of the static Hamiltonian.

    ``operators`` supplies the system operators as matrices; by default they
    are built from each channel's label on the four-level space matching the
    eigensystem dimension.
    """
    vecs = eig.vectors
    mask = downward_mask(eig.energies)
    if operators is None:
        from .hilbert import make_space

        space = make_space(eig.dim // 4 - 1)
        operators = [ch.matrix(space) for ch in channels]
    rates = np.zeros((len(channels), eig.dim, eig.dim))
    for k, (ch, s) in enumerate(zip(channels, operators)):
        if ch.gamma == 0:
            continue
        elems = vecs.conj().T @ np.asarray(s) @ vecs
        rates[k] = np.where(mask, ch.gamma * np.abs(elems) ** 2, 0.0)
    return RateMatrix(rates, tuple(ch.system_operator for ch in channels))


@dataclass
class Trajectory:
    """Sampled evolution. ``times`` are raw times; ``t_tilde`` is ``omega_q t / 2 pi``."""

    times: np.ndarray
    observables: dict = field(default_factory=dict)
    states: list | None = None
    diagnostics: dict = field(default_factory=dict)
    omega_q: float = 1.0

    @property
    def t_tilde(self) -> np.ndarray:
        return self.times * self.omega_q / (2 * np.pi)

    @property
    def final_state(self):
        if not self.states:
            raise ValueError("trajectory was run without keeping states")
        return self.states[-1]


def sample_times(window, sample_dt: float) -> np.ndarray:
    t_start, t_end = map(float, window)
    if not t_end > t_start:
        raise ValueError("window end must exceed window start")
    if sample_dt <= 0:
        raise ValueError("sample_dt must be positive")
    n = int(np.floor((t_end - t_start) / sample_dt + 1e-9))
    times = t_start + sample_dt * np.arange(n + 1)
    if t_end - times[-1] > 1e-9 * sample_dt:
        times = np.append(times, t_end)
    return times


def _active_segments(pulses: Sequence[TimeDependentTerm], t_start: float, t_end: float):
    spans = sorted(
        (max(p.t_on, t_start), min(p.t_off, t_end)) for p in pulses if p.t_off > t_start and p.t_on < t_end
    )
    merged = []
    for a, b in spans:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged if b > a]


class _DressedFrame:
    """Static Hamiltonian eigenbasis plus the pulse operators expressed in it."""

    def __init__(self, h0, pulses, eig=None):
        h0 = check_hermitian(h0, "H0")
        self.eig = eig if eig is not None else diagonalize(h0)
        if self.eig.dim != h0.shape[0]:
            raise ValueError("eigensystem dimension does not match H0")
        self.energies = np.asarray(self.eig.energies)
        self.vectors = np.asarray(self.eig.vectors)
        self.pulses = list(pulses)
        self.operators = []
        for p in self.pulses:
            op = check_hermitian(p.operator, "pulse operator")
            if op.shape != h0.shape:
                raise ValueError("pulse operator dimension does not match H0")
            self.operators.append(self.vectors.conj().T @ op @ self.vectors)

    def phases(self, t):
        return np.exp(-1j * self.energies * t)

    def coupling(self, t):
        """Interaction-picture pulse operator at time ``t`` (None if all profiles vanish)."""
        total = None
        for p, op in zip(self.pulses, self.operators):
            if not p.t_on <= t <= p.t_off:
                continue
            f = p.profile(t)
            if f == 0.0:
                continue
            total = f * op if total is None else total + f * op
        if total is None:
            return None
        ph = np.exp(1j * self.energies * t)
        return (ph[:, None] * total) * ph.conj()[None, :]

    def to_dressed(self, state):
        return self.vectors.conj().T @ state if state.ndim == 1 else self.vectors.conj().T @ state @ self.vectors

    def to_bare(self, dressed):
        return self.vectors @ dressed if dressed.ndim == 1 else self.vectors @ dressed @ self.vectors.conj().T


def _integrate(rhs, t_span, y0, t_eval, rtol, atol, max_step=np.inf):
    sol = solve_ivp(rhs, t_span, y0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol, max_step=max_step)
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else t_span[0]
        raise IntegrationError(f"integration failed at t = {t_fail:.6g}: {sol.message}", time=t_fail)
    return sol


def evolve_schrodinger(
    h0,
    pulses: Sequence[TimeDependentTerm],
    psi0,
    window,
    sample_dt: float,
    *,
    observables: Mapping[str, Callable] | None = None,
    keep_states: bool = True,
    rtol: float = SCHRODINGER_RTOL,
    atol: float | None = None,
    eig: Eigensystem | None = None,
    norm_tol: float = NORM_TOL,
) -> Trajectory:
    """Integrate ``i dpsi/dt = (H0 + sum_j f_j(t) O_j) psi`` over ``window``.

    Observables receive the state in the bare product basis. ``keep_states``
    stores the bare-basis state at every sample.

    Raises
    ------
    IntegrationError
        On step-size underflow, or when the norm drifts by more than ``norm_tol``.
    """
    frame = _DressedFrame(h0, pulses, eig)
    psi0 = check_state(psi0, frame.energies.shape[0])
    observables = dict(observables or {})
    times = sample_times(window, sample_dt)
    t_start, t_end = times[0], times[-1]
    atol = rtol * 1e-3 if atol is None else atol

    def rhs(t, y):
        op = frame.coupling(t)
        return np.zeros_like(y) if op is None else -1j * (op @ y)

    # interaction-picture amplitudes relative to t = 0
    y = frame.to_dressed(psi0) / frame.phases(t_start)
    emitted = {}
    nfev = 0
    t_cur = t_start
    for a, b in _active_segments(pulses, t_start, t_end):
        for t in times[(times >= t_cur) & (times < a)]:
            emitted[t] = y
        inside = times[(times >= a) & (times <= b)]
        sol = _integrate(rhs, (a, b), y, np.unique(np.append(inside, b)), rtol, atol)
        nfev += sol.nfev
        for k, t in enumerate(inside):
            emitted[t] = sol.y[:, k]
        y = sol.y[:, -1]
        t_cur = b
    for t in times[times >= t_cur]:
        emitted.setdefault(t, y)

    traj = Trajectory(times, {k: [] for k in observables}, [] if keep_states else None)
    drift = 0.0
    for i, t in enumerate(times):
        amp = emitted[t]
        drift = max(drift, abs(np.linalg.norm(amp) - 1.0))
        psi = frame.to_bare(amp * frame.phases(t))
        for name, fn in observables.items():
            traj.observables[name].append(fn(psi))
        if keep_states:
            traj.states.append(psi)
    traj.observables = {k: np.asarray(v) for k, v in traj.observables.items()}
    traj.diagnostics = {"max_norm_drift": drift, "nfev": nfev, "rtol": rtol, "atol": atol}
    if drift > norm_tol:
        raise IntegrationError(f"norm drift {drift:.3e} exceeds {norm_tol:.1e}; tighten rtol")
    return traj


class _Dissipator:
    """Dressed-basis Lindblad dissipator: population transfer plus coherence damping."""

    def __init__(self, rates: RateMatrix | None, dim: int):
        if rates is None:
            self.transfer = np.zeros((dim, dim))
        else:
            self.transfer = rates.total
        self.kappa = self.transfer.sum(axis=0)
        self.damping = -0.5 * (self.kappa[:, None] + self.kappa[None, :])
        self.generator = self.transfer - np.diag(self.kappa)
        self.active = bool(np.any(self.transfer))

    def __call__(self, x):
        out = self.damping * x
        out[np.diag_indices_from(out)] += self.transfer @ np.diag(x).real
        return out

    def free(self, x, dt):
        """Exact evolution over ``dt`` with no drive."""
        if not self.active or dt == 0:
            return x
        out = np.exp(self.damping * dt) * x
        pops = expm(self.generator * dt) @ np.diag(x).real
        out[np.diag_indices_from(out)] = pops
        return out


def evolve_master(
    h0,
    pulses: Sequence[TimeDependentTerm],
    rho0,
    channels: Sequence[DissipationChannel],
    window,
    sample_dt: float,
    *,
    observables: Mapping[str, Callable] | None = None,
    keep_states: bool = False,
    keep_times: Sequence[float] = (),
    rtol: float = MASTER_RTOL,
    atol: float | None = None,
    eig: Eigensystem | None = None,
    check_positivity: bool = True,
    channel_operators=None,
) -> Trajectory:
    """Integrate the dressed-basis master equation.

    Jump operators ``|m><n|`` connect eigenstates of the static ``H0`` only;
    the pulse enters through the commutator. Snapshots are symmetrized before
    they are emitted. ``keep_times`` stores the state only at the samples
    nearest to the listed times (useful for long runs).

    Raises
    ------
    PositivityError
        If a sampled density matrix has an eigenvalue below ``-1e-7``.
    IntegrationError
        On integrator failure or trace drift above ``1e-7``.
    """
    frame = _DressedFrame(h0, pulses, eig)
    dim = frame.energies.shape[0]
    rho0 = check_density_matrix(rho0, dim)
    rates = lindblad_rates(frame.eig, channels, channel_operators) if channels else None
    diss = _Dissipator(rates, dim)
    observables = dict(observables or {})
    times = sample_times(window, sample_dt)
    t_start, t_end = times[0], times[-1]
    atol = rtol * 1e-3 if atol is None else atol
    keep_idx = {int(np.argmin(np.abs(times - t))) for t in keep_times}

    def rhs(t, y):
        x = y.reshape(dim, dim)
        out = diss(x) if diss.active else np.zeros_like(x)
        op = frame.coupling(t)
        if op is not None:
            m = op @ x
            out += -1j * (m - m.conj().T)
        return out.ravel()

    ph0 = frame.phases(t_start)
    x = frame.to_dressed(rho0)
    x = (ph0.conj()[:, None] * x) * ph0[None, :]
    emitted = {}
    nfev = 0
    t_cur = t_start
    for a, b in _active_segments(pulses, t_start, t_end):
        for t in times[(times >= t_cur) & (times < a)]:
            emitted[t] = diss.free(x, t - t_cur)
        x = diss.free(x, a - t_cur)
        inside = times[(times >= a) & (times <= b)]
        sol = _integrate(rhs, (a, b), x.ravel(), np.unique(np.append(inside, b)), rtol, atol)
        nfev += sol.nfev
        for k, t in enumerate(inside):
            emitted[t] = sol.y[:, k].reshape(dim, dim)
        x = sol.y[:, -1].reshape(dim, dim)
        t_cur = b
    for t in times[times >= t_cur]:
        emitted.setdefault(t, diss.free(x, t - t_cur))

    traj = Trajectory(times, {k: [] for k in observables}, [] if (keep_states or keep_idx) else None)
    trace_drift = herm = 0.0
    lam_min = np.inf
    for i, t in enumerate(times):
        xi = emitted[t]
        herm = max(herm, float(np.max(np.abs(xi - xi.conj().T))))
        xi = 0.5 * (xi + xi.conj().T)
        trace_drift = max(trace_drift, abs(np.trace(xi).real - 1.0))
        if check_positivity:
            lam = float(np.linalg.eigvalsh(xi).min())
            lam_min = min(lam_min, lam)
            if lam < -POSITIVITY_TOL:
                raise PositivityError(f"density matrix eigenvalue {lam:.3e} at t = {t:.6g}")
        ph = frame.phases(t)
        rho = frame.to_bare((ph[:, None] * xi) * ph.conj()[None, :])
        for name, fn in observables.items():
            traj.observables[name].append(fn(rho))
        if keep_states or i in keep_idx:
            traj.states.append(rho)
    traj.observables = {k: np.asarray(v) for k, v in traj.observables.items()}
    traj.diagnostics = {
        "max_trace_drift": trace_drift,
        "max_hermiticity_error": herm,
        "min_eigenvalue": lam_min if check_positivity else None,
        "nfev": nfev,
        "rtol": rtol,
        "atol": atol,
        "kept_sample_indices": sorted(keep_idx),
    }
    if trace_drift > TRACE_TOL:
        raise IntegrationError(f"trace drift {trace_drift:.3e} exceeds {TRACE_TOL:.0e}")
    return traj
