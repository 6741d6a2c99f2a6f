import math

import numpy as np
import pytest
from scipy.integrate import quad

from virtualcat import hilbert as hc
from virtualcat.drive import (
    MULTITONE_TERMS,
    ULTRAFAST_TERMS,
    PulseSpec,
    TimeDependentTerm,
    bright_state_amplitude,
    check_no_overlap,
    drive_operator,
    flattop_area,
    flattop_envelope,
    gaussian_envelope,
    multitone_pulse,
    swap_transfer,
    tone_frequencies,
    tone_targets,
    ultrafast_pulse,
)
from virtualcat.dynamics import evolve_schrodinger
from virtualcat.errors import CalibrationError
from virtualcat.observables import fidelity, ideal_swapped_cat
from virtualcat.spectrum import ModelParams, build_total, diagonalize, dressed_eigensystem, identify_states

A_P = 0.01


def test_gaussian_peak_and_area():
    peak = gaussian_envelope(0.3, 0.3)
    assert peak == pytest.approx(math.pi * 0.5 / (A_P * math.sqrt(2 * math.pi)), rel=1e-14)
    area, _ = quad(lambda t: gaussian_envelope(t, 0.0), -1, 1, points=[0.0], epsabs=1e-13)
    assert area == pytest.approx(math.pi / 2, rel=1e-10)


def test_ultrafast_carrier_and_operator(params, eig):
    pulse = ultrafast_pulse(params, eig, 1.0)
    lab = eig.labels
    w_p = eig.energies[lab.c_minus] - eig.energies[lab.index("g'", 0)]
    t = 1.0 + 0.3 * A_P
    assert pulse(t) == pytest.approx(gaussian_envelope(t, 1.0) * math.cos(w_p * 0.3 * A_P), rel=1e-12)
    space = params.space
    expected = sum(
        hc.atomic_projector(space, m, n) + hc.atomic_projector(space, n, m) for m, n in (("e", "g'"), ("g", "e'"))
    )
    np.testing.assert_array_equal(pulse.operator, expected)


def test_ultrafast_tail_bound(params, eig):
    pulse = ultrafast_pulse(params, eig, 2.0)
    peak = gaussian_envelope(2.0, 2.0)
    for dt in (8.0001 * A_P, 9 * A_P, 20 * A_P):
        assert abs(pulse(2.0 + dt)) < 1e-12 * peak
        assert abs(pulse(2.0 - dt)) < 1e-12 * peak
    # the raw Gaussian at the cut is itself below the bound
    assert gaussian_envelope(2.0 + 8 * A_P, 2.0) < 1e-12 * peak


def test_ultrafast_window_check(params, eig):
    with pytest.raises(ValueError):
        ultrafast_pulse(params, eig, 10.0, window=(0.0, 5.0))


@pytest.mark.parametrize("terms", [ULTRAFAST_TERMS, MULTITONE_TERMS])
def test_drive_operators_hermitian(terms):
    op = drive_operator(hc.make_space(6), terms)
    assert np.array_equal(op, op.conj().T)


def test_pulse_spec_invariants():
    assert PulseSpec(kind="ultrafast").operator_terms == ULTRAFAST_TERMS
    assert PulseSpec(kind="multitone").operator_terms == MULTITONE_TERMS
    with pytest.raises(ValueError):
        PulseSpec(kind="ultrafast", carriers=(1.0, 2.0))
    with pytest.raises(ValueError):
        PulseSpec(carriers=(-1.0,))


def test_tone_targets_ladder():
    assert tone_targets(5) == [("g'", 1), ("e'", 0), ("g'", 3), ("e'", 2), ("g'", 5)]


@pytest.mark.parametrize("n_tones", [7, 9])
def test_tone_target_bare_energies(params, eig, n_tones):
    lab = eig.labels
    for m, target in enumerate(tone_targets(n_tones), start=1):
        assert eig.energies[lab.bare[target]] == pytest.approx(m * params.omega_c, abs=1e-12)


@pytest.mark.parametrize("n_tones", [7, 9])
def test_carriers_distinct_positive(params, eig, n_tones):
    w = np.array(tone_frequencies(eig, params, n_tones))
    assert np.all(w > 0)
    assert np.unique(np.round(w, 9)).size == n_tones
    np.testing.assert_allclose(-np.diff(w), params.omega_c, atol=1e-12)


def test_carrier_gauge_invariance(params, eig):
    h = build_total(params) + 3.7 * np.eye(params.space.dim)
    shifted = diagonalize(h)
    shifted = shifted.with_labels(identify_states(shifted, params))
    np.testing.assert_allclose(tone_frequencies(shifted, params, 9), tone_frequencies(eig, params, 9), atol=1e-10)


def test_flattop_area_closed_form():
    duration, r = 7.0, 0.1
    area, _ = quad(lambda t: flattop_envelope(t, 1.0, duration, r), 1.0, 1.0 + duration, points=[1.7, 7.3], limit=200)
    assert area == pytest.approx(flattop_area(duration, r), rel=1e-10)
    assert area == pytest.approx(duration * (1 - r), rel=1e-10)


def test_flattop_shape():
    assert flattop_envelope(-0.1, 0.0, 1.0) == 0.0
    assert flattop_envelope(0.5, 0.0, 1.0) == 1.0
    assert flattop_envelope(1.1, 0.0, 1.0) == 0.0
    assert flattop_envelope(0.05, 0.0, 1.0) == pytest.approx(0.5)


def test_multitone_profile_formula(params, eig):
    pulse = multitone_pulse(params, eig, 2.0, 9, 50.0, 0.01)
    w = np.array(tone_frequencies(eig, params, 9))
    t = 27.3
    assert pulse(t) == pytest.approx(0.01 * np.cos(w * (t - 2.0)).sum(), rel=1e-12)
    np.testing.assert_array_equal(pulse.operator, drive_operator(params.space, MULTITONE_TERMS))


def test_multitone_needs_amplitude(params, eig):
    with pytest.raises(CalibrationError):
        multitone_pulse(params, eig, 0.0, 9, 10.0, None)


def test_zero_amplitude_is_undriven(params, eig):
    pulse = multitone_pulse(params, eig, 0.0, 9, 10.0, 0.0)
    assert all(pulse(t) == 0.0 for t in np.linspace(0, 10, 101))
    spec = PulseSpec(kind="multitone", n_tones=9, duration=10.0)
    assert swap_transfer(params, eig, spec, 0.0) == 0.0


def test_overlapping_pulses_rejected(params, eig):
    a = multitone_pulse(params, eig, 0.0, 9, 10.0, 0.1)
    b = multitone_pulse(params, eig, 5.0, 9, 10.0, 0.1)
    with pytest.raises(ValueError):
        check_no_overlap([a, b])
    check_no_overlap([a, multitone_pulse(params, eig, 10.5, 9, 10.0, 0.1)])


def _plateau(params, eig, carrier):
    space = params.space
    op = drive_operator(space, ULTRAFAST_TERMS)
    t0 = 1.0
    term = TimeDependentTerm(
        op, lambda t: float(gaussian_envelope(t, t0) * math.cos(carrier * (t - t0))), t0 - 8 * A_P, t0 + 8 * A_P
    )
    traj = evolve_schrodinger(build_total(params), [term], eig.c_minus, (0.0, 1.2), 0.2, eig=eig)
    return fidelity(traj.final_state, ideal_swapped_cat(eig, space))


def test_resonant_carrier_beats_detuned(params, eig):
    w_p = eig.energies[eig.labels.c_minus] - eig.energies[eig.labels.index("g'", 0)]
    on, off = _plateau(params, eig, w_p), _plateau(params, eig, 1.05 * w_p)
    assert on > off
    assert on > 0.95


def test_pulse_off_equivalence(params, eig):
    far = ultrafast_pulse(params, eig, 1e3)
    h0 = build_total(params)
    psi0 = (eig.c_minus + eig.vectors[:, eig.labels.index("g'", 3)]) / math.sqrt(2)
    with_pulse = evolve_schrodinger(h0, [far], psi0, (0.0, 5.0), 0.5, eig=eig)
    without = evolve_schrodinger(h0, [], psi0, (0.0, 5.0), 0.5, eig=eig)
    np.testing.assert_allclose(np.array(with_pulse.states), np.array(without.states), atol=1e-12)


def test_bright_state_guess_positive(params, eig):
    spec = PulseSpec(kind="multitone", n_tones=9, duration=140 * math.pi)
    a = bright_state_amplitude(params, eig, spec)
    assert a > 0 and math.isfinite(a)


# -- calibration at the multi-tone default point (slow: ~25 trial propagations)


def test_calibration_search_properties(multitone_calibration):
    res = multitone_calibration
    assert res.transfer >= res.grid_transfer.max()
    assert res.transfer > 0.9
    amps = np.array([a for a, _ in res.evaluations])
    assert res.amplitude in amps
    # continuity: neighbouring grid points never jump by more than the full range
    assert np.all(np.abs(np.diff(res.grid_transfer)) <= 1.0)


def test_calibration_failure_carries_sweep(monkeypatch):
    from virtualcat import drive

    monkeypatch.setattr(drive, "swap_transfer", lambda *a, **k: 0.1)
    spec = PulseSpec(kind="multitone", n_tones=3, duration=10.0)
    with pytest.raises(CalibrationError) as info:
        drive.calibrate_pi(ModelParams(fock_cutoff=20), spec, grid_points=3, rel_tol=0.5)
    assert len(info.value.sweep["grid"]) == 3
