import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from virtualcat import DressedSpectrum, PiPulseCalibrator
from virtualcat.spectrum import ModelParams, dressed_eigensystem


def test_params_roundtrip_and_clone():
    est = DressedSpectrum(coupling=0.8, omega_g=6.7)
    params = est.get_params()
    assert params == {"omega_q": 1.0, "omega_c": 0.5, "coupling": 0.8, "omega_g": 6.7, "fock_cutoff": None}
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(coupling=1.0)
    assert est.coupling == 1.0


def test_fit_matches_functional_api():
    est = DressedSpectrum().fit()
    eig = dressed_eigensystem(ModelParams())
    np.testing.assert_array_equal(est.energies_, eig.energies)
    assert est.labels_.c_minus == eig.labels.c_minus
    np.testing.assert_array_equal(est.c_minus_, eig.c_minus)
    assert est.carrier_frequency_ == pytest.approx(eig.energies[eig.labels.c_minus] - eig.energies[0])
    assert est.score() > 0.9
    assert est.n_features_in_ == 124


def test_transform_roundtrip(rng):
    est = DressedSpectrum(fock_cutoff=20).fit()
    x = rng.normal(size=(3, 84)) + 1j * rng.normal(size=(3, 84))
    z = est.transform(x)
    np.testing.assert_allclose(np.linalg.norm(z, axis=1), np.linalg.norm(x, axis=1), rtol=1e-12)
    np.testing.assert_allclose(est.inverse_transform(z), x, atol=1e-12)
    # C- maps onto a single dressed amplitude
    unit = est.transform(est.c_minus_)[0]
    assert abs(unit[est.labels_.c_minus]) == pytest.approx(1.0)


def test_transform_validation():
    with pytest.raises(NotFittedError):
        DressedSpectrum().transform(np.zeros(124))
    est = DressedSpectrum(fock_cutoff=20).fit()
    with pytest.raises(ValueError):
        est.transform(np.zeros(10))


def test_calibrator_requires_fit():
    with pytest.raises(NotFittedError):
        PiPulseCalibrator().predict([0.1])
    with pytest.raises(TypeError):
        PiPulseCalibrator().fit("not a model")


def test_calibrator_coarse_fit():
    cal = PiPulseCalibrator(n_tones=5, duration=30.0, grid_points=3, rel_tol=0.1, calibration_cutoff=20)
    cal.fit(DressedSpectrum(omega_g=6.7))
    assert cal.amplitude_ > 0
    assert cal.transfer_ >= cal.result_.grid_transfer.max()
    pred = cal.predict([0.0, cal.amplitude_])
    assert pred[0] == 0.0
    assert pred[1] == pytest.approx(cal.transfer_, abs=1e-12)
    assert clone(cal).get_params() == cal.get_params()
