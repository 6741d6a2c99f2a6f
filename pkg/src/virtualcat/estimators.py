"""scikit-learn style wrappers around the spectrum and the pi-pulse calibration.

Hyperparameters live in ``__init__`` and are exposed through ``get_params`` /
``set_params``; everything computed by ``fit`` carries a trailing underscore,
so the objects work with ``sklearn.base.clone`` and parameter grids.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .drive import PulseSpec, calibrate_pi, swap_transfer
from .spectrum import ModelParams, ModelWarning, build_total, carrier_frequency, default_cutoff, dressed_eigensystem


class DressedSpectrum(TransformerMixin, BaseEstimator):
    """Diagonalize the extended Rabi Hamiltonian and label its dressed states.

    ``transform`` maps bare-basis state vectors (one per row) onto dressed
    amplitudes; ``inverse_transform`` maps them back.

    Parameters
    ----------
    omega_q, omega_c, coupling, omega_g : float
        Model frequencies in units of ``omega_q``.
    fock_cutoff : int or None
        Photon-number cutoff. ``None`` picks ``max(30, ceil(10 alpha^2 / 3))``.
    """

    def __init__(self, omega_q=1.0, omega_c=0.5, coupling=1.0, omega_g=9.0, fock_cutoff=None):
        self.omega_q = omega_q
        self.omega_c = omega_c
        self.coupling = coupling
        self.omega_g = omega_g
        self.fock_cutoff = fock_cutoff

    def model_params(self) -> ModelParams:
        cutoff = self.fock_cutoff or default_cutoff(self.coupling, self.omega_c)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ModelWarning)
            return ModelParams(self.omega_q, self.omega_c, self.coupling, self.omega_g, cutoff)

    def fit(self, X=None, y=None):
        self.params_ = self.model_params()
        self.space_ = self.params_.space
        self.hamiltonian_ = build_total(self.params_, self.space_)
        self.eigensystem_ = dressed_eigensystem(self.params_)
        self.energies_ = self.eigensystem_.energies
        self.labels_ = self.eigensystem_.labels
        self.c_minus_ = self.eigensystem_.c_minus
        self.carrier_frequency_ = carrier_frequency(self.eigensystem_)
        self.n_features_in_ = self.space_.dim
        return self

    def _check_states(self, X):
        check_is_fitted(self, "eigensystem_")
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        if X.shape[1] != self.space_.dim:
            raise ValueError(f"expected states of dimension {self.space_.dim}, got {X.shape[1]}")
        return X

    def transform(self, X):
        X = self._check_states(X)
        return X @ self.eigensystem_.vectors.conj()

    def inverse_transform(self, X):
        X = self._check_states(X)
        return X @ self.eigensystem_.vectors.T

    def score(self, X=None, y=None):
        """Overlap of the numerical ``C-`` with the cat ansatz."""
        check_is_fitted(self, "eigensystem_")
        return self.labels_.c_minus_overlap


class PiPulseCalibrator(BaseEstimator):
    """Calibrate the multi-tone pi-pulse amplitude for a fitted spectrum.

    ``fit`` takes a :class:`DressedSpectrum` (fitted or not) or a
    :class:`ModelParams`. ``predict`` returns the dissipation-free transfer
    into ``{g', e'}`` for an array of trial amplitudes.
    """

    def __init__(self, n_tones=9, duration=70.0, ramp_fraction=0.1, grid_points=9, rel_tol=2e-3, calibration_cutoff=None):
        self.n_tones = n_tones
        self.duration = duration
        self.ramp_fraction = ramp_fraction
        self.grid_points = grid_points
        self.rel_tol = rel_tol
        self.calibration_cutoff = calibration_cutoff

    def _spec(self, omega_q):
        return PulseSpec(
            kind="multitone",
            n_tones=self.n_tones,
            duration=2 * math.pi * self.duration / omega_q,
            ramp_fraction=self.ramp_fraction,
        )

    def fit(self, X, y=None):
        if isinstance(X, DressedSpectrum):
            p = X.params_ if hasattr(X, "params_") else X.model_params()
        elif isinstance(X, ModelParams):
            p = X
        else:
            raise TypeError("fit expects a DressedSpectrum or ModelParams")
        spec = self._spec(p.omega_q)
        res = calibrate_pi(
            p, spec, grid_points=self.grid_points, rel_tol=self.rel_tol, calibration_cutoff=self.calibration_cutoff
        )
        self.params_ = p
        self.result_ = res
        self.amplitude_ = res.amplitude
        self.transfer_ = res.transfer
        self._calibration_params = p.with_(fock_cutoff=res.fock_cutoff)
        return self

    def predict(self, X):
        if not hasattr(self, "result_"):
            raise NotFittedError("PiPulseCalibrator is not fitted yet")
        amplitudes = np.ravel(np.asarray(X, dtype=float))
        pc = self._calibration_params
        eig = dressed_eigensystem(pc)
        spec = self._spec(pc.omega_q)
        return np.array([swap_transfer(pc, eig, spec, a) for a in amplitudes])
