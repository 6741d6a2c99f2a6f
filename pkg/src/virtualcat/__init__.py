"""Virtual-to-real Schrödinger cat conversion in an ultrastrongly coupled four-level atom."""

__version__ = "0.1.0"

from .hilbert import SpaceSpec, analytic_cat, annihilation, atomic_projector, coherent_state, make_space
from .spectrum import (
    Eigensystem,
    ModelParams,
    build_rabi,
    build_total,
    carrier_frequency,
    diagonalize,
    dressed_eigensystem,
    identify_states,
)
from .drive import PulseSpec, calibrate_pi, multitone_pulse, tone_frequencies, ultrafast_pulse
from .dynamics import DissipationChannel, evolve_master, evolve_schrodinger, lindblad_rates
from .observables import (
    bare_populations,
    dephased_fidelity,
    entanglement_entropy,
    fidelity,
    ideal_swapped_cat,
    postselect,
)
from .estimators import DressedSpectrum, PiPulseCalibrator

__all__ = [
    "SpaceSpec",
    "make_space",
    "annihilation",
    "atomic_projector",
    "coherent_state",
    "analytic_cat",
    "ModelParams",
    "Eigensystem",
    "build_rabi",
    "build_total",
    "diagonalize",
    "identify_states",
    "dressed_eigensystem",
    "carrier_frequency",
    "PulseSpec",
    "ultrafast_pulse",
    "tone_frequencies",
    "multitone_pulse",
    "calibrate_pi",
    "DissipationChannel",
    "lindblad_rates",
    "evolve_schrodinger",
    "evolve_master",
    "bare_populations",
    "fidelity",
    "dephased_fidelity",
    "ideal_swapped_cat",
    "postselect",
    "entanglement_entropy",
    "DressedSpectrum",
    "PiPulseCalibrator",
]
