"""Fast invariant checks behind ``virtualcat verify``.

Each check returns ``(name, passed, detail)``. Everything here runs in a few
seconds at the default cutoff; the long protocol runs live in the test suite.
"""
from __future__ import annotations

import math

import numpy as np

from . import hilbert as hc
from .dynamics import DissipationChannel, lindblad_rates
from .observables import binary_entropy, entanglement_entropy
from .spectrum import ModelParams, build_rabi, build_total, diagonalize, dressed_eigensystem, parity_operator


def check_hermitian_builders(p):
    h = build_total(p)
    err = float(np.max(np.abs(h - h.conj().T)))
    return "hamiltonian hermitian", err < 1e-12, f"max |H - H^dag| = {err:.2e}"


def check_block_decoupling(p):
    h = build_total(p)
    space = p.space
    free = np.diag(space.projector(hc.NONINTERACTING)).real.astype(bool)
    err = float(np.max(np.abs(h[np.ix_(free, ~free)])))
    return "block decoupling", err == 0.0, f"max cross-block entry = {err:.2e}"


def check_parity(p):
    h = build_rabi(p)
    par = parity_operator(p.space)
    err = float(np.max(np.abs(h @ par - par @ h)))
    return "parity commutes with H_R", err < 1e-12, f"max |[H_R, P]| = {err:.2e}"


def check_degeneracy(p):
    eig = dressed_eigensystem(p)
    lab = eig.labels
    worst = max(
        abs(eig.energies[lab.index("e'", n)] - eig.energies[lab.index("g'", n + 2)]) for n in range(p.fock_cutoff - 2)
    )
    return "e'/g' ladder degeneracy", worst < 1e-9, f"max splitting = {worst:.2e}"


def check_entropy_closed_form():
    space = hc.make_space(40)
    alpha = 2.0
    s = entanglement_entropy(hc.analytic_cat(space, alpha, "-"), space)
    ref = binary_entropy((1 + math.exp(-2 * alpha**2)) / 2)
    return "cat entropy closed form", abs(s - ref) < 1e-9, f"|S - H2| = {abs(s - ref):.2e}"


def check_rates_brute_force(p):
    space = hc.make_space(3)
    eig = diagonalize(build_total(p.with_(fock_cutoff=3)))
    ch = DissipationChannel("s_eg", 1e-4)
    s = ch.matrix(space)
    got = lindblad_rates(eig, [ch]).total
    ref = np.zeros_like(got)
    for m in range(eig.dim):
        for n in range(eig.dim):
            if eig.energies[n] - eig.energies[m] > 1e-9 * max(1.0, np.max(np.abs(eig.energies))):
                ref[m, n] = 1e-4 * abs(np.vdot(eig.vectors[:, m], s @ eig.vectors[:, n])) ** 2
    err = float(np.max(np.abs(got - ref)))
    ok = err < 1e-15 and np.all(np.tril(got) == 0.0)
    return "dressed rates vs loop oracle", bool(ok), f"max deviation = {err:.2e}"


def run_checks(p: ModelParams | None = None):
    p = p or ModelParams()
    return [
        check_hermitian_builders(p),
        check_block_decoupling(p),
        check_parity(p),
        check_degeneracy(p),
        check_entropy_closed_form(),
        check_rates_brute_force(p),
    ]
