import numpy as np
import pytest

from virtualcat import scenarios
from virtualcat.config import default_config
from virtualcat.errors import CalibrationError
from virtualcat.io import write_results
from virtualcat.scenarios import reference_point, run_scenario


def _quick_ultrafast(**times):
    cfg = default_config("ultrafast_roundtrip")
    cfg.times.samples_per_unit = 16.0
    for k, v in times.items():
        setattr(cfg.times, k, v)
    return cfg


def _quick_sweep(lambdas=(1.0,), tones=(9,)):
    cfg = default_config("entropy_sweep")
    cfg.sweep.lambdas = list(lambdas)
    cfg.sweep.tone_counts = list(tones)
    cfg.model.fock_cutoff = 20
    cfg.pulse.amplitude = 0.05
    cfg.dissipation.enabled = False
    return cfg


def test_zero_amplitude_leaves_c_minus_alone():
    cfg = _quick_ultrafast(detuned_delay=None)
    cfg.pulse.epsilon = 0.0
    res = run_scenario(cfg)
    cols = res.series["dynamics"].columns
    np.testing.assert_allclose(cols["c_minus_population"], 1.0, atol=1e-8)
    for name, col in cols.items():
        if name.startswith("p_"):
            assert np.ptp(col) < 1e-8, name


def test_probability_columns_bounded():
    res = run_scenario(_quick_ultrafast())
    for name, col in res.series["dynamics"].columns.items():
        if name.startswith("p_") or name in ("c_minus_population", "fidelity_ideal"):
            assert np.all((col >= -1e-9) & (col <= 1 + 1e-9)), name


def test_identical_configs_give_identical_bytes(tmp_path):
    cfg = _quick_ultrafast()
    a = write_results(run_scenario(cfg), tmp_path / "a")
    b = write_results(run_scenario(cfg), tmp_path / "b")
    assert a[0].read_bytes() == b[0].read_bytes()


def test_single_lambda_sweep_gives_one_row():
    res = run_scenario(_quick_sweep())
    s = res.series["sweep"]
    assert s.x_name == "lambda_over_wq"
    np.testing.assert_array_equal(s.x, [1.0])
    assert all(len(c) == 1 for c in s.columns.values())
    assert s.columns["ok_9"][0] == 1
    assert 0 <= s.columns["kept_trace_9"][0] <= 1
    # a single tone count leaves nothing to compare
    assert res.scalars == {}


def test_failed_calibration_is_flagged(monkeypatch):
    def boom(*args, **kwargs):
        raise CalibrationError("no transfer above threshold")

    monkeypatch.setattr(scenarios, "calibrate_pi", boom)
    cfg = _quick_sweep(tones=(7, 9))
    cfg.pulse.amplitude = None
    res = run_scenario(cfg)
    cols = res.series["sweep"].columns
    assert cols["ok_7"][0] == 0 and cols["ok_9"][0] == 0
    assert np.isnan(cols["entropy_9"][0])
    assert set(res.metadata["failures"]) == {"1.0:7", "1.0:9"}
    # the reference columns do not depend on the swap and are still filled in
    assert np.isfinite(cols["entropy_reference"][0])


def test_parallel_sweep_matches_serial():
    cfg = _quick_sweep(lambdas=(0.6, 1.0))
    serial = run_scenario(cfg)
    cfg.sweep.n_jobs = 2
    parallel = run_scenario(cfg)
    for k, col in serial.series["sweep"].columns.items():
        np.testing.assert_array_equal(parallel.series["sweep"].columns[k], col)


def test_reference_fidelity_falls_towards_weak_coupling():
    cfg = default_config("entropy_sweep")
    lams = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    f = [reference_point(cfg, lam)["dephased_fidelity"] for lam in lams]
    s = [reference_point(cfg, lam)["entropy"] for lam in lams]
    assert np.all(np.diff(f) > 0)
    assert np.all(np.diff(s) > 0)
    assert s[-1] == pytest.approx(1.0, abs=0.05)


def test_convergence_identical_cutoffs_zero_deviation():
    cfg = default_config("convergence_report")
    cfg.convergence.cutoffs = [24, 24]
    cfg.convergence.rtol_factors = [1.0]
    res = run_scenario(cfg)
    assert np.all(res.series["convergence"].columns["max_deviation"] == 0.0)


@pytest.fixture(scope="module")
def default_convergence():
    cfg = default_config("convergence_report")
    cfg.convergence.rtol_factors = [1.0]
    return run_scenario(cfg)


def test_convergence_reports_runtimes(default_convergence):
    runtimes = default_convergence.metadata["runtimes_seconds"]
    assert set(runtimes) == {"20:1.0", "30:1.0", "40:1.0"}
    assert all(t > 0 for t in runtimes.values())
    assert set(default_convergence.scalars) == {"deviation_20_to_30", "deviation_30_to_40"}


@pytest.mark.xfail(
    strict=True,
    reason="the part of the state left outside C- by the kick is displaced out to n ~ 50 between pulses, "
    "so the recovery is not yet monotone in the cutoff on 20/30/40",
)
def test_convergence_shrinks_with_cutoff(default_convergence):
    s = default_convergence.scalars
    assert s["deviation_30_to_40"] < s["deviation_20_to_30"]


def test_recovery_settles_at_large_cutoff():
    rec = []
    for cutoff in (50, 60):
        cfg = _quick_ultrafast(detuned_delay=None)
        cfg.model.fock_cutoff = cutoff
        rec.append(run_scenario(cfg).scalars["recovery"])
    assert abs(rec[0] - rec[1]) < 1e-6
