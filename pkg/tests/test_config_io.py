import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from virtualcat.config import SCENARIOS, default_config, emit_config, load_config, parse_config
from virtualcat.errors import ConfigError
from virtualcat.io import format_number, read_series, series_csv, write_results
from virtualcat.scenarios import ResultSet, Series


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_roundtrip_defaults(scenario):
    cfg = default_config(scenario)
    assert parse_config(emit_config(cfg)) == cfg


def test_published_defaults():
    uf = default_config("ultrafast_roundtrip")
    assert (uf.model.omega_g, uf.model.coupling, uf.times.t_pulse1, uf.times.t_pulse2) == (9.0, 1.0, 2.0, 4.0)
    assert not uf.dissipation.enabled
    mt = default_config("multitone_roundtrip")
    assert (mt.model.omega_g, mt.times.t_pulse1, mt.times.t_pulse2) == (6.7, 80.0, 250.0)
    assert mt.dissipation.enabled
    d = mt.dissipation
    assert (d.gamma_egp, d.gamma_gep, d.gamma_eg, d.gamma_field) == (1e-4, 1e-4, 1e-4, 1e-5)
    sw = default_config("entropy_sweep")
    assert sw.sweep.lambdas == [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1]
    assert sw.sweep.tone_counts == [7, 9] and sw.model.omega_g == 9.0


finite = st.floats(min_value=1e-3, max_value=50, allow_nan=False, allow_infinity=False)


@given(
    scenario=st.sampled_from(SCENARIOS),
    coupling=finite,
    omega_g=finite,
    cutoff=st.one_of(st.none(), st.integers(1, 80)),
    amplitude=st.one_of(st.none(), finite),
    lambdas=st.lists(finite, min_size=1, max_size=5),
    tones=st.lists(st.integers(1, 12), min_size=1, max_size=3),
    enabled=st.booleans(),
    gamma=st.floats(0, 1e-2),
    directory=st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=12),
)
@settings(max_examples=60, deadline=None)
def test_roundtrip_property(scenario, coupling, omega_g, cutoff, amplitude, lambdas, tones, enabled, gamma, directory):
    cfg = default_config(scenario)
    cfg.model.coupling = coupling
    cfg.model.omega_g = omega_g
    cfg.model.fock_cutoff = cutoff
    cfg.pulse.amplitude = amplitude
    cfg.sweep.lambdas = lambdas
    cfg.sweep.tone_counts = tones
    cfg.dissipation.enabled = enabled
    cfg.dissipation.gamma_field = gamma
    cfg.output.directory = directory
    cfg.validate()
    assert parse_config(emit_config(cfg)) == cfg


def test_partial_file_overlays_scenario_defaults():
    cfg = parse_config('scenario = "multitone_roundtrip"\nmodel.coupling = 0.8\n')
    assert cfg.model.coupling == 0.8
    assert cfg.model.omega_g == 6.7
    assert cfg.times.t_pulse2 == 250.0


def test_none_switches_off_optional():
    cfg = parse_config('times.t_pulse2 = "none"\ntimes.detuned_delay = "none"\n', "ultrafast_roundtrip")
    assert cfg.times.t_pulse2 is None


@pytest.mark.parametrize(
    "text",
    [
        "model.nonsense = 1\n",
        "bogus.key = 1\n",
        'model.coupling = "strong"\n',
        "times.t_pulse1 = 5.0\ntimes.t_pulse2 = 4.0\n",
        "model.fock_cutoff = 0\n",
        "model.fock_cutoff = 2.5\n",
        "sweep.lambdas = []\n",
        "scenario = \"nope\"\n",
        "this is not = = valid\n",
        'pulse.kind = "square"\n',
    ],
)
def test_bad_configs_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text, None if "scenario" in text else "ultrafast_roundtrip")


def test_scenario_mismatch():
    with pytest.raises(ConfigError):
        parse_config('scenario = "entropy_sweep"\n', "ultrafast_roundtrip")


def test_multitone_overlap_rejected():
    with pytest.raises(ConfigError):
        parse_config("times.t_pulse2 = 100.0\n", "multitone_roundtrip")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


# -- output ----------------------------------------------------------------


def test_twelve_significant_digits():
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(123456.7890123456) == "123456.789012"
    assert format_number(2.5e-17) == "2.5e-17"
    assert format_number(float("nan")) == "nan"


def test_csv_layout_and_readback(tmp_path):
    x = np.linspace(0, 1, 5)
    s = Series("t_tilde", x, {"a": x**2, "b": np.sqrt(x)})
    text = series_csv(s)
    assert text.splitlines()[0] == "t_tilde,a,b"
    res = ResultSet("ultrafast_roundtrip", {"k": np.float64(1.5), "flag": np.bool_(True)}, {"dyn": s}, {"x": 1.0})
    paths = write_results(res, tmp_path)
    assert [p.name for p in paths] == ["dyn.csv", "metadata.json"]
    back = read_series(tmp_path / "dyn.csv")
    np.testing.assert_allclose(back["a"], x**2, rtol=1e-11)
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["scalars"] == {"x": 1.0} and meta["flag"] is True and meta["series_files"] == ["dyn.csv"]
