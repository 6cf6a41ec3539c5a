"""
Run configuration.

 Group 1 — Defaults
 Group 2 — Frequency units
 Group 3 — Malformed and invalid input
 Group 4 — Protocol sections
 Group 5 — Overrides
 Group 6 — Serialisation
"""
import math

import pytest
from hypothesis import given, settings, strategies as st

from python_sta.baselines import BaselineKind
from python_sta.config import (
    DEFAULT_CONFIG_TEXT,
    RunConfig,
    default_config,
    load_config,
    mhz_to_rad,
    parse_config,
    rad_to_mhz,
    serialize_config,
)
from python_sta.errors import ConfigError, ConfigParseError, MissingSectionError
from python_sta.experiments import DetuningModel, ErrorKind, Protocol
from python_sta.hamiltonian import StirapParams
from python_sta.propagator import TrajectoryMethod

TR = "[run]\nprotocol = tr\n[rescale]\na = 10\n"


# ── Group 1 — Defaults ────────────────────────────────────────────────────────

def test_empty_stirap_section_gives_reference_parameters():
    config = parse_config(TR + "[stirap]\n")
    assert config.stirap == StirapParams.nominal()
    assert config.rescale.a == 10.0
    assert config.rescale.t_f == 10.0


def test_run_defaults():
    config = parse_config(TR)
    assert config.protocol is Protocol.TR
    assert config.method is TrajectoryMethod.NUMERIC
    assert config.steps is None
    assert config.grid_points == 1001
    assert config.workers == 1
    assert config.scan is None
    assert config.output.path("scan.csv").name == "scan.csv"


def test_default_config():
    config = default_config()
    assert config.rescale.a == 10.0
    assert config.scan.error_kind is ErrorKind.AMPLITUDE
    assert config.scan.duration == pytest.approx(1.0)
    assert (config.scan.low, config.scan.high, config.scan.n_points) == (-0.3, 0.3, 121)


def test_stirap_defaults_follow_t_f():
    config = parse_config("[run]\nprotocol = reference\n[stirap]\nt_f_us = 20\n")
    assert config.stirap.t0 == pytest.approx(2.0)
    assert config.stirap.sigma == pytest.approx(20 / 6)


def test_load_config_reads_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(DEFAULT_CONFIG_TEXT, encoding="utf-8")
    assert load_config(path) == default_config()


# ── Group 2 — Frequency units ─────────────────────────────────────────────────

def test_frequencies_are_read_in_mhz():
    config = parse_config(TR + "[stirap]\nomega0_mhz = 3\ndelta_p_mhz = -1.5\n")
    assert config.stirap.omega0 == pytest.approx(2 * math.pi * 3)
    assert config.stirap.delta_p == pytest.approx(-2 * math.pi * 1.5)


@given(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_mhz_round_trip(value):
    rad = mhz_to_rad(value)
    assert mhz_to_rad(rad_to_mhz(rad)) == rad


def test_detuning_scan_range_in_mhz():
    config = parse_config(TR + "[scan]\nkind = detuning\nlow = -2\nhigh = 2\n")
    assert config.scan.high == pytest.approx(2 * math.pi * 2)


# ── Group 3 — Malformed and invalid input ─────────────────────────────────────

def test_duplicate_key_reports_position():
    with pytest.raises(ConfigParseError) as info:
        parse_config("[run]\nprotocol = tr\nprotocol = cd\n")
    assert info.value.line == 3
    assert info.value.column == 1


def test_key_outside_section():
    with pytest.raises(ConfigParseError) as info:
        parse_config("protocol = tr\n")
    assert info.value.line == 1


def test_unknown_key():
    with pytest.raises(ConfigError) as info:
        parse_config(TR + "[stirap]\ncolour = red\n")
    assert info.value.key == "stirap.colour"


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(TR + "[plot]\n")


def test_default_section_rejected():
    with pytest.raises(ConfigError):
        parse_config("[DEFAULT]\nsteps = 3\n" + TR)


def test_contraction_below_one():
    with pytest.raises(ConfigError, match="a must be >= 1") as info:
        parse_config("[run]\nprotocol = tr\n[rescale]\na = 0.5\n")
    assert info.value.key == "rescale.a"


@pytest.mark.parametrize("text, key", [
    ("[run]\nsteps = many\n", "run.steps"),
    ("[run]\nsteps = 0\n", "run.steps"),
    ("[run]\ngrid_points = 1\n", "run.grid_points"),
    ("[run]\nworkers = 0\n", "run.workers"),
    ("[run]\nconvergence_tol = 0\n", "run.convergence_tol"),
    ("[run]\nprotocol = magic\n", "run.protocol"),
    ("[run]\ncheck_convergence = perhaps\n", "run.check_convergence"),
    ("[output]\npulse_points = 1\n", "output.pulse_points"),
    ("[rescale]\nt_f_us = 5\n", "rescale.t_f_us"),
    ("[stirap]\nsigma_us = -1\n", "stirap"),
])
def test_invalid_values_name_their_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text + ("" if "[rescale]" in text else "[rescale]\n"))
    assert info.value.key == key


def test_steps_auto():
    assert parse_config("[run]\nsteps = auto\n[rescale]\n").steps is None
    assert parse_config("[run]\nsteps = 250\n[rescale]\n").steps == 250


# ── Group 4 — Protocol sections ───────────────────────────────────────────────

def test_tr_needs_rescale():
    with pytest.raises(MissingSectionError) as info:
        parse_config("[run]\nprotocol = tr\n")
    assert info.value.section == "rescale"
    with pytest.raises(MissingSectionError):
        RunConfig().require_rescale()


@pytest.mark.parametrize("protocol", ["cd", "pi_pulse"])
def test_baselines_need_window(protocol):
    with pytest.raises(MissingSectionError) as info:
        parse_config(f"[run]\nprotocol = {protocol}\n")
    assert info.value.section == "baseline"


def test_reference_needs_no_rescale():
    config = parse_config("[run]\nprotocol = reference\n")
    assert config.rescale is None
    assert config.baseline is None


def test_pi_pulse_baseline():
    config = parse_config("[run]\nprotocol = pi_pulse\n[baseline]\nduration_us = 2\n")
    assert config.baseline.kind is BaselineKind.PI_PULSE
    assert config.baseline.duration == 2.0


def test_cd_baseline_pulses():
    config = parse_config("[run]\nprotocol = cd\n[baseline]\nduration_us = 1\n")
    assert config.baseline.kind is BaselineKind.COUNTERDIABATIC
    assert config.baseline.stirap.t_f == 1.0
    assert config.baseline.stirap.t0 == pytest.approx(1 / 8)


def test_scan_window_per_protocol():
    tr = parse_config(TR + "[scan]\nkind = delay\n")
    assert tr.scan.duration == pytest.approx(1.0)
    assert tr.scan.a == 10.0
    reference = parse_config("[run]\nprotocol = reference\n[scan]\n")
    assert reference.scan.duration == 10.0
    pi = parse_config("[run]\nprotocol = pi_pulse\n[baseline]\nduration_us = 0.5\n[scan]\nkind = detuning\n")
    assert pi.scan.duration == 0.5


def test_pi_pulse_delay_scan_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config("[run]\nprotocol = pi_pulse\n[baseline]\n[scan]\nkind = delay\n")
    assert info.value.key == "scan"


# ── Group 5 — Overrides ───────────────────────────────────────────────────────

def test_overrides_win_over_file():
    config = parse_config(TR, {"rescale.a": "2", "run.workers": "4"})
    assert config.rescale.a == 2.0
    assert config.workers == 4


def test_overrides_create_sections():
    config = default_config({"run.protocol": "pi_pulse", "scan.detuning_model": "one_and_two_photon"})
    assert config.protocol is Protocol.PI_PULSE
    assert config.scan.detuning_model is DetuningModel.ONE_AND_TWO_PHOTON


def test_overrides_are_validated():
    with pytest.raises(ConfigError):
        parse_config(TR, {"rescale.a": "0.9"})
    with pytest.raises(ConfigError):
        parse_config(TR, {"run.bogus": "1"})


# ── Group 6 — Serialisation ───────────────────────────────────────────────────

@pytest.mark.parametrize("text", [
    DEFAULT_CONFIG_TEXT,
    "[run]\nprotocol = reference\nsteps = 900\n[stirap]\nomega0_mhz = 2.7\ndelta_p_mhz = 0.3\n",
    "[run]\nprotocol = cd\n[baseline]\nduration_us = 0.8\n[scan]\nkind = detuning\nlow = -1.1\nhigh = 4\n",
    "[run]\nprotocol = pi_pulse\n[baseline]\n[scan]\nn_points = 7\n[output]\ndirectory = out\n",
])
def test_serialised_config_parses_back(text):
    config = parse_config(text)
    assert parse_config(serialize_config(config)) == config
