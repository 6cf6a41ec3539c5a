"""
Robustness scans.

 Group 1 — Scan specs
 Group 2 — Executed Hamiltonians
 Group 3 — Amplitude scans
 Group 4 — Detuning and delay scans
 Group 5 — Curve comparisons
 Group 6 — Failure handling and ordering
"""
import math
from dataclasses import replace

import numpy as np
import pytest

from python_sta import experiments
from python_sta.errors import DomainError
from python_sta.experiments import (
    CD_LABEL,
    DetuningModel,
    ErrorKind,
    Protocol,
    ScanSpec,
    a_independence_check,
    dominance_margin,
    executed_hamiltonian,
    run_amplitude_scan,
    run_delay_scan,
    run_detuning_scan,
    run_scan,
)
from python_sta.hamiltonian import StirapParams
from python_sta.hamiltonian.stirap import TWO_PI
from python_sta.hamiltonian.stirap import hamiltonian as stirap_matrix

TR10 = {"a": 10.0}


# ── Group 1 — Scan specs ──────────────────────────────────────────────────────

def test_labels():
    assert ScanSpec.amplitude(Protocol.TR, **TR10).label == "tr(a=10)"
    assert ScanSpec.amplitude(Protocol.CD).label == CD_LABEL
    assert ScanSpec.amplitude(Protocol.PI_PULSE).label == "pi_pulse"


def test_error_values_are_uniform():
    spec = ScanSpec.amplitude(Protocol.PI_PULSE, -0.3, 0.3, n_points=121)
    assert spec.error_values[0] == -0.3
    assert spec.error_values[-1] == 0.3
    assert spec.error_values[60] == pytest.approx(0.0, abs=1e-15)


def test_tr_pulses_last_a_times_longer():
    spec = ScanSpec.amplitude(Protocol.TR, **TR10)
    assert spec.pulse_params() == StirapParams.nominal(t_f=10.0)
    assert spec.rescale_params().duration == pytest.approx(1.0)
    assert spec.total_steps() == 7600


def test_reference_and_baseline_windows():
    assert ScanSpec.amplitude(Protocol.REFERENCE, duration=10.0).pulse_params() == StirapParams.nominal()
    assert ScanSpec.amplitude(Protocol.CD).pulse_params().t_f == pytest.approx(1.0)
    assert ScanSpec.amplitude(Protocol.PI_PULSE).pulse_params() is None
    assert ScanSpec.amplitude(Protocol.PI_PULSE, steps=50).total_steps() == 50


@pytest.mark.parametrize("kwargs", [
    {"protocol": Protocol.TR},
    {"protocol": Protocol.TR, "a": 0.5},
    {"protocol": Protocol.PI_PULSE, "n_points": 1},
    {"protocol": Protocol.PI_PULSE, "low": 0.2, "high": -0.2},
    {"protocol": Protocol.PI_PULSE, "high": math.inf},
    {"protocol": Protocol.PI_PULSE, "duration": 0.0},
    {"protocol": Protocol.PI_PULSE, "workers": 0},
    {"protocol": Protocol.PI_PULSE, "steps": 0},
    {"protocol": Protocol.TR, "a": 10.0, "stirap": StirapParams.nominal(t_f=5.0)},
])
def test_invalid_specs_rejected(kwargs):
    kwargs = {"error_kind": ErrorKind.AMPLITUDE, "low": -0.1, "high": 0.1, **kwargs}
    with pytest.raises(DomainError):
        ScanSpec(**kwargs)


def test_pi_pulse_has_no_delay():
    with pytest.raises(DomainError):
        ScanSpec.delay(Protocol.PI_PULSE)


def test_runner_checks_error_kind():
    with pytest.raises(DomainError):
        run_amplitude_scan(ScanSpec.detuning(Protocol.PI_PULSE, n_points=2))
    with pytest.raises(DomainError):
        run_delay_scan(ScanSpec.amplitude(Protocol.CD, n_points=2))


# ── Group 2 — Executed Hamiltonians ───────────────────────────────────────────

def test_amplitude_error_scales_reference_pulses():
    spec = ScanSpec.amplitude(Protocol.REFERENCE, duration=10.0)
    h = executed_hamiltonian(spec, 0.2)
    assert np.allclose(h(5.0), 1.2 * stirap_matrix(StirapParams.nominal(), 5.0))


def test_detuning_models():
    spec = ScanSpec.detuning(Protocol.REFERENCE, duration=10.0)
    one = executed_hamiltonian(spec, 2.0)(3.0)
    assert (one[1, 1], one[2, 2]) == (2.0, 0.0)
    both = executed_hamiltonian(replace(spec, detuning_model=DetuningModel.ONE_AND_TWO_PHOTON), 2.0)(3.0)
    assert (both[1, 1], both[2, 2]) == (2.0, 2.0)


def test_pi_pulse_detuning_sits_on_target_level():
    h = executed_hamiltonian(ScanSpec.detuning(Protocol.PI_PULSE), 3.0)(0.5)
    assert (h[1, 1], h[2, 2]) == (0.0, 3.0)


def test_tr_detuning_is_not_modulated():
    ## a static offset stays static even where f_dot reaches 2a - 1
    h = executed_hamiltonian(ScanSpec.detuning(Protocol.TR, **TR10), 1.5)(0.5)
    assert h[1, 1] == pytest.approx(1.5)


def test_delay_error_moves_pulses():
    spec = ScanSpec.delay(Protocol.REFERENCE, duration=10.0)
    h = executed_hamiltonian(spec, 0.2)
    assert np.allclose(h(5.0), stirap_matrix(StirapParams.nominal().replace(t0=1.2), 5.0))


# ── Group 3 — Amplitude scans ─────────────────────────────────────────────────

def test_tr_amplitude_robustness():
    result = run_amplitude_scan(ScanSpec.amplitude(Protocol.TR, -0.2, 0.2, n_points=3, **TR10))
    assert result.fidelities[1] >= 0.999
    assert result.fidelities.min() >= 0.99
    assert not result.failed.any()


def test_cd_amplitude_scan():
    result = run_amplitude_scan(ScanSpec.amplitude(Protocol.CD, -0.2, 0.2, n_points=3))
    low, nominal, high = result.fidelities
    assert nominal >= 0.999
    assert 0.85 <= low <= 0.95
    assert high == pytest.approx(0.95, abs=5e-3)
    assert result.protocol == CD_LABEL


@pytest.mark.parametrize("beta", [-0.2, 0.2])
def test_pi_pulse_amplitude_matches_rabi(beta):
    result = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, beta, beta, n_points=2))
    assert result.fidelities[0] == pytest.approx(math.sin((1 + beta) * math.pi / 2) ** 2, abs=1e-3)


def test_amplitude_scan_metadata():
    result = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, n_points=2, steps=20))
    assert len(result) == 2
    assert result.protocol == "pi_pulse"
    assert result.metadata["error_kind"] == "amplitude_beta"
    assert result.metadata["steps"] == 20
    assert "detuning_injection" not in result.metadata


# ── Group 4 — Detuning and delay scans ────────────────────────────────────────

def test_zero_detuning_equals_zero_amplitude_error():
    detuned = run_detuning_scan(ScanSpec.detuning(Protocol.TR, 0.0, 0.0, n_points=2, **TR10))
    nominal = run_amplitude_scan(ScanSpec.amplitude(Protocol.TR, 0.0, 0.0, n_points=2, **TR10))
    assert detuned.fidelities == pytest.approx(nominal.fidelities, abs=1e-12)


def test_detuning_metadata_names_injection():
    result = run_scan(ScanSpec.detuning(Protocol.PI_PULSE, n_points=2, steps=20))
    assert result.metadata["detuning_model"] == "one_photon"
    assert "[3]" in result.metadata["detuning_injection"]


def test_detuned_pi_pulse_loses_transfer():
    result = run_scan(ScanSpec.detuning(Protocol.PI_PULSE, 0.0, TWO_PI * 3, n_points=2, steps=20))
    assert result.fidelities[0] == pytest.approx(1.0, abs=1e-9)
    assert result.fidelities[1] < 0.9


def test_tr_delay_robustness():
    result = run_delay_scan(ScanSpec.delay(Protocol.TR, -0.2, 0.2, n_points=2, **TR10))
    assert result.fidelities.min() >= 0.99


# ── Group 5 — Curve comparisons ───────────────────────────────────────────────

def test_tr_dominates_pi_pulse_on_amplitude():
    tr = run_scan(ScanSpec.amplitude(Protocol.TR, -0.2, 0.2, n_points=3, **TR10))
    pi = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, -0.2, 0.2, n_points=3))
    assert dominance_margin(tr, pi) >= -0.01
    ## the pi pulse only loses away from beta = 0
    assert tr.fidelities[0] > pi.fidelities[0]


def test_tr_close_to_cd_on_detuning():
    tr = run_scan(ScanSpec.detuning(Protocol.TR, -TWO_PI * 3, TWO_PI * 3, n_points=3, **TR10))
    cd = run_scan(ScanSpec.detuning(Protocol.CD, -TWO_PI * 3, TWO_PI * 3, n_points=3))
    assert dominance_margin(tr, cd) >= -0.01


def test_tr_dominates_baselines_on_full_detuning_range():
    window = dict(low=-TWO_PI * 6, high=TWO_PI * 6, n_points=13, workers=4)
    tr = run_detuning_scan(ScanSpec.detuning(Protocol.TR, **window, **TR10))
    cd = run_detuning_scan(ScanSpec.detuning(Protocol.CD, **window))
    pi = run_detuning_scan(ScanSpec.detuning(Protocol.PI_PULSE, **window))
    assert not (tr.failed.any() or cd.failed.any() or pi.failed.any())
    assert dominance_margin(tr, cd) >= -0.01
    assert dominance_margin(tr, pi) >= -0.01
    assert tr.fidelities.min() >= 0.99


def test_dominance_needs_shared_grid():
    first = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, n_points=2, steps=20))
    second = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, n_points=3, steps=20))
    with pytest.raises(DomainError):
        dominance_margin(first, second)


def test_amplitude_curves_do_not_depend_on_a():
    assert a_independence_check([2.0, 5.0, 10.0], [-0.2, 0.0, 0.2]) <= 5e-3


def test_detuning_curves_agree_for_large_a():
    ## the offset is static, so f_dot >> 1 during the transfer keeps it small for both a
    grid = [-TWO_PI * 3, 0.0, TWO_PI * 3]
    assert a_independence_check([5.0, 10.0], grid, error_kind=ErrorKind.DETUNING) <= 5e-3


def test_identical_a_values_agree_exactly():
    assert a_independence_check([1.0, 1.0], [0.0, 0.1]) == 0.0


def test_a_independence_needs_grid():
    with pytest.raises(DomainError):
        a_independence_check([2.0, 10.0], [])


# ── Group 6 — Failure handling and ordering ───────────────────────────────────

def test_failed_points_are_flagged(monkeypatch):
    build = experiments.executed_hamiltonian

    def flaky(spec, error):
        if error > 0:
            raise DomainError("no convergence here")
        return build(spec, error)

    monkeypatch.setattr(experiments, "executed_hamiltonian", flaky)
    result = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, -0.1, 0.1, n_points=3, steps=20))
    assert list(result.failed) == [False, False, True]
    assert math.isnan(result.fidelities[2])
    assert not np.isnan(result.fidelities[:2]).any()


@pytest.mark.parametrize("workers", [1, 3])
@pytest.mark.parametrize("failure", [FloatingPointError("overflow in exp"), ValueError("array must not contain infs or NaNs")])
def test_numerical_failures_are_flagged(monkeypatch, workers, failure):
    build = experiments.executed_hamiltonian

    def flaky(spec, error):
        if error < 0:
            raise failure
        return build(spec, error)

    monkeypatch.setattr(experiments, "executed_hamiltonian", flaky)
    result = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, -0.1, 0.1, n_points=3, steps=20, workers=workers))
    assert list(result.failed) == [True, False, False]
    assert math.isnan(result.fidelities[0])
    assert result.fidelities[1] == pytest.approx(1.0, abs=1e-9)


def test_failed_point_breaks_a_independence(monkeypatch):
    build = experiments.executed_hamiltonian

    def flaky(spec, error):
        if spec.a == 10.0:
            raise DomainError("boom")
        return build(spec, error)

    monkeypatch.setattr(experiments, "executed_hamiltonian", flaky)
    assert a_independence_check([2.0, 10.0], [0.0, 0.1]) == math.inf


def test_scans_are_deterministic():
    spec = ScanSpec.amplitude(Protocol.PI_PULSE, n_points=5, steps=20)
    assert np.array_equal(run_scan(spec).fidelities, run_scan(spec).fidelities)


def test_parallel_scan_keeps_grid_order():
    serial = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, n_points=9, steps=20))
    parallel = run_scan(ScanSpec.amplitude(Protocol.PI_PULSE, n_points=9, steps=20, workers=3))
    assert np.array_equal(serial.error_values, parallel.error_values)
    assert np.array_equal(serial.fidelities, parallel.fidelities)
