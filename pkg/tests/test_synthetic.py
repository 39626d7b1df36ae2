"""
Test the synthetic test profiles and corpora.

Programmer: cellpyx team
Since:  2024-05
"""

import pytest

import numpy as np

from cellpyx.cells import CellSpec
from cellpyx.parameters import reference_ecm_params
from cellpyx.adaptors import build_model, simulate
from cellpyx.synthetic import (
    ProfilePlan, constant_rate_profile, drive_cycle_profile, generate_synthetic, hysteresis_pulse_profile, max_c_rate_at,
)

NUM_OF_RANDOM_INSTANCES=10
SPEC = CellSpec(capacity_Q=100.0, v_min=2.5, v_max=3.65)
SMALL_PLAN = ProfilePlan(temperatures=(25.0,), c_rates=(2.0,), drive_cycles=(), multi_step=False, soc_window=0.02)


def test_constant_rate_moves_the_soc_window():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        c_rate, window = float(rng.choice([0.25, 0.5, 1.0, 2.0])), float(rng.uniform(0.05, 0.5))
        profile = constant_rate_profile(SPEC, c_rate, 25.0, soc_window=window)
        expected = round(window * 3600 / c_rate) * SPEC.c_rate_current(c_rate) / 3600
        assert profile.charge_throughput_ah()[-1] == pytest.approx(expected, rel=1e-9)
        assert profile.current.max() == pytest.approx(SPEC.c_rate_current(c_rate))


def test_cold_tests_are_rate_capped():
    plan = ProfilePlan(temperatures=(-20.0, 0.0, 25.0), c_rates=(0.25, 1.0, 2.0), drive_cycles=(), multi_step=False)
    ids = [entry[0] for entry in plan.entries()]
    assert ids == ["cc0.25_-20C", "cc0.25_0C", "cc1_0C", "cc0.25_25C", "cc1_25C", "cc2_25C"]
    for temp in (-20.0, 0.0):
        profile = drive_cycle_profile(SPEC, "us06", temp, repeats=1)
        assert profile.current.max() <= SPEC.c_rate_current(max_c_rate_at(temp)) + 1e-9
    assert drive_cycle_profile(SPEC, "us06", 25.0, repeats=1).current.max() == pytest.approx(300.0)


def test_validation_cycles_get_the_validation_role():
    plan = ProfilePlan(temperatures=(25.0,), c_rates=(), drive_cycles=("udds", "us06"), multi_step=True)
    roles = {entry[0]: entry[4] for entry in plan.entries()}
    assert roles == {"msc_25C": "calibration", "udds_25C": "calibration", "us06_25C": "validation"}


def test_plan_dict_round_trip():
    plan = ProfilePlan(temperatures=(10.0, 40.0), drive_cycles=("udds",), soc_window=0.5)
    assert ProfilePlan.from_dict(plan.to_dict()) == plan


def test_pulse_profile_charge_balance():
    profile = hysteresis_pulse_profile(SPEC, 25.0, target_socs=(0.9, 0.5, 0.1), rest_s=600)
    throughput = profile.charge_throughput_ah()
    # the pulses cancel, so the profile ends at the lowest target
    assert throughput[-1] == pytest.approx(90.0, rel=1e-9)
    # the pulses at SOC 0.1 keep a 2% margin above empty
    assert throughput.max() == pytest.approx(98.0, rel=1e-9)
    with pytest.raises(ValueError, match="must lie in"):
        hysteresis_pulse_profile(SPEC, 25.0, target_socs=(1.0,))


def test_corpus_is_reproducible():
    params = reference_ecm_params()
    first = generate_synthetic("ecm", params, SMALL_PLAN, noise_sigma=1e-3, random_seed=7)
    second = generate_synthetic("ecm", params, SMALL_PLAN, noise_sigma=1e-3, random_seed=7)
    other = generate_synthetic("ecm", params, SMALL_PLAN, noise_sigma=1e-3, random_seed=8)
    assert np.array_equal(first.datasets[0].series.voltage, second.datasets[0].series.voltage)
    assert not np.array_equal(first.datasets[0].series.voltage, other.datasets[0].series.voltage)
    record = first.truth_record()
    assert record["random_seed"] == 7 and record["datasets"] == ["cc2_25C"]


def test_noise_is_added_to_the_truth_voltage():
    params = reference_ecm_params()
    clean = generate_synthetic("ecm", params, SMALL_PLAN).datasets[0]
    noisy = generate_synthetic("ecm", params, SMALL_PLAN, noise_sigma=1e-3, random_seed=3).datasets[0]
    truth = simulate(build_model("ecm", params), clean)
    assert np.array_equal(clean.series.voltage, truth.voltage)
    difference = noisy.series.voltage - clean.series.voltage
    assert np.all(np.abs(difference) < 6e-3)
    assert np.any(difference != 0)
    with pytest.raises(ValueError, match="non-negative"):
        generate_synthetic("ecm", params, SMALL_PLAN, noise_sigma=-1.0)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
