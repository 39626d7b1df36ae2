"""
Test the relaxation extrapolation, the hysteresis map and the hysteresis fit.

Programmer: cellpyx team
Since:  2024-05
"""

import pytest

import numpy as np

from cellpyx.cells import CellSpec, OcvSurface, ECM_SOC_GRID, ECM_TEMP_GRID
from cellpyx.hysteresis import HysteresisParams
from cellpyx.parameters import EcmParams
from cellpyx.timeseries import TimeSeries
from cellpyx.models.ecm import EcmModel
from cellpyx.identify.pso import PsoConfig
from cellpyx.synthetic import hysteresis_pulse_test
from cellpyx.characterization import (
    HysteresisMap, fit_relaxation, find_rest_segments, coulomb_count, rest_points, fit_plett,
    EXTRAPOLATION_TIME_S,
)

NUM_OF_RANDOM_INSTANCES=10
NUM_OF_NOISY_RELAXATIONS=100


def relaxing_segment(rng, sigma:float) -> tuple:
    t = np.arange(0.0, 9001.0)
    k1, k2, k3 = rng.choice([-1, 1])*rng.uniform(0.01, 0.08), rng.uniform(-1.2, -0.2), rng.uniform(3.1, 3.4)
    clean = k1*np.power(np.maximum(t, 1.0), k2) + k3
    segment = TimeSeries(time=t, current=np.zeros_like(t), temperature=np.full_like(t, 25.0),
                         voltage=clean + rng.normal(0.0, sigma, len(t)))
    return segment, k1*EXTRAPOLATION_TIME_S**k2 + k3


def test_relaxation_extrapolates_noisy_power_law():
    sigma = 5e-4
    for i in range(NUM_OF_NOISY_RELAXATIONS):
        rng = np.random.default_rng(i)
        segment, expected = relaxing_segment(rng, sigma)
        fit = fit_relaxation(segment)
        assert abs(fit.v_at_8h - expected) <= 1e-3, f"seed {i}"
        assert fit.rms_residual < 1.2*sigma


def test_relaxation_is_exact_without_noise():
    for i in range(NUM_OF_RANDOM_INSTANCES):
        rng = np.random.default_rng(i)
        segment, expected = relaxing_segment(rng, 0.0)
        assert fit_relaxation(segment).v_at_8h == pytest.approx(expected, abs=1e-6)


def test_relaxation_rejects_short_or_loaded_segments():
    t = np.arange(0.0, 100.0)
    short = TimeSeries(time=t, current=np.zeros_like(t), temperature=np.full_like(t, 25.0), voltage=np.full_like(t, 3.3))
    with pytest.raises(ValueError, match="need at least"):
        fit_relaxation(short)
    loaded = TimeSeries(time=t, current=np.full_like(t, 5.0), temperature=np.full_like(t, 25.0), voltage=np.full_like(t, 3.3))
    with pytest.raises(ValueError, match="not a rest"):
        fit_relaxation(loaded, min_duration_s=10)


def test_find_rest_segments_sides():
    series = TimeSeries.concatenate([
        TimeSeries.constant(10, 0.0, 25.0), TimeSeries.constant(5, 20.0, 25.0), TimeSeries.constant(40, 0.0, 25.0),
        TimeSeries.constant(5, -20.0, 25.0), TimeSeries.constant(40, 0.0, 25.0), TimeSeries.constant(5, 20.0, 25.0),
        TimeSeries.constant(10, 0.0, 25.0)])
    segments = find_rest_segments(series, min_duration_s=30)
    assert [segment.side for segment in segments] == ["discharge", "charge"]
    for segment in segments:
        assert np.all(series.current[segment.start:segment.stop] == 0)
        assert series.current[segment.start - 1] != 0


def test_coulomb_count_applies_charge_efficiency():
    series = TimeSeries(time=[0.0, 3600.0, 7200.0], current=[0.0, 10.0, -10.0], temperature=[25.0]*3)
    soc = coulomb_count(series, 0.5, 100.0, eta_charge=0.9)
    assert soc.tolist() == pytest.approx([0.5, 0.4, 0.49])


#### Hysteresis fit on a simulated pulse test


SPEC = CellSpec(capacity_Q=100.0, v_min=2.5, v_max=3.65, sampling_dt=5.0)
TRUTH = HysteresisParams.constant(m0=0.005, m=0.020, gamma=20.0)
TARGETS = (0.3, 0.5, 0.7)


def ecm_without_relaxation() -> EcmModel:
    """ Tiny RC branches, so every rest voltage is flat at OCV plus hysteresis. """
    shape = (len(ECM_SOC_GRID), len(ECM_TEMP_GRID))
    ocv = np.tile((3.2 + 0.2*np.array(ECM_SOC_GRID))[:,None], (1, len(ECM_TEMP_GRID)))
    params = EcmParams(
        r0=np.full(shape, 1e-3), r1=np.full(shape, 1e-9), r2=np.full(shape, 1e-9),
        c1=np.full(shape, 1e3), c2=np.full(shape, 1e3),
        ocv=OcvSurface(ECM_SOC_GRID, ECM_TEMP_GRID, ocv))
    return EcmModel(params, SPEC, TRUTH)


@pytest.fixture(scope="module")
def pulse_test():
    return hysteresis_pulse_test(ecm_without_relaxation(), SPEC, 25.0, target_socs=TARGETS, rest_s=3600.0)


def truth_map() -> HysteresisMap:
    mean = np.array([[3.2 + 0.2*soc] for soc in ECM_SOC_GRID])
    half_gap = TRUTH.m0_at(25.0) + TRUTH.m_at(0.5, 25.0)
    return HysteresisMap(ECM_SOC_GRID, (25.0,), mean + half_gap, mean - half_gap)


def test_rest_points_land_on_the_targets(pulse_test):
    points = rest_points(pulse_test, SPEC)
    assert len(points) == 4*len(TARGETS)
    assert sorted({round(point.soc, 9) for point in points}) == list(TARGETS)
    model = ecm_without_relaxation()
    for point in points:
        assert abs(point.voltage - model.params.ocv(point.soc, 25.0)) <= 0.025 + 1e-6


def test_fit_recovers_gamma(pulse_test):
    fit = fit_plett([pulse_test], truth_map(), SPEC, PsoConfig(n_particles=40, max_iterations=150, random_seed=0))
    assert fit.params.gamma == pytest.approx(TRUTH.gamma, rel=0.02)
    assert fit.gamma_identifiable
    assert fit.rmse < 1e-4
    assert fit.m0_fitted[25.0] == pytest.approx(0.005, abs=5e-4)


def test_fit_runs_in_a_process_pool(pulse_test):
    serial = fit_plett([pulse_test], truth_map(), SPEC, PsoConfig(n_particles=8, max_iterations=2, random_seed=0))
    parallel = fit_plett([pulse_test], truth_map(), SPEC, PsoConfig(n_particles=8, max_iterations=2, random_seed=0, n_workers=2))
    assert parallel.rmse == serial.rmse
    assert parallel.params.gamma == serial.params.gamma
    assert parallel.identification.n_evaluations == serial.identification.n_evaluations


def test_charge_efficiency_enters_the_rest_socs(pulse_test):
    default = rest_points(pulse_test, SPEC)
    lossy = rest_points(pulse_test, SPEC, eta_charge=0.9)
    socs = coulomb_count(pulse_test.series, pulse_test.initial_soc, SPEC.capacity_Q, 0.9)
    assert len(lossy) == len(default)
    for point in lossy:
        assert point.soc == pytest.approx(socs[point.segment.start])
    assert any(abs(a.soc - b.soc) > 1e-6 for a,b in zip(default, lossy))
    fit = fit_plett([pulse_test], truth_map(), SPEC, PsoConfig(n_particles=8, max_iterations=2, random_seed=0), eta_charge=0.9)
    assert fit.n_points == len(lossy)
    assert np.isfinite(fit.rmse)


def test_map_fills_missing_nodes():
    hmap = HysteresisMap([0.0, 0.5, 1.0], [25.0], [[np.nan], [3.32], [3.42]], [[3.18], [3.30], [3.40]])
    assert hmap.missing == [(0.0, 25.0, "charge")]
    assert hmap.charge_ocv[0,0] == pytest.approx(3.32)
    assert hmap.to_frame()["charge_missing"].sum() == 1
    with pytest.raises(ValueError, match="no discharge-side rest"):
        HysteresisMap([0.0, 1.0], [25.0], [[3.2], [3.4]], [[np.nan], [np.nan]])


if __name__ == "__main__":
     pytest.main(["-v",__file__])
