"""
Test the per-sample timing.

Programmer: cellpyx team
Since:  2024-05
"""

import pytest

from cellpyx.parameters import reference_ecm_params
from cellpyx.benchmark import MIN_BENCH_STEPS, benchmark_step_time


def test_ecm_step_is_fast():
    timing = benchmark_step_time("ecm", reference_ecm_params(), repeats=1)
    assert timing.n_steps == MIN_BENCH_STEPS
    assert 0 < timing.median_ms <= 0.5
    assert timing.to_dict()["median_ms_per_step"] == timing.median_ms


def test_short_runs_are_rejected():
    with pytest.raises(ValueError, match="at least 100000 steps"):
        benchmark_step_time("ecm", reference_ecm_params(), n_steps=MIN_BENCH_STEPS - 1)
    with pytest.raises(ValueError, match="at least one run"):
        benchmark_step_time("ecm", reference_ecm_params(), repeats=0)


if __name__ == "__main__":
     pytest.main(["-v",__file__])
