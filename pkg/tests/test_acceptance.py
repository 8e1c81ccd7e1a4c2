"""Full acceptance gate: all ten criteria at their stated tolerances.

The suite is executed once per session; each test below reports one
criterion with a single PASS or FAIL line.  Run with ``-s`` to watch the
per-criterion progress while the suite executes (about three minutes on
one core).
"""

import pytest

from pmsflow.acceptance import CRITERIA_NAMES, run_acceptance


@pytest.fixture(scope="session")
def verdicts():
    return run_acceptance(seed=0, progress=print)


def _report(verdicts, index):
    v = verdicts[index - 1]
    assert v.name == CRITERIA_NAMES[index - 1]
    status = "PASS" if v.passed else "FAIL"
    print(f"criterion {index:2d} {v.name}: {status} ({v.detail})")
    assert v.passed, f"criterion {index} {v.name}: {v.detail}"


def test_criterion_01_quarter_circle_accuracy(verdicts):
    _report(verdicts, 1)


def test_criterion_02_jump_persistence(verdicts):
    _report(verdicts, 2)


def test_criterion_03_unit_vertical_speed(verdicts):
    _report(verdicts, 3)


def test_criterion_04_conservation_and_dissipation(verdicts):
    _report(verdicts, 4)


def test_criterion_05_velocity_decay(verdicts):
    _report(verdicts, 5)


def test_criterion_06_smooth_flattening(verdicts):
    _report(verdicts, 6)


def test_criterion_07_small_problem_exactness(verdicts):
    _report(verdicts, 7)


def test_criterion_08_contraction(verdicts):
    _report(verdicts, 8)


def test_criterion_09_steep_spike_persistence(verdicts):
    _report(verdicts, 9)


def test_criterion_10_grid_convergence(verdicts):
    _report(verdicts, 10)
