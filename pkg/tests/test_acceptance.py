"""Acceptance gate: every criterion at its stated tolerance and runtime budget.

Runs the shared battery once per session and prints one pass/fail line per
criterion (shown with `pytest -s` or in the captured output).
"""

import pytest

from proxfilm.acceptance import RUNTIME_LIMITS, run_acceptance


@pytest.fixture(scope="module")
def battery():
    results = run_acceptance(out_dir=None, quiet=True)
    for res in results:
        print(res.line())
    return {r.cid: r for r in results}


def _assert_criterion(battery, cid):
    res = battery[cid]
    print(res.line())
    assert res.passed, res.line()
    limit = RUNTIME_LIMITS.get(cid)
    if limit is not None:
        assert res.elapsed <= limit, f"criterion {cid} exceeded {limit}s: {res.elapsed:.1f}s"


def test_criterion_1_resolvent_nonexpansiveness(battery):
    _assert_criterion(battery, 1)


def test_criterion_2_oracle_equivalence(battery):
    _assert_criterion(battery, 2)


def test_criterion_3_dissipation_suite(battery):
    _assert_criterion(battery, 3)


def test_criterion_4_linearized_decay(battery):
    _assert_criterion(battery, 4)


def test_criterion_5_stationary_singular_solution(battery):
    _assert_criterion(battery, 5)


def test_criterion_6_cross_model_agreement(battery):
    _assert_criterion(battery, 6)


def test_criterion_7_variational_inequality(battery):
    _assert_criterion(battery, 7)


def test_criterion_8_gradient_correctness(battery):
    _assert_criterion(battery, 8)


def test_criterion_9_determinism(battery):
    _assert_criterion(battery, 9)
