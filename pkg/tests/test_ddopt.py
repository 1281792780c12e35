from fractions import Fraction

import pytest

from ldpcstore.ddopt import OptProblem, feasible_lambda, optimize_threshold, tradeoff_curve
from ldpcstore.density import de_iterate
from ldpcstore.errors import Infeasible, InvalidRate, RateImpossible
from ldpcstore.graph import design_rate


def test_rate_impossible():
    with pytest.raises(RateImpossible):
        optimize_threshold(OptProblem(Fraction(1, 2), 3))
    with pytest.raises(RateImpossible):
        feasible_lambda(OptProblem(Fraction(1, 2), 3), 0.2)


def test_invalid_rate():
    with pytest.raises(InvalidRate):
        OptProblem(Fraction(3, 2), 5)


def test_feasible_witness_meets_constraints():
    p = OptProblem(Fraction(1, 2), 5)
    lam = feasible_lambda(p, 0.45)
    dd = p.distribution(lam)
    assert sum(lam.values()) == pytest.approx(1, abs=1e-9)
    assert float(design_rate(dd)) == pytest.approx(0.5, abs=1e-9)
    assert de_iterate(dd, 0.45).success


def test_infeasible_reports_violation():
    p = OptProblem(Fraction(1, 2), 5)
    with pytest.raises(Infeasible) as info:
        feasible_lambda(p, 0.49)
    x, excess = info.value.violation
    assert 0 < x <= 0.49 and excess > 0


def test_cycle_code_only_choice():
    p = OptProblem(Fraction(2, 3), 6, d_max=2)
    assert feasible_lambda(p, 0.19) == pytest.approx({2: 1.0})
    res = optimize_threshold(p)
    assert res.lambda_coeffs == pytest.approx({2: 1.0})
    assert res.epsilon_star == pytest.approx(0.2, abs=p.eps_tol)


def test_rate_half_check_degree_five():
    res = optimize_threshold(OptProblem(Fraction(1, 2), 5))
    assert res.scaled == pytest.approx(0.91, abs=0.02)
    assert res.dv == pytest.approx(2.5, abs=0.05)
    assert res.gamma == 4


def test_rate_three_quarters_check_degree_nine():
    res = optimize_threshold(OptProblem(Fraction(3, 4), 9))
    assert res.scaled == pytest.approx(0.748, abs=0.02)
    assert res.dv == pytest.approx(2.25, abs=0.05)


def test_tradeoff_rate_half():
    rows = tradeoff_curve(Fraction(1, 2), range(4, 8))
    scaled = [r.result.scaled for r in rows]
    assert all(a < b for a, b in zip(scaled, scaled[1:]))
    assert scaled[-1] == pytest.approx(0.984, abs=0.01)


def test_tradeoff_rate_two_thirds():
    rows = tradeoff_curve(Fraction(2, 3), range(7, 11))
    for row, expected in zip(rows, (0.826, 0.901, 0.943, 0.964)):
        assert row.result.scaled == pytest.approx(expected, abs=0.01)


def test_tradeoff_keeps_impossible_rows():
    rows = tradeoff_curve(Fraction(1, 2), [3, 4])
    assert [r.status for r in rows] == ["rate_impossible", "ok"]


def test_tradeoff_empty():
    assert tradeoff_curve(Fraction(1, 2), []) == []
