import math

import pytest

from bellfield.correlator import TSIRELSON
from bellfield.errors import ParameterError, TsirelsonViolation
from bellfield.optimize import (
    QFT_LIMITS,
    _Tracker,
    dense_grid_oracle,
    maximize_chsh_qft,
    maximize_chsh_spin,
)
from bellfield.spin import AngleSet

SPIN_TARGET = 2 * math.sqrt(2) * (1 + math.sqrt(2)) / 3


def test_floor_with_reference_point_inside():
    r = maximize_chsh_qft(((0, 1), (0, 1), (0.2, 0.6)))
    assert r.best_value >= 2.14931


def test_full_box_matches_dense_grid():
    r = maximize_chsh_qft()
    grid, at = dense_grid_oracle(points=120)
    assert r.best_value >= grid - 1e-12
    assert abs(r.best_value - grid) < 1e-3
    assert r.best_params.eta == pytest.approx(0, abs=1e-6)
    assert r.best_params.lam == pytest.approx(QFT_LIMITS[2][1])
    assert r.best_value <= TSIRELSON + 1e-9


def test_small_lambda_slice():
    r = maximize_chsh_qft(((0, 5), (0, 5), (0.001, 0.001)))
    assert 2.0 <= r.best_value <= 2.0 + 1e-5
    assert r.best_params.lam == 0.001


def test_deterministic():
    a = maximize_chsh_qft(seed=7, budget=800)
    b = maximize_chsh_qft(seed=7, budget=800)
    assert a == b


@pytest.mark.parametrize("seed", [0, 3])
def test_incumbent_non_decreasing_in_budget(seed):
    values = [maximize_chsh_qft(seed=seed, budget=b).best_value for b in (1, 10, 100, 300, 1000, 3000)]
    assert values == sorted(values)


def test_budget_counts_evaluations():
    r = maximize_chsh_qft(budget=50)
    assert r.evaluations == 50


@pytest.mark.parametrize(
    "bounds",
    [((0, 6), (0, 1), (0.1, 0.5)), ((0, 1), (0, 1), (0.0, 0.5)), ((1, 0), (0, 1), (0.1, 0.5)), ((0, 1), (0, 1))],
)
def test_bad_bounds(bounds):
    with pytest.raises(ParameterError):
        maximize_chsh_qft(bounds)


def test_empty_budget():
    with pytest.raises(ParameterError, match="empty budget"):
        maximize_chsh_qft(budget=0)


def test_guardrail():
    t = _Tracker(lambda x: 3.0, 10)
    with pytest.raises(TsirelsonViolation):
        t([0.0])


def test_ties_keep_first():
    t = _Tracker(lambda x: 1.0, 10)
    t([1.0])
    t([2.0])
    assert t.best_x.tolist() == [1.0]


def test_spin_double_singlet():
    r = maximize_chsh_spin(seed=1)
    assert r.best_value >= SPIN_TARGET
    assert r.best_value == pytest.approx(2 * math.sqrt(2), abs=1e-9)


def test_spin_product_state():
    r = maximize_chsh_spin(seed=2, budget=400, state="product")
    assert r.best_value <= 2 + 1e-9


def test_spin_evaluation_only():
    r = maximize_chsh_spin(budget=0, start=AngleSet.reference())
    assert r.best_value == pytest.approx(SPIN_TARGET, abs=1e-15)
    assert r.evaluations == 0
    with pytest.raises(ParameterError):
        maximize_chsh_spin(budget=0)


def test_result_dict():
    d = maximize_chsh_qft(budget=20).as_dict()
    assert list(d) == ["best_params", "best_value", "starts", "evaluations", "seed"]
    assert set(d["best_params"]) == {"eta", "eta_prime", "lambda"}
