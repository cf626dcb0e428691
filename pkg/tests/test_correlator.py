import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellfield.correlator import (
    TSIRELSON,
    causality_residual,
    chsh_closed_form,
    chsh_corrected,
    chsh_correlator,
    is_violation,
    weyl_pair_expectation,
    weyl_vacuum_expectation,
)
from bellfield.errors import ParameterError
from bellfield.modular import ModularParams, build_gram, two_mode_coefficients

params = st.builds(ModularParams, st.floats(0, 5), st.floats(0, 5), st.floats(0.001, 0.999))


@pytest.mark.parametrize("x, expected", [(0.0, 1.0), (2.0, 0.3678794), (1.25, 0.5352614)])
def test_weyl_vacuum_expectation(x, expected):
    assert weyl_vacuum_expectation(x) == pytest.approx(expected, abs=5e-8)


def test_weyl_vacuum_expectation_rejects_negative():
    with pytest.raises(ParameterError):
        weyl_vacuum_expectation(-0.1)


def test_pair_expectation_first_term(ref_params):
    p = ref_params
    z = weyl_pair_expectation(build_gram(p), "f", 1, "jf")
    assert z.imag == pytest.approx(0, abs=1e-15)
    assert z.real == pytest.approx(math.exp(-p.eta**2 * (1 + p.lam) ** 2), abs=1e-15)
    assert z.real == pytest.approx(0.9997764, abs=5e-8)


@given(params)
def test_pair_with_itself_is_real(p):
    assert weyl_pair_expectation(build_gram(p), "f", 1, "f").imag == 0


def test_pair_expectation_phase_at_unit_scales():
    # Delta(f, f') = 1.5 here, so the Weyl phase is exp(-0.75 i)
    p = ModularParams(1, 1, 0.5)
    c = two_mode_coefficients(p)
    norm_sq = float(np.linalg.norm(c.f + c.fp) ** 2)
    expected = np.exp(-0.75j) * math.exp(-norm_sq / 2)
    assert weyl_pair_expectation(build_gram(p), "f", 1, "f'") == pytest.approx(expected, abs=1e-14)


def test_pair_expectation_rejects_bad_sign():
    with pytest.raises(ParameterError):
        weyl_pair_expectation(build_gram(ModularParams(1, 1, 0.5)), "f", 2, "jf")


def test_reference_value(ref_params):
    rep = chsh_correlator(ref_params)
    assert rep.value == pytest.approx(2.14931, abs=5e-6)
    assert rep.violation
    assert rep.as_dict()["params"]["lambda"] == ref_params.lam


@pytest.mark.parametrize("lam", [0.01, 0.3, 0.9])
def test_zero_functions_give_two(lam):
    rep = chsh_correlator(ModularParams(0, 0, lam))
    assert rep.value == 2.0
    assert not rep.violation


@pytest.mark.parametrize("t, lam", [(0.3, 0.2), (1.0, 0.7), (2.5, 0.5)])
def test_symmetric_scales_cancel(t, lam):
    assert chsh_correlator(ModularParams(t, t, lam)).value == pytest.approx(2 * math.exp(-(t**2) * (1 + lam**2)), rel=1e-13)


@settings(max_examples=300)
@given(params)
def test_report_matches_three_exponentials(p):
    rep = chsh_correlator(p)
    assert rep.value == pytest.approx(chsh_closed_form(p), abs=1e-13)
    a, cross, b = rep.term_breakdown
    assert rep.value == pytest.approx(a + 2 * cross - b, abs=1e-13)
    assert abs(rep.value) <= TSIRELSON


def test_supremum_on_the_boundary():
    # lambda -> 1, eta -> 0: 1 + 2 exp(-x) - exp(-4 x) peaks at x = ln 2 / 3
    x = math.log(2) / 3
    v = chsh_closed_form(ModularParams(0, math.sqrt(x), 0.999999))
    assert v == pytest.approx(1 + 2 ** (2 / 3) - 2 ** (-4 / 3), abs=1e-5)
    assert v == pytest.approx(2.1905, abs=1e-4)


@pytest.mark.parametrize("lam", [1e-3, 1e-2])
def test_small_lambda_slice_stays_near_two(lam):
    eta = np.linspace(0, 3, 301)
    best = max(chsh_closed_form(ModularParams(0.0, float(e), lam)) for e in eta)
    assert 2.0 <= best <= 2.0 + 10 * lam**2


def test_corrected_examples(ref_params):
    c0 = chsh_correlator(ref_params).value
    assert chsh_corrected(ref_params, 0.0) == c0
    assert chsh_corrected(ref_params, 1.0) == 0.0
    # 2.0418445 is 0.95 times the rounded 2.14931
    assert chsh_corrected(ref_params, 0.05) == pytest.approx(2.0418445, abs=0.95 * 5e-6)


@pytest.mark.parametrize("d", [-0.01, 1.01])
def test_corrected_rejects_out_of_range(ref_params, d):
    with pytest.raises(ParameterError):
        chsh_corrected(ref_params, d)


@pytest.mark.parametrize("v, expected", [(2.0, False), (2.0000001, True), (-2.5, True), (TSIRELSON, True), (3.0, False)])
def test_is_violation(v, expected):
    assert is_violation(v) is expected


@given(params)
def test_causality_residual_vanishes(p):
    assert causality_residual(p) < 1e-14


def test_classical_limit_lattice():
    # at tiny lambda the sup over scales is 2, reached at eta = eta' = 0
    grid = np.linspace(0, 3, 61)
    vals = np.array([[chsh_closed_form(ModularParams(a, b, 1e-6)) for b in grid] for a in grid])
    assert vals.max() == pytest.approx(2.0, abs=1e-9)
    assert np.unravel_index(vals.argmax(), vals.shape) == (0, 0)
