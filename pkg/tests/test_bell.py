import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellfield.bell import (
    BipartiteState,
    assemble,
    bell_operator,
    build_dichotomic,
    check_assembly,
    default_squeezed_cutoff,
    pairing_matrix,
    qm_reduction,
    squeezed_factor,
    squeezed_factor_oracle,
    tsirelson_check,
)
from bellfield.correlator import TSIRELSON, chsh_correlator
from bellfield.errors import NumericalError, ParameterError, TsirelsonViolation
from bellfield.fock import FockConfig, OperatorMatrix, operator_norm
from bellfield.modular import ModularParams


def test_state_validation():
    with pytest.raises(ParameterError, match="even"):
        BipartiteState([1.0])
    with pytest.raises(ParameterError, match="normalized"):
        BipartiteState([1.0, 1.0])
    with pytest.raises(ParameterError, match="nonzero"):
        BipartiteState([1.0, 0.0])


def test_pairing_is_an_involution():
    x = pairing_matrix(6).toarray()
    np.testing.assert_array_equal(x @ x, np.eye(6))
    assert x[1, 0] == 1 and x[2, 1] == 0


@pytest.mark.parametrize("coeffs, r", [([1 / math.sqrt(2)] * 2, 1.0), ([1.0, 0.0], 0.0), ([0.6, -0.8], -0.96)])
def test_qm_reduction(coeffs, r):
    assert qm_reduction(coeffs) == pytest.approx(r)


def test_squeezed_reduction():
    assert qm_reduction(BipartiteState.squeezed(0.5)) == pytest.approx(0.8, abs=1e-12)


@pytest.mark.parametrize("delta, expected", [(0.0, 0.0), (1.0, 1.0), (0.5, 0.8), (0.9, 0.9944751)])
def test_squeezed_factor(delta, expected):
    assert squeezed_factor(delta) == pytest.approx(expected, abs=5e-8)


@pytest.mark.parametrize("delta", [-0.1, 1.1])
def test_squeezed_factor_range(delta):
    with pytest.raises(ParameterError):
        squeezed_factor(delta)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 0.95))
def test_squeezed_oracle_matches_closed_form(delta):
    assert squeezed_factor_oracle(delta) == pytest.approx(squeezed_factor(delta), abs=1e-8)


def test_squeezed_cutoff_completes_pairs():
    st_ = BipartiteState.squeezed(0.9)
    assert st_.n % 2 == 0
    assert 0.9 ** (2 * default_squeezed_cutoff(0.9)) < 1e-12


@pytest.mark.parametrize("n", [1, 3])
def test_odd_dimension_rejected(ref_params, n):
    with pytest.raises(ParameterError):
        build_dichotomic("A", ref_params, n, FockConfig(3))


@pytest.mark.parametrize("n", [2, 4])
@pytest.mark.parametrize("p", [ModularParams(0.01, 0.564058, 0.495456), ModularParams(1.2, 0.3, 0.8)])
def test_assembly_properties(p, n):
    res = check_assembly(assemble(p, BipartiteState.maximally_entangled(n), FockConfig(6)))
    assert max(res.values()) < 1e-10


def test_assembly_at_reference_point(ref_params):
    asm = assemble(ref_params, BipartiteState.maximally_entangled(2), FockConfig(16))
    assert asm.expectation() == pytest.approx(2.14931, abs=1e-5)
    assert tsirelson_check(asm.c) <= TSIRELSON + 1e-9
    assert operator_norm(asm.a) == pytest.approx(1, abs=1e-10)


def test_zero_functions_give_two():
    asm = assemble(ModularParams(0, 0, 0.4), BipartiteState.maximally_entangled(2), FockConfig(4))
    assert asm.expectation() == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_generic_state_scales_by_reduction(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    state = BipartiteState(c / np.linalg.norm(c))
    p = ModularParams(0.4, 0.9, 0.6)
    asm = assemble(p, state, FockConfig(14))
    assert asm.expectation() == pytest.approx(qm_reduction(state) * chsh_correlator(p).value, abs=1e-6)


def test_squeezed_state_assembly():
    state = BipartiteState.squeezed(0.3, m_max=4)
    p = ModularParams(0.2, 0.5, 0.5)
    asm = assemble(p, state, FockConfig(10))
    assert asm.expectation() == pytest.approx(qm_reduction(state) * chsh_correlator(p).value, abs=1e-6)


def test_degenerate_operators():
    p = ModularParams(0.3, 0.3, 0.5)
    cfg = FockConfig(5)
    a = build_dichotomic("A", p, 2, cfg)
    b = build_dichotomic("B", p, 2, cfg)
    c = bell_operator(a, a, b, b)
    np.testing.assert_allclose(c.dense(), 2 * (a.data @ b.data), atol=1e-12)
    assert operator_norm(c) <= 2 + 1e-12


def test_bell_operator_dimension_mismatch(ref_params):
    a = build_dichotomic("A", ref_params, 2, FockConfig(3))
    b = build_dichotomic("B", ref_params, 2, FockConfig(4))
    with pytest.raises(ParameterError):
        bell_operator(a, a, b, b)


def test_tsirelson_check_raises():
    big = OperatorMatrix(np.diag([3.0, 0.0]), hermitian=True)
    with pytest.raises(TsirelsonViolation):
        tsirelson_check(big)
    assert issubclass(TsirelsonViolation, NumericalError)


def test_check_assembly_raises_on_bad_operator(ref_params):
    asm = assemble(ref_params, BipartiteState.maximally_entangled(2), FockConfig(3))
    broken = type(asm)(asm.a, asm.ap, asm.a, asm.bp, asm.c, asm.state)
    with pytest.raises(NumericalError, match="commut|\\[A"):
        check_assembly(broken)
