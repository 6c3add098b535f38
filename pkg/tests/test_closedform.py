import math

import pytest
from numpy.testing import assert_allclose

from closedform import (closed_form_b_derivative, eval_convergent, eval_convergent_cos_family,
                        eval_convergent_sin_family, purported_value, spec_for_equation)
from common import ClosedFormValue, DomainError, IntegrandSpec, UsageError
from fresnel import fresnel_cs

GRID = [0.5, 1.0, 2.0]
K1 = math.sqrt(math.pi / 2.0)


def test_cos_family_at_zero_b():
    value = eval_convergent_cos_family(1.0, 0.0, "sin")
    assert value.value == pytest.approx(0.5 * K1, rel=1e-15)
    assert (value.status, value.source_eq) == ("valid", "E5")


def test_cos_family_cos_case():
    value = eval_convergent_cos_family(1.0, 2.0, "cos").value
    assert_allclose(value, 0.5 * K1 * (math.cos(1.0) + math.sin(1.0)), rtol=1e-15)


def test_cos_family_maple_case():
    phi = 2.2 ** 2 / (4 * 3.1)
    expected = 0.5 * math.sqrt(math.pi / 6.2) * (math.cos(phi) - math.sin(phi))
    value = eval_convergent_cos_family(3.1, 2.2, "sin").value
    assert_allclose(value, expected, rtol=1e-15)
    assert value > 0.1


def test_sin_family_at_zero_b():
    assert eval_convergent_sin_family(1.0, 0.0, "sin").value == 0.0
    assert eval_convergent_sin_family(1.0, 0.0, "cos").value == 0.0


def test_sin_family_sin_case():
    fr = fresnel_cs(1.0)
    expected = K1 * (math.cos(1.0) * fr.c + math.sin(1.0) * fr.s)
    value = eval_convergent_sin_family(1.0, 2.0, "sin")
    assert_allclose(value.value, expected, rtol=1e-15)
    assert value.source_eq == "E6"


def test_sin_family_cos_case():
    phi = 1.0 / 8.0
    fr = fresnel_cs(phi)
    expected = math.sqrt(math.pi / 4.0) * (math.sin(phi) * fr.c - math.cos(phi) * fr.s)
    assert_allclose(eval_convergent_sin_family(2.0, 1.0, "cos").value, expected, rtol=1e-14)


@pytest.mark.parametrize("func", [eval_convergent_cos_family, eval_convergent_sin_family])
def test_nonpositive_a_is_a_domain_error(func):
    with pytest.raises(DomainError):
        func(0.0, 1.0, "sin")
    with pytest.raises(DomainError):
        func(-1.0, 1.0, "cos")


def test_purported_e1_upper_row():
    value = purported_value(IntegrandSpec("x", "sin", "sin", 1.0, 2.0))
    assert_allclose(value.value, 0.5 * K1 * (math.sin(1.0) + math.cos(1.0)), rtol=1e-15)
    assert (value.status, value.source_eq) == ("purported_erroneous", "E1")
    assert value.is_purported


def test_purported_e1_lower_row():
    value = purported_value(IntegrandSpec("x", "cos", "sin", 1.0, 2.0)).value
    assert_allclose(value, 0.5 * K1 * (math.sin(1.0) - math.cos(1.0)), rtol=1e-14)


def test_purported_e2_upper_row():
    fr = fresnel_cs(1.0)
    value = purported_value(IntegrandSpec("x", "sin", "cos", 1.0, 2.0))
    expected = 0.5 - K1 * (math.sin(1.0) * fr.c - math.cos(1.0) * fr.s)
    assert_allclose(value.value, expected, rtol=1e-14)
    assert value.source_eq == "E2"


def test_purported_e2_lower_row_has_no_constant():
    fr = fresnel_cs(1.0)
    value = purported_value(IntegrandSpec("x", "cos", "cos", 1.0, 2.0)).value
    assert_allclose(value, K1 * (math.cos(1.0) * fr.c + math.sin(1.0) * fr.s), rtol=1e-14)


def test_purported_value_rejects_weight_one_and_zero_b():
    with pytest.raises(UsageError):
        purported_value(IntegrandSpec("one", "sin", "cos", 1.0, 1.0))
    with pytest.raises(DomainError):
        purported_value(IntegrandSpec("x", "sin", "sin", 1.0, 0.0))


@pytest.mark.parametrize("a", GRID)
@pytest.mark.parametrize("b", GRID)
@pytest.mark.parametrize("source_eq", ["E5", "E6"])
@pytest.mark.parametrize("quad", ["sin", "cos"])
def test_analytic_derivative_matches_finite_differences(a, b, source_eq, quad):
    func = eval_convergent_cos_family if source_eq == "E5" else eval_convergent_sin_family
    h = 1e-5
    numeric = (func(a, b + h, quad).value - func(a, b - h, quad).value) / (2 * h)
    assert_allclose(closed_form_b_derivative(a, b, source_eq, quad), numeric, atol=1e-6)


@pytest.mark.parametrize("a", GRID)
@pytest.mark.parametrize("b", GRID)
@pytest.mark.parametrize("quad", ["sin", "cos"])
def test_table_values_are_formal_b_derivatives(a, b, quad):
    e1 = purported_value(IntegrandSpec("x", quad, "sin", a, b)).value
    e2 = purported_value(IntegrandSpec("x", quad, "cos", a, b)).value
    assert_allclose(e1, -closed_form_b_derivative(a, b, "E5", quad), atol=1e-10)
    assert_allclose(e2, closed_form_b_derivative(a, b, "E6", quad), atol=1e-10)


def test_cos_case_derivative_vanishes_at_small_b():
    assert abs(closed_form_b_derivative(1.0, 1e-8, "E5", "cos")) < 1e-8


def test_derivative_rejects_nonpositive_b():
    with pytest.raises(DomainError):
        closed_form_b_derivative(1.0, 0.0, "E5", "sin")
    with pytest.raises(UsageError):
        closed_form_b_derivative(1.0, 1.0, "E1", "sin")


def test_status_is_tied_to_equation():
    with pytest.raises(UsageError):
        ClosedFormValue(1.0, "valid", "E1")
    with pytest.raises(UsageError):
        ClosedFormValue(1.0, "purported_erroneous", "E5")


def test_spec_for_equation_picks_the_integrand():
    spec = spec_for_equation("E2", "sin", 1.0, 2.0)
    assert (spec.weight, spec.quad_trig, spec.lin_trig) == ("x", "sin", "cos")
    with pytest.raises(UsageError):
        spec_for_equation("E5", "sin", 1.0, 2.0, lin_trig="sin")


def test_eval_convergent_refuses_weight_x():
    with pytest.raises(UsageError):
        eval_convergent(IntegrandSpec("x", "sin", "sin", 1.0, 1.0))


def test_spec_id_round_trip_and_validation():
    spec = IntegrandSpec("one", "sin", "cos", 3.1, 2.2)
    assert spec.spec_id == "one-sin-cos-a3.1-b2.2"
    assert IntegrandSpec.parse_spec_id(spec.spec_id) == spec
    with pytest.raises(DomainError):
        IntegrandSpec("one", "sin", "cos", 0.0, 1.0)
    with pytest.raises(DomainError):
        IntegrandSpec("one", "sin", "cos", 1.0, -1.0)
    with pytest.raises(UsageError):
        IntegrandSpec("y", "sin", "cos", 1.0, 1.0)
