import numpy as np
import pytest

from src.core.errors import ChartError, InputError
from src.models.schemas import ChartSpec, EntryTerm, FormSpec, MonomialSpec
from src.twistor.fields import (
    BuiltinField,
    CombinedField,
    ConstantField,
    FamilyField,
    GridField,
    Polynomial,
    PolynomialField,
)
from src.twistor.zoo import FLAT_FORMS

BOX = ChartSpec(dim=4, box=[(-1.0, 1.0)] * 4, grid=[3] * 4)


def _mono(coefficient, *exponents):
    return MonomialSpec(coefficient=coefficient, exponents=list(exponents))


def test_polynomial_merges_and_differentiates():
    p = Polynomial(2, [((2, 1), 3.0), ((2, 1), 1.0), ((0, 0), 5.0)])
    assert len(p.terms()) == 2
    assert p(np.array([2.0, 3.0])) == pytest.approx(4 * 4 * 3 + 5)
    dp = p.derivative(0)
    assert dp(np.array([2.0, 3.0])) == pytest.approx(8 * 2 * 3)
    assert p.derivative(1).derivative(1).is_zero


def test_polynomial_evaluate_many_matches_pointwise():
    p = Polynomial(3, [((1, 0, 2), 2.0 + 1j), ((0, 1, 0), -1.0)])
    points = np.array([[0.5, 1.0, -2.0], [1.0, 0.0, 3.0]])
    assert np.allclose(p.evaluate_many(points), [p(x) for x in points])


def test_polynomial_rejects_wrong_arity():
    with pytest.raises(InputError):
        Polynomial(2, [((1,), 1.0)])


def test_polynomial_field_is_antisymmetric():
    spec = FormSpec(
        terms=[EntryTerm(i=0, j=1, re=[_mono(2.0, 1, 0, 0, 0)], im=[_mono(1.0, 0, 0, 0, 0)])]
    )
    field = PolynomialField.from_spec(4, spec)
    x = np.array([0.5, 0.0, 0.0, 0.0])
    value = field.evaluate(x)
    assert value[0, 1] == pytest.approx(1.0 + 1j)
    assert value[1, 0] == pytest.approx(-1.0 - 1j)
    partials = field.partials(x)
    assert partials[0, 0, 1] == pytest.approx(2.0)
    assert partials[0, 1, 0] == pytest.approx(-2.0)
    assert field.kind == "polynomial"


def test_rational_field_quotient_rule():
    spec = FormSpec(terms=[EntryTerm(i=2, j=3, re=[_mono(1.0, 0, 1, 0, 0)], den=[_mono(1.0, 0, 0, 0, 0), _mono(1.0, 2, 0, 0, 0)])])
    field = PolynomialField.from_spec(4, spec)
    x = np.array([0.5, 2.0, 0.0, 0.0])
    # x1 / (1 + x0^2)
    assert field.evaluate(x)[2, 3] == pytest.approx(2.0 / 1.25)
    assert field.partials(x)[0, 2, 3] == pytest.approx(-2.0 * 2 * 0.5 / 1.25**2)
    assert field.partials(x)[1, 2, 3] == pytest.approx(1 / 1.25)
    assert field.kind == "rational"
    field.check_poles(BOX)


def test_rational_field_with_pole_in_box():
    spec = FormSpec(terms=[EntryTerm(i=0, j=1, re=[_mono(1.0, 0, 0, 0, 0)], den=[_mono(1.0, 1, 0, 0, 0)])])
    field = PolynomialField.from_spec(4, spec)
    with pytest.raises(ChartError) as excinfo:
        field.check_poles(BOX)
    assert excinfo.value.location is not None
    with pytest.raises(ChartError):
        FamilyField(field, ConstantField(FLAT_FORMS[2]), BOX)


def test_constant_field_from_polynomial_constant():
    field = PolynomialField.from_constant(FLAT_FORMS[1])
    assert np.allclose(field.evaluate(np.zeros(4)), FLAT_FORMS[1])
    assert np.allclose(field.partials(np.zeros(4)), 0)


def test_builtin_field_shape_is_checked():
    field = BuiltinField(4, lambda x: np.zeros((2, 2)), "broken")
    with pytest.raises(InputError):
        field.evaluate(np.zeros(4))
    with pytest.raises(InputError):
        field.partials(np.zeros(4))


def test_grid_field_reproduces_linear_field():
    spec = FormSpec(terms=[EntryTerm(i=0, j=1, re=[_mono(1.0, 1, 0, 0, 0), _mono(2.0, 0, 0, 0, 1)])])
    source = PolynomialField.from_spec(4, spec)
    grid = GridField.sample(source, BOX)
    x = np.array([0.3, -0.2, 0.1, 0.7])
    assert np.allclose(grid.evaluate(x), source.evaluate(x), atol=1e-12)
    with pytest.raises(ChartError):
        grid.evaluate(np.array([2.0, 0.0, 0.0, 0.0]))


def test_combined_field_parts():
    w1, w2 = ConstantField(FLAT_FORMS[0]), ConstantField(FLAT_FORMS[1])
    plus = CombinedField([(1.0, w1), (1j, w2)])
    x = np.zeros(4)
    assert np.allclose(CombinedField([(1.0, plus)], part="real").evaluate(x), FLAT_FORMS[0])
    assert np.allclose(CombinedField([(1.0, plus)], part="imag").evaluate(x), FLAT_FORMS[1])
    assert plus.symbolic


def test_family_field_components(flat):
    family = flat.family
    components = family.components()
    x = family.chart.center()
    for a, label in enumerate(("omega_1", "omega_2", "omega_3")):
        assert np.allclose(components[label].evaluate(x), FLAT_FORMS[a])
    f = family.family_at(x)
    assert np.allclose(f.omega_plus.entries, FLAT_FORMS[0] + 1j * FLAT_FORMS[1])


def test_family_field_dimension_mismatch():
    with pytest.raises(InputError):
        FamilyField(ConstantField(np.zeros((8, 8))), ConstantField(FLAT_FORMS[2]), BOX)
