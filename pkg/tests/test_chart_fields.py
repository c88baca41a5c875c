import numpy as np
import pytest

from src.core.configs import SamplingSettings
from src.core.errors import ChartError, InputError, ReconstructionError
from src.models.schemas import ChartSpec, EntryTerm, FormSpec, MonomialSpec
from src.twistor.chart_fields import (
    eval_field,
    exterior_derivative,
    nijenhuis_check,
    nijenhuis_tensor,
    reconstruct_metric_field,
    roundtrip_check,
    section_checks,
    verify_chart,
    zeta_grid,
    zeta_sweep,
)
from src.twistor.fields import BuiltinField, ConstantField, FamilyField, PolynomialField
from src.twistor.zoo import FLAT_FORMS, flat_split

BOX = ChartSpec(dim=4, box=[(-1.0, 1.0)] * 4, grid=[3] * 4)
# keeps 1 + x0 away from zero
POSITIVE_BOX = ChartSpec(dim=4, box=[(0.0, 1.0)] * 4, grid=[3] * 4)
J0 = -FLAT_FORMS[0]
SHEAR = np.zeros((4, 4))
SHEAR[2, 0] = 1.0


def _mono(coefficient, *exponents):
    return MonomialSpec(coefficient=coefficient, exponents=list(exponents))


def _corrupted_omega_1() -> PolynomialField:
    """omega_1 + x0 e23, whose exterior derivative is dx0 ^ dx2 ^ dx3."""
    spec = FormSpec(
        terms=[
            EntryTerm(i=0, j=1, re=[_mono(1.0, 0, 0, 0, 0)]),
            EntryTerm(i=2, j=3, re=[_mono(1.0, 0, 0, 0, 0), _mono(1.0, 1, 0, 0, 0)]),
        ]
    )
    return PolynomialField.from_spec(4, spec)


def _sheared_j(x, zeta=None):
    """(1 + x2 A) J0 (1 - x2 A): a complex structure at every point, not integrable."""
    a = x[2] * SHEAR
    return (np.eye(4) + a) @ J0 @ (np.eye(4) - a)


# --- Evaluation and dF ---
def test_eval_field_outside_box():
    with pytest.raises(ChartError):
        eval_field(ConstantField(FLAT_FORMS[0]), [2.0, 0.0, 0.0, 0.0], chart=BOX)
    with pytest.raises(InputError):
        eval_field(ConstantField(FLAT_FORMS[0]), [0.0, 0.0])


def test_constant_form_is_closed():
    d = exterior_derivative(ConstantField(FLAT_FORMS[0]), np.zeros(4))
    assert d.shape == (4, 4, 4)
    assert np.all(d == 0)


def test_exterior_derivative_of_corrupted_form():
    d = exterior_derivative(_corrupted_omega_1(), np.zeros(4))
    assert d[0, 2, 3] == pytest.approx(1.0)
    assert d[2, 0, 3] == pytest.approx(-1.0)
    assert d[3, 2, 0] == pytest.approx(-1.0)


def test_numeric_derivative_converges_quadratically():
    def cubic(x):
        out = np.zeros((4, 4))
        out[1, 2], out[2, 1] = x[0] ** 3, -x[0] ** 3
        return out

    field = BuiltinField(4, cubic, "cubic")
    x = np.array([0.5, 0.0, 0.0, 0.0])
    errors = [
        abs(exterior_derivative(field, x, h=h, order=2)[0, 1, 2] - 3 * 0.5**2) for h in (0.1, 0.05)
    ]
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=1e-3)


def test_numeric_derivative_needs_room_inside_chart():
    field = BuiltinField(4, lambda x: FLAT_FORMS[0], "flat")
    with pytest.raises(ChartError):
        exterior_derivative(field, np.array([1.0, 0.0, 0.0, 0.0]), h=1e-3, chart=BOX)


def test_closedness_detects_corruption():
    family = FamilyField.from_triple(
        _corrupted_omega_1(), ConstantField(FLAT_FORMS[1]), ConstantField(FLAT_FORMS[2]), POSITIVE_BOX
    )
    report = verify_chart(family, zeta_samples=1)
    records = {check.name: check for check in report.checks}
    broken = records["closedness[omega_1]"]
    assert not broken.passed
    assert broken.residual == pytest.approx(1.0)
    assert records["closedness[omega_2]"].passed
    assert not report.passed


# --- Nijenhuis ---
def test_nijenhuis_of_sheared_structure():
    x = np.zeros(4)
    assert np.allclose(_sheared_j(x) @ _sheared_j(x), -np.eye(4))
    tensor = nijenhuis_tensor(_sheared_j, x, 1e-4)
    assert abs(tensor[3, 3, 0]) == pytest.approx(1.0, abs=1e-8)


def test_nijenhuis_check_fails_for_sheared_structure():
    record = nijenhuis_check(_sheared_j, chart=BOX, zetas=[0j])
    assert not record.passed
    assert record.residual > 0.5


def test_nijenhuis_check_passes_for_flat(flat):
    record = nijenhuis_check(flat.family)
    assert record.passed
    assert record.residual < 1e-8


def test_nijenhuis_sweep_covers_every_interior_point():
    assert SamplingSettings().nijenhuis_points is None
    visited = set()

    def constant_j(x, zeta=None):
        visited.add(tuple(float(v) for v in x))
        return J0

    chart = ChartSpec(dim=4, box=[(-1.0, 1.0)] * 4, grid=[5] * 4)
    assert nijenhuis_check(constant_j, chart=chart, zetas=[0j]).passed
    centres = {p for p in visited if all(v in (-0.5, 0.0, 0.5) for v in p)}
    assert len(centres) == 3**4


def test_callable_structure_needs_chart():
    with pytest.raises(InputError):
        nijenhuis_check(_sheared_j)


# --- Sweeps ---
def test_verify_flat(flat):
    report = verify_chart(flat.family, seed=0)
    assert report.passed, report.failed_checks()
    assert report.signature.as_tuple() == (4, 0, 0)
    names = [check.name for check in report.checks]
    assert "closedness[omega_3]" in names
    assert "nijenhuis" in names
    assert all(check.anchor for check in report.checks)


def test_verify_is_deterministic(flat):
    first = verify_chart(flat.family, seed=3, zeta_samples=2)
    second = verify_chart(flat.family, seed=3, zeta_samples=2)
    assert first.model_dump() == second.model_dump()


def test_verify_split_signature():
    model = flat_split(1, 1)
    report = verify_chart(model.family, zeta_samples=2)
    assert report.passed, report.failed_checks()
    assert report.signature.as_tuple() == (4, 4, 0)


def test_reconstruct_flat_metric(flat):
    grid = reconstruct_metric_field(flat.family)
    assert len(grid.samples) == 3**4
    assert grid.signature.as_tuple() == (4, 0, 0)
    for sample in grid.samples:
        assert np.allclose(sample.metric, np.eye(4), atol=1e-12)


def test_reconstruct_failure_is_not_an_input_error():
    family = FamilyField.from_triple(
        ConstantField(FLAT_FORMS[0]),
        ConstantField(FLAT_FORMS[1]),
        ConstantField(2.0 * FLAT_FORMS[2]),
        BOX,
    )
    with pytest.raises(ReconstructionError) as excinfo:
        reconstruct_metric_field(family)
    assert not isinstance(excinfo.value, InputError)
    assert excinfo.value.location == (-1.0, -1.0, -1.0, -1.0)


def test_roundtrip_flat(flat):
    metric, operators = roundtrip_check(flat)
    assert metric.passed and operators.passed
    assert metric.residual <= 1e-12
    assert operators.residual <= 1e-12


def test_zeta_grid_avoids_poles():
    zetas = zeta_grid(4)
    assert len(zetas) == 16
    assert all(z != 0 for z in zetas)
    with pytest.raises(InputError):
        zeta_grid(0)


def test_zeta_sweep_rows(flat):
    rows = zeta_sweep(flat.family, None, 3)
    assert len(rows) == 4 * 9
    kernel_dims = [value for _, check, value in rows if check == "kernel_dimension"]
    assert kernel_dims == [2.0] * 9
    thetas = [value for _, check, value in rows if check == "theta"]
    assert all(0 <= theta < np.pi for theta in thetas)


def test_zeta_sweep_point_outside_chart(flat):
    with pytest.raises(ChartError):
        zeta_sweep(flat.family, [5.0, 0.0, 0.0, 0.0], 2)


def test_section_checks_flat(flat):
    records = section_checks(flat.family, count=100, seed=1)
    assert [r.name for r in records] == [
        "real_section_type",
        "real_section_reality",
        "o2_polynomial",
        "o2_pairing_identity",
        "hklr_agreement",
    ]
    assert all(r.passed for r in records), [(r.name, r.residual) for r in records]


def test_section_checks_empty():
    assert section_checks(flat_split(1, 0).family, count=0) == []


def test_section_checks_corrupted_omega_3():
    family = FamilyField.from_triple(
        ConstantField(FLAT_FORMS[0]),
        ConstantField(FLAT_FORMS[1]),
        ConstantField(2.0 * FLAT_FORMS[2]),
        BOX,
    )
    records = {r.name: r for r in section_checks(family, count=5)}
    assert not records["hklr_agreement"].passed
