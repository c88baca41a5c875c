import numpy as np
import pytest

from src.core.errors import ChartError, InputError, UnknownModelError
from src.models.schemas import ChartSpec
from src.twistor.chart_fields import roundtrip_check, section_checks, verify_chart
from src.twistor.form_algebra import max_abs
from src.twistor.pointwise import kappa_from_family, kappa_linearity_check, metric_from_family
from src.twistor.zoo import get_model, gibbons_hawking, list_models


def test_registry():
    assert list_models() == ["eguchi-hanson", "flat", "flat-split", "gibbons-hawking", "taub-nut"]


def test_unknown_model():
    with pytest.raises(UnknownModelError) as excinfo:
        get_model("k3")
    assert isinstance(excinfo.value, InputError)
    assert "k3" in str(excinfo.value)


def test_unknown_parameter():
    with pytest.raises(InputError):
        get_model("taub-nut", {"charge": 1.0})


def test_bad_parameter_value():
    with pytest.raises(InputError):
        get_model("flat", {"r": 0})


def test_flat_r2():
    model = get_model("flat", {"r": 2})
    assert model.chart.dim == 8
    assert model.expected_signature.as_tuple() == (8, 0, 0)
    truth = model.ground_truth(model.chart.center())
    assert np.allclose(truth.metric.entries, np.eye(8))


def test_flat_split_metric():
    model = get_model("flat-split", {"r_plus": 1, "r_minus": 1})
    truth = model.ground_truth(model.chart.center())
    assert np.allclose(truth.metric.entries, np.diag([1.0] * 4 + [-1.0] * 4))
    rebuilt = metric_from_family(model.family.family_at(model.chart.center()))
    assert rebuilt.metric.distance(truth.metric) < 1e-12
    assert rebuilt.signature.as_tuple() == (4, 4, 0)


def test_taub_nut_reconstruction_matches_ground_truth(taub_nut_model):
    for x in taub_nut_model.chart.grid_points()[::17]:
        truth = taub_nut_model.ground_truth(x)
        rebuilt = metric_from_family(taub_nut_model.family.family_at(x))
        scale = np.abs(truth.metric.entries).max()
        assert rebuilt.metric.distance(truth.metric) / scale < 1e-8
        for a, b in zip(rebuilt.triple.operators(), truth.triple.operators(), strict=True):
            assert a.distance(b) < 1e-8


def test_taub_nut_metric_is_gibbons_hawking(taub_nut_model):
    x = np.array([0.5, 1.0, 1.0, 1.0])
    v = 1.0 + 0.5 / np.sqrt(3.0)
    g = taub_nut_model.ground_truth(x).metric.entries
    assert g[0, 0] == pytest.approx(1 / v)
    assert g[3, 3] == pytest.approx(v)
    assert g[0, 3] == pytest.approx(0.0)


def test_taub_nut_roundtrip(taub_nut_model):
    records = roundtrip_check(taub_nut_model)
    assert all(r.passed for r in records)


def test_taub_nut_verifies(taub_nut_model):
    report = verify_chart(taub_nut_model.family, zeta_samples=2, seed=0)
    assert report.passed, report.failed_checks()
    assert report.signature.as_tuple() == (4, 0, 0)


def test_taub_nut_sections(taub_nut_model):
    records = section_checks(taub_nut_model.family, count=100, seed=2)
    assert all(r.passed for r in records), [(r.name, r.residual) for r in records]


def test_eguchi_hanson_builds():
    model = get_model("eguchi-hanson")
    assert model.params == {"mass": 0.5, "separation": 1.0}
    x = model.chart.center()
    assert metric_from_family(model.family.family_at(x)).signature.as_tuple() == (4, 0, 0)


def test_centre_order_does_not_matter():
    centres = [[0.0, 0.0, 0.0, 0.5], [0.0, 0.0, -1.0, 0.25]]
    first = gibbons_hawking(1.0, centres)
    second = gibbons_hawking(1.0, centres[::-1])
    x = first.chart.center()
    assert np.array_equal(first.family.family_at(x).omega_3.entries, second.family.family_at(x).omega_3.entries)
    assert first.params == second.params


def test_chart_on_dirac_string():
    chart = ChartSpec(dim=4, box=[(0.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-2.0, -1.0)], grid=[3] * 4)
    with pytest.raises(ChartError):
        get_model("taub-nut", chart=chart)


def test_gibbons_hawking_needs_potential():
    with pytest.raises(InputError):
        gibbons_hawking(0.0, [])
    with pytest.raises(InputError):
        gibbons_hawking(1.0, [[0.0, 0.0, 0.0, -1.0]])


def test_taub_nut_kappa_is_complex_structure(taub_nut_model):
    for x in taub_nut_model.chart.grid_points()[::37]:
        f = taub_nut_model.family.family_at(x)
        kappa = kappa_from_family(f).entries
        assert max_abs(kappa @ kappa + np.eye(4)) < 1e-10
        assert kappa_linearity_check(f, [0.3 + 0.4j, -2.0 + 1.0j, 1j, 5.0]) < 1e-9


@pytest.mark.parametrize("name", list_models())
def test_every_model_verifies(name):
    model = get_model(name)
    report = verify_chart(model.family, zeta_samples=1, seed=0)
    assert report.passed, report.failed_checks()
    assert report.signature == model.expected_signature


@pytest.mark.parametrize("scale", [0.5, 3.0])
def test_scaled_gibbons_hawking_verifies(scale):
    model = gibbons_hawking(scale, [((0.0, 0.0, 0.0), scale * 0.5)])
    report = verify_chart(model.family, zeta_samples=1, seed=0)
    assert report.passed, report.failed_checks()
    assert report.signature.as_tuple() == (4, 0, 0)
