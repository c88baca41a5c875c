import cmath

import numpy as np
import pytest

from src.core.errors import (
    DirectSumError,
    InconsistentFamilyError,
    InconsistentStructureError,
    InputError,
    TwistorError,
)
from src.twistor.form_algebra import LinOp, TwoForm
from src.twistor.pointwise import (
    HoloSympFamily,
    QuaternionicTriple,
    SymplecticTriple,
    antipodal_j_residual,
    complex_structure_from_holsymp,
    conjugation_identity_residual,
    extract_family,
    frame_map_check,
    hklr_metric,
    holomorphic_metric_residual,
    holomorphic_projectors,
    holosymp_check,
    inverse_stereographic,
    j2_cross_check,
    j_of_zeta,
    kappa_from_family,
    kappa_linearity_check,
    kernel_graph_check,
    metric_from_family,
    o2_polynomial_check,
    omega3_type_check,
    real_section,
    real_section_from_value,
    realsymp_check,
    rotate_zeta,
    rotation_frame,
    sample_zetas,
    stereographic,
    su2_rotation,
    triple_from_family,
    varpi,
    varpi_conjugate_pullback_check,
    varpi_nondegeneracy,
    varpi_pullback_check,
    varpi_reality_residual,
)
from src.twistor.zoo import FLAT_FORMS

ZETAS = [0.3 + 0.4j, -2.0 + 1.0j, 1.0, 1j, 5.0 - 0.1j]
SECTION_NODES = [1, 2, 1j, 1 + 1j, 3, -1, 2j, 0.5 - 0.5j]


def _type_10(t, rng, count):
    p10, _ = holomorphic_projectors(t.j3)
    n = t.dim
    return [p10 @ (rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(count)]


# --- Sphere ---
def test_stereographic_anchors():
    assert np.allclose(stereographic(0), [0, 0, 1])
    assert np.allclose(stereographic(1j), [1, 0, 0])
    assert np.allclose(stereographic(-1), [0, 1, 0])
    assert np.allclose(stereographic(None), [0, 0, -1])


@pytest.mark.parametrize("zeta", ZETAS)
def test_inverse_stereographic_recovers_zeta(zeta):
    assert inverse_stereographic(stereographic(zeta)).z == pytest.approx(zeta, abs=1e-12)


def test_south_pole_is_infinity():
    assert inverse_stereographic([0.0, 0.0, -1.0]).is_infinite


def test_rotation_fixes_identity():
    assert rotate_zeta(1, 0, 0.5 + 0.5j).z == pytest.approx(0.5 + 0.5j)
    assert np.allclose(su2_rotation(1, 0), np.eye(3))


def test_su2_rotation_is_special_orthogonal():
    u, v = cmath.exp(0.3j) * np.cos(0.7), cmath.exp(-1.1j) * np.sin(0.7)
    rotation = su2_rotation(u, v)
    assert np.allclose(rotation @ rotation.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(rotation) == pytest.approx(1.0)


def test_rotation_ignores_overall_sign():
    u, v = cmath.exp(0.3j) * np.cos(0.7), cmath.exp(-1.1j) * np.sin(0.7)
    for zeta in ZETAS:
        assert rotate_zeta(-u, -v, zeta).z == pytest.approx(rotate_zeta(u, v, zeta).z, abs=1e-12)


@pytest.mark.parametrize("zeta", [*ZETAS, 0, None])
def test_rotate_zeta_matches_su2_rotation(zeta):
    u, v = cmath.exp(0.3j) * np.cos(0.7), cmath.exp(-1.1j) * np.sin(0.7)
    rotated = stereographic(rotate_zeta(u, v, zeta))
    assert np.allclose(rotated, su2_rotation(u, v) @ stereographic(zeta), atol=1e-12)


def test_rotation_rejects_non_unit_pair():
    with pytest.raises(InputError):
        rotate_zeta(1, 1, 0)


def test_sample_zetas_is_seeded():
    first = sample_zetas(np.random.default_rng(7), 10)
    second = sample_zetas(np.random.default_rng(7), 10)
    assert first == second
    assert all(1e-2 <= abs(z) <= 1e2 for z in first)


# --- Holomorphic Symplectic Forms ---
def test_holosymp_check(flat_family):
    assert holosymp_check(flat_family.omega_plus).passed
    real = holosymp_check(TwoForm(entries=FLAT_FORMS[0]))
    assert not real.passed
    assert real.kernel_dim == 0


def test_complex_structure_of_real_form_fails():
    with pytest.raises(DirectSumError):
        complex_structure_from_holsymp(TwoForm(entries=FLAT_FORMS[0]))


def test_j3_from_omega_plus(flat_family):
    j3 = complex_structure_from_holsymp(flat_family.omega_plus)
    assert np.allclose(j3.entries, -FLAT_FORMS[2], atol=1e-12)


@pytest.mark.parametrize("scale", [2.0, 1j, 1 + 1j])
def test_complex_structure_ignores_scale(flat_family, scale):
    j3 = complex_structure_from_holsymp(flat_family.omega_plus)
    scaled = complex_structure_from_holsymp(scale * flat_family.omega_plus)
    assert scaled.distance(j3) < 1e-12


def test_realsymp_relations(flat_family, flat_structure):
    report = realsymp_check(flat_family.omega_plus, flat_structure.triple.j3)
    assert report.left_residual < 1e-12
    assert report.right_residual < 1e-12
    assert report.smallest_singular_value_1 == pytest.approx(1.0)


# --- Flat Reconstruction ---
def test_flat_triple(flat_family):
    t = triple_from_family(flat_family)
    for op, form in zip(t.operators(), FLAT_FORMS, strict=True):
        assert np.allclose(op.entries, -form, atol=1e-12)


def test_flat_metric_is_identity(flat_structure):
    assert np.allclose(flat_structure.metric.entries, np.eye(4), atol=1e-12)
    assert flat_structure.signature.as_tuple() == (4, 0, 0)
    assert max(flat_structure.residuals.values()) < 1e-12


def test_kappa_is_j1(flat_family, flat_structure):
    assert kappa_from_family(flat_family).distance(flat_structure.triple.j1) < 1e-12
    assert kappa_linearity_check(flat_family, ZETAS) < 1e-12


def test_j_of_zeta_anchors(flat_structure):
    t = flat_structure.triple
    assert j_of_zeta(t, 0).distance(t.j3) < 1e-15
    assert j_of_zeta(t, 1j).distance(t.j1) < 1e-15
    assert j_of_zeta(t, -1).distance(t.j2) < 1e-15
    assert j_of_zeta(t, None).distance(-t.j3) < 1e-15


def test_omega3_type(flat_family, flat_structure):
    report = omega3_type_check(flat_family, flat_structure.triple.j3)
    assert report.type_residual < 1e-12
    assert report.wedge_plus < 1e-12
    assert report.wedge_minus < 1e-12


def test_cross_check_and_conjugation(flat_family, flat_structure):
    t = flat_structure.triple
    assert j2_cross_check(flat_family, t) < 1e-10
    assert conjugation_identity_residual(flat_family, t.j1) < 1e-12


def test_omega3_with_20_part_is_detected(flat_family, flat_structure):
    w1 = TwoForm(entries=FLAT_FORMS[0])
    broken = HoloSympFamily(omega_plus=flat_family.omega_plus, omega_3=flat_family.omega_3 + 0.1 * w1)
    report = omega3_type_check(broken, flat_structure.triple.j3)
    assert report.type_residual == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(InconsistentFamilyError):
        triple_from_family(broken)


def test_scaled_family_gives_same_structure(flat_family, flat_structure):
    scaled = metric_from_family(flat_family.scaled(3.0))
    assert np.allclose(scaled.metric.entries, 3 * flat_structure.metric.entries)
    assert scaled.triple.j1.distance(flat_structure.triple.j1) < 1e-12


def test_inconsistent_omega3_is_rejected(flat_family):
    broken = HoloSympFamily(omega_plus=flat_family.omega_plus, omega_3=2.0 * flat_family.omega_3)
    with pytest.raises(TwistorError):
        metric_from_family(broken)


def test_extract_reconstruct_roundtrip(flat_structure):
    family = extract_family(flat_structure.triple, flat_structure.sympl)
    rebuilt = metric_from_family(family)
    assert rebuilt.metric.distance(flat_structure.metric) < 1e-12
    for a, b in zip(rebuilt.triple.operators(), flat_structure.triple.operators(), strict=True):
        assert a.distance(b) < 1e-12


def test_non_quaternionic_triple_is_rejected(flat_structure):
    t = flat_structure.triple
    with pytest.raises(InputError):
        QuaternionicTriple(j1=t.j1, j2=t.j1, j3=t.j3)


# --- varpi(z) ---
def test_varpi_fibres_at_poles(flat_family):
    assert varpi(flat_family, 0) is flat_family.omega_plus
    assert np.array_equal(varpi(flat_family, None).entries, flat_family.omega_minus.entries)


@pytest.mark.parametrize("zeta", ZETAS)
def test_varpi_identities(flat_family, flat_structure, zeta):
    t = flat_structure.triple
    assert varpi_reality_residual(flat_family, zeta) < 1e-12
    assert antipodal_j_residual(t, zeta) < 1e-12
    assert varpi_pullback_check(flat_family, t.j1, zeta) < 1e-12
    assert varpi_conjugate_pullback_check(flat_family, t.j1, zeta) < 1e-12
    assert holosymp_check(varpi(flat_family, zeta)).passed
    assert varpi_nondegeneracy(flat_family, t, zeta) > 1e-3


@pytest.mark.parametrize("zeta", ZETAS)
def test_kernel_is_graph_of_kappa(flat_family, flat_structure, zeta):
    dim, residual = kernel_graph_check(flat_family, flat_structure.triple, zeta)
    assert dim == 2
    assert residual < 1e-10


def test_varpi_at_one(flat_family):
    w1, _, w3 = FLAT_FORMS
    assert np.allclose(varpi(flat_family, 1).entries, w3 - 1j * w1, atol=1e-15)


def test_pullback_detects_wrong_j1(flat_family, flat_structure):
    flipped = -flat_structure.triple.j1
    assert varpi_pullback_check(flat_family, flipped, 0.3 + 0.4j) > 0.5


def test_frame_maps(flat_structure):
    t = flat_structure.triple
    report = frame_map_check(t, 0.7 + 0.2j)
    assert report.inverse_residual < 1e-12
    assert report.vector_residual < 1e-12
    assert report.covector_residual < 1e-12
    assert report.alternative_inverse_residual < 1e-12


def test_frame_map_at_i_uses_j2(flat_structure):
    report = frame_map_check(flat_structure.triple, 1j)
    assert report.inverse_residual < 1e-12
    assert report.alternative_inverse_residual is None


# --- Rotation Frames ---
@pytest.mark.parametrize("zeta", ZETAS)
def test_rotation_frame(flat_structure, zeta, rng):
    t, s = flat_structure.triple, flat_structure.sympl
    frame = rotation_frame(t, s, zeta)
    assert 0 <= frame.theta < np.pi
    assert frame.quaternion_residual < 1e-10
    assert frame.rescaled_residual < 1e-10
    assert frame.sphere_residual < 1e-10
    assert holomorphic_metric_residual(t, s, zeta, frame, rng) < 1e-10


def test_rotation_frame_at_zero_needs_phase(flat_structure):
    t, s = flat_structure.triple, flat_structure.sympl
    with pytest.raises(InputError):
        rotation_frame(t, s, 0)
    frame = rotation_frame(t, s, 0, phase=0.4)
    assert frame.quaternion_residual < 1e-10


def test_rotation_frame_at_one(flat_structure):
    t, s = flat_structure.triple, flat_structure.sympl
    frame = rotation_frame(t, s, 1)
    assert frame.k.distance(t.j3) < 1e-12
    assert frame.i.distance(-t.j1) < 1e-12
    assert np.allclose(frame.k_coefficients, [0, 0, 1], atol=1e-12)
    assert np.allclose(frame.i_coefficients, [-1, 0, 0], atol=1e-12)
    # K I = J(1) = -J_2
    assert np.allclose(frame.k.entries @ frame.i.entries, -t.j2.entries, atol=1e-12)


def test_rotation_angle_is_continuous(flat_structure):
    t, s = flat_structure.triple, flat_structure.sympl
    theta = rotation_frame(t, s, 0.7 + 0.3j).theta
    nearby = rotation_frame(t, s, 0.7 + 0.3j + 1e-7 * (1 + 1j)).theta
    assert abs(theta - nearby) < 1e-6


def test_rotation_frame_rejects_mismatched_forms(flat_structure):
    t, s = flat_structure.triple, flat_structure.sympl
    rotated = SymplecticTriple(w1=s.w2, w2=-s.w1, w3=s.w3)
    with pytest.raises(InconsistentStructureError):
        rotation_frame(t, rotated, 1)


# --- Real Sections ---
def test_real_sections(flat_structure, rng):
    t = flat_structure.triple
    for a in _type_10(t, rng, 5):
        for zeta in ZETAS:
            section = real_section(t, a, zeta)
            assert section.type_residual < 1e-12
            assert section.reality_residual < 1e-12


def test_real_section_through_value(flat_structure, rng):
    t = flat_structure.triple
    (a0,) = _type_10(t, rng, 1)
    a, residual = real_section_from_value(t, a0, 0.4 - 1.2j)
    assert residual < 1e-12
    assert np.linalg.norm(real_section(t, a, 0.4 - 1.2j).v - a0) < 1e-12


def test_section_requires_type_10(flat_structure):
    with pytest.raises(InputError):
        real_section(flat_structure.triple, np.array([1, 0, 0, 0], dtype=complex), 1.0)


def test_hklr_metric_agrees_with_metric(flat_family, flat_structure, rng):
    t, g = flat_structure.triple, flat_structure.metric.entries
    for _ in range(100):
        a, b = _type_10(t, rng, 2)
        expected = (a + a.conj()).real @ g @ (b + b.conj()).real
        assert hklr_metric(flat_family, a, b, triple=t) == pytest.approx(expected, abs=1e-10)


def test_o2_pairing_is_quadratic(flat_family, flat_structure, rng):
    t = flat_structure.triple
    a, b = _type_10(t, rng, 2)
    report = o2_polynomial_check(flat_family, a, b, SECTION_NODES, triple=t)
    assert report.extrapolation_residual < 1e-7
    assert report.identity_residual < 1e-10
    assert len(report.coefficients) == 3


def test_o2_pairing_of_a_section_with_itself_vanishes(flat_family, flat_structure, rng):
    t = flat_structure.triple
    (a,) = _type_10(t, rng, 1)
    report = o2_polynomial_check(flat_family, a, a, SECTION_NODES, triple=t)
    assert np.allclose(report.coefficients, 0, atol=1e-10)


def test_o2_constant_term_is_omega_plus(flat_family, flat_structure, rng):
    t = flat_structure.triple
    a, b = _type_10(t, rng, 2)
    report = o2_polynomial_check(flat_family, a, b, SECTION_NODES, triple=t)
    assert report.constant_term == pytest.approx(flat_family.omega_plus(a, b), abs=1e-9)
    assert report.extrapolation_residual <= 1e-9


def test_o2_fit_needs_four_nodes(flat_family, flat_structure, rng):
    a, b = _type_10(flat_structure.triple, rng, 2)
    with pytest.raises(InputError):
        o2_polynomial_check(flat_family, a, b, [1, 2, 3])


def test_identity_operator_is_not_complex_structure():
    with pytest.raises(InputError):
        QuaternionicTriple(j1=LinOp.identity(4), j2=LinOp.identity(4), j3=LinOp.identity(4))
