"""Check names and the identities they certify.

Every check record in a report carries its name and an ``anchor``: the
identity being certified, written out so reports read on their own.
"""

# --- Pointwise Checks ---

CHECK_HOLOMORPHIC_SYMPLECTIC = "holomorphic_symplectic"
CHECK_QUATERNION = "quaternion_relations"
CHECK_COMPATIBILITY = "compatibility"
CHECK_METRIC_CHAIN = "metric_identity_chain"
CHECK_RECOVERY = "recovery_formulas"
CHECK_OMEGA3_TYPE = "omega3_type"
CHECK_SIGNATURE = "signature"
CHECK_KAPPA_LINEARITY = "kappa_linearity"
CHECK_CROSS_CHECK = "independent_structures"
CHECK_ROTATION_FRAME = "rotation_frame"
CHECK_HOLOMORPHIC_METRIC = "holomorphic_metric"
CHECK_VARPI_REALITY = "varpi_reality"
CHECK_ANTIPODAL_J = "antipodal_complex_structure"
CHECK_KERNEL_DIMENSION = "kernel_dimension"
CHECK_GRAPH = "graph_property"
CHECK_PULLBACK = "varpi_pullback"
CHECK_RECONSTRUCTION = "reconstruction"

# --- Chart Checks ---

CHECK_CLOSEDNESS = "closedness"
CHECK_NIJENHUIS = "nijenhuis"
CHECK_ROUNDTRIP_METRIC = "roundtrip_metric"
CHECK_ROUNDTRIP_OPERATORS = "roundtrip_operators"

# --- Section Checks ---

CHECK_SECTION_TYPE = "real_section_type"
CHECK_SECTION_REALITY = "real_section_reality"
CHECK_O2_POLYNOMIAL = "o2_polynomial"
CHECK_O2_IDENTITY = "o2_pairing_identity"
CHECK_HKLR = "hklr_agreement"

ANCHORS: dict[str, str] = {
    CHECK_HOLOMORPHIC_SYMPLECTIC: "omega_+^r ^ conj(omega_+)^r != 0 and dim ker omega_+ >= 2r",
    CHECK_QUATERNION: "J_a J_b = eps_abc J_c - delta_ab",
    CHECK_COMPATIBILITY: "omega_a(v,w) = g(J_a v,w), g(v,w) = omega_a(v,J_a w), J_a = -g^-1 omega_a",
    CHECK_METRIC_CHAIN: (
        "g = (omega_+(.,J_1.) - omega_+(J_1.,.))/2 = Im varpi(-1)(.,J_1.) "
        "= Im varpi(-i)(.,J_2.) = Re varpi(-1)(.,J_3.) = Re omega_+(.,J_1.) = Im omega_+(.,J_2.)"
    ),
    CHECK_RECOVERY: "J_3 = -omega_1^-1 omega_2 and g = -omega_3 omega_1^-1 omega_2",
    CHECK_OMEGA3_TYPE: "omega_3(J_3.,J_3.) = omega_3 and omega_+^r ^ omega_3 = omega_-^r ^ omega_3 = 0",
    CHECK_SIGNATURE: "g nondegenerate of signature (p,q), p and q multiples of 4, constant on the chart",
    CHECK_KAPPA_LINEARITY: "kappa(z) = z kappa(1), kappa^2 = -1, iota_{kappa v} omega_3 = (i/2) iota_v omega_-",
    CHECK_CROSS_CHECK: "J(-1) from varpi(-1) equals J_3 J_1 and J(i) from varpi(i) equals kappa",
    CHECK_ROTATION_FRAME: "(|z|+|z|^-1)^-1 varpi(z) = (omega_K + i omega_I)/2 with (K,I,J(z)) quaternionic",
    CHECK_HOLOMORPHIC_METRIC: "(|z|+|z|^-1)^-1 varpi(z)(v, K xbar) = g(v, xbar) for xbar in T01(z)",
    CHECK_VARPI_REALITY: "conj(varpi(-1/conj(z))) = varpi(z)",
    CHECK_ANTIPODAL_J: "J(-1/conj(z)) = -J(z)",
    CHECK_KERNEL_DIMENSION: "dim ker varpi(z) = 2r",
    CHECK_GRAPH: "ker varpi(z) = (1 + z kappa) T01(0)",
    CHECK_PULLBACK: "varpi(z) = -(i/2z) omega_+((1 - z J_1).,(1 - z J_1).)",
    CHECK_RECONSTRUCTION: "pointwise reconstruction of (J_1, J_2, J_3, g) from (omega_+, omega_3)",
    CHECK_CLOSEDNESS: "d omega = 0",
    CHECK_NIJENHUIS: "N_J(v,w) = [Jv,Jw] - J[Jv,w] - J[v,Jw] - [v,w] = 0 for J = J(z)",
    CHECK_ROUNDTRIP_METRIC: "metric reconstructed from (omega_1 + i omega_2, omega_3) equals the source metric",
    CHECK_ROUNDTRIP_OPERATORS: "complex structures reconstructed from the family equal the source triple",
    CHECK_SECTION_TYPE: "s(z) = (1 + conj(z) J_1) v(z) / (1 + |z|^2) lies in T10(z)",
    CHECK_SECTION_REALITY: "conj(s(-1/conj(z))) = s(z) for v(z) = a - z J_1 conj(a)",
    CHECK_O2_POLYNOMIAL: "2iz varpi(z)(s_a(z), s_b(z)) is a quadratic polynomial in z",
    CHECK_O2_IDENTITY: "2iz varpi(z)(s_a(z), s_b(z)) = omega_+(v_a(z), v_b(z))",
    CHECK_HKLR: "(omega_+(a, J_1 conj(b)) - omega_+(J_1 conj(a), b))/2 = g(a + conj(a), b + conj(b))",
}
"""Identity written out for every check name."""


def anchor_for(name: str) -> str:
    """Anchor of a possibly-qualified check name such as 'closedness[omega_1]'."""
    return ANCHORS.get(name.split("[", 1)[0], name)
