"""Pointwise twistor constructions.

Given the pair (omega_+, omega_3) at one point, this module builds the
P^1-family varpi(z), the complex structures J(z), the map kappa, the
quaternionic triple (J_1, J_2, J_3) and the metric g, and checks every
identity relating them. Matrix conventions are those of ``form_algebra``.

Twistor parameters are points of the Riemann sphere; the unit vector
c(z) = (2 Im z, -2 Re z, 1 - |z|^2) / (1 + |z|^2) selects J(z) = sum c_a J_a,
so J(0) = J_3, J(i) = J_1 and J(-1) = J_2.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from src.core.configs import settings
from src.core.errors import (
    DegeneracyError,
    DirectSumError,
    InconsistentFamilyError,
    InconsistentStructureError,
    InputError,
)
from src.models.schemas import Signature
from src.twistor.constants import (
    ANCHORS,
    CHECK_COMPATIBILITY,
    CHECK_HOLOMORPHIC_SYMPLECTIC,
    CHECK_METRIC_CHAIN,
    CHECK_QUATERNION,
    CHECK_ROTATION_FRAME,
)
from src.twistor.form_algebra import (
    LinOp,
    Subspace,
    TwoForm,
    complement_projectors,
    interior,
    max_abs,
    nullspace,
    signature_of,
    solve_interior_within,
    wedge_pairing,
)

_FROZEN = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# --- Twistor Parameters ---
class TwistorParam(BaseModel):
    """A point of the Riemann sphere: a finite complex number or infinity."""

    model_config = ConfigDict(frozen=True)

    value: complex | None = None

    @classmethod
    def finite(cls, z: complex) -> TwistorParam:
        return cls(value=complex(z))

    @classmethod
    def infinity(cls) -> TwistorParam:
        return cls(value=None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def z(self) -> complex:
        if self.value is None:
            raise InputError("the point at infinity has no finite coordinate")
        return self.value

    def antipode(self) -> TwistorParam:
        """z -> -1/conj(z), exchanging 0 and infinity."""
        if self.value is None:
            return TwistorParam.finite(0)
        if self.value == 0:
            return TwistorParam.infinity()
        return TwistorParam.finite(-1 / self.value.conjugate())


ZetaLike = TwistorParam | complex | float | int | None


def as_param(z: ZetaLike) -> TwistorParam:
    """Coerce a number (or None for infinity) to a TwistorParam."""
    if isinstance(z, TwistorParam):
        return z
    if z is None or (isinstance(z, float) and math.isinf(z)):
        return TwistorParam.infinity()
    return TwistorParam.finite(complex(z))


def _finite_nonzero(z: ZetaLike) -> complex:
    param = as_param(z)
    if param.is_infinite or param.z == 0:
        raise InputError("a finite nonzero twistor parameter is required")
    return param.z


def stereographic(z: ZetaLike) -> np.ndarray:
    """Unit vector c(z) on the sphere; infinity maps to (0, 0, -1)."""
    param = as_param(z)
    if param.is_infinite:
        return np.array([0.0, 0.0, -1.0])
    zeta = param.z
    norm2 = abs(zeta) ** 2
    return np.array([2 * zeta.imag, -2 * zeta.real, 1 - norm2]) / (1 + norm2)


def inverse_stereographic(c: Sequence[float]) -> TwistorParam:
    """z = (i c_1 - c_2) / (1 + c_3); the south pole (0, 0, -1) gives infinity."""
    c1, c2, c3 = (float(x) for x in c)
    if 1 + c3 <= 1e-15:
        return TwistorParam.infinity()
    return TwistorParam.finite((1j * c1 - c2) / (1 + c3))


def _check_unit_pair(u: complex, v: complex) -> None:
    if abs(abs(u) ** 2 + abs(v) ** 2 - 1) > 1e-12:
        raise InputError(f"(u, v) must satisfy |u|^2 + |v|^2 = 1, got {abs(u) ** 2 + abs(v) ** 2}")


def rotate_zeta(u: complex, v: complex, z: ZetaLike) -> TwistorParam:
    """Moebius action z -> (u z + v) / (-conj(v) z + conj(u)) of SU(2)."""
    u, v = complex(u), complex(v)
    _check_unit_pair(u, v)
    param = as_param(z)
    if param.is_infinite:
        if v == 0:
            return TwistorParam.infinity()
        return TwistorParam.finite(u / -v.conjugate())
    denominator = -v.conjugate() * param.z + u.conjugate()
    if denominator == 0:
        return TwistorParam.infinity()
    return TwistorParam.finite((u * param.z + v) / denominator)


def su2_rotation(u: complex, v: complex) -> np.ndarray:
    """SO(3) matrix of the adjoint action of [[u, v], [-conj(v), conj(u)]] on c."""
    u, v = complex(u), complex(v)
    _check_unit_pair(u, v)
    su2 = np.array([[u, v], [-v.conjugate(), u.conjugate()]])

    def encode(c: np.ndarray) -> np.ndarray:
        return np.array(
            [[1j * c[2], c[0] + 1j * c[1]], [-c[0] + 1j * c[1], -1j * c[2]]], dtype=complex
        )

    rotation = np.empty((3, 3))
    for k, basis in enumerate(np.eye(3)):
        image = su2 @ encode(basis) @ su2.conj().T
        rotation[:, k] = [image[0, 1].real, image[0, 1].imag, (image[0, 0] / 1j).real]
    return rotation


def sample_zetas(rng: np.random.Generator, count: int) -> list[complex]:
    """Log-uniform modulus on [modulus_min, modulus_max], uniform phase."""
    lo = math.log(settings.sampling.modulus_min)
    hi = math.log(settings.sampling.modulus_max)
    moduli = np.exp(rng.uniform(lo, hi, size=count))
    phases = rng.uniform(0.0, 2 * math.pi, size=count)
    return [complex(m * cmath.exp(1j * p)) for m, p in zip(moduli, phases, strict=True)]


# --- Domain Types ---
def quaternion_residual(j1: LinOp, j2: LinOp, j3: LinOp) -> float:
    """max over a, b of |J_a J_b - eps_abc J_c + delta_ab|."""
    ops = (j1, j2, j3)
    eye = np.eye(j1.dim)
    worst = 0.0
    for a in range(3):
        for b in range(3):
            product = ops[a].entries @ ops[b].entries
            if a == b:
                expected = -eye
            else:
                c = 3 - a - b
                sign = 1.0 if (b - a) % 3 == 1 else -1.0
                expected = sign * ops[c].entries
            worst = max(worst, max_abs(product - expected))
    return worst


class QuaternionicTriple(BaseModel):
    """Three real complex structures satisfying the quaternion relations."""

    model_config = _FROZEN

    j1: LinOp
    j2: LinOp
    j3: LinOp

    @model_validator(mode="after")
    def _quaternionic(self) -> QuaternionicTriple:
        if not (self.j1.real and self.j2.real and self.j3.real):
            raise InputError("quaternionic triple operators must be real")
        residual = quaternion_residual(self.j1, self.j2, self.j3)
        if residual > settings.tolerances.identity:
            raise InputError(f"triple violates the quaternion relations (residual {residual:.3e})")
        return self

    @property
    def dim(self) -> int:
        return self.j1.dim

    def operators(self) -> tuple[LinOp, LinOp, LinOp]:
        return (self.j1, self.j2, self.j3)

    def residual(self) -> float:
        return quaternion_residual(self.j1, self.j2, self.j3)


class SymplecticTriple(BaseModel):
    """Three real nondegenerate 2-forms (omega_1, omega_2, omega_3)."""

    model_config = _FROZEN

    w1: TwoForm
    w2: TwoForm
    w3: TwoForm

    @model_validator(mode="after")
    def _real_nondegenerate(self) -> SymplecticTriple:
        for name, form in (("w1", self.w1), ("w2", self.w2), ("w3", self.w3)):
            if not form.is_real():
                raise InputError(f"symplectic form {name} is not real")
            s = np.linalg.svd(form.entries, compute_uv=False)
            if s[-1] <= settings.tolerances.rank * max(float(s[0]), 1e-300):
                raise InputError(f"symplectic form {name} is degenerate")
        return self

    def forms(self) -> tuple[TwoForm, TwoForm, TwoForm]:
        return (self.w1, self.w2, self.w3)


class HoloSympFamily(BaseModel):
    """The pair (omega_+, omega_3) generating varpi(z) at one point.

    omega_- is conj(omega_+); omega_1 and omega_2 are the real and imaginary
    parts of omega_+.
    """

    model_config = _FROZEN

    omega_plus: TwoForm
    omega_3: TwoForm

    @model_validator(mode="after")
    def _real_omega3(self) -> HoloSympFamily:
        if self.omega_plus.dim != self.omega_3.dim:
            raise InputError("omega_+ and omega_3 have different dimensions")
        if self.omega_plus.dim % 4:
            raise InputError(f"family dimension must be a multiple of 4, got {self.omega_plus.dim}")
        if not self.omega_3.is_real():
            raise InputError("omega_3 must be real")
        return self

    @property
    def dim(self) -> int:
        return self.omega_plus.dim

    @property
    def r(self) -> int:
        return self.dim // 4

    @property
    def omega_minus(self) -> TwoForm:
        return self.omega_plus.conj()

    @property
    def omega_1(self) -> TwoForm:
        return self.omega_plus.real

    @property
    def omega_2(self) -> TwoForm:
        return self.omega_plus.imag

    def scaled(self, factor: float) -> HoloSympFamily:
        return HoloSympFamily(omega_plus=factor * self.omega_plus, omega_3=factor * self.omega_3)


class PointStructure(BaseModel):
    """Complete pseudo-hyper-Kaehler data at a point, with the residuals found."""

    model_config = _FROZEN

    triple: QuaternionicTriple
    metric: LinOp
    signature: Signature
    sympl: SymplecticTriple
    residuals: dict[str, float] = {}


class RotationFrame(BaseModel):
    """Complex structures (K, I) completing J(z) to a rotated quaternionic triple."""

    model_config = _FROZEN

    k: LinOp
    i: LinOp
    theta: float
    quaternion_residual: float
    rescaled_residual: float
    sphere_residual: float
    k_coefficients: tuple[float, float, float]
    i_coefficients: tuple[float, float, float]

    @property
    def residual(self) -> float:
        return max(self.quaternion_residual, self.rescaled_residual, self.sphere_residual)


class HoloSympReport(BaseModel):
    """Both criteria of the holomorphic symplectic test."""

    volume: float
    kernel_dim: int
    passed: bool


class Omega3TypeReport(BaseModel):
    """(1,1)-type and nondegeneracy of omega_3 relative to J_3."""

    type_residual: float
    wedge_plus: float | None
    wedge_minus: float | None
    smallest_singular_value: float


class RealSympReport(BaseModel):
    """omega_2 = -omega_1(J.,.) = -omega_1(.,J.) and nondegeneracy of both parts."""

    left_residual: float
    right_residual: float
    smallest_singular_value_1: float
    smallest_singular_value_2: float


class FrameMapReport(BaseModel):
    """Frame-map relations between T01(0) and T01(z)."""

    inverse_residual: float
    vector_residual: float
    covector_residual: float
    alternative_inverse_residual: float | None


class RealSection(BaseModel):
    """A real holomorphic section through a at the point, evaluated at z."""

    model_config = _FROZEN

    v: np.ndarray
    s: np.ndarray
    type_residual: float
    reality_residual: float | None


class O2FitReport(BaseModel):
    """Quadratic fit of P(z) = 2iz varpi(z)(s_a(z), s_b(z))."""

    coefficients: list[complex]
    extrapolation_residual: float
    identity_residual: float
    constant_term: complex


# --- Helpers ---
def eigenspace(op: LinOp, eigenvalue: complex, tol: float | None = None) -> Subspace:
    """Eigenspace of ``op`` for ``eigenvalue``."""
    shifted = op.entries - eigenvalue * np.eye(op.dim)
    return nullspace(LinOp(entries=shifted), tol)


def holomorphic_projectors(j: LinOp) -> tuple[np.ndarray, np.ndarray]:
    """(P_10, P_01) = ((1 - iJ)/2, (1 + iJ)/2) for a complex structure J."""
    eye = np.eye(j.dim)
    return 0.5 * (eye - 1j * j.entries), 0.5 * (eye + 1j * j.entries)


def _scale(*forms: TwoForm) -> float:
    return max([1.0, *(max_abs(form.entries) for form in forms)])


# --- Complex Structures ---
def j_of_zeta(t: QuaternionicTriple, z: ZetaLike) -> LinOp:
    """J(z) = sum_a c_a(z) J_a."""
    c = stereographic(z)
    entries = sum(coef * op.entries for coef, op in zip(c, t.operators(), strict=True))
    return LinOp(entries=entries, real=True)


def holosymp_check(
    omega: TwoForm, r: int | None = None, tol: float | None = None
) -> HoloSympReport:
    """Omega^r ^ conj(Omega)^r != 0 and dim ker Omega >= 2r."""
    r = omega.r if r is None else r
    if omega.dim != 4 * r:
        raise InputError(f"form of dimension {omega.dim} is not 4r for r = {r}")
    tol = settings.tolerances.holosymp_volume if tol is None else tol
    volume = abs(wedge_pairing(omega, r, omega.conj(), r))
    kernel_dim = nullspace(omega).dim
    return HoloSympReport(
        volume=volume, kernel_dim=kernel_dim, passed=bool(volume > tol and kernel_dim >= 2 * r)
    )


def complex_structure_from_holsymp(omega: TwoForm, tol: float | None = None) -> LinOp:
    """The real J with ker Omega = T01 (the -i eigenspace) and ker conj(Omega) = T10."""
    kernel = nullspace(omega, tol)
    if 2 * kernel.dim != omega.dim:
        raise DirectSumError(
            f"kernel has dimension {kernel.dim}, expected {omega.dim // 2}", float("inf")
        )
    p10, p01 = complement_projectors(kernel.conj(), kernel)
    entries = 1j * p10.entries - 1j * p01.entries
    try:
        j = LinOp.from_real(entries)
    except InputError as exc:
        raise InconsistentFamilyError("J = i P_ker(conj Omega) - i P_ker(Omega) is real", max_abs(entries.imag)) from exc
    square = max_abs(j.entries @ j.entries + np.eye(j.dim))
    if square > settings.tolerances.algebra * 10:
        raise InconsistentFamilyError("J^2 = -1", square)
    return j


def realsymp_check(omega: TwoForm, j: LinOp) -> RealSympReport:
    """For Omega = omega_1 + i omega_2 of type (2,0) with respect to J."""
    w1, w2 = omega.real.entries, omega.imag.entries
    s1 = np.linalg.svd(w1, compute_uv=False)
    s2 = np.linalg.svd(w2, compute_uv=False)
    return RealSympReport(
        left_residual=max_abs(w2 + j.entries.T @ w1),
        right_residual=max_abs(w2 + w1 @ j.entries),
        smallest_singular_value_1=float(s1[-1]),
        smallest_singular_value_2=float(s2[-1]),
    )


# --- The Family varpi(z) ---
def varpi(f: HoloSympFamily, z: ZetaLike) -> TwoForm:
    """varpi(z) = -(i/2z) omega_+ + omega_3 - (i/2) z omega_-.

    At z = 0 and z = infinity the fibre representatives omega_+ and omega_-
    are returned.
    """
    param = as_param(z)
    if param.is_infinite:
        return f.omega_minus
    zeta = param.z
    if zeta == 0:
        return f.omega_plus
    return (-0.5j / zeta) * f.omega_plus + f.omega_3 + (-0.5j * zeta) * f.omega_minus


def varpi_reality_residual(f: HoloSympFamily, z: ZetaLike) -> float:
    """|conj(varpi(-1/conj(z))) - varpi(z)| for finite nonzero z."""
    zeta = _finite_nonzero(z)
    antipodal = varpi(f, -1 / zeta.conjugate()).conj()
    return max_abs(antipodal.entries - varpi(f, zeta).entries)


def antipodal_j_residual(t: QuaternionicTriple, z: ZetaLike) -> float:
    """|J(-1/conj(z)) + J(z)|."""
    param = as_param(z)
    return max_abs(j_of_zeta(t, param.antipode()).entries + j_of_zeta(t, param).entries)


def varpi_pullback_check(f: HoloSympFamily, j1: LinOp, z: ZetaLike) -> float:
    """|varpi(z) + (i/2z) (1 - z J_1)' omega_+ (1 - z J_1)|."""
    zeta = _finite_nonzero(z)
    frame = LinOp.identity(f.dim) - zeta * j1
    expected = (-0.5j / zeta) * f.omega_plus.pullback(frame)
    return max_abs(varpi(f, zeta).entries - expected.entries)


def varpi_conjugate_pullback_check(f: HoloSympFamily, j1: LinOp, z: ZetaLike) -> float:
    """|varpi(z) + (i/2z) (J_1 + z)' omega_- (J_1 + z)|."""
    zeta = _finite_nonzero(z)
    frame = j1 + zeta * LinOp.identity(f.dim)
    expected = (-0.5j / zeta) * f.omega_minus.pullback(frame)
    return max_abs(varpi(f, zeta).entries - expected.entries)


def conjugation_identity_residual(f: HoloSympFamily, j1: LinOp) -> float:
    """|omega_+ - omega_-(J_1., J_1.)|."""
    return max_abs(f.omega_plus.entries - f.omega_minus.pullback(j1).entries)


def varpi_nondegeneracy(f: HoloSympFamily, t: QuaternionicTriple, z: ZetaLike) -> float:
    """Smallest singular value of varpi(z) restricted to T10(z) x T10(z)."""
    form = varpi(f, z)
    t10 = eigenspace(j_of_zeta(t, z), 1j)
    restricted = t10.basis.T @ form.entries @ t10.basis
    return float(np.linalg.svd(restricted, compute_uv=False)[-1])


# --- Frame Maps ---
def frame_map(j1: LinOp, z: ZetaLike, j2: LinOp | None = None) -> tuple[LinOp, LinOp]:
    """(1 + z J_1, its inverse on T01(0)).

    The inverse is (1 - z J_1)/(1 + z^2) away from z = +-i and
    (1 + i z J_2)/(1 - z^2) at z = +-i, where J_2 must be supplied.
    """
    zeta = as_param(z).z
    eye = LinOp.identity(j1.dim)
    forward = eye + zeta * j1
    if abs(1 + zeta**2) > 1e-12:
        inverse = (1 / (1 + zeta**2)) * (eye - zeta * j1)
    else:
        if j2 is None:
            raise InputError("J_2 is required to invert 1 + z J_1 at z = +-i")
        inverse = (1 / (1 - zeta**2)) * (eye + (1j * zeta) * j2)
    return forward, inverse


def frame_map_check(t: QuaternionicTriple, z: ZetaLike) -> FrameMapReport:
    """Frame-map relations between T01(0), T01(z) and their dual covectors."""
    zeta = as_param(z).z
    forward, inverse = frame_map(t.j1, zeta, t.j2)
    j_z = j_of_zeta(t, zeta).entries
    t01 = eigenspace(t.j3, -1j).basis
    moved = forward.entries @ t01
    inverse_residual = max_abs(inverse.entries @ moved - t01)
    vector_residual = max_abs(j_z @ moved + 1j * moved)
    # covectors annihilating T01(0): rows sigma with sigma J_3 = i sigma
    cotangent = eigenspace(t.j3.T, 1j).basis.T
    pulled = cotangent @ (np.eye(t.dim) - zeta * t.j1.entries)
    covector_residual = max_abs(pulled @ j_z - 1j * pulled)
    alternative = None
    if min(abs(zeta - 1), abs(zeta + 1), abs(zeta - 1j), abs(zeta + 1j)) > 1e-6:
        alt_inverse = (np.eye(t.dim) + 1j * zeta * t.j2.entries) / (1 - zeta**2)
        alternative = max_abs(alt_inverse @ moved - t01)
    return FrameMapReport(
        inverse_residual=inverse_residual,
        vector_residual=vector_residual,
        covector_residual=covector_residual,
        alternative_inverse_residual=alternative,
    )


# --- kappa ---
def _kappa_on_t01(f: HoloSympFamily, zeta: complex, t01: Subspace) -> np.ndarray:
    """Columns kappa(z) v for the basis v of T01(0), solving the defining equation."""
    t10 = t01.conj()
    scale = _scale(f.omega_plus, f.omega_3) * max(1.0, abs(zeta))
    columns = []
    for v in t01.basis.T:
        rhs = -2j * zeta * interior(f.omega_3, v)
        u, residual = solve_interior_within(f.omega_plus, rhs, t10)
        if residual > settings.tolerances.identity * scale:
            raise InconsistentFamilyError(
                "iota_{kappa v} omega_+ = -2i z iota_v omega_3 solvable in T10(0)", residual
            )
        columns.append(u)
    return np.column_stack(columns)


def kappa_from_family(f: HoloSympFamily) -> LinOp:
    """kappa: T01(0) -> T10(0) from iota_{kappa v} omega_+ = -2i iota_v omega_3.

    Extended to a real operator by kappa(conj v) = conj(kappa v); the companion
    identity iota_{kappa v} omega_3 = (i/2) iota_v omega_- is enforced.
    """
    t01 = nullspace(f.omega_plus)
    if 4 * t01.dim != 2 * f.dim:
        raise DegeneracyError(
            f"omega_+ kernel has dimension {t01.dim}, expected {f.dim // 2}",
            float(np.linalg.svd(f.omega_plus.entries, compute_uv=False)[-1]),
        )
    images = _kappa_on_t01(f, 1.0, t01)
    s = np.linalg.svd(images, compute_uv=False)
    if s[-1] <= settings.tolerances.rank * max(float(s[0]), 1e-300):
        raise DegeneracyError("omega_3 is degenerate on T01(0)", float(s[-1]))

    scale = _scale(f.omega_plus, f.omega_3)
    companion = max(
        float(np.linalg.norm(interior(f.omega_3, u) - 0.5j * interior(f.omega_minus, v)))
        for u, v in zip(images.T, t01.basis.T, strict=True)
    )
    if companion > settings.tolerances.identity * scale:
        raise InconsistentFamilyError("iota_{kappa v} omega_3 = (i/2) iota_v omega_-", companion)

    domain = np.hstack([t01.basis, t01.basis.conj()])
    image = np.hstack([images, images.conj()])
    entries = image @ np.linalg.inv(domain)
    try:
        return LinOp.from_real(entries, tol=settings.tolerances.identity)
    except InputError as exc:
        raise InconsistentFamilyError("kappa extends to a real operator", max_abs(entries.imag)) from exc


def kappa_linearity_check(f: HoloSympFamily, zetas: Iterable[ZetaLike]) -> float:
    """max over z of |kappa(z) - z kappa(1)| on T01(0)."""
    t01 = nullspace(f.omega_plus)
    base = _kappa_on_t01(f, 1.0, t01)
    worst = 0.0
    for z in zetas:
        zeta = _finite_nonzero(z)
        worst = max(worst, max_abs(_kappa_on_t01(f, zeta, t01) - zeta * base))
    return worst


def kernel_graph_check(f: HoloSympFamily, t: QuaternionicTriple, z: ZetaLike) -> tuple[int, float]:
    """(dim ker varpi(z), |P_10 x - z kappa P_01 x| over an orthonormal kernel basis)."""
    zeta = as_param(z).z
    kernel = nullspace(varpi(f, zeta))
    p10, p01 = holomorphic_projectors(t.j3)
    x = kernel.basis
    residual = max_abs(p10 @ x - zeta * t.j1.entries @ (p01 @ x)) if kernel.dim else 0.0
    return kernel.dim, residual


# --- The Quaternionic Triple and the Metric ---
def triple_from_family(f: HoloSympFamily, tol: float | None = None) -> QuaternionicTriple:
    """J_3 = J(0) from omega_+, J_1 = kappa, J_2 = J_3 J_1."""
    tol = settings.tolerances.identity if tol is None else tol
    report = holosymp_check(f.omega_plus)
    if not report.passed:
        raise InconsistentFamilyError(ANCHORS[CHECK_HOLOMORPHIC_SYMPLECTIC], report.volume)
    j3 = complex_structure_from_holsymp(f.omega_plus)
    j1 = kappa_from_family(f)
    j2 = j3 @ j1
    residual = quaternion_residual(j1, j2, j3)
    if residual > tol:
        raise InconsistentFamilyError(ANCHORS[CHECK_QUATERNION], residual)
    return QuaternionicTriple(j1=j1, j2=j2, j3=j3)


def omega3_type_check(f: HoloSympFamily, j3: LinOp) -> Omega3TypeReport:
    """Type residual |omega_3(J_3., J_3.) - omega_3|, wedge identities (r = 1), sigma_min."""
    type_residual = max_abs(f.omega_3.pullback(j3).entries - f.omega_3.entries)
    wedge_plus = wedge_minus = None
    if f.r == 1:
        wedge_plus = abs(wedge_pairing(f.omega_plus, 1, f.omega_3, 1))
        wedge_minus = abs(wedge_pairing(f.omega_minus, 1, f.omega_3, 1))
    s = np.linalg.svd(f.omega_3.entries, compute_uv=False)
    return Omega3TypeReport(
        type_residual=type_residual,
        wedge_plus=wedge_plus,
        wedge_minus=wedge_minus,
        smallest_singular_value=float(s[-1]),
    )


def compatibility_residual(t: QuaternionicTriple, s: SymplecticTriple, g: LinOp) -> float:
    """Worst violation of the three forms of metric compatibility over a = 1, 2, 3."""
    g_inv = np.linalg.inv(g.entries)
    worst = 0.0
    for j, w in zip(t.operators(), s.forms(), strict=True):
        worst = max(
            worst,
            max_abs(w.entries - j.entries.T @ g.entries),  # omega(v,w) = g(Jv, w)
            max_abs(g.entries - w.entries @ j.entries),  # g(v,w) = omega(v, Jw)
            max_abs(j.entries + g_inv @ w.entries),  # J = -g^-1 omega
        )
    return worst


def recovery_residual(t: QuaternionicTriple, s: SymplecticTriple, g: LinOp) -> float:
    """|J_3 + omega_1^-1 omega_2| and |g + omega_3 omega_1^-1 omega_2|."""
    w1_inv_w2 = np.linalg.solve(s.w1.entries, s.w2.entries)
    return max(
        max_abs(t.j3.entries + w1_inv_w2),
        max_abs(g.entries + s.w3.entries @ w1_inv_w2),
    )


def metric_identity_chain_residual(f: HoloSympFamily, t: QuaternionicTriple, g: LinOp) -> float:
    """Largest distance from g of the equivalent expressions for the metric."""
    expressions = (
        varpi(f, -1).imag.twisted(t.j1),
        varpi(f, -1j).imag.twisted(t.j2),
        varpi(f, -1).real.twisted(t.j3),
        f.omega_1.twisted(t.j1),
        f.omega_2.twisted(t.j2),
    )
    return max(max_abs(expr - g.entries) for expr in expressions)


def metric_from_family(f: HoloSympFamily, tol: float | None = None) -> PointStructure:
    """g(v, w) = (omega_+(v, J_1 w) - omega_+(J_1 v, w)) / 2 and the full structure."""
    tol = settings.tolerances.identity if tol is None else tol
    t = triple_from_family(f, tol)
    twisted = f.omega_plus.twisted(t.j1)
    entries = 0.5 * (twisted - t.j1.entries.T @ f.omega_plus.entries)
    scale = _scale(f.omega_plus, f.omega_3)
    try:
        g = LinOp.from_real(entries, tol=tol)
    except InputError as exc:
        raise InconsistentFamilyError("g is real", max_abs(entries.imag)) from exc
    asymmetry = max_abs(g.entries - g.entries.T)
    if asymmetry > tol * scale:
        raise InconsistentFamilyError("g is symmetric", asymmetry)

    chain = metric_identity_chain_residual(f, t, g)
    if chain > tol * scale:
        raise InconsistentFamilyError(ANCHORS[CHECK_METRIC_CHAIN], chain)

    signature = signature_of(g, tol)
    if signature.zero:
        raise DegeneracyError(
            "metric is degenerate", float(np.min(np.abs(np.linalg.eigvalsh(g.entries))))
        )
    sympl = SymplecticTriple(w1=f.omega_1, w2=f.omega_2, w3=f.omega_3)
    compat = compatibility_residual(t, sympl, g)
    if compat > tol * scale:
        raise InconsistentFamilyError(ANCHORS[CHECK_COMPATIBILITY], compat)
    residuals = {
        CHECK_QUATERNION: t.residual(),
        CHECK_METRIC_CHAIN: chain,
        CHECK_COMPATIBILITY: compat,
    }
    logger.debug(f"Reconstructed metric with signature {signature.as_tuple()}")
    return PointStructure(triple=t, metric=g, signature=signature, sympl=sympl, residuals=residuals)


def reconstruct_point(f: HoloSympFamily, tol: float | None = None) -> PointStructure:
    """The pseudo-hyper-Kaehler structure determined by the family at a point."""
    return metric_from_family(f, tol)


def extract_family(t: QuaternionicTriple, s: SymplecticTriple) -> HoloSympFamily:
    """(omega_1 + i omega_2, omega_3) after checking compatibility with g = omega_3 J_3."""
    g = LinOp(entries=s.w3.entries @ t.j3.entries, real=True)
    residual = compatibility_residual(t, s, g)
    if residual > settings.tolerances.identity * _scale(*s.forms()):
        raise InputError(f"triple and forms are not compatible (residual {residual:.3e})")
    return HoloSympFamily(omega_plus=s.w1 + 1j * s.w2, omega_3=s.w3)


def j2_cross_check(f: HoloSympFamily, t: QuaternionicTriple) -> float:
    """J_2 and J_1 rebuilt independently from varpi(-1) and varpi(i)."""
    j2 = complex_structure_from_holsymp(varpi(f, -1))
    j1 = complex_structure_from_holsymp(varpi(f, 1j))
    return max(j2.distance(t.j2), j1.distance(t.j1))


# --- Rotation Frames ---
def _rescaled_forms(
    f: HoloSympFamily, z: ZetaLike, phase: float | None
) -> tuple[np.ndarray, np.ndarray]:
    """(2iz/(1+|z|^2) varpi(z), 2 (|z|+|z|^-1)^-1 varpi(z)), with blow-up limits at 0, infinity."""
    param = as_param(z)
    if param.is_infinite or param.z == 0:
        if phase is None:
            raise InputError("a phase is required at z = 0 or infinity")
        if param.is_infinite:
            # z = R e^{i phase}, R -> infinity
            return f.omega_minus.entries, -1j * cmath.exp(1j * phase) * f.omega_minus.entries
        return f.omega_plus.entries, -1j * cmath.exp(-1j * phase) * f.omega_plus.entries
    zeta = param.z
    form = varpi(f, zeta).entries
    norm2 = abs(zeta) ** 2
    return (2j * zeta / (1 + norm2)) * form, (2 * abs(zeta) / (1 + norm2)) * form


def _frame_rotation(z: ZetaLike, phase: float | None) -> complex:
    """e^{2i theta}: the unit factor turning 2iz/(1+|z|^2) into 2|z|/(1+|z|^2)."""
    param = as_param(z)
    if param.is_infinite or param.z == 0:
        if phase is None:
            raise InputError("a phase is required at z = 0 or infinity")
        return -1j * cmath.exp((1j if param.is_infinite else -1j) * phase)
    return -1j * param.z.conjugate() / abs(param.z)


def _sphere_coefficients(s: SymplecticTriple, form: np.ndarray) -> tuple[np.ndarray, float]:
    """Real u with form = sum u_a omega_a by least squares, and the fit residual."""
    basis = np.stack([w.entries.real.ravel() for w in s.forms()], axis=1)
    u, *_ = np.linalg.lstsq(basis, form.ravel(), rcond=None)
    return u, max_abs(basis @ u - form.ravel())


def rotation_frame(
    t: QuaternionicTriple,
    s: SymplecticTriple,
    z: ZetaLike,
    phase: float | None = None,
    tol: float | None = None,
) -> RotationFrame:
    """K(z), I(z) and theta in [0, pi) with (|z|+|z|^-1)^-1 varpi(z) = (omega_K + i omega_I)/2.

    theta follows from z alone. omega_K and omega_I are then expanded in
    (omega_1, omega_2, omega_3); the coefficient vectors k, i must complete
    the sphere point c(z) to a right-handed orthonormal frame (k x i = c).
    """
    tol = settings.tolerances.identity if tol is None else tol
    f = HoloSympFamily(omega_plus=s.w1 + 1j * s.w2, omega_3=s.w3)
    g = s.w3.entries @ t.j3.entries
    unrotated, target = _rescaled_forms(f, z, phase)
    rotation = _frame_rotation(z, phase)
    theta = (cmath.phase(rotation) / 2) % math.pi
    if math.isclose(theta, math.pi):
        theta = 0.0
    combined = cmath.exp(2j * theta) * unrotated
    omega_k, omega_i = combined.real, combined.imag
    g_inv = np.linalg.inv(g)
    k = LinOp(entries=-g_inv @ omega_k, real=True)
    i_op = LinOp(entries=-g_inv @ omega_i, real=True)
    j_z = j_of_zeta(t, z)
    quaternion = quaternion_residual(k, i_op, j_z)
    scale = _scale(*s.forms())
    rescaled = max_abs(0.5 * target - 0.5 * combined) / scale
    k_coef, k_fit = _sphere_coefficients(s, omega_k)
    i_coef, i_fit = _sphere_coefficients(s, omega_i)
    c = stereographic(z)
    frame = np.stack([k_coef, i_coef, c])
    sphere = max(
        max(k_fit, i_fit) / scale,
        max_abs(frame @ frame.T - np.eye(3)),
        max_abs(np.cross(k_coef, i_coef) - c),
    )
    worst = max(quaternion, rescaled, sphere)
    if worst > tol:
        raise InconsistentStructureError(ANCHORS[CHECK_ROTATION_FRAME], worst)
    return RotationFrame(
        k=k,
        i=i_op,
        theta=theta,
        quaternion_residual=quaternion,
        rescaled_residual=rescaled,
        sphere_residual=sphere,
        k_coefficients=tuple(float(x) for x in k_coef),
        i_coefficients=tuple(float(x) for x in i_coef),
    )


def holomorphic_metric_residual(
    t: QuaternionicTriple,
    s: SymplecticTriple,
    z: ZetaLike,
    frame: RotationFrame,
    rng: np.random.Generator,
    samples: int = 20,
) -> float:
    """max |(|z|+|z|^-1)^-1 varpi(z)(v, K xbar) - g(v, xbar)| over random v, xbar in T01(z)."""
    f = HoloSympFamily(omega_plus=s.w1 + 1j * s.w2, omega_3=s.w3)
    zeta = _finite_nonzero(z)
    norm = abs(zeta)
    rescaled = varpi(f, zeta).entries * norm / (1 + norm**2)
    g = s.w3.entries @ t.j3.entries
    _, p01 = holomorphic_projectors(j_of_zeta(t, zeta))
    n = t.dim
    worst = 0.0
    for _ in range(samples):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x_bar = p01 @ (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        lhs = v @ rescaled @ (frame.k.entries @ x_bar)
        rhs = v @ g @ x_bar
        worst = max(worst, abs(lhs - rhs))
    return worst


# --- Real Sections ---
def _check_type_10(t: QuaternionicTriple, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (t.dim,):
        raise InputError(f"vector of shape {a.shape} does not match dimension {t.dim}")
    defect = float(np.linalg.norm(t.j3.entries @ a - 1j * a))
    if defect > settings.tolerances.algebra * max(1.0, float(np.linalg.norm(a))):
        raise InputError(f"vector is not of type (1,0) for J_3 (defect {defect:.3e})")
    return a


def _section_value(t: QuaternionicTriple, a: np.ndarray, z: ZetaLike) -> np.ndarray:
    param = as_param(z)
    if param.is_infinite:
        return a.conj()
    zeta = param.z
    j1 = t.j1.entries
    v = a - zeta * (j1 @ a.conj())
    return (v + zeta.conjugate() * (j1 @ v)) / (1 + abs(zeta) ** 2)


def real_section(t: QuaternionicTriple, a: np.ndarray, z: ZetaLike) -> RealSection:
    """v(z) = a - z J_1 conj(a) and s(z) = (1 + conj(z) J_1) v(z) / (1 + |z|^2)."""
    a = _check_type_10(t, a)
    zeta = as_param(z).z
    v = a - zeta * (t.j1.entries @ a.conj())
    s = _section_value(t, a, zeta)
    type_residual = float(np.linalg.norm(j_of_zeta(t, zeta).entries @ s - 1j * s))
    antipode = as_param(zeta).antipode()
    reality = float(np.linalg.norm(_section_value(t, a, antipode).conj() - s))
    return RealSection(v=v, s=s, type_residual=type_residual, reality_residual=reality)


def real_section_from_value(
    t: QuaternionicTriple, a0: np.ndarray, z0: ZetaLike
) -> tuple[np.ndarray, float]:
    """Base value a of the real section with v(z0) = a0, and |v(z0) - a0|."""
    a0 = _check_type_10(t, a0)
    zeta = as_param(z0).z
    j1 = t.j1.entries
    a = (a0 + zeta * (j1 @ a0.conj())) / (1 + abs(zeta) ** 2)
    return a, float(np.linalg.norm(a - zeta * (j1 @ a.conj()) - a0))


def hklr_metric(
    f: HoloSympFamily, a: np.ndarray, b: np.ndarray, triple: QuaternionicTriple | None = None
) -> float:
    """(omega_+(a, J_1 conj(b)) - omega_+(J_1 conj(a), b)) / 2 for (1,0)-vectors a, b."""
    t = triple_from_family(f) if triple is None else triple
    a, b = _check_type_10(t, a), _check_type_10(t, b)
    j1 = t.j1.entries
    value = 0.5 * (f.omega_plus(a, j1 @ b.conj()) - f.omega_plus(j1 @ a.conj(), b))
    scale = _scale(f.omega_plus) * max(1.0, float(np.linalg.norm(a) * np.linalg.norm(b)))
    if abs(value.imag) > settings.tolerances.algebra * scale:
        raise InconsistentFamilyError("section metric is real", abs(value.imag))
    return value.real


def o2_polynomial_check(
    f: HoloSympFamily,
    a: np.ndarray,
    b: np.ndarray,
    nodes: Sequence[complex],
    triple: QuaternionicTriple | None = None,
) -> O2FitReport:
    """Fit P(z) = 2iz varpi(z)(s_a(z), s_b(z)) by a quadratic through the first three nodes."""
    zetas = [complex(z) for z in nodes]
    if len(zetas) < 4 or len(set(zetas)) != len(zetas) or any(z == 0 for z in zetas):
        raise InputError("at least four distinct finite nonzero nodes are required")
    t = triple_from_family(f) if triple is None else triple
    a, b = _check_type_10(t, a), _check_type_10(t, b)
    values, identity = [], 0.0
    for zeta in zetas:
        sa, sb = real_section(t, a, zeta), real_section(t, b, zeta)
        value = 2j * zeta * varpi(f, zeta)(sa.s, sb.s)
        values.append(value)
        identity = max(identity, abs(value - f.omega_plus(sa.v, sb.v)))
    fit_nodes = np.array(zetas[:3])
    coefficients = np.linalg.solve(np.vander(fit_nodes, 3, increasing=True), np.array(values[:3]))
    held_out = np.array(zetas[3:])
    predicted = np.polynomial.polynomial.polyval(held_out, coefficients)
    scale = max(1.0, max(abs(v) for v in values))
    extrapolation = float(np.max(np.abs(predicted - np.array(values[3:])))) / scale
    return O2FitReport(
        coefficients=[complex(c) for c in coefficients],
        extrapolation_residual=extrapolation,
        identity_residual=identity / scale,
        constant_term=complex(coefficients[0]),
    )

