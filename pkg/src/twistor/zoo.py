"""Built-in pseudo-hyper-Kaehler models with closed-form ground truth.

Every model validates itself when it is built: the ground truth must satisfy
the quaternion relations and metric compatibility at every grid point, and
the three forms must be closed.

Gibbons-Hawking models use the single-centre Dirac gauge

    A = m (X dY - Y dX) / (rho (rho + Z)),   (X, Y, Z) = x - p,  rho = |x - p|,

which is singular on the half-line below each centre. Charts must avoid
those half-lines; nothing is patched.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from src.core.configs import settings
from src.core.errors import ChartError, InconsistentFamilyError, InputError, UnknownModelError
from src.models.schemas import ChartSpec, Signature
from src.twistor import constants as names
from src.twistor.chart_fields import closedness_check
from src.twistor.fields import BuiltinField, ConstantField, FamilyField, FormField
from src.twistor.form_algebra import LinOp, TwoForm, max_abs, signature_of
from src.twistor.pointwise import (
    PointStructure,
    QuaternionicTriple,
    SymplecticTriple,
    compatibility_residual,
    quaternion_residual,
)

# Closedness bound checked when a model with numeric derivatives is loaded.
LOAD_CLOSEDNESS_TOLERANCE = 1e-6
# Quaternion/compatibility bound for stored ground truth.
LOAD_IDENTITY_TOLERANCE = 1e-10


def _flat_block() -> np.ndarray:
    """omega_1, omega_2, omega_3 on R^4 with basis (x0, x1, x2, x3)."""
    w = np.zeros((3, 4, 4))
    for a, (i, j, k, l) in enumerate([(0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2)]):  # noqa: E741
        w[a, i, j] = w[a, k, l] = 1.0
    return w - w.transpose(0, 2, 1)


FLAT_FORMS = _flat_block()


# --- Domain Types ---
class ZooModel(BaseModel):
    """A named model: forms on a chart plus the structure they must reconstruct to."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    params: dict[str, Any]
    family: FamilyField
    forms: dict[str, FormField]
    expected_signature: Signature
    truth: Callable[[np.ndarray], PointStructure]

    @property
    def chart(self) -> ChartSpec:
        return self.family.chart

    def ground_truth(self, x: Sequence[float]) -> PointStructure:
        return self.truth(np.asarray(x, dtype=float))


def _structure(forms: np.ndarray, operators: np.ndarray, metric: np.ndarray) -> PointStructure:
    g = LinOp(entries=metric, real=True)
    return PointStructure(
        triple=QuaternionicTriple(
            j1=LinOp(entries=operators[0], real=True),
            j2=LinOp(entries=operators[1], real=True),
            j3=LinOp(entries=operators[2], real=True),
        ),
        metric=g,
        signature=signature_of(g),
        sympl=SymplecticTriple(
            w1=TwoForm(entries=forms[0]), w2=TwoForm(entries=forms[1]), w3=TwoForm(entries=forms[2])
        ),
    )


def _validate(model: ZooModel) -> ZooModel:
    """Load-time checks of the ground truth and of closedness."""
    chart = model.chart
    checked: set[bytes] = set()
    for x in chart.grid_points():
        truth = model.ground_truth(x)
        key = truth.metric.entries.tobytes() + truth.sympl.w1.entries.tobytes()
        if key in checked:
            continue
        checked.add(key)
        quaternion = quaternion_residual(*truth.triple.operators())
        if quaternion > LOAD_IDENTITY_TOLERANCE:
            raise InconsistentFamilyError(names.ANCHORS[names.CHECK_QUATERNION], quaternion)
        compat = compatibility_residual(truth.triple, truth.sympl, truth.metric)
        if compat > LOAD_IDENTITY_TOLERANCE * max(1.0, max_abs(truth.metric.entries)):
            raise InconsistentFamilyError(names.ANCHORS[names.CHECK_COMPATIBILITY], compat)
        for label, form in zip(("omega_1", "omega_2", "omega_3"), truth.sympl.forms(), strict=True):
            drift = max_abs(model.forms[label].evaluate(x) - form.entries)
            if drift > LOAD_IDENTITY_TOLERANCE:
                raise InconsistentFamilyError(f"{label} field matches the ground truth", drift)
        if truth.signature != model.expected_signature:
            raise InconsistentFamilyError(
                f"expected signature {model.expected_signature.as_tuple()}, "
                f"found {truth.signature.as_tuple()}",
                1.0,
            )
    for label, form in model.forms.items():
        record = closedness_check(form, chart, tol=LOAD_CLOSEDNESS_TOLERANCE, name=label)
        if not record.passed:
            raise InconsistentFamilyError(f"d {label} = 0", record.residual or float("inf"))
    logger.info(f"Loaded zoo model '{model.name}' {model.params} ({len(checked)} distinct points)")
    return model


def _box_chart(dim: int, coords: list[str] | None = None) -> ChartSpec:
    return ChartSpec(dim=dim, coords=coords or [], box=[(-1.0, 1.0)] * dim, grid=[3] * dim)


# --- Flat Models ---
def flat_split(r_plus: int, r_minus: int, chart: ChartSpec | None = None) -> ZooModel:
    """r_plus standard blocks followed by r_minus blocks with all three forms negated."""
    if r_plus < 0 or r_minus < 0 or r_plus + r_minus < 1:
        raise InputError(f"need r_plus, r_minus >= 0 and r_plus + r_minus >= 1, got {r_plus}, {r_minus}")
    r = r_plus + r_minus
    n = 4 * r
    chart = _box_chart(n) if chart is None else chart
    if chart.dim != n:
        raise InputError(f"chart dimension {chart.dim} does not match 4r = {n}")
    signs = [1.0] * r_plus + [-1.0] * r_minus
    forms = np.zeros((3, n, n))
    operators = np.zeros((3, n, n))
    for b, sign in enumerate(signs):
        block = slice(4 * b, 4 * b + 4)
        forms[:, block, block] = sign * FLAT_FORMS
        operators[:, block, block] = -FLAT_FORMS
    metric = np.diag(np.repeat(signs, 4))
    truth = _structure(forms, operators, metric)
    fields: dict[str, FormField] = {
        label: ConstantField(forms[a]) for a, label in enumerate(("omega_1", "omega_2", "omega_3"))
    }
    name = "flat" if r_minus == 0 else "flat-split"
    params = {"r": r_plus} if r_minus == 0 else {"r_plus": r_plus, "r_minus": r_minus}
    model = ZooModel(
        name=name,
        params=params,
        family=FamilyField.from_triple(fields["omega_1"], fields["omega_2"], fields["omega_3"], chart, name),
        forms=fields,
        expected_signature=Signature(positive=4 * r_plus, negative=4 * r_minus),
        truth=lambda x: truth,
    )
    return _validate(model)


def flat_hk(r: int = 1, chart: ChartSpec | None = None) -> ZooModel:
    """R^4r with the constant standard structure and g = identity."""
    if r < 1:
        raise InputError(f"r must be >= 1, got {r}")
    return flat_split(r, 0, chart)


# --- Gibbons-Hawking Models ---
Center = tuple[tuple[float, float, float], float]


def _normalize_centers(centers: Sequence[Any]) -> tuple[Center, ...]:
    """Accept [x, y, z, m], ((x, y, z), m) or {"position": [...], "mass": m}; sort canonically."""
    normalized = []
    for item in centers:
        if isinstance(item, dict):
            position, mass = item.get("position"), item.get("mass")
        elif len(item) == 4:
            position, mass = item[:3], item[3]
        elif len(item) == 2:
            position, mass = item
        else:
            raise InputError(f"cannot read centre {item!r}")
        if position is None or mass is None or len(position) != 3:
            raise InputError(f"centre {item!r} needs a 3-vector position and a mass")
        if not float(mass) > 0:
            raise InputError(f"centre masses must be positive, got {mass}")
        normalized.append((tuple(float(c) for c in position), float(mass)))
    return tuple(sorted(normalized))


def _check_chart_avoids_strings(chart: ChartSpec, centers: tuple[Center, ...]) -> None:
    margin = settings.tolerances.pole_clearance
    lower, upper = chart.lower[1:], chart.upper[1:]
    for position, _ in centers:
        p = np.array(position)
        in_column = np.all(p[:2] >= lower[:2] - margin) and np.all(p[:2] <= upper[:2] + margin)
        if in_column and p[2] >= lower[2] - margin:
            raise ChartError(
                "chart meets a Gibbons-Hawking centre or its Dirac string (the half-line below it)",
                [0.0, *position],
            )


def gibbons_hawking(
    epsilon: float = 1.0,
    centers: Sequence[Any] = (((0.0, 0.0, 0.0), 0.5),),
    chart: ChartSpec | None = None,
    name: str = "gibbons-hawking",
    params: dict[str, Any] | None = None,
) -> ZooModel:
    """Multi-centre metric with V = epsilon + sum m_i / |x - p_i| on (t, x1, x2, x3)."""
    if epsilon < 0:
        raise InputError(f"epsilon must be >= 0, got {epsilon}")
    normalized = _normalize_centers(centers)
    if epsilon == 0 and not normalized:
        raise InputError("V vanishes identically: give epsilon > 0 or at least one centre")
    chart = chart or ChartSpec(
        dim=4, coords=["t", "x1", "x2", "x3"], box=[(0.0, 1.0), (1.0, 2.0), (1.0, 2.0), (1.0, 2.0)], grid=[4] * 4
    )
    if chart.dim != 4:
        raise InputError(f"Gibbons-Hawking models are 4-dimensional, chart has dimension {chart.dim}")
    _check_chart_avoids_strings(chart, normalized)

    def coframe(x: np.ndarray) -> np.ndarray:
        v, a1, a2 = float(epsilon), 0.0, 0.0
        for position, mass in normalized:
            dx, dy, dz = x[1:] - np.array(position)
            rho = float(np.sqrt(dx * dx + dy * dy + dz * dz))
            v += mass / rho
            denominator = rho * (rho + dz)
            a1 -= mass * dy / denominator
            a2 += mass * dx / denominator
        e = np.diag([v**-0.5, v**0.5, v**0.5, v**0.5])
        e[0, 1:3] = np.array([a1, a2]) * v**-0.5
        return e

    def forms_at(x: np.ndarray) -> np.ndarray:
        e = coframe(x)
        return np.einsum("ji,ajk,kl->ail", e, FLAT_FORMS, e)

    def truth(x: np.ndarray) -> PointStructure:
        e = coframe(x)
        e_inv = np.linalg.inv(e)
        operators = -np.einsum("ij,ajk,kl->ail", e_inv, FLAT_FORMS, e)
        return _structure(forms_at(x), operators, e.T @ e)

    params = dict(params or {"epsilon": float(epsilon), "centers": [[*p, m] for p, m in normalized]})
    fields: dict[str, FormField] = {
        label: BuiltinField(4, lambda x, a=a: forms_at(x)[a], f"{name}:{label}", params)
        for a, label in enumerate(("omega_1", "omega_2", "omega_3"))
    }
    model = ZooModel(
        name=name,
        params=params,
        family=FamilyField.from_triple(fields["omega_1"], fields["omega_2"], fields["omega_3"], chart, name),
        forms=fields,
        expected_signature=Signature(positive=4, negative=0),
        truth=truth,
    )
    return _validate(model)


def taub_nut(epsilon: float = 1.0, mass: float = 0.5, chart: ChartSpec | None = None) -> ZooModel:
    """Single centre at the origin."""
    return gibbons_hawking(
        epsilon, [((0.0, 0.0, 0.0), mass)], chart, "taub-nut", {"epsilon": float(epsilon), "mass": float(mass)}
    )


def eguchi_hanson(mass: float = 0.5, separation: float = 1.0, chart: ChartSpec | None = None) -> ZooModel:
    """Two equal centres at (0, 0, +-separation/2) with epsilon = 0."""
    half = separation / 2
    chart = chart or ChartSpec(
        dim=4, coords=["t", "x1", "x2", "x3"], box=[(0.0, 1.0), (1.0, 2.0), (1.0, 2.0), (-0.5, 0.5)], grid=[4] * 4
    )
    return gibbons_hawking(
        0.0,
        [((0.0, 0.0, half), mass), ((0.0, 0.0, -half), mass)],
        chart,
        "eguchi-hanson",
        {"mass": float(mass), "separation": float(separation)},
    )


# --- Registry ---
_FACTORIES: dict[str, tuple[Callable[..., ZooModel], dict[str, Any]]] = {
    "flat": (flat_hk, {"r": 1}),
    "flat-split": (flat_split, {"r_plus": 1, "r_minus": 1}),
    "taub-nut": (taub_nut, {"epsilon": 1.0, "mass": 0.5}),
    "eguchi-hanson": (eguchi_hanson, {"mass": 0.5, "separation": 1.0}),
    "gibbons-hawking": (gibbons_hawking, {"epsilon": 1.0, "centers": [[0.0, 0.0, 0.0, 0.5]]}),
}


def list_models() -> list[str]:
    return sorted(_FACTORIES)


def get_model(name: str, params: dict[str, Any] | None = None, chart: ChartSpec | None = None) -> ZooModel:
    """Build a registered model; missing parameters take their documented defaults."""
    if name not in _FACTORIES:
        raise UnknownModelError(f"unknown model '{name}'; available: {', '.join(list_models())}")
    factory, defaults = _FACTORIES[name]
    unknown = set(params or {}) - set(defaults)
    if unknown:
        raise InputError(f"model '{name}' has no parameter(s) {sorted(unknown)}; known: {sorted(defaults)}")
    merged = {**defaults, **(params or {})}
    try:
        return factory(**merged, chart=chart)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad parameters for model '{name}': {exc}") from exc

