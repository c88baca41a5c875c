"""Chart-wide checks and sweeps.

Pointwise constructions are lifted to a coordinate box: exterior derivatives
and closedness, the Nijenhuis tensor of J(z), full verification sweeps and
metric reconstruction. Sweeps visit grid points in row-major order and
reduce their results in that order, whatever the worker count.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from src.core.configs import settings
from src.core.errors import ChartError, InputError, ReconstructionError, TwistorError
from src.models.schemas import (
    ChartSpec,
    CheckRecord,
    FieldReport,
    MetricGrid,
    MetricSample,
    Signature,
)
from src.twistor import constants as names
from src.twistor.constants import ANCHORS, anchor_for
from src.twistor.fields import FamilyField, FormField
from src.twistor.form_algebra import TwoForm, max_abs
from src.twistor.pointwise import (
    HoloSympFamily,
    PointStructure,
    ZetaLike,
    antipodal_j_residual,
    complex_structure_from_holsymp,
    extract_family,
    hklr_metric,
    holomorphic_metric_residual,
    holomorphic_projectors,
    holosymp_check,
    inverse_stereographic,
    j2_cross_check,
    kappa_linearity_check,
    kernel_graph_check,
    metric_from_family,
    o2_polynomial_check,
    omega3_type_check,
    real_section,
    recovery_residual,
    reconstruct_point,
    rotation_frame,
    sample_zetas,
    triple_from_family,
    varpi,
    varpi_conjugate_pullback_check,
    varpi_pullback_check,
    varpi_reality_residual,
)

if TYPE_CHECKING:
    from src.twistor.zoo import ZooModel

# Central-difference stencils: (offset, weight) pairs, weights per unit step.
_STENCILS: dict[int, tuple[tuple[int, float], ...]] = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1 / 12), (-1, -2 / 3), (1, 2 / 3), (2, -1 / 12)),
}

_IDENTITY_TO_CHECK = {anchor: name for name, anchor in ANCHORS.items()}

JField = Callable[[np.ndarray, ZetaLike], np.ndarray]


# --- Evaluation and Derivatives ---
def eval_field(form_field: FormField, x: Sequence[float], chart: ChartSpec | None = None) -> TwoForm:
    """The field's value at ``x``; ``x`` must lie in the chart box when a chart is given."""
    point = np.asarray(x, dtype=float)
    if point.shape != (form_field.dim,):
        raise InputError(f"point of shape {point.shape} does not match dimension {form_field.dim}")
    if chart is not None and not chart.contains(point):
        raise ChartError("point lies outside the chart box", point)
    return TwoForm(entries=form_field.evaluate(point))


def _stencil(order: int) -> tuple[tuple[int, float], ...]:
    if order not in _STENCILS:
        raise InputError(f"finite-difference order must be 2 or 4, got {order}")
    return _STENCILS[order]


def stencil_reach(h: float, order: int) -> float:
    """Largest coordinate offset used by a central-difference stencil."""
    return h * max(abs(o) for o, _ in _stencil(order))


def _require_interior(chart: ChartSpec | None, x: np.ndarray, reach: float) -> None:
    if chart is None:
        return
    if not chart.contains(x):
        raise ChartError("point lies outside the chart box", x)
    if np.any(x - chart.lower < reach) or np.any(chart.upper - x < reach):
        raise ChartError(f"point is closer than {reach:g} to the chart boundary", x)


def numeric_partials(
    function: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float, order: int = 2
) -> np.ndarray:
    """Central-difference partials: result[k] = d_k function at x."""
    stencil = _stencil(order)
    x = np.asarray(x, dtype=float)
    partials = []
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = h
        partials.append(sum(w * np.asarray(function(x + o * step)) for o, w in stencil) / h)
    return np.array(partials)


def exterior_derivative(
    form_field: FormField,
    x: Sequence[float],
    h: float | None = None,
    chart: ChartSpec | None = None,
    order: int | None = None,
) -> np.ndarray:
    """All components (dF)_ijk = d_i F_jk + d_j F_ki + d_k F_ij.

    Symbolic fields are differentiated exactly; other kinds use central
    differences with step ``h``, which needs ``x`` at least one stencil reach
    inside the box.
    """
    point = np.asarray(x, dtype=float)
    if form_field.symbolic:
        if chart is not None and not chart.contains(point):
            raise ChartError("point lies outside the chart box", point)
        p = form_field.partials(point)
    else:
        h = settings.finite_difference.closedness_step if h is None else h
        order = settings.finite_difference.order if order is None else order
        _require_interior(chart, point, stencil_reach(h, order))
        p = numeric_partials(form_field.evaluate, point, h, order)
    return p + p.transpose(2, 0, 1) + p.transpose(1, 2, 0)


def _sweep_points(chart: ChartSpec, reach: float) -> list[np.ndarray]:
    """Grid points whose stencil of the given reach stays inside the box."""
    lower, upper = chart.lower, chart.upper
    return [
        p for p in chart.grid_points() if np.all(p - lower >= reach) and np.all(upper - p >= reach)
    ]


def _strided(points: list[np.ndarray], count: int | None) -> list[np.ndarray]:
    """At most ``count`` points spread evenly through the canonical order."""
    if count is None or len(points) <= count:
        return points
    indices = sorted({int(round(k)) for k in np.linspace(0, len(points) - 1, count)})
    return [points[k] for k in indices]


# --- Check Aggregation ---
class _Worst:
    """Worst residual of one check, accumulated in canonical order."""

    def __init__(self, name: str, tolerance: float) -> None:
        self.name = name
        self.tolerance = tolerance
        self.residual: float | None = None
        self.location: np.ndarray | None = None
        self.zeta: complex | None = None
        self.message: str | None = None

    def add(self, residual: float, location: np.ndarray, zeta: complex | None = None) -> None:
        if not math.isfinite(residual):
            self.fail(f"non-finite residual {residual}", location, zeta)
            return
        if self.residual is None or residual > self.residual:
            self.residual, self.location, self.zeta = float(residual), location, zeta

    def fail(self, message: str, location: np.ndarray | None, zeta: complex | None = None) -> None:
        if self.message is None:
            self.message = message
            if location is not None:
                self.location, self.zeta = location, zeta

    def record(self) -> CheckRecord:
        passed = (
            self.message is None and self.residual is not None and self.residual <= self.tolerance
        )
        if self.residual is None and self.message is None:
            self.message = "no samples"
        return CheckRecord(
            name=self.name,
            anchor=anchor_for(self.name),
            residual=self.residual,
            tolerance=self.tolerance,
            passed=passed,
            worst_location=None if self.location is None else [float(v) for v in self.location],
            worst_zeta=None if self.zeta is None else [self.zeta.real, self.zeta.imag],
            message=self.message,
        )


@dataclass
class _PointResult:
    residuals: list[tuple[str, float, complex | None]] = field(default_factory=list)
    failures: list[tuple[str, str, complex | None]] = field(default_factory=list)
    signature: Signature | None = None


def _relative(residual: float, f: HoloSympFamily, zeta: complex | None = None) -> float:
    scale = max(1.0, max_abs(f.omega_plus.entries), max_abs(f.omega_3.entries))
    if zeta is not None and zeta != 0:
        scale *= max(1.0, abs(zeta), 1 / abs(zeta))
    return residual / scale


def _record_failure(result: _PointResult, exc: TwistorError, zeta: complex | None = None) -> None:
    result.failures.append((names.CHECK_RECONSTRUCTION, str(exc), zeta))
    identity = getattr(exc, "identity", None)
    if identity in _IDENTITY_TO_CHECK:
        result.failures.append((_IDENTITY_TO_CHECK[identity], str(exc), zeta))


def point_checks(f: HoloSympFamily, zetas: Sequence[complex], tol: float, seed: int) -> _PointResult:
    """Every pointwise identity at one point, at the given twistor parameters."""
    result = _PointResult()
    add = result.residuals.append

    report = holosymp_check(f.omega_plus)
    add((names.CHECK_HOLOMORPHIC_SYMPLECTIC, 0.0 if report.passed else 1.0, 0j))
    try:
        structure = metric_from_family(f, tol)
    except TwistorError as exc:
        _record_failure(result, exc)
        return result
    t, s, g = structure.triple, structure.sympl, structure.metric
    add((names.CHECK_RECONSTRUCTION, 0.0, None))
    for name in (names.CHECK_QUATERNION, names.CHECK_METRIC_CHAIN, names.CHECK_COMPATIBILITY):
        add((name, _relative(structure.residuals[name], f), None))
    add((names.CHECK_RECOVERY, _relative(recovery_residual(t, s, g), f), None))

    omega3 = omega3_type_check(f, t.j3)
    type_parts = [omega3.type_residual, omega3.wedge_plus or 0.0, omega3.wedge_minus or 0.0]
    add((names.CHECK_OMEGA3_TYPE, _relative(max(type_parts), f), None))
    result.signature = structure.signature

    try:
        kappa = kappa_linearity_check(f, zetas)
        square = max_abs(t.j1.entries @ t.j1.entries + np.eye(t.dim))
        add((names.CHECK_KAPPA_LINEARITY, max(_relative(kappa, f), square), None))
        add((names.CHECK_CROSS_CHECK, j2_cross_check(f, t), None))
    except TwistorError as exc:
        _record_failure(result, exc)

    rng = np.random.default_rng(seed)
    for zeta in zetas:
        try:
            add((names.CHECK_VARPI_REALITY, _relative(varpi_reality_residual(f, zeta), f, zeta), zeta))
            add((names.CHECK_ANTIPODAL_J, antipodal_j_residual(t, zeta), zeta))
            kernel_dim, graph = kernel_graph_check(f, t, zeta)
            add((names.CHECK_KERNEL_DIMENSION, float(abs(kernel_dim - f.dim // 2)), zeta))
            add((names.CHECK_GRAPH, graph, zeta))
            pullback = max(
                varpi_pullback_check(f, t.j1, zeta), varpi_conjugate_pullback_check(f, t.j1, zeta)
            )
            add((names.CHECK_PULLBACK, _relative(pullback, f, zeta), zeta))
            passed = holosymp_check(varpi(f, zeta)).passed
            add((names.CHECK_HOLOMORPHIC_SYMPLECTIC, 0.0 if passed else 1.0, zeta))
            frame = rotation_frame(t, s, zeta, tol=tol)
            add((names.CHECK_ROTATION_FRAME, frame.residual, zeta))
            holo = holomorphic_metric_residual(t, s, zeta, frame, rng)
            add((names.CHECK_HOLOMORPHIC_METRIC, _relative(holo, f), zeta))
        except TwistorError as exc:
            name = getattr(exc, "identity", None)
            check = _IDENTITY_TO_CHECK.get(name, names.CHECK_RECONSTRUCTION)
            result.failures.append((check, str(exc), zeta))
    return result


def _family_key(f: HoloSympFamily) -> bytes:
    return f.omega_plus.entries.tobytes() + f.omega_3.entries.tobytes()


def _map_unique(
    families: list[HoloSympFamily | None], work: Callable[[HoloSympFamily], object]
) -> list[object | None]:
    """Run ``work`` once per distinct family value, in first-appearance order."""
    keys = [None if f is None else _family_key(f) for f in families]
    unique: dict[bytes, HoloSympFamily] = {}
    for key, f in zip(keys, families, strict=True):
        if key is not None and f is not None and key not in unique:
            unique[key] = f
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        outputs = dict(zip(unique, pool.map(work, unique.values()), strict=True))
    return [None if key is None else outputs[key] for key in keys]


def _evaluate_families(
    family: FamilyField, points: list[np.ndarray]
) -> tuple[list[HoloSympFamily | None], list[tuple[np.ndarray, str]]]:
    families: list[HoloSympFamily | None] = []
    errors = []
    for x in points:
        try:
            families.append(family.family_at(x))
        except TwistorError as exc:
            families.append(None)
            errors.append((x, str(exc)))
            logger.warning(f"Could not evaluate {family.name} at {x.tolist()}: {exc}")
    return families, errors


# --- Chart Checks ---
def closedness_check(
    form_field: FormField,
    chart: ChartSpec,
    h: float | None = None,
    tol: float | None = None,
    name: str = names.CHECK_CLOSEDNESS,
    order: int | None = None,
) -> CheckRecord:
    """Max |dF| over the grid points where dF can be evaluated."""
    tol = settings.tolerances.closedness if tol is None else tol
    h = settings.finite_difference.closedness_step if h is None else h
    order = settings.finite_difference.order if order is None else order
    reach = 0.0 if form_field.symbolic else stencil_reach(h, order)
    worst = _Worst(name, tol)
    for x in _sweep_points(chart, reach):
        try:
            d = exterior_derivative(form_field, x, h=h, chart=chart, order=order)
        except TwistorError as exc:
            worst.fail(str(exc), x)
            continue
        worst.add(max_abs(d), x)
    record = worst.record()
    logger.debug(f"{name}: residual={record.residual}, passed={record.passed}")
    return record


def nijenhuis_tensor(
    j_field: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float, order: int = 2
) -> np.ndarray:
    """N[i, j, k], the i-th component of N_J(e_j, e_k), from central differences of J."""
    j = np.asarray(j_field(np.asarray(x, dtype=float)))
    dj = numeric_partials(j_field, x, h, order)  # dj[m, i, k] = d_m J^i_k
    return (
        np.einsum("mj,mik->ijk", j, dj)
        - np.einsum("mk,mij->ijk", j, dj)
        + np.einsum("im,kmj->ijk", j, dj)
        - np.einsum("im,jmk->ijk", j, dj)
    )


def _at_zeta(j_field: JField, zeta: ZetaLike) -> Callable[[np.ndarray], np.ndarray]:
    return lambda y: j_field(y, zeta)


def twistor_j_field(family: FamilyField) -> JField:
    """(x, z) -> J(z) at x, rebuilt from varpi(z) at x."""

    def j_at(x: np.ndarray, zeta: ZetaLike) -> np.ndarray:
        return complex_structure_from_holsymp(varpi(family.family_at(x), zeta)).entries

    return j_at


def nijenhuis_check(
    structure: FamilyField | JField,
    chart: ChartSpec | None = None,
    zetas: Sequence[ZetaLike] | None = None,
    h: float | None = None,
    tol: float | None = None,
    max_points: int | None = None,
) -> CheckRecord:
    """Max |N_J(e_j, e_k)| for J = J(z) over grid samples and twistor parameters.

    ``structure`` is either a family field (J(z) is rebuilt from varpi(z) at
    every stencil point) or a callable ``(x, z) -> J``.
    """
    if isinstance(structure, FamilyField):
        chart = structure.chart if chart is None else chart
        j_field = twistor_j_field(structure)
    else:
        j_field = structure
    if chart is None:
        raise InputError("a chart is required for a callable complex structure field")
    zetas = list(settings.sampling.nijenhuis_zetas if zetas is None else zetas)
    h = settings.finite_difference.nijenhuis_step if h is None else h
    tol = settings.tolerances.nijenhuis if tol is None else tol
    order = settings.finite_difference.order
    max_points = settings.sampling.nijenhuis_points if max_points is None else max_points
    worst = _Worst(names.CHECK_NIJENHUIS, tol)
    for x in _strided(_sweep_points(chart, stencil_reach(h, order)), max_points):
        for z in zetas:
            zeta = None if z is None else complex(z)
            try:
                tensor = nijenhuis_tensor(_at_zeta(j_field, z), x, h, order)
            except TwistorError as exc:
                worst.fail(f"reconstruction failed on the stencil: {exc}", x, zeta)
                continue
            worst.add(max_abs(tensor), x, zeta)
    record = worst.record()
    logger.debug(f"nijenhuis: residual={record.residual}, passed={record.passed}")
    return record


def _signature_record(signatures: list[tuple[np.ndarray, Signature]]) -> tuple[CheckRecord, Signature | None]:
    worst = _Worst(names.CHECK_SIGNATURE, 0.0)
    if not signatures:
        return worst.record(), None
    reference = signatures[0][1]
    mismatches = 0
    for x, sig in signatures:
        if sig != reference or not sig.is_quaternionic():
            if mismatches == 0:
                worst.fail(f"signature {sig.as_tuple()} differs from {reference.as_tuple()} "
                           "or is not (4a, 4b)", x)
            mismatches += 1
    worst.add(float(mismatches), signatures[0][0])
    if not reference.is_quaternionic() and worst.message is None:
        worst.fail(f"signature {reference.as_tuple()} is not of the form (4a, 4b)", signatures[0][0])
    return worst.record(), (reference if mismatches == 0 else None)


def verify_chart(
    family: FamilyField,
    *,
    tol: float | None = None,
    zeta_samples: int | None = None,
    seed: int | None = None,
    nijenhuis_zetas: Sequence[ZetaLike] | None = None,
) -> FieldReport:
    """Run every pointwise identity at every grid point plus the chart-level checks."""
    started = time.perf_counter()
    tol = settings.tolerances.identity if tol is None else tol
    seed = settings.sampling.seed if seed is None else seed
    zeta_samples = settings.sampling.zeta_samples if zeta_samples is None else zeta_samples
    chart = family.chart
    points = chart.grid_points()
    zetas = sample_zetas(np.random.default_rng(seed), zeta_samples)
    logger.info(
        f"Verifying {family.name} on {len(points)} grid points with {len(zetas)} zeta samples"
    )

    tolerances = {
        names.CHECK_HOLOMORPHIC_SYMPLECTIC: 0.0,
        names.CHECK_RECONSTRUCTION: 0.0,
        names.CHECK_QUATERNION: tol,
        names.CHECK_METRIC_CHAIN: tol,
        names.CHECK_COMPATIBILITY: tol,
        names.CHECK_RECOVERY: tol,
        names.CHECK_OMEGA3_TYPE: tol,
        names.CHECK_KAPPA_LINEARITY: tol,
        names.CHECK_CROSS_CHECK: tol,
        names.CHECK_VARPI_REALITY: settings.tolerances.algebra,
        names.CHECK_ANTIPODAL_J: settings.tolerances.algebra,
        names.CHECK_KERNEL_DIMENSION: 0.0,
        names.CHECK_GRAPH: tol,
        names.CHECK_PULLBACK: tol,
        names.CHECK_ROTATION_FRAME: tol,
        names.CHECK_HOLOMORPHIC_METRIC: tol,
    }
    accumulators = {name: _Worst(name, value) for name, value in tolerances.items()}

    families, errors = _evaluate_families(family, points)
    for x, message in errors:
        accumulators[names.CHECK_RECONSTRUCTION].fail(message, x)
    results = _map_unique(families, lambda f: point_checks(f, zetas, tol, seed))

    signatures: list[tuple[np.ndarray, Signature]] = []
    for x, result in zip(points, results, strict=True):
        if not isinstance(result, _PointResult):
            continue
        for name, residual, zeta in result.residuals:
            accumulators[name].add(residual, x, zeta)
        for name, message, zeta in result.failures:
            accumulators[name].fail(message, x, zeta)
            logger.warning(f"{name} failed at {x.tolist()}: {message}")
        if result.signature is not None:
            signatures.append((x, result.signature))

    checks = [acc.record() for acc in accumulators.values()]
    signature_record, signature = _signature_record(signatures)
    checks.append(signature_record)
    for label, component in family.components().items():
        checks.append(closedness_check(component, chart, name=f"{names.CHECK_CLOSEDNESS}[{label}]"))
    checks.append(nijenhuis_check(family, zetas=nijenhuis_zetas))

    report = FieldReport(checks=checks, signature=signature)
    logger.info(
        f"Verification of {family.name} finished in {time.perf_counter() - started:.2f}s: "
        f"{'passed' if report.passed else 'failed ' + ', '.join(report.failed_checks())}"
    )
    return report


# --- Reconstruction ---
def reconstruct_metric_field(family: FamilyField, tol: float | None = None) -> MetricGrid:
    """The reconstructed metric at every grid point, in row-major order."""
    chart = family.chart
    points = chart.grid_points()
    families, errors = _evaluate_families(family, points)
    if errors:
        x, message = errors[0]
        raise ChartError(f"cannot evaluate the family at {x.tolist()}: {message}", x)

    def work(f: HoloSympFamily) -> PointStructure | TwistorError:
        try:
            return metric_from_family(f, tol)
        except TwistorError as exc:
            return exc

    samples = []
    for x, outcome in zip(points, _map_unique(families, work), strict=True):
        if isinstance(outcome, TwistorError):
            raise ReconstructionError(f"reconstruction failed at {x.tolist()}: {outcome}", x) from outcome
        assert isinstance(outcome, PointStructure)
        samples.append(
            MetricSample(
                point=[float(v) for v in x],
                metric=outcome.metric.entries.tolist(),
                signature=outcome.signature,
            )
        )
    distinct = {s.signature.as_tuple() for s in samples}
    signature = samples[0].signature if len(distinct) == 1 else None
    logger.info(f"Reconstructed the metric of {family.name} at {len(samples)} points")
    return MetricGrid(coords=chart.coords, grid=chart.grid, samples=samples, signature=signature)


def roundtrip_check(model: ZooModel, chart: ChartSpec | None = None) -> list[CheckRecord]:
    """Extract the family from the ground truth, reconstruct, and compare."""
    chart = model.chart if chart is None else chart
    tol = settings.tolerances.roundtrip
    metric = _Worst(names.CHECK_ROUNDTRIP_METRIC, tol)
    operators = _Worst(names.CHECK_ROUNDTRIP_OPERATORS, tol)
    cache: dict[bytes, tuple[float, float] | TwistorError] = {}
    for x in chart.grid_points():
        truth = model.ground_truth(x)
        key = b"".join(op.entries.tobytes() for op in (*truth.triple.operators(), truth.metric))
        if key not in cache:
            try:
                rebuilt = reconstruct_point(extract_family(truth.triple, truth.sympl))
            except TwistorError as exc:
                cache[key] = exc
            else:
                scale = max(1.0, max_abs(truth.metric.entries))
                metric_error = max_abs(rebuilt.metric.entries - truth.metric.entries) / scale
                operator_error = max(
                    a.distance(b)
                    for a, b in zip(rebuilt.triple.operators(), truth.triple.operators(), strict=True)
                )
                cache[key] = (metric_error, operator_error)
        outcome = cache[key]
        if isinstance(outcome, TwistorError):
            metric.fail(str(outcome), x)
            operators.fail(str(outcome), x)
            continue
        metric.add(outcome[0], x)
        operators.add(outcome[1], x)
    return [metric.record(), operators.record()]



# --- Single-Point Batches ---
SECTION_NODES: tuple[complex, ...] = (1, 2, 1j, 1 + 1j, 3, -1, 2j, 0.5 - 0.5j)

SweepRow = tuple[complex, str, float]


def family_at_point(family: FamilyField, x: Sequence[float] | None = None) -> tuple[np.ndarray, HoloSympFamily]:
    """The family at ``x`` (the chart centre by default), which must lie in the box."""
    chart = family.chart
    point = chart.center() if x is None else np.asarray(x, dtype=float)
    if point.shape != (chart.dim,):
        raise InputError(f"point has {point.size} coordinates, the chart has {chart.dim}")
    if not chart.contains(point):
        raise ChartError("point lies outside the chart box", point)
    return point, family.family_at(point)


def zeta_grid(n: int) -> list[complex]:
    """n^2 parameters: polar angles (k + 1/2) pi / n times azimuths 2 pi j / n."""
    if n < 1:
        raise InputError(f"zeta grid size must be positive, got {n}")
    zetas = []
    for k in range(n):
        polar = (k + 0.5) * math.pi / n
        for j in range(n):
            azimuth = 2 * math.pi * j / n
            c = (math.sin(polar) * math.cos(azimuth), math.sin(polar) * math.sin(azimuth), math.cos(polar))
            zetas.append(inverse_stereographic(c).z)
    return zetas


def zeta_sweep(family: FamilyField, x: Sequence[float] | None, n: int) -> list[SweepRow]:
    """Kernel dimension, reality residual, frame residual and theta over a zeta grid."""
    point, f = family_at_point(family, x)
    structure = metric_from_family(f)
    t, s = structure.triple, structure.sympl
    rows: list[SweepRow] = []
    for zeta in zeta_grid(n):
        kernel_dim, _ = kernel_graph_check(f, t, zeta)
        frame = rotation_frame(t, s, zeta, tol=math.inf)
        rows.append((zeta, names.CHECK_KERNEL_DIMENSION, float(kernel_dim)))
        rows.append((zeta, names.CHECK_VARPI_REALITY, _relative(varpi_reality_residual(f, zeta), f, zeta)))
        rows.append((zeta, names.CHECK_ROTATION_FRAME, frame.residual))
        rows.append((zeta, "theta", frame.theta))
    logger.info(f"Swept {n * n} zeta values at {point.tolist()}")
    return rows


def section_checks(
    family: FamilyField,
    x: Sequence[float] | None = None,
    count: int = 10,
    seed: int | None = None,
    nodes: Sequence[complex] = SECTION_NODES,
) -> list[CheckRecord]:
    """Real sections, the quadratic pairing and the section metric for random (1,0) pairs."""
    if count < 0:
        raise InputError(f"count must be non-negative, got {count}")
    if count == 0:
        return []
    seed = settings.sampling.seed if seed is None else seed
    tolerances = settings.tolerances
    point, f = family_at_point(family, x)
    accumulators = {
        names.CHECK_SECTION_TYPE: _Worst(names.CHECK_SECTION_TYPE, tolerances.section),
        names.CHECK_SECTION_REALITY: _Worst(names.CHECK_SECTION_REALITY, tolerances.section),
        names.CHECK_O2_POLYNOMIAL: _Worst(names.CHECK_O2_POLYNOMIAL, tolerances.o2_fit),
        names.CHECK_O2_IDENTITY: _Worst(names.CHECK_O2_IDENTITY, tolerances.section),
        names.CHECK_HKLR: _Worst(names.CHECK_HKLR, tolerances.section),
    }
    try:
        t = triple_from_family(f)
    except TwistorError as exc:
        for acc in accumulators.values():
            acc.fail(str(exc), point)
        return [acc.record() for acc in accumulators.values()]

    # metric through omega_3 and J_3, independent of the omega_+ formula under test
    g = f.omega_3.entries.real @ t.j3.entries
    p10, _ = holomorphic_projectors(t.j3)
    rng = np.random.default_rng(seed)
    n = t.dim
    for _ in range(count):
        a, b = (p10 @ (rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(2))
        size = max(1.0, float(np.linalg.norm(a)))
        for zeta in nodes:
            section = real_section(t, a, zeta)
            accumulators[names.CHECK_SECTION_TYPE].add(section.type_residual / size, point, zeta)
            if section.reality_residual is not None:
                accumulators[names.CHECK_SECTION_REALITY].add(section.reality_residual / size, point, zeta)
        try:
            fit = o2_polynomial_check(f, a, b, nodes, triple=t)
            accumulators[names.CHECK_O2_POLYNOMIAL].add(fit.extrapolation_residual, point)
            accumulators[names.CHECK_O2_IDENTITY].add(fit.identity_residual, point)
            value = hklr_metric(f, a, b, triple=t)
        except TwistorError as exc:
            accumulators[names.CHECK_HKLR].fail(str(exc), point)
            continue
        xa, xb = 2 * a.real, 2 * b.real
        scale = max(1.0, max_abs(g)) * max(1.0, float(np.linalg.norm(a) * np.linalg.norm(b)))
        accumulators[names.CHECK_HKLR].add(abs(value - float(xa @ g @ xb)) / scale, point)
    logger.info(f"Checked {count} section pairs of {family.name} at {point.tolist()}")
    return [acc.record() for acc in accumulators.values()]
