"""Pydantic schemas for structure files, check records and reports.

Numeric value types (2-forms, operators, subspaces) live next to the linear
algebra in ``src.twistor.form_algebra``; this module only holds the data that
crosses the file/CLI boundary.
"""

from __future__ import annotations

import itertools
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator

STRUCTURE_FORMAT_VERSION = 1


class Signature(BaseModel):
    """Counts of positive, negative and null eigenvalues of a metric."""

    positive: int = Field(..., ge=0, description="Number of positive eigenvalues p")
    negative: int = Field(..., ge=0, description="Number of negative eigenvalues q")
    zero: int = Field(default=0, ge=0, description="Number of null directions")

    @property
    def dim(self) -> int:
        return self.positive + self.negative + self.zero

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.positive, self.negative, self.zero)

    def is_quaternionic(self) -> bool:
        """True for a nondegenerate signature (p, q) with p, q multiples of four."""
        return self.zero == 0 and self.positive % 4 == 0 and self.negative % 4 == 0


# --- Charts ---
class ChartSpec(BaseModel):
    """A coordinate box sampled on a regular grid."""

    dim: int = Field(..., gt=0, description="Real dimension 4r")
    coords: list[str] = Field(default_factory=list, description="Coordinate names")
    box: list[tuple[float, float]] = Field(..., description="Per-axis [low, high]")
    grid: list[int] = Field(..., description="Per-axis sample count (>= 3)")

    @model_validator(mode="after")
    def _check_shape(self) -> ChartSpec:
        if self.dim % 4:
            raise ValueError(f"chart dimension must be a multiple of 4, got {self.dim}")
        if not self.coords:
            self.coords = [f"x{k}" for k in range(self.dim)]
        for name, seq in (("coords", self.coords), ("box", self.box), ("grid", self.grid)):
            if len(seq) != self.dim:
                raise ValueError(f"chart.{name} must have {self.dim} entries, got {len(seq)}")
        for axis, (lo, hi) in enumerate(self.box):
            if not hi > lo:
                raise ValueError(f"chart.box[{axis}] is degenerate: [{lo}, {hi}]")
        for axis, count in enumerate(self.grid):
            if count < 3:
                raise ValueError(f"chart.grid[{axis}] must be >= 3, got {count}")
        return self

    @property
    def r(self) -> int:
        return self.dim // 4

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.box], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.box], dtype=float)

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def axes(self, refine: int = 1) -> list[np.ndarray]:
        """Sample coordinates per axis; ``refine`` multiplies the interval count."""
        return [
            np.linspace(lo, hi, (count - 1) * refine + 1)
            for (lo, hi), count in zip(self.box, self.grid, strict=True)
        ]

    def grid_points(self, refine: int = 1) -> list[np.ndarray]:
        """All grid points in row-major order (last axis fastest)."""
        return [np.array(p) for p in itertools.product(*self.axes(refine))]

    def contains(self, x: np.ndarray, slack: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        span = self.upper - self.lower
        return bool(
            x.shape == (self.dim,)
            and np.all(x >= self.lower - slack * span)
            and np.all(x <= self.upper + slack * span)
        )


# --- Check Records and Reports ---
class CheckRecord(BaseModel):
    """Outcome of one identity check, aggregated over a sweep."""

    name: str = Field(..., description="Check name, e.g. 'closedness[omega_1]'")
    anchor: str = Field(..., description="The identity being certified, written out")
    residual: float | None = Field(
        default=None, description="Worst residual seen (None when the check raised)"
    )
    tolerance: float = Field(..., description="Pass threshold")
    passed: bool = Field(..., description="True iff residual <= tolerance everywhere")
    worst_location: list[float] | None = Field(
        default=None, description="Chart point of the worst residual"
    )
    worst_zeta: list[float] | None = Field(
        default=None, description="[re, im] of the twistor parameter of the worst residual"
    )
    message: str | None = Field(default=None, description="Error message, if any")


class FieldReport(BaseModel):
    """All check records of a chart sweep plus the observed signature."""

    checks: list[CheckRecord] = Field(default_factory=list)
    signature: Signature | None = Field(
        default=None, description="Metric signature, if constant over the chart"
    )

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed_checks(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]


class RunReport(BaseModel):
    """Self-describing record of one CLI run."""

    tool_version: str = Field(..., description="hk-twistor version")
    command: str = Field(..., description="CLI subcommand")
    input_digest: str | None = Field(default=None, description="sha256 of the input file")
    seed: int | None = Field(default=None, description="Sampling seed")
    config: dict[str, Any] = Field(default_factory=dict, description="Echo of settings")
    checks: list[CheckRecord] = Field(default_factory=list)
    signature: Signature | None = Field(default=None)
    passed: bool = Field(..., description="Aggregate pass flag")
    wall_time: float = Field(default=0.0, description="Seconds (excluded from determinism)")


# --- Structure Files ---
class MonomialSpec(BaseModel):
    """coefficient * prod_k x_k ** exponents[k]."""

    coefficient: float
    exponents: list[int] = Field(..., description="One non-negative exponent per coordinate")

    @field_validator("exponents")
    @classmethod
    def _non_negative(cls, value: list[int]) -> list[int]:
        if any(e < 0 for e in value):
            raise ValueError(f"exponents must be non-negative, got {value}")
        return value


class EntryTerm(BaseModel):
    """One upper-triangle entry (i < j) of a 2-form field: (re + i*im) / den."""

    i: int = Field(..., ge=0)
    j: int = Field(..., ge=0)
    re: list[MonomialSpec] = Field(default_factory=list, description="Real part numerator")
    im: list[MonomialSpec] = Field(default_factory=list, description="Imaginary part numerator")
    den: list[MonomialSpec] | None = Field(
        default=None, description="Optional real denominator polynomial"
    )

    @model_validator(mode="after")
    def _upper_triangle(self) -> EntryTerm:
        if not self.i < self.j:
            raise ValueError(f"entry terms must have i < j, got ({self.i}, {self.j})")
        return self

    def monomials(self) -> list[MonomialSpec]:
        return [*self.re, *self.im, *(self.den or [])]


class FormSpec(BaseModel):
    """An explicit 2-form field given by its upper-triangle entry terms."""

    terms: list[EntryTerm] = Field(default_factory=list)


class BuiltinSpec(BaseModel):
    """Reference to a zoo model by name and parameters."""

    name: str
    params: dict[str, Any] = Field(default_factory=dict)


class FormsSpec(BaseModel):
    """Exactly one of {omega_plus, omega_3}, {omega_1, omega_2, omega_3}, {builtin}."""

    omega_plus: FormSpec | None = None
    omega_1: FormSpec | None = None
    omega_2: FormSpec | None = None
    omega_3: FormSpec | None = None
    builtin: BuiltinSpec | None = None

    @model_validator(mode="after")
    def _one_layout(self) -> FormsSpec:
        present = {
            name
            for name in ("omega_plus", "omega_1", "omega_2", "omega_3", "builtin")
            if getattr(self, name) is not None
        }
        allowed = (
            {"omega_plus", "omega_3"},
            {"omega_1", "omega_2", "omega_3"},
            {"builtin"},
        )
        if present not in allowed:
            raise ValueError(
                "forms must be {omega_plus, omega_3}, {omega_1, omega_2, omega_3} "
                f"or {{builtin}}; got {sorted(present)}"
            )
        return self


class StructureFile(BaseModel):
    """Input file describing a holomorphic symplectic family on a chart."""

    format_version: int = Field(default=STRUCTURE_FORMAT_VERSION)
    dim_quaternionic: int = Field(..., ge=1, description="r, with real dimension 4r")
    chart: ChartSpec
    forms: FormsSpec

    @field_validator("format_version")
    @classmethod
    def _known_version(cls, value: int) -> int:
        if value != STRUCTURE_FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {value}")
        return value

    @model_validator(mode="after")
    def _consistent_dimensions(self) -> StructureFile:
        n = 4 * self.dim_quaternionic
        if self.chart.dim != n:
            raise ValueError(f"chart.dim {self.chart.dim} != 4 * dim_quaternionic = {n}")
        for name in ("omega_plus", "omega_1", "omega_2", "omega_3"):
            form: FormSpec | None = getattr(self.forms, name)
            if form is None:
                continue
            for term in form.terms:
                if term.j >= n:
                    raise ValueError(f"forms.{name}: index ({term.i}, {term.j}) out of range")
                for mono in term.monomials():
                    if len(mono.exponents) != n:
                        raise ValueError(
                            f"forms.{name}: exponent tuple length {len(mono.exponents)} != {n}"
                        )
        return self


# --- Reconstructed Metrics ---
class MetricSample(BaseModel):
    """Reconstructed metric at one chart point."""

    point: list[float]
    metric: list[list[float]]
    signature: Signature


class MetricGrid(BaseModel):
    """Grid-sampled metric produced by ``hk reconstruct``."""

    coords: list[str]
    grid: list[int]
    samples: list[MetricSample] = Field(default_factory=list, description="Row-major order")
    signature: Signature | None = Field(
        default=None, description="Common signature, if constant over the chart"
    )
