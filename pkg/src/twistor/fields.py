"""Form fields on a coordinate chart.

A FormField maps chart points to antisymmetric matrices. Polynomial and
rational fields carry exact partial derivatives; builtin and grid-sampled
fields are differentiated numerically by ``chart_fields``.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable, Sequence
from typing import Any, Literal

import numpy as np
from loguru import logger
from scipy.interpolate import RegularGridInterpolator

from src.core.configs import settings
from src.core.errors import ChartError, InputError
from src.models.schemas import ChartSpec, FormSpec, MonomialSpec
from src.twistor.form_algebra import TwoForm, max_abs
from src.twistor.pointwise import HoloSympFamily

FieldKind = Literal["constant", "polynomial", "rational", "builtin", "grid", "combination"]

# Upper bound on the number of probe points used for pole detection.
MAX_POLE_PROBES = 200_000


# --- Polynomials ---
class Polynomial:
    """Multivariate polynomial with complex coefficients over integer exponent tuples."""

    __slots__ = ("coefficients", "exponents", "nvars")

    def __init__(self, nvars: int, terms: Iterable[tuple[Sequence[int], complex]] = ()) -> None:
        merged: dict[tuple[int, ...], complex] = {}
        for exps, coef in terms:
            key = tuple(int(e) for e in exps)
            if len(key) != nvars:
                raise InputError(f"exponent tuple {key} has length {len(key)}, expected {nvars}")
            if any(e < 0 for e in key):
                raise InputError(f"negative exponent in {key}")
            merged[key] = merged.get(key, 0j) + complex(coef)
        items = sorted((k, c) for k, c in merged.items() if c != 0)
        self.nvars = nvars
        self.exponents = np.array([k for k, _ in items], dtype=int).reshape(len(items), nvars)
        self.coefficients = np.array([c for _, c in items], dtype=complex)

    @classmethod
    def from_monomials(
        cls, nvars: int, monomials: Iterable[MonomialSpec], scale: complex = 1.0
    ) -> Polynomial:
        return cls(nvars, ((m.exponents, scale * m.coefficient) for m in monomials))

    @classmethod
    def constant(cls, nvars: int, value: complex) -> Polynomial:
        return cls(nvars, [((0,) * nvars, value)])

    def __add__(self, other: Polynomial) -> Polynomial:
        return Polynomial(self.nvars, [*self.terms(), *other.terms()])

    def terms(self) -> list[tuple[tuple[int, ...], complex]]:
        return [
            (tuple(int(e) for e in row), complex(c))
            for row, c in zip(self.exponents, self.coefficients, strict=True)
        ]

    @property
    def is_zero(self) -> bool:
        return self.coefficients.size == 0

    def __call__(self, x: np.ndarray) -> complex:
        if self.is_zero:
            return 0j
        x = np.asarray(x, dtype=float)
        return complex(self.coefficients @ np.prod(np.power(x, self.exponents), axis=1))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Values at the rows of ``points``."""
        points = np.asarray(points, dtype=float)
        if self.is_zero:
            return np.zeros(points.shape[0], dtype=complex)
        powers = np.prod(np.power(points[:, None, :], self.exponents[None, :, :]), axis=2)
        return powers @ self.coefficients

    def derivative(self, k: int) -> Polynomial:
        """Exact partial derivative with respect to variable ``k``."""
        terms = []
        for exps, coef in self.terms():
            if exps[k]:
                lowered = list(exps)
                lowered[k] -= 1
                terms.append((lowered, coef * exps[k]))
        return Polynomial(self.nvars, terms)


# --- Form Fields ---
class FormField(ABC):
    """A 2-form valued function on a chart."""

    kind: FieldKind

    def __init__(self, dim: int) -> None:
        if dim <= 0 or dim % 2:
            raise InputError(f"form field dimension must be positive and even, got {dim}")
        self.dim = dim

    @property
    def symbolic(self) -> bool:
        """True when ``partials`` is exact."""
        return False

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Antisymmetric complex matrix at ``x``."""

    def partials(self, x: np.ndarray) -> np.ndarray:
        """Array P with P[k, i, j] = d_k F_ij (symbolic fields only)."""
        raise InputError(f"{self.kind} fields have no exact derivatives")

    def check_poles(self, chart: ChartSpec) -> None:
        """Raise ChartError if the field has a pole on or near the closed box."""

    def describe(self) -> str:
        return f"{self.kind} field of dimension {self.dim}"


class ConstantField(FormField):
    """The same matrix at every point."""

    kind: FieldKind = "constant"

    def __init__(self, entries: np.ndarray | TwoForm) -> None:
        arr = entries.entries if isinstance(entries, TwoForm) else TwoForm(entries=entries).entries
        super().__init__(arr.shape[0])
        self.entries = arr

    @property
    def symbolic(self) -> bool:
        return True

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.entries

    def partials(self, x: np.ndarray) -> np.ndarray:
        return np.zeros((self.dim, self.dim, self.dim), dtype=complex)


class _RationalEntry:
    """num / den at index (i, j), den real and optional."""

    __slots__ = ("den", "den_partials", "i", "j", "num", "num_partials")

    def __init__(self, i: int, j: int, num: Polynomial, den: Polynomial | None) -> None:
        self.i, self.j, self.num, self.den = i, j, num, den
        self.num_partials = [num.derivative(k) for k in range(num.nvars)]
        self.den_partials = None if den is None else [den.derivative(k) for k in range(den.nvars)]


class PolynomialField(FormField):
    """Entries given as sums of (polynomial + i polynomial) / polynomial terms."""

    def __init__(self, dim: int, entries: Iterable[_RationalEntry]) -> None:
        super().__init__(dim)
        self.entries = list(entries)
        for entry in self.entries:
            if not 0 <= entry.i < entry.j < dim:
                raise InputError(f"entry ({entry.i}, {entry.j}) is not an upper-triangle index")
        self.kind = "rational" if any(e.den is not None for e in self.entries) else "polynomial"

    @classmethod
    def from_spec(cls, dim: int, spec: FormSpec) -> PolynomialField:
        entries = []
        for term in spec.terms:
            num = Polynomial.from_monomials(dim, term.re) + Polynomial.from_monomials(
                dim, term.im, scale=1j
            )
            den = None if term.den is None else Polynomial.from_monomials(dim, term.den)
            if den is not None and den.is_zero:
                raise InputError(f"entry ({term.i}, {term.j}) has a zero denominator")
            entries.append(_RationalEntry(term.i, term.j, num, den))
        return cls(dim, entries)

    @classmethod
    def from_constant(cls, entries: np.ndarray) -> PolynomialField:
        """Constant monomials for every nonzero upper-triangle entry."""
        arr = TwoForm(entries=entries).entries
        n = arr.shape[0]
        terms = [
            _RationalEntry(i, j, Polynomial.constant(n, arr[i, j]), None)
            for i, j in itertools.combinations(range(n), 2)
            if arr[i, j] != 0
        ]
        return cls(n, terms)

    @property
    def symbolic(self) -> bool:
        return True

    def _entry_value(self, entry: _RationalEntry, x: np.ndarray) -> complex:
        value = entry.num(x)
        if entry.den is None:
            return value
        den = entry.den(x).real
        if abs(den) <= settings.tolerances.pole_clearance:
            raise ChartError(f"denominator of entry ({entry.i}, {entry.j}) vanishes", x)
        return value / den

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for entry in self.entries:
            out[entry.i, entry.j] += self._entry_value(entry, x)
        return out - out.T

    def partials(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim, self.dim), dtype=complex)
        for entry in self.entries:
            if entry.den is None:
                for k, poly in enumerate(entry.num_partials):
                    out[k, entry.i, entry.j] += poly(x)
                continue
            assert entry.den_partials is not None
            num, den = entry.num(x), entry.den(x).real
            if abs(den) <= settings.tolerances.pole_clearance:
                raise ChartError(f"denominator of entry ({entry.i}, {entry.j}) vanishes", x)
            for k in range(self.dim):
                d_num = entry.num_partials[k](x)
                d_den = entry.den_partials[k](x).real
                out[k, entry.i, entry.j] += (d_num * den - num * d_den) / den**2
        return out - out.transpose(0, 2, 1)

    def check_poles(self, chart: ChartSpec) -> None:
        """min |den| over a 4x-refined probe grid must exceed the pole clearance."""
        dens = [e.den for e in self.entries if e.den is not None]
        if not dens:
            return
        refine = 4
        while refine > 1 and np.prod([(c - 1) * refine + 1 for c in chart.grid]) > MAX_POLE_PROBES:
            refine -= 1
        probes = np.array(chart.grid_points(refine))
        clearance = settings.tolerances.pole_clearance
        for den in dens:
            values = np.abs(den.evaluate_many(probes).real)
            worst = int(np.argmin(values))
            if values[worst] <= clearance:
                raise ChartError(
                    f"rational field has |denominator| = {values[worst]:.3e} inside the box",
                    probes[worst],
                )
        logger.debug(f"Pole check passed on {len(probes)} probes (refinement {refine})")


class BuiltinField(FormField):
    """A closed-form field supplied as a Python callable."""

    kind: FieldKind = "builtin"

    def __init__(
        self,
        dim: int,
        function: Callable[[np.ndarray], np.ndarray],
        name: str,
        params: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(dim)
        self.function = function
        self.name = name
        self.params = dict(params or {})

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        value = np.asarray(self.function(np.asarray(x, dtype=float)), dtype=complex)
        if value.shape != (self.dim, self.dim):
            raise InputError(f"builtin '{self.name}' returned shape {value.shape}")
        return value

    def describe(self) -> str:
        return f"builtin field '{self.name}' {self.params}"


class GridField(FormField):
    """A field known on the chart grid, interpolated in between."""

    kind: FieldKind = "grid"

    def __init__(self, chart: ChartSpec, values: np.ndarray, refine: int = 1) -> None:
        """``values`` has shape (*grid_shape, n, n) on ``chart.axes(refine)``."""
        axes = chart.axes(refine)
        shape = tuple(len(a) for a in axes)
        values = np.asarray(values, dtype=complex)
        n = values.shape[-1]
        if values.shape != (*shape, n, n):
            raise InputError(f"grid values of shape {values.shape} do not match grid {shape}")
        super().__init__(n)
        self.chart = chart
        defect = max_abs(values + np.swapaxes(values, -1, -2))
        if defect > 1e-10 * max(1.0, max_abs(values)):
            raise InputError(f"grid samples are not antisymmetric (defect {defect:.3e})")
        method = "cubic" if min(shape) >= 4 else "linear"
        flat = values.reshape(*shape, n * n)
        stacked = np.concatenate([flat.real, flat.imag], axis=-1)
        self._interpolator = RegularGridInterpolator(tuple(axes), stacked, method=method)

    @classmethod
    def sample(cls, source: FormField, chart: ChartSpec, refine: int = 1) -> GridField:
        """Sample ``source`` on the (refined) chart grid."""
        axes = chart.axes(refine)
        shape = tuple(len(a) for a in axes)
        values = np.array([source.evaluate(p) for p in chart.grid_points(refine)])
        return cls(chart, values.reshape(*shape, source.dim, source.dim), refine)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.chart.contains(x):
            raise ChartError("grid field evaluated outside its chart", x)
        # clip round-off excursions past the faces
        x = np.clip(x, self.chart.lower, self.chart.upper)
        stacked = self._interpolator(x[None, :])[0]
        n2 = self.dim * self.dim
        return (stacked[:n2] + 1j * stacked[n2:]).reshape(self.dim, self.dim)


class CombinedField(FormField):
    """A complex linear combination of fields, optionally reduced to its real or imaginary part."""

    kind: FieldKind = "combination"

    def __init__(
        self,
        terms: Sequence[tuple[complex, FormField]],
        part: Literal["real", "imag"] | None = None,
    ) -> None:
        if not terms:
            raise InputError("a combined field needs at least one term")
        dims = {f.dim for _, f in terms}
        if len(dims) != 1:
            raise InputError(f"combined fields have different dimensions {sorted(dims)}")
        super().__init__(dims.pop())
        self.terms = [(complex(c), f) for c, f in terms]
        self.part = part

    @property
    def symbolic(self) -> bool:
        return all(f.symbolic for _, f in self.terms)

    def _reduce(self, value: np.ndarray) -> np.ndarray:
        if self.part == "real":
            return value.real.astype(complex)
        if self.part == "imag":
            return value.imag.astype(complex)
        return value

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self._reduce(sum(c * f.evaluate(x) for c, f in self.terms))

    def partials(self, x: np.ndarray) -> np.ndarray:
        return self._reduce(sum(c * f.partials(x) for c, f in self.terms))

    def check_poles(self, chart: ChartSpec) -> None:
        for _, f in self.terms:
            f.check_poles(chart)

    def describe(self) -> str:
        inner = " + ".join(f"({c})*[{f.describe()}]" for c, f in self.terms)
        return inner if self.part is None else f"{self.part}({inner})"


# --- Families on a Chart ---
class FamilyField:
    """The pair (omega_+, omega_3) as fields on a chart."""

    def __init__(
        self,
        omega_plus: FormField,
        omega_3: FormField,
        chart: ChartSpec,
        name: str = "custom",
    ) -> None:
        for label, field in (("omega_plus", omega_plus), ("omega_3", omega_3)):
            if field.dim != chart.dim:
                raise InputError(f"{label} has dimension {field.dim}, chart has {chart.dim}")
            field.check_poles(chart)
        self.omega_plus = omega_plus
        self.omega_3 = omega_3
        self.chart = chart
        self.name = name

    @classmethod
    def from_triple(
        cls,
        omega_1: FormField,
        omega_2: FormField,
        omega_3: FormField,
        chart: ChartSpec,
        name: str = "custom",
    ) -> FamilyField:
        """omega_+ = omega_1 + i omega_2."""
        return cls(CombinedField([(1.0, omega_1), (1j, omega_2)]), omega_3, chart, name)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def family_at(self, x: np.ndarray) -> HoloSympFamily:
        return HoloSympFamily(
            omega_plus=TwoForm(entries=self.omega_plus.evaluate(x)),
            omega_3=TwoForm(entries=self.omega_3.evaluate(x)),
        )

    def components(self) -> dict[str, FormField]:
        """The real forms omega_1, omega_2, omega_3 as fields."""
        return {
            "omega_1": CombinedField([(1.0, self.omega_plus)], part="real"),
            "omega_2": CombinedField([(1.0, self.omega_plus)], part="imag"),
            "omega_3": CombinedField([(1.0, self.omega_3)], part="real"),
        }

