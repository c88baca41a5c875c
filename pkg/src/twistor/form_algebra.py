"""Tangent-space linear algebra for complex 2-forms and operators.

Conventions (fixed throughout the package):

- A 2-form is stored as an antisymmetric matrix ``W`` with
  ``Omega(v, w) = v.T @ W @ w`` for column vectors ``v, w``.
- Operators act on the left of column vectors.
- Covectors are 1-D arrays read as rows; the transpose action of an operator
  on a covector, ``(A' sigma)(v) = sigma(A v)``, is ``sigma @ A``.
- Interior products: ``iota_v Omega = v @ W`` (the covector ``w -> Omega(v, w)``).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.core.configs import settings
from src.core.errors import DegeneracyError, DirectSumError, InputError
from src.models.schemas import Signature

# Largest dimension for which the perfect-matching expansion is evaluated.
MAX_WEDGE_DIM = 12

_ANTISYMMETRY_SLACK = 1e-10


def max_abs(x: Any) -> float:
    """Max-norm of an array (0.0 for empty input)."""
    arr = np.asarray(x)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


# --- Domain Types ---
class TwoForm(BaseModel):
    """A complex 2-form on a 4r-dimensional (complexified) tangent space."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _antisymmetric(cls, value: Any) -> np.ndarray:
        arr = np.asarray(value, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"2-form must be a square matrix, got shape {arr.shape}")
        if arr.shape[0] % 2:
            raise InputError(f"2-form dimension must be even, got {arr.shape[0]}")
        defect = max_abs(arr + arr.T)
        if defect > _ANTISYMMETRY_SLACK * max(1.0, max_abs(arr)):
            raise InputError(f"2-form entries are not antisymmetric (defect {defect:.3e})")
        # exact antisymmetry from here on
        return _freeze(0.5 * (arr - arr.T))

    @classmethod
    def zeros(cls, n: int) -> TwoForm:
        return cls(entries=np.zeros((n, n)))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def r(self) -> int:
        return self.dim // 4

    def is_real(self, tol: float | None = None) -> bool:
        tol = settings.tolerances.algebra if tol is None else tol
        return max_abs(self.entries.imag) <= tol * max(1.0, max_abs(self.entries))

    def conj(self) -> TwoForm:
        return TwoForm(entries=self.entries.conj())

    @property
    def real(self) -> TwoForm:
        return TwoForm(entries=self.entries.real)

    @property
    def imag(self) -> TwoForm:
        return TwoForm(entries=self.entries.imag)

    def __call__(self, v: np.ndarray, w: np.ndarray) -> complex:
        return complex(np.asarray(v) @ self.entries @ np.asarray(w))

    def pullback(self, op: LinOp) -> TwoForm:
        """The form (v, w) -> Omega(A v, A w), i.e. ``(A' x A') Omega``."""
        _check_dims(self.dim, op.dim)
        return TwoForm(entries=op.entries.T @ self.entries @ op.entries)

    def twisted(self, op: LinOp) -> np.ndarray:
        """The bilinear form (v, w) -> Omega(v, A w) as a matrix (``(1 x A') Omega``)."""
        _check_dims(self.dim, op.dim)
        return self.entries @ op.entries

    def __add__(self, other: TwoForm) -> TwoForm:
        _check_dims(self.dim, other.dim)
        return TwoForm(entries=self.entries + other.entries)

    def __sub__(self, other: TwoForm) -> TwoForm:
        _check_dims(self.dim, other.dim)
        return TwoForm(entries=self.entries - other.entries)

    def __mul__(self, scalar: complex) -> TwoForm:
        return TwoForm(entries=complex(scalar) * self.entries)

    __rmul__ = __mul__

    def __neg__(self) -> TwoForm:
        return TwoForm(entries=-self.entries)


class LinOp(BaseModel):
    """A linear operator on the (complexified) tangent space."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray
    real: bool = False

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        arr = np.asarray(data.get("entries"), dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"operator must be a square matrix, got shape {arr.shape}")
        is_real = bool(data.get("real", False))
        if is_real:
            imag = max_abs(arr.imag)
            if imag > settings.tolerances.algebra * max(1.0, max_abs(arr)):
                raise InputError(f"operator flagged real has imaginary part {imag:.3e}")
            arr = arr.real
        return {"entries": _freeze(arr), "real": is_real}

    @classmethod
    def identity(cls, n: int) -> LinOp:
        return cls(entries=np.eye(n), real=True)

    @classmethod
    def from_real(cls, arr: np.ndarray, tol: float | None = None) -> LinOp:
        """Drop a negligible imaginary part; raise if it is not negligible."""
        arr = np.asarray(arr, dtype=complex)
        tol = settings.tolerances.algebra if tol is None else tol
        imag = max_abs(arr.imag)
        if imag > tol * max(1.0, max_abs(arr)):
            raise InputError(f"operator is not real (imaginary part {imag:.3e})")
        return cls(entries=arr.real, real=True)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def T(self) -> LinOp:  # noqa: N802
        return LinOp(entries=self.entries.T, real=self.real)

    def inv(self) -> LinOp:
        return LinOp(entries=np.linalg.inv(self.entries), real=self.real)

    def on_covector(self, sigma: np.ndarray) -> np.ndarray:
        """Transpose action ``(A' sigma)(v) = sigma(A v)``."""
        return np.asarray(sigma) @ self.entries

    def __matmul__(self, other: Any) -> Any:
        if isinstance(other, LinOp):
            _check_dims(self.dim, other.dim)
            return LinOp(entries=self.entries @ other.entries, real=self.real and other.real)
        return self.entries @ np.asarray(other)

    def __add__(self, other: LinOp) -> LinOp:
        _check_dims(self.dim, other.dim)
        return LinOp(entries=self.entries + other.entries, real=self.real and other.real)

    def __sub__(self, other: LinOp) -> LinOp:
        _check_dims(self.dim, other.dim)
        return LinOp(entries=self.entries - other.entries, real=self.real and other.real)

    def __mul__(self, scalar: complex) -> LinOp:
        is_real = self.real and complex(scalar).imag == 0
        value = float(np.real(scalar)) if is_real else complex(scalar)
        return LinOp(entries=value * self.entries, real=is_real)

    __rmul__ = __mul__

    def __neg__(self) -> LinOp:
        return LinOp(entries=-self.entries, real=self.real)

    def distance(self, other: LinOp | np.ndarray) -> float:
        """Max-norm distance to another operator."""
        arr = other.entries if isinstance(other, LinOp) else np.asarray(other)
        return max_abs(self.entries - arr)


class Subspace(BaseModel):
    """A complex subspace given by an orthonormal basis (columns)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim_ambient: int
    basis: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def _orthonormal(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        n = int(data["dim_ambient"])
        basis = np.asarray(data.get("basis"), dtype=complex)
        basis = np.zeros((n, 0), dtype=complex) if basis.size == 0 else basis.reshape(n, -1)
        if basis.shape[1]:
            gram = basis.conj().T @ basis
            defect = max_abs(gram - np.eye(basis.shape[1]))
            if defect > 1e-12:
                raise InputError(f"subspace basis is not orthonormal (defect {defect:.3e})")
        return {"dim_ambient": n, "basis": _freeze(basis)}

    @classmethod
    def spanned_by(cls, vectors: np.ndarray) -> Subspace:
        """Orthonormalise the columns of ``vectors`` (assumed independent)."""
        vectors = np.asarray(vectors, dtype=complex)
        q, _ = np.linalg.qr(vectors)
        return cls(dim_ambient=vectors.shape[0], basis=q)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def conj(self) -> Subspace:
        return Subspace(dim_ambient=self.dim_ambient, basis=self.basis.conj())

    def orthogonal_projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def distance_to(self, v: np.ndarray) -> float:
        """Euclidean distance of ``v`` from the subspace."""
        v = np.asarray(v, dtype=complex)
        return float(np.linalg.norm(v - self.orthogonal_projector() @ v))


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise InputError(f"dimension mismatch: {dims}")


# --- Wedge Pairing ---
@lru_cache(maxsize=None)
def _perfect_matchings(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All perfect matchings of {0..n-1} as (rows, cols, signs).

    Each matching is listed as pairs (i < j) in the order they were chosen,
    with the sign of the permutation (i1 j1 i2 j2 ...).
    """

    def expand(remaining: tuple[int, ...]) -> list[tuple[list[tuple[int, int]], int]]:
        if not remaining:
            return [([], 1)]
        first, rest = remaining[0], remaining[1:]
        out = []
        for position, partner in enumerate(rest):
            sign = -1 if position % 2 else 1
            others = rest[:position] + rest[position + 1 :]
            for pairs, sub_sign in expand(others):
                out.append(([(first, partner), *pairs], sign * sub_sign))
        return out

    matchings = expand(tuple(range(n)))
    rows = np.array([[i for i, _ in pairs] for pairs, _ in matchings], dtype=int)
    cols = np.array([[j for _, j in pairs] for pairs, _ in matchings], dtype=int)
    signs = np.array([sign for _, sign in matchings], dtype=float)
    return rows, cols, signs


def wedge_pairing(a: TwoForm, k: int, b: TwoForm, l: int) -> complex:  # noqa: E741
    """Coefficient of ``a^k ^ b^l`` against the volume element e^1 ^ ... ^ e^n.

    Every perfect matching of the index set contributes its sign times the sum,
    over the ways of assigning k of its pairs to ``a`` and the rest to ``b``,
    of the corresponding entry products; the k! l! orderings of equal factors
    are accounted for at the end.
    """
    _check_dims(a.dim, b.dim)
    n = a.dim
    if k < 0 or l < 0 or 2 * (k + l) != n:
        raise InputError(f"wedge degrees k={k}, l={l} do not fill dimension {n}")
    if n > MAX_WEDGE_DIM:
        raise InputError(f"wedge pairing is only evaluated up to dimension {MAX_WEDGE_DIM}")
    rows, cols, signs = _perfect_matchings(n)
    av = a.entries[rows, cols]
    bv = b.entries[rows, cols]
    # coefficient of t^k in prod_p (b_p + t a_p), for every matching at once
    coeffs = np.zeros((len(signs), k + 1), dtype=complex)
    coeffs[:, 0] = 1.0
    for p in range(n // 2):
        shifted = np.zeros_like(coeffs)
        shifted[:, 1:] = coeffs[:, :-1] * av[:, p : p + 1]
        coeffs = coeffs * bv[:, p : p + 1] + shifted
    total = complex(np.sum(signs * coeffs[:, k]))
    return total * math.factorial(k) * math.factorial(l)


# --- Interior Products and Kernels ---
def interior(form: TwoForm, v: np.ndarray) -> np.ndarray:
    """The covector ``w -> Omega(v, w)``."""
    v = np.asarray(v)
    if v.shape != (form.dim,):
        raise InputError(f"vector of shape {v.shape} does not match dimension {form.dim}")
    return v @ form.entries


def _canonical_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    out = vectors.copy()
    for col in range(out.shape[1]):
        column = out[:, col]
        scale = max_abs(column)
        nonzero = np.flatnonzero(np.abs(column) > 1e-12 * max(scale, 1e-300))
        if nonzero.size:
            pivot = column[nonzero[0]]
            out[:, col] = column * (abs(pivot) / pivot)
    return out


def nullspace(form: TwoForm | LinOp, tol: float | None = None) -> Subspace:
    """Kernel of a form (or operator) by SVD with a relative singular-value cutoff.

    Basis vectors are ordered by ascending singular value, ties broken
    lexicographically on (real, imag) components, each with its first nonzero
    component real and positive.
    """
    tol = settings.tolerances.rank if tol is None else tol
    if tol <= 0:
        raise InputError(f"nullspace tolerance must be positive, got {tol}")
    matrix = np.asarray(form.entries, dtype=complex)
    n = matrix.shape[1]
    _, s, vh = np.linalg.svd(matrix)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return Subspace(dim_ambient=n, basis=np.eye(n, dtype=complex))
    indices = np.flatnonzero(s <= tol * smax)
    vectors = _canonical_phase(vh[indices].conj().T)
    keys = [
        (float(s[idx]), tuple(np.round(np.c_[vectors[:, c].real, vectors[:, c].imag], 12).ravel()))
        for c, idx in enumerate(indices)
    ]
    order = sorted(range(len(indices)), key=lambda c: keys[c])
    return Subspace(dim_ambient=n, basis=vectors[:, order])


def solve_interior(form: TwoForm, sigma: np.ndarray, tol: float | None = None) -> np.ndarray:
    """The unique ``v`` with ``iota_v Omega = sigma`` for nondegenerate Omega."""
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (form.dim,):
        raise InputError(f"covector of shape {sigma.shape} does not match dimension {form.dim}")
    tol = settings.tolerances.rank if tol is None else tol
    s = np.linalg.svd(form.entries, compute_uv=False)
    if s[-1] <= tol * max(float(s[0]), 1e-300):
        raise DegeneracyError("2-form is degenerate", float(s[-1]))
    # v @ W = sigma  <=>  W.T @ v = sigma
    v = np.linalg.solve(form.entries.T, sigma)
    residual = float(np.linalg.norm(interior(form, v) - sigma))
    if residual > 1e-10 * float(np.linalg.norm(sigma)):
        raise DegeneracyError("interior solve did not converge", float(s[-1]))
    return v


def solve_interior_within(
    form: TwoForm, sigma: np.ndarray, subspace: Subspace
) -> tuple[np.ndarray, float]:
    """Least-squares ``v`` in ``subspace`` with ``iota_v Omega = sigma``.

    Returns the solution and the residual norm; Omega need only be injective
    on the subspace.
    """
    sigma = np.asarray(sigma, dtype=complex)
    system = form.entries.T @ subspace.basis
    s = np.linalg.svd(system, compute_uv=False)
    if s.size and s[-1] <= settings.tolerances.rank * max(float(s[0]), 1e-300):
        raise DegeneracyError("2-form is degenerate on the subspace", float(s[-1]))
    coeffs, *_ = np.linalg.lstsq(system, sigma, rcond=None)
    v = subspace.basis @ coeffs
    return v, float(np.linalg.norm(interior(form, v) - sigma))


def complement_projectors(
    a: Subspace, b: Subspace, max_condition: float | None = None
) -> tuple[LinOp, LinOp]:
    """Projectors (P_A, P_B) of the direct sum decomposition A + B = C^n."""
    _check_dims(a.dim_ambient, b.dim_ambient)
    n = a.dim_ambient
    if a.dim + b.dim != n:
        raise InputError(f"subspace dimensions {a.dim} + {b.dim} != {n}")
    max_condition = (
        settings.tolerances.direct_sum_condition if max_condition is None else max_condition
    )
    frame = np.hstack([a.basis, b.basis])
    condition = float(np.linalg.cond(frame))
    if not np.isfinite(condition) or condition > max_condition:
        raise DirectSumError("subspaces do not form a direct sum", condition)
    coframe = np.linalg.inv(frame)
    p_a = frame[:, : a.dim] @ coframe[: a.dim, :]
    p_b = frame[:, a.dim :] @ coframe[a.dim :, :]
    return LinOp(entries=p_a), LinOp(entries=p_b)


def signature_of(g: LinOp | np.ndarray, tol: float | None = None) -> Signature:
    """Eigenvalue sign counts of a real symmetric bilinear form."""
    tol = settings.tolerances.identity if tol is None else tol
    arr = np.asarray(g.entries if isinstance(g, LinOp) else g)
    if np.iscomplexobj(arr):
        if max_abs(arr.imag) > tol * max(1.0, max_abs(arr)):
            raise InputError("metric is not real")
        arr = arr.real
    if max_abs(arr - arr.T) > tol * max(1.0, max_abs(arr)):
        raise InputError("metric is not symmetric")
    eigenvalues = np.linalg.eigvalsh(0.5 * (arr + arr.T))
    scale = tol * max(max_abs(eigenvalues), 1e-300)
    return Signature(
        positive=int(np.sum(eigenvalues > scale)),
        negative=int(np.sum(eigenvalues < -scale)),
        zero=int(np.sum(np.abs(eigenvalues) <= scale)),
    )
