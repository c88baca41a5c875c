"""Structure files in, canonical JSON reports out.

Structure files are JSON documents validated by ``StructureFile``; any
validation problem becomes an ``InputError`` naming the offending field.
Reports are written with sorted keys and shortest round-trip floats so that
identical runs produce identical bytes (apart from ``wall_time``).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import sys
from pathlib import Path
from typing import Any

from loguru import logger
from pydantic import BaseModel, ValidationError

from src.core.errors import InputError
from src.models.schemas import (
    BuiltinSpec,
    EntryTerm,
    FormSpec,
    FormsSpec,
    MonomialSpec,
    StructureFile,
)
from src.twistor.fields import ConstantField, FamilyField, PolynomialField
from src.twistor.zoo import ZooModel, get_model

FORM_LABELS = ("omega_1", "omega_2", "omega_3")


# --- Reading ---
def _describe_validation_error(exc: ValidationError) -> str:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<root>"
    return f"field '{location}': {first['msg']}"


def read_structure_file(path: str | Path) -> tuple[StructureFile, str]:
    """Parse and validate a structure file; returns it with the sha256 of its bytes."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    try:
        spec = StructureFile.model_validate(data)
    except ValidationError as exc:
        raise InputError(f"{path}: {_describe_validation_error(exc)}") from exc
    logger.debug(f"Read structure file {path} (r = {spec.dim_quaternionic})")
    return spec, hashlib.sha256(raw).hexdigest()


def family_from_structure(
    spec: StructureFile, name: str = "custom"
) -> tuple[FamilyField, ZooModel | None]:
    """The family field described by a structure file, and the zoo model if it names one."""
    chart, forms = spec.chart, spec.forms
    if forms.builtin is not None:
        model = get_model(forms.builtin.name, forms.builtin.params, chart=chart)
        return model.family, model
    n = chart.dim
    if forms.omega_plus is not None and forms.omega_3 is not None:
        family = FamilyField(
            PolynomialField.from_spec(n, forms.omega_plus),
            PolynomialField.from_spec(n, forms.omega_3),
            chart,
            name,
        )
        return family, None
    assert forms.omega_1 is not None and forms.omega_2 is not None and forms.omega_3 is not None
    family = FamilyField.from_triple(
        PolynomialField.from_spec(n, forms.omega_1),
        PolynomialField.from_spec(n, forms.omega_2),
        PolynomialField.from_spec(n, forms.omega_3),
        chart,
        name,
    )
    return family, None


def load_family(path: str | Path) -> tuple[FamilyField, ZooModel | None, str]:
    """read_structure_file followed by family_from_structure."""
    spec, digest = read_structure_file(path)
    family, model = family_from_structure(spec, Path(path).stem)
    return family, model, digest


# --- Writing ---
def _constant_form_spec(entries: Any, n: int) -> FormSpec:
    terms = []
    zero = [0] * n
    for i, j in itertools.combinations(range(n), 2):
        value = complex(entries[i, j])
        if value == 0:
            continue
        terms.append(
            EntryTerm(
                i=i,
                j=j,
                re=[MonomialSpec(coefficient=value.real, exponents=zero)] if value.real else [],
                im=[MonomialSpec(coefficient=value.imag, exponents=zero)] if value.imag else [],
            )
        )
    return FormSpec(terms=terms)


def structure_for_model(model: ZooModel) -> StructureFile:
    """Explicit constant forms for constant models, a builtin reference otherwise."""
    chart = model.chart
    constant = all(isinstance(model.forms[label], ConstantField) for label in FORM_LABELS)
    if constant:
        forms = FormsSpec(
            **{
                label: _constant_form_spec(model.forms[label].evaluate(chart.center()), chart.dim)
                for label in FORM_LABELS
            }
        )
    else:
        forms = FormsSpec(builtin=BuiltinSpec(name=model.name, params=model.params))
    return StructureFile(dim_quaternionic=chart.r, chart=chart, forms=forms)


def _finite(value: Any) -> Any:
    """Replace non-finite floats by None, recursively."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_finite(v) for v in value]
    return value


def canonical_json(data: BaseModel | dict[str, Any]) -> str:
    """Key-sorted JSON with shortest round-trip floats and a trailing newline."""
    payload = data.model_dump(mode="json") if isinstance(data, BaseModel) else data
    return json.dumps(_finite(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_output(text: str, out: str | Path | None) -> None:
    """Write to ``out`` or, when it is None or '-', to standard output."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror or exc}") from exc
    logger.info(f"Wrote {out}")
