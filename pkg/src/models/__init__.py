"""Pydantic models for hk-twistor files and reports."""

from src.models.schemas import (
    BuiltinSpec,
    ChartSpec,
    CheckRecord,
    EntryTerm,
    FieldReport,
    FormSpec,
    FormsSpec,
    MetricGrid,
    MetricSample,
    MonomialSpec,
    RunReport,
    Signature,
    StructureFile,
)

__all__ = [
    "BuiltinSpec",
    "ChartSpec",
    "CheckRecord",
    "EntryTerm",
    "FieldReport",
    "FormSpec",
    "FormsSpec",
    "MetricGrid",
    "MetricSample",
    "MonomialSpec",
    "RunReport",
    "Signature",
    "StructureFile",
]
