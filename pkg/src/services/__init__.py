"""Services package: structure-file IO and report serialisation."""

from src.services.structure_files import (
    canonical_json,
    family_from_structure,
    load_family,
    read_structure_file,
    structure_for_model,
    write_output,
)

__all__ = [
    "canonical_json",
    "family_from_structure",
    "load_family",
    "read_structure_file",
    "structure_for_model",
    "write_output",
]
