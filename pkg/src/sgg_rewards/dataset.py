"""Ground-truth ingestion and prompt template rendering.

Ground truth lives in a single canonical JSONL format (one image per line);
converting upstream dataset releases into it is a one-time external
preprocessing step. Prompt templates are stored as data files so the two
vocabulary variants stay diff-auditable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

from .graph import SceneGraph, graph_from_json_dict, graph_to_json_dict


class MissingCategoriesError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    image_id: str
    image_width: float
    image_height: float
    gt: SceneGraph

    def to_json_dict(self) -> dict:
        payload = {"image_id": self.image_id, "width": self.image_width, "height": self.image_height}
        payload.update(graph_to_json_dict(self.gt))
        return payload


@dataclass(frozen=True)
class PromptSpec:
    with_categories: bool = False
    object_classes: Optional[tuple[str, ...]] = None
    relation_classes: Optional[tuple[str, ...]] = None


@dataclass
class DatasetLoad:
    records: list[DatasetRecord]
    diagnostics: list[str] = field(default_factory=list)
    skipped: int = 0


def iter_dataset(
    path: Union[str, Path], diagnostics: Optional[list[str]] = None
) -> Iterator[DatasetRecord]:
    """Stream validated records from a ground-truth JSONL file.

    Invalid lines are skipped; their line numbers and reasons are appended
    to ``diagnostics`` when a list is supplied. Ground-truth self-relations
    are dropped with a data warning rather than failing the record.
    """
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            record, problems = _parse_record(line, lineno)
            if diagnostics is not None:
                diagnostics.extend(problems)
            if record is not None:
                yield record


def load_dataset(path: Union[str, Path]) -> DatasetLoad:
    """Load a whole ground-truth file, surfacing the skipped-record count."""
    diagnostics: list[str] = []
    records = list(iter_dataset(path, diagnostics))
    skipped = sum(1 for d in diagnostics if d.startswith("line ") and "skipped" in d)
    return DatasetLoad(records, diagnostics, skipped)


def _parse_record(line: str, lineno: int) -> tuple[Optional[DatasetRecord], list[str]]:
    problems: list[str] = []
    try:
        payload = json.loads(line)
    except ValueError:
        return None, [f"line {lineno}: skipped, not valid JSON"]
    if not isinstance(payload, dict):
        return None, [f"line {lineno}: skipped, record is not a JSON object"]

    image_id = payload.get("image_id")
    width = payload.get("width")
    height = payload.get("height")
    if not isinstance(image_id, str) or not image_id:
        return None, [f"line {lineno}: skipped, missing image_id"]
    if not _positive_number(width) or not _positive_number(height):
        return None, [f"line {lineno}: skipped, width/height must be positive numbers"]

    validation = graph_from_json_dict(
        payload, image_dims=(float(width), float(height)), self_relation_fatal=False
    )
    for violation in validation.violations:
        problems.append(f"line {lineno}: {violation}")
    if validation.graph is None:
        problems.append(f"line {lineno}: skipped, ground truth failed validation")
        return None, problems
    return (
        DatasetRecord(image_id, float(width), float(height), validation.graph),
        problems,
    )


def _positive_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0


class GroundTruthStore:
    """Immutable image_id -> DatasetRecord lookup shared across workers."""

    def __init__(self, records: Sequence[DatasetRecord], diagnostics: Sequence[str] = ()):
        self._records = {record.image_id: record for record in records}
        self.diagnostics = list(diagnostics)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "GroundTruthStore":
        load = load_dataset(path)
        return cls(load.records, load.diagnostics)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._records

    def get(self, image_id: str) -> Optional[DatasetRecord]:
        return self._records.get(image_id)

    def image_ids(self) -> list[str]:
        return list(self._records)


def render_prompt(spec: PromptSpec = PromptSpec()) -> str:
    """Render the scene-graph prompt, with or without predefined categories."""
    if not spec.with_categories:
        return _template_text("prompt_open_vocab.txt")
    if not spec.object_classes or not spec.relation_classes:
        raise MissingCategoriesError(
            "with_categories requires non-empty object and relation class lists"
        )
    text = _template_text("prompt_closed_vocab.txt")
    text = text.replace("{OBJ_CLS}", _quoted_list(spec.object_classes))
    text = text.replace("{REL_CLS}", _quoted_list(spec.relation_classes))
    return text


def load_class_list(path: Union[str, Path]) -> tuple[str, ...]:
    """Read one label per line, ignoring blanks."""
    with open(path, "r", encoding="utf-8") as handle:
        return tuple(line.strip() for line in handle if line.strip())


def _quoted_list(labels: Sequence[str]) -> str:
    return ", ".join(f'"{label}"' for label in labels)


def _template_text(name: str) -> str:
    return (resources.files("sgg_rewards") / "templates" / name).read_text(encoding="utf-8")
