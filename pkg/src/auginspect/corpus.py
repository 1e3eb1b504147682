"""Labeled text corpora: loading, stable ids, merging in generated instances.

The canonical interchange format is JSONL with one object per line holding
``text`` and ``label`` (plus optional ``id``, ``origin``, ``parent_id``).
CSV/TSV files with a header row containing ``text`` and ``label`` columns are
accepted as well. Ids are auto-assigned as zero-padded row ordinals when the
file does not carry them. Text is stored exactly as read; transforms such as
HomoglyphSwap depend on exact codepoints, so no Unicode normalization is done.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

ORIGINAL = "original"
GENERATED = "generated"

_FORMATS = ("jsonl", "csv", "tsv")


class CorpusError(ValueError):
    """Malformed dataset file or a broken dataset invariant."""


@dataclass(frozen=True)
class LabeledInstance:
    """One text with its class label. Generated instances point at a parent."""

    id: str
    text: str
    label: str
    origin: str = ORIGINAL
    parent_id: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("instance id must be non-empty")
        if not self.text.strip():
            raise CorpusError(f"instance {self.id!r}: text is empty")
        if self.origin not in (ORIGINAL, GENERATED):
            raise CorpusError(f"instance {self.id!r}: bad origin {self.origin!r}")
        if (self.origin == GENERATED) != (self.parent_id is not None):
            raise CorpusError(
                f"instance {self.id!r}: parent_id must be present iff origin=generated"
            )


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of instances; safe to share across readers."""

    name: str
    label_set: tuple[str, ...]
    instances: tuple[LabeledInstance, ...]

    def __post_init__(self) -> None:
        if len(self.label_set) < 2:
            raise CorpusError(f"dataset {self.name!r}: label set needs >= 2 classes")
        if len(set(self.label_set)) != len(self.label_set):
            raise CorpusError(f"dataset {self.name!r}: duplicate labels in label set")
        seen: set[str] = set()
        for inst in self.instances:
            if inst.id in seen:
                raise CorpusError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)
            if inst.label not in self.label_set:
                raise CorpusError(
                    f"instance {inst.id!r}: label {inst.label!r} not in label set"
                )
        for inst in self.instances:
            if inst.origin == GENERATED and inst.parent_id not in seen:
                raise CorpusError(
                    f"instance {inst.id!r}: dangling parent_id {inst.parent_id!r}"
                )

    @cached_property
    def by_id(self) -> dict[str, LabeledInstance]:
        return {inst.id: inst for inst in self.instances}

    def get(self, instance_id: str) -> LabeledInstance:
        try:
            return self.by_id[instance_id]
        except KeyError:
            raise CorpusError(f"unknown instance id {instance_id!r}") from None

    def originals(self) -> list[LabeledInstance]:
        return [i for i in self.instances if i.origin == ORIGINAL]

    def generated(self) -> list[LabeledInstance]:
        return [i for i in self.instances if i.origin == GENERATED]

    def __len__(self) -> int:
        return len(self.instances)


def _detect_format(path: Path) -> str:
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("jsonl", "json", "ndjson"):
        return "jsonl"
    if suffix in ("csv", "tsv"):
        return suffix
    raise CorpusError(f"cannot infer format from {path.name!r}; pass format=")


def _rows_from_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path.name}:{lineno}: invalid JSON ({exc})") from None
            if not isinstance(row, dict):
                raise CorpusError(f"{path.name}:{lineno}: row is not an object")
            yield lineno, row


def _rows_from_csv(path: Path, delimiter: str) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None:
            return
        missing = {"text", "label"} - set(reader.fieldnames)
        if missing:
            raise CorpusError(f"{path.name}: header is missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            yield lineno, {k: v for k, v in row.items() if v is not None}


def load_instances(path: str | Path, format: str | None = None) -> list[LabeledInstance]:
    """Read instances from a file without dataset-level validation (used for
    generated rows whose parents live in a different file)."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"no such file: {path}")
    fmt = format or _detect_format(path)
    if fmt not in _FORMATS:
        raise CorpusError(f"unknown format {fmt!r}; expected one of {_FORMATS}")

    if fmt == "jsonl":
        rows = _rows_from_jsonl(path)
    else:
        rows = _rows_from_csv(path, "\t" if fmt == "tsv" else ",")

    instances: list[LabeledInstance] = []
    for ordinal, (lineno, row) in enumerate(rows):
        if "text" not in row or "label" not in row:
            raise CorpusError(f"{path.name}:{lineno}: row needs 'text' and 'label'")
        text, label = str(row["text"]), str(row["label"])
        if not text.strip():
            raise CorpusError(f"{path.name}:{lineno}: empty text")
        if not label.strip():
            raise CorpusError(f"{path.name}:{lineno}: empty label")
        inst_id = str(row["id"]) if row.get("id") not in (None, "") else f"{ordinal:06d}"
        origin = str(row.get("origin") or ORIGINAL)
        parent = row.get("parent_id") or None
        try:
            instances.append(
                LabeledInstance(inst_id, text, label, origin, parent)
            )
        except CorpusError as exc:
            raise CorpusError(f"{path.name}:{lineno}: {exc}") from None
    return instances


def load_dataset(
    path: str | Path,
    format: str | None = None,
    name: str | None = None,
    label_set: Sequence[str] | None = None,
) -> Dataset:
    """Load a labeled dataset, assigning stable ids in row order.

    The label set is inferred as the sorted distinct labels unless given.
    """
    path = Path(path)
    instances = load_instances(path, format)
    if not instances:
        raise CorpusError(f"{path.name}: empty dataset")
    labels = tuple(label_set) if label_set else tuple(sorted({i.label for i in instances}))
    return Dataset(name=name or path.stem, label_set=labels, instances=tuple(instances))


def instance_to_row(inst: LabeledInstance) -> dict:
    row = {"id": inst.id, "text": inst.text, "label": inst.label}
    if inst.origin != ORIGINAL:
        row["origin"] = inst.origin
        row["parent_id"] = inst.parent_id
    return row


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the dataset as JSONL; load_dataset(save_dataset(d)) round-trips."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for inst in dataset.instances:
            fh.write(json.dumps(instance_to_row(inst), ensure_ascii=False) + "\n")


def merge_generated(dataset: Dataset, generated: Sequence[LabeledInstance]) -> Dataset:
    """Append generated instances; originals are untouched and never reordered."""
    existing = set(dataset.by_id)
    for inst in generated:
        if inst.origin != GENERATED:
            raise CorpusError(f"instance {inst.id!r}: merge_generated takes generated instances")
        if inst.id in existing:
            raise CorpusError(f"id collision: {inst.id!r}")
        existing.add(inst.id)
        if inst.parent_id not in dataset.by_id:
            raise CorpusError(f"instance {inst.id!r}: dangling parent_id {inst.parent_id!r}")
        if dataset.by_id[inst.parent_id].origin != ORIGINAL:
            raise CorpusError(f"instance {inst.id!r}: parent {inst.parent_id!r} is not an original")
    return replace(dataset, instances=dataset.instances + tuple(generated))
