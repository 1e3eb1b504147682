"""The inspection core: marks, provenance groups, filtering, undo, export.

All mutation goes through an append-only event log, so session state is a
pure fold over the events: replaying a recorded log reproduces marks and
group statistics exactly (crash recovery and audit). Undo never rewrites
history; it appends a compensating event that restores the states recorded
in the event it targets.

Group membership is fixed by provenance: a generated instance belongs to
transform group G iff its chain contains G's kind, and to feature group F iff
its PARENT original carries that feature (feature provenance describes the
text before transformation). Group statistics are dataset-global, not
selection-local, so the counters generalize beyond whatever is selected.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Sequence

from .corpus import Dataset, GENERATED, LabeledInstance
from .guidance import LlmVerdict
from .metrics import QualityScores
from .transforms import ProvenanceChain, TransformKind, replay_with_highlights


class SessionError(ValueError):
    pass


class SessionCorruptionError(SessionError):
    pass


class MarkState(str, Enum):
    unmarked = "unmarked"
    high_quality = "high_quality"
    low_quality = "low_quality"


@dataclass(frozen=True)
class Mark:
    instance_id: str
    state: MarkState
    source: str  # "individual" or "batch:<group key>"
    timestamp: float


@dataclass(frozen=True)
class GroupKey:
    kind: str  # "transform" | "feature"
    value: str

    def __post_init__(self) -> None:
        if self.kind not in ("transform", "feature"):
            raise SessionError(f"bad group kind {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind}:{self.value}"

    @classmethod
    def parse(cls, text: str) -> "GroupKey":
        kind, _, value = text.partition(":")
        if not value:
            raise SessionError(f"bad group key {text!r}")
        return cls(kind, value)


@dataclass
class GroupSummary:
    key: GroupKey
    member_ids: tuple[str, ...]
    inspected: int
    high_quality: int
    examples: list[dict]  # {id, text, highlights}


@dataclass(frozen=True)
class FilterSpec:
    """Conjunctive filter plus a deterministic sort order."""

    transform: str | None = None
    feature: str | None = None
    mark: MarkState | None = None
    consistency: bool | None = None
    origin: str | None = None
    metric_ranges: tuple[tuple[str, float, float], ...] = ()
    sort_by: str = "id"  # id | fluency | grammaticality | alignment
    descending: bool = False

    def to_dict(self) -> dict:
        return {
            "transform": self.transform,
            "feature": self.feature,
            "mark": self.mark.value if self.mark else None,
            "consistency": self.consistency,
            "origin": self.origin,
            "metric_ranges": [list(r) for r in self.metric_ranges],
            "sort_by": self.sort_by,
            "descending": self.descending,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FilterSpec":
        return cls(
            transform=data.get("transform"),
            feature=data.get("feature"),
            mark=MarkState(data["mark"]) if data.get("mark") else None,
            consistency=data.get("consistency"),
            origin=data.get("origin"),
            metric_ranges=tuple(tuple(r) for r in data.get("metric_ranges", [])),
            sort_by=data.get("sort_by", "id"),
            descending=bool(data.get("descending", False)),
        )


EXAMPLES_PER_GROUP = 3


class Session:
    """Single-writer inspection session over one dataset."""

    def __init__(
        self,
        dataset: Dataset,
        chains: dict[str, ProvenanceChain],
        features: dict[str, frozenset[str]] | None = None,
        scores: dict[str, QualityScores] | None = None,
        event_sink: Callable[[dict], None] | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.dataset = dataset
        self.chains = chains
        self.features = features or {}
        self.scores = scores or {}
        self.verdicts: dict[str, LlmVerdict] = {}
        self._event_sink = event_sink
        self._clock = clock

        self.marks: dict[str, Mark] = {}
        self.events: list[dict] = []
        self._undone: set[int] = set()
        self.last_selection: tuple[str, ...] = ()
        self.last_filter: FilterSpec | None = None

        self._highlights: dict[str, list[tuple[int, int]]] = {}
        self._transform_members: dict[str, list[str]] = {}
        self._feature_members: dict[str, list[str]] = {}
        self._keys_of: dict[str, list[GroupKey]] = {}
        self._counts: dict[str, list[int]] = {}  # str(key) -> [inspected, high]
        self._index_groups()

    # --- group indexing ----------------------------------------------------

    def _index_groups(self) -> None:
        for inst in self.dataset.instances:
            if inst.origin != GENERATED:
                continue
            chain = self.chains.get(inst.id)
            keys: list[GroupKey] = []
            if chain is not None:
                parent = self.dataset.get(inst.parent_id)
                _, spans = replay_with_highlights(chain, parent.text)
                self._highlights[inst.id] = spans
                for kind in sorted(k.value for k in chain.kinds()):
                    self._transform_members.setdefault(kind, []).append(inst.id)
                    keys.append(GroupKey("transform", kind))
            for feature_key in sorted(self.features.get(inst.parent_id, ())):
                self._feature_members.setdefault(feature_key, []).append(inst.id)
                keys.append(GroupKey("feature", feature_key))
            self._keys_of[inst.id] = keys
        for key_str in [f"transform:{k}" for k in self._transform_members] + [
            f"feature:{k}" for k in self._feature_members
        ]:
            self._counts[key_str] = [0, 0]

    def members_of(self, key: GroupKey) -> list[str]:
        table = self._transform_members if key.kind == "transform" else self._feature_members
        return table.get(key.value, [])

    def highlights(self, instance_id: str) -> list[tuple[int, int]]:
        return self._highlights.get(instance_id, [])

    # --- event machinery ---------------------------------------------------

    def _next_seq(self) -> int:
        return self.events[-1]["seq"] + 1 if self.events else 1

    def _append(self, event: dict) -> None:
        self.events.append(event)
        if self._event_sink:
            self._event_sink(event)

    def _state_of(self, instance_id: str) -> tuple[str, str | None]:
        mark = self.marks.get(instance_id)
        if mark is None:
            return MarkState.unmarked.value, None
        return mark.state.value, mark.source

    def _set_state(self, instance_id: str, state: MarkState, source: str | None, ts: float) -> None:
        old_state, _ = self._state_of(instance_id)
        if state is MarkState.unmarked:
            self.marks.pop(instance_id, None)
        else:
            self.marks[instance_id] = Mark(instance_id, state, source or "individual", ts)
        self._adjust_counts(instance_id, MarkState(old_state), state)

    def _adjust_counts(self, instance_id: str, old: MarkState, new: MarkState) -> None:
        if old == new:
            return
        for key in self._keys_of.get(instance_id, ()):
            counts = self._counts[str(key)]
            counts[0] += (new is not MarkState.unmarked) - (old is not MarkState.unmarked)
            counts[1] += (new is MarkState.high_quality) - (old is MarkState.high_quality)

    # --- operations --------------------------------------------------------

    def mark(self, instance_id: str, state: MarkState | str) -> dict:
        state = MarkState(state)
        self.dataset.get(instance_id)  # raises on unknown id
        ts = self._clock()
        prev_state, prev_source = self._state_of(instance_id)
        event = {
            "seq": self._next_seq(),
            "ts": ts,
            "type": "mark",
            "id": instance_id,
            "state": state.value,
            "source": "individual",
            "prev": {"state": prev_state, "source": prev_source},
        }
        self._set_state(instance_id, state, "individual", ts)
        self._append(event)
        return self.stats()

    def batch_mark(
        self,
        key: GroupKey,
        state: MarkState | str,
        scope: str = "all_members",
        scope_filter: FilterSpec | None = None,
    ) -> int:
        state = MarkState(state)
        if scope not in ("all_members", "filtered_members"):
            raise SessionError(f"bad scope {scope!r}")
        members = self.members_of(key)
        if not members:
            raise SessionError(f"empty group {key}")
        if scope == "filtered_members":
            allowed = set(self.filter(scope_filter or FilterSpec()))
            members = [m for m in members if m in allowed]
        ts = self._clock()
        event = {
            "seq": self._next_seq(),
            "ts": ts,
            "type": "batch_mark",
            "key": str(key),
            "state": state.value,
            "scope": scope,
            "ids": list(members),
            "prev": {m: list(self._state_of(m)) for m in members},
        }
        source = f"batch:{key}"
        for member in members:
            self._set_state(member, state, source, ts)
        self._append(event)
        return len(members)

    def undo_last(self) -> int | None:
        """Undo the most recent not-yet-undone mark/batch_mark; returns its seq."""
        target = None
        for event in reversed(self.events):
            if event["type"] in ("mark", "batch_mark") and event["seq"] not in self._undone:
                target = event
                break
        if target is None:
            return None
        ts = self._clock()
        event = {"seq": self._next_seq(), "ts": ts, "type": "undo", "target": target["seq"]}
        self._apply_undo(target, ts)
        self._undone.add(target["seq"])
        self._append(event)
        return target["seq"]

    def _apply_undo(self, target: dict, ts: float) -> None:
        if target["type"] == "mark":
            prev = target["prev"]
            self._set_state(target["id"], MarkState(prev["state"]), prev["source"], ts)
        else:
            for member, (state, source) in target["prev"].items():
                self._set_state(member, MarkState(state), source, ts)

    def select(self, ids: Sequence[str]) -> None:
        for instance_id in ids:
            self.dataset.get(instance_id)
        self.last_selection = tuple(ids)
        self._append({"seq": self._next_seq(), "ts": self._clock(), "type": "select", "ids": list(ids)})

    def set_filter(self, spec: FilterSpec) -> None:
        self.last_filter = spec
        self._append({"seq": self._next_seq(), "ts": self._clock(), "type": "filter", "spec": spec.to_dict()})

    # --- queries -----------------------------------------------------------

    def groups_for_selection(self, selected_ids: Iterable[str], kind: str) -> list[GroupSummary]:
        """One summary per provenance key occurring in the selection, with
        member sets and statistics computed over the whole dataset."""
        if kind not in ("transform", "feature"):
            raise SessionError(f"bad group kind {kind!r}")
        keys: set[str] = set()
        for instance_id in selected_ids:
            inst = self.dataset.get(instance_id)
            if kind == "transform":
                chain = self.chains.get(inst.id)
                if chain:
                    keys.update(k.value for k in chain.kinds())
            else:
                owner = inst.parent_id if inst.origin == GENERATED else inst.id
                keys.update(self.features.get(owner, ()))
        summaries = [self.summarize(GroupKey(kind, value)) for value in keys]
        summaries.sort(key=lambda s: (-len(s.member_ids), s.key.value))
        return summaries

    def summarize(self, key: GroupKey) -> GroupSummary:
        members = self.members_of(key)
        inspected, high = self._counts.get(str(key), (0, 0))
        examples = []
        for member in members[:EXAMPLES_PER_GROUP]:
            examples.append({
                "id": member,
                "text": self.dataset.get(member).text,
                "highlights": self.highlights(member),
            })
        return GroupSummary(
            key=key,
            member_ids=tuple(members),
            inspected=inspected,
            high_quality=high,
            examples=examples,
        )

    def filter(self, spec: FilterSpec | None = None) -> list[str]:
        """Ordered instance ids matching the conjunctive filter."""
        spec = spec or FilterSpec()
        candidates: Iterable[str]
        if spec.transform is not None:
            candidates = list(self._transform_members.get(spec.transform, []))
        elif spec.feature is not None:
            candidates = list(self._feature_members.get(spec.feature, []))
        else:
            candidates = [inst.id for inst in self.dataset.instances]
        if spec.transform is not None and spec.feature is not None:
            feature_members = set(self._feature_members.get(spec.feature, []))
            candidates = [c for c in candidates if c in feature_members]

        out = []
        for instance_id in candidates:
            inst = self.dataset.get(instance_id)
            if spec.origin is not None and inst.origin != spec.origin:
                continue
            if spec.mark is not None:
                state, _ = self._state_of(instance_id)
                if state != spec.mark.value:
                    continue
            if spec.consistency is not None:
                verdict = self.verdicts.get(instance_id)
                if verdict is None or verdict.consistent != spec.consistency:
                    continue
            if spec.metric_ranges and not self._in_ranges(instance_id, spec.metric_ranges):
                continue
            out.append(instance_id)

        if spec.sort_by == "id":
            out.sort(reverse=spec.descending)
        else:
            out.sort(key=lambda i: (self._metric(i, spec.sort_by), i))
            if spec.descending:
                out.sort(key=lambda i: -self._metric(i, spec.sort_by))
        return out

    def _metric(self, instance_id: str, name: str) -> float:
        scores = self.scores.get(instance_id)
        if scores is None:
            return -1.0  # unscored sorts below every real score
        if name not in ("fluency", "grammaticality", "alignment"):
            raise SessionError(f"unknown metric {name!r}")
        return getattr(scores, name)

    def _in_ranges(self, instance_id: str, ranges) -> bool:
        for name, lo, hi in ranges:
            value = self._metric(instance_id, name)
            if not (lo <= value <= hi):
                return False
        return True

    # --- export and stats --------------------------------------------------

    def export_rows(self) -> list[dict]:
        rows = []
        for instance_id in sorted(m for m, mk in self.marks.items() if mk.state is MarkState.high_quality):
            inst = self.dataset.get(instance_id)
            row = {"id": inst.id, "text": inst.text, "label": inst.label, "origin": inst.origin}
            if inst.origin == GENERATED:
                row["parent_id"] = inst.parent_id
                chain = self.chains.get(inst.id)
                if chain:
                    row["provenance"] = [
                        {
                            "kind": r.kind.value,
                            "seed": r.seed,
                            "edits": [
                                {"start": e.start, "end": e.end, "before": e.before, "after": e.after}
                                for e in r.edits
                            ],
                        }
                        for r in chain.records
                    ]
            rows.append(row)
        return rows

    def export_bytes(self) -> bytes:
        lines = [json.dumps(row, ensure_ascii=False, sort_keys=True) for row in self.export_rows()]
        return ("".join(line + "\n" for line in lines)).encode("utf-8")

    def export_accepted(self, path) -> int:
        data = self.export_bytes()
        with open(path, "wb") as fh:
            fh.write(data)
        count = len(self.export_rows())
        self._append({
            "seq": self._next_seq(), "ts": self._clock(), "type": "export",
            "path": str(path), "count": count,
        })
        return count

    def stats(self) -> dict:
        inspected = len(self.marks)
        high = sum(1 for m in self.marks.values() if m.state is MarkState.high_quality)
        low = inspected - high
        return {
            "total": len(self.dataset),
            "originals": len(self.dataset.originals()),
            "generated": len(self.dataset.generated()),
            "inspected": inspected,
            "high_quality": high,
            "low_quality": low,
        }

    def snapshot(self) -> dict:
        """Comparable view of all replayable state."""
        return {
            "marks": {
                i: (m.state.value, m.source, m.timestamp) for i, m in sorted(self.marks.items())
            },
            "counts": {k: tuple(v) for k, v in sorted(self._counts.items())},
            "selection": self.last_selection,
            "filter": self.last_filter.to_dict() if self.last_filter else None,
            "seq": self.events[-1]["seq"] if self.events else 0,
        }

    # --- replay ------------------------------------------------------------

    def apply_event(self, event: dict) -> None:
        """Fold one recorded event into the session (no re-emission)."""
        if self.events and event["seq"] <= self.events[-1]["seq"]:
            raise SessionCorruptionError(
                f"event seq {event['seq']} not increasing after {self.events[-1]['seq']}"
            )
        etype = event.get("type")
        if etype == "mark":
            self._set_state(event["id"], MarkState(event["state"]), event.get("source", "individual"), event["ts"])
        elif etype == "batch_mark":
            source = f"batch:{event['key']}"
            for member in event["ids"]:
                self._set_state(member, MarkState(event["state"]), source, event["ts"])
        elif etype == "undo":
            target = next((e for e in self.events if e["seq"] == event["target"]), None)
            if target is None or target["type"] not in ("mark", "batch_mark"):
                raise SessionCorruptionError(f"undo targets missing event {event.get('target')}")
            self._apply_undo(target, event["ts"])
            self._undone.add(target["seq"])
        elif etype == "select":
            self.last_selection = tuple(event["ids"])
        elif etype == "filter":
            self.last_filter = FilterSpec.from_dict(event["spec"])
        elif etype == "export":
            pass
        else:
            raise SessionCorruptionError(f"unknown event type {etype!r}")
        self.events.append(event)


def replay_session(
    dataset: Dataset,
    chains: dict[str, ProvenanceChain],
    events: Iterable[dict],
    features: dict[str, frozenset[str]] | None = None,
    scores: dict[str, QualityScores] | None = None,
) -> Session:
    """Rebuild a session by folding a recorded event log from scratch."""
    session = Session(dataset, chains, features=features, scores=scores)
    for event in events:
        session.apply_event(event)
    return session


def read_events(path) -> list[dict]:
    """Read an event log; a truncated final line is dropped, anything else
    malformed (including non-increasing sequence numbers) is corruption."""
    lines = []
    with open(path, encoding="utf-8") as fh:
        raw_lines = fh.read().splitlines()
    for index, line in enumerate(raw_lines):
        if not line.strip():
            continue
        try:
            event = json.loads(line)
        except json.JSONDecodeError:
            if index == len(raw_lines) - 1:
                break  # interrupted write; state is everything before it
            raise SessionCorruptionError(f"event log line {index + 1}: invalid JSON")
        lines.append(event)
    for prev, cur in zip(lines, lines[1:]):
        if cur.get("seq", 0) <= prev.get("seq", 0):
            raise SessionCorruptionError(
                f"event log sequence regressed: {prev.get('seq')} -> {cur.get('seq')}"
            )
    return lines
