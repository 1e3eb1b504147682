"""Session directory layout shared by the CLI and the HTTP service.

A session directory bundles everything one inspection needs:

    originals.jsonl   the ingested corpus rows {id, text, label}
    generated.jsonl   generated rows {id, text, label, origin, parent_id}
    ledger.jsonl      provenance ledger {id, parent_id, records: [...]}
    scores.jsonl      metric sidecar {id, fluency, grammaticality, alignment}
    events.jsonl      append-only session event log
    session.json      name, label set, metrics config and calibration

A writer claims the directory with a token lock file; mutations check the
token so a second concurrent writer is refused rather than interleaved.
"""

from __future__ import annotations

import json
import os
import secrets
from pathlib import Path

from .corpus import Dataset, LabeledInstance, load_dataset, load_instances, merge_generated
from .metrics import Calibration, MetricsConfig, QualityScores, read_scores, write_scores
from .session import Session, SessionError, read_events, replay_session
from .transforms import ProvenanceChain, read_ledger, write_ledger


class StoreError(ValueError):
    pass


class WriterConflict(StoreError):
    """Another process holds the session's writer lock."""


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._writer_token: str | None = None

    @property
    def originals_path(self) -> Path:
        return self.root / "originals.jsonl"

    @property
    def generated_path(self) -> Path:
        return self.root / "generated.jsonl"

    @property
    def ledger_path(self) -> Path:
        return self.root / "ledger.jsonl"

    @property
    def scores_path(self) -> Path:
        return self.root / "scores.jsonl"

    @property
    def events_path(self) -> Path:
        return self.root / "events.jsonl"

    @property
    def meta_path(self) -> Path:
        return self.root / "session.json"

    @property
    def lock_path(self) -> Path:
        return self.root / ".writer.lock"

    # --- writing -----------------------------------------------------------

    def init_dir(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)

    def write_meta(self, meta: dict) -> None:
        self.meta_path.write_text(
            json.dumps(meta, indent=2, ensure_ascii=False, sort_keys=True) + "\n", "utf-8"
        )

    def read_meta(self) -> dict:
        if not self.meta_path.exists():
            raise StoreError(f"{self.meta_path} missing; not a session directory")
        return json.loads(self.meta_path.read_text("utf-8"))

    def write_originals(self, dataset: Dataset) -> None:
        with open(self.originals_path, "w", encoding="utf-8") as fh:
            for inst in dataset.originals():
                row = {"id": inst.id, "text": inst.text, "label": inst.label}
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    def write_generated(self, pairs) -> None:
        with open(self.generated_path, "w", encoding="utf-8") as fh:
            for inst, _ in pairs:
                row = {
                    "id": inst.id,
                    "text": inst.text,
                    "label": inst.label,
                    "origin": inst.origin,
                    "parent_id": inst.parent_id,
                }
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        write_ledger(self.ledger_path, pairs)

    def write_score_run(self, scores: dict[str, QualityScores], calibration: Calibration) -> None:
        write_scores(self.scores_path, scores)
        meta = self.read_meta()
        meta["calibration"] = {"q_lo": calibration.q_lo, "q_hi": calibration.q_hi}
        self.write_meta(meta)

    def append_event(self, event: dict) -> None:
        with open(self.events_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()

    # --- reading -----------------------------------------------------------

    def load_dataset(self) -> Dataset:
        meta = self.read_meta()
        dataset = load_dataset(
            self.originals_path,
            format="jsonl",
            name=meta.get("name", self.root.name),
            label_set=meta.get("label_set"),
        )
        if self.generated_path.exists():
            dataset = merge_generated(dataset, load_instances(self.generated_path, format="jsonl"))
        return dataset

    def load_chains(self) -> dict[str, ProvenanceChain]:
        if not self.ledger_path.exists():
            return {}
        return read_ledger(self.ledger_path)

    def load_scores(self) -> dict[str, QualityScores]:
        if not self.scores_path.exists():
            return {}
        return read_scores(self.scores_path)

    def load_events(self) -> list[dict]:
        if not self.events_path.exists():
            return []
        return read_events(self.events_path)

    def metrics_config(self) -> MetricsConfig:
        meta = self.read_meta()
        cfg = meta.get("metrics", {})
        return MetricsConfig(
            order=cfg.get("order", 3),
            k=cfg.get("k", 0.1),
            folds=cfg.get("folds", 5),
            lo_percentile=cfg.get("lo_percentile", 5.0),
            hi_percentile=cfg.get("hi_percentile", 95.0),
            seed=cfg.get("seed", 0),
        )

    def load_session(self, features=None, attach_sink: bool = True) -> Session:
        dataset = self.load_dataset()
        chains = self.load_chains()
        scores = self.load_scores()
        session = replay_session(
            dataset, chains, self.load_events(), features=features, scores=scores
        )
        if attach_sink:
            session._event_sink = self.append_event
        return session

    # --- writer lock ---------------------------------------------------------

    def acquire_writer(self) -> None:
        if self.lock_path.exists():
            held = json.loads(self.lock_path.read_text("utf-8"))
            if _pid_alive(held.get("pid", -1)):
                raise WriterConflict(
                    f"session {self.root} is locked by pid {held.get('pid')}"
                )
        token = secrets.token_hex(8)
        self.lock_path.write_text(json.dumps({"pid": os.getpid(), "token": token}), "utf-8")
        self._writer_token = token

    def holds_writer(self) -> bool:
        if self._writer_token is None or not self.lock_path.exists():
            return False
        try:
            held = json.loads(self.lock_path.read_text("utf-8"))
        except (json.JSONDecodeError, OSError):
            return False
        return held.get("token") == self._writer_token

    def release_writer(self) -> None:
        if self.holds_writer():
            self.lock_path.unlink(missing_ok=True)
        self._writer_token = None


def _pid_alive(pid: int) -> bool:
    if pid <= 0:
        return False
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True
