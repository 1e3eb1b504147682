"""Per-instance quality scores: fluency, grammaticality, label alignment.

All three land in [0, 1] with 0 the lowest quality and 1 the highest. Fluency
normalizes log-perplexity between calibration quantiles of the original
corpus (5th and 95th percentile by default), so scores stay stable across
sessions once the calibration is persisted with the dataset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alignment import ConfidentJoint, alignment_scores
from .corpus import Dataset, ORIGINAL
from .grammar import grammaticality
from .ngram import NgramModel, train_lm


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class QualityScores:
    fluency: float
    grammaticality: float
    alignment: float

    def __post_init__(self) -> None:
        for name in ("fluency", "grammaticality", "alignment"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise MetricsError(f"{name} score {value} outside [0, 1]")


@dataclass(frozen=True)
class MetricsConfig:
    order: int = 3
    k: float = 0.1
    folds: int = 5
    lo_percentile: float = 5.0
    hi_percentile: float = 95.0
    seed: int = 0


@dataclass(frozen=True)
class Calibration:
    q_lo: float  # log-perplexity at the low quantile (best texts)
    q_hi: float  # log-perplexity at the high quantile (worst texts)


def calibrate_fluency(
    model: NgramModel,
    texts: list[str],
    lo_percentile: float = 5.0,
    hi_percentile: float = 95.0,
) -> Calibration:
    values = [ppl for ppl in (model.log_perplexity(t) for t in texts) if ppl is not None]
    if not values:
        raise MetricsError("no scorable text to calibrate on")
    q_lo, q_hi = np.percentile(values, [lo_percentile, hi_percentile])
    return Calibration(q_lo=float(q_lo), q_hi=float(q_hi))


def fluency(model: NgramModel, text: str, calibration: Calibration) -> float:
    """1 - clamp((log ppl - q_lo) / (q_hi - q_lo), 0, 1); empty text scores 0."""
    log_ppl = model.log_perplexity(text)
    if log_ppl is None:
        return 0.0
    if calibration.q_hi <= calibration.q_lo:
        return 1.0 if log_ppl <= calibration.q_lo else 0.0
    ratio = (log_ppl - calibration.q_lo) / (calibration.q_hi - calibration.q_lo)
    return 1.0 - min(1.0, max(0.0, ratio))


@dataclass
class ScoreRun:
    scores: dict[str, QualityScores]
    calibration: Calibration
    joint: ConfidentJoint


def score_dataset(dataset: Dataset, config: MetricsConfig = MetricsConfig()) -> ScoreRun:
    """Score every instance. The LM and classifier folds are fit on originals
    only, so the metrics never endorse the texts they are judging."""
    original_texts = [i.text for i in dataset.instances if i.origin == ORIGINAL]
    model = train_lm(original_texts, order=config.order, k=config.k)
    calibration = calibrate_fluency(
        model, original_texts, config.lo_percentile, config.hi_percentile
    )
    align, joint = alignment_scores(dataset, folds=config.folds, seed=config.seed)

    scores: dict[str, QualityScores] = {}
    for inst in dataset.instances:
        _, gram = grammaticality(inst.text)
        scores[inst.id] = QualityScores(
            fluency=fluency(model, inst.text, calibration),
            grammaticality=gram,
            alignment=align[inst.id],
        )
    return ScoreRun(scores=scores, calibration=calibration, joint=joint)


def score_all(dataset: Dataset, config: MetricsConfig = MetricsConfig()) -> dict[str, QualityScores]:
    return score_dataset(dataset, config).scores


def write_scores(path: str | Path, scores: dict[str, QualityScores]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst_id in scores:  # dataset order, deterministic
            q = scores[inst_id]
            row = {
                "id": inst_id,
                "fluency": q.fluency,
                "grammaticality": q.grammaticality,
                "alignment": q.alignment,
            }
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def read_scores(path: str | Path) -> dict[str, QualityScores]:
    scores: dict[str, QualityScores] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                scores[row["id"]] = QualityScores(
                    fluency=row["fluency"],
                    grammaticality=row["grammaticality"],
                    alignment=row["alignment"],
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MetricsError(f"scores line {lineno}: {exc}") from None
    return scores
