"""Crisis metrics: confusion counts, precision/recall/F1, the crisis
detection rate (recall on the crisis-positive class), per-intensity recall,
and per-mechanism recall via the provenance sidecar.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .data import INTENSITY_VALUES, POLARITY_VALUES, Sample
from .errors import DataError, NumericError


@dataclass
class Prediction:
    """Per-sample model output consumed by the harness."""

    crisis_prob: float
    polarity_probs: np.ndarray  # (3,) over (neg, neu, pos)
    intensity_probs: np.ndarray  # (3,) over (mild, moderate, strong)
    behavior_prob: float | None = None

    @property
    def polarity(self) -> str:
        return POLARITY_VALUES[int(np.argmax(self.polarity_probs))]

    @property
    def intensity(self) -> str:
        return INTENSITY_VALUES[int(np.argmax(self.intensity_probs))]


class Predictor(Protocol):
    def predict_all(self, token_lists: Sequence[Sequence[str]]) -> list[Prediction]: ...


@dataclass
class MetricsReport:
    """Headline metrics plus the raw counts they were computed from."""

    precision: float
    recall: float
    f1: float
    cdr: float
    tp: int
    fp: int
    tn: int
    fn: int
    per_intensity_recall: dict[str, float] = field(default_factory=dict)
    per_mechanism_recall: dict[str, float] = field(default_factory=dict)
    stability_per_bucket: dict[str, float] = field(default_factory=dict)

    def validate(self) -> "MetricsReport":
        p, r, f1, cdr = _prf_from_counts(self.tp, self.fp, self.fn)
        for name, stored, recomputed in (
            ("precision", self.precision, p),
            ("recall", self.recall, r),
            ("f1", self.f1, f1),
            ("cdr", self.cdr, cdr),
        ):
            if abs(stored - recomputed) > 1e-12:
                raise NumericError(
                    f"{name}={stored} inconsistent with confusion counts (expected {recomputed})"
                )
        for group in (self.per_intensity_recall, self.per_mechanism_recall):
            for key, value in group.items():
                if not (0.0 <= value <= 1.0):
                    raise NumericError(f"recall {key}={value} outside [0, 1]")
        return self

    def to_json_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "cdr": self.cdr,
            "counts": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
            "per_intensity_recall": dict(self.per_intensity_recall),
            "per_mechanism_recall": dict(self.per_mechanism_recall),
            "stability_per_bucket": dict(self.stability_per_bucket),
        }

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def save_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric", "value"])
            writer.writerow(["precision", repr(self.precision)])
            writer.writerow(["recall", repr(self.recall)])
            writer.writerow(["f1", repr(self.f1)])
            writer.writerow(["cdr", repr(self.cdr)])
            for name, value in (("tp", self.tp), ("fp", self.fp), ("tn", self.tn), ("fn", self.fn)):
                writer.writerow([name, value])
            for key in sorted(self.per_intensity_recall):
                writer.writerow([f"recall_intensity_{key}", repr(self.per_intensity_recall[key])])
            for key in sorted(self.per_mechanism_recall):
                writer.writerow([f"recall_mechanism_{key}", repr(self.per_mechanism_recall[key])])
            for key in sorted(self.stability_per_bucket):
                writer.writerow([f"stability_{key}", repr(self.stability_per_bucket[key])])


def _prf_from_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float, float]:
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1, recall


def evaluate(
    predictor: Predictor,
    samples: Sequence[Sample],
    provenance: dict[str, str] | None = None,
    threshold: float = 0.5,
) -> MetricsReport:
    """Hard-threshold evaluation of crisis detection plus intensity recall.

    Per-mechanism recall is included whenever ``provenance`` is given; if a
    crisis sample is missing from the mapping that is an error, since the
    per-mechanism numbers would silently lie.
    """
    if not samples:
        raise DataError("evaluate needs a non-empty sample list")
    preds = predictor.predict_all([s.tokens for s in samples])
    crisis_pred = [int(p.crisis_prob >= threshold) for p in preds]
    tp = fp = tn = fn = 0
    for pred, s in zip(crisis_pred, samples):
        if s.crisis == 1:
            tp += pred
            fn += 1 - pred
        else:
            fp += pred
            tn += 1 - pred
    precision, recall, f1, cdr = _prf_from_counts(tp, fp, fn)

    per_intensity: dict[str, float] = {}
    for klass in INTENSITY_VALUES:
        members = [(p, s) for p, s in zip(preds, samples) if s.intensity == klass]
        if not members:
            continue
        hit = sum(1 for p, s in members if p.intensity == s.intensity)
        per_intensity[klass] = hit / len(members)

    per_mechanism: dict[str, float] = {}
    if provenance is not None:
        crisis_samples = [(c, s) for c, s in zip(crisis_pred, samples) if s.crisis == 1]
        for pred, s in crisis_samples:
            if s.id not in provenance:
                raise DataError(
                    f"per-mechanism evaluation requested but sample {s.id!r} has no provenance entry"
                )
        groups: dict[str, list[int]] = {}
        for pred, s in crisis_samples:
            groups.setdefault(provenance[s.id], []).append(pred)
        for mech in sorted(groups):
            hits = groups[mech]
            per_mechanism[mech] = sum(hits) / len(hits)

    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        cdr=cdr,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        per_intensity_recall=per_intensity,
        per_mechanism_recall=per_mechanism,
    ).validate()


def depth_distribution(
    predictor: Predictor, samples: Sequence[Sample]
) -> dict[str, float]:
    """Recall of the predicted intensity for each gold intensity class.

    Classes absent from the gold labels are absent from the result.
    """
    if not samples:
        raise DataError("depth_distribution needs a non-empty sample list")
    preds = predictor.predict_all([s.tokens for s in samples])
    out: dict[str, float] = {}
    for klass in INTENSITY_VALUES:
        members = [(p, s) for p, s in zip(preds, samples) if s.intensity == klass]
        if not members:
            continue
        out[klass] = sum(1 for p, s in members if p.intensity == klass) / len(members)
    return out
