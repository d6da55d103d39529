"""Sample schema, JSON-lines corpus I/O, and deterministic splitting."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, SchemaError

POLARITY_VALUES = ("neg", "neu", "pos")
INTENSITY_VALUES = ("mild", "moderate", "strong")

POLARITY_INDEX = {v: i for i, v in enumerate(POLARITY_VALUES)}
INTENSITY_INDEX = {v: i for i, v in enumerate(INTENSITY_VALUES)}


@dataclass
class Sample:
    """One tokenized message with its gold labels.

    ``behavior_risk`` is a per-user label replicated onto each of that
    user's samples.
    """

    id: str
    user: str
    timestamp: float
    tokens: list[str]
    crisis: int
    polarity: str
    intensity: str
    behavior_risk: int

    def validate(self) -> "Sample":
        if not self.tokens:
            raise SchemaError(f"sample {self.id!r}: field 'tokens' must be non-empty")
        if self.timestamp < 0:
            raise SchemaError(f"sample {self.id!r}: field 'timestamp' must be non-negative")
        if self.crisis not in (0, 1):
            raise SchemaError(f"sample {self.id!r}: field 'crisis' must be 0 or 1")
        if self.polarity not in POLARITY_VALUES:
            raise SchemaError(
                f"sample {self.id!r}: field 'polarity' must be one of {POLARITY_VALUES}"
            )
        if self.intensity not in INTENSITY_VALUES:
            raise SchemaError(
                f"sample {self.id!r}: field 'intensity' must be one of {INTENSITY_VALUES}"
            )
        if self.behavior_risk not in (0, 1):
            raise SchemaError(f"sample {self.id!r}: field 'behavior_risk' must be 0 or 1")
        return self

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "user": self.user,
            "timestamp": self.timestamp,
            "tokens": list(self.tokens),
            "labels": {
                "crisis": self.crisis,
                "polarity": self.polarity,
                "intensity": self.intensity,
                "behavior_risk": self.behavior_risk,
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Sample":
        try:
            labels = d["labels"]
            sample = cls(
                id=str(d["id"]),
                user=str(d["user"]),
                timestamp=float(d["timestamp"]),
                tokens=[str(t) for t in d["tokens"]],
                crisis=int(labels["crisis"]),
                polarity=str(labels["polarity"]),
                intensity=str(labels["intensity"]),
                behavior_risk=int(labels["behavior_risk"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"sample record is missing or has a malformed field: {exc}") from exc
        return sample.validate()


def save_corpus(samples: Sequence[Sample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_json_dict(), separators=(",", ":")) + "\n")


def load_corpus(path: str | Path) -> list[Sample]:
    """Parse a JSON-lines corpus, validating every invariant on load."""
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: parse error on line {lineno}: {exc}") from exc
            try:
                samples.append(Sample.from_json_dict(record))
            except SchemaError as exc:
                raise SchemaError(f"{path}: line {lineno}: {exc}") from exc
    return samples


def load_provenance(path: str | Path) -> dict[str, str]:
    """Sidecar mapping sample id -> planted mechanism (or 'none')."""
    mapping: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                mapping[str(record["id"])] = str(record["mechanism"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{path}: parse error on line {lineno}: {exc}") from exc
    return mapping


def save_provenance(mapping: dict[str, str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sid, mech in mapping.items():
            fh.write(json.dumps({"id": sid, "mechanism": mech}, separators=(",", ":")) + "\n")


@dataclass
class SplitSpec:
    """Ratios for train/val/test, optional grouping by user, and a seed."""

    train: float = 0.7
    val: float = 0.15
    test: float = 0.15
    by_user: bool = False
    seed: int = 0

    def __post_init__(self):
        for name, r in (("train", self.train), ("val", self.val), ("test", self.test)):
            if r < 0:
                raise ConfigError(f"split ratio {name} must be nonnegative, got {r}")
        if abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise ConfigError(
                f"split ratios must sum to 1, got {self.train + self.val + self.test}"
            )


def split(
    samples: Sequence[Sample], spec: SplitSpec
) -> tuple[list[Sample], list[Sample], list[Sample]]:
    """Seeded shuffle then partition; with ``by_user`` every user's samples
    land in exactly one split (greedy fill toward the ratio targets).
    """
    n = len(samples)
    if n == 0:
        raise DataError("cannot split an empty sample list")
    rng = np.random.default_rng(spec.seed)
    if spec.by_user:
        users = sorted({s.user for s in samples})
        order = rng.permutation(len(users))
        by_user: dict[str, list[Sample]] = {}
        for s in samples:
            by_user.setdefault(s.user, []).append(s)
        targets = [spec.train * n, spec.val * n]
        parts: tuple[list[Sample], list[Sample], list[Sample]] = ([], [], [])
        bucket = 0
        for ui in order:
            group = by_user[users[ui]]
            while bucket < 2 and len(parts[bucket]) >= targets[bucket]:
                bucket += 1
            parts[bucket].extend(group)
        train_s, val_s, test_s = parts
    else:
        order = rng.permutation(n)
        n_train = int(np.floor(spec.train * n))
        n_val = int(np.floor(spec.val * n))
        if spec.test == 0.0:
            n_val = n - n_train
        if spec.val == 0.0 and spec.test == 0.0:
            n_train, n_val = n, 0
        shuffled = [samples[i] for i in order]
        train_s = shuffled[:n_train]
        val_s = shuffled[n_train : n_train + n_val]
        test_s = shuffled[n_train + n_val :]
    for name, ratio, part in (
        ("train", spec.train, train_s),
        ("val", spec.val, val_s),
        ("test", spec.test, test_s),
    ):
        if ratio > 0 and not part:
            raise DataError(
                f"too few samples for a non-empty {name} split ({n} samples, ratio {ratio})"
            )
    return list(train_s), list(val_s), list(test_s)
