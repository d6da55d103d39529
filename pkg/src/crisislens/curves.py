"""The two figure protocols: the detection-rate curve over training volume
with a trailing time window, and the emotional-stability curve over text
length buckets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Sample
from .errors import ConfigError, DataError
from .metrics import Predictor

SECONDS_PER_DAY = 86400.0

INTENSITY_LEVELS = np.array([0.0, 1.0, 2.0])  # mild, moderate, strong


@dataclass
class CurvePoint:
    """One detection-curve entry; ``cdr`` is None when the window was empty."""

    n_trained: int
    cdr: float | None
    window_size: int


def detection_curve(
    train_fn: Callable[[Sequence[Sample]], Predictor],
    stream: Sequence[Sample],
    eval_samples: Sequence[Sample],
    checkpoints: Sequence[int],
    window_days: float = 7.0,
    threshold: float = 0.5,
) -> list[CurvePoint]:
    """Crisis detection rate as training consumes a time-ordered stream.

    At checkpoint n the model trains on the first n stream samples and is
    scored on the held-out samples whose timestamps fall inside the trailing
    window anchored at the latest training timestamp (the stream start when
    n == 0). Checkpoints with an empty window yield ``cdr=None`` rather
    than 0, so the curve length always equals the checkpoint count.
    """
    stream = list(stream)
    for a, b in zip(stream, stream[1:]):
        if a.timestamp > b.timestamp:
            raise DataError("detection_curve stream must be time-ordered")
    checkpoints = list(checkpoints)
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ConfigError("checkpoints must be strictly increasing")
    if checkpoints and checkpoints[-1] > len(stream):
        raise ConfigError(
            f"checkpoint {checkpoints[-1]} exceeds stream length {len(stream)}"
        )
    window_s = window_days * SECONDS_PER_DAY
    points: list[CurvePoint] = []
    for n in checkpoints:
        consumed = stream[:n]
        t_ref = consumed[-1].timestamp if consumed else (stream[0].timestamp if stream else 0.0)
        in_window = [s for s in eval_samples if t_ref - window_s <= s.timestamp <= t_ref]
        model = train_fn(consumed)
        if not in_window:
            points.append(CurvePoint(n_trained=n, cdr=None, window_size=0))
            continue
        preds = model.predict_all([s.tokens for s in in_window])
        tp = sum(
            1 for p, s in zip(preds, in_window) if s.crisis == 1 and p.crisis_prob >= threshold
        )
        fn = sum(
            1 for p, s in zip(preds, in_window) if s.crisis == 1 and p.crisis_prob < threshold
        )
        cdr = tp / (tp + fn) if (tp + fn) else 0.0
        points.append(CurvePoint(n_trained=n, cdr=cdr, window_size=len(in_window)))
    return points


@dataclass
class BucketStability:
    mean_stability: float
    n_samples: int


def intensity_expectation(intensity_probs: np.ndarray) -> float:
    """Scalar intensity in [0, 2] from the three class probabilities."""
    return float(np.dot(intensity_probs, INTENSITY_LEVELS))


def trajectory_stability(expectations: Sequence[float]) -> float:
    """1 / (1 + sigma) where sigma is the population standard deviation of
    successive differences; a constant trajectory scores exactly 1."""
    e = np.asarray(expectations, dtype=np.float64)
    if e.size < 2:
        return 1.0
    diffs = np.diff(e)
    return float(1.0 / (1.0 + np.std(diffs)))


def stability_curve(
    model: Predictor,
    samples: Sequence[Sample],
    length_buckets: Sequence[tuple[int, int]],
) -> dict[str, BucketStability]:
    """Mean prefix-trajectory stability per text-length bucket.

    For each sample the model scores every token prefix; the intensity
    expectation trajectory's dispersion sets the stability. Buckets that
    match no samples are absent from the result.
    """
    if not samples:
        raise DataError("stability_curve needs a non-empty sample list")
    buckets = [(int(lo), int(hi)) for lo, hi in length_buckets]
    for lo, hi in buckets:
        if lo > hi or lo < 1:
            raise ConfigError(f"invalid length bucket ({lo}, {hi})")
    per_bucket: dict[str, list[float]] = {}
    for s in samples:
        L = len(s.tokens)
        bucket = next((f"{lo}-{hi}" for lo, hi in buckets if lo <= L <= hi), None)
        if bucket is None:
            raise DataError(f"sample {s.id!r} with length {L} not covered by any bucket")
        prefixes = [s.tokens[: i + 1] for i in range(L)]
        preds = model.predict_all(prefixes)
        expectations = [intensity_expectation(p.intensity_probs) for p in preds]
        per_bucket.setdefault(bucket, []).append(trajectory_stability(expectations))
    return {
        key: BucketStability(mean_stability=float(np.mean(vals)), n_samples=len(vals))
        for key, vals in sorted(per_bucket.items(), key=lambda kv: int(kv[0].split("-")[0]))
    }


def detection_curve_rows(points: list[CurvePoint]) -> list[list]:
    rows = [["n_trained", "cdr", "window_size"]]
    for p in points:
        rows.append([p.n_trained, "" if p.cdr is None else repr(p.cdr), p.window_size])
    return rows


def stability_rows(curve: dict[str, BucketStability]) -> list[list]:
    rows = [["bucket", "mean_stability", "n_samples"]]
    for key, b in curve.items():
        rows.append([key, repr(b.mean_stability), b.n_samples])
    return rows
