"""Social graph, hierarchical adjacency levels, graph convolution with
searchable per-level gates, and the hard precision/recall/F1 reward that
drives the gate search.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .autodiff import Tensor, concat, matmul, relu, stack_rows
from .errors import ConfigError, DataError, DimensionError

GATE_MIN = 0.0
GATE_MAX = 2.0


@dataclass
class SocialGraph:
    """Undirected user graph; each edge stored once with sorted endpoints."""

    users: list[str]
    edges: list[tuple[str, str]]

    def __post_init__(self):
        if len(set(self.users)) != len(self.users):
            raise DataError("graph users must be unique")
        known = set(self.users)
        normalized = []
        seen = set()
        for a, b in self.edges:
            if a not in known or b not in known:
                raise DataError(f"edge ({a!r}, {b!r}) references an unknown user")
            if a == b:
                raise DataError(f"self-edge on user {a!r} is not allowed")
            key = (a, b) if a <= b else (b, a)
            if key in seen:
                continue
            seen.add(key)
            normalized.append(key)
        self.edges = normalized

    @property
    def n(self) -> int:
        return len(self.users)

    def index(self, user: str) -> int:
        try:
            return self.users.index(user)
        except ValueError:
            raise DataError(f"user {user!r} is not in the graph") from None

    def adjacency(self) -> np.ndarray:
        idx = {u: i for i, u in enumerate(self.users)}
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for u, v in self.edges:
            a[idx[u], idx[v]] = 1.0
            a[idx[v], idx[u]] = 1.0
        return a

    def to_json_dict(self) -> dict:
        return {"users": list(self.users), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SocialGraph":
        if not isinstance(d, dict) or "users" not in d or "edges" not in d:
            raise DataError("graph JSON must have 'users' and 'edges' keys")
        return cls(
            users=[str(u) for u in d["users"]],
            edges=[(str(a), str(b)) for a, b in d["edges"]],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "SocialGraph":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"graph file {path} is not valid JSON: {exc}") from exc
        return cls.from_json_dict(d)


@dataclass
class HierarchicalAdjacency:
    """Row-stochastic neighborhood matrices, one per propagation level."""

    levels: list[np.ndarray]

    def __post_init__(self):
        for k, a in enumerate(self.levels):
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise DimensionError(f"adjacency level {k} is not square: {a.shape}")
            if (a < 0).any():
                raise DataError(f"adjacency level {k} has negative entries")
            if np.abs(a.sum(axis=1) - 1.0).max() > 1e-9:
                raise DataError(f"adjacency level {k} rows do not sum to 1")

    @property
    def n(self) -> int:
        return self.levels[0].shape[0]

    @property
    def depth(self) -> int:
        return len(self.levels)


def build_hierarchical_adjacency(graph: SocialGraph, depth: int) -> HierarchicalAdjacency:
    """Level k is the row-normalized (k+1)-th power of the self-looped,
    row-normalized adjacency, so deeper levels mix progressively wider
    neighborhoods.
    """
    if depth < 1:
        raise ConfigError(f"adjacency depth must be >= 1, got {depth}")
    if graph.n < 1:
        raise DataError("graph has no users")
    a_hat = graph.adjacency() + np.eye(graph.n)
    a_hat /= a_hat.sum(axis=1, keepdims=True)
    levels = [a_hat]
    power = a_hat
    for _ in range(1, depth):
        power = power @ a_hat
        power = power / power.sum(axis=1, keepdims=True)
        levels.append(power)
    return HierarchicalAdjacency(levels=levels)


@dataclass
class HGCParams:
    """Per-level weights/biases, bounded multiplicative gates, and the
    two-class behavior head over the final node embedding."""

    weights: list[Tensor]  # level k: (d_k, d_{k+1})
    biases: list[Tensor]  # level k: (d_{k+1},)
    gates: np.ndarray  # (K,), each in [GATE_MIN, GATE_MAX]; searched, not grad-trained
    behavior_head: Tensor  # (2, d_K)

    def __post_init__(self):
        self.gates = np.asarray(self.gates, dtype=np.float64)
        if self.gates.ndim != 1 or self.gates.shape[0] != len(self.weights):
            raise DimensionError(
                f"need one gate per level: {self.gates.shape} gates for {len(self.weights)} levels"
            )
        if (self.gates < GATE_MIN).any() or (self.gates > GATE_MAX).any():
            raise ConfigError(f"gates must lie in [{GATE_MIN}, {GATE_MAX}], got {self.gates}")
        for k in range(len(self.weights) - 1):
            if self.weights[k].data.shape[1] != self.weights[k + 1].data.shape[0]:
                raise DimensionError(
                    f"level {k} output dim {self.weights[k].data.shape[1]} does not chain"
                    f" into level {k + 1} input dim {self.weights[k + 1].data.shape[0]}"
                )
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.data.shape != (w.data.shape[1],):
                raise DimensionError(
                    f"level {k} bias shape {b.data.shape} does not match weight {w.data.shape}"
                )

    @property
    def depth(self) -> int:
        return len(self.weights)

    def with_gates(self, gates: np.ndarray) -> "HGCParams":
        return HGCParams(
            weights=self.weights,
            biases=self.biases,
            gates=np.asarray(gates, dtype=np.float64),
            behavior_head=self.behavior_head,
        )


def hgc_forward(h0: Tensor, adjacency: HierarchicalAdjacency, params: HGCParams) -> Tensor:
    """Propagate node features through every level.

    Each level computes gate_k * (A_k @ H @ W_k + B_k); hidden levels apply
    ReLU, the last level stays linear. Gradients flow to h0 and to every
    W/B; gates and adjacencies are constants.
    """
    if h0.data.ndim != 2 or h0.data.shape[0] != adjacency.n:
        raise DimensionError(
            f"node features {h0.data.shape} do not match adjacency with {adjacency.n} nodes"
        )
    if adjacency.depth != params.depth:
        raise DimensionError(
            f"{adjacency.depth} adjacency levels vs {params.depth} parameter levels"
        )
    if h0.data.shape[1] != params.weights[0].data.shape[0]:
        raise DimensionError(
            f"feature dim {h0.data.shape[1]} does not match level-0 weight"
            f" {params.weights[0].data.shape}"
        )
    h = h0
    for k in range(params.depth):
        a_k = Tensor(adjacency.levels[k])
        z = (matmul(matmul(a_k, h), params.weights[k]) + params.biases[k]) * float(params.gates[k])
        h = relu(z) if k < params.depth - 1 else z
    return h


def node_features(
    samples: Sequence,
    graph: SocialGraph,
    per_sample: dict[str, tuple[Tensor, Tensor]],
    window_seconds: float,
) -> Tensor:
    """Per-user feature rows bridging the text pipeline into the graph.

    ``per_sample`` maps sample id -> (sentiment vector, mean fused embedding).
    Each user's row is the mean sentiment vector concatenated with the mean
    fused embedding over that user's messages inside the trailing window
    anchored at the latest timestamp present; users with no messages in the
    window get zero rows.
    """
    if window_seconds <= 0:
        raise ConfigError(f"window must be positive, got {window_seconds}")
    user_index = {u: i for i, u in enumerate(graph.users)}
    for s in samples:
        if s.user not in user_index:
            raise DataError(f"sample {s.id!r} references user {s.user!r} not in the graph")
    d_s = d_m = None
    for sv, fv in per_sample.values():
        d_s, d_m = sv.data.shape[0], fv.data.shape[0]
        break
    if d_s is None:
        raise DataError("node_features needs at least one per-sample vector")
    t_max = max(s.timestamp for s in samples) if samples else 0.0
    cutoff = t_max - window_seconds
    by_user: dict[int, list[tuple[Tensor, Tensor]]] = {}
    for s in samples:
        if s.timestamp < cutoff:
            continue
        by_user.setdefault(user_index[s.user], []).append(per_sample[s.id])
    rows = []
    zero_row = Tensor(np.zeros(d_s + d_m))
    for i in range(graph.n):
        group = by_user.get(i)
        if not group:
            rows.append(zero_row)
            continue
        inv = 1.0 / len(group)
        s_sum = group[0][0]
        f_sum = group[0][1]
        for sv, fv in group[1:]:
            s_sum = s_sum + sv
            f_sum = f_sum + fv
        rows.append(concat([s_sum * inv, f_sum * inv], axis=0))
    return stack_rows(rows)


@dataclass
class RewardWeights:
    """Mixing weights for the precision/recall/F1 reward."""

    lambda1: float = 1.0 / 3.0
    lambda2: float = 1.0 / 3.0
    lambda3: float = 1.0 / 3.0

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0 or self.lambda3 < 0:
            raise ConfigError("reward weights must be nonnegative")
        if self.lambda1 + self.lambda2 + self.lambda3 <= 0:
            raise ConfigError("reward weights must not all be zero")

    @property
    def total(self) -> float:
        return self.lambda1 + self.lambda2 + self.lambda3


def compute_reward(
    predictions: Sequence[int], labels: Sequence[int], weights: RewardWeights
) -> float:
    """Weighted precision/recall/F1 of the positive class from hard counts.

    Any metric whose denominator is zero is defined as 0.
    """
    preds = np.asarray(predictions, dtype=np.int64)
    golds = np.asarray(labels, dtype=np.int64)
    if preds.shape != golds.shape or preds.ndim != 1:
        raise DataError(
            f"predictions and labels must be equal-length vectors, got {preds.shape} vs {golds.shape}"
        )
    for arr, name in ((preds, "predictions"), (golds, "labels")):
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise DataError(f"{name} must be binary (0/1)")
    tp = int(((preds == 1) & (golds == 1)).sum())
    fp = int(((preds == 1) & (golds == 0)).sum())
    fn = int(((preds == 0) & (golds == 1)).sum())
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return weights.lambda1 * precision + weights.lambda2 * recall + weights.lambda3 * f1


@dataclass
class BprmStep:
    """Outcome of one gate-search step."""

    reward_before: float
    reward_after: float
    accepted: bool
    gates: np.ndarray = field(repr=False, default=None)


def bprm_update(
    params: HGCParams,
    reward_eval: Callable[[np.ndarray], float],
    step: float,
    rng_seed: int,
) -> tuple[HGCParams, BprmStep]:
    """One simultaneous-perturbation hill-climb step over the gates.

    Draws a seeded +/-1 perturbation, evaluates the reward at both clamped
    candidates, and moves only when the better candidate strictly improves
    the incumbent reward. ``reward_eval`` must be deterministic for fixed
    gates, which makes the accept-only-improving property exact.
    """
    if step <= 0:
        raise ConfigError(f"bprm step must be positive, got {step}")
    rng = np.random.default_rng(rng_seed)
    delta = rng.integers(0, 2, size=params.depth) * 2 - 1
    g0 = params.gates
    r0 = float(reward_eval(g0))
    g_plus = np.clip(g0 + step * delta, GATE_MIN, GATE_MAX)
    g_minus = np.clip(g0 - step * delta, GATE_MIN, GATE_MAX)
    r_plus = float(reward_eval(g_plus))
    r_minus = float(reward_eval(g_minus))
    best_gates, best_reward = (g_plus, r_plus) if r_plus >= r_minus else (g_minus, r_minus)
    if best_reward > r0:
        return params.with_gates(best_gates), BprmStep(
            reward_before=r0, reward_after=best_reward, accepted=True, gates=best_gates.copy()
        )
    return params, BprmStep(
        reward_before=r0, reward_after=r0, accepted=False, gates=g0.copy()
    )


def init_hgc_params(
    rng: np.random.Generator, d_in: int, level_dims: tuple[int, ...]
) -> HGCParams:
    """Seeded random init; gates start at 1 (no scaling)."""
    dims = (d_in,) + tuple(level_dims)
    weights = [
        Tensor(rng.normal(0.0, 1.0 / np.sqrt(dims[k]), size=(dims[k], dims[k + 1])), requires_grad=True)
        for k in range(len(level_dims))
    ]
    biases = [Tensor(np.zeros(dims[k + 1]), requires_grad=True) for k in range(len(level_dims))]
    behavior_head = Tensor(
        rng.normal(0.0, 1.0 / np.sqrt(dims[-1]), size=(2, dims[-1])), requires_grad=True
    )
    return HGCParams(
        weights=weights,
        biases=biases,
        gates=np.ones(len(level_dims)),
        behavior_head=behavior_head,
    )
