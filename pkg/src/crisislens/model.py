"""The full crisis-recognition estimator.

``CrisisRecognizer`` follows the scikit-learn estimator conventions:
hyperparameters go in ``__init__`` verbatim (so ``get_params``/``clone``
work), data goes to ``fit``, and fitted state lives in trailing-underscore
attributes. ``fit`` consumes :class:`~crisislens.data.Sample` sequences plus
a knowledge lexicon and a social graph; labels ride on the samples.

Training minimizes the weighted multi-task loss (crisis classification,
polarity+intensity cross-entropy, per-user behavior cross-entropy, and the
soft-count reward deficit) with the adaptive optimizer, while a separate
derivative-free hill climb adjusts the graph-level gates against the hard
validation reward every few epochs.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from . import autodiff as ad
from .autodiff import LSTMWeights, Tensor
from .data import INTENSITY_INDEX, POLARITY_INDEX, Sample
from .embeddings import (
    PAD_ID,
    BaseEmbedding,
    EncoderConfig,
    FusionParams,
    KnowledgeLexicon,
    Vocabulary,
    build_vocab,
    embed_base,
    embed_knowledge,
    fuse,
)
from .errors import ConfigError, DataError, FormatError, NumericError, TrainingError
from .graph import (
    HGCParams,
    HierarchicalAdjacency,
    RewardWeights,
    SocialGraph,
    bprm_update,
    build_hierarchical_adjacency,
    compute_reward,
    hgc_forward,
    node_features,
)
from .losses import LossWeights, reinforcement_deficit, total_loss
from .metrics import Prediction
from .optim import ParamStore, adam_step
from .sentiment import MSCNParams, SentimentOutput, sentiment_forward
from .serialize import read_container, write_container

SECONDS_PER_DAY = 86400.0

HISTORY_FIELDS = (
    "epoch",
    "classification",
    "emotion",
    "behavior",
    "reinforcement",
    "total",
    "val_reward",
    "gates",
    "bprm_reward_before",
    "bprm_reward_after",
    "bprm_accepted",
)


class CrisisRecognizer(BaseEstimator):
    """Knowledge-fused multi-task crisis classifier over tokenized messages.

    Set ``lambda_knowledge=0`` for the ablation without the knowledge
    fusion increment.
    """

    def __init__(
        self,
        d_model: int = 32,
        d_ph: int = 16,
        encoder_layers: int = 1,
        encoder_heads: int = 2,
        conv_widths: tuple[int, ...] = (2, 3, 4),
        conv_channels: int = 16,
        hidden_size: int = 32,
        gcn_dims: tuple[int, ...] = (16, 8),
        lambda_knowledge: float = 0.5,
        epochs: int = 30,
        batch_size: int = 16,
        learning_rate: float = 1e-2,
        loss_weights: tuple[float, float, float, float] = (1.0, 0.5, 0.5, 0.25),
        reward_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
        bprm_step: float = 0.1,
        bprm_every: int = 2,
        window_days: float = 7.0,
        val_fraction: float = 0.2,
        min_count: int = 1,
        seed: int = 0,
    ):
        self.d_model = d_model
        self.d_ph = d_ph
        self.encoder_layers = encoder_layers
        self.encoder_heads = encoder_heads
        self.conv_widths = conv_widths
        self.conv_channels = conv_channels
        self.hidden_size = hidden_size
        self.gcn_dims = gcn_dims
        self.lambda_knowledge = lambda_knowledge
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.loss_weights = loss_weights
        self.reward_weights = reward_weights
        self.bprm_step = bprm_step
        self.bprm_every = bprm_every
        self.window_days = window_days
        self.val_fraction = val_fraction
        self.min_count = min_count
        self.seed = seed

    # ------------------------------------------------------------------
    # configuration and structure
    # ------------------------------------------------------------------

    def _validate_config(self) -> None:
        positive = (
            ("d_model", self.d_model),
            ("d_ph", self.d_ph),
            ("conv_channels", self.conv_channels),
            ("hidden_size", self.hidden_size),
            ("batch_size", self.batch_size),
            ("learning_rate", self.learning_rate),
            ("bprm_step", self.bprm_step),
            ("window_days", self.window_days),
        )
        for name, value in positive:
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.epochs < 0 or self.encoder_layers < 0 or self.bprm_every < 0:
            raise ConfigError("epochs, encoder_layers, and bprm_every must be >= 0")
        if not self.conv_widths or any(w < 1 for w in self.conv_widths):
            raise ConfigError(f"conv_widths must be positive, got {self.conv_widths}")
        if not self.gcn_dims:
            raise ConfigError("gcn_dims must name at least one level")
        if self.lambda_knowledge < 0:
            raise ConfigError("lambda_knowledge must be nonnegative")
        if not (0.0 <= self.val_fraction < 1.0):
            raise ConfigError(f"val_fraction must be in [0, 1), got {self.val_fraction}")
        if len(self.loss_weights) != 4 or len(self.reward_weights) != 3:
            raise ConfigError("loss_weights needs 4 entries and reward_weights needs 3")
        if self.encoder_layers > 0 and self.d_model % self.encoder_heads != 0:
            raise ConfigError(
                f"d_model={self.d_model} must be divisible by encoder_heads={self.encoder_heads}"
            )

    def _loss_weights(self) -> LossWeights:
        c, e, b, r = self.loss_weights
        return LossWeights(classification=c, emotion=e, behavior=b, reinforcement=r)

    def _reward_weights(self) -> RewardWeights:
        l1, l2, l3 = self.reward_weights
        return RewardWeights(lambda1=l1, lambda2=l2, lambda3=l3)

    def _build_structure(self, vocab_size: int, n_categories: int) -> None:
        """Allocate every named parameter with zeros; init or load fills them."""
        ps = ParamStore()
        self._bias_names = set()
        d, dph, ds, ch = self.d_model, self.d_ph, self.hidden_size, self.conv_channels
        table = ps.add("base.table", Tensor(np.zeros((vocab_size, d))))
        attn = []
        for layer in range(self.encoder_layers):
            attn.append(
                {
                    name: ps.add(f"enc{layer}.{name}", Tensor(np.zeros((d, d))))
                    for name in ("wq", "wk", "wv", "wo")
                }
            )
        self.base_ = BaseEmbedding(
            table=table,
            encoder=EncoderConfig(layers=self.encoder_layers, heads=self.encoder_heads),
            attn=attn,
        )
        self.category_embeddings_ = ps.add("knowledge.categories", Tensor(np.zeros((n_categories, dph))))
        self.fusion_ = FusionParams(
            w_ph=ps.add("fusion.w_ph", Tensor(np.zeros((d, dph)))),
            lambda1=float(self.lambda_knowledge),
        )
        kernels = [
            ps.add(f"mscn.kernel_w{w}", Tensor(np.zeros((w, d, ch)))) for w in self.conv_widths
        ]
        biases = [ps.add(f"mscn.bias_w{w}", Tensor(np.zeros(ch))) for w in self.conv_widths]
        self._bias_names.update(f"mscn.bias_w{w}" for w in self.conv_widths)
        lstm = LSTMWeights(
            w_x=ps.add("mscn.lstm.w_x", Tensor(np.zeros((ch, 4 * ds)))),
            w_h=ps.add("mscn.lstm.w_h", Tensor(np.zeros((ds, 4 * ds)))),
            bias=ps.add("mscn.lstm.bias", Tensor(np.zeros(4 * ds))),
        )
        self._bias_names.add("mscn.lstm.bias")
        self.mscn_ = MSCNParams(
            widths=tuple(self.conv_widths),
            kernels=kernels,
            biases=biases,
            lstm=lstm,
            w_a=ps.add("mscn.w_a", Tensor(np.zeros((ds, ds)))),
            polarity_head=ps.add("mscn.polarity_head", Tensor(np.zeros((3, ds)))),
            intensity_head=ps.add("mscn.intensity_head", Tensor(np.zeros((3, ds)))),
        )
        # crisis head reads [s ; s_adaptive]: the weighted vector alone loses
        # magnitude information through the convex gating
        self.crisis_head_ = ps.add("heads.crisis", Tensor(np.zeros((2, 2 * ds))))
        dims = (ds + d,) + tuple(self.gcn_dims)
        weights = [
            ps.add(f"hgc.w{k}", Tensor(np.zeros((dims[k], dims[k + 1]))))
            for k in range(len(self.gcn_dims))
        ]
        hgc_biases = [
            ps.add(f"hgc.b{k}", Tensor(np.zeros(dims[k + 1]))) for k in range(len(self.gcn_dims))
        ]
        self._bias_names.update(f"hgc.b{k}" for k in range(len(self.gcn_dims)))
        behavior_head = ps.add("hgc.behavior_head", Tensor(np.zeros((2, dims[-1]))))
        self.hgc_ = HGCParams(
            weights=weights,
            biases=hgc_biases,
            gates=np.ones(len(self.gcn_dims)),
            behavior_head=behavior_head,
        )
        self.params_ = ps

    def _init_values(self, rng: np.random.Generator) -> None:
        """Seeded scaled-normal init for every non-bias parameter, PAD row zero."""
        for name, tensor in self.params_.items():
            if name in self._bias_names:
                continue
            fan_in = tensor.data.shape[0] if tensor.data.ndim > 1 else max(tensor.data.shape[0], 1)
            tensor.data[:] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=tensor.data.shape)
        self.base_.table.data[PAD_ID] = 0.0

    # ------------------------------------------------------------------
    # forward passes
    # ------------------------------------------------------------------

    def _forward_text(self, tokens: Sequence[str]) -> tuple[Tensor, Tensor, SentimentOutput, Tensor]:
        """(fused sequence, fused mean, sentiment bundle, crisis logits) for one message."""
        if not tokens:
            raise DataError("cannot run the model on an empty token sequence")
        ids = self.vocab_.encode(tokens)
        e_base = embed_base(ids, self.base_)
        e_ph = embed_knowledge(tokens, self.lexicon_, self.category_embeddings_)
        e_total = fuse(e_base, e_ph, self.fusion_)
        sent = sentiment_forward(e_total, self.mscn_)
        crisis_feats = ad.concat([sent.s, sent.s_adaptive], axis=0)
        crisis_logits = ad.matmul(self.crisis_head_, crisis_feats)
        return e_total, e_total.mean(axis=0), sent, crisis_logits

    def _hgc_np(self, h0: np.ndarray, gates: np.ndarray) -> np.ndarray:
        """Gradient-free graph forward used for validation reward and prediction."""
        h = h0
        K = len(self.hgc_.weights)
        for k in range(K):
            z = (self.adjacency_.levels[k] @ h @ self.hgc_.weights[k].data + self.hgc_.biases[k].data)
            z = z * gates[k]
            h = np.maximum(z, 0.0) if k < K - 1 else z
        return h

    def _behavior_features_np(self, samples: Sequence[Sample]) -> np.ndarray:
        """Per-user mean feature rows from a no-grad text forward pass."""
        per_sample: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for s in samples:
            _, fused_mean, sent, _ = self._forward_text(s.tokens)
            per_sample[s.id] = (sent.s_adaptive.data, fused_mean.data)
        n = self.graph_.n
        d = self.hidden_size + self.d_model
        idx = {u: i for i, u in enumerate(self.graph_.users)}
        t_max = max(s.timestamp for s in samples) if samples else 0.0
        cutoff = t_max - self.window_days * SECONDS_PER_DAY
        sums = np.zeros((n, d))
        counts = np.zeros(n)
        for s in samples:
            if s.timestamp < cutoff:
                continue
            i = idx[s.user]
            sv, fv = per_sample[s.id]
            sums[i] += np.concatenate([sv, fv])
            counts[i] += 1
        out = np.zeros((n, d))
        mask = counts > 0
        out[mask] = sums[mask] / counts[mask, None]
        return out

    def _behavior_predictions(self, h0: np.ndarray, gates: np.ndarray) -> list[int]:
        h = self._hgc_np(h0, gates)
        logits = h @ self.hgc_.behavior_head.data.T
        return list(np.argmax(logits, axis=1).astype(int))

    # ------------------------------------------------------------------
    # fitting
    # ------------------------------------------------------------------

    def initialize(
        self,
        lexicon: KnowledgeLexicon,
        graph: SocialGraph,
        samples: Sequence[Sample] = (),
        risk_samples: Sequence[Sample] | None = None,
    ) -> "CrisisRecognizer":
        """Build a randomly initialized, untrained model (epoch-zero state).

        ``samples`` feed the vocabulary; ``risk_samples`` (defaulting to the
        same set) provide per-user behavior labels.
        """
        self._validate_config()
        self.lexicon_ = lexicon
        self.graph_ = graph
        if samples:
            self.vocab_ = build_vocab([s.tokens for s in samples], self.min_count)
        else:
            self.vocab_ = Vocabulary(token_to_id={"<pad>": 0, "<unk>": 1})
        self._build_structure(len(self.vocab_), lexicon.n_categories)
        self._init_values(np.random.default_rng(self.seed))
        self.adjacency_ = build_hierarchical_adjacency(graph, len(self.gcn_dims))
        self.user_risk_ = self._user_risk(samples if risk_samples is None else risk_samples)
        self.history_ = []
        return self

    def _user_risk(self, samples: Sequence[Sample]) -> dict[str, int]:
        risk = {u: 0 for u in self.graph_.users}
        for s in samples:
            if s.user not in risk:
                raise DataError(f"sample {s.id!r} references user {s.user!r} not in the graph")
            risk[s.user] = s.behavior_risk
        return risk

    def fit(
        self,
        X: Sequence[Sample],
        y=None,
        *,
        lexicon: KnowledgeLexicon | None = None,
        graph: SocialGraph | None = None,
        val_samples: Sequence[Sample] | None = None,
    ) -> "CrisisRecognizer":
        """Train on a sample sequence; labels ride on the samples.

        ``val_samples`` drive the hard validation reward (gate search); when
        omitted, ``val_fraction`` of the input is carved off deterministically.
        """
        if lexicon is None or graph is None:
            raise ConfigError("fit requires lexicon= and graph= keyword arguments")
        samples = list(X)
        if not samples:
            raise DataError("fit needs a non-empty sample list")
        self._validate_config()
        loss_w = self._loss_weights()
        reward_w = self._reward_weights()

        if val_samples is None:
            n_val = int(round(self.val_fraction * len(samples)))
            order = np.random.default_rng(self.seed).permutation(len(samples))
            val_idx = set(order[:n_val].tolist())
            train = [s for i, s in enumerate(samples) if i not in val_idx]
            val = [s for i, s in enumerate(samples) if i in val_idx]
        else:
            train = samples
            val = list(val_samples)
        if not train:
            raise DataError("training split is empty")
        eval_pool = val if val else train

        self.initialize(lexicon, graph, samples=train, risk_samples=train + val)
        rng = np.random.default_rng(self.seed + 1)
        risk_labels = [self.user_risk_[u] for u in self.graph_.users]

        for epoch in range(self.epochs):
            try:
                breakdown = self._run_epoch(train, rng, loss_w, reward_w, risk_labels)
            except NumericError as exc:
                raise TrainingError(f"training diverged at epoch {epoch}: {exc}") from exc
            h0_val = self._behavior_features_np(eval_pool)
            val_reward = compute_reward(
                self._behavior_predictions(h0_val, self.hgc_.gates), risk_labels, reward_w
            )
            row = {
                "epoch": epoch,
                **breakdown,
                "val_reward": val_reward,
                "gates": self.hgc_.gates.copy(),
                "bprm_reward_before": None,
                "bprm_reward_after": None,
                "bprm_accepted": None,
            }
            if self.bprm_every > 0 and (epoch + 1) % self.bprm_every == 0:
                def reward_eval(gates: np.ndarray) -> float:
                    preds = self._behavior_predictions(h0_val, gates)
                    return compute_reward(preds, risk_labels, reward_w)

                self.hgc_, step = bprm_update(
                    self.hgc_, reward_eval, self.bprm_step, rng_seed=self.seed * 1_000_003 + epoch
                )
                row["gates"] = self.hgc_.gates.copy()
                row["bprm_reward_before"] = step.reward_before
                row["bprm_reward_after"] = step.reward_after
                row["bprm_accepted"] = step.accepted
                row["val_reward"] = step.reward_after
            self.history_.append(row)
        return self

    def batch_loss(
        self,
        batch: Sequence[Sample],
        loss_w: LossWeights,
        reward_w: RewardWeights,
        risk_labels: Sequence[int],
    ) -> tuple[Tensor, dict[str, float]]:
        """Full multi-task loss over one batch, differentiable end to end."""
        crisis_rows, pol_rows, int_rows = [], [], []
        per_sample: dict[str, tuple[Tensor, Tensor]] = {}
        for s in batch:
            _, fused_mean, sent, crisis_logits = self._forward_text(s.tokens)
            crisis_rows.append(crisis_logits)
            pol_rows.append(sent.polarity_logits)
            int_rows.append(sent.intensity_logits)
            per_sample[s.id] = (sent.s_adaptive, fused_mean)

        crisis_logits = ad.stack_rows(crisis_rows)
        crisis_labels = [s.crisis for s in batch]
        classification = ad.cross_entropy(crisis_logits, crisis_labels)
        emotion = ad.cross_entropy(
            ad.stack_rows(pol_rows), [POLARITY_INDEX[s.polarity] for s in batch]
        ) + ad.cross_entropy(
            ad.stack_rows(int_rows), [INTENSITY_INDEX[s.intensity] for s in batch]
        )
        h0 = node_features(batch, self.graph_, per_sample, self.window_days * SECONDS_PER_DAY)
        h_out = hgc_forward(h0, self.adjacency_, self.hgc_)
        behavior_logits = ad.matmul(h_out, self.hgc_.behavior_head.T)
        behavior = ad.cross_entropy(behavior_logits, list(risk_labels))
        crisis_probs = ad.softmax_axis(crisis_logits, axis=1)[:, 1]
        reinforcement = reinforcement_deficit(crisis_probs, crisis_labels, reward_w)
        loss = total_loss(classification, emotion, behavior, reinforcement, loss_w)
        parts = {
            "classification": classification.item(),
            "emotion": emotion.item(),
            "behavior": behavior.item(),
            "reinforcement": reinforcement.item(),
            "total": loss.item(),
        }
        return loss, parts

    def _run_epoch(
        self,
        train: list[Sample],
        rng: np.random.Generator,
        loss_w: LossWeights,
        reward_w: RewardWeights,
        risk_labels: list[int],
    ) -> dict[str, float]:
        order = rng.permutation(len(train))
        sums = {"classification": 0.0, "emotion": 0.0, "behavior": 0.0, "reinforcement": 0.0, "total": 0.0}
        for start in range(0, len(order), self.batch_size):
            batch = [train[i] for i in order[start : start + self.batch_size]]
            self.params_.zero_grad()
            loss, parts = self.batch_loss(batch, loss_w, reward_w, risk_labels)
            if not np.isfinite(loss.data).all():
                raise NumericError("batch loss is non-finite")
            loss.backward()
            adam_step(self.params_, None, lr=self.learning_rate)
            self.base_.table.data[PAD_ID] = 0.0
            for key in sums:
                sums[key] += parts[key] * len(batch)
        n = len(train)
        return {k: v / n for k, v in sums.items()}

    # ------------------------------------------------------------------
    # prediction
    # ------------------------------------------------------------------

    def _check_fitted(self) -> None:
        if not hasattr(self, "params_"):
            raise ConfigError("model is not fitted; call fit() or initialize() first")

    def predict_all(self, token_lists: Sequence[Sequence[str]]) -> list[Prediction]:
        self._check_fitted()
        preds = []
        for tokens in token_lists:
            _, _, sent, crisis_logits = self._forward_text(list(tokens))
            crisis_prob = _softmax_np(crisis_logits.data)[1]
            preds.append(
                Prediction(
                    crisis_prob=float(crisis_prob),
                    polarity_probs=_softmax_np(sent.polarity_logits.data),
                    intensity_probs=_softmax_np(sent.intensity_logits.data),
                )
            )
        return preds

    def predict_sample(self, tokens: Sequence[str], user: str | None = None) -> Prediction:
        """Single-message prediction; behavior risk only with a user context."""
        self._check_fitted()
        pred = self.predict_all([list(tokens)])[0]
        if user is not None:
            i = self.graph_.index(user)
            _, fused_mean, sent, _ = self._forward_text(list(tokens))
            h0 = np.zeros((self.graph_.n, self.hidden_size + self.d_model))
            h0[i] = np.concatenate([sent.s_adaptive.data, fused_mean.data])
            h = self._hgc_np(h0, self.hgc_.gates)
            logits = h[i] @ self.hgc_.behavior_head.data.T
            pred.behavior_prob = float(_softmax_np(logits)[1])
        return pred

    def predict_proba(self, X) -> np.ndarray:
        token_lists = _as_token_lists(X)
        probs = np.array([p.crisis_prob for p in self.predict_all(token_lists)])
        return np.column_stack([1.0 - probs, probs])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(int)


def _as_token_lists(X) -> list[list[str]]:
    out = []
    for item in X:
        if isinstance(item, Sample):
            out.append(item.tokens)
        else:
            out.append(list(item))
    return out


def _softmax_np(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_model(model: CrisisRecognizer, path: str | Path) -> None:
    """Write a fitted model to the versioned binary container."""
    model._check_fitted()
    config = model.get_params()
    config = {k: (list(v) if isinstance(v, tuple) else v) for k, v in config.items()}
    metadata = {
        "kind": "crisislens-model",
        "config": config,
        "vocab": model.vocab_.to_json_dict(),
        "lexicon": model.lexicon_.to_json_dict(),
        "graph": model.graph_.to_json_dict(),
        "gates": model.hgc_.gates.tolist(),
        "user_risk": model.user_risk_,
    }
    tensors = {name: t.data for name, t in model.params_.items()}
    write_container(path, metadata, tensors)


_TUPLE_FIELDS = ("conv_widths", "gcn_dims", "loss_weights", "reward_weights")


def load_model(path: str | Path) -> CrisisRecognizer:
    """Reconstruct a model bit-exactly from its container file."""
    metadata, tensors = read_container(path)
    if metadata.get("kind") != "crisislens-model":
        raise FormatError(f"{path}: not a model container (kind={metadata.get('kind')!r})")
    config = dict(metadata["config"])
    for key in _TUPLE_FIELDS:
        if key in config and isinstance(config[key], list):
            config[key] = tuple(config[key])
    model = CrisisRecognizer(**config)
    model.lexicon_ = KnowledgeLexicon.from_json_dict(metadata["lexicon"])
    model.graph_ = SocialGraph.from_json_dict(metadata["graph"])
    model.vocab_ = Vocabulary.from_json_dict(metadata["vocab"])
    model._build_structure(len(model.vocab_), model.lexicon_.n_categories)
    for name, tensor in model.params_.items():
        if name not in tensors:
            raise FormatError(f"{path}: tensor {name!r} missing from container")
        if tensors[name].shape != tensor.data.shape:
            raise FormatError(
                f"{path}: tensor {name!r} has shape {tensors[name].shape},"
                f" expected {tensor.data.shape}"
            )
        tensor.data[:] = tensors[name]
    model.hgc_ = model.hgc_.with_gates(np.asarray(metadata["gates"], dtype=np.float64))
    model.adjacency_ = build_hierarchical_adjacency(model.graph_, len(model.gcn_dims))
    model.user_risk_ = {str(k): int(v) for k, v in metadata["user_risk"].items()}
    model.history_ = []
    return model


def history_to_csv(history: list[dict], path: str | Path) -> None:
    """Training history as CSV: one row per epoch, gates joined with '|'."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTORY_FIELDS)
        for row in history:
            writer.writerow(
                [
                    row["epoch"],
                    repr(row["classification"]),
                    repr(row["emotion"]),
                    repr(row["behavior"]),
                    repr(row["reinforcement"]),
                    repr(row["total"]),
                    repr(row["val_reward"]),
                    "|".join(repr(float(g)) for g in row["gates"]),
                    "" if row["bprm_reward_before"] is None else repr(row["bprm_reward_before"]),
                    "" if row["bprm_reward_after"] is None else repr(row["bprm_reward_after"]),
                    "" if row["bprm_accepted"] is None else int(row["bprm_accepted"]),
                ]
            )
