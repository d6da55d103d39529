"""Comparison baselines: a dictionary sentiment scorer with no learning,
and a bidirectional recurrent classifier trained with plain cross-entropy
(no knowledge fusion, no graph, no reward terms).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from . import autodiff as ad
from .autodiff import LSTMWeights, Tensor, lstm_step
from .data import INTENSITY_INDEX, POLARITY_INDEX, Sample
from .embeddings import KnowledgeLexicon, NEUTRAL_CATEGORY, build_vocab
from .errors import ConfigError, DataError, NumericError, TrainingError
from .metrics import Prediction
from .optim import ParamStore, adam_step

CRISIS_SCORE_THRESHOLD = -0.05
POLARITY_BAND = 0.05


def polarity_table_from_lexicon(
    lexicon: KnowledgeLexicon, crisis_score: float = -1.0
) -> dict[str, float]:
    """Derive a term-polarity table: crisis-category terms score negative."""
    return {
        term: (0.0 if cat == NEUTRAL_CATEGORY else crisis_score)
        for term, cat in lexicon.term_to_category.items()
    }


class LexiconSentimentClassifier(BaseEstimator):
    """Dictionary scorer: mean term polarity, thresholded. No learning.

    ``polarity_table`` maps terms to reals in [-1, 1]; unknown terms score 0.
    Crisis is flagged when the mean score falls below ``threshold``; intensity
    comes from fixed terciles of the absolute score.
    """

    def __init__(
        self,
        polarity_table: dict[str, float] | None = None,
        threshold: float = CRISIS_SCORE_THRESHOLD,
    ):
        self.polarity_table = polarity_table
        self.threshold = threshold

    def fit(self, X=None, y=None) -> "LexiconSentimentClassifier":
        return self

    def score_tokens(self, tokens: Sequence[str]) -> float:
        table = self.polarity_table or {}
        if not tokens:
            raise DataError("cannot score an empty token sequence")
        return float(np.mean([table.get(t, 0.0) for t in tokens]))

    def predict_all(self, token_lists: Sequence[Sequence[str]]) -> list[Prediction]:
        preds = []
        for tokens in token_lists:
            score = self.score_tokens(tokens)
            crisis = 1.0 if score < self.threshold else 0.0
            if score < -POLARITY_BAND:
                polarity = np.array([1.0, 0.0, 0.0])
            elif score > POLARITY_BAND:
                polarity = np.array([0.0, 0.0, 1.0])
            else:
                polarity = np.array([0.0, 1.0, 0.0])
            magnitude = abs(score)
            if magnitude < 1 / 3:
                intensity = np.array([1.0, 0.0, 0.0])
            elif magnitude < 2 / 3:
                intensity = np.array([0.0, 1.0, 0.0])
            else:
                intensity = np.array([0.0, 0.0, 1.0])
            preds.append(
                Prediction(crisis_prob=crisis, polarity_probs=polarity, intensity_probs=intensity)
            )
        return preds

    def predict(self, X) -> np.ndarray:
        token_lists = [x.tokens if isinstance(x, Sample) else list(x) for x in X]
        return np.array([int(p.crisis_prob >= 0.5) for p in self.predict_all(token_lists)])


class BiLstmClassifier(BaseEstimator):
    """Embedding table + forward/backward recurrences + three linear heads.

    The two final hidden states are concatenated (2 * hidden_size features)
    and trained with the sum of crisis, polarity, and intensity
    cross-entropies only.
    """

    def __init__(
        self,
        d_model: int = 32,
        hidden_size: int = 32,
        epochs: int = 30,
        batch_size: int = 16,
        learning_rate: float = 1e-2,
        min_count: int = 1,
        seed: int = 0,
    ):
        self.d_model = d_model
        self.hidden_size = hidden_size
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.min_count = min_count
        self.seed = seed

    def _validate_config(self) -> None:
        for name in ("d_model", "hidden_size", "batch_size", "learning_rate"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")

    def _build(self, vocab_size: int, rng: np.random.Generator) -> None:
        d, dh = self.d_model, self.hidden_size
        ps = ParamStore()
        self.table_ = ps.add(
            "table", Tensor(rng.normal(0.0, 1.0 / np.sqrt(d), size=(vocab_size, d)))
        )
        self.table_.data[0] = 0.0
        self.fwd_ = LSTMWeights(
            w_x=ps.add("fwd.w_x", Tensor(rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, 4 * dh)))),
            w_h=ps.add("fwd.w_h", Tensor(rng.normal(0.0, 1.0 / np.sqrt(dh), size=(dh, 4 * dh)))),
            bias=ps.add("fwd.bias", Tensor(np.zeros(4 * dh))),
        )
        self.bwd_ = LSTMWeights(
            w_x=ps.add("bwd.w_x", Tensor(rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, 4 * dh)))),
            w_h=ps.add("bwd.w_h", Tensor(rng.normal(0.0, 1.0 / np.sqrt(dh), size=(dh, 4 * dh)))),
            bias=ps.add("bwd.bias", Tensor(np.zeros(4 * dh))),
        )
        self.crisis_head_ = ps.add(
            "head.crisis", Tensor(rng.normal(0.0, 1.0 / np.sqrt(2 * dh), size=(2, 2 * dh)))
        )
        self.polarity_head_ = ps.add(
            "head.polarity", Tensor(rng.normal(0.0, 1.0 / np.sqrt(2 * dh), size=(3, 2 * dh)))
        )
        self.intensity_head_ = ps.add(
            "head.intensity", Tensor(rng.normal(0.0, 1.0 / np.sqrt(2 * dh), size=(3, 2 * dh)))
        )
        self.params_ = ps

    def _encode(self, tokens: Sequence[str]) -> Tensor:
        """Concatenated final states of the forward and backward passes."""
        if not tokens:
            raise DataError("cannot run the model on an empty token sequence")
        ids = self.vocab_.encode(tokens)
        emb = ad.gather_rows(self.table_, ids)
        dh = self.hidden_size
        h_f, c_f = Tensor(np.zeros(dh)), Tensor(np.zeros(dh))
        for t in range(emb.data.shape[0]):
            h_f, c_f = lstm_step(emb[t], (h_f, c_f), self.fwd_)
        h_b, c_b = Tensor(np.zeros(dh)), Tensor(np.zeros(dh))
        for t in reversed(range(emb.data.shape[0])):
            h_b, c_b = lstm_step(emb[t], (h_b, c_b), self.bwd_)
        return ad.concat([h_f, h_b], axis=0)

    def fit(self, X: Sequence[Sample], y=None) -> "BiLstmClassifier":
        self._validate_config()
        samples = list(X)
        if not samples:
            raise DataError("fit needs a non-empty sample list")
        self.vocab_ = build_vocab([s.tokens for s in samples], self.min_count)
        rng = np.random.default_rng(self.seed)
        self._build(len(self.vocab_), rng)
        shuffle_rng = np.random.default_rng(self.seed + 1)
        for epoch in range(self.epochs):
            order = shuffle_rng.permutation(len(samples))
            for start in range(0, len(order), self.batch_size):
                batch = [samples[i] for i in order[start : start + self.batch_size]]
                self.params_.zero_grad()
                feats = [self._encode(s.tokens) for s in batch]
                crisis = ad.stack_rows([ad.matmul(self.crisis_head_, f) for f in feats])
                pol = ad.stack_rows([ad.matmul(self.polarity_head_, f) for f in feats])
                inten = ad.stack_rows([ad.matmul(self.intensity_head_, f) for f in feats])
                loss = (
                    ad.cross_entropy(crisis, [s.crisis for s in batch])
                    + ad.cross_entropy(pol, [POLARITY_INDEX[s.polarity] for s in batch])
                    + ad.cross_entropy(inten, [INTENSITY_INDEX[s.intensity] for s in batch])
                )
                if not np.isfinite(loss.data).all():
                    raise TrainingError(f"training diverged at epoch {epoch}")
                try:
                    loss.backward()
                except NumericError as exc:
                    raise TrainingError(f"training diverged at epoch {epoch}: {exc}") from exc
                adam_step(self.params_, None, lr=self.learning_rate)
                self.table_.data[0] = 0.0
        return self

    def predict_all(self, token_lists: Sequence[Sequence[str]]) -> list[Prediction]:
        if not hasattr(self, "params_"):
            raise ConfigError("model is not fitted")
        preds = []
        for tokens in token_lists:
            f = self._encode(list(tokens))
            crisis = _softmax_np(ad.matmul(self.crisis_head_, f).data)
            pol = _softmax_np(ad.matmul(self.polarity_head_, f).data)
            inten = _softmax_np(ad.matmul(self.intensity_head_, f).data)
            preds.append(
                Prediction(crisis_prob=float(crisis[1]), polarity_probs=pol, intensity_probs=inten)
            )
        return preds

    def predict(self, X) -> np.ndarray:
        token_lists = [x.tokens if isinstance(x, Sample) else list(x) for x in X]
        return np.array([int(p.crisis_prob >= 0.5) for p in self.predict_all(token_lists)])


def _softmax_np(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()
