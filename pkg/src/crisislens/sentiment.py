"""Multi-width sentiment convolution with a gated recurrence on top.

Local features come from valid 1-D convolutions at several widths, are
ReLU-activated, concatenated along time, and consumed by the recurrence;
the final hidden state is the sentence sentiment vector. An adaptive
weighting head turns that vector into a convex coordinate weighting, and
two linear heads read polarity and intensity logits off the weighted
vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import (
    LSTMWeights,
    Tensor,
    concat,
    conv1d_valid,
    hadamard,
    lstm_step,
    matmul,
    relu,
    softmax_axis,
)
from .errors import DataError, DimensionError

POLARITY_CLASSES = ("neg", "neu", "pos")
INTENSITY_CLASSES = ("mild", "moderate", "strong")


@dataclass
class MSCNParams:
    """All trainable tensors of the sentiment network.

    ``kernels[i]`` has shape (widths[i], d_model, channels); the recurrence
    consumes ``channels``-wide steps and its hidden size is the sentiment
    dimension d_s.
    """

    widths: tuple[int, ...]
    kernels: list[Tensor]
    biases: list[Tensor]
    lstm: LSTMWeights
    w_a: Tensor  # (d_s, d_s)
    polarity_head: Tensor  # (3, d_s)
    intensity_head: Tensor  # (3, d_s)

    @property
    def d_s(self) -> int:
        return self.lstm.hidden_size

    @property
    def max_width(self) -> int:
        return max(self.widths)


@dataclass
class SentimentOutput:
    """Forward-pass bundle: raw vector, weights, weighted vector, and logits."""

    s: Tensor
    a: Tensor
    s_adaptive: Tensor
    polarity_logits: Tensor
    intensity_logits: Tensor


def mscn_forward(e_total: Tensor, params: MSCNParams) -> Tensor:
    """Sentence sentiment vector (d_s,) from fused token embeddings (L, d_model).

    Sequences shorter than the largest kernel width are zero-row padded up to
    it (the PAD embedding row is zero), so any L >= 1 is accepted.
    """
    if e_total.data.ndim != 2:
        raise DimensionError(f"mscn_forward expects (L, d_model), got {e_total.data.shape}")
    L = e_total.data.shape[0]
    if L == 0:
        raise DataError("mscn_forward got an empty sequence")
    pad = params.max_width - L
    if pad > 0:
        e_total = concat([e_total, Tensor(np.zeros((pad, e_total.data.shape[1])))], axis=0)
    feats = [
        relu(conv1d_valid(e_total, k, b))
        for k, b in zip(params.kernels, params.biases)
    ]
    seq = concat(feats, axis=0)
    d_s = params.d_s
    h = Tensor(np.zeros(d_s))
    c = Tensor(np.zeros(d_s))
    for t in range(seq.data.shape[0]):
        h, c = lstm_step(seq[t], (h, c), params.lstm)
    return h


def adaptive_weights(s: Tensor, w_a: Tensor) -> Tensor:
    """Convex coordinate weights: softmax of the projected sentiment vector."""
    if s.data.ndim != 1 or w_a.data.shape != (s.data.shape[0], s.data.shape[0]):
        raise DimensionError(
            f"adaptive_weights needs square projection matching s, got {w_a.data.shape} and {s.data.shape}"
        )
    return softmax_axis(matmul(w_a, s), axis=0)


def adaptive_sentiment(s: Tensor, a: Tensor) -> Tensor:
    """Pointwise reweighting of the sentiment vector."""
    return hadamard(s, a)


def emotion_heads(s_adaptive: Tensor, params: MSCNParams) -> tuple[Tensor, Tensor]:
    """Polarity and intensity logits, class order (neg, neu, pos) / (mild, moderate, strong)."""
    if s_adaptive.data.shape != (params.d_s,):
        raise DimensionError(
            f"emotion_heads expects ({params.d_s},), got {s_adaptive.data.shape}"
        )
    return matmul(params.polarity_head, s_adaptive), matmul(params.intensity_head, s_adaptive)


def sentiment_forward(e_total: Tensor, params: MSCNParams) -> SentimentOutput:
    """Full sentiment pass: vector, adaptive weights, weighted vector, logits."""
    s = mscn_forward(e_total, params)
    a = adaptive_weights(s, params.w_a)
    s_adaptive = adaptive_sentiment(s, a)
    polarity_logits, intensity_logits = emotion_heads(s_adaptive, params)
    return SentimentOutput(
        s=s,
        a=a,
        s_adaptive=s_adaptive,
        polarity_logits=polarity_logits,
        intensity_logits=intensity_logits,
    )


def init_mscn_params(
    rng: np.random.Generator,
    d_model: int,
    widths: tuple[int, ...] = (2, 3, 4),
    channels: int = 16,
    d_s: int = 32,
) -> MSCNParams:
    """Seeded random initialization with shapes chained consistently."""
    if not widths or any(w < 1 for w in widths):
        raise DataError(f"kernel widths must be >= 1, got {widths}")
    kernels = [
        Tensor(rng.normal(0.0, 1.0 / np.sqrt(w * d_model), size=(w, d_model, channels)), requires_grad=True)
        for w in widths
    ]
    biases = [Tensor(np.zeros(channels), requires_grad=True) for _ in widths]
    lstm = LSTMWeights(
        w_x=Tensor(rng.normal(0.0, 1.0 / np.sqrt(channels), size=(channels, 4 * d_s)), requires_grad=True),
        w_h=Tensor(rng.normal(0.0, 1.0 / np.sqrt(d_s), size=(d_s, 4 * d_s)), requires_grad=True),
        bias=Tensor(np.zeros(4 * d_s), requires_grad=True),
    )
    w_a = Tensor(rng.normal(0.0, 1.0 / np.sqrt(d_s), size=(d_s, d_s)), requires_grad=True)
    polarity_head = Tensor(rng.normal(0.0, 1.0 / np.sqrt(d_s), size=(3, d_s)), requires_grad=True)
    intensity_head = Tensor(rng.normal(0.0, 1.0 / np.sqrt(d_s), size=(3, d_s)), requires_grad=True)
    return MSCNParams(
        widths=tuple(widths),
        kernels=kernels,
        biases=biases,
        lstm=lstm,
        w_a=w_a,
        polarity_head=polarity_head,
        intensity_head=intensity_head,
    )
