"""Vocabulary, base token embeddings, the psychological-category lexicon,
and the knowledge-fusion step that adds a normalized projected category
embedding onto each token's base vector.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .autodiff import Tensor, concat, gather_rows, matmul, softmax_axis
from .errors import ConfigError, DataError, DimensionError

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

NEUTRAL_CATEGORY = "neutral"

DEFAULT_CATEGORIES = (
    "depression",
    "anxiety",
    "suicidal-ideation",
    "self-harm",
    "hopelessness",
    "neutral",
)


@dataclass
class Vocabulary:
    """Token -> dense integer id map with reserved PAD=0 and UNK=1."""

    token_to_id: dict[str, int]

    def __post_init__(self):
        if self.token_to_id.get(PAD_TOKEN) != PAD_ID or self.token_to_id.get(UNK_TOKEN) != UNK_ID:
            raise DataError("vocabulary must reserve PAD=0 and UNK=1")

    def __len__(self) -> int:
        return len(self.token_to_id)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        get = self.token_to_id.get
        return [get(tok, UNK_ID) for tok in tokens]

    def to_json_dict(self) -> dict:
        return dict(self.token_to_id)

    @classmethod
    def from_json_dict(cls, d: dict) -> "Vocabulary":
        return cls(token_to_id={str(k): int(v) for k, v in d.items()})


def build_vocab(corpus: Iterable[Sequence[str]], min_count: int = 1) -> Vocabulary:
    """Assign ids by descending frequency, ties broken lexicographically.

    Tokens seen fewer than ``min_count`` times fall back to UNK.
    """
    counts: Counter[str] = Counter()
    n_docs = 0
    for tokens in corpus:
        n_docs += 1
        counts.update(tokens)
    if n_docs == 0:
        raise DataError("cannot build a vocabulary from an empty corpus")
    mapping = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    for tok in kept:
        mapping[tok] = len(mapping)
    return Vocabulary(token_to_id=mapping)


@dataclass
class KnowledgeLexicon:
    """Term -> psychological category map over a fixed, ordered category list.

    Unknown terms resolve to the mandatory ``neutral`` category. The category
    embedding table itself is a trainable model parameter and lives in the
    model's parameter store, not here.
    """

    categories: list[str]
    term_to_category: dict[str, str]

    def __post_init__(self):
        if NEUTRAL_CATEGORY not in self.categories:
            raise DataError(f"lexicon categories must include {NEUTRAL_CATEGORY!r}")
        if len(set(self.categories)) != len(self.categories):
            raise DataError("lexicon categories must be unique")
        known = set(self.categories)
        for term, cat in self.term_to_category.items():
            if cat not in known:
                raise DataError(f"lexicon term {term!r} maps to unknown category {cat!r}")

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    @property
    def neutral_id(self) -> int:
        return self.categories.index(NEUTRAL_CATEGORY)

    def category_id(self, term: str) -> int:
        cat = self.term_to_category.get(term)
        if cat is None:
            return self.neutral_id
        return self.categories.index(cat)

    def crisis_terms(self) -> list[str]:
        neutral = NEUTRAL_CATEGORY
        return sorted(t for t, c in self.term_to_category.items() if c != neutral)

    def to_json_dict(self) -> dict:
        return {"categories": list(self.categories), "terms": dict(self.term_to_category)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "KnowledgeLexicon":
        if not isinstance(d, dict) or "categories" not in d or "terms" not in d:
            raise DataError("lexicon JSON must have 'categories' and 'terms' keys")
        return cls(
            categories=[str(c) for c in d["categories"]],
            term_to_category={str(k): str(v) for k, v in d["terms"].items()},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeLexicon":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"lexicon file {path} is not valid JSON: {exc}") from exc
        return cls.from_json_dict(d)


@dataclass
class EncoderConfig:
    """Optional small self-attention encoder over the token sequence."""

    layers: int = 0
    heads: int = 2


@dataclass
class BaseEmbedding:
    """Trainable token-embedding stand-in for a pretrained contextual encoder.

    ``table`` is (|V|, d_model) with the PAD row frozen at zero. When the
    encoder is enabled, one residual self-attention layer is applied per
    configured layer so each output row is contextual.
    """

    table: Tensor
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    attn: list[dict[str, Tensor]] = field(default_factory=list)  # per layer: wq, wk, wv, wo

    @property
    def d_model(self) -> int:
        return self.table.data.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.table.data.shape[0]


def _self_attention(x: Tensor, weights: dict[str, Tensor], heads: int) -> Tensor:
    d = x.data.shape[1]
    if d % heads != 0:
        raise ConfigError(f"d_model={d} must be divisible by encoder heads={heads}")
    dk = d // heads
    q = matmul(x, weights["wq"])
    k = matmul(x, weights["wk"])
    v = matmul(x, weights["wv"])
    outs = []
    inv = 1.0 / np.sqrt(dk)
    for h in range(heads):
        cols = slice(h * dk, (h + 1) * dk)
        qh, kh, vh = q[:, cols], k[:, cols], v[:, cols]
        scores = matmul(qh, kh.T) * inv
        att = softmax_axis(scores, axis=1)
        outs.append(matmul(att, vh))
    mixed = concat(outs, axis=1)
    return x + matmul(mixed, weights["wo"])


def embed_base(token_ids: Sequence[int], base: BaseEmbedding) -> Tensor:
    """Embed a token-id sequence; (L, d_model), contextual if encoder enabled."""
    ids = list(token_ids)
    if any(i < 0 or i >= base.vocab_size for i in ids):
        bad = next(i for i in ids if i < 0 or i >= base.vocab_size)
        raise DataError(f"token id {bad} outside vocabulary of size {base.vocab_size}")
    out = gather_rows(base.table, ids)
    for layer in range(base.encoder.layers):
        out = _self_attention(out, base.attn[layer], base.encoder.heads)
    return out


def embed_knowledge(
    tokens: Sequence[str], lexicon: KnowledgeLexicon, category_embeddings: Tensor
) -> Tensor:
    """Embed surface forms via their psychological category; (L, d_ph).

    Total function: unmapped tokens take the neutral category row.
    """
    if category_embeddings.data.shape[0] != lexicon.n_categories:
        raise DimensionError(
            f"category embedding rows {category_embeddings.data.shape[0]}"
            f" != lexicon categories {lexicon.n_categories}"
        )
    ids = [lexicon.category_id(tok) for tok in tokens]
    return gather_rows(category_embeddings, ids)


@dataclass
class FusionParams:
    """Projection and weight for folding category knowledge into base vectors."""

    w_ph: Tensor  # (d_model, d_ph)
    lambda1: float = 0.5

    def __post_init__(self):
        if self.lambda1 < 0:
            raise ConfigError(f"fusion weight must be nonnegative, got {self.lambda1}")


def fuse(e_base: Tensor, e_ph: Tensor, params: FusionParams) -> Tensor:
    """Per token: base vector plus lambda1 * softmax(W_ph @ knowledge vector).

    The softmax runs over the model dimension, so the knowledge increment of
    every token sums to exactly lambda1.
    """
    if e_base.data.ndim != 2 or e_ph.data.ndim != 2:
        raise DimensionError(
            f"fuse expects (L,d_model) and (L,d_ph), got {e_base.data.shape} and {e_ph.data.shape}"
        )
    if e_base.data.shape[0] != e_ph.data.shape[0]:
        raise DimensionError(
            f"fuse length mismatch: {e_base.data.shape[0]} base rows vs {e_ph.data.shape[0]} knowledge rows"
        )
    d_model, d_ph = params.w_ph.data.shape
    if e_base.data.shape[1] != d_model or e_ph.data.shape[1] != d_ph:
        raise DimensionError(
            f"fuse projection {params.w_ph.data.shape} inconsistent with"
            f" base {e_base.data.shape} / knowledge {e_ph.data.shape}"
        )
    if params.lambda1 == 0.0:
        return e_base
    projected = matmul(e_ph, params.w_ph.T)  # (L, d_model)
    normalized = softmax_axis(projected, axis=1)
    return e_base + normalized * params.lambda1
