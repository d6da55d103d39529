"""Deterministic synthetic corpus with planted crisis mechanisms.

Three mechanisms produce crisis-positive samples:

* ``explicit``  -- the message contains crisis lexicon terms; intensity is
  moderate (one term) or strong (two or more).
* ``implicit``  -- the crisis is signaled only by the co-occurrence of both
  members of one cue pair of otherwise innocuous tokens; intensity mild.
  Single pair members also appear in neutral chatter, so the pair, not the
  words, carries the label.
* ``sarcasm``   -- positive surface words plus a sarcastic marker pair; the
  gold polarity is negative despite the upbeat wording.

Everything else is neutral filler. Behavior risk is a per-user label: a user
is at risk exactly when more than half of their generated messages are
crisis-positive. The social graph wires users with a homophily bias so risky
users cluster together.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Sample
from .embeddings import DEFAULT_CATEGORIES, KnowledgeLexicon
from .errors import ConfigError
from .graph import SocialGraph

SECONDS_PER_DAY = 86400.0

# terms the emitted lexicon maps to crisis categories
CRISIS_TERMS = {
    "depression": ("hopeless", "worthless", "empty", "numb", "drowning"),
    "anxiety": ("panic", "dread", "trembling", "suffocating", "spiraling"),
    "suicidal-ideation": ("suicidal", "overdose", "goodbye", "disappear"),
    "self-harm": ("cutting", "burning", "scars", "bleeding"),
    "hopelessness": ("pointless", "trapped", "doomed", "unbearable"),
}

# pairs of non-lexicon tokens whose CO-OCCURRENCE marks an implicit crisis
IMPLICIT_PAIRS = (
    ("cant", "anymore"),
    ("done", "trying"),
    ("tired", "everything"),
    ("whats", "point"),
)

# positive surface words (benign chatter and sarcasm both use them)
POSITIVE_TERMS = ("great", "happy", "wonderful", "amazing", "love", "fantastic", "joy")

# both markers together flag sarcasm
SARCASM_MARKERS = ("yeah", "right")

MECHANISMS = ("explicit", "implicit", "sarcasm")
NO_MECHANISM = "none"

RISKY_USER_FRACTION = 0.4
HOMOPHILY = 0.7
USER_AFFINITY = 0.9  # crisis messages go to risky users this often


@dataclass
class GenConfig:
    """Knobs for the synthetic corpus."""

    n_users: int = 12
    n_samples: int = 200
    seed: int = 0
    explicit_rate: float = 0.2
    implicit_rate: float = 0.15
    sarcasm_rate: float = 0.1
    timespan_days: float = 7.0
    vocab_size: int = 120

    def __post_init__(self):
        if self.n_users < 1 or self.n_samples < 1:
            raise ConfigError("n_users and n_samples must be positive")
        for name in ("explicit_rate", "implicit_rate", "sarcasm_rate"):
            r = getattr(self, name)
            if not (0.0 <= r <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1], got {r}")
        if self.explicit_rate + self.implicit_rate + self.sarcasm_rate > 1.0 + 1e-12:
            raise ConfigError("cue rates must sum to at most 1")
        if self.timespan_days <= 0:
            raise ConfigError("timespan_days must be positive")
        if self.vocab_size < 8:
            raise ConfigError("vocab_size must be at least 8")


@dataclass
class GeneratedCorpus:
    samples: list[Sample]
    lexicon: KnowledgeLexicon
    graph: SocialGraph
    provenance: dict[str, str] = field(default_factory=dict)


def _filler_tokens(cfg: GenConfig) -> list[str]:
    reserved = (
        sum(len(v) for v in CRISIS_TERMS.values())
        + 2 * len(IMPLICIT_PAIRS)
        + len(POSITIVE_TERMS)
        + len(SARCASM_MARKERS)
    )
    n_filler = max(8, cfg.vocab_size - reserved)
    return [f"w{i:03d}" for i in range(n_filler)]


def _build_lexicon() -> KnowledgeLexicon:
    terms = {}
    for category, words in CRISIS_TERMS.items():
        for w in words:
            terms[w] = category
    return KnowledgeLexicon(categories=list(DEFAULT_CATEGORIES), term_to_category=terms)


def _neutral_tokens(rng, filler, length):
    toks = [filler[int(rng.integers(len(filler)))] for _ in range(length)]
    # sprinkle singles that crisis mechanisms use, without completing a pattern
    if rng.random() < 0.3:
        toks[int(rng.integers(len(toks)))] = POSITIVE_TERMS[int(rng.integers(len(POSITIVE_TERMS)))]
    if rng.random() < 0.2:
        pair = IMPLICIT_PAIRS[int(rng.integers(len(IMPLICIT_PAIRS)))]
        toks[int(rng.integers(len(toks)))] = pair[int(rng.integers(2))]
    if rng.random() < 0.15:
        toks[int(rng.integers(len(toks)))] = SARCASM_MARKERS[int(rng.integers(2))]
    return toks


def _sample_tokens(rng: np.random.Generator, mechanism: str, filler: list[str]) -> tuple[list[str], str, str]:
    """Return (tokens, polarity, intensity) for one message."""
    length = int(rng.integers(4, 13))
    base = [filler[int(rng.integers(len(filler)))] for _ in range(length)]
    if mechanism == "explicit":
        all_terms = sorted(t for words in CRISIS_TERMS.values() for t in words)
        n_cues = int(rng.integers(1, 3))
        positions = rng.choice(length, size=min(n_cues, length), replace=False)
        for pos in positions:
            base[int(pos)] = all_terms[int(rng.integers(len(all_terms)))]
        n_present = sum(1 for t in base if t in set(all_terms))
        intensity = "strong" if n_present >= 2 else "moderate"
        return base, "neg", intensity
    if mechanism == "implicit":
        pair = IMPLICIT_PAIRS[int(rng.integers(len(IMPLICIT_PAIRS)))]
        i, j = rng.choice(length, size=2, replace=False)
        base[int(i)], base[int(j)] = pair[0], pair[1]
        return base, "neg", "mild"
    if mechanism == "sarcasm":
        picks = rng.choice(length, size=min(4, length), replace=False)
        base[int(picks[0])] = POSITIVE_TERMS[int(rng.integers(len(POSITIVE_TERMS)))]
        base[int(picks[1])] = POSITIVE_TERMS[int(rng.integers(len(POSITIVE_TERMS)))]
        base[int(picks[2])], base[int(picks[3])] = SARCASM_MARKERS
        return base, "neg", "moderate"
    toks = _neutral_tokens(rng, filler, length)
    polarity = "pos" if any(t in POSITIVE_TERMS for t in toks) else "neu"
    return toks, polarity, "mild"


def _scrub_accidental_patterns(tokens: list[str], mechanism: str, filler, rng) -> list[str]:
    """Keep each sample's planted mechanism unique: neutral/sarcasm samples
    must not complete an implicit pair, non-explicit samples must not carry
    lexicon terms, and only sarcasm carries both markers."""
    crisis_vocab = {t for words in CRISIS_TERMS.values() for t in words}
    out = list(tokens)
    if mechanism != "explicit":
        out = [filler[int(rng.integers(len(filler)))] if t in crisis_vocab else t for t in out]
    if mechanism != "implicit":
        for a, b in IMPLICIT_PAIRS:
            while a in out and b in out:
                out[out.index(b)] = filler[int(rng.integers(len(filler)))]
    if mechanism != "sarcasm":
        a, b = SARCASM_MARKERS
        while a in out and b in out:
            out[out.index(b)] = filler[int(rng.integers(len(filler)))]
    return out


def gen_corpus(cfg: GenConfig) -> GeneratedCorpus:
    """Generate samples, lexicon, graph, and per-sample mechanism provenance.

    Pure function of the config: identical configs produce identical output,
    byte for byte once written.
    """
    rng = np.random.default_rng(cfg.seed)
    filler = _filler_tokens(cfg)
    lexicon = _build_lexicon()
    users = [f"u{i:03d}" for i in range(cfg.n_users)]
    n_risky = max(1, round(RISKY_USER_FRACTION * cfg.n_users)) if cfg.n_users > 1 else 1
    risky = set(rng.choice(cfg.n_users, size=n_risky, replace=False).tolist())

    n_explicit = int(round(cfg.explicit_rate * cfg.n_samples))
    n_implicit = int(round(cfg.implicit_rate * cfg.n_samples))
    n_sarcasm = int(round(cfg.sarcasm_rate * cfg.n_samples))
    overflow = n_explicit + n_implicit + n_sarcasm - cfg.n_samples
    if overflow > 0:
        n_sarcasm = max(0, n_sarcasm - overflow)
    mechanisms = (
        ["explicit"] * n_explicit
        + ["implicit"] * n_implicit
        + ["sarcasm"] * n_sarcasm
        + [NO_MECHANISM] * (cfg.n_samples - n_explicit - n_implicit - n_sarcasm)
    )
    order = rng.permutation(cfg.n_samples)
    mechanisms = [mechanisms[i] for i in order]

    timestamps = np.sort(rng.uniform(0.0, cfg.timespan_days * SECONDS_PER_DAY, size=cfg.n_samples))

    drafts = []
    for i, mech in enumerate(mechanisms):
        is_crisis = mech in MECHANISMS
        if cfg.n_users == 1:
            user_idx = 0
        elif is_crisis:
            pool = sorted(risky) if rng.random() < USER_AFFINITY else sorted(set(range(cfg.n_users)) - risky)
            user_idx = pool[int(rng.integers(len(pool)))]
        else:
            pool = sorted(set(range(cfg.n_users)) - risky) if rng.random() < USER_AFFINITY else sorted(risky)
            user_idx = pool[int(rng.integers(len(pool)))]
        tokens, polarity, intensity = _sample_tokens(rng, mech, filler)
        tokens = _scrub_accidental_patterns(tokens, mech, filler, rng)
        drafts.append((users[user_idx], tokens, int(is_crisis), polarity, intensity, mech))

    # behavior risk from realized per-user crisis fractions
    crisis_count: dict[str, int] = {u: 0 for u in users}
    total_count: dict[str, int] = {u: 0 for u in users}
    for user, _, crisis, _, _, _ in drafts:
        total_count[user] += 1
        crisis_count[user] += crisis
    risk = {
        u: int(total_count[u] > 0 and crisis_count[u] / total_count[u] > 0.5) for u in users
    }

    samples = []
    provenance = {}
    for i, (user, tokens, crisis, polarity, intensity, mech) in enumerate(drafts):
        sid = f"s{i:05d}"
        samples.append(
            Sample(
                id=sid,
                user=user,
                timestamp=float(timestamps[i]),
                tokens=tokens,
                crisis=crisis,
                polarity=polarity,
                intensity=intensity,
                behavior_risk=risk[user],
            ).validate()
        )
        provenance[sid] = mech

    graph = _wire_graph(rng, users, risk)
    return GeneratedCorpus(samples=samples, lexicon=lexicon, graph=graph, provenance=provenance)


def _wire_graph(rng: np.random.Generator, users: list[str], risk: dict[str, int]) -> SocialGraph:
    """Each user draws 1-3 partners, same-risk-group with probability HOMOPHILY."""
    n = len(users)
    edges: set[tuple[str, str]] = set()
    risky_idx = sorted(i for i, u in enumerate(users) if risk[u] == 1)
    safe_idx = sorted(i for i, u in enumerate(users) if risk[u] == 0)
    for i in range(n):
        degree = int(rng.integers(1, 4))
        for _ in range(degree):
            own = risky_idx if i in risky_idx else safe_idx
            other = safe_idx if i in risky_idx else risky_idx
            pool = own if rng.random() < HOMOPHILY else other
            pool = [j for j in pool if j != i]
            if not pool:
                pool = [j for j in range(n) if j != i]
            if not pool:
                continue
            j = pool[int(rng.integers(len(pool)))]
            edges.add((users[min(i, j)], users[max(i, j)]))
    return SocialGraph(users=list(users), edges=sorted(edges))
