"""Finite-difference verification sweep over every differentiable operation
plus the end-to-end fused-embedding -> sentiment -> graph -> multi-task-loss
composition, all on seeded small tensors (dims <= 8).
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import LSTMWeights, Tensor
from .data import Sample
from .embeddings import FusionParams, KnowledgeLexicon, embed_knowledge, fuse
from .gradcheck import GradReport, grad_check
from .graph import RewardWeights, SocialGraph
from .losses import reinforcement_deficit
from .model import CrisisRecognizer
from .optim import ParamStore
from .sentiment import init_mscn_params, sentiment_forward


def _merge(report: GradReport, section: str, sub: GradReport) -> None:
    for name, err in sub.per_param.items():
        report.per_param[f"{section}/{name}"] = err


def _store(**arrays) -> ParamStore:
    ps = ParamStore()
    for name, arr in arrays.items():
        ps.add(name, Tensor(arr, requires_grad=True))
    return ps


def run_gradient_suite(seed: int = 0, epsilon: float = 1e-4) -> GradReport:
    """Check every op and the full composition; returns one merged report."""
    rng = np.random.default_rng(seed)
    report = GradReport(epsilon=epsilon)

    ps = _store(a=rng.normal(size=(3, 4)), b=rng.normal(size=(4, 2)))
    _merge(report, "matmul", grad_check(lambda p: (ad.matmul(p["a"], p["b"]) * ad.matmul(p["a"], p["b"])).sum(), ps, epsilon))

    ps = _store(a=rng.normal(size=(2, 3)), b=rng.normal(size=(2, 3)))
    _merge(report, "elementwise", grad_check(lambda p: ((p["a"] * p["b"] + p["a"]) * 0.5).sum(), ps, epsilon))

    vals = rng.normal(size=(3, 3))
    vals[np.abs(vals) < 0.05] = 0.5
    ps = _store(x=vals)
    _merge(report, "relu", grad_check(lambda p: (ad.relu(p["x"]) * ad.relu(p["x"])).sum(), ps, epsilon))

    w = Tensor(rng.normal(size=(2, 5)))
    ps = _store(x=rng.normal(size=(2, 5)))
    _merge(report, "softmax", grad_check(lambda p: (ad.softmax_axis(p["x"], axis=1) * w).sum(), ps, epsilon))

    ps = _store(
        seq=rng.normal(size=(6, 3)), k=rng.normal(size=(2, 3, 4)), b=rng.normal(size=4)
    )

    def conv_f(p):
        out = ad.conv1d_valid(p["seq"], p["k"], p["b"])
        return (out * out).sum()

    _merge(report, "conv1d", grad_check(conv_f, ps, epsilon))

    d_in, d_h = 3, 2
    ps = _store(
        x=rng.normal(size=d_in),
        h=rng.normal(size=d_h),
        c=rng.normal(size=d_h),
        wx=rng.normal(size=(d_in, 4 * d_h)) * 0.5,
        wh=rng.normal(size=(d_h, 4 * d_h)) * 0.5,
        bias=rng.normal(size=4 * d_h) * 0.1,
    )

    def lstm_f(p):
        weights = LSTMWeights(w_x=p["wx"], w_h=p["wh"], bias=p["bias"])
        h, c = ad.lstm_step(p["x"], (p["h"], p["c"]), weights)
        return (h * h).sum() + c.sum()

    _merge(report, "lstm_step", grad_check(lstm_f, ps, epsilon))

    ps = _store(logits=rng.normal(size=(4, 3)))
    _merge(report, "cross_entropy", grad_check(lambda p: ad.cross_entropy(p["logits"], [0, 2, 1, 1]), ps, epsilon))

    lex = KnowledgeLexicon(
        categories=["a", "b", "neutral"], term_to_category={"x": "a", "y": "b"}
    )
    ps = _store(
        base=rng.normal(size=(3, 4)), cats=rng.normal(size=(3, 2)), w_ph=rng.normal(size=(4, 2))
    )

    def fuse_f(p):
        e_ph = embed_knowledge(["x", "y", "zz"], lex, p["cats"])
        out = fuse(p["base"], e_ph, FusionParams(w_ph=p["w_ph"], lambda1=0.7))
        return (out * out).sum()

    _merge(report, "fuse", grad_check(fuse_f, ps, epsilon))

    mscn = init_mscn_params(rng, d_model=3, widths=(2,), channels=2, d_s=3)
    ps = _store(e=rng.normal(size=(4, 3)))
    ps.add("k0", mscn.kernels[0])
    ps.add("wx2", mscn.lstm.w_x)
    ps.add("wa", mscn.w_a)

    def mscn_f(p):
        out = sentiment_forward(p["e"], mscn)
        return out.s_adaptive.sum()

    _merge(report, "mscn", grad_check(mscn_f, ps, epsilon))

    ps = _store(probs_logit=rng.normal(size=4))

    def soft_f(p):
        probs = ad.sigmoid(p["probs_logit"])
        return reinforcement_deficit(probs, [1, 0, 1, 0], RewardWeights())

    _merge(report, "soft_reward", grad_check(soft_f, ps, epsilon))

    _merge(report, "end_to_end", _end_to_end_check(seed, epsilon))
    return report


def _tiny_setup(seed: int):
    lexicon = KnowledgeLexicon(
        categories=["depression", "anxiety", "neutral"],
        term_to_category={"hopeless": "depression", "panic": "anxiety"},
    )
    graph = SocialGraph(users=["u0", "u1", "u2"], edges=[("u0", "u1"), ("u1", "u2")])
    tokens = [
        ["hopeless", "day", "today"],
        ["panic", "about", "work", "now"],
        ["nice", "coffee", "morning"],
        ["game", "tonight"],
    ]
    labels = [(1, "neg", "moderate"), (1, "neg", "mild"), (0, "pos", "mild"), (0, "neu", "mild")]
    users = ["u0", "u1", "u2", "u0"]
    samples = [
        Sample(
            id=f"g{i}",
            user=users[i],
            timestamp=float(100 + i),
            tokens=tokens[i],
            crisis=labels[i][0],
            polarity=labels[i][1],
            intensity=labels[i][2],
            behavior_risk=int(users[i] == "u0"),
        )
        for i in range(4)
    ]
    model = CrisisRecognizer(
        d_model=4,
        d_ph=3,
        encoder_layers=1,
        encoder_heads=2,
        conv_widths=(2, 3),
        conv_channels=2,
        hidden_size=4,
        gcn_dims=(3, 2),
        lambda_knowledge=0.5,
        seed=seed,
    )
    model.initialize(lexicon, graph, samples)
    return model, samples


def _end_to_end_check(seed: int, epsilon: float) -> GradReport:
    """Gradient of the full multi-task batch loss w.r.t. every parameter."""
    model, samples = _tiny_setup(seed)
    loss_w = model._loss_weights()
    reward_w = model._reward_weights()
    risk_labels = [model.user_risk_[u] for u in model.graph_.users]

    def f(params):
        loss, _ = model.batch_loss(samples, loss_w, reward_w, risk_labels)
        return loss

    return grad_check(f, model.params_, epsilon)
