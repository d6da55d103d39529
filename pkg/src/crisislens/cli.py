"""Command-line interface.

Subcommands: gen | train | eval | predict | curve | gradcheck | compare.
Exit codes: 0 success, 1 usage/config error, 2 data/format error,
3 numeric/training error. Every experiment knob is a flag, and an optional
JSON config file (--config) supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import BiLstmClassifier, LexiconSentimentClassifier, polarity_table_from_lexicon
from .curves import (
    detection_curve,
    detection_curve_rows,
    stability_curve,
    stability_rows,
)
from .data import SplitSpec, load_corpus, load_provenance, save_corpus, save_provenance, split
from .embeddings import KnowledgeLexicon
from .errors import ConfigError, CrisisLensError, DataError, NumericError
from .generator import GenConfig, gen_corpus
from .gradsuite import run_gradient_suite
from .graph import SocialGraph
from .metrics import depth_distribution, evaluate
from .model import CrisisRecognizer, history_to_csv, load_model, save_model
from .plots import svg_line_plot

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; this artifact uses 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    def _usage_exit(self, message) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return EXIT_USAGE


MODEL_FLAGS = (
    ("d_model", int),
    ("d_ph", int),
    ("encoder_layers", int),
    ("encoder_heads", int),
    ("conv_channels", int),
    ("hidden_size", int),
    ("lambda_knowledge", float),
    ("epochs", int),
    ("batch_size", int),
    ("learning_rate", float),
    ("bprm_step", float),
    ("bprm_every", int),
    ("window_days", float),
    ("val_fraction", float),
    ("min_count", int),
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="global seed (default 0)")
    p.add_argument("--config", type=Path, default=None, help="JSON file with default flag values")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    for name, typ in MODEL_FLAGS:
        p.add_argument(f"--{name.replace('_', '-')}", type=typ, default=None)
    p.add_argument("--conv-widths", type=str, default=None, help="comma list, e.g. 2,3,4")
    p.add_argument("--gcn-dims", type=str, default=None, help="comma list, e.g. 16,8")
    p.add_argument("--loss-weights", type=str, default=None, help="4 comma floats")
    p.add_argument("--reward-weights", type=str, default=None, help="3 comma floats")


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--split-train", type=float, default=None)
    p.add_argument("--split-val", type=float, default=None)
    p.add_argument("--split-test", type=float, default=None)
    p.add_argument("--split-by-user", action="store_true", default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="crisislens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[], help="generate a synthetic corpus + lexicon + graph")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n-users", type=int, default=None)
    p.add_argument("--n-samples", type=int, default=None)
    p.add_argument("--explicit-rate", type=float, default=None)
    p.add_argument("--implicit-rate", type=float, default=None)
    p.add_argument("--sarcasm-rate", type=float, default=None)
    p.add_argument("--timespan-days", type=float, default=None)
    p.add_argument("--vocab-size", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("train", help="train the full model and save it")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--lexicon", type=Path, required=True)
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_model_flags(p)
    _add_split_flags(p)
    _add_common(p)

    p = sub.add_parser("eval", help="evaluate a saved model, emit metrics JSON/CSV/SVG")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--provenance", type=Path, default=None)
    p.add_argument("--split-file", type=Path, default=None, help="split.json from train")
    p.add_argument("--part", choices=("train", "val", "test"), default="test")
    p.add_argument("--out", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("predict", help="JSON-lines predictions: stdin -> stdout")
    p.add_argument("--model", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("curve", help="figure protocols: detection or stability curve")
    p.add_argument("--kind", choices=("detection", "stability"), required=True)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--lexicon", type=Path, default=None)
    p.add_argument("--graph", type=Path, default=None)
    p.add_argument("--model", type=Path, default=None, help="trained model (stability)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--checkpoints", type=str, default=None, help="comma sample counts")
    p.add_argument("--eval-fraction", type=float, default=None)
    p.add_argument("--buckets", type=str, default=None, help="e.g. 1-4,5-8,9-16")
    _add_model_flags(p)
    _add_common(p)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification suite")
    p.add_argument("--epsilon", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("compare", help="full model vs baselines vs knowledge ablation")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--lexicon", type=Path, required=True)
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--provenance", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_model_flags(p)
    _add_split_flags(p)
    _add_common(p)

    return parser


def _load_config_file(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        config = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise DataError(f"config file {path} must hold a JSON object")
    return config


def _resolve(args, config: dict, key: str, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _parse_tuple(text, typ, expected: int | None = None):
    if isinstance(text, (list, tuple)):
        values = tuple(typ(v) for v in text)
    else:
        values = tuple(typ(v) for v in str(text).split(","))
    if expected is not None and len(values) != expected:
        raise ConfigError(f"expected {expected} comma-separated values, got {text!r}")
    return values


def _recognizer_from_args(args, config: dict, seed: int) -> CrisisRecognizer:
    kwargs = {}
    for name, _typ in MODEL_FLAGS:
        value = _resolve(args, config, name, None)
        if value is not None:
            kwargs[name] = value
    for name, n in (("conv_widths", None), ("gcn_dims", None), ("loss_weights", 4), ("reward_weights", 3)):
        value = _resolve(args, config, name, None)
        if value is not None:
            kwargs[name] = _parse_tuple(value, float if name.endswith("weights") else int, n)
    return CrisisRecognizer(seed=seed, **kwargs)


def _split_spec(args, config: dict, seed: int) -> SplitSpec:
    return SplitSpec(
        train=_resolve(args, config, "split_train", 0.7),
        val=_resolve(args, config, "split_val", 0.15),
        test=_resolve(args, config, "split_test", 0.15),
        by_user=bool(_resolve(args, config, "split_by_user", False)),
        seed=seed,
    )


def _outdirs(out: Path, *names: str) -> dict[str, Path]:
    dirs = {}
    for name in names:
        d = out / name
        d.mkdir(parents=True, exist_ok=True)
        dirs[name] = d
    return dirs


def _write_csv(path: Path, rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_gen(args, config: dict, seed: int) -> int:
    cfg = GenConfig(
        n_users=_resolve(args, config, "n_users", 12),
        n_samples=_resolve(args, config, "n_samples", 200),
        seed=seed,
        explicit_rate=_resolve(args, config, "explicit_rate", 0.2),
        implicit_rate=_resolve(args, config, "implicit_rate", 0.15),
        sarcasm_rate=_resolve(args, config, "sarcasm_rate", 0.1),
        timespan_days=_resolve(args, config, "timespan_days", 7.0),
        vocab_size=_resolve(args, config, "vocab_size", 120),
    )
    out = gen_corpus(cfg)
    dirs = _outdirs(args.out, "corpus")
    save_corpus(out.samples, dirs["corpus"] / "corpus.jsonl")
    save_provenance(out.provenance, dirs["corpus"] / "provenance.jsonl")
    out.lexicon.save(dirs["corpus"] / "lexicon.json")
    out.graph.save(dirs["corpus"] / "graph.json")
    print(f"wrote {len(out.samples)} samples to {dirs['corpus']}")
    return EXIT_OK


def _load_inputs(args):
    samples = load_corpus(args.corpus)
    lexicon = KnowledgeLexicon.load(args.lexicon) if args.lexicon else None
    graph = SocialGraph.load(args.graph) if args.graph else None
    return samples, lexicon, graph


def _cmd_train(args, config: dict, seed: int) -> int:
    samples, lexicon, graph = _load_inputs(args)
    spec = _split_spec(args, config, seed)
    train_s, val_s, test_s = split(samples, spec)
    model = _recognizer_from_args(args, config, seed)
    model.fit(train_s, lexicon=lexicon, graph=graph, val_samples=val_s)
    dirs = _outdirs(args.out, "model")
    save_model(model, dirs["model"] / "model.bin")
    history_to_csv(model.history_, dirs["model"] / "history.csv")
    split_ids = {
        "train": [s.id for s in train_s],
        "val": [s.id for s in val_s],
        "test": [s.id for s in test_s],
    }
    (dirs["model"] / "split.json").write_text(
        json.dumps(split_ids, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"trained {model.epochs} epochs; model written to {dirs['model'] / 'model.bin'}")
    return EXIT_OK


def _select_part(samples, split_file: Path | None, part: str):
    if split_file is None:
        return samples
    ids = json.loads(split_file.read_text(encoding="utf-8"))
    if part not in ids:
        raise DataError(f"split file {split_file} has no part {part!r}")
    wanted = set(ids[part])
    return [s for s in samples if s.id in wanted]


def _cmd_eval(args, config: dict, seed: int) -> int:
    model = load_model(args.model)
    samples = load_corpus(args.corpus)
    samples = _select_part(samples, args.split_file, args.part)
    if not samples:
        raise DataError("no samples selected for evaluation")
    provenance = load_provenance(args.provenance) if args.provenance else None
    report = evaluate(model, samples, provenance=provenance)
    dirs = _outdirs(args.out, "reports", "figures")
    report.save_json(dirs["reports"] / "metrics.json")
    report.save_csv(dirs["reports"] / "metrics.csv")
    depth = report.per_intensity_recall
    classes = [k for k in ("mild", "moderate", "strong") if k in depth]
    svg_line_plot(
        [("recall", list(range(len(classes))), [depth[k] for k in classes])],
        title="Emotion depth distribution",
        xlabel="intensity class index (mild, moderate, strong)",
        ylabel="recall",
        path=dirs["figures"] / "depth_distribution.svg",
    )
    print(
        f"precision={report.precision:.4f} recall={report.recall:.4f}"
        f" f1={report.f1:.4f} cdr={report.cdr:.4f}"
    )
    return EXIT_OK


def _cmd_predict(args, config: dict, seed: int) -> int:
    model = load_model(args.model)
    for lineno, line in enumerate(sys.stdin, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            tokens = [str(t) for t in record["tokens"]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"stdin line {lineno}: bad prediction request: {exc}") from exc
        user = record.get("user")
        pred = model.predict_sample(tokens, user=user)
        out = {
            "crisis_prob": pred.crisis_prob,
            "polarity": {k: float(v) for k, v in zip(("neg", "neu", "pos"), pred.polarity_probs)},
            "intensity": {
                k: float(v) for k, v in zip(("mild", "moderate", "strong"), pred.intensity_probs)
            },
        }
        if pred.behavior_prob is not None:
            out["behavior_risk_prob"] = pred.behavior_prob
        sys.stdout.write(json.dumps(out, separators=(",", ":")) + "\n")
        sys.stdout.flush()
    return EXIT_OK


def _cmd_curve(args, config: dict, seed: int) -> int:
    samples = load_corpus(args.corpus)
    dirs = _outdirs(args.out, "reports", "figures")
    if args.kind == "detection":
        if args.lexicon is None or args.graph is None:
            raise ConfigError("detection curve requires --lexicon and --graph")
        lexicon = KnowledgeLexicon.load(args.lexicon)
        graph = SocialGraph.load(args.graph)
        eval_fraction = _resolve(args, config, "eval_fraction", 0.25)
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(samples))
        n_eval = max(1, int(round(eval_fraction * len(samples))))
        eval_idx = set(order[:n_eval].tolist())
        stream = sorted(
            (s for i, s in enumerate(samples) if i not in eval_idx), key=lambda s: s.timestamp
        )
        eval_samples = [s for i, s in enumerate(samples) if i in eval_idx]
        if args.checkpoints:
            checkpoints = [int(v) for v in args.checkpoints.split(",")]
        else:
            n = len(stream)
            checkpoints = sorted({0, n // 4, n // 2, (3 * n) // 4, n})
        window_days = _resolve(args, config, "window_days", 7.0)

        def train_fn(consumed):
            recognizer = _recognizer_from_args(args, config, seed)
            if not consumed:
                return recognizer.initialize(lexicon, graph)
            return recognizer.fit(list(consumed), lexicon=lexicon, graph=graph)

        points = detection_curve(
            train_fn, stream, eval_samples, checkpoints, window_days=window_days
        )
        _write_csv(dirs["reports"] / "detection_curve.csv", detection_curve_rows(points))
        svg_line_plot(
            [("CDR", [p.n_trained for p in points], [p.cdr for p in points])],
            title="Crisis detection rate vs training volume",
            xlabel="training samples consumed",
            ylabel="CDR",
            path=dirs["figures"] / "detection_curve.svg",
        )
        shown = ", ".join(
            f"{p.n_trained}:{'-' if p.cdr is None else f'{p.cdr:.3f}'}" for p in points
        )
        print(f"detection curve: {shown}")
        return EXIT_OK

    if args.model is None:
        raise ConfigError("stability curve requires --model")
    model = load_model(args.model)
    bucket_text = args.buckets or "1-4,5-8,9-16"
    buckets = []
    for part in bucket_text.split(","):
        lo, hi = part.split("-")
        buckets.append((int(lo), int(hi)))
    curve = stability_curve(model, samples, buckets)
    _write_csv(dirs["reports"] / "stability_curve.csv", stability_rows(curve))
    keys = list(curve)
    svg_line_plot(
        [("stability", list(range(len(keys))), [curve[k].mean_stability for k in keys])],
        title="Emotional stability across text lengths",
        xlabel="length bucket index (" + ", ".join(keys) + ")",
        ylabel="stability",
        path=dirs["figures"] / "stability_curve.svg",
    )
    print("stability: " + ", ".join(f"{k}={curve[k].mean_stability:.4f}" for k in keys))
    return EXIT_OK


def _cmd_gradcheck(args, config: dict, seed: int) -> int:
    epsilon = _resolve(args, config, "epsilon", 1e-4)
    report = run_gradient_suite(seed=seed, epsilon=epsilon)
    print(f"checked {len(report.per_param)} parameter groups (epsilon={epsilon:g})")
    print(f"worst relative error: {report.max_error:.3e} ({report.worst_param})")
    if report.max_error > 1e-3:
        print("FAIL: gradient check exceeded 1e-3", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_compare(args, config: dict, seed: int) -> int:
    samples = load_corpus(args.corpus)
    lexicon = KnowledgeLexicon.load(args.lexicon)
    graph = SocialGraph.load(args.graph)
    provenance = load_provenance(args.provenance)
    spec = _split_spec(args, config, seed)
    train_s, val_s, test_s = split(samples, spec)

    full = _recognizer_from_args(args, config, seed)
    full.fit(train_s, lexicon=lexicon, graph=graph, val_samples=val_s)
    ablation = _recognizer_from_args(args, config, seed)
    ablation.lambda_knowledge = 0.0
    ablation.fit(train_s, lexicon=lexicon, graph=graph, val_samples=val_s)
    bilstm = BiLstmClassifier(
        epochs=full.epochs,
        batch_size=full.batch_size,
        learning_rate=full.learning_rate,
        seed=seed,
    ).fit(train_s)
    lexicon_model = LexiconSentimentClassifier(
        polarity_table=polarity_table_from_lexicon(lexicon)
    ).fit()

    rows = [["model", "precision", "recall", "f1", "cdr", "mild_recall_implicit"]]
    implicit_test = [s for s in test_s if provenance.get(s.id) == "implicit"]
    mild_implicit = {}
    for name, candidate in (
        ("full", full),
        ("ablation_lambda0", ablation),
        ("bilstm", bilstm),
        ("lexicon", lexicon_model),
    ):
        report = evaluate(candidate, test_s, provenance=provenance)
        if implicit_test:
            depth = depth_distribution(candidate, implicit_test)
            mild = depth.get("mild", 0.0)
        else:
            mild = float("nan")
        mild_implicit[name] = mild
        rows.append(
            [name, repr(report.precision), repr(report.recall), repr(report.f1), repr(report.cdr), repr(mild)]
        )

    dirs = _outdirs(args.out, "reports")
    _write_csv(dirs["reports"] / "compare.csv", rows)
    (dirs["reports"] / "compare.json").write_text(
        json.dumps(
            {r[0]: dict(zip(rows[0][1:], [float(v) for v in r[1:]])) for r in rows[1:]},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    widths = [22, 11, 11, 11, 11, 22]
    for row in rows:
        print("".join(str(c)[: w - 1].ljust(w) for c, w in zip(row, widths)))
    margin = mild_implicit["full"] - mild_implicit["ablation_lambda0"]
    print(
        f"mild-intensity recall on implicit subset: knowledge={mild_implicit['full']:.4f}"
        f" ablation={mild_implicit['ablation_lambda0']:.4f} margin={margin:+.4f}"
    )
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "predict": _cmd_predict,
    "curve": _cmd_curve,
    "gradcheck": _cmd_gradcheck,
    "compare": _cmd_compare,
}


def run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _load_config_file(getattr(args, "config", None))
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    return COMMANDS[args.command](args, config, seed)


def main(argv: list[str] | None = None) -> int:
    try:
        code = run(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"crisislens: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"crisislens: file not found: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"crisislens: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"crisislens: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CrisisLensError as exc:
        print(f"crisislens: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return code


if __name__ == "__main__":
    sys.exit(main())
