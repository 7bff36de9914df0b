"""Command-line entry point: ``mmcr <command> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .autodiff import CheckpointError, atomic_write_bytes
from .classifier import ReviewModel, TrainConfig, evaluate, parse_class_weight, prepare, train
from .contrastive import ContrastiveConfig
from .data import (
    CorpusError,
    ReviewSample,
    SplitSpec,
    extract_method_pairs,
    load_corpus,
    save_corpus,
    split,
    corpus_stats,
    stats_by_repo,
)
from .encoders import CodeEncoderConfig, TextEncoderConfig
from .java import LexError, ParseError, TreeFormatError, find_methods, parse_method, serialize_tree, simplify
from .java import to_code_graph
from .metrics import MetricRow, REPORT_COLUMNS, report_csv, report_text
from .pipeline import (
    CodePretrainOptions,
    TextPretrainOptions,
    TransferOptions,
    environment_seed,
    load_code_encoder,
    load_model,
    load_text_encoder,
    pretrain_code,
    pretrain_text,
    save_encoder,
    save_model,
    transfer_eval,
)

log = logging.getLogger("mmcr")

RUNTIME_ERRORS = (
    CorpusError,
    ParseError,
    LexError,
    TreeFormatError,
    CheckpointError,
    OSError,
    ValueError,
    KeyError,
)


class UsageError(Exception):
    pass


# Per-command tunables that may come from flags, a --config file or these defaults.
CODE_DEFAULTS = {"embed_dim": 64, "hidden_dim": 64, "gcn_layers": 4, "dropout": 0.1}
CONTRASTIVE_DEFAULTS = {"tau": 0.05, "batch": 64, "epochs": 10, "lr": 1e-3}
TRAIN_DEFAULTS = {
    "class_weight": "balanced",
    "lambda_": 1e-5,
    "lr": 1e-3,
    "batch": 64,
    "epochs": 20,
    "fraction": 0.8,
}
DEFAULTS = {
    ("pretrain", "code"): {**CODE_DEFAULTS, **CONTRASTIVE_DEFAULTS, "sides": "both", "skipgram_epochs": 5},
    ("pretrain", "text"): {"embed_dim": 32, "hidden_dim": 32, "dropout": 0.1, "max_len": 64, **CONTRASTIVE_DEFAULTS},
    ("train", None): dict(TRAIN_DEFAULTS),
    ("eval", None): {"report": "csv", "positive": "accept"},
    ("transfer-eval", None): {
        **CODE_DEFAULTS,
        **CONTRASTIVE_DEFAULTS,
        **{f"ft_{k}" if k in ("lr", "batch", "epochs") else k: v for k, v in TRAIN_DEFAULTS.items()},
        "text_hidden_dim": 32,
    },
    ("dataset", "split"): {"fraction": 0.8, "stratified": True},
}
SEEDED = {("pretrain", "code"), ("pretrain", "text"), ("train", None), ("transfer-eval", None), ("dataset", "split")}


# -- output helpers -------------------------------------------------------------


def emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_bytes(out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- commands -------------------------------------------------------------------


def cmd_dataset_stats(args) -> None:
    samples = load_corpus(args.path, strict=not args.lenient)
    rows = []
    if args.by_repo:
        for repo, st in stats_by_repo(samples).items():
            rows.append([repo, st.sample_count, st.rejected_count, f"{st.reject_rate:.6f}"])
    st = corpus_stats(samples)
    rows.append(["ALL", st.sample_count, st.rejected_count, f"{st.reject_rate:.6f}"])
    emit(csv_text(["repo", "samples", "rejected", "reject_rate"], rows), args.out)


def cmd_dataset_extract(args) -> None:
    original = Path(args.original).read_text(encoding="utf-8")
    revised = Path(args.revised).read_text(encoding="utf-8")
    pairs = extract_method_pairs(original, revised)
    repo = args.repo or Path(args.original).stem
    prefix = args.id_prefix or repo
    samples = [
        ReviewSample(f"{prefix}-{i:04d}", repo, o, r, args.comment, args.label) for i, (o, r) in enumerate(pairs)
    ]
    save_corpus(samples, args.out)
    print(f"extracted {len(samples)} changed method pair(s) -> {args.out}", file=sys.stderr)


def cmd_dataset_split(args) -> None:
    samples = load_corpus(args.path, strict=not args.lenient)
    spec = SplitSpec(train_fraction=args.fraction, seed=args.seed, stratified=args.stratified)
    train_s, test_s = split(samples, spec)
    stem = Path(args.path)
    train_out = args.train_out or str(stem.with_suffix("")) + ".train.jsonl"
    test_out = args.test_out or str(stem.with_suffix("")) + ".test.jsonl"
    save_corpus(train_s, train_out)
    save_corpus(test_s, test_out)
    emit(csv_text(["part", "path", "samples"], [["train", train_out, len(train_s)], ["test", test_out, len(test_s)]]),
         None)


def _graph_json(root) -> str:
    g = to_code_graph(root)
    n = len(g)
    edges = [[i, j] for i in range(n) for j in range(i + 1, n) if g.adjacency[i, j]]
    return json.dumps({"nodes": g.nodes, "edges": edges})


def cmd_parse(args) -> None:
    source = Path(args.file).read_text(encoding="utf-8")
    try:
        roots = [("", parse_method(source))]
    except ParseError:
        methods = find_methods(source)
        if not methods:
            raise
        roots = [(m.name, parse_method(m.tokens)) for m in methods]
    chunks = []
    for name, root in roots:
        if args.dump == "graph":
            body = _graph_json(simplify(root)) + "\n"
        elif args.dump == "simplified":
            body = serialize_tree(simplify(root))
        else:
            body = serialize_tree(root)
        header = f"# method {name}\n" if len(roots) > 1 else ""
        chunks.append(header + body)
    emit("".join(chunks), args.out)


def _contrastive(args) -> ContrastiveConfig:
    return ContrastiveConfig(temperature=args.tau, batch_size=args.batch, epochs=args.epochs, lr=args.lr, seed=args.seed)


def _loss_csv(history) -> str:
    return csv_text(["epoch", "mean_loss"], [[i, f"{v:.6f}"] for i, v in enumerate(history)])


def cmd_pretrain_code(args) -> None:
    samples = load_corpus(args.corpus, strict=not args.lenient)
    opts = CodePretrainOptions(
        encoder=CodeEncoderConfig(args.embed_dim, args.hidden_dim, args.gcn_layers, args.dropout),
        contrastive=_contrastive(args),
        sides=args.sides,
        skipgram_epochs=args.skipgram_epochs,
    )
    encoder, history = pretrain_code(samples, opts)
    save_encoder(encoder, args.out, "code")
    emit(_loss_csv(history), args.loss_log)


def cmd_pretrain_text(args) -> None:
    samples = load_corpus(args.corpus, strict=not args.lenient)
    opts = TextPretrainOptions(
        encoder=TextEncoderConfig(0, args.embed_dim, args.hidden_dim, args.dropout, args.max_len),
        contrastive=_contrastive(args),
    )
    encoder, history = pretrain_text(samples, opts)
    save_encoder(encoder, args.out, "text")
    emit(_loss_csv(history), args.loss_log)


def _train_config(args, lr, batch, epochs) -> TrainConfig:
    mode, explicit = parse_class_weight(args.class_weight)
    return TrainConfig(
        lam=args.lambda_, lr=lr, batch_size=batch, epochs=epochs, seed=args.seed,
        class_weight_mode=mode, explicit_weights=explicit, freeze_encoders=args.freeze_encoders,
    )


def _history_csv(history) -> str:
    return csv_text(
        ["epoch", "train_loss", "val_f1", "val_mcc"],
        [[r.epoch, f"{r.train_loss:.6f}", f"{r.val_f1:.6f}", f"{r.val_mcc:.6f}"] for r in history],
    )


def cmd_train(args) -> None:
    config = _train_config(args, args.lr, args.batch, args.epochs)
    samples = load_corpus(args.corpus, strict=not args.lenient)
    if args.val_corpus:
        train_s, val_s = samples, load_corpus(args.val_corpus, strict=not args.lenient)
    else:
        train_s, val_s = split(samples, SplitSpec(train_fraction=args.fraction, seed=args.seed))
    code = load_code_encoder(args.code_ckpt, partial=args.partial)
    if args.text_ckpt:
        text = load_text_encoder(args.text_ckpt)
    elif args.partial:
        text, _ = pretrain_text(train_s, TextPretrainOptions(contrastive=ContrastiveConfig(epochs=0, seed=args.seed)))
    else:
        raise UsageError("--text-ckpt is required unless --partial is given")
    model = ReviewModel(code, text, seed=args.seed, use_text=not args.no_text)
    result = train(model, prepare(train_s), prepare(val_s) if val_s else None, config)
    save_model(model, args.out, config)
    emit(_history_csv(result.history), args.history)


def cmd_eval(args) -> None:
    samples = load_corpus(args.corpus, strict=not args.lenient)
    if not samples:
        raise ValueError("eval: empty corpus")
    model = load_model(args.model)
    positive = 1 if args.positive == "accept" else 0
    groups: dict[str, list] = {}
    for s in samples:
        groups.setdefault(s.repo, []).append(s)
    rows = []
    total = None
    for repo in sorted(groups):
        cm = evaluate(model, prepare(groups[repo]), positive=positive).cm
        rows.append(MetricRow(repo, cm))
        total = cm if total is None else total + cm
    if len(groups) > 1:
        rows.append(MetricRow("ALL", total))
    emit(report_csv(rows) if args.report == "csv" else report_text(rows), args.out)


def cmd_transfer_eval(args) -> None:
    source = load_corpus(args.pretrain_corpus, strict=not args.lenient)
    target = load_corpus(args.target_corpus, strict=not args.lenient)
    contrastive = _contrastive(args)
    opts = TransferOptions(
        code=CodePretrainOptions(
            encoder=CodeEncoderConfig(args.embed_dim, args.hidden_dim, args.gcn_layers, args.dropout),
            contrastive=contrastive,
        ),
        text=TextPretrainOptions(
            encoder=TextEncoderConfig(0, args.text_hidden_dim, args.text_hidden_dim), contrastive=contrastive
        ),
        train=_train_config(args, args.ft_lr, args.ft_batch, args.ft_epochs),
        split=SplitSpec(train_fraction=args.fraction, seed=args.seed),
    )
    transferred, self_trained = transfer_eval(source, target, opts)
    repo = target[0].repo if len({s.repo for s in target}) == 1 else "ALL"
    rows = []
    for outcome, setting in ((transferred, f"pretrained on {Path(args.pretrain_corpus).name}"),
                             (self_trained, "self-pretrained")):
        vals = MetricRow(repo, outcome.evaluation.cm).values()
        rows.append([setting] + [f"{v:.6f}" if isinstance(v, float) else v for v in (vals[c] for c in REPORT_COLUMNS)])
    emit(csv_text(["setting", *REPORT_COLUMNS], rows), args.out)


# -- argument parsing -------------------------------------------------------------


def _common(p: argparse.ArgumentParser, seeded: bool = False) -> None:
    p.add_argument("--config", help="flat JSON file of option defaults")
    p.add_argument("--lenient", action="store_true", help="ignore unknown keys in corpus records")
    p.add_argument("-v", "--verbose", action="store_true")
    if seeded:
        p.add_argument("--seed", type=int, default=None, help="random seed (default: $MMCR_SEED or 0)")


def _contrastive_flags(p) -> None:
    p.add_argument("--tau", type=float, help="InfoNCE temperature")
    p.add_argument("--batch", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)


def _code_flags(p) -> None:
    p.add_argument("--embed-dim", type=int)
    p.add_argument("--hidden-dim", type=int)
    p.add_argument("--gcn-layers", type=int)
    p.add_argument("--dropout", type=float)


def _train_flags(p, prefix: str = "") -> None:
    p.add_argument("--class-weight", help="balanced | none | w_reject,w_accept")
    p.add_argument("--lambda", dest="lambda_", type=float, help="L2 coefficient")
    p.add_argument(f"--{prefix}lr", type=float)
    p.add_argument(f"--{prefix}batch", type=int)
    p.add_argument(f"--{prefix}epochs", type=int)
    p.add_argument("--fraction", type=float, help="train fraction of the held-out split")
    p.add_argument("--freeze-encoders", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmcr", description="Multi-modal code review classifier toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ds = sub.add_parser("dataset", help="corpus utilities").add_subparsers(dest="action", required=True)
    p = ds.add_parser("stats", help="sample and reject counts")
    p.add_argument("path")
    p.add_argument("--by-repo", action="store_true")
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_dataset_stats)

    p = ds.add_parser("extract", help="changed method pairs from two versions of a file")
    p.add_argument("original")
    p.add_argument("revised")
    p.add_argument("--comment", required=True)
    p.add_argument("--label", type=int, choices=(0, 1), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--repo")
    p.add_argument("--id-prefix")
    _common(p)
    p.set_defaults(func=cmd_dataset_extract)

    p = ds.add_parser("split", help="deterministic train/test split")
    p.add_argument("path")
    p.add_argument("--fraction", type=float)
    p.add_argument("--stratified", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--train-out")
    p.add_argument("--test-out")
    _common(p, seeded=True)
    p.set_defaults(func=cmd_dataset_split)

    p = sub.add_parser("parse", help="dump the AST, simplified AST or relation graph of Java code")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--dump-ast", dest="dump", action="store_const", const="ast")
    g.add_argument("--dump-simplified", dest="dump", action="store_const", const="simplified")
    g.add_argument("--dump-graph", dest="dump", action="store_const", const="graph")
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_parse, dump="ast")

    pt = sub.add_parser("pretrain", help="contrastive encoder pretraining").add_subparsers(dest="action", required=True)
    p = pt.add_parser("code")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-log", help="CSV of per-epoch loss (default: stdout)")
    p.add_argument("--sides", choices=("both", "original", "revised"))
    p.add_argument("--skipgram-epochs", type=int)
    _contrastive_flags(p)
    _code_flags(p)
    _common(p, seeded=True)
    p.set_defaults(func=cmd_pretrain_code)

    p = pt.add_parser("text")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-log")
    p.add_argument("--embed-dim", type=int)
    p.add_argument("--hidden-dim", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--max-len", type=int)
    _contrastive_flags(p)
    _common(p, seeded=True)
    p.set_defaults(func=cmd_pretrain_text)

    p = sub.add_parser("train", help="fine-tune the fused classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--code-ckpt", required=True)
    p.add_argument("--text-ckpt")
    p.add_argument("--partial", action="store_true", help="load only shared code-encoder weights")
    p.add_argument("--out", required=True)
    p.add_argument("--val-corpus", help="held-out corpus (default: split --corpus)")
    p.add_argument("--history", help="CSV of per-epoch metrics (default: stdout)")
    p.add_argument("--no-text", action="store_true", help="code-only variant with the comment vector zeroed")
    _train_flags(p)
    _common(p, seeded=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--report", choices=("csv", "text"))
    p.add_argument("--positive", choices=("accept", "reject"))
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("transfer-eval", help="cross-project code-encoder transfer")
    p.add_argument("--pretrain-corpus", required=True)
    p.add_argument("--target-corpus", required=True)
    p.add_argument("--out")
    p.add_argument("--text-hidden-dim", type=int)
    _contrastive_flags(p)
    _code_flags(p)
    _train_flags(p, prefix="ft-")
    _common(p, seeded=True)
    p.set_defaults(func=cmd_transfer_eval)
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options: flags > config file > defaults (seed: > $MMCR_SEED)."""
    key = (args.command, getattr(args, "action", None))
    defaults = DEFAULTS.get(key, {})
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(config, dict) or any(isinstance(v, (dict, list)) for v in config.values()):
            raise UsageError("config file must be a flat JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
        if "lambda" in config:
            config["lambda_"] = config.pop("lambda")
        allowed = set(defaults) | ({"seed"} if key in SEEDED else set())
        unknown = sorted(set(config) - allowed)
        if unknown:
            raise UsageError(f"unknown config keys for {' '.join(k for k in key if k)}: {', '.join(unknown)}")
    for name, default in defaults.items():
        if getattr(args, name, None) is None:
            setattr(args, name, config.get(name, default))
    if key in SEEDED and args.seed is None:
        args.seed = int(config["seed"]) if "seed" in config else environment_seed()
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        resolve(args)
        args.func(args)
    except UsageError as exc:
        print(f"mmcr: usage error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"mmcr: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
