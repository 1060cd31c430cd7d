"""Command-line interface.

Exit codes: 0 success, 2 usage or format error, 3 algorithm error. Errors
are reported on stderr as a single line ``ERROR <kind> <message>``.

Option precedence is command-line flag, then ``--config`` file, then the
built-in default. A config file is a JSON object whose top-level keys are
option names (shared by all subcommands); a nested object under a
subcommand name overrides them for that subcommand only.
"""

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from imbr import io as fileio
from imbr import plotting, report
from imbr.errors import ConfigError, FormatError, ImbrError, UsageError
from imbr.evaluate import cross_validate, stratified_kfold
from imbr.linear import ClassifierSpec, TrainConfig
from imbr.resample import DISPLAY_NAMES, Auto, Explicit, ResampleConfig, canonical_algorithm, resample_with_provenance
from imbr.synth import BlobSpec, make_blobs, table1_blobs
from imbr.text import (
    NormalizeConfig,
    average_embedding,
    bow_vectorize,
    build_vocabulary,
    class_distribution,
    dedupe,
    default_stopwords,
    parse_embeddings,
    read_stopwords,
)

BLOCK_NAMES = {"softmax": "Logistic Regression", "nb": "Naive-Bayes"}


# ---- option groups ---------------------------------------------------------


def _add_normalize(p):
    g = p.add_argument_group("normalization")
    g.add_argument("--stopwords", metavar="FILE", help="stopword list (default: $IMBR_STOPWORDS or bundled Spanish list)")
    g.add_argument("--no-stopwords", action="store_true", help="disable stopword removal")
    g.add_argument("--no-lowercase", action="store_true", help="keep letter case")
    g.add_argument("--keep-punctuation", action="store_true", help="keep punctuation and symbols")
    g.add_argument("--keep-control", action="store_true", help="keep control characters such as tab and newline")
    g.add_argument("--drop-digits", action="store_true", help="delete decimal digits")


def _add_resample(p, multi=False):
    g = p.add_argument_group("oversampling")
    if multi:
        g.add_argument(
            "--resample",
            default="none",
            help="comma-separated settings among none, smote, gsmote, adasyn (default: none)",
        )
    else:
        g.add_argument("--algorithm", default="smote", help="smote, gsmote or adasyn (default: smote)")
        g.add_argument(
            "--target",
            action="append",
            metavar="CLASS=N",
            help="explicit synthetic count for a class id; repeatable. Without it every class is raised to the majority count",
        )
    g.add_argument("-k", "--k", type=int, default=5, help="neighbors per instance (default: 5)")
    g.add_argument("--truncation", type=float, default=1.0, help="Geometric-SMOTE truncation factor in [-1, 1] (default: 1)")
    g.add_argument("--deformation", type=float, default=0.0, help="Geometric-SMOTE deformation factor in [0, 1] (default: 0)")
    g.add_argument(
        "--selection",
        default="combined",
        choices=["minority", "majority", "combined"],
        help="Geometric-SMOTE surface point selection (default: combined)",
    )
    g.add_argument("--beta", type=float, default=1.0, help="ADASYN balance level in (0, 1] (default: 1)")
    g.add_argument(
        "--center-selection",
        default="round_robin",
        choices=["round_robin", "random"],
        help="how sample centers are picked within a class (default: round_robin)",
    )


def _add_classifier(p):
    g = p.add_argument_group("classifier")
    g.add_argument("--classifier", default="softmax", choices=["softmax", "nb"], help="(default: softmax)")
    g.add_argument("--epochs", type=int, default=10, help="softmax training epochs (default: 10)")
    g.add_argument("--batch-size", type=int, default=32, help="softmax mini-batch size (default: 32)")
    g.add_argument("--lr", type=float, default=0.05, help="softmax learning rate (default: 0.05)")
    g.add_argument(
        "--class-weights",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="weight the cross-entropy by inverse class frequency (default: on)",
    )
    g.add_argument("--alpha", type=float, default=1.0, help="naive Bayes smoothing (default: 1)")


def _seed(p):
    p.add_argument("--seed", type=int, default=0, help="seed fanned out to every randomized stage (default: 0)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="imbr",
        description="Oversampling, linear baselines and cross-validation for imbalanced text classification.",
    )
    parser.add_argument("--config", metavar="FILE", help="JSON file with option defaults")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("prep", help="normalize and deduplicate a JSONL corpus")
    p.add_argument("corpus", help="input JSON Lines corpus")
    p.add_argument("-o", "--output", required=True, help="deduplicated corpus (JSONL)")
    p.add_argument("--stats", required=True, help="class distribution (JSON)")
    p.add_argument("--table", help="also write the distribution as a text table")
    p.add_argument("--figure", help="also write a class distribution bar chart (PNG)")
    _add_normalize(p)

    p = sub.add_parser("vectorize", help="bag-of-words or averaged-embedding feature matrix")
    p.add_argument("corpus", help="input JSON Lines corpus")
    p.add_argument("-o", "--output", required=True, help="feature matrix (CSV)")
    p.add_argument("--mode", choices=["bow", "embed"], default="bow", help="(default: bow)")
    p.add_argument("--embeddings", help="word vectors in text format (embed mode)")
    p.add_argument("--min-frequency", type=int, default=1, help="bag-of-words token threshold (default: 1)")
    p.add_argument("--vocab", help="vocabulary output (JSON, bow mode; default: next to the matrix)")
    _add_normalize(p)

    p = sub.add_parser("resample", help="oversample a feature matrix")
    p.add_argument("matrix", help="input feature matrix (CSV)")
    p.add_argument("-o", "--output", required=True, help="resampled matrix (CSV)")
    p.add_argument("--provenance", help="per-synthetic-row provenance (JSONL)")
    _add_resample(p)
    _seed(p)

    p = sub.add_parser("train", help="fit a classifier on a feature matrix")
    p.add_argument("matrix", help="training matrix (CSV)")
    p.add_argument("-o", "--output", required=True, help="model (JSON)")
    _add_classifier(p)
    _seed(p)

    p = sub.add_parser("cv", help="stratified K-fold cross-validation")
    p.add_argument("matrix", help="feature matrix (CSV)")
    p.add_argument("--report", required=True, help="report output (JSON)")
    p.add_argument("--table", required=True, help="results table output (text)")
    p.add_argument("--folds", "-K", type=int, default=5, help="number of folds (default: 5)")
    _add_classifier(p)
    _add_resample(p, multi=True)
    _seed(p)

    p = sub.add_parser("synth", help="generate an imbalanced Gaussian-blob matrix")
    p.add_argument("spec", nargs="?", help="blob spec (JSON)")
    p.add_argument("-o", "--output", required=True, help="feature matrix (CSV)")
    p.add_argument("--table1-total", type=int, help="use the job-category profile scaled to this many rows instead of a spec file")
    p.add_argument("--dim", type=int, default=20, help="dimension for --table1-total (default: 20)")
    p.add_argument("--separation", type=float, default=0.5, help="center spread for --table1-total (default: 0.5)")
    p.add_argument("--std", type=float, default=1.0, help="per-class std for --table1-total (default: 1)")
    p.add_argument("--spec-out", help="write the effective spec (JSON)")
    _seed(p)

    p = sub.add_parser("report", help="render tables and figures from cv reports")
    p.add_argument("reports", nargs="+", help="one or more report JSON files")
    p.add_argument("--out-dir", required=True, help="directory for table.txt, table.csv and PNG figures")
    p.add_argument("--labels", help="JSON list of class names for figure axes")
    return parser


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            cfg = json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return cfg


def parse_args(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = _load_config(known.config)
        subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        for name, sp in subparsers.choices.items():
            dests = {a.dest for a in sp._actions}
            shared = {k.replace("-", "_"): v for k, v in cfg.items() if not isinstance(v, dict)}
            own = {k.replace("-", "_"): v for k, v in cfg.get(name, {}).items()}
            defaults = {k: v for k, v in {**shared, **own}.items() if k in dests}
            sp.set_defaults(**defaults)
    return parser.parse_args(argv)


# ---- builders --------------------------------------------------------------


def _normalize_config(args):
    if args.no_stopwords:
        stopwords = frozenset()
    elif args.stopwords:
        with open(args.stopwords, encoding="utf-8") as f:
            stopwords = read_stopwords(f)
    else:
        stopwords = default_stopwords()
    return NormalizeConfig(
        lowercase=not args.no_lowercase,
        strip_punctuation=not args.keep_punctuation,
        strip_control_chars=not args.keep_control,
        drop_digits=args.drop_digits,
        stopwords=stopwords,
    )


def _parse_targets(items):
    counts = {}
    for item in items:
        cls, sep, n = item.partition("=")
        if not sep:
            raise ConfigError(f"--target expects CLASS=N, got {item!r}")
        try:
            counts[int(cls)] = int(n)
        except ValueError:
            raise ConfigError(f"--target expects integers, got {item!r}") from None
    return Explicit(counts)


def _resample_config(args, algorithm):
    targets = getattr(args, "target", None)
    return ResampleConfig(
        algorithm=algorithm,
        k=args.k,
        strategy=_parse_targets(targets) if targets else Auto(),
        seed=args.seed,
        gsmote_truncation=args.truncation,
        gsmote_deformation=args.deformation,
        gsmote_selection=args.selection,
        adasyn_beta=args.beta,
        center_selection=args.center_selection,
    )


def _classifier_spec(args):
    train = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        use_class_weights=args.class_weights,
    )
    return ClassifierSpec(args.classifier, train, args.alpha)


# ---- commands --------------------------------------------------------------


def cmd_prep(args):
    config = _normalize_config(args)
    corpus = fileio.read_corpus(args.corpus)
    deduped, removed = dedupe(corpus, config)
    dist = class_distribution(deduped)
    stats = {
        "documents_in": len(corpus),
        "documents_out": len(deduped),
        "removed": removed,
        "classes": [
            {"label": name, "class_id": deduped.label_index[name], "count": n, "percentage": pct}
            for name, (n, pct) in dist.items()
        ],
    }
    fileio.atomic_write(args.output, fileio.corpus_to_jsonl(deduped))
    fileio.atomic_write(args.stats, fileio.dump_json(stats))
    if args.table:
        fileio.atomic_write(args.table, report.render_distribution(dist))
    if args.figure:
        fileio.atomic_write(args.figure, plotting.class_distribution_bars(dist))
    print(f"removed {removed} duplicate documents; {len(deduped)} remain", file=sys.stderr)


def cmd_vectorize(args):
    config = _normalize_config(args)
    if args.mode == "embed" and not args.embeddings:
        raise ConfigError("embed mode needs --embeddings")
    corpus = fileio.read_corpus(args.corpus)
    if args.mode == "bow":
        vocab = build_vocabulary(corpus, config, args.min_frequency)
        matrix = bow_vectorize(corpus, vocab, config)
        vocab_path = args.vocab or str(Path(args.output).with_suffix("")) + ".vocab.json"
        doc = {"tokens": vocab.tokens, "min_frequency": vocab.min_frequency, "labels": corpus.label_names}
        fileio.atomic_write(vocab_path, fileio.dump_json(doc))
    else:
        with open(args.embeddings, "rb") as f:
            table = parse_embeddings(f)
        matrix = average_embedding(corpus, table, config)
    fileio.write_matrix(args.output, matrix)


def cmd_resample(args):
    config = _resample_config(args, args.algorithm)
    matrix = fileio.read_matrix(args.matrix)
    out, batches = resample_with_provenance(matrix, config)
    fileio.write_matrix(args.output, out)
    if args.provenance:
        fileio.atomic_write(args.provenance, fileio.provenance_to_jsonl(batches, matrix.n))
    print(f"generated {out.n - matrix.n} synthetic rows", file=sys.stderr)


def cmd_train(args):
    spec = _classifier_spec(args)
    matrix = fileio.read_matrix(args.matrix)
    model = spec(matrix, int(matrix.labels.max()) + 1)
    fileio.save_model(args.output, model)


def cmd_cv(args):
    spec = _classifier_spec(args)
    settings = []
    for name in (s.strip() for s in args.resample.split(",")):
        if name.lower() in ("none", "original", ""):
            settings.append(None)
        else:
            settings.append(_resample_config(args, canonical_algorithm(name)))
    matrix = fileio.read_matrix(args.matrix)
    n_classes = int(matrix.labels.max()) + 1
    if args.folds > matrix.n:
        raise UsageError(f"--folds {args.folds} exceeds the {matrix.n} rows")
    plan = stratified_kfold(matrix.labels, args.folds, args.seed)
    runs = []
    for cfg in settings:
        ev = cross_validate(matrix, cfg, spec, seed=args.seed, n_classes=n_classes, plan=plan)
        runs.append(
            {
                "block": BLOCK_NAMES[spec.kind],
                "setting": "Original dataset" if cfg is None else DISPLAY_NAMES[cfg.algorithm],
                "classifier": spec.to_dict(),
                "resampler": None if cfg is None else cfg.to_dict(),
                "report": ev,
            }
        )
    doc = fileio.report_document(runs, n_rows=matrix.n, n_classes=n_classes, n_folds=args.folds, seed=args.seed)
    fileio.atomic_write(args.report, fileio.dump_json(doc))
    fileio.atomic_write(args.table, report.render_text(report.rows_from_report(doc)))


def cmd_synth(args):
    if args.table1_total is not None:
        spec = table1_blobs(args.table1_total, args.dim, args.separation, args.std, args.seed)
    elif args.spec:
        try:
            with open(args.spec, encoding="utf-8") as f:
                raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{args.spec}: invalid JSON: {exc.msg}", exc.lineno) from None
        if not isinstance(raw, dict):
            raise ConfigError("blob spec must be a JSON object")
        spec = BlobSpec.from_dict(raw)
    else:
        raise ConfigError("give a spec file or --table1-total")
    fileio.write_matrix(args.output, make_blobs(spec))
    if args.spec_out:
        fileio.atomic_write(args.spec_out, fileio.dump_json(spec.to_dict()))


def cmd_report(args):
    rows, confusions = [], []
    for path in args.reports:
        doc = fileio.load_report(path)
        rows.extend(report.rows_from_report(doc))
        confusions.extend((f"{r['block']} / {r['setting']}", r["metrics"]["confusion"]) for r in doc["runs"])
    names = None
    if args.labels:
        with open(args.labels, encoding="utf-8") as f:
            names = json.load(f)
    out = Path(args.out_dir)
    fileio.atomic_write(out / "table.txt", report.render_text(rows))
    fileio.atomic_write(out / "table.csv", report.render_csv(rows))
    fileio.atomic_write(out / "metrics.png", plotting.metric_bars(rows))
    for i, (title, cm) in enumerate(confusions):
        fileio.atomic_write(out / f"confusion_{i}.png", plotting.confusion_heatmap(np.array(cm), title, names))


COMMANDS = {
    "prep": cmd_prep,
    "vectorize": cmd_vectorize,
    "resample": cmd_resample,
    "train": cmd_train,
    "cv": cmd_cv,
    "synth": cmd_synth,
    "report": cmd_report,
}


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"WARNING {message}", file=sys.stderr)


def _fail(kind, message, code):
    print(f"ERROR {kind} {message}", file=sys.stderr)
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except ImbrError as exc:
        return _fail(type(exc).__name__, exc, exc.exit_code)
    except SystemExit as exc:
        return exc.code
    with warnings.catch_warnings():
        warnings.showwarning = _show_warning
        warnings.simplefilter("always")
        try:
            COMMANDS[args.command](args)
        except ImbrError as exc:
            return _fail(type(exc).__name__, exc, exc.exit_code)
        except (OSError, ValueError) as exc:
            return _fail(type(exc).__name__, exc, 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
