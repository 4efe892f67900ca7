"""Command-line entry points: ingest, split, train, recommend, evaluate,
grid and tune.

Every file-producing run also writes a JSON manifest (resolved config,
seeds, input checksums, tool version) sufficient to reproduce it; ``grid``
can re-run straight from a manifest and yields a byte-identical CSV.
Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import tomli

from . import __version__
from . import features as feats
from . import metrics as met
from .corpus import (
    CorpusError,
    IssueSet,
    chronological_split,
    generate_training_pairs,
    issue_to_record,
    load_issues,
)
from .embeddings import EmbeddingTable, VectorFormatError, load_vectors
from .ranker import BaselineScorer, SiameseScorer, TimeFilter, recommend
from .siamese import SiameseConfig, SiameseModel, TrainingDiverged, train

SCORER_NAMES = (
    "tfidf-cosine",
    "tfidf-euclidean",
    "tfidf-manhattan",
    "tfidf-chebyshev",
    "siamese-cnn",
)

FILTER_NAMES = ("none", "1m", "2m", "3m")


class UsageError(ValueError):
    """Bad flags or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path, payload) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(path, command: str, config: dict, inputs: list,
                    extra: dict | None = None) -> None:
    manifest = {
        "manifest_version": 1,
        "tool_version": __version__,
        "command": command,
        "config": config,
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in inputs],
    }
    if extra:
        manifest.update(extra)
    _write_json(path, manifest)


def _load_corpus(path) -> IssueSet:
    if not Path(path).exists():
        raise UsageError(f"data file not found: {path}")
    return load_issues(path)


def _parse_k_list(text: str) -> list[int]:
    try:
        ks = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError as exc:
        raise UsageError(f"bad K list {text!r}") from exc
    if not ks or ks[0] < 1:
        raise UsageError("K values must be >= 1")
    return ks


def _parse_features_arg(text: str):
    try:
        return feats.validate_features(feats.parse_features(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _dataset_label(args) -> str:
    return args.dataset_name or Path(args.data).stem


def _check_model_features(requested: str | None, model: SiameseModel) -> None:
    if requested is None:
        return
    asked = feats.format_features(_parse_features_arg(requested))
    if asked != model.config.features:
        raise UsageError(
            f"--features {asked} conflicts with the checkpoint's "
            f"feature set {model.config.features}"
        )


def _load_embedding(args) -> EmbeddingTable:
    if not args.embeddings:
        raise UsageError("--embeddings is required for the siamese scorer")
    if not Path(args.embeddings).exists():
        raise UsageError(f"embeddings file not found: {args.embeddings}")
    return load_vectors(args.embeddings, args.dim, stem_vocab=args.stem_vocab)


def _siamese_config(args, feature_set) -> SiameseConfig:
    return SiameseConfig(
        features=feats.format_features(feature_set),
        filters=args.conv_filters,
        kernel_size=args.kernel_size,
        stride=args.stride,
        dense_units=args.dense_units,
        activation=args.activation,
        max_len=args.max_len,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )


def _train_siamese(args, feature_set, train_set, embedding) -> SiameseModel:
    config = _siamese_config(args, feature_set)
    pairs = generate_training_pairs(
        train_set,
        neg_ratio=args.neg_ratio,
        seed=args.seed,
        lonely_negatives=args.lonely_negatives,
    )
    model = SiameseModel(embedding, config)
    trained, _ = train(model, pairs, train_set)
    return trained


def _build_scorer(name, args, feature_set, train_set, embedding, model=None):
    if name.startswith("tfidf-"):
        metric = name.split("-", 1)[1]
        return BaselineScorer.fit(
            train_set, feature_set, metric, split_fields=args.split_fields
        )
    if name == "siamese-cnn":
        if model is not None:
            return SiameseScorer(model)
        return SiameseScorer(_train_siamese(args, feature_set, train_set, embedding))
    raise UsageError(f"unknown scorer {name!r}; expected one of {SCORER_NAMES}")


# ---------------------------------------------------------------- ingest


def cmd_ingest(args) -> int:
    corpus = _load_corpus(args.data)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for issue in corpus:
            fh.write(json.dumps(issue_to_record(issue), sort_keys=True))
            fh.write("\n")
    stats = {
        "issues": len(corpus),
        "links": corpus.link_count(),
        "first_created": corpus.day_zero.isoformat() if len(corpus) else None,
        "last_created": corpus[-1].created.isoformat() if len(corpus) else None,
    }
    _write_manifest(
        str(args.out) + ".manifest.json",
        "ingest",
        {"data": str(args.data), "out": str(args.out)},
        [args.data],
    )
    print(json.dumps(stats, sort_keys=True))
    return 0


# ----------------------------------------------------------------- split


def cmd_split(args) -> int:
    corpus = _load_corpus(args.data)
    train_set, test_set = chronological_split(corpus, args.split_day)
    for path, subset in ((args.out_train, train_set), (args.out_test, test_set)):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for issue in subset:
                fh.write(json.dumps(issue_to_record(issue), sort_keys=True))
                fh.write("\n")
    _write_manifest(
        str(args.out_train) + ".manifest.json",
        "split",
        {
            "data": str(args.data),
            "split_day": args.split_day,
            "out_train": str(args.out_train),
            "out_test": str(args.out_test),
        },
        [args.data],
    )
    print(json.dumps({"train": len(train_set), "test": len(test_set)}))
    return 0


# ----------------------------------------------------------------- train


def cmd_train(args) -> int:
    corpus = _load_corpus(args.data)
    if args.split_day is not None:
        train_set, _ = chronological_split(corpus, args.split_day)
    else:
        train_set = corpus
    feature_set = _parse_features_arg(args.features)
    embedding = _load_embedding(args)
    model = _train_siamese(args, feature_set, train_set, embedding)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    model.save(args.out)
    _write_manifest(
        str(args.out) + ".manifest.json",
        "train",
        _train_config_dict(args),
        [args.data, args.embeddings],
    )
    print(json.dumps({"model": str(args.out), "pairs_seed": args.seed}))
    return 0


def _train_config_dict(args) -> dict:
    return {
        "data": str(args.data),
        "split_day": args.split_day,
        "features": feats.format_features(_parse_features_arg(args.features)),
        "embeddings": str(args.embeddings),
        "dim": args.dim,
        "stem_vocab": args.stem_vocab,
        "conv_filters": args.conv_filters,
        "kernel_size": args.kernel_size,
        "stride": args.stride,
        "dense_units": args.dense_units,
        "activation": args.activation,
        "max_len": args.max_len,
        "lr": args.lr,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "neg_ratio": args.neg_ratio,
        "lonely_negatives": args.lonely_negatives,
        "seed": args.seed,
    }


# ------------------------------------------------------------- recommend


def cmd_recommend(args) -> int:
    corpus = _load_corpus(args.data)
    if args.query not in corpus:
        raise UsageError(f"query key not in corpus: {args.query!r}")
    query = corpus.by_key(args.query)
    time_filter = TimeFilter.parse(args.filter)

    if args.scorer == "siamese-cnn":
        if not args.model:
            raise UsageError("--model is required for the siamese scorer")
        embedding = _load_embedding(args)
        model = SiameseModel.load(args.model, embedding)
        _check_model_features(args.features, model)
        scorer = SiameseScorer(model)
    else:
        feature_set = _parse_features_arg(args.features or "TDS")
        history = IssueSet(
            [iss for iss in corpus if iss.created < query.created], _presorted=True
        )
        if not len(history):
            raise UsageError("no issues precede the query; nothing to recommend")
        scorer = _build_scorer(args.scorer, args, feature_set, history, None)

    recs = recommend(query, corpus, scorer, time_filter, args.k)
    payload = [{"key": r.key, "score": r.score, "rank": r.rank} for r in recs]
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
        inputs = [args.data] + ([args.model] if args.model else [])
        _write_manifest(
            str(args.out) + ".manifest.json",
            "recommend",
            {
                "data": str(args.data),
                "query": args.query,
                "scorer": args.scorer,
                "features": args.features,
                "filter": args.filter,
                "k": args.k,
                "model": str(args.model) if args.model else None,
                "seed": args.seed,
            },
            inputs,
        )
    else:
        print(text)
    return 0


# -------------------------------------------------------------- evaluate


def cmd_evaluate(args) -> int:
    corpus = _load_corpus(args.data)
    train_set, test_set = chronological_split(corpus, args.split_day)
    ks = _parse_k_list(args.k_list)
    time_filter = TimeFilter.parse(args.filter)

    model = None
    embedding = None
    if args.scorer == "siamese-cnn" and args.model:
        embedding = _load_embedding(args)
        model = SiameseModel.load(args.model, embedding)
        _check_model_features(args.features, model)
        feature_set = feats.parse_features(model.config.features)
    else:
        feature_set = _parse_features_arg(args.features or "TDS")
        if args.scorer == "siamese-cnn":
            embedding = _load_embedding(args)
    scorer = _build_scorer(args.scorer, args, feature_set, train_set, embedding, model)

    config = met.EvalConfig(
        dataset=_dataset_label(args),
        features=feats.format_features(feature_set),
        scorer=scorer.name,
        filter=time_filter.name,
    )
    report = met.evaluate(corpus, test_set, scorer, time_filter, ks, config)
    payload = report.to_json()
    if args.out:
        _write_json(args.out, payload)
        _write_manifest(
            str(args.out) + ".manifest.json",
            "evaluate",
            {
                "data": str(args.data),
                "split_day": args.split_day,
                "scorer": args.scorer,
                "features": config.features,
                "filter": args.filter,
                "k_list": ks,
                "seed": args.seed,
                "model": str(args.model) if args.model else None,
            },
            [args.data],
        )
    if args.csv:
        _write_csv(args.csv, report.csv_rows())
    print(json.dumps(payload, sort_keys=True))
    return 0


def _format_row(row: dict) -> dict:
    out = dict(row)
    for col in ("accuracy", "mrr", "recall"):
        out[col] = format(row[col], ".6f")
    return out


def _write_csv(path, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=list(met.CSV_COLUMNS), lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(_format_row(row))


# ------------------------------------------------------------------ grid


def _grid_config_dict(args) -> dict:
    return {
        "data": str(args.data),
        "dataset_name": _dataset_label(args),
        "split_day": args.split_day,
        "features": args.features,
        "scorers": args.scorers,
        "filters": args.filters,
        "k_list": args.k_list,
        "seed": args.seed,
        "neg_ratio": args.neg_ratio,
        "lonely_negatives": args.lonely_negatives,
        "split_fields": args.split_fields,
        "embeddings": str(args.embeddings) if args.embeddings else None,
        "dim": args.dim,
        "stem_vocab": args.stem_vocab,
        "conv_filters": args.conv_filters,
        "kernel_size": args.kernel_size,
        "stride": args.stride,
        "dense_units": args.dense_units,
        "activation": args.activation,
        "max_len": args.max_len,
        "lr": args.lr,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
    }


def _apply_manifest(args) -> None:
    with open(args.from_manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("command") != "grid":
        raise UsageError("manifest does not describe a grid run")
    config = manifest["config"]
    for key, value in config.items():
        if key == "dataset_name":
            args.dataset_name = value
        elif hasattr(args, key):
            setattr(args, key, value)


def cmd_grid(args) -> int:
    if args.from_manifest:
        _apply_manifest(args)
    if not args.data:
        raise UsageError("--data is required")
    corpus = _load_corpus(args.data)
    if args.split_day is None:
        raise UsageError("--split-day is required")
    train_set, test_set = chronological_split(corpus, args.split_day)
    ks = _parse_k_list(args.k_list)
    dataset = _dataset_label(args)

    if args.features.strip().lower() == "all":
        combos = met.enumerate_feature_combos()
    else:
        combos = [
            _parse_features_arg(tok)
            for tok in args.features.split(",")
            if tok.strip()
        ]
    scorers = [s.strip() for s in args.scorers.split(",") if s.strip()]
    for name in scorers:
        if name not in SCORER_NAMES:
            raise UsageError(f"unknown scorer {name!r}; expected one of {SCORER_NAMES}")
    filters = [f.strip() for f in args.filters.split(",") if f.strip()]
    time_filters = [TimeFilter.parse(f) for f in filters]

    embedding = None
    if "siamese-cnn" in scorers:
        embedding = _load_embedding(args)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[dict] = []
    failures: list[dict] = []
    for feature_set in combos:
        fstr = feats.format_features(feature_set)
        for scorer_name in scorers:
            try:
                scorer = _build_scorer(
                    scorer_name, args, feature_set, train_set, embedding
                )
            except (ValueError, TrainingDiverged) as exc:
                for tf in time_filters:
                    failures.append(
                        {
                            "features": fstr,
                            "scorer": scorer_name,
                            "filter": tf.name,
                            "error": str(exc),
                        }
                    )
                continue
            for tf in time_filters:
                config = met.EvalConfig(dataset, fstr, scorer.name, tf.name)
                try:
                    report = met.evaluate(corpus, test_set, scorer, tf, ks, config)
                except ValueError as exc:
                    failures.append(
                        {
                            "features": fstr,
                            "scorer": scorer_name,
                            "filter": tf.name,
                            "error": str(exc),
                        }
                    )
                    continue
                rows.extend(report.csv_rows())

    csv_path = out_dir / "grid.csv"
    _write_csv(csv_path, rows)
    manifest_path = out_dir / "manifest.json"
    extra = {"failures": failures} if failures else None
    _write_manifest(manifest_path, "grid", _grid_config_dict(args), [args.data], extra)
    print(
        json.dumps(
            {
                "csv": str(csv_path),
                "manifest": str(manifest_path),
                "rows": len(rows),
                "failures": len(failures),
            }
        )
    )
    return 2 if failures else 0


# ------------------------------------------------------------------ tune


def cmd_tune(args) -> int:
    corpus = _load_corpus(args.data)
    if args.split_day is not None:
        train_set, _ = chronological_split(corpus, args.split_day)
    else:
        train_set = corpus
    if len(train_set) < 4:
        raise UsageError("training split too small to hold out validation data")
    feature_set = _parse_features_arg(args.features)
    embedding = _load_embedding(args)
    time_filter = TimeFilter.parse(args.filter)

    val_count = max(1, int(round(args.val_fraction * len(train_set))))
    fit_issues = train_set.issues[: len(train_set) - val_count]
    val_issues = train_set.issues[len(train_set) - val_count :]
    fit_set = IssueSet(fit_issues, _presorted=True)
    val_set = IssueSet(val_issues, _presorted=True)
    pairs = generate_training_pairs(
        fit_set,
        neg_ratio=args.neg_ratio,
        seed=args.seed,
        lonely_negatives=args.lonely_negatives,
    )

    activations = [a.strip() for a in args.activations.split(",") if a.strip()]
    trace: list[dict] = []
    first = True
    for activation in activations:
        units = args.start_units
        prev = None
        for _ in range(args.max_steps):
            config = SiameseConfig(
                features=feats.format_features(feature_set),
                filters=units,
                kernel_size=args.kernel_size,
                stride=args.stride,
                dense_units=units,
                activation=activation,
                max_len=args.max_len,
                learning_rate=args.lr,
                epochs=args.epochs,
                batch_size=args.batch_size,
                seed=args.seed,
            )
            try:
                model, losses = train(SiameseModel(embedding, config), pairs, fit_set)
            except TrainingDiverged as exc:
                if first:
                    raise UsageError(
                        f"first tuning configuration diverged: {exc}"
                    ) from exc
                trace.append(
                    {
                        "activation": activation,
                        "units": units,
                        "metric": None,
                        "final_loss": None,
                        "error": str(exc),
                    }
                )
                break
            first = False
            scorer = SiameseScorer(model)
            results, _, _ = met.collect_query_results(
                train_set, val_set, scorer, time_filter, args.metric_k
            )
            if not results:
                raise UsageError("no evaluable validation queries; enlarge the split")
            metric = met.accuracy_at_k(results, args.metric_k)
            trace.append(
                {
                    "activation": activation,
                    "units": units,
                    "metric": metric,
                    "final_loss": losses[-1] if losses else None,
                }
            )
            if prev is not None and metric <= prev:
                break
            prev = metric
            units += args.unit_step

    scored = [t for t in trace if t.get("metric") is not None]
    if not scored:
        raise UsageError("every tuning configuration diverged")
    best = max(scored, key=lambda t: t["metric"])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "best": {"activation": best["activation"], "units": best["units"],
                 "metric": best["metric"]},
        "trace": trace,
        "metric": f"accuracy@{args.metric_k}",
    }
    _write_json(out_dir / "tune.json", payload)
    _write_manifest(
        out_dir / "manifest.json",
        "tune",
        {
            "data": str(args.data),
            "split_day": args.split_day,
            "features": feats.format_features(feature_set),
            "embeddings": str(args.embeddings),
            "dim": args.dim,
            "activations": args.activations,
            "start_units": args.start_units,
            "unit_step": args.unit_step,
            "max_steps": args.max_steps,
            "val_fraction": args.val_fraction,
            "metric_k": args.metric_k,
            "filter": args.filter,
            "seed": args.seed,
            "epochs": args.epochs,
            "lr": args.lr,
            "batch_size": args.batch_size,
            "neg_ratio": args.neg_ratio,
        },
        [args.data, args.embeddings],
    )
    print(json.dumps(payload["best"], sort_keys=True))
    return 0


# ---------------------------------------------------------------- parser


def _add_common(parser) -> None:
    parser.add_argument("--config", help="TOML file with default option values")
    parser.add_argument("--seed", type=int, default=0)


def _add_siamese_options(parser) -> None:
    parser.add_argument("--embeddings", help="pretrained word-vector text file")
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--stem-vocab", dest="stem_vocab", action="store_true",
                        default=True)
    parser.add_argument("--no-stem-vocab", dest="stem_vocab", action="store_false")
    parser.add_argument("--conv-filters", type=int, default=256)
    parser.add_argument("--kernel-size", type=int, default=3)
    parser.add_argument("--stride", type=int, default=1)
    parser.add_argument("--dense-units", type=int, default=256)
    parser.add_argument("--activation", default="relu",
                        choices=("relu", "leaky_relu", "sigmoid"))
    parser.add_argument("--max-len", type=int, default=128)
    parser.add_argument("--lr", type=float, default=0.001)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--neg-ratio", type=float, default=1.0)
    parser.add_argument("--lonely-negatives", action="store_true",
                        help="sample negatives only from pairs with a link-free side")


def build_parser() -> tuple[_Parser, dict]:
    parser = _Parser(prog="linkrec", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser("ingest", help="validate and normalize an issue export")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)
    subparsers["ingest"] = p

    p = sub.add_parser("split", help="chronological train/test split")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--split-day", type=int, required=True)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.set_defaults(func=cmd_split)
    subparsers["split"] = p

    p = sub.add_parser("train", help="train a siamese matcher")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--split-day", type=int)
    p.add_argument("--features", default="TDS")
    _add_siamese_options(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)
    subparsers["train"] = p

    p = sub.add_parser("recommend", help="rank candidates for one issue")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--scorer", default="tfidf-cosine")
    p.add_argument("--features", default=None,
                   help="feature set, e.g. TDS (default TDS; a siamese "
                        "checkpoint supplies its own)")
    p.add_argument("--filter", default="none", choices=FILTER_NAMES)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--model", help="siamese checkpoint (.npz)")
    p.add_argument("--split-fields", action="store_true",
                   help="vectorize T/D/S as separate blocks")
    _add_siamese_options(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recommend)
    subparsers["recommend"] = p

    p = sub.add_parser("evaluate", help="evaluate one configuration")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--dataset-name")
    p.add_argument("--split-day", type=int, required=True)
    p.add_argument("--scorer", default="tfidf-cosine")
    p.add_argument("--features", default=None)
    p.add_argument("--filter", default="none", choices=FILTER_NAMES)
    p.add_argument("--k-list", default="1,2,3,5")
    p.add_argument("--model", help="siamese checkpoint (.npz)")
    p.add_argument("--split-fields", action="store_true")
    _add_siamese_options(p)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_evaluate)
    subparsers["evaluate"] = p

    p = sub.add_parser("grid", help="run an experiment grid")
    _add_common(p)
    p.add_argument("--data")
    p.add_argument("--dataset-name")
    p.add_argument("--split-day", type=int)
    p.add_argument("--features", default="all",
                   help='"all" for the 28 combinations, or a comma list')
    p.add_argument("--scorers", default="tfidf-cosine,tfidf-euclidean,"
                                        "tfidf-manhattan,tfidf-chebyshev")
    p.add_argument("--filters", default="none,1m,2m,3m")
    p.add_argument("--k-list", default="1,2,3,5")
    p.add_argument("--split-fields", action="store_true")
    _add_siamese_options(p)
    p.add_argument("--out", required=True)
    p.add_argument("--from-manifest", help="re-run a recorded grid")
    p.set_defaults(func=cmd_grid)
    subparsers["grid"] = p

    p = sub.add_parser("tune", help="sweep unit counts and activations")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--split-day", type=int)
    p.add_argument("--features", default="TDS")
    _add_siamese_options(p)
    p.add_argument("--activations", default="relu,leaky_relu,sigmoid")
    p.add_argument("--start-units", type=int, default=50)
    p.add_argument("--unit-step", type=int, default=50)
    p.add_argument("--max-steps", type=int, default=8)
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--metric-k", type=int, default=1)
    p.add_argument("--filter", default="none", choices=FILTER_NAMES)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tune)
    subparsers["tune"] = p

    return parser, subparsers


def _apply_config_file(argv, subparsers) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    path = Path(known.config)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            data = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise UsageError(f"bad config file: {exc}") from exc
    command = next((a for a in argv if a in subparsers), None)
    if command is None:
        return
    merged = {
        k: v for k, v in data.items() if not isinstance(v, dict)
    }
    merged.update(data.get(command, {}))
    valid = {a.dest for a in subparsers[command]._actions}
    unknown = set(merged) - valid
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    subparsers[command].set_defaults(**merged)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        _apply_config_file(argv, subparsers)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, VectorFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
