"""Command line interface.

Subcommands: score, correlate, williams, accuracy, distract, combine,
filter-vocab. Exit codes: 0 success, 1 configuration/usage error, 2 data
error. Reports are written as CSV plus a JSON twin.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import embeddings as emb
from .errors import ConfigurationError, DataFormatError
from .harness import datasets, protocols, reports, scoring
from .meteor import load_lexicon
from .metastats import ScoreVector, combine, williams_test
from .textprep import load_stopwords, tokenize


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_resource_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("resources")
    group.add_argument("--stopwords", type=Path, help="stopword file (default: packaged list)")
    group.add_argument("--embeddings", type=Path, help="embedding table for wmd")
    group.add_argument(
        "--embedding-format", choices=("text", "binary"), default="binary",
        help="embedding file layout (default: binary)",
    )
    group.add_argument(
        "--normalize-embeddings", action="store_true",
        help="length-normalize vectors on load (default: off)",
    )
    group.add_argument("--lexicon", type=Path, help="synonym lexicon file for meteor")
    group.add_argument("--idf", type=Path, help="idf table file for cider (default: derive from data)")
    group.add_argument(
        "--external", action="append", default=[], metavar="NAME=CSV",
        help="join external scores as metric external:<NAME> (repeatable)",
    )
    group.add_argument("--bleu-order", type=int, default=4)
    group.add_argument("--rouge-beta", type=float, default=1.2)
    group.add_argument("--meteor-alpha", type=float, default=0.9)
    group.add_argument("--meteor-beta", type=float, default=3.0)
    group.add_argument("--meteor-gamma", type=float, default=0.5)
    group.add_argument("--wmd-scale", type=float, default=1.0)
    group.add_argument("--wmd-aggregate", choices=("max", "mean"), default="max")


def _resources_from_args(args) -> scoring.ScoringResources:
    external = {}
    for spec in args.external:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise ConfigurationError(f"--external expects NAME=CSV, got {spec!r}")
        external[name] = datasets.load_external_scores(path)
    resources = scoring.ScoringResources(
        stopwords=load_stopwords(args.stopwords) if args.stopwords else None,
        lexicon=load_lexicon(args.lexicon) if args.lexicon else None,
        external=external,
        bleu_max_order=args.bleu_order,
        rouge_beta=args.rouge_beta,
        meteor_alpha=args.meteor_alpha,
        meteor_beta=args.meteor_beta,
        meteor_gamma=args.meteor_gamma,
        wmd_scale=args.wmd_scale,
        wmd_aggregate=args.wmd_aggregate,
    )
    if args.embeddings:
        if not args.embeddings.exists():
            raise ConfigurationError(f"embedding file not found: {args.embeddings}")
        resources.embeddings = emb.load_embeddings(
            args.embeddings, args.embedding_format, args.normalize_embeddings
        )
        resources.embedding_hash = emb.file_sha256(args.embeddings)
    if args.idf:
        from .ngram_metrics import IdfTable

        resources.idf = IdfTable.load(args.idf)
    return resources


def _metric_list(raw: str) -> list[str]:
    metrics = [m.strip() for m in raw.split(",") if m.strip()]
    if not metrics:
        raise ConfigurationError("no metrics given")
    return metrics


def _json_twin(out: Path) -> Path:
    return out.with_suffix(".json") if out.suffix else out.parent / (out.name + ".json")


def _cmd_score(args) -> None:
    resources = _resources_from_args(args)
    instances = datasets.load_judged_dataset(args.data)
    table = scoring.score_dataset(instances, _metric_list(args.metrics), resources)
    reports.write_score_table_csv(table, args.out)
    reports.write_score_table_json(table, args.json or _json_twin(args.out))


def _cmd_correlate(args) -> None:
    resources = _resources_from_args(args)
    instances = datasets.load_judged_dataset(args.data)
    judgment_names = [j.strip() for j in args.judgment.split(",") if j.strip()]
    if not judgment_names:
        raise ConfigurationError("--judgment names are empty")
    if args.scores:
        table = reports.read_score_table_csv(args.scores)
        table.judgments = {
            inst.instance_id: dict(inst.judgments) for inst in instances if inst.judgments
        }
        missing = [iid for iid in table.instance_ids if iid not in table.judgments]
        if missing:
            raise DataFormatError(f"no judgments for scored instance {missing[0]!r}")
    elif args.metrics:
        table = scoring.score_dataset(instances, _metric_list(args.metrics), resources)
    else:
        raise ConfigurationError("correlate needs --scores or --metrics")

    prefix = Path(args.out)
    payload: dict = {"blocks": {}}
    block_reports = []
    for name in judgment_names:
        report = protocols.correlation_report(table, name, args.williams_corr)
        block_reports.append(report)
        reports.write_correlations_csv(report, f"{prefix}.correlations.{name}.csv")
        reports.write_pairwise_spearman_csv(report, f"{prefix}.pairwise_spearman.{name}.csv")
        reports.write_williams_p_csv(report, f"{prefix}.williams_p.{name}.csv")
        reports.write_williams_win_csv(report, f"{prefix}.williams_win.{name}.csv")
        payload["blocks"][name] = reports.correlation_report_payload(report)
    if len(block_reports) > 1:
        averaged = protocols.mean_correlations(block_reports)
        with open(f"{prefix}.correlations.mean.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("metric,pearson,spearman,kendall\n")
            order = [m for m in block_reports[0].metrics if m in averaged]
            for metric in order:
                r = averaged[metric]
                fh.write(
                    f"{metric},{reports.fmt(r.pearson)},{reports.fmt(r.spearman)},{reports.fmt(r.kendall)}\n"
                )
        payload["blocks"]["mean"] = {
            m: {"pearson": r.pearson, "spearman": r.spearman, "kendall": r.kendall}
            for m, r in averaged.items()
        }
    with open(f"{prefix}.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_williams(args) -> None:
    result = williams_test(args.r13, args.r23, args.r12, args.n)
    payload = dataclasses.asdict(result)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _protocol_scorer(args, resources, reference_sets):
    idf = resources.idf
    if args.metric == "cider" and idf is None:
        from .ngram_metrics import build_idf

        idf = build_idf([[tokenize(r) for r in refs] for refs in reference_sets])
    return scoring.make_caption_scorer(args.metric, resources, idf)


def _write_accuracy_outputs(report, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(reports.render_accuracy_csv(report))
    else:
        reports.write_accuracy_csv(report, out)
        reports.write_accuracy_json(report, _json_twin(out))


def _cmd_accuracy(args) -> None:
    resources = _resources_from_args(args)
    triplets = datasets.load_triplet_dataset(args.data)
    score_fn = _protocol_scorer(args, resources, [t.references for t in triplets])
    report = protocols.forced_choice_accuracy(score_fn, triplets)
    _write_accuracy_outputs(report, args.out)


def _cmd_distract(args) -> None:
    resources = _resources_from_args(args)
    instances = datasets.load_distraction_dataset(args.data)
    score_fn = _protocol_scorer(args, resources, [inst.correct for inst in instances])
    report = protocols.distraction_accuracy(score_fn, instances)
    _write_accuracy_outputs(report, args.out)


def _cmd_combine(args) -> None:
    table = reports.read_score_table_csv(args.scores)
    metrics = _metric_list(args.metrics)
    for metric in metrics:
        if metric not in table.metrics:
            raise ConfigurationError(f"scores file has no column {metric!r}")
    weights = None
    if args.weights:
        weights = [float(w) for w in args.weights.split(",")]
        if len(weights) != len(metrics):
            raise ConfigurationError(
                f"{len(weights)} weights for {len(metrics)} metrics"
            )
    combined = combine([table.column(m) for m in metrics], weights)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("instance_id,combined\n")
        for iid, value in zip(combined.instance_ids, combined.values):
            fh.write(f"{iid},{reports.fmt(float(value))}\n")
    payload = {
        "metrics": metrics,
        "weights": weights,
        "scores": {iid: float(v) for iid, v in zip(combined.instance_ids, combined.values)},
    }
    with open(_json_twin(Path(args.out)), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dataset_vocabulary(paths) -> set[str]:
    vocab: set[str] = set()

    def add(caption: str) -> None:
        vocab.update(tokenize(caption))

    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                for key in ("candidate", "candidate_a", "candidate_b"):
                    if key in record:
                        add(record[key])
                for key in ("references", "correct"):
                    for caption in record.get(key, []):
                        add(caption)
                for distractor in record.get("distractors", []):
                    add(distractor["caption"])
    return vocab


def _cmd_filter_vocab(args) -> None:
    table = emb.load_embeddings(args.embeddings, args.format)
    vocab = _dataset_vocabulary(args.data)
    emb.save_embeddings(emb.filter_vocabulary(table, vocab), args.out, args.out_format)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="capeval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="score a judged dataset under a set of metrics")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--metrics", required=True, help="comma-separated metric ids")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--json", type=Path, help="JSON twin path (default: alongside --out)")
    _add_resource_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("correlate", help="correlation + Williams report against judgments")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--judgment", required=True, help="judgment name(s), comma-separated")
    p.add_argument("--scores", type=Path, help="reuse a score CSV from a previous run")
    p.add_argument("--metrics", help="or compute these metrics now")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--williams-corr", choices=("pearson", "spearman", "kendall"), default="pearson")
    _add_resource_flags(p)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("williams", help="one Williams test from three correlations")
    p.add_argument("--r13", type=float, required=True)
    p.add_argument("--r23", type=float, required=True)
    p.add_argument("--r12", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_williams)

    p = sub.add_parser("accuracy", help="forced-choice accuracy over triplets")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--out", type=Path)
    _add_resource_flags(p)
    p.set_defaults(func=_cmd_accuracy)

    p = sub.add_parser("distract", help="distraction robustness accuracy")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--out", type=Path)
    _add_resource_flags(p)
    p.set_defaults(func=_cmd_distract)

    p = sub.add_parser("combine", help="min-max normalized weighted metric combination")
    p.add_argument("--scores", type=Path, required=True)
    p.add_argument("--metrics", required=True)
    p.add_argument("--weights", help="comma-separated weights (default: uniform)")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("filter-vocab", help="restrict an embedding file to dataset vocabulary")
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--format", choices=("text", "binary"), default="binary")
    p.add_argument("--data", type=Path, action="append", required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--out-format", choices=("text", "binary"), default="text")
    p.set_defaults(func=_cmd_filter_vocab)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except SystemExit as exc:
        return exc.code or 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
