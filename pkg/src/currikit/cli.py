"""Batch command-line surface: validate -> score -> order/tier -> report.

Plain files in, plain files out. Every command is reproducible: identical
inputs, flags and seed give byte-identical outputs, independent of the
worker count set via the CURRIKIT_THREADS environment variable. Exit codes
are a stable contract: 0 success, 1 domain violation, 2 environment or
I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .answers import judge_set
from .core import (
    ALL_METRICS,
    ANNOTATION_METRICS,
    AnnotationRecord,
    CompletionSet,
    MODEL_METRICS,
    MetricVector,
    OUTCOME_METRICS,
    Problem,
    Strategy,
    Tier,
    ValidationReport,
    validate_corpus,
)
from .ingest import (
    CorpusManifest,
    IngestError,
    file_digest,
    manifest_to_json,
    read_annotations,
    read_problems,
    read_scores,
    read_traces,
    write_scores,
)
from .metrics import score_completion_set
from .ordering import (
    EQUAL_COUNT,
    QUANTILE,
    CorpusTooSmall,
    MissingMetric,
    UnknownId,
    UnknownStrategy,
    emit_plan,
    order_fcl,
    order_gfc,
    order_grc,
    order_rcl,
    order_sgc,
    order_shuf,
    partition_tiers,
)
from .outcomes import CorrectnessUnset, NoMetricSource, assemble
from .prng import shuffled

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_ENVIRONMENT = 2

_TIER_RULES = {"equal": EQUAL_COUNT, "quantile": QUANTILE}


class MissingMetricSource(ValueError):
    """A selected metric's inputs are absent."""


class SampleTooLarge(ValueError):
    pass


def _thread_count() -> int:
    raw = os.environ.get("CURRIKIT_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise EnvironmentError(f"CURRIKIT_THREADS={raw!r} is not an integer") from exc
    if value < 1:
        raise EnvironmentError(f"CURRIKIT_THREADS must be >= 1, got {value}")
    return value


def _read_jsonl(path: Path, reader, *args, **kwargs):
    with path.open("rb") as stream:
        return reader(stream, *args, **kwargs)


def _write_json(path: Path, payload: dict) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as sink:
        json.dump(payload, sink, indent=2, ensure_ascii=False)
        sink.write("\n")


def _report_payload(report: ValidationReport, warnings: list[str]) -> dict:
    return {
        "ok": report.ok,
        "violations": [
            {"problem_id": issue.problem_id, "message": issue.message}
            for issue in report.violations
        ],
        "warnings": [
            {"problem_id": issue.problem_id, "message": issue.message}
            for issue in report.warnings
        ]
        + [{"problem_id": None, "message": message} for message in warnings],
    }


def cmd_validate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ingest_warnings: list[str] = []
    manifest = CorpusManifest(k_completions=args.k, k_topk=args.topk)

    try:
        problems = _read_jsonl(Path(args.problems), read_problems)
        sets = _read_jsonl(
            Path(args.traces), read_traces, manifest, on_warning=ingest_warnings.append
        )
        annotations = None
        if args.annotations:
            annotations = _read_jsonl(Path(args.annotations), read_annotations)
    except IngestError as exc:
        report = ValidationReport()
        payload = _report_payload(report, ingest_warnings)
        payload["ok"] = False
        payload["violations"].append({"problem_id": None, "message": str(exc)})
        _write_json(out_dir / "validation.json", payload)
        print(f"validate: {exc}", file=sys.stderr)
        return EXIT_VIOLATION

    report = validate_corpus(
        problems,
        sets,
        annotations,
        k_completions=args.k,
        permissive=args.permissive,
    )
    _write_json(out_dir / "validation.json", _report_payload(report, ingest_warnings))
    for issue in report.violations:
        print(f"violation: {issue.problem_id}: {issue.message}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def _select_metrics(args: argparse.Namespace) -> list[str]:
    have_traces = bool(args.traces)
    have_annotations = bool(args.annotations)
    if args.metrics:
        selected = [name.strip() for name in args.metrics.split(",") if name.strip()]
        for name in selected:
            if name not in ALL_METRICS:
                raise MissingMetricSource(f"unknown metric {name!r}")
            if name in MODEL_METRICS + OUTCOME_METRICS and not have_traces:
                raise MissingMetricSource(
                    f"metric {name!r} needs --traces, which was not provided"
                )
            if name in ANNOTATION_METRICS and not have_annotations:
                raise MissingMetricSource(
                    f"metric {name!r} needs --annotations, which was not provided"
                )
        return selected
    selected = []
    if have_traces:
        selected.extend(MODEL_METRICS + OUTCOME_METRICS)
    if have_annotations:
        selected.extend(ANNOTATION_METRICS)
    if not selected:
        raise MissingMetricSource("no metric sources: provide --traces or --annotations")
    return selected


def _score_one(
    problem: Problem,
    cset: CompletionSet | None,
    annotation: AnnotationRecord | None,
    metrics: list[str],
    warnings: list[str],
) -> MetricVector:
    model_names = [m for m in metrics if m in MODEL_METRICS]
    want_outcome = any(m in OUTCOME_METRICS for m in metrics)
    want_annotation = any(m in ANNOTATION_METRICS for m in metrics)

    if (model_names or want_outcome) and cset is None:
        raise MissingMetricSource(f"problem {problem.id!r} has no completion set")
    if want_annotation and annotation is None:
        raise MissingMetricSource(f"problem {problem.id!r} has no annotation")

    model_side = None
    if model_names:
        model_side = score_completion_set(cset, model_names)
    judged = None
    if want_outcome:
        judged = judge_set(cset, problem, on_warning=warnings.append)
    return assemble(
        problem.id,
        model_side=model_side,
        cset=judged,
        annotation=annotation if want_annotation else None,
    )


def cmd_score(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = _select_metrics(args)
    threads = _thread_count()

    manifest_config = CorpusManifest(k_completions=args.k, k_topk=args.topk)
    problems = _read_jsonl(Path(args.problems), read_problems)
    ingest_warnings: list[str] = []
    sets_by_id: dict[str, CompletionSet] = {}
    trace_count = 0
    if args.traces:
        sets = _read_jsonl(
            Path(args.traces),
            read_traces,
            manifest_config,
            on_warning=ingest_warnings.append,
        )
        sets_by_id = {cset.problem_id: cset for cset in sets}
        trace_count = sum(cset.k for cset in sets)
    annotations_by_id: dict[str, AnnotationRecord] = {}
    annotation_count = 0
    if args.annotations:
        annotations = _read_jsonl(Path(args.annotations), read_annotations)
        annotations_by_id = {record.problem_id: record for record in annotations}
        annotation_count = len(annotations)

    judge_warnings: list[str] = []

    def score(problem: Problem) -> MetricVector:
        return _score_one(
            problem,
            sets_by_id.get(problem.id),
            annotations_by_id.get(problem.id),
            metrics,
            judge_warnings,
        )

    if threads == 1:
        vectors = [score(problem) for problem in problems]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vectors = list(pool.map(score, problems))

    scores_path = out_dir / "scores.jsonl"
    with scores_path.open("w", encoding="utf-8", newline="\n") as sink:
        write_scores(vectors, sink)

    counts = {"problems": len(problems), "scores": len(vectors)}
    digests = {
        Path(args.problems).name: file_digest(Path(args.problems)),
        "scores.jsonl": file_digest(scores_path),
    }
    if args.traces:
        counts["traces"] = trace_count
        digests[Path(args.traces).name] = file_digest(Path(args.traces))
    if args.annotations:
        counts["annotations"] = annotation_count
        digests[Path(args.annotations).name] = file_digest(Path(args.annotations))
    manifest = CorpusManifest(
        k_completions=args.k,
        k_topk=args.topk,
        counts=counts,
        content_digest=digests,
    )
    with (out_dir / "manifest.json").open("w", encoding="utf-8", newline="\n") as sink:
        sink.write(manifest_to_json(manifest))

    for message in ingest_warnings + judge_warnings:
        print(f"warning: {message}", file=sys.stderr)
    return EXIT_OK


def cmd_order(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores_path = Path(args.scores) if args.scores else out_dir / "scores.jsonl"

    problems = _read_jsonl(Path(args.problems), read_problems)
    scores = _read_jsonl(scores_path, read_scores)

    strategy_name = args.strategy.lower()
    try:
        strategy = Strategy(strategy_name)
    except ValueError:
        raise UnknownStrategy(f"unknown strategy {args.strategy!r}")

    if strategy is not Strategy.SHUF and not args.metric:
        raise MissingMetric("<all>", "(--metric is required for this strategy)")

    rule = _TIER_RULES[args.tier_rule]
    if strategy is Strategy.FCL:
        plan = order_fcl(scores, args.metric, seed=args.seed)
    elif strategy is Strategy.RCL:
        plan = order_rcl(scores, args.metric, seed=args.seed)
    elif strategy is Strategy.SHUF:
        plan = order_shuf([v.problem_id for v in scores], args.seed)
    else:
        partition = partition_tiers(scores, args.metric, rule)
        if strategy is Strategy.SGC:
            if not args.tier:
                raise UnknownStrategy("sgc requires --tier {low,medium,high}")
            plan = order_sgc(partition, Tier(args.tier.lower()), args.seed)
        elif strategy is Strategy.GFC:
            plan = order_gfc(partition, args.seed)
        else:
            plan = order_grc(partition, args.seed)

    digests = {
        Path(args.problems).name: file_digest(Path(args.problems)),
        scores_path.name: file_digest(scores_path),
    }
    emit_plan(plan, problems, out_dir, input_digests=digests, repeat=args.repeat)
    return EXIT_OK


def cmd_tier(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores_path = Path(args.scores) if args.scores else out_dir / "scores.jsonl"
    scores = _read_jsonl(scores_path, read_scores)
    partition = partition_tiers(scores, args.metric, _TIER_RULES[args.tier_rule])
    _write_json(
        out_dir / "tiers.json",
        {
            "metric": partition.metric_name,
            "tier_rule": partition.split_rule,
            "sizes": {
                "low": len(partition.low),
                "medium": len(partition.medium),
                "high": len(partition.high),
            },
            "tiers": {
                "low": list(partition.low),
                "medium": list(partition.medium),
                "high": list(partition.high),
            },
            "input_digests": {scores_path.name: file_digest(scores_path)},
        },
    )
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores_path = Path(args.scores) if args.scores else out_dir / "scores.jsonl"
    scores = _read_jsonl(scores_path, read_scores)

    if args.sample_size > len(scores):
        raise SampleTooLarge(
            f"sample size {args.sample_size} exceeds corpus of {len(scores)}"
        )
    sampled_ids = shuffled([v.problem_id for v in scores], args.seed)[: args.sample_size]
    sampled_set = set(sampled_ids)
    sampled = [v for v in scores if v.problem_id in sampled_set]

    metric_stats: dict[str, dict] = {}
    for name in ALL_METRICS:
        values = [v.value(name) for v in sampled if v.value(name) is not None]
        metric_stats[name] = {
            "mean": math.fsum(values) / len(values) if values else None,
            "count": len(values),
        }

    _write_json(
        out_dir / "report.json",
        {
            "sample_size": args.sample_size,
            "seed": args.seed,
            "corpus_size": len(scores),
            "sampled_ids": sampled_ids,
            "metrics": metric_stats,
            "input_digests": {scores_path.name: file_digest(scores_path)},
        },
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="currikit",
        description=(
            "Score training problems with difficulty metrics from generation "
            "traces and emit deterministic curriculum orderings."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", required=True, help="output directory")

    p_validate = sub.add_parser("validate", help="cross-check a corpus")
    p_validate.add_argument("--problems", required=True)
    p_validate.add_argument("--traces", required=True)
    p_validate.add_argument("--annotations")
    p_validate.add_argument("--k", type=int, default=20, help="expected completions per problem")
    p_validate.add_argument("--topk", type=int, default=5, help="stored candidates per token")
    p_validate.add_argument("--permissive", action="store_true", help="downgrade K mismatches to warnings")
    add_common(p_validate)
    p_validate.set_defaults(func=cmd_validate)

    p_score = sub.add_parser("score", help="compute per-problem metric vectors")
    p_score.add_argument("--problems", required=True)
    p_score.add_argument("--traces")
    p_score.add_argument("--annotations")
    p_score.add_argument("--metrics", help="comma-separated subset of: " + ",".join(ALL_METRICS))
    p_score.add_argument("--k", type=int, default=20)
    p_score.add_argument("--topk", type=int, default=5)
    add_common(p_score)
    p_score.set_defaults(func=cmd_score)

    p_order = sub.add_parser("order", help="emit a curriculum plan")
    p_order.add_argument("--problems", required=True)
    p_order.add_argument("--scores", help="defaults to <out>/scores.jsonl")
    p_order.add_argument("--strategy", required=True, help="fcl|rcl|sgc|gfc|grc|shuf")
    p_order.add_argument("--metric", help="metric the ordering follows")
    p_order.add_argument("--tier", help="low|medium|high (sgc only)")
    p_order.add_argument("--tier-rule", choices=sorted(_TIER_RULES), default="equal")
    p_order.add_argument("--seed", type=int, default=0)
    p_order.add_argument("--repeat", type=int, default=1, help="repeat the ordering verbatim")
    add_common(p_order)
    p_order.set_defaults(func=cmd_order)

    p_tier = sub.add_parser("tier", help="emit the three-tier partition")
    p_tier.add_argument("--scores", help="defaults to <out>/scores.jsonl")
    p_tier.add_argument("--metric", required=True)
    p_tier.add_argument("--tier-rule", choices=sorted(_TIER_RULES), default="equal")
    add_common(p_tier)
    p_tier.set_defaults(func=cmd_tier)

    p_report = sub.add_parser("report", help="per-metric means over a seeded sample")
    p_report.add_argument("--scores", help="defaults to <out>/scores.jsonl")
    p_report.add_argument("--sample-size", type=int, default=200)
    p_report.add_argument("--seed", type=int, default=0)
    add_common(p_report)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        IngestError,
        MissingMetric,
        MissingMetricSource,
        UnknownStrategy,
        UnknownId,
        CorpusTooSmall,
        CorrectnessUnset,
        NoMetricSource,
        SampleTooLarge,
        ValueError,
    ) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except EnvironmentError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT


if __name__ == "__main__":
    sys.exit(main())
