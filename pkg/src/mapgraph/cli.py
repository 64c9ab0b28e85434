"""Command-line interface for the full pipeline.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 validation/classification findings, 2 usage or input error,
3 transport error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import (
    core,
    harness,
    ingest,
    langparse,
    metrics,
    narrate,
    querygen,
    synth,
)
from .errors import MapGraphError, TransportError

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_TRANSPORT = 3

_EPILOG = f"""\
constants:
  snap radius            max(node radius, {ingest.SNAP_RADIUS:.0f} px)   edge anchoring in annotation import
  fuzzy threshold        {langparse.FUZZY_THRESHOLD}                  token-set ratio for landmark matching
  direction threshold    {narrate.DIRECTION_AXIS_THRESHOLD}                  axis share of displacement norm
  path cap               {core.DEFAULT_PATH_CAP}               simple-path enumeration bound
"""


def _diag(payload: dict) -> None:
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True), file=sys.stderr)


def _load_graphs(path: str) -> dict[str, core.SceneGraph]:
    target = Path(path)
    if target.is_dir():
        return ingest.load_graph_dir(target)
    graph = ingest.load_graph(target)
    return {graph.map_id: graph}


def _resolve_landmark(graph: core.SceneGraph, label: str) -> str:
    node = graph.landmark_by_label(label)
    if node is None:
        raise MapGraphError(f"no landmark labeled {label!r} in {graph.map_id!r}")
    return node.id


def _write_out(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def _cmd_validate(args) -> int:
    graph = ingest.load_graph(args.graph, validate_graph=False)
    report = core.validate(graph, strict_degree=args.strict_degree)
    records = [
        {
            "code": record.code,
            "severity": record.severity,
            "subject": list(record.subject),
            "message": record.message,
        }
        for record in report.records
    ]
    for record in records:
        _diag(record)
    if args.format == "jsonl":
        for record in records:
            print(json.dumps(record, ensure_ascii=False, sort_keys=True))
    else:
        print(f"{graph.map_id}: {'valid' if report.is_valid else 'INVALID'}")
    return EXIT_OK if report.is_valid else EXIT_FINDINGS


def _cmd_metrics(args) -> int:
    graphs = _load_graphs(args.graphs)
    queries = []
    if args.queries:
        queries = querygen.read_queries_jsonl(
            Path(args.queries).read_text(encoding="utf-8")
        )
    report = metrics.build_report(graphs, queries)
    if args.format == "csv":
        _write_out(report.to_csv(), args.out)
    elif args.format == "jsonl":
        _write_out(report.to_json() + "\n", args.out)
    else:
        _write_out(report.to_table(), args.out)
    return EXIT_OK


def _cmd_gen_queries(args) -> int:
    graph = ingest.load_graph(args.graph)
    queries = querygen.generate_queries(
        graph,
        pairs=args.pairs,
        repeats=args.repeats,
        seed=args.seed,
        ordered=args.ordered,
    )
    _write_out(querygen.queries_to_jsonl(queries), args.out)
    return EXIT_OK


def _cmd_narrate(args) -> int:
    graph = ingest.load_graph(args.graph)
    start = _resolve_landmark(graph, getattr(args, "from"))
    end = _resolve_landmark(graph, args.to)
    path = core.shortest_path(graph, start, end)
    instruction = narrate.narrate_path(graph, path, mode=args.mode)
    print(instruction.render())
    return EXIT_OK


def _cmd_parse(args) -> int:
    graph = ingest.load_graph(args.graph)
    queries = {
        q.query_id: q
        for q in querygen.read_queries_jsonl(
            Path(args.queries).read_text(encoding="utf-8")
        )
    }
    if args.query not in queries:
        raise MapGraphError(f"query id {args.query!r} not found in {args.queries!r}")
    query = queries[args.query]
    text = Path(args.response).read_text(encoding="utf-8")
    record = langparse.classify(
        langparse.parse_response(text),
        (query.start, query.end),
        graph,
        query_id=query.query_id,
    )
    if args.format == "csv":
        print(langparse.records_to_csv([record]), end="")
    else:
        print(langparse.records_to_jsonl([record]), end="")
    return EXIT_OK if record.status is langparse.EvalStatus.SCORED else EXIT_FINDINGS


def _load_endpoint(path: str) -> harness.ChatBackend:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = doc.get("type", "http")
    if kind == "stub":
        if "script_file" in doc:
            # Replay fixture file; resolve relative to the endpoint config.
            script_path = Path(path).parent / doc["script_file"]
            return harness.StubEndpoint.from_file(
                script_path, model=doc.get("model", "stub")
            )
        return harness.StubEndpoint(
            script=doc.get("script"), model=doc.get("model", "stub")
        )
    if kind == "http":
        return harness.HttpEndpoint(
            harness.ModelEndpoint(
                base_url=doc["base_url"],
                model=doc["model"],
                auth_env=doc.get("auth_env", ""),
                timeout=doc.get("timeout", 60.0),
                max_retries=doc.get("max_retries", 2),
                rate_limit_rpm=doc.get("rate_limit_rpm", 0),
            )
        )
    raise MapGraphError(f"unknown endpoint type {kind!r}")


def _cmd_eval(args) -> int:
    endpoint = _load_endpoint(args.endpoint)
    graphs = _load_graphs(args.graphs)
    queries = querygen.read_queries_jsonl(
        Path(args.queries).read_text(encoding="utf-8")
    )
    cache = harness.ResponseCache(args.cache) if args.cache else None
    responses, errors = harness.collect_responses(
        [endpoint],
        graphs,
        queries,
        args.method,
        cache=cache,
        jobs=args.jobs,
        max_iters=args.max_iters,
        image_dir=args.images,
        transcript_dir=args.transcripts,
    )
    for error in errors:
        _diag(error)
    _write_out(harness.responses_to_jsonl(responses), args.out)
    return EXIT_TRANSPORT if errors else EXIT_OK


def _cmd_score(args) -> int:
    graphs = _load_graphs(args.graphs)
    responses = langparse.read_responses_jsonl(
        Path(args.responses).read_text(encoding="utf-8")
    )
    queries = {}
    if args.queries:
        queries = {
            q.query_id: q
            for q in querygen.read_queries_jsonl(
                Path(args.queries).read_text(encoding="utf-8")
            )
        }
    records = harness.score_responses(responses, graphs, queries)
    scene_of = {}
    for doc in responses:
        map_id = doc.get("map_id") or (
            queries[doc["query_id"]].map_id if doc["query_id"] in queries else None
        )
        if map_id and map_id in graphs:
            scene_of[doc["query_id"]] = graphs[map_id].meta.scene_type.value
    method = responses[0]["method"] if responses else "zero-shot"
    result = harness.SuiteResult(
        records=tuple(records),
        responses=tuple(responses),
        errors=(),
        scene_of=scene_of,
        method=method,
    )
    if args.format == "csv":
        _write_out(langparse.records_to_csv(records), args.out)
    else:
        _write_out(langparse.records_to_jsonl(records), args.out)
    if args.quality:
        Path(args.quality).write_text(
            result.render_quality(args.table_format), encoding="utf-8"
        )
    if args.failures:
        Path(args.failures).write_text(
            result.render_failures(args.table_format), encoding="utf-8"
        )
    return EXIT_OK


def _cmd_stats(args) -> int:
    graphs = _load_graphs(args.graphs)
    queries = []
    if args.queries:
        queries = querygen.read_queries_jsonl(
            Path(args.queries).read_text(encoding="utf-8")
        )
    stats = querygen.dataset_stats(graphs, queries)
    if args.format == "csv":
        _write_out(stats.to_csv(), args.out)
    elif args.format == "jsonl":
        _write_out(stats.to_json() + "\n", args.out)
    else:
        _write_out(stats.to_table(), args.out)
    return EXIT_OK


def _cmd_synth(args) -> int:
    graph = synth.generate(
        seed=args.seed,
        n_intersections=args.intersections,
        n_landmarks=args.landmarks,
        extra_edges=args.extra_edges,
        map_id=args.map_id,
    )
    _write_out(ingest.graph_to_json(graph), args.out)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapgraph",
        description="Scene-graph toolkit for map navigation evaluation",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a graph against the connectivity rules")
    p.add_argument("graph")
    p.add_argument("--strict-degree", action="store_true",
                   help="treat connect-degree-1 intersections as errors")
    p.add_argument("--format", choices=["table", "jsonl"], default="table")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("metrics", help="complexity report for graphs (and queries)")
    p.add_argument("graphs", help="graph file or directory")
    p.add_argument("--queries", help="query JSONL for difficulty statistics")
    p.add_argument("--format", choices=["csv", "jsonl", "table"], default="table")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("gen-queries", help="sample benchmark queries from a graph")
    p.add_argument("graph")
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ordered", action="store_true",
                   help="sample directions independently")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen_queries)

    p = sub.add_parser("narrate", help="narrate the shortest route between landmarks")
    p.add_argument("graph")
    p.add_argument("--from", required=True, help="start landmark label")
    p.add_argument("--to", required=True, help="destination landmark label")
    p.add_argument("--mode", choices=["screen", "compass"], default="screen")
    p.set_defaults(func=_cmd_narrate)

    p = sub.add_parser("parse", help="classify one response against a query")
    p.add_argument("graph")
    p.add_argument("--queries", required=True, help="query JSONL defining endpoints")
    p.add_argument("--query", required=True, help="query id")
    p.add_argument("--response", required=True, help="file with the raw response text")
    p.add_argument("--format", choices=["csv", "jsonl"], default="jsonl")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("eval", help="drive a model endpoint over queries")
    p.add_argument("--endpoint", required=True, help="endpoint config JSON")
    p.add_argument("--method", choices=["zero-shot", "cot"], required=True)
    p.add_argument("--graphs", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--cache", help="response cache directory")
    p.add_argument("--images", help="directory for relative image paths")
    p.add_argument("--transcripts", help="directory for chained-protocol transcripts")
    p.add_argument("--jobs", type=int, default=harness.DEFAULT_JOBS)
    p.add_argument("--max-iters", type=int, default=harness.DEFAULT_MAX_ITERS)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("score", help="classify responses and aggregate reports")
    p.add_argument("--responses", required=True)
    p.add_argument("--graphs", required=True)
    p.add_argument("--queries", help="query JSONL (needed when responses lack endpoints)")
    p.add_argument("--format", choices=["csv", "jsonl"], default="jsonl")
    p.add_argument("--table-format", choices=["csv", "jsonl", "table"], default="table")
    p.add_argument("--quality", help="write the quality table to this file")
    p.add_argument("--failures", help="write the failure-rate table to this file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("stats", help="dataset statistics for graphs and queries")
    p.add_argument("--graphs", required=True)
    p.add_argument("--queries")
    p.add_argument("--format", choices=["csv", "jsonl", "table"], default="table")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("synth", help="generate a random valid graph fixture")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--intersections", type=int, default=5)
    p.add_argument("--landmarks", type=int, default=4)
    p.add_argument("--extra-edges", type=int, default=1)
    p.add_argument("--map-id")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TransportError as exc:
        _diag({"error": exc.code, "detail": str(exc)})
        return EXIT_TRANSPORT
    except MapGraphError as exc:
        _diag({"error": exc.code, "detail": str(exc)})
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        _diag({"error": type(exc).__name__, "detail": str(exc)})
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
