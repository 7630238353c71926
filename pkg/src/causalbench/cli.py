"""Command-line entry point: ``causalbench <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .errors import CausalBenchError, RecordFormatError, ValidationError
from .questions import TaskKind

log = logging.getLogger("causalbench")


def _tasks(text: str | None) -> list[TaskKind]:
    if not text:
        return list(TaskKind)
    try:
        return [TaskKind(t.strip().upper()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def cmd_gen(args) -> int:
    from .store import assemble, load_config

    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    started = time.perf_counter()
    manifest = assemble(config, args.out)
    for row in manifest.counts:
        print(
            f"{row['task']} {row['shape']} {row['param'] or '-'} {row['name_style']}: "
            f"{row['kept']}/{row['generated']} kept"
        )
    print(f"wrote {sum(r['kept'] for r in manifest.counts)} questions to {args.out} "
          f"in {time.perf_counter() - started:.1f}s (config {manifest.config_hash[:12]})")
    return 0


def cmd_stats(args) -> int:
    from .store import BenchmarkManifest, stats_report

    text, csv_text = stats_report(BenchmarkManifest.load(args.bench))
    print(text, end="")
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    return 0


def cmd_solve(args) -> int:
    from .evaluation.answers import render_answer
    from .store import compare_records, find_record, solve

    stored = find_record(args.bench, args.id)
    rebuilt = solve(stored)
    print("stored ground truth:")
    print(render_answer(stored))
    print("recomputed ground truth:")
    print(render_answer(rebuilt))
    problems = compare_records(stored, rebuilt)
    if problems:
        print(f"MISMATCH: {', '.join(problems)}")
        return 1
    print("match")
    return 0


def cmd_prompt(args) -> int:
    from .prompts import ExemplarBank, PromptStyle, render_prompt
    from .store import find_record

    q = find_record(args.bench, args.id)
    print(render_prompt(q, PromptStyle.parse(args.style), ExemplarBank.load(args.exemplars)))
    return 0


def cmd_eval(args) -> int:
    from .evaluation.answers import BaMode
    from .evaluation.client import ChatClient, ModelEndpoint, ResponseCache
    from .evaluation.mocks import ChatTransport, make_mock
    from .evaluation.runner import run_eval, write_results
    from .prompts import ExemplarBank, PromptStyle
    from .store import load_benchmark

    records = load_benchmark(args.bench, _tasks(args.tasks))
    if args.limit is not None:
        per_task: dict = {}
        kept = []
        for q in records:
            if per_task.get(q.task, 0) < args.limit:
                per_task[q.task] = per_task.get(q.task, 0) + 1
                kept.append(q)
        records = kept
    styles = [PromptStyle.parse(s) for s in args.styles.split(",")]
    cache = ResponseCache(args.cache) if args.cache else None
    if args.mock:
        responder = make_mock(args.mock, records)
        endpoint = ModelEndpoint(base_url="http://mock.invalid", model=f"mock:{args.mock}", requests_per_minute=0)
        client = ChatClient(endpoint, cache, transport=ChatTransport(responder))
    else:
        endpoint = ModelEndpoint.load(args.endpoint)
        client = ChatClient(endpoint, cache)
    with client:
        results = run_eval(
            records, styles, client.complete, endpoint.model,
            bank=ExemplarBank.load(args.exemplars), ba_mode=BaMode(args.ba_mode), workers=args.workers,
        )
    n = write_results(args.out, results)
    correct = sum(r.verdict == "correct" for r in results)
    print(f"{n} results written to {args.out}: {correct} correct, "
          f"{client.network_calls} requests, {client.cache_hits} cache hits")
    return 0


def cmd_report(args) -> int:
    from .evaluation.runner import aggregate, load_results

    table = aggregate(load_results(args.results), [d.strip() for d in args.dims.split(",") if d.strip()])
    print(table.to_text(), end="")
    if args.csv:
        Path(args.csv).write_text(table.to_csv(), encoding="utf-8")
    return 0


def cmd_verify(args) -> int:
    from .store import verify

    problems = verify(args.bench)
    for p in problems:
        print(p)
    if problems:
        print(f"verification failed: {len(problems)} problem(s)")
        return 1
    print("benchmark verified")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalbench", description="Generate and evaluate causal reasoning questions.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a benchmark")
    g.add_argument("--config", default=None, help="INI config file (default: bundled config)")
    g.add_argument("--seed", type=int, default=None, help="override the master seed")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("stats", help="print per-shape complexity statistics")
    s.add_argument("--bench", required=True)
    s.add_argument("--csv", help="also write the table as CSV")
    s.set_defaults(func=cmd_stats)

    so = sub.add_parser("solve", help="show and recompute the ground truth of one question")
    so.add_argument("--bench", required=True)
    so.add_argument("--id", required=True)
    so.set_defaults(func=cmd_solve)

    pr = sub.add_parser("prompt", help="render the prompt for one question")
    pr.add_argument("--bench", required=True)
    pr.add_argument("--id", required=True)
    pr.add_argument("--style", default="zero-shot")
    pr.add_argument("--exemplars", help="alternative exemplar bank (YAML)")
    pr.set_defaults(func=cmd_prompt)

    e = sub.add_parser("eval", help="query a model on the benchmark")
    e.add_argument("--bench", required=True)
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--endpoint", help="endpoint INI file with an [endpoint] section")
    src.add_argument("--mock", choices=("oracle", "negate", "garbage"))
    e.add_argument("--styles", default="zero-shot")
    e.add_argument("--tasks", help="comma-separated subset of CP,BA,FI,CI")
    e.add_argument("--limit", type=int, help="at most this many questions per task")
    e.add_argument("--cache", help="response cache directory")
    e.add_argument("--ba-mode", choices=("match-minimal", "validity-check"), default="match-minimal")
    e.add_argument("--workers", type=int, default=4)
    e.add_argument("--exemplars", help="alternative exemplar bank (YAML)")
    e.add_argument("--out", required=True, help="results JSONL")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("report", help="accuracy tables from result files")
    r.add_argument("--results", nargs="+", required=True)
    r.add_argument("--dims", default="task,prompt")
    r.add_argument("--csv", help="also write the table as CSV")
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", help="recompute every question and check the manifest")
    v.add_argument("--bench", required=True)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CausalBenchError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        if isinstance(exc, KeyError):
            msg = f"not found: {exc.args[0]}"
        elif isinstance(exc, RecordFormatError):
            msg = str(exc)
        else:
            msg = str(exc) or type(exc).__name__
        print(f"causalbench: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
