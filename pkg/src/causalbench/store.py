"""Benchmark assembly and JSON Lines persistence."""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import logging
import statistics
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path as FsPath
from typing import Iterable, Iterator, Mapping, Sequence

from . import _random
from .errors import BudgetExceeded, RecordFormatError, ValidationError
from .graph import GenParams, GraphShape, JunctionProbabilities, TieredDag, complexity_stats, generate_graph
from .naming import NameStyle, TermLexicon, assign_names
from .oracles import AdjustmentGroundTruth, Path
from .questions import (
    BaTruth,
    CpTruth,
    FilterCaps,
    QuestionRecord,
    StateTruth,
    TaskKind,
    build_ba_question,
    build_ci_question,
    build_cp_question,
    build_fi_question,
    complexity_filter,
)
from .scm import BoolScm, generate_functions, parse_expr, render_expr

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MIN_BENCH_TIERS = 5
TASK_FILES = {t: f"{t.value.lower()}.jsonl" for t in TaskKind}
MANIFEST = "manifest.json"


# ---------------------------------------------------------------- records

def truth_to_json(truth) -> dict:
    if isinstance(truth, CpTruth):
        return {"pairs": [
            {"cause": x, "effect": y, "paths": [list(p.nodes) for p in paths]} for x, y, paths in truth.pairs
        ]}
    if isinstance(truth, BaTruth):
        return {"pairs": [
            {"cause": a.treatment, "effect": a.outcome, "minimal_sets": [sorted(s) for s in a.minimal_sets]}
            for a in truth.pairs
        ]}
    return {"states": {str(k): v for k, v in sorted(truth.states.items())}}


def truth_from_json(task: TaskKind, data: Mapping):
    if task is TaskKind.CP:
        return CpTruth(tuple(
            (p["cause"], p["effect"], tuple(Path.directed(nodes) for nodes in p["paths"])) for p in data["pairs"]
        ))
    if task is TaskKind.BA:
        return BaTruth(tuple(
            AdjustmentGroundTruth(p["cause"], p["effect"], tuple(frozenset(s) for s in p["minimal_sets"]))
            for p in data["pairs"]
        ))
    return StateTruth({int(k): bool(v) for k, v in data["states"].items()})


def record_to_json(q: QuestionRecord) -> dict:
    g = q.graph
    gp = g.gen_params
    params = dict(q.params)
    if gp is not None:
        params["probs"] = list(gp.probs.as_tuple())
    functions = None
    if q.scm is not None:
        functions = {str(v): render_expr(e, q.names.__getitem__) for v, e in sorted(q.scm.functions.items())}
    return {
        "id": q.id,
        "task": q.task.value,
        "schema_version": SCHEMA_VERSION,
        "shape": list(g.shape.tier_sizes),
        "iterations": gp.iterations if gp else None,
        "seed": gp.seed if gp else None,
        "params": params,
        "name_style": q.name_style.label,
        "tiers": [list(g.tier_nodes(t)) for t in range(g.shape.n_tiers)],
        "edges": [list(e) for e in g.edges],
        "names": {str(k): v for k, v in sorted(q.names.items())},
        "functions": functions,
        "question_text": q.question_text,
        "ground_truth": truth_to_json(q.ground_truth),
        "stats": q.stats.as_dict(),
    }


def record_from_json(data: Mapping) -> QuestionRecord:
    if data.get("schema_version") != SCHEMA_VERSION:
        raise RecordFormatError(f"unknown schema version {data.get('schema_version')!r}")
    task = TaskKind(data["task"])
    shape = GraphShape(tuple(data["shape"]))
    params = dict(data["params"])
    gen = None
    if data.get("seed") is not None:
        gen = GenParams(shape, data["iterations"], JunctionProbabilities(*params.get("probs", (0.1, 0.1, 0.1))), data["seed"])
    g = TieredDag(shape, tuple(tuple(e) for e in data["edges"]), gen)
    if [list(g.tier_nodes(t)) for t in range(shape.n_tiers)] != data["tiers"]:
        raise RecordFormatError("tiers do not match the shape")
    names = {int(k): v for k, v in data["names"].items()}
    scm = None
    if data.get("functions") is not None:
        lookup = {v: k for k, v in names.items()}
        scm = BoolScm(g, {int(k): parse_expr(text, lookup) for k, text in data["functions"].items()})
    stats = complexity_stats(g)
    if stats.as_dict() != data["stats"]:
        raise RecordFormatError(f"stored stats of {data['id']} disagree with its graph")
    return QuestionRecord(
        data["id"], task, g, names, NameStyle.parse(data["name_style"]), data["question_text"],
        truth_from_json(task, data["ground_truth"]), params, stats, scm,
    )


def dump_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_records(path, records: Iterable[QuestionRecord]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for q in records:
            fh.write(dump_line(record_to_json(q)) + "\n")
            n += 1
    return n


def iter_records(path) -> Iterator[QuestionRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordFormatError(f"malformed JSON ({exc.msg})", lineno) from None
            try:
                yield record_from_json(data)
            except RecordFormatError as exc:
                raise RecordFormatError(str(exc), lineno) from None
            except (KeyError, TypeError, ValueError) as exc:
                raise RecordFormatError(f"invalid record: {exc}", lineno) from None


def read_records(path) -> list[QuestionRecord]:
    return list(iter_records(path))


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class TaskConfig:
    shapes: tuple[GraphShape, ...]
    name_styles: tuple[NameStyle, ...] = (NameStyle("random"),)
    ce_d: Mapping[str, tuple[float, ...]] = field(default_factory=dict)  # shape label -> values
    wi_n: tuple[int, ...] = ()

    def ce_d_for(self, shape: GraphShape) -> tuple[float, ...]:
        return self.ce_d.get(shape.label, self.ce_d.get("*", (1.0,)))


@dataclass(frozen=True)
class BenchmarkConfig:
    tasks: Mapping[TaskKind, TaskConfig]
    master_seed: int = 42
    probs: JunctionProbabilities = JunctionProbabilities(0.1, 0.1, 0.1)
    iterations: tuple[int, ...] = (3, 4, 5, 6)
    graphs_per_condition: int = 50
    caps: FilterCaps = FilterCaps()
    max_adjust_size: int = 4

    def __post_init__(self):
        if self.graphs_per_condition < 1:
            raise ValidationError("graphs_per_condition must be at least 1")
        for task, tc in self.tasks.items():
            for s in tc.shapes:
                if s.n_tiers < MIN_BENCH_TIERS:
                    raise ValidationError(f"benchmark shapes need at least {MIN_BENCH_TIERS} tiers, got {s}")
            if task is TaskKind.CI and not tc.wi_n:
                raise ValidationError("CI needs at least one wi_n value")

    def with_seed(self, seed: int) -> "BenchmarkConfig":
        from dataclasses import replace

        return replace(self, master_seed=seed)

    def canonical(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "probs": list(self.probs.as_tuple()),
            "iterations": list(self.iterations),
            "graphs_per_condition": self.graphs_per_condition,
            "caps": [self.caps.max_paths_per_pair, self.caps.max_total_paths],
            "max_adjust_size": self.max_adjust_size,
            "tasks": {
                t.value: {
                    "shapes": [s.label for s in tc.shapes],
                    "name_styles": [n.label for n in tc.name_styles],
                    "ce_d": {k: list(v) for k, v in sorted(tc.ce_d.items())},
                    "wi_n": list(tc.wi_n),
                }
                for t, tc in sorted(self.tasks.items(), key=lambda kv: kv[0].value)
            },
        }

    def hash(self) -> str:
        return hashlib.sha256(dump_line(self.canonical()).encode()).hexdigest()


def _split(value: str) -> list[str]:
    return [p.strip() for p in value.replace(";", ",").split(",") if p.strip()]


def _int_range(value: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in _split(value):
        lo, sep, hi = part.partition("-")
        out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    return tuple(out)


def parse_config(text: str) -> BenchmarkConfig:
    """Parse the INI-style benchmark config (see ``data/default.cfg``)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"config: {exc}") from None
    try:
        b = cp["benchmark"] if cp.has_section("benchmark") else {}
        kwargs: dict = {}
        if "master_seed" in b:
            kwargs["master_seed"] = int(b["master_seed"])
        if "probs" in b:
            kwargs["probs"] = JunctionProbabilities(*(float(p) for p in _split(b["probs"])))
        if "iterations" in b:
            kwargs["iterations"] = _int_range(b["iterations"])
        if "graphs_per_condition" in b:
            kwargs["graphs_per_condition"] = int(b["graphs_per_condition"])
        kwargs["caps"] = FilterCaps(
            int(b.get("max_paths_per_pair", 20)), int(b.get("max_total_paths", 60))
        )
        if "max_adjust_size" in b:
            kwargs["max_adjust_size"] = int(b["max_adjust_size"])
        tasks = {}
        for task in TaskKind:
            sec = task.value.lower()
            if not cp.has_section(sec):
                continue
            s = cp[sec]
            shapes = tuple(GraphShape.parse(x) for x in _split(s["shapes"]))
            styles = tuple(NameStyle.parse(x) for x in _split(s.get("name_styles", "random")))
            ce_d = {}
            for key, value in s.items():
                if key == "ce_d":
                    ce_d["*"] = tuple(float(x) for x in _split(value))
                elif key.startswith("ce_d "):
                    ce_d[GraphShape.parse(key[5:]).label] = tuple(float(x) for x in _split(value))
            wi_n = tuple(int(x) for x in _split(s.get("wi_n", "")))
            tasks[task] = TaskConfig(shapes, styles, ce_d, wi_n)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"config: {exc}") from None
    return BenchmarkConfig(tasks=tasks, **kwargs)


def default_config_text() -> str:
    return resources.files("causalbench").joinpath("data/default.cfg").read_text("utf-8")


def load_config(path=None) -> BenchmarkConfig:
    if path is None or str(path) == "default":
        return parse_config(default_config_text())
    try:
        text = FsPath(path).read_text("utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


# ---------------------------------------------------------------- assembly

def graph_seed(master_seed: int, shape: GraphShape, iterations: int, index: int) -> int:
    return _random.derive_seed(master_seed, _random.ASSEMBLY, iterations, index, *shape.tier_sizes)


def question_id(task: TaskKind, shape: GraphShape, iterations: int, index: int, param: str, style: NameStyle) -> str:
    parts = [task.value.lower(), shape.label.replace("*", "x").replace(",", "-"), f"i{iterations}", f"g{index:03d}"]
    if param:
        parts.append(param)
    parts.append(style.label.replace(":", "-"))
    return "-".join(parts)


def build_question(
    task: TaskKind,
    g: TieredDag,
    style: NameStyle,
    *,
    ce_d: float | None = None,
    wi_n: int | None = None,
    qid: str | None = None,
    lexicon: TermLexicon | None = None,
    max_adjust_size: int = 4,
) -> QuestionRecord:
    """Build one question for a generated graph; everything is derived from its seed."""
    seed = g.gen_params.seed
    names = assign_names(g, style, lexicon or TermLexicon.load(), seed)
    if task is TaskKind.CP:
        return build_cp_question(g, names, ce_d, name_style=style, qid=qid)
    if task is TaskKind.BA:
        return build_ba_question(g, names, ce_d, name_style=style, qid=qid, max_size=max_adjust_size)
    scm = generate_functions(g, seed)
    if task is TaskKind.FI:
        return build_fi_question(scm, names, seed, name_style=style, qid=qid)
    return build_ci_question(scm, names, wi_n, seed, name_style=style, qid=qid)


def _conditions(task: TaskKind, tc: TaskConfig, shape: GraphShape) -> list[tuple[str, dict]]:
    if task in (TaskKind.CP, TaskKind.BA):
        return [(f"ced{v:g}", {"ce_d": v}) for v in tc.ce_d_for(shape)]
    if task is TaskKind.CI:
        return [(f"win{n}", {"wi_n": n}) for n in tc.wi_n]
    return [("", {})]


def generate_questions(config: BenchmarkConfig, task: TaskKind, lexicon: TermLexicon | None = None):
    """Yield ``(id, record, kept)`` per question of ``task`` in a fixed order; ``record`` is None when discarded."""
    tc = config.tasks[task]
    lexicon = lexicon or TermLexicon.load()
    for shape in tc.shapes:
        for iterations in config.iterations:
            for index in range(config.graphs_per_condition):
                seed = graph_seed(config.master_seed, shape, iterations, index)
                g = generate_graph(shape, iterations, config.probs, seed)
                for style in tc.name_styles:
                    for tag, kw in _conditions(task, tc, shape):
                        qid = question_id(task, shape, iterations, index, tag, style)
                        try:
                            q = build_question(
                                task, g, style, qid=qid, lexicon=lexicon,
                                max_adjust_size=config.max_adjust_size, **kw,
                            )
                        except BudgetExceeded as exc:
                            log.warning("discarding %s: %s", qid, exc)
                            yield qid, None, False
                            continue
                        kept = task not in (TaskKind.CP, TaskKind.BA) or complexity_filter(q, config.caps)
                        yield qid, q, kept


@dataclass
class BenchmarkManifest:
    config_hash: str
    config: dict
    counts: list[dict]
    stats: list[dict]
    files: dict[str, dict]
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config_hash": self.config_hash,
            "config": self.config,
            "counts": self.counts,
            "stats": self.stats,
            "files": self.files,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "BenchmarkManifest":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise RecordFormatError(f"unknown manifest schema version {data.get('schema_version')!r}")
        return cls(data["config_hash"], data["config"], data["counts"], data["stats"], data["files"])

    @classmethod
    def load(cls, bench_dir) -> "BenchmarkManifest":
        path = FsPath(bench_dir) / MANIFEST
        try:
            return cls.from_json(json.loads(path.read_text("utf-8")))
        except OSError as exc:
            raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _param_label(q: QuestionRecord) -> str:
    if q.task in (TaskKind.CP, TaskKind.BA):
        return f"ce_d={q.params['ce_d']:g}"
    if q.task is TaskKind.CI:
        return f"wi_n={q.params['wi_n']}"
    return ""


def shape_stats(task: TaskKind, records: Sequence[QuestionRecord]) -> list[dict]:
    """Mean complexity per shape over the distinct graphs among ``records``."""
    by_shape: dict[str, dict[int, QuestionRecord]] = {}
    order: list[str] = []
    for q in records:
        label = q.shape.label
        if label not in by_shape:
            by_shape[label] = {}
            order.append(label)
        by_shape[label].setdefault(q.seed, q)
    rows = []
    for label in order:
        graphs = list(by_shape[label].values())
        stats = [q.stats for q in graphs]
        rows.append({
            "task": task.value,
            "shape": label,
            "graphs": len(graphs),
            "avg_indegree": round(statistics.fmean(float(s.avg_indegree) for s in stats), 6),
            "chain_count": round(statistics.fmean(s.chain_count for s in stats), 6),
            "fork_count": round(statistics.fmean(s.fork_count for s in stats), 6),
            "collider_count": round(statistics.fmean(s.collider_count for s in stats), 6),
        })
    return rows


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def assemble(config: BenchmarkConfig, out_dir, lexicon: TermLexicon | None = None) -> BenchmarkManifest:
    """Generate, filter and write every configured task; returns the manifest."""
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lexicon = lexicon or TermLexicon.load()
    counts: list[dict] = []
    stats: list[dict] = []
    files: dict[str, dict] = {}
    for task in TaskKind:
        if task not in config.tasks:
            continue
        kept_records: list[QuestionRecord] = []
        tally: dict[tuple, list[int]] = {}
        for qid, q, kept in generate_questions(config, task, lexicon):
            if q is None:
                continue
            key = (q.shape.label, _param_label(q), q.name_style.label)
            t = tally.setdefault(key, [0, 0])
            t[0] += 1
            if kept:
                t[1] += 1
                kept_records.append(q)
        for (shape, param, style), (generated, kept) in tally.items():
            counts.append({"task": task.value, "shape": shape, "param": param, "name_style": style,
                           "generated": generated, "kept": kept})
        stats.extend(shape_stats(task, kept_records))
        name = TASK_FILES[task]
        n = write_records(out / name, kept_records)
        files[name] = {"records": n, "sha256": _sha256(out / name)}
        log.info("%s: wrote %d records", task.value, n)
    manifest = BenchmarkManifest(config.hash(), config.canonical(), counts, stats, files)
    (out / MANIFEST).write_text(dump_line(manifest.to_json()) + "\n", encoding="utf-8")
    return manifest


def load_benchmark(bench_dir, tasks: Iterable[TaskKind] | None = None) -> list[QuestionRecord]:
    bench = FsPath(bench_dir)
    manifest = BenchmarkManifest.load(bench)
    wanted = set(tasks) if tasks is not None else set(TaskKind)
    out = []
    for task in TaskKind:
        name = TASK_FILES[task]
        if task in wanted and name in manifest.files:
            out.extend(read_records(bench / name))
    return out


def find_record(bench_dir, qid: str) -> QuestionRecord:
    bench = FsPath(bench_dir)
    manifest = BenchmarkManifest.load(bench)
    task_prefix = qid.split("-", 1)[0].upper()
    names = [TASK_FILES[TaskKind(task_prefix)]] if task_prefix in TaskKind.__members__ else list(manifest.files)
    for name in names:
        if name not in manifest.files:
            continue
        for q in iter_records(bench / name):
            if q.id == qid:
                return q
    raise KeyError(qid)


def solve(q: QuestionRecord, lexicon: TermLexicon | None = None) -> QuestionRecord:
    """Rebuild a stored question from its generation parameters alone."""
    gp = q.graph.gen_params
    if gp is None:
        raise ValidationError(f"{q.id} carries no generation parameters")
    g = generate_graph(gp.shape, gp.iterations, gp.probs, gp.seed)
    kw = {}
    if q.task in (TaskKind.CP, TaskKind.BA):
        kw["ce_d"] = q.params["ce_d"]
    if q.task is TaskKind.CI:
        kw["wi_n"] = q.params["wi_n"]
    return build_question(
        q.task, g, q.name_style, qid=q.id, lexicon=lexicon,
        max_adjust_size=q.params.get("max_size", 4), **kw,
    )


def compare_records(stored: QuestionRecord, rebuilt: QuestionRecord) -> list[str]:
    problems = []
    if stored.graph != rebuilt.graph:
        problems.append("graph")
    if stored.names != rebuilt.names:
        problems.append("names")
    if (stored.scm is None) != (rebuilt.scm is None) or (stored.scm is not None and stored.scm != rebuilt.scm):
        problems.append("functions")
    if stored.ground_truth != rebuilt.ground_truth:
        problems.append("ground_truth")
    if stored.params.get("template_version") == rebuilt.params.get("template_version"):
        if stored.question_text != rebuilt.question_text:
            problems.append("question_text")
    return problems


def verify(bench_dir, lexicon: TermLexicon | None = None) -> list[str]:
    """Recompute every record and check the manifest; returns problem descriptions."""
    bench = FsPath(bench_dir)
    manifest = BenchmarkManifest.load(bench)
    lexicon = lexicon or TermLexicon.load()
    problems = []
    for name, info in manifest.files.items():
        path = bench / name
        if _sha256(path) != info["sha256"]:
            problems.append(f"{name}: checksum differs from manifest")
        records = read_records(path)
        if len(records) != info["records"]:
            problems.append(f"{name}: {len(records)} records, manifest says {info['records']}")
        task = next(t for t, f in TASK_FILES.items() if f == name)
        for row in shape_stats(task, records):
            stored = next((s for s in manifest.stats if s["task"] == row["task"] and s["shape"] == row["shape"]), None)
            if stored != row:
                problems.append(f"{name}: stats for {row['shape']} differ from manifest")
        for q in records:
            bad = compare_records(q, solve(q, lexicon))
            if bad:
                problems.append(f"{q.id}: {', '.join(bad)} differ on recomputation")
    return problems


# ---------------------------------------------------------------- reporting

STAT_COLUMNS = ("GS", "QN", "IND", "CH", "FO", "CO")


def stats_report(manifest: BenchmarkManifest) -> tuple[str, str]:
    """Per-task, per-shape complexity table as aligned text and CSV."""
    rows = [
        (s["task"], s["shape"], str(s["graphs"]), f"{s['avg_indegree']:.2f}", f"{s['chain_count']:.2f}",
         f"{s['fork_count']:.2f}", f"{s['collider_count']:.2f}")
        for s in manifest.stats
    ]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("task",) + STAT_COLUMNS)
    writer.writerows(rows)
    header = ("Task",) + STAT_COLUMNS
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n", buf.getvalue()
