"""Running prompts through a model and tabulating accuracy."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from ..errors import RecordFormatError, ValidationError
from ..prompts import ExemplarBank, PromptStyle, render_prompt
from ..questions import QuestionRecord, TaskKind
from .answers import (
    BaAnswer,
    BaMode,
    CpAnswer,
    ParseFailure,
    Reformatter,
    StateAnswer,
    Verdict,
    extract_answer,
    score,
)

DIMENSIONS = ("task", "model", "prompt", "shape", "iterations", "ce_d", "wi_n", "name_style")


@dataclass(frozen=True)
class EvalResult:
    question_id: str
    task: str
    model: str
    prompt: str
    shape: str
    iterations: int | None
    ce_d: float | None
    wi_n: int | None
    name_style: str
    verdict: str
    parsed: object
    raw: str

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: Mapping) -> "EvalResult":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def _parsed_json(answer) -> object:
    if isinstance(answer, ParseFailure):
        return None
    if isinstance(answer, CpAnswer):
        return [list(p) for p in answer.paths]
    if isinstance(answer, BaAnswer):
        return [sorted(s) for s in answer.sets]
    if isinstance(answer, StateAnswer):
        return answer.as_dict()
    return None


def evaluate_one(
    q: QuestionRecord,
    style: PromptStyle,
    model: Callable[[str], str],
    model_name: str,
    *,
    bank: ExemplarBank | None = None,
    ba_mode: BaMode = BaMode.MATCH_MINIMAL,
    reformat: Reformatter | None = None,
) -> EvalResult:
    raw = model(render_prompt(q, style, bank))
    answer = extract_answer(raw, q.task, reformat)
    verdict = score(answer, q, ba_mode)
    return EvalResult(
        question_id=q.id,
        task=TaskKind(q.task).value,
        model=model_name,
        prompt=style.label,
        shape=q.shape.label,
        iterations=q.iterations,
        ce_d=q.params.get("ce_d"),
        wi_n=q.params.get("wi_n"),
        name_style=q.name_style.label,
        verdict=verdict.value,
        parsed=_parsed_json(answer),
        raw=raw,
    )


def run_eval(
    records: Sequence[QuestionRecord],
    styles: Sequence[PromptStyle],
    model: Callable[[str], str],
    model_name: str,
    *,
    bank: ExemplarBank | None = None,
    ba_mode: BaMode = BaMode.MATCH_MINIMAL,
    reformat: Reformatter | None = None,
    workers: int = 4,
) -> list[EvalResult]:
    """Evaluate every (record, style) pair; results come back in input order."""
    bank = bank or ExemplarBank.load()
    jobs = [(q, s) for q in records for s in styles]

    def one(job):
        q, s = job
        return evaluate_one(q, s, model, model_name, bank=bank, ba_mode=ba_mode, reformat=reformat)

    if workers <= 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))


def write_results(path, results: Iterable[EvalResult]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(r.to_json(), sort_keys=True, separators=(",", ":")) + "\n")
            n += 1
    return n


def read_results(path) -> list[EvalResult]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(EvalResult.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise RecordFormatError(f"bad result record: {exc}", line=lineno) from exc
    return out


# ---------------------------------------------------------------- aggregation

@dataclass(frozen=True)
class Cell:
    key: tuple
    total: int
    correct: int
    unparsed: int

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.total

    @property
    def unparsed_rate(self) -> float:
        return 100.0 * self.unparsed / self.total


@dataclass(frozen=True)
class AccuracyTable:
    dims: tuple[str, ...]
    cells: tuple[Cell, ...]

    @property
    def macro_average(self) -> float:
        """Mean of the cell accuracies."""
        return sum(c.accuracy for c in self.cells) / len(self.cells) if self.cells else 0.0

    @property
    def micro_average(self) -> float:
        """Accuracy over all results pooled."""
        total = sum(c.total for c in self.cells)
        return 100.0 * sum(c.correct for c in self.cells) / total if total else 0.0

    def _rows(self) -> list[list[str]]:
        rows = []
        for c in self.cells:
            rows.append([_fmt(v) for v in c.key] + [str(c.total), f"{c.accuracy:.2f}", f"{c.unparsed_rate:.2f}"])
        return rows

    @property
    def header(self) -> list[str]:
        return list(self.dims) + ["n", "accuracy", "unparsed"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self._rows())
        blank = [""] * (len(self.dims) - 1)
        w.writerow(["macro-average"] + blank + ["", f"{self.macro_average:.2f}", ""])
        w.writerow(["micro-average"] + blank + ["", f"{self.micro_average:.2f}", ""])
        return buf.getvalue()

    def to_text(self) -> str:
        rows = self._rows()
        header = self.header
        widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
        line = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
        out = [line(header), line(["-" * w for w in widths])]
        out += [line(r) for r in rows]
        out.append(f"macro-average accuracy: {self.macro_average:.2f}")
        out.append(f"micro-average accuracy: {self.micro_average:.2f}")
        return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def _sort_key(key: tuple) -> tuple:
    return tuple((2, 0, "") if v is None else (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v)) for v in key)


def aggregate(results: Iterable[EvalResult], dims: Sequence[str]) -> AccuracyTable:
    """Accuracy per combination of ``dims``; unparsed answers count as incorrect."""
    dims = tuple(dims)
    unknown = [d for d in dims if d not in DIMENSIONS]
    if unknown:
        raise ValidationError(f"unknown dimension(s) {unknown}; choose from {list(DIMENSIONS)}")
    tally: dict[tuple, list[int]] = {}
    for r in results:
        key = tuple(getattr(r, d) for d in dims)
        t = tally.setdefault(key, [0, 0, 0])
        t[0] += 1
        t[1] += r.verdict == Verdict.CORRECT.value
        t[2] += r.verdict == Verdict.UNPARSED.value
    cells = tuple(Cell(k, *tally[k]) for k in sorted(tally, key=_sort_key))
    return AccuracyTable(dims, cells)


def load_results(paths: Iterable) -> list[EvalResult]:
    out = []
    for p in paths:
        out.extend(read_results(Path(p)))
    return out
