"""Prompt rendering: zero-shot, in-context, chain-of-thought and mistake hints."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path as FsPath
from typing import Mapping

import yaml

from .errors import ContractError, ValidationError
from .graph import GraphShape, TieredDag
from .naming import RANDOM_ONLY
from .questions import (
    QuestionRecord,
    TaskKind,
    answer_format,
    build_ba_question,
    build_ci_question,
    build_cp_question,
    build_fi_question,
)
from .scm import BoolScm, parse_expr

EXEMPLAR_NAME = re.compile(r"[a-z]{4,7}")
_KINDS = ("zero", "icl", "cot", "hint")


@dataclass(frozen=True)
class PromptStyle:
    kind: str  # "zero" | "icl" | "cot" | "hint"
    shots: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown prompt kind {self.kind!r}")
        allowed = {"zero": (0,), "hint": (0,), "icl": (1, 2), "cot": (0, 1, 2)}[self.kind]
        if self.shots not in allowed:
            raise ValidationError(f"{self.kind} prompts take {allowed} exemplars, not {self.shots}")

    @property
    def label(self) -> str:
        if self.kind == "zero":
            return "zero-shot"
        if self.kind == "hint":
            return "mistake-hint"
        return f"{self.kind}-{self.shots}"

    @classmethod
    def parse(cls, text: str) -> "PromptStyle":
        t = text.strip().lower()
        if t in ("zero", "zero-shot", "0-shot"):
            return cls("zero")
        if t in ("hint", "mistake-hint", "mis-hint"):
            return cls("hint")
        m = re.fullmatch(r"(icl|cot)-?(\d)", t) or re.fullmatch(r"(\d)-(shot|cot)", t)
        if m and m.group(1).isdigit():
            kind = "icl" if m.group(2) == "shot" else "cot"
            return cls(kind, int(m.group(1)))
        if m:
            return cls(m.group(1), int(m.group(2)))
        raise ValidationError(f"unknown prompt style {text!r}")

    def __str__(self):
        return self.label


ZERO_SHOT = PromptStyle("zero")
ALL_STYLES = (
    ZERO_SHOT,
    PromptStyle("icl", 1),
    PromptStyle("icl", 2),
    PromptStyle("cot", 0),
    PromptStyle("cot", 1),
    PromptStyle("cot", 2),
    PromptStyle("hint"),
)


@dataclass(frozen=True)
class Exemplar:
    record: QuestionRecord
    reasoning: str
    answer: str  # answer lines without the ANSWER: marker

    @property
    def names(self) -> set[str]:
        return set(self.record.names.values())


@dataclass(frozen=True)
class ExemplarBank:
    exemplars: Mapping[TaskKind, tuple[Exemplar, ...]]
    hints: Mapping[TaskKind, str]
    cot_elicitation: str

    def for_task(self, task: TaskKind, k: int) -> tuple[Exemplar, ...]:
        pool = self.exemplars.get(TaskKind(task), ())
        if k > len(pool):
            raise ContractError(f"bank holds {len(pool)} {task} exemplars, {k} requested")
        return pool[:k]

    @classmethod
    def parse(cls, text: str) -> "ExemplarBank":
        data = yaml.safe_load(text)
        if not isinstance(data, dict) or data.get("version") != 1:
            raise ValidationError("exemplar bank must be a mapping with version: 1")
        hints = {TaskKind(k): " ".join(str(v).split()) for k, v in (data.get("hints") or {}).items()}
        exemplars = {}
        for task in TaskKind:
            entries = data.get(task.value) or []
            exemplars[task] = tuple(_load_exemplar(task, e, i) for i, e in enumerate(entries, 1))
        missing = [t.value for t in TaskKind if t not in hints]
        if missing:
            raise ValidationError(f"exemplar bank lacks hints for {missing}")
        return cls(exemplars, hints, str(data.get("cot_elicitation", "")).strip())

    @classmethod
    def load(cls, path: str | FsPath | None = None) -> "ExemplarBank":
        if path is None:
            return _bundled_bank()
        return cls.parse(FsPath(path).read_text("utf-8"))


@lru_cache(maxsize=1)
def _bundled_bank() -> ExemplarBank:
    return ExemplarBank.parse(resources.files("causalbench").joinpath("data/exemplars.yaml").read_text("utf-8"))


def _load_exemplar(task: TaskKind, entry: Mapping, index: int) -> Exemplar:
    where = f"{task.value} exemplar {index}"
    try:
        tiers = [list(t) for t in entry["tiers"]]
        names = [n for t in tiers for n in t]
        for n in names:
            if not EXEMPLAR_NAME.fullmatch(n):
                raise ValidationError(f"{where}: name {n!r} must be 4-7 lowercase letters")
        if len(set(names)) != len(names):
            raise ValidationError(f"{where}: duplicate names")
        ids = {n: i for i, n in enumerate(names)}
        edges = []
        for e in entry["edges"]:
            a, _, b = (s.strip() for s in e.partition("->"))
            edges.append((ids[a], ids[b]))
        g = TieredDag.from_edges(GraphShape(tuple(len(t) for t in tiers)), edges)
        by_id = dict(enumerate(names))
        if task in (TaskKind.CP, TaskKind.BA):
            build = build_cp_question if task is TaskKind.CP else build_ba_question
            q = build(g, by_id, float(entry["ce_d"]), name_style=RANDOM_ONLY, qid=f"exemplar-{task.value}-{index}")
        else:
            scm = BoolScm(g, {ids[n]: parse_expr(str(t), ids) for n, t in entry["functions"].items()})
            observed = {ids[n]: bool(s) for n, s in entry["observed"].items()}
            qid = f"exemplar-{task.value}-{index}"
            if task is TaskKind.FI:
                q = build_fi_question(scm, by_id, 0, name_style=RANDOM_ONLY, qid=qid, observed=observed)
            else:
                whatif = {ids[n]: bool(s) for n, s in entry["whatif"].items()}
                q = build_ci_question(
                    scm, by_id, len(whatif), 0, name_style=RANDOM_ONLY, qid=qid,
                    observed=observed, interventions=whatif,
                )
        reasoning = str(entry["reasoning"]).strip()
        answer = str(entry["answer"]).strip()
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{where}: missing or malformed field {exc}") from exc

    from .evaluation.answers import Verdict, extract_answer, score

    verdict = score(extract_answer("ANSWER:\n" + answer, task), q)
    if verdict is not Verdict.CORRECT:
        raise ValidationError(f"{where}: stated answer is {verdict.value} according to the oracles")
    return Exemplar(q, reasoning, answer)


def _check_collisions(q: QuestionRecord, exemplars) -> None:
    target = {n.casefold() for n in q.names.values()}
    for ex in exemplars:
        clash = target & {n.casefold() for n in ex.names}
        if clash:
            raise ContractError(f"exemplar names {sorted(clash)} collide with question {q.id}")


def render_prompt(q: QuestionRecord, style: PromptStyle, bank: ExemplarBank | None = None) -> str:
    """Full prompt text; the target question always sits between ``### Question`` and ``### Answer format``."""
    bank = bank or ExemplarBank.load()
    task = TaskKind(q.task)
    blocks = []
    if style.kind == "hint":
        blocks.append("### Caution\n" + bank.hints[task])
    shots = bank.for_task(task, style.shots) if style.kind in ("icl", "cot") else ()
    _check_collisions(q, shots)
    for i, ex in enumerate(shots, 1):
        solution = f"ANSWER:\n{ex.answer}"
        if style.kind == "cot":
            solution = f"{ex.reasoning}\n{solution}"
        blocks.append(f"### Example {i}\n{ex.record.question_text}\n\n### Example {i} solution\n{solution}")
    blocks.append("### Question\n" + q.question_text)
    fmt = answer_format(task)
    if style.kind == "cot" and style.shots == 0:
        fmt = f"{bank.cot_elicitation}\n{fmt}"
    blocks.append("### Answer format\n" + fmt)
    return "\n\n".join(blocks)


def question_from_prompt(prompt: str) -> str:
    """Recover the target question text from a rendered prompt."""
    start = prompt.rfind("### Question\n")
    end = prompt.find("\n\n### Answer format", start)
    if start < 0 or end < 0:
        raise ContractError("prompt lacks the question and answer-format sections")
    return prompt[start + len("### Question\n"):end]
