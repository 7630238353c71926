"""Parsing model completions and scoring them against ground truth."""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Union

from ..errors import ContractError
from ..oracles import is_valid_adjustment_set
from ..questions import BaTruth, CpTruth, QuestionRecord, StateTruth, TaskKind


@dataclass(frozen=True)
class CpAnswer:
    paths: tuple[tuple[str, ...], ...]  # normalized names; empty means "none"


@dataclass(frozen=True)
class BaAnswer:
    sets: tuple[frozenset[str], ...]  # one per pair, in listed order


@dataclass(frozen=True)
class StateAnswer:
    states: tuple[tuple[str, bool], ...]

    def as_dict(self) -> dict[str, bool]:
        return dict(self.states)


@dataclass(frozen=True)
class ParseFailure:
    reason: str


ParsedAnswer = Union[CpAnswer, BaAnswer, StateAnswer]
Extraction = Union[CpAnswer, BaAnswer, StateAnswer, ParseFailure]

# A secondary extractor gets the raw completion and returns a reformatted one.
Reformatter = Callable[[str, TaskKind], str]


class BaMode(str, Enum):
    MATCH_MINIMAL = "match-minimal"
    VALIDITY_CHECK = "validity-check"


class Verdict(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    UNPARSED = "unparsed"


def normalize_name(text: str) -> str:
    return " ".join(text.split()).casefold()


_ANSWER_MARK = re.compile(r"^[\s*_#`>]*answer\s*[*_`]*\s*:[*_`]*", re.IGNORECASE | re.MULTILINE)
_ARROW = re.compile(r"\s*(?:->|→)\s*")
_DECOR = "*_`"


def _answer_lines(raw: str) -> list[str] | ParseFailure:
    marks = list(_ANSWER_MARK.finditer(raw))
    if not marks:
        return ParseFailure("no ANSWER: marker")
    body = raw[marks[-1].end():]
    lines = []
    for line in body.splitlines():
        line = line.strip().strip(_DECOR).strip()
        if line.startswith("- "):
            line = line[2:].strip()
        if not line or line.startswith("```"):
            continue
        lines.append(line)
    if not lines:
        return ParseFailure("empty ANSWER block")
    return lines


def _parse_cp(lines: list[str]) -> Extraction:
    if len(lines) == 1 and normalize_name(lines[0].rstrip(".")) == "none":
        return CpAnswer(())
    paths = []
    for line in lines:
        m = re.fullmatch(r"path\s*:\s*(.+)", line, re.IGNORECASE)
        if not m:
            return ParseFailure(f"not a path line: {line!r}")
        names = tuple(normalize_name(n) for n in _ARROW.split(m.group(1).strip().rstrip(".")))
        if len(names) < 2 or not all(names):
            return ParseFailure(f"malformed path: {line!r}")
        paths.append(names)
    return CpAnswer(tuple(paths))


def _parse_ba(lines: list[str]) -> Extraction:
    sets = []
    for line in lines:
        m = re.fullmatch(r"adjust\s*:\s*\{(.*)\}\.?", line, re.IGNORECASE)
        if not m:
            return ParseFailure(f"not an adjust line: {line!r}")
        inner = m.group(1).strip()
        names = [normalize_name(n) for n in inner.split(",")] if inner else []
        if any(not n for n in names):
            return ParseFailure(f"empty name in {line!r}")
        sets.append(frozenset(names))
    return BaAnswer(tuple(sets))


def _parse_states(lines: list[str]) -> Extraction:
    states: dict[str, bool] = {}
    for line in lines:
        name, sep, verdict = line.rpartition(":")
        if not sep:
            return ParseFailure(f"not a state line: {line!r}")
        verdict = normalize_name(verdict.rstrip("."))
        if verdict in ("happens", "happen"):
            value = True
        elif verdict in ("does not happen", "doesn't happen", "not happen"):
            value = False
        else:
            return ParseFailure(f"unknown state {verdict!r}")
        key = normalize_name(name)
        if not key:
            return ParseFailure(f"missing event name in {line!r}")
        if states.get(key, value) != value:
            return ParseFailure(f"conflicting states for {key!r}")
        states[key] = value
    return StateAnswer(tuple(states.items()))


_PARSERS = {TaskKind.CP: _parse_cp, TaskKind.BA: _parse_ba, TaskKind.FI: _parse_states, TaskKind.CI: _parse_states}


def _extract_once(raw: str, task: TaskKind) -> Extraction:
    lines = _answer_lines(raw)
    if isinstance(lines, ParseFailure):
        return lines
    return _PARSERS[TaskKind(task)](lines)


def extract_answer(raw: str, task: TaskKind, reformat: Reformatter | None = None) -> Extraction:
    """Parse the last ``ANSWER:`` block of a completion.

    When parsing fails and ``reformat`` is given, the completion is handed to
    it (typically a second model asked to restate the answer in the required
    format) and the result is parsed once more.
    """
    out = _extract_once(raw, task)
    if isinstance(out, ParseFailure) and reformat is not None:
        retry = _extract_once(reformat(raw, TaskKind(task)), task)
        if not isinstance(retry, ParseFailure):
            return retry
    return out


def _name_lookup(q: QuestionRecord) -> dict[str, int]:
    return {normalize_name(n): v for v, n in q.names.items()}


def _ids(names, lookup) -> tuple[int, ...] | None:
    try:
        return tuple(lookup[n] for n in names)
    except KeyError:
        return None


def score(answer: Extraction, q: QuestionRecord, ba_mode: BaMode = BaMode.MATCH_MINIMAL) -> Verdict:
    """Grade a parsed answer against the record's ground truth."""
    if isinstance(answer, ParseFailure):
        return Verdict.UNPARSED
    lookup = _name_lookup(q)
    truth = q.ground_truth
    ok: bool
    if isinstance(truth, CpTruth):
        if not isinstance(answer, CpAnswer):
            raise ContractError("CP questions need a CpAnswer")
        got = set()
        for names in answer.paths:
            ids = _ids(names, lookup)
            if ids is None:
                return Verdict.INCORRECT
            got.add(ids)
        expected = {p.nodes for _, _, paths in truth.pairs for p in paths}
        ok = got == expected
    elif isinstance(truth, BaTruth):
        if not isinstance(answer, BaAnswer):
            raise ContractError("BA questions need a BaAnswer")
        if len(answer.sets) != len(truth.pairs):
            return Verdict.INCORRECT
        ok = True
        for names, gt in zip(answer.sets, truth.pairs):
            ids = _ids(sorted(names), lookup)
            if ids is None:
                return Verdict.INCORRECT
            z = frozenset(ids)
            if ba_mode is BaMode.MATCH_MINIMAL:
                ok = z in gt.minimal_sets
            else:
                ok = gt.treatment not in z and gt.outcome not in z and is_valid_adjustment_set(
                    q.graph, gt.treatment, gt.outcome, z
                )
            if not ok:
                break
    elif isinstance(truth, StateTruth):
        if not isinstance(answer, StateAnswer):
            raise ContractError("FI/CI questions need a StateAnswer")
        given = answer.as_dict()
        ok = all(given.get(normalize_name(q.names[v])) == s for v, s in truth.states.items())
    else:
        raise ContractError(f"unknown ground truth type {type(truth).__name__}")
    return Verdict.CORRECT if ok else Verdict.INCORRECT


def render_answer(q: QuestionRecord) -> str:
    """The ground truth written in the answer grammar, ``ANSWER:`` line included."""
    truth = q.ground_truth
    name = q.names.__getitem__
    if isinstance(truth, CpTruth):
        lines = [f"path: {p.render(name)}" for _, _, paths in truth.pairs for p in paths] or ["none"]
    elif isinstance(truth, BaTruth):
        lines = []
        for gt in truth.pairs:
            # the first minimal set in size-then-lexicographic order
            z = min(gt.minimal_sets, key=lambda s: (len(s), sorted(s))) if gt.minimal_sets else None
            if z is None:
                raise ContractError(f"no adjustment set within the size cap for pair {gt.treatment}->{gt.outcome}")
            lines.append("adjust: {" + ", ".join(name(v) for v in sorted(z)) + "}")
    else:
        lines = [f"{name(v)}: {'happens' if s else 'does not happen'}" for v, s in truth.states.items()]
    return "ANSWER:\n" + "\n".join(lines)
