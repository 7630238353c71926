"""Unseen node names: random tokens, optionally decorated with subject terms.

The token stream for a scenario does not depend on the name style, so the
random-only, plain-term and change-term variants of one scenario share their
tokens and differ only in the added words.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from . import _random
from .errors import ValidationError
from .graph import TieredDag

SUBJECTS = ("biology", "chemistry", "economics", "physics")
TOKEN_LENGTHS = (8, 11)
_RESERVED = {"and", "or", "not", "happens", "happen", "does"}

_TOKEN_STREAM, _TERM_STREAM, _INDICATOR_STREAM = 0, 1, 2


@dataclass(frozen=True)
class NameStyle:
    kind: str  # "random" | "plain" | "change"
    subject: str | None = None

    def __post_init__(self):
        if self.kind not in ("random", "plain", "change"):
            raise ValidationError(f"unknown name style {self.kind!r}")
        if (self.kind == "random") != (self.subject is None):
            raise ValidationError("a subject is required for term styles and forbidden for random names")

    @classmethod
    def parse(cls, text: str) -> "NameStyle":
        kind, _, subject = text.strip().partition(":")
        return cls(kind, subject or None)

    @property
    def label(self) -> str:
        return self.kind if self.subject is None else f"{self.kind}:{self.subject}"

    def __str__(self):
        return self.label


RANDOM_ONLY = NameStyle("random")


@dataclass(frozen=True)
class TermLexicon:
    terms: Mapping[str, tuple[str, ...]]
    change_indicators: tuple[str, ...]

    def __post_init__(self):
        if not self.change_indicators:
            raise ValidationError("the lexicon needs at least one change indicator")
        for subject, words in list(self.terms.items()) + [("change indicators", self.change_indicators)]:
            if not words:
                raise ValidationError(f"empty term list for {subject!r}")
            for w in words:
                if w != w.lower() or not re.fullmatch(r"[a-z]+( [a-z]+)*", w):
                    raise ValidationError(f"term {w!r} must be lowercase words")
                if _RESERVED & set(w.split()):
                    raise ValidationError(f"term {w!r} uses a reserved word")

    @classmethod
    def parse(cls, text: str) -> "TermLexicon":
        sections: dict[str, list[str]] = {}
        current = None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            m = re.fullmatch(r"\[([a-z ]+)\]", line)
            if m:
                current = m.group(1)
                sections.setdefault(current, [])
            elif current is None:
                raise ValidationError(f"lexicon line {lineno}: term outside a section")
            else:
                sections[current].append(line)
        indicators = tuple(sections.pop("change indicators", ()))
        return cls({k: tuple(v) for k, v in sections.items()}, indicators)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "TermLexicon":
        if path is None:
            text = resources.files("causalbench").joinpath("data/lexicon.txt").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return cls.parse(text)


def random_token(rng: np.random.Generator, lengths: tuple[int, int] = TOKEN_LENGTHS) -> str:
    length = int(rng.integers(lengths[0], lengths[1] + 1))
    return "".join(chr(97 + int(c)) for c in rng.integers(26, size=length))


def random_tokens(seed: int, count: int) -> list[str]:
    """``count`` distinct tokens from the scenario's token stream."""
    rng = _random.stream(seed, _random.NAMES, _TOKEN_STREAM)
    seen: set[str] = set()
    out: list[str] = []
    while len(out) < count:
        tok = random_token(rng)
        if tok not in seen:
            seen.add(tok)
            out.append(tok)
    return out


def assign_names(g: TieredDag, style: NameStyle, lexicon: TermLexicon | None, seed: int) -> dict[int, str]:
    n = g.n_nodes
    tokens = random_tokens(seed, n)
    if style.kind == "random":
        return dict(enumerate(tokens))
    if lexicon is None:
        raise ValidationError("term styles need a lexicon")
    pool = lexicon.terms.get(style.subject)
    if pool is None:
        raise ValidationError(f"lexicon has no subject {style.subject!r}")
    if len(pool) < n:
        raise ValidationError(f"{len(pool)} {style.subject} terms cannot name {n} nodes")
    term_rng = _random.stream(seed, _random.NAMES, _TERM_STREAM)
    terms = [pool[i] for i in term_rng.choice(len(pool), size=n, replace=False)]
    if style.kind == "plain":
        return {v: f"{tokens[v]} {terms[v]}" for v in range(n)}
    ind_rng = _random.stream(seed, _random.NAMES, _INDICATOR_STREAM)
    picks = ind_rng.integers(len(lexicon.change_indicators), size=n)
    return {v: f"{lexicon.change_indicators[picks[v]]} {tokens[v]} {terms[v]}" for v in range(n)}
