import re

import numpy as np
import pytest

from causalbench.errors import ValidationError
from causalbench.graph import JunctionProbabilities, generate_graph
from causalbench.naming import (
    RANDOM_ONLY,
    TOKEN_LENGTHS,
    NameStyle,
    TermLexicon,
    assign_names,
    random_token,
    random_tokens,
)

G = generate_graph([1, 1, 1], 0, JunctionProbabilities(), 5)


def test_reference_token_length_in_range():
    lo, hi = TOKEN_LENGTHS
    assert lo <= len("thepxexqaac") <= hi


def test_same_stream_same_token():
    a = random_token(np.random.default_rng(3))
    b = random_token(np.random.default_rng(3))
    assert a == b and re.fullmatch(r"[a-z]{8,11}", a)


def test_many_tokens_unique():
    toks = random_tokens(99, 10_000)
    assert len(set(toks)) == 10_000
    assert all(re.fullmatch(r"[a-z]{8,11}", t) for t in toks)


def test_random_only_three_nodes():
    names = assign_names(G, RANDOM_ONLY, None, 1)
    assert len(set(names.values())) == 3
    assert all(re.fullmatch(r"[a-z]+", n) for n in names.values())


def test_plain_term_form():
    names = assign_names(G, NameStyle("plain", "chemistry"), TermLexicon.load(), 1)
    chem = TermLexicon.load().terms["chemistry"]
    for n in names.values():
        token, term = n.split(" ", 1)
        assert re.fullmatch(r"[a-z]{8,11}", token) and term in chem


def test_change_term_form():
    lex = TermLexicon.load()
    names = assign_names(G, NameStyle("change", "biology"), lex, 1)
    for n in names.values():
        m = re.fullmatch(r"(increase of|decrease of) ([a-z]{8,11}) (.+)", n)
        assert m and m.group(3) in lex.terms["biology"]


def test_styles_share_tokens():
    lex = TermLexicon.load()
    plain = assign_names(G, RANDOM_ONLY, lex, 4)
    term = assign_names(G, NameStyle("plain", "physics"), lex, 4)
    assert all(term[v].startswith(plain[v] + " ") for v in plain)


def test_bundled_lexicon_subjects():
    lex = TermLexicon.load()
    assert set(lex.terms) == {"biology", "chemistry", "economics", "physics"}
    assert all(len(ts) >= 15 for ts in lex.terms.values())


def test_small_pool_rejected():
    lex = TermLexicon({"tiny": ("cell",)}, ("increase of",))
    with pytest.raises(ValidationError):
        assign_names(G, NameStyle("plain", "tiny"), lex, 0)


@pytest.mark.parametrize("text", ["[x]\nBad Word\n[change indicators]\nup", "[x]\ncell and wall\n[change indicators]\nup"])
def test_lexicon_validation(text):
    with pytest.raises(ValidationError):
        TermLexicon.parse(text)


def test_style_parse():
    assert NameStyle.parse("change:physics") == NameStyle("change", "physics")
    assert NameStyle.parse("random") is not None
    with pytest.raises(ValidationError):
        NameStyle.parse("plain")
    with pytest.raises(ValidationError):
        NameStyle.parse("fancy:biology")
