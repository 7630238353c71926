import re

import pytest

from causalbench.errors import ContractError, ValidationError
from causalbench.evaluation.answers import Verdict, extract_answer, score
from causalbench.prompts import (
    ALL_STYLES,
    ZERO_SHOT,
    ExemplarBank,
    PromptStyle,
    question_from_prompt,
    render_prompt,
)
from causalbench.questions import TaskKind, answer_format


@pytest.fixture(scope="module")
def bank():
    return ExemplarBank.load()


def one_per_task(records):
    seen = {}
    for q in records:
        seen.setdefault(q.task, q)
    return list(seen.values())


def test_bank_has_two_per_task(bank):
    for task in TaskKind:
        assert len(bank.exemplars[task]) == 2
        assert bank.hints[task]


def test_bank_answers_reverify(bank):
    for task in TaskKind:
        for ex in bank.exemplars[task]:
            assert score(extract_answer("ANSWER:\n" + ex.answer, task), ex.record) is Verdict.CORRECT


def test_bank_rejects_wrong_answer(bank):
    text = """
version: 1
hints: {CP: a, BA: b, FI: c, CI: d}
FI:
  - tiers: [[lorn], [mavik]]
    edges: [lorn -> mavik]
    functions: {mavik: not lorn}
    observed: {lorn: true}
    reasoning: wrong on purpose
    answer: "mavik: happens"
"""
    with pytest.raises(ValidationError, match="incorrect"):
        ExemplarBank.parse(text)


def test_bank_rejects_long_names():
    text = """
version: 1
hints: {CP: a, BA: b, FI: c, CI: d}
FI:
  - tiers: [[abcdefgh], [mavik]]
    edges: [abcdefgh -> mavik]
    functions: {mavik: abcdefgh}
    observed: {abcdefgh: true}
    reasoning: x
    answer: "mavik: happens"
"""
    with pytest.raises(ValidationError, match="4-7"):
        ExemplarBank.parse(text)


def test_zero_shot_layout(small_records, bank):
    q = small_records[0]
    p = render_prompt(q, ZERO_SHOT, bank)
    assert p == f"### Question\n{q.question_text}\n\n### Answer format\n{answer_format(q.task)}"


def test_icl2_has_two_examples(small_records, bank):
    for q in one_per_task(small_records):
        p = render_prompt(q, PromptStyle("icl", 2), bank)
        assert len(re.findall(r"^### Example \d+\n", p, re.M)) == 2
        assert p.index("### Example 2") < p.index("### Question")
        assert bank.exemplars[q.task][0].reasoning not in p


def test_cot0_has_elicitation_and_no_examples(small_records, bank):
    q = small_records[0]
    p = render_prompt(q, PromptStyle("cot", 0), bank)
    assert bank.cot_elicitation in p and "### Example" not in p


def test_cot_includes_reasoning(small_records, bank):
    for q in one_per_task(small_records):
        p = render_prompt(q, PromptStyle("cot", 2), bank)
        for ex in bank.exemplars[q.task]:
            assert ex.reasoning in p


def test_hint_block(small_records, bank):
    for q in one_per_task(small_records):
        p = render_prompt(q, PromptStyle("hint"), bank)
        assert p.startswith("### Caution\n" + bank.hints[q.task])


def test_lengths_monotone_and_format_last(small_records, bank):
    for q in one_per_task(small_records):
        z, i1, i2 = (len(render_prompt(q, s, bank)) for s in (ZERO_SHOT, PromptStyle("icl", 1), PromptStyle("icl", 2)))
        assert i2 > i1 > z
        for style in ALL_STYLES:
            p = render_prompt(q, style, bank)
            assert p.endswith(answer_format(q.task))
            assert question_from_prompt(p) == q.question_text


def test_name_collision_detected(small_records, bank):
    from dataclasses import replace

    q = next(q for q in small_records if q.task is TaskKind.FI)
    clash = dict(q.names)
    clash[0] = "lorn"
    with pytest.raises(ContractError):
        render_prompt(replace(q, names=clash), PromptStyle("icl", 1), bank)


@pytest.mark.parametrize("text,label", [
    ("zero-shot", "zero-shot"), ("0-shot", "zero-shot"), ("icl1", "icl-1"), ("2-shot", "icl-2"),
    ("cot0", "cot-0"), ("1-cot", "cot-1"), ("mis-hint", "mistake-hint"),
])
def test_style_parse(text, label):
    assert PromptStyle.parse(text).label == label


@pytest.mark.parametrize("text", ["icl0", "icl3", "cot5", "fancy"])
def test_style_rejects(text):
    with pytest.raises(ValidationError):
        PromptStyle.parse(text)


def test_question_from_prompt_requires_sections():
    with pytest.raises(ContractError):
        question_from_prompt("no sections here")
