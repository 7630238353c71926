"""Benchmark questions for the four tasks, with ground truth."""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Mapping, Union

from . import _random
from .errors import ContractError, ValidationError
from .graph import ComplexityStats, GraphShape, TieredDag, complexity_stats
from .naming import NameStyle
from .oracles import (
    AdjustmentGroundTruth,
    Path,
    count_causal_paths,
    enumerate_causal_paths,
    enumerate_minimal_adjustment_sets,
)
from .scm import BoolScm, evaluate_counterfactual, evaluate_factual, render_expr_words


class TaskKind(str, Enum):
    CP = "CP"
    BA = "BA"
    FI = "FI"
    CI = "CI"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CpTruth:
    pairs: tuple[tuple[int, int, tuple[Path, ...]], ...]


@dataclass(frozen=True)
class BaTruth:
    pairs: tuple[AdjustmentGroundTruth, ...]


@dataclass(frozen=True)
class StateTruth:
    states: Mapping[int, bool]

    def __eq__(self, other):
        return isinstance(other, StateTruth) and dict(self.states) == dict(other.states)


GroundTruth = Union[CpTruth, BaTruth, StateTruth]


@dataclass(frozen=True, eq=False)
class QuestionRecord:
    id: str
    task: TaskKind
    graph: TieredDag
    names: Mapping[int, str]
    name_style: NameStyle
    question_text: str
    ground_truth: GroundTruth
    params: Mapping
    stats: ComplexityStats
    scm: BoolScm | None = None

    @property
    def shape(self) -> GraphShape:
        return self.graph.shape

    @property
    def seed(self) -> int:
        return self.graph.gen_params.seed if self.graph.gen_params else self.params.get("seed", 0)

    @property
    def iterations(self) -> int | None:
        return self.graph.gen_params.iterations if self.graph.gen_params else None

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [tuple(p) for p in self.params.get("pairs", ())]

    @property
    def queries(self) -> list[int]:
        return list(self.params.get("queries", ()))


@dataclass(frozen=True)
class FilterCaps:
    max_paths_per_pair: int = 20
    max_total_paths: int = 60


# ---------------------------------------------------------------- templates

@dataclass(frozen=True)
class Template:
    version: int
    body: str

    def fill(self, **slots: str) -> str:
        def sub(m):
            key = m.group(1)
            if key not in slots:
                raise ValidationError(f"template slot {{{key}}} was not supplied")
            return slots[key]

        return re.sub(r"\{([A-Z_]+)\}", sub, self.body)


def parse_template(text: str) -> Template:
    version = None
    lines = []
    for line in text.splitlines():
        m = re.fullmatch(r"#\s*template-version:\s*(\d+)\s*", line)
        if m:
            version = int(m.group(1))
        elif not line.startswith("#"):
            lines.append(line)
    if version is None:
        raise ValidationError("template lacks a '# template-version: N' header")
    return Template(version, "\n".join(lines).strip("\n"))


@lru_cache(maxsize=None)
def load_template(name: str) -> Template:
    text = resources.files("causalbench").joinpath(f"data/templates/{name}.txt").read_text("utf-8")
    return parse_template(text)


def answer_format(task: TaskKind) -> str:
    return load_template(f"answer_{task.value.lower()}").body


# ---------------------------------------------------------------- tier choice

def select_cause_effect_tiers(shape: GraphShape, ce_d: float) -> tuple[int, int]:
    """Map a relative distance in [0, 1] onto interior tiers (cause, effect).

    The cause sits on the highest interior tier and the effect ``d`` tiers
    below it, ``d = max(1, round_half_up(ce_d * (T - 3)))``.
    """
    n_tiers = shape.n_tiers
    if n_tiers < 4:
        raise ContractError(f"cause/effect selection needs at least 2 interior tiers, shape {shape} has {n_tiers - 2}")
    if not 0 <= ce_d <= 1:
        raise ContractError(f"ce_d must lie in [0, 1], got {ce_d}")
    scaled = Decimal(str(ce_d)) * (n_tiers - 3)
    d = max(1, int(scaled.quantize(Decimal(1), rounding=ROUND_HALF_UP)))
    return 1, 1 + d


# ---------------------------------------------------------------- rendering

def _edges_text(g: TieredDag, names: Mapping[int, str]) -> str:
    return "\n".join(f"{names[u]} has a causal effect on {names[v]}." for u, v in g.edges)


def _pairs_text(pairs, names) -> str:
    return "\n".join(f"Pair {i}: from {names[x]} to {names[y]}" for i, (x, y) in enumerate(pairs, 1))


def _functions_text(scm: BoolScm, names) -> str:
    lines = []
    for v in sorted(scm.functions):
        words = render_expr_words(scm.functions[v], names.__getitem__)
        lines.append(f"{names[v]} happens if and only if {words}.")
    return "\n".join(lines)


def _state_word(state: bool) -> str:
    return "happens" if state else "does not happen"


def _observed_text(observed, names) -> str:
    return "\n".join(f"{names[v]} {_state_word(s)}." for v, s in sorted(observed.items()))


def _whatif_text(interventions, names) -> str:
    return "\n".join(
        f"What if {names[v]} had {'' if s else 'not '}happened?" for v, s in sorted(interventions.items())
    )


def _queries_text(queries, names) -> str:
    return "\n".join(f"- {names[v]}" for v in queries)


def _check_names(g: TieredDag, names: Mapping[int, str]) -> None:
    if set(names) != set(g.nodes):
        raise ContractError("names must cover exactly the graph nodes")
    if len(set(names.values())) != len(names):
        raise ContractError("node names must be distinct")


def _default_id(task: TaskKind, g: TieredDag, style: NameStyle, tag: str) -> str:
    gp = g.gen_params
    base = f"{task.value.lower()}-{g.shape.label}"
    if gp is not None:
        base += f"-i{gp.iterations}-s{gp.seed}"
    return f"{base}-{tag}-{style.label}"


# ---------------------------------------------------------------- builders

def _pairs_for(g: TieredDag, ce_d: float) -> tuple[int, int, list[tuple[int, int]]]:
    cause_tier, effect_tier = select_cause_effect_tiers(g.shape, ce_d)
    pairs = [(x, y) for x in g.tier_nodes(cause_tier) for y in g.tier_nodes(effect_tier)]
    return cause_tier, effect_tier, pairs


def build_cp_question(
    g: TieredDag, names: Mapping[int, str], ce_d: float, *, name_style: NameStyle, qid: str | None = None
) -> QuestionRecord:
    _check_names(g, names)
    cause_tier, effect_tier, pairs = _pairs_for(g, ce_d)
    truth = CpTruth(tuple((x, y, enumerate_causal_paths(g, x, y)) for x, y in pairs))
    tpl = load_template("cp")
    text = tpl.fill(EDGES=_edges_text(g, names), PAIRS=_pairs_text(pairs, names))
    params = {
        "ce_d": ce_d,
        "cause_tier": cause_tier,
        "effect_tier": effect_tier,
        "pairs": [list(p) for p in pairs],
        "template_version": tpl.version,
    }
    return QuestionRecord(
        qid or _default_id(TaskKind.CP, g, name_style, f"ced{ce_d:g}"),
        TaskKind.CP, g, dict(names), name_style, text, truth, params, complexity_stats(g),
    )


def build_ba_question(
    g: TieredDag,
    names: Mapping[int, str],
    ce_d: float,
    *,
    name_style: NameStyle,
    qid: str | None = None,
    max_size: int = 4,
    max_candidates: int = 24,
) -> QuestionRecord:
    _check_names(g, names)
    cause_tier, effect_tier, pairs = _pairs_for(g, ce_d)
    truth = BaTruth(tuple(
        enumerate_minimal_adjustment_sets(g, x, y, max_size=max_size, max_candidates=max_candidates)
        for x, y in pairs
    ))
    tpl = load_template("ba")
    text = tpl.fill(EDGES=_edges_text(g, names), PAIRS=_pairs_text(pairs, names))
    params = {
        "ce_d": ce_d,
        "cause_tier": cause_tier,
        "effect_tier": effect_tier,
        "pairs": [list(p) for p in pairs],
        "max_size": max_size,
        "template_version": tpl.version,
    }
    return QuestionRecord(
        qid or _default_id(TaskKind.BA, g, name_style, f"ced{ce_d:g}"),
        TaskKind.BA, g, dict(names), name_style, text, truth, params, complexity_stats(g),
    )


def draw_observed(scm: BoolScm, seed: int) -> dict[int, bool]:
    g = scm.graph
    top = g.tier_nodes(0)
    if g.roots() != set(top):
        raise ContractError("every root must sit in tier 0 so the observations determine the model")
    rng = _random.stream(seed, _random.OBSERVED)
    bits = rng.integers(2, size=len(top))
    return {v: bool(b) for v, b in zip(top, bits)}


def draw_interventions(scm: BoolScm, observed: Mapping[int, bool], wi_n: int, seed: int) -> dict[int, bool]:
    """``wi_n`` nodes outside the last tier, each pinned to the negation of its factual value."""
    g = scm.graph
    queries = set(g.tier_nodes(g.shape.n_tiers - 1))
    pool = [v for v in g.nodes if v not in queries]
    if not 1 <= wi_n <= len(pool):
        raise ContractError(f"wi_n={wi_n} must lie in 1..{len(pool)} for shape {g.shape}")
    rng = _random.stream(seed, _random.WHATIF, wi_n)
    chosen = sorted(pool[i] for i in rng.choice(len(pool), size=wi_n, replace=False))
    factual = evaluate_factual(scm, observed)
    return {v: not factual[v] for v in chosen}


def build_fi_question(
    scm: BoolScm,
    names: Mapping[int, str],
    seed: int,
    *,
    name_style: NameStyle,
    qid: str | None = None,
    observed: Mapping[int, bool] | None = None,
) -> QuestionRecord:
    g = scm.graph
    _check_names(g, names)
    if observed is None:
        observed = draw_observed(scm, seed)
    queries = list(g.tier_nodes(g.shape.n_tiers - 1))
    state = evaluate_factual(scm, observed)
    truth = StateTruth({q: state[q] for q in queries})
    tpl = load_template("fi")
    text = tpl.fill(
        FUNCTIONS=_functions_text(scm, names),
        OBSERVED=_observed_text(observed, names),
        QUERIES=_queries_text(queries, names),
    )
    params = {
        "observed": {str(k): v for k, v in observed.items()},
        "queries": queries,
        "seed": seed,
        "template_version": tpl.version,
    }
    return QuestionRecord(
        qid or _default_id(TaskKind.FI, g, name_style, "fi"),
        TaskKind.FI, g, dict(names), name_style, text, truth, params, complexity_stats(g), scm,
    )


def build_ci_question(
    scm: BoolScm,
    names: Mapping[int, str],
    wi_n: int,
    seed: int,
    *,
    name_style: NameStyle,
    qid: str | None = None,
    observed: Mapping[int, bool] | None = None,
    interventions: Mapping[int, bool] | None = None,
) -> QuestionRecord:
    """Counterfactual question; pass ``observed``/``interventions`` to bypass the seeded draws."""
    g = scm.graph
    _check_names(g, names)
    if observed is None:
        observed = draw_observed(scm, seed)
    if interventions is None:
        interventions = draw_interventions(scm, observed, wi_n, seed)
    elif set(interventions) & set(g.tier_nodes(g.shape.n_tiers - 1)):
        raise ContractError("what-if nodes may not be queried nodes")
    queries = list(g.tier_nodes(g.shape.n_tiers - 1))
    state = evaluate_counterfactual(scm, observed, interventions)
    truth = StateTruth({q: state[q] for q in queries})
    tpl = load_template("ci")
    text = tpl.fill(
        FUNCTIONS=_functions_text(scm, names),
        OBSERVED=_observed_text(observed, names),
        WHATIF=_whatif_text(interventions, names),
        QUERIES=_queries_text(queries, names),
    )
    params = {
        "wi_n": wi_n,
        "observed": {str(k): v for k, v in observed.items()},
        "interventions": {str(k): v for k, v in interventions.items()},
        "queries": queries,
        "seed": seed,
        "template_version": tpl.version,
    }
    return QuestionRecord(
        qid or _default_id(TaskKind.CI, g, name_style, f"win{wi_n}"),
        TaskKind.CI, g, dict(names), name_style, text, truth, params, complexity_stats(g), scm,
    )


def path_counts(q: QuestionRecord) -> list[int]:
    if isinstance(q.ground_truth, CpTruth):
        return [len(paths) for _, _, paths in q.ground_truth.pairs]
    return [count_causal_paths(q.graph, x, y) for x, y in q.pairs]


def complexity_filter(q: QuestionRecord, caps: FilterCaps = FilterCaps()) -> bool:
    """Keep a CP/BA question iff its causal-path counts stay under both caps."""
    if q.task not in (TaskKind.CP, TaskKind.BA):
        raise ContractError("the complexity filter applies to CP and BA questions only")
    counts = path_counts(q)
    return max(counts, default=0) <= caps.max_paths_per_pair and sum(counts) <= caps.max_total_paths
