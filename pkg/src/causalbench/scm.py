"""Deterministic boolean structural causal models.

Expressions render to a small text grammar::

    NAME | not NAME | (E and E) | (E or E)

Names may contain spaces but never the words ``and``, ``or`` or ``not``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from . import _random
from .errors import ContractError, ValidationError
from .graph import TieredDag


@dataclass(frozen=True)
class Leaf:
    node: int
    negated: bool = False


@dataclass(frozen=True)
class Op:
    op: str  # "and" | "or"
    left: "BoolExpr"
    right: "BoolExpr"

    def __post_init__(self):
        if self.op not in ("and", "or"):
            raise ValidationError(f"unknown operator {self.op!r}")


BoolExpr = Union[Leaf, Op]
Assignment = dict[int, bool]


def leaves(expr: BoolExpr) -> list[Leaf]:
    if isinstance(expr, Leaf):
        return [expr]
    return leaves(expr.left) + leaves(expr.right)


def evaluate_expr(expr: BoolExpr, state: Mapping[int, bool]) -> bool:
    if isinstance(expr, Leaf):
        return state[expr.node] != expr.negated
    if expr.op == "and":
        return evaluate_expr(expr.left, state) and evaluate_expr(expr.right, state)
    return evaluate_expr(expr.left, state) or evaluate_expr(expr.right, state)


def render_expr(expr: BoolExpr, name: Callable[[int], str] = str) -> str:
    if isinstance(expr, Leaf):
        return f"not {name(expr.node)}" if expr.negated else name(expr.node)
    return f"({render_expr(expr.left, name)} {expr.op} {render_expr(expr.right, name)})"


def render_expr_words(expr: BoolExpr, name: Callable[[int], str] = str) -> str:
    """Prose form used in question text: ``(A happens or B does not happen)``."""
    if isinstance(expr, Leaf):
        return f"{name(expr.node)} {'does not happen' if expr.negated else 'happens'}"
    return f"({render_expr_words(expr.left, name)} {expr.op} {render_expr_words(expr.right, name)})"


_TOKEN = re.compile(r"\(|\)|[^()\s]+")
_KEYWORDS = {"and", "or", "not"}


def parse_expr(text: str, lookup: Mapping[str, int]) -> BoolExpr:
    """Inverse of :func:`render_expr`; ``lookup`` maps rendered names to node ids."""
    raw = _TOKEN.findall(text)
    tokens: list[str] = []
    words: list[str] = []
    for tok in raw + [")"]:
        if tok in _KEYWORDS or tok in "()":
            if words:
                tokens.append(" ".join(words))
                words = []
            tokens.append(tok)
        else:
            words.append(tok)
    tokens.pop()  # sentinel
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValidationError(f"malformed expression {text!r}")
        pos += 1
        return tok

    def leaf() -> Leaf:
        negated = peek() == "not"
        if negated:
            take()
        tok = take()
        if tok in _KEYWORDS or tok in "()":
            raise ValidationError(f"malformed expression {text!r}")
        if tok not in lookup:
            raise ValidationError(f"unknown name {tok!r} in expression")
        return Leaf(lookup[tok], negated)

    def expr() -> BoolExpr:
        if peek() == "(":
            take("(")
            left = expr()
            op = take()
            if op not in ("and", "or"):
                raise ValidationError(f"malformed expression {text!r}")
            right = expr()
            take(")")
            return Op(op, left, right)
        return leaf()

    out = expr()
    if pos != len(tokens):
        raise ValidationError(f"trailing input in expression {text!r}")
    return out


@dataclass(frozen=True, eq=False)
class BoolScm:
    graph: TieredDag
    functions: Mapping[int, BoolExpr]

    def __post_init__(self):
        g = self.graph
        non_roots = {v for v in g.nodes if g.indegree(v)}
        if set(self.functions) != non_roots:
            raise ValidationError("functions must be defined for exactly the non-root nodes")
        for v, expr in self.functions.items():
            refs = [lf.node for lf in leaves(expr)]
            if sorted(refs) != sorted(g.parents(v)):
                raise ValidationError(f"function of node {v} must reference each parent exactly once")

    def __eq__(self, other):
        if not isinstance(other, BoolScm):
            return NotImplemented
        return self.graph == other.graph and dict(self.functions) == dict(other.functions)

    __hash__ = None


def generate_functions(g: TieredDag, seed: int) -> BoolScm:
    """Random left-deep AND/OR tree over each non-root node's shuffled parents."""
    functions: dict[int, BoolExpr] = {}
    for v in g.nodes:
        ps = sorted(g.parents(v))
        if not ps:
            continue
        rng = _random.stream(seed, _random.FUNCTIONS, v)
        order = [ps[i] for i in rng.permutation(len(ps))]
        negate = rng.random(len(order)) < 0.5
        ops = rng.integers(2, size=len(order) - 1)
        expr: BoolExpr = Leaf(order[0], bool(negate[0]))
        for k in range(1, len(order)):
            expr = Op("and" if ops[k - 1] == 0 else "or", expr, Leaf(order[k], bool(negate[k])))
        functions[v] = expr
    return BoolScm(g, functions)


def _check_observed(scm: BoolScm, observed: Mapping[int, bool]) -> None:
    roots = scm.graph.roots()
    keys = set(observed)
    if keys != roots:
        missing = sorted(roots - keys)
        extra = sorted(keys - roots)
        raise ContractError(f"observed must assign exactly the roots (missing {missing}, non-roots {extra})")


def evaluate_factual(scm: BoolScm, observed: Mapping[int, bool]) -> Assignment:
    return evaluate_counterfactual(scm, observed, {})


def evaluate_counterfactual(
    scm: BoolScm, observed: Mapping[int, bool], interventions: Mapping[int, bool]
) -> Assignment:
    """Evaluate the model with each intervened node cut from its parents and pinned."""
    _check_observed(scm, observed)
    n = scm.graph.n_nodes
    for v in interventions:
        if not (isinstance(v, int) and 0 <= v < n):
            raise ContractError(f"intervention on unknown node {v!r}")
    state: Assignment = {}
    for v in scm.graph.topological_order():
        if v in interventions:
            state[v] = bool(interventions[v])
        elif v in observed:
            state[v] = bool(observed[v])
        else:
            state[v] = evaluate_expr(scm.functions[v], state)
    return state
