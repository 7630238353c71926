"""Ground-truth solvers for causal paths and backdoor adjustment."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import kernels
from .errors import BudgetExceeded, ContractError
from .graph import TieredDag

DEFAULT_MAX_SIZE = 4
DEFAULT_MAX_CANDIDATES = 24
DEFAULT_MAX_BACKDOOR_PATHS = 200_000


@dataclass(frozen=True, order=True)
class Path:
    nodes: tuple[int, ...]
    directions: tuple[bool, ...]  # True: the step follows the edge a -> b

    @classmethod
    def directed(cls, nodes: Iterable[int]) -> "Path":
        nodes = tuple(nodes)
        return cls(nodes, (True,) * (len(nodes) - 1))

    @property
    def is_causal(self) -> bool:
        return all(self.directions)

    def render(self, name=str) -> str:
        parts = [name(self.nodes[0])]
        for d, v in zip(self.directions, self.nodes[1:]):
            parts.append("->" if d else "<-")
            parts.append(name(v))
        return " ".join(parts)


@dataclass(frozen=True)
class AdjustmentGroundTruth:
    treatment: int
    outcome: int
    minimal_sets: tuple[frozenset[int], ...]


def _check_pair(g: TieredDag, x: int, y: int) -> None:
    g._check(x)
    g._check(y)
    if x == y:
        raise ContractError("cause and effect must differ")


def enumerate_causal_paths(g: TieredDag, x: int, y: int) -> tuple[Path, ...]:
    """All directed simple paths from x to y, lexicographic by node ids."""
    _check_pair(g, x, y)
    return tuple(Path.directed(p) for p in kernels.directed_paths(g.child_masks, x, y))


def count_causal_paths(g: TieredDag, x: int, y: int) -> int:
    _check_pair(g, x, y)
    return kernels.count_directed_paths(g.child_masks, x, y)


def enumerate_backdoor_paths(g: TieredDag, x: int, y: int, limit: int = -1) -> tuple[Path, ...]:
    """Simple skeleton paths from x to y whose first step enters x."""
    _check_pair(g, x, y)
    raw = kernels.backdoor_paths(g.child_masks, g.parent_masks, x, y, limit)
    return tuple(Path(nodes, dirs) for nodes, dirs in raw)


def _interior(path: Path):
    """Yield (node, is_collider) for each interior node of the path."""
    for i in range(1, len(path.nodes) - 1):
        # collider iff the step into the node is forward and the step out of it is backward
        yield path.nodes[i], path.directions[i - 1] and not path.directions[i]


def is_path_blocked(g: TieredDag, path: Path, z: Iterable[int]) -> bool:
    z = frozenset(z)
    if path.nodes[0] in z or path.nodes[-1] in z:
        raise ContractError("the control set may not contain the path endpoints")
    for i in range(len(path.nodes) - 1):
        a, b = path.nodes[i], path.nodes[i + 1]
        if not (g.has_edge(a, b) if path.directions[i] else g.has_edge(b, a)):
            raise ContractError(f"path step {a}-{b} does not match a graph edge")
    for node, collider in _interior(path):
        if collider:
            if node not in z and not (g.descendants(node) & z):
                return True
        elif node in z:
            return True
    return False


def _signature(g: TieredDag, path: Path) -> tuple[int, tuple[int, ...]]:
    nc = 0
    colliders = []
    for node, collider in _interior(path):
        if collider:
            colliders.append((1 << node) | g.descendant_masks[node])
        else:
            nc |= 1 << node
    return nc, tuple(colliders)


def is_valid_adjustment_set(g: TieredDag, x: int, y: int, z: Iterable[int]) -> bool:
    """Backdoor criterion: no descendant of x in z and every backdoor path blocked."""
    _check_pair(g, x, y)
    z = frozenset(z)
    if x in z or y in z:
        raise ContractError("the control set may not contain treatment or outcome")
    for v in z:
        g._check(v)
    zmask = sum(1 << v for v in z)
    if zmask & g.descendant_masks[x]:
        return False
    sigs = [_signature(g, p) for p in enumerate_backdoor_paths(g, x, y)]
    return kernels.all_blocked(sigs, zmask, g.n_nodes)


def adjustment_candidates(g: TieredDag, x: int, y: int) -> list[int]:
    excluded = (1 << x) | (1 << y) | g.descendant_masks[x]
    return [v for v in g.nodes if not excluded >> v & 1]


def enumerate_minimal_adjustment_sets(
    g: TieredDag,
    x: int,
    y: int,
    max_size: int = DEFAULT_MAX_SIZE,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
    max_paths: int = DEFAULT_MAX_BACKDOOR_PATHS,
) -> AdjustmentGroundTruth:
    """Every inclusion-minimal valid adjustment set with at most ``max_size`` nodes."""
    _check_pair(g, x, y)
    candidates = adjustment_candidates(g, x, y)
    if len(candidates) > max_candidates:
        raise BudgetExceeded(f"{len(candidates)} adjustment candidates exceed the cap of {max_candidates}")
    paths = kernels.backdoor_paths(g.child_masks, g.parent_masks, x, y, max_paths)
    if len(paths) > max_paths:
        raise BudgetExceeded(f"more than {max_paths} backdoor paths between {x} and {y}")

    cand_mask = sum(1 << v for v in candidates)
    sigs = set()
    for nodes, dirs in paths:
        nc, colliders = _signature(g, Path(nodes, dirs))
        colliders = tuple(sorted({c & cand_mask for c in colliders}))
        if colliders and colliders[0] == 0:
            continue  # a collider no candidate can open keeps this path blocked
        sigs.add((nc & cand_mask, colliders))
    masks = kernels.minimal_blocking_sets(sorted(sigs), candidates, max_size, g.n_nodes)
    sets = tuple(frozenset(v for v in candidates if m >> v & 1) for m in masks)
    return AdjustmentGroundTruth(x, y, sets)
