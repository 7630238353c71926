"""Pure-Python kernels.

Graphs arrive as per-node bitmasks over node ids, which must be a topological
order.  Path lists come back in lexicographic order of node ids.
"""
from __future__ import annotations

from itertools import combinations
from typing import Sequence


def _reaching(children: Sequence[int], y: int) -> int:
    """Mask of nodes with a directed path to ``y`` (``y`` included)."""
    reach = 1 << y
    for v in range(y - 1, -1, -1):
        if children[v] & reach:
            reach |= 1 << v
    return reach


def directed_paths(children: Sequence[int], x: int, y: int) -> list[tuple[int, ...]]:
    reach = _reaching(children, y)
    if not reach >> x & 1:
        return []
    out: list[tuple[int, ...]] = []
    path = [x]

    def visit(v: int) -> None:
        if v == y:
            out.append(tuple(path))
            return
        nxt = children[v] & reach
        while nxt:
            low = nxt & -nxt
            c = low.bit_length() - 1
            nxt ^= low
            path.append(c)
            visit(c)
            path.pop()

    visit(x)
    return out


def count_directed_paths(children: Sequence[int], x: int, y: int) -> int:
    counts = [0] * len(children)
    counts[y] = 1
    for v in range(y - 1, x - 1, -1):
        total = 0
        m = children[v]
        while m:
            low = m & -m
            total += counts[low.bit_length() - 1]
            m ^= low
        counts[v] = total
    return counts[x]


def backdoor_paths(
    children: Sequence[int], parents: Sequence[int], x: int, y: int, limit: int = -1
) -> list[tuple[tuple[int, ...], tuple[bool, ...]]]:
    """Simple skeleton paths ``x .. y`` whose first step enters ``x``.

    Directions are True where the step follows the edge (a -> b).  With
    ``limit >= 0`` the search stops once more than ``limit`` paths are found.
    """
    out: list[tuple[tuple[int, ...], tuple[bool, ...]]] = []
    path = [x]
    dirs: list[bool] = []
    stop = [False]

    def visit(v: int, used: int) -> None:
        if v == y:
            out.append((tuple(path), tuple(dirs)))
            if 0 <= limit < len(out):
                stop[0] = True
            return
        nxt = (children[v] | parents[v]) & ~used
        while nxt and not stop[0]:
            low = nxt & -nxt
            w = low.bit_length() - 1
            nxt ^= low
            path.append(w)
            dirs.append(bool(children[v] & low))
            visit(w, used | low)
            path.pop()
            dirs.pop()

    first = parents[x]
    used = 1 << x
    while first and not stop[0]:
        low = first & -first
        w = low.bit_length() - 1
        first ^= low
        path.append(w)
        dirs.append(False)
        visit(w, used | low)
        path.pop()
        dirs.pop()
    return out


def all_blocked(signatures: Sequence[tuple[int, Sequence[int]]], z: int) -> bool:
    """True iff every path signature is blocked by the node mask ``z``.

    A signature is ``(non-collider interior mask, [collider-or-descendant mask, ...])``.
    """
    for nc, colliders in signatures:
        if nc & z:
            continue
        for cm in colliders:
            if not cm & z:
                break
        else:
            return False
    return True


def minimal_blocking_sets(
    signatures: Sequence[tuple[int, Sequence[int]]], candidates: Sequence[int], max_size: int
) -> list[int]:
    """Inclusion-minimal candidate subsets (as masks) blocking every signature.

    Subsets are searched by ascending size; a subset is minimal iff it blocks
    and contains no smaller blocking subset found earlier.
    """
    found: list[int] = []
    for k in range(max_size + 1):
        for combo in combinations(candidates, k):
            z = 0
            for c in combo:
                z |= 1 << c
            if any(f & z == f for f in found):
                continue
            if all_blocked(signatures, z):
                found.append(z)
    return found
