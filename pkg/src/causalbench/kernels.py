"""Kernel backend selection.

The compiled extension is used when it imported and the graph fits in 64
bits; otherwise the pure-Python kernels run.  Set ``CAUSALBENCH_PURE_PYTHON=1``
to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("CAUSALBENCH_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"
MAX_COMPILED_NODES = 64


def backend_for(n_nodes: int):
    if _ckernels is not None and n_nodes <= MAX_COMPILED_NODES:
        return _ckernels
    return _pykernels


def directed_paths(children, x, y):
    return backend_for(len(children)).directed_paths(children, x, y)


def count_directed_paths(children, x, y):
    return backend_for(len(children)).count_directed_paths(children, x, y)


def backdoor_paths(children, parents, x, y, limit=-1):
    return backend_for(len(children)).backdoor_paths(children, parents, x, y, limit)


def all_blocked(signatures, z, n_nodes):
    return backend_for(n_nodes).all_blocked(signatures, z)


def minimal_blocking_sets(signatures, candidates, max_size, n_nodes):
    return backend_for(n_nodes).minimal_blocking_sets(signatures, candidates, max_size)
