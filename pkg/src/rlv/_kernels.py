"""Hot graph kernels: successor images and constrained BFS.

Both kernels exist twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics.  The active backend is chosen by the
``RLV_BACKEND`` environment variable (``numba``, the default, or
``numpy``) and can be overridden at runtime with :func:`set_backend`.
``benchmarks/bench_backends.py`` compares the two.

Determinism contract (relied on by counterexample extraction): BFS is
level-synchronous, states are processed in ascending index order, and a
state's parent is its smallest-index predecessor on the earliest level.
Both backends honour it and are differential-tested against each other.
"""

import os

import numpy as np
from numba import njit

_VALID = ("numba", "numpy")
_backend = os.environ.get("RLV_BACKEND", "numba")
if _backend not in _VALID:
    raise RuntimeError(f"RLV_BACKEND must be one of {_VALID}, got {_backend!r}")


def get_backend():
    return _backend


def set_backend(name):
    """Force a backend; returns the previous one (handy in tests)."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    prev = _backend
    _backend = name
    return prev


# ---------------------------------------------------------------- numba

@njit(cache=True)
def _successors_nb(indptr, indices, mask):
    n = mask.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    for s in range(n):
        if mask[s]:
            for k in range(indptr[s], indptr[s + 1]):
                out[indices[k]] = True
    return out


@njit(cache=True)
def _bfs_avoiding_nb(indptr, indices, start, blocked):
    n = start.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -2, dtype=np.int64)
    frontier = np.empty(n, dtype=np.int64)
    m = 0
    for s in range(n):
        if start[s] and not blocked[s]:
            dist[s] = 0
            parent[s] = -1
            frontier[m] = s
            m += 1
    level = 0
    nxt = np.empty(n, dtype=np.int64)
    while m > 0:
        level += 1
        frontier[:m].sort()  # ascending order fixes the parent tie-break
        w = 0
        for i in range(m):
            s = frontier[i]
            for k in range(indptr[s], indptr[s + 1]):
                t = indices[k]
                if parent[t] == -2 and not blocked[t]:
                    parent[t] = s
                    dist[t] = level
                    nxt[w] = t
                    w += 1
        frontier, nxt = nxt, frontier
        m = w
    return dist, parent


# ---------------------------------------------------------------- numpy

def _successors_np(indptr, indices, mask):
    n = mask.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    # Edge k runs from state src[k]; recover src from the CSR layout.
    counts = np.diff(indptr)
    src = np.repeat(np.arange(n, dtype=np.int64), counts)
    sel = mask[src]
    out[indices[sel]] = True
    return out


def _bfs_avoiding_np(indptr, indices, start, blocked):
    n = start.shape[0]
    counts = np.diff(indptr)
    src = np.repeat(np.arange(n, dtype=np.int64), counts)
    dst = indices
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -2, dtype=np.int64)
    frontier = start & ~blocked
    dist[frontier] = 0
    parent[frontier] = -1
    level = 0
    while frontier.any():
        level += 1
        sel = frontier[src] & (parent[dst] == -2) & ~blocked[dst]
        if not sel.any():
            break
        cand_src = src[sel]
        cand_dst = dst[sel]
        # Edges are sorted by (src, dst), so the first hit per target is
        # the smallest-index predecessor: matches the numba loop.
        uniq, first = np.unique(cand_dst, return_index=True)
        parent[uniq] = cand_src[first]
        dist[uniq] = level
        frontier = np.zeros(n, dtype=np.bool_)
        frontier[uniq] = True
    return dist, parent


# ------------------------------------------------------------- dispatch

def successors(indptr, indices, mask, backend=None):
    """Image of ``mask`` under the transition relation (CSR form)."""
    b = backend or _backend
    if b == "numba":
        return _successors_nb(indptr, indices, mask)
    return _successors_np(indptr, indices, mask)


def bfs_avoiding(indptr, indices, start, blocked, backend=None):
    """Multi-source BFS visiting only non-``blocked`` states.

    Returns ``(dist, parent)``; ``dist`` is -1 for unreached states,
    ``parent`` is -1 for sources and -2 for unreached states.
    """
    b = backend or _backend
    if b == "numba":
        return _bfs_avoiding_nb(indptr, indices, start, blocked)
    return _bfs_avoiding_np(indptr, indices, start, blocked)


def warm_up():
    """Trigger numba compilation on a tiny graph (keeps timings honest)."""
    indptr = np.array([0, 1, 1], dtype=np.int64)
    indices = np.array([1], dtype=np.int64)
    mask = np.array([True, False])
    _successors_nb(indptr, indices, mask)
    _bfs_avoiding_nb(indptr, indices, mask, ~mask)
