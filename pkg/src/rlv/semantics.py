"""Reach relation on finite paths, the validity judgment, counterexamples.

A formula ``l =>> r`` is valid when every maximal path whose head
satisfies ``l`` passes through an ``r``-state.  Infinite executions
satisfy the reach relation vacuously: its defining clauses let a path
defer the obligation to its tail forever, and only a *final* last state
cuts that off.  Validity over a finite system is therefore decided
graph-theoretically, without materialising paths: the formula fails
exactly when some final state is reachable from an ``l``-and-not-``r``
state through not-``r`` states only.  Cycles never witness a failure
and are correctly ignored by that search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import bfs_avoiding
from .errors import StructureError
from .ts import FinitePath


def leadsto(path, pred):
    """True iff some state of the path satisfies ``pred``.

    On finite paths the coinductively defined reach relation collapses
    to this: the defer clause can fire only finitely often, so the
    relation holds exactly when the obligation is met at some index.
    """
    if pred.system is not path.system:
        raise StructureError("path and predicate belong to different systems")
    return bool(any(pred.mask[s] for s in path.states))


def suffix_reaches(path, pred):
    """Reach relation in its suffix-skipping formulation.

    Literal clause structure: the head satisfies ``pred``; or the path
    has a tail and its head satisfies ``pred``; or some suffix of the
    tail (dropping ``n`` more states) is related.  Equivalent to
    :func:`leadsto` on finite paths; kept as the differential twin.
    """
    if pred.system is not path.system:
        raise StructureError("path and predicate belong to different systems")
    return _suffix_search(path, pred) is not None


def _suffix_search(path, pred):
    """Skip counts ``n`` chosen at each step, largest first; None if no witness."""
    if pred.mask[path.states[0]]:
        return []
    if path.length == 0:
        return None
    tail = path.suffix(1)
    if pred.mask[tail.states[0]]:
        return [0]
    for n in range(tail.length, -1, -1):
        rest = _suffix_search(tail.suffix(n), pred)
        if rest is not None:
            return [n] + rest
    return None


@dataclass(frozen=True)
class Verdict:
    status: str  # "valid" | "invalid"
    counterexample: FinitePath | None = None

    @property
    def valid(self):
        return self.status == "valid"


def holds_valid(system, formula):
    """Decide validity of ``formula`` over ``system``.

    Search: BFS from the lhs-not-rhs states through not-rhs states; the
    formula is invalid iff that region contains a final state.  The
    returned counterexample is a shortest offending maximal path, ties
    broken by canonical state order (smallest index first).
    """
    if formula.system is not system:
        raise StructureError("formula not owned by this system")
    start = formula.lhs.mask & ~formula.rhs.mask
    indptr, indices = system._csr
    dist, parent = bfs_avoiding(indptr, indices, start, formula.rhs.mask)
    bad = (dist >= 0) & system.finals_mask
    if not bad.any():
        return Verdict("valid")
    idx = np.flatnonzero(bad)
    end = int(idx[np.lexsort((idx, dist[idx]))[0]])
    states = [end]
    while parent[states[-1]] != -1:
        states.append(int(parent[states[-1]]))
    states.reverse()
    return Verdict("invalid", FinitePath(system, states))


def enumerate_maximal_paths(system, start, max_len):
    """All maximal paths of length <= ``max_len`` starting in ``start``.

    Returns ``(paths, truncated)``; ``truncated`` is set when some path
    was cut off at ``max_len`` before reaching a final state (i.e. a
    cycle or long run is reachable).  Exhaustive-oracle use only; order
    is depth-first with successors in canonical order.
    """
    if start.system is not system:
        raise StructureError("predicate not owned by this system")
    paths = []
    truncated = False
    for s0 in np.flatnonzero(start.mask):
        stack = [(int(s0),)]
        while stack:
            prefix = stack.pop()
            last = prefix[-1]
            if system.finals_mask[last]:
                paths.append(FinitePath(system, prefix))
                continue
            if len(prefix) - 1 >= max_len:
                truncated = True
                continue
            for t in reversed(system.successors_of(last)):
                stack.append(prefix + (t,))
    return paths, truncated


def oracle_agrees(system, formula, max_len=None):
    """Cross-check of :func:`holds_valid` by exhaustive path enumeration.

    Skipping truncated paths is sound here because any run longer than
    ``max_len`` >= number of states revisits a state, and pumping the
    cycle never creates a *maximal* path.
    """
    if max_len is None:
        max_len = system.n
    paths, _ = enumerate_maximal_paths(system, formula.lhs, max_len)
    enumerated = all(leadsto(p, formula.rhs) for p in paths)
    return holds_valid(system, formula).valid == enumerated
