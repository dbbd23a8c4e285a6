"""Finite transition systems, state predicates, finite paths, components.

State predicates are extensional: a predicate is a boolean mask over the
system's state indices, so lattice order / join / meet / complement are
exact array operations and the successor image ``post`` is a graph step.
All values are immutable after construction and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import bfs_avoiding, successors
from .errors import StructureError


class TransitionSystem:
    """Explicit finite transition system.

    ``labels`` identifies states by value (order fixes the canonical
    state indexing), ``edges`` is an iterable of ``(i, j)`` index pairs.
    """

    def __init__(self, labels, edges, name="S", frame=None):
        self.labels = tuple(labels)
        self.n = len(self.labels)
        self.name = name
        self.frame = frame
        self.index = {}
        for i, lab in enumerate(self.labels):
            if lab in self.index:
                raise StructureError(f"duplicate state label {lab!r}")
            self.index[lab] = i
        if isinstance(edges, tuple) and len(edges) == 2 and isinstance(edges[0], np.ndarray):
            src, dst = edges
        else:
            pairs = list(edges)
            src = np.array([p[0] for p in pairs], dtype=np.int64)
            dst = np.array([p[1] for p in pairs], dtype=np.int64)
        if src.size and (src.min() < 0 or src.max() >= self.n or dst.min() < 0 or dst.max() >= self.n):
            raise StructureError("transition endpoint out of range")
        # Canonical order: sorted by (src, dst), duplicates removed.
        keys = src * self.n + dst
        keys = np.unique(keys)
        self.src = (keys // self.n).astype(np.int64)
        self.dst = (keys % self.n).astype(np.int64)
        self._edge_keys = keys
        for arr in (self.src, self.dst, self._edge_keys):
            arr.setflags(write=False)

    @property
    def num_transitions(self):
        return int(self.src.size)

    @cached_property
    def _csr(self):
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, self.src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, self.dst.copy()

    @cached_property
    def _csr_rev(self):
        order = np.argsort(self.dst * self.n + self.src, kind="stable")
        rsrc = self.dst[order]
        rdst = self.src[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, rsrc + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, rdst

    @cached_property
    def finals_mask(self):
        out_deg = np.diff(self._csr[0])
        mask = out_deg == 0
        mask.setflags(write=False)
        return mask

    def has_edge(self, i, j):
        key = i * self.n + j
        pos = int(np.searchsorted(self._edge_keys, key))
        return pos < self._edge_keys.size and int(self._edge_keys[pos]) == key

    def successors_of(self, i):
        indptr, indices = self._csr
        return [int(t) for t in indices[indptr[i]:indptr[i + 1]]]

    # -------------------------------------------------- predicate factories

    def predicate(self, members, expr=None):
        """Predicate from a boolean mask, label iterable, or index iterable."""
        if isinstance(members, np.ndarray) and members.dtype == np.bool_:
            mask = members.copy()
        else:
            mask = np.zeros(self.n, dtype=np.bool_)
            for m in members:
                i = m if isinstance(m, (int, np.integer)) else self.index.get(m)
                if i is None or not (0 <= int(i) < self.n):
                    raise StructureError(f"state {m!r} not in system {self.name}")
                mask[int(i)] = True
        return StatePredicate(self, mask, expr)

    def bottom(self):
        return StatePredicate(self, np.zeros(self.n, dtype=np.bool_), "0 = 1")

    def top(self):
        return StatePredicate(self, np.ones(self.n, dtype=np.bool_), "0 = 0")

    def __repr__(self):
        return f"TransitionSystem({self.name!r}, {self.n} states, {self.num_transitions} transitions)"


class StatePredicate:
    """Subset of a system's states; element of the powerset lattice.

    ``origin`` optionally records how the set was built (currently only
    successor images), so derived predicates can serialize compactly.
    """

    __slots__ = ("system", "mask", "expr", "origin", "_key")

    def __init__(self, system, mask, expr=None, origin=None):
        if mask.shape != (system.n,):
            raise StructureError("predicate mask has wrong length")
        self.system = system
        self.mask = mask
        self.mask.setflags(write=False)
        self.expr = expr
        self.origin = origin
        self._key = mask.tobytes()

    def _check(self, other):
        if not isinstance(other, StatePredicate):
            raise StructureError(f"expected a StatePredicate, got {type(other).__name__}")
        if other.system is not self.system:
            raise StructureError("predicates belong to different systems")

    def leq(self, other):
        self._check(other)
        return bool(np.all(~self.mask | other.mask))

    def join(self, other):
        self._check(other)
        return StatePredicate(self.system, self.mask | other.mask, _combine(self, other, "||"))

    def meet(self, other):
        self._check(other)
        return StatePredicate(self.system, self.mask & other.mask, _combine(self, other, "&&"))

    def complement(self):
        expr = f"!({self.expr})" if self.expr else None
        return StatePredicate(self.system, ~self.mask, expr)

    __le__ = leq
    __or__ = join
    __and__ = meet
    __invert__ = complement

    def __eq__(self, other):
        if not isinstance(other, StatePredicate):
            return NotImplemented
        return self.system is other.system and self._key == other._key

    def __hash__(self):
        return hash((id(self.system), self._key))

    def is_empty(self):
        return not bool(self.mask.any())

    @property
    def count(self):
        return int(self.mask.sum())

    def indices(self):
        return np.flatnonzero(self.mask)

    def members(self):
        return [self.system.labels[i] for i in np.flatnonzero(self.mask)]

    def witness(self):
        """Smallest-index member label, or None if empty."""
        idx = np.flatnonzero(self.mask)
        return self.system.labels[int(idx[0])] if idx.size else None

    def __repr__(self):
        tag = self.expr if self.expr else f"{self.count} states"
        return f"StatePredicate({tag})"


def _combine(a, b, op):
    if a.expr and b.expr:
        return f"({a.expr}) {op} ({b.expr})"
    return None


@dataclass(frozen=True)
class ReachFormula:
    """Pair of predicates ``lhs =>> rhs`` over one system."""

    lhs: StatePredicate
    rhs: StatePredicate

    def __post_init__(self):
        if self.lhs.system is not self.rhs.system:
            raise StructureError("formula sides belong to different systems")

    @property
    def system(self):
        return self.lhs.system

    def text(self):
        l = self.lhs.expr or f"<{self.lhs.count} states>"
        r = self.rhs.expr or f"<{self.rhs.count} states>"
        return f"{l} =>> {r}"

    def __repr__(self):
        return f"ReachFormula({self.text()})"


def finals(system):
    """States with no outgoing transition."""
    return StatePredicate(system, system.finals_mask.copy())


def post(system, pred):
    """Successor image: the states some ``pred``-state steps to."""
    if pred.system is not system:
        raise StructureError("predicate not owned by this system")
    indptr, indices = system._csr
    return StatePredicate(system, successors(indptr, indices, pred.mask),
                          origin=("post", pred))


def pre_reach(system, target_mask, blocked_mask):
    """States that reach ``target`` through non-blocked states (backward BFS)."""
    indptr, indices = system._csr_rev
    dist, _ = bfs_avoiding(indptr, indices, target_mask, blocked_mask)
    return dist >= 0


class FinitePath:
    """Nonempty sequence of states related by the transition relation.

    Need not be maximal; ``is_maximal`` checks that the last state is
    final.  ``length`` counts transitions, so a singleton has length 0,
    and ``suffix(i)`` drops ``i`` leading states.
    """

    __slots__ = ("system", "states")

    def __init__(self, system, states):
        states = tuple(int(s) for s in states)
        if not states:
            raise StructureError("a path must be nonempty")
        for s in states:
            if not 0 <= s < system.n:
                raise StructureError("path state out of range")
        for u, v in zip(states, states[1:]):
            if not system.has_edge(u, v):
                raise StructureError(
                    f"no transition {system.labels[u]!r} -> {system.labels[v]!r}")
        self.system = system
        self.states = states

    @classmethod
    def from_labels(cls, system, labels):
        return cls(system, [system.index[lab] for lab in labels])

    @property
    def head(self):
        return self.states[0]

    @property
    def head_label(self):
        return self.system.labels[self.states[0]]

    @property
    def length(self):
        return len(self.states) - 1

    def suffix(self, i):
        if not 0 <= i <= self.length:
            raise StructureError(f"suffix index {i} out of range 0..{self.length}")
        return FinitePath(self.system, self.states[i:])

    def is_maximal(self):
        return bool(self.system.finals_mask[self.states[-1]])

    def labels(self):
        return [self.system.labels[s] for s in self.states]

    def __eq__(self, other):
        if not isinstance(other, FinitePath):
            return NotImplemented
        return self.system is other.system and self.states == other.states

    def __hash__(self):
        return hash((id(self.system), self.states))

    def __len__(self):
        return len(self.states)

    def __repr__(self):
        return f"FinitePath({' -> '.join(str(l) for l in self.labels())})"


@dataclass(frozen=True)
class ComponentCheck:
    """Verdict of the sub-system check, with witnessing state pairs.

    Conditions: (a) states and transitions are included in the host,
    (b) host transitions between two member states are sub-system
    transitions, (c) host transitions that leave the member set start
    in a sub-system-final state.  ``relaxed`` restricts (b) to sources
    that are not sub-system-final; host behaviour at states where the
    sub-system has already stopped is then not the sub-system's
    business, which is exactly the premise the transfer results need.
    """

    ok: bool
    violations: tuple
    relaxed: bool


def _member_of_sorted(sorted_keys, keys):
    """Boolean mask: which ``keys`` occur in the sorted array."""
    if sorted_keys.size == 0:
        return np.zeros(keys.shape, dtype=bool)
    pos = np.searchsorted(sorted_keys, keys)
    pos = np.minimum(pos, sorted_keys.size - 1)
    return sorted_keys[pos] == keys


def is_component(sub, system, relaxed=False):
    """Check the three sub-system conditions of ``sub`` against ``system``."""
    violations = []
    n = system.n
    to_sys = np.empty(sub.n, dtype=np.int64)
    missing = False
    for i, lab in enumerate(sub.labels):
        j = system.index.get(lab, -1)
        to_sys[i] = j
        if j < 0:
            violations.append(("a", lab, None))
            missing = True
    if missing:
        return ComponentCheck(False, tuple(violations), relaxed)

    sub_keys = np.unique(to_sys[sub.src] * n + to_sys[sub.dst])
    ok_edge = _member_of_sorted(system._edge_keys, sub_keys)
    for k in sub_keys[~ok_edge]:
        violations.append(("a", system.labels[int(k // n)], system.labels[int(k % n)]))

    in_sub = np.zeros(n, dtype=np.bool_)
    in_sub[to_sys] = True
    sub_final_at = np.zeros(n, dtype=np.bool_)
    sub_final_at[to_sys[sub.finals_mask]] = True

    src, dst = system.src, system.dst
    internal = in_sub[src] & in_sub[dst]
    keys = src * n + dst
    is_sub_edge = _member_of_sorted(sub_keys, keys)
    b_bad = internal & ~is_sub_edge
    if relaxed:
        b_bad &= ~sub_final_at[src]
    for k in np.flatnonzero(b_bad):
        violations.append(("b", system.labels[int(src[k])], system.labels[int(dst[k])]))

    c_bad = in_sub[src] & ~in_sub[dst] & ~sub_final_at[src]
    for k in np.flatnonzero(c_bad):
        violations.append(("c", system.labels[int(src[k])], system.labels[int(dst[k])]))

    return ComponentCheck(not violations, tuple(violations), relaxed)


def transfer_predicate(pred, target):
    """Re-own a predicate onto ``target`` by state value (shared labels)."""
    mask = np.zeros(target.n, dtype=np.bool_)
    for lab in pred.members():
        i = target.index.get(lab)
        if i is None:
            raise StructureError(f"state {lab!r} has no counterpart in {target.name}")
        mask[i] = True
    return StatePredicate(target, mask, pred.expr)


def transfer_formula(formula, target):
    return ReachFormula(transfer_predicate(formula.lhs, target),
                        transfer_predicate(formula.rhs, target))
