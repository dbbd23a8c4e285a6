"""One-rule coinductive proof system: certificates and a cyclic decider.

The single step rule rewrites a goal ``l =>> r`` into ``post(l') =>> r``
for any ``l'`` with ``l <= l' | r`` and no final state in ``l'``.  A
proof is an infinite rule application; finitely, a trace of predicates
closed under the step and returning to an earlier element certifies
membership in the greatest fixpoint, so cycle detection decides the
system.  An invariant certificate ``q`` (the three inclusion checks in
:func:`certify_invariant`) is the reusable finite summary of such a
proof.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StructureError
from .semantics import holds_valid
from .ts import ReachFormula, StatePredicate, finals, post, pre_reach


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a side-condition or certificate check."""

    accepted: bool
    failures: tuple  # of (condition, witness state label or None)

    def describe(self):
        if self.accepted:
            return "accepted"
        return "; ".join(f"{c} (witness {w})" for c, w in self.failures)


def _inclusion(name, p, q, failures):
    if not p.leq(q):
        witness = (p & ~q).witness()
        failures.append((name, witness))


def check_step_conditions(l, l_prime, r):
    """Side conditions of the step rule: ``l <= l' | r`` and ``l'`` final-free."""
    failures = []
    _inclusion("l <= l' | r", l, l_prime | r, failures)
    stuck = l_prime & finals(l.system)
    if not stuck.is_empty():
        failures.append(("l' & finals = 0", stuck.witness()))
    return CheckResult(not failures, tuple(failures))


def step_premise(system, l_prime, r):
    """The premise produced by one step: ``post(l') =>> r``."""
    return ReachFormula(post(system, l_prime), r)


def certify_invariant(system, l, r, q):
    """Check the three certificate inclusions for ``q``.

    Accepted iff ``l <= q | r``, ``q`` contains no final state, and
    ``post(q) <= q | r``.  Each failed inclusion reports a witness.
    """
    failures = []
    _inclusion("l <= q | r", l, q | r, failures)
    stuck = q & finals(system)
    if not stuck.is_empty():
        failures.append(("q & finals = 0", stuck.witness()))
    _inclusion("post(q) <= q | r", post(system, q), q | r, failures)
    return CheckResult(not failures, tuple(failures))


def synthesize_invariant(system, formula):
    """Canonical certificate for a valid formula.

    ``q`` holds at the non-rhs states from which every maximal path
    meets the rhs; equivalently the non-rhs states that cannot reach a
    final non-rhs state through non-rhs states (backward search from
    the offending finals).  Determined by the rhs alone.  When the
    formula is valid, :func:`certify_invariant` accepts this ``q``.
    """
    r = formula.rhs
    bad_finals = system.finals_mask & ~r.mask
    doomed = pre_reach(system, bad_finals, r.mask)
    return StatePredicate(system, ~r.mask & ~doomed)


@dataclass(frozen=True)
class CyclicProof:
    """Trace ``l_0, ..., l_k`` with ``l_k = l_j``; each step takes the
    tightest strengthening ``l_i & ~r`` and applies the step rule."""

    formula: ReachFormula
    trace: tuple  # of StatePredicate
    cycle_index: int

    @property
    def length(self):
        return len(self.trace) - 1


def replay_cyclic_proof(system, proof):
    """Re-check a cyclic proof independently of how it was produced."""
    failures = []
    r = proof.formula.rhs
    trace = proof.trace
    if proof.formula.system is not system:
        raise StructureError("proof belongs to a different system")
    if not (0 <= proof.cycle_index < len(trace)):
        failures.append(("cycle index in range", None))
        return CheckResult(False, tuple(failures))
    if trace[0] != proof.formula.lhs:
        failures.append(("trace starts at lhs", None))
    if trace[-1] != trace[proof.cycle_index]:
        failures.append(("trace closes its cycle", None))
    fin = finals(system)
    for i in range(len(trace) - 1):
        d = trace[i] & ~r
        stuck = d & fin
        if not stuck.is_empty():
            failures.append((f"step {i}: no final state before rhs", stuck.witness()))
        if post(system, d) != trace[i + 1]:
            failures.append((f"step {i}: successor image mismatch", None))
    return CheckResult(not failures, tuple(failures))


@dataclass(frozen=True)
class Refutation:
    witness: object  # final state label heading a stuck continuation
    step_index: int
    counterexample: object  # FinitePath from the oracle


@dataclass(frozen=True)
class ProveResult:
    proved: bool
    proof: CyclicProof | None = None
    refutation: Refutation | None = None


def autoprove(system, formula):
    """Decide ``formula`` by iterating the step rule with the tightest
    strengthening.

    From ``l_i`` take ``d = l_i & ~r``; a final state in ``d`` heads a
    maximal path that misses the rhs, so the formula is refuted.
    Otherwise ``l_{i+1} = post(d)``.  Predicates over a finite system
    form a finite lattice, so the trace must revisit some earlier
    element; the closed cycle is the proof.  Agreement with the
    semantic oracle in both directions is the module's strongest test.
    """
    r = formula.rhs
    fin = finals(system)
    trace = [formula.lhs]
    seen = {formula.lhs: 0}
    while True:
        d = trace[-1] & ~r
        stuck = d & fin
        if not stuck.is_empty():
            cx = holds_valid(system, formula).counterexample
            return ProveResult(False, refutation=Refutation(
                stuck.witness(), len(trace) - 1, cx))
        nxt = post(system, d)
        if nxt in seen:
            trace.append(nxt)
            return ProveResult(True, proof=CyclicProof(
                formula, tuple(trace), seen[nxt]))
        seen[nxt] = len(trace)
        trace.append(nxt)
