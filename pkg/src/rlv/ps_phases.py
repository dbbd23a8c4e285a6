"""Phase-script proof system: six rules, finite scripts, a coinductive knot.

A script encodes a possibly-infinite derivation as a descending chain of
formula sets ``X_0, ..., X_n`` with ``X_n`` empty: every formula in a
phase is justified by one rule whose premises live in the *next* phase,
except the step rule, whose premise must be found back in ``X_0``.
That knot is the coinductive part; everything else is inductive and
must bottom out because the chain ends empty.  The transitivity rule is
deliberately asymmetric: its side goal is a semantic validity, to be
discharged by the oracle or by an invariant certificate, never by mere
membership in the hypotheses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import GenerationError, StructureError
from .ps_cyclic import certify_invariant
from .semantics import holds_valid
from .ts import ReachFormula, finals, post

RULES = ("Hyp", "Trv", "Str", "Spl", "Tra", "Stp")
DISCHARGE_KINDS = ("oracle", "certificate")


@dataclass(frozen=True)
class PhaseRef:
    """Premise reference: an index into the next phase, or into X0
    (the knot; only the step rule may point there)."""

    kind: str  # "next" | "x0"
    index: int


@dataclass(frozen=True)
class TraDischarge:
    """How the semantic side goal of a transitivity step is established."""

    kind: str  # "oracle" | "certificate"
    invariant: object = None  # StatePredicate for kind "certificate"


@dataclass(frozen=True)
class RuleApp:
    rule: str
    conclusion: ReachFormula
    premises: tuple = ()
    strengthened: object = None  # Str: the weakened lhs
    midpoint: object = None  # Tra: the midpoint predicate
    discharge: Optional[TraDischarge] = None


@dataclass(frozen=True)
class PhaseScript:
    hypotheses: tuple  # of ReachFormula
    target: Optional[ReachFormula]
    phases: tuple  # of tuple of RuleApp
    phase_rules: tuple = ()  # designated principal rule per phase (labels only)


@dataclass(frozen=True)
class ScriptReport:
    accepted: bool
    phase_results: tuple  # of (phase index, ok, failure messages)
    failures: tuple = field(default=())

    def first_failure(self):
        return self.failures[0] if self.failures else None


def _resolve(ref, next_formulas, x0_formulas):
    pool = next_formulas if ref.kind == "next" else x0_formulas
    if not 0 <= ref.index < len(pool):
        return None
    return pool[ref.index]


def check_rule_app(system, hyps, x0_formulas, app, next_formulas):
    """Verify one justification; returns failure messages (empty = ok)."""
    fails = []
    c = app.conclusion
    if app.rule not in RULES:
        return [f"unknown rule {app.rule!r}"]

    def premise(i):
        ref = app.premises[i]
        f = _resolve(ref, next_formulas, x0_formulas)
        if f is None:
            fails.append(f"{app.rule}: premise reference {ref.kind}:{ref.index} out of range")
        return f

    if app.rule == "Stp":
        if any(r.kind != "x0" for r in app.premises):
            fails.append("Stp: step premises must close the knot at phase 0")
    else:
        if any(r.kind != "next" for r in app.premises):
            fails.append(f"{app.rule}: premises must lie in the next phase")
    if fails:
        return fails

    if app.rule == "Hyp":
        if app.premises:
            fails.append("Hyp: takes no premises")
        elif c not in hyps:
            fails.append("Hyp: conclusion is not among the hypotheses")
    elif app.rule == "Trv":
        if app.premises:
            fails.append("Trv: takes no premises")
        elif c.lhs != c.rhs:
            fails.append("Trv: conclusion is not of shape r =>> r")
    elif app.rule == "Str":
        if len(app.premises) != 1:
            return ["Str: needs exactly one premise"]
        p = premise(0)
        if p is None:
            return fails
        if app.strengthened is None or p.lhs != app.strengthened:
            fails.append("Str: premise lhs differs from the declared strengthening")
        if p.rhs != c.rhs:
            fails.append("Str: premise rhs differs from conclusion rhs")
        if app.strengthened is not None and not c.lhs.leq(app.strengthened):
            w = (c.lhs & ~app.strengthened).witness()
            fails.append(f"Str: l <= l' fails (witness {w})")
    elif app.rule == "Spl":
        if len(app.premises) != 2:
            return ["Spl: needs exactly two premises"]
        p1, p2 = premise(0), premise(1)
        if p1 is None or p2 is None:
            return fails
        if p1.rhs != c.rhs or p2.rhs != c.rhs:
            fails.append("Spl: premise rhs differs from conclusion rhs")
        elif p1.lhs | p2.lhs != c.lhs:
            fails.append("Spl: conclusion lhs is not the join of premise lhs")
    elif app.rule == "Tra":
        if len(app.premises) != 1:
            return ["Tra: needs exactly one premise"]
        if app.midpoint is None:
            return ["Tra: missing midpoint"]
        p = premise(0)
        if p is None:
            return fails
        if p.lhs != app.midpoint or p.rhs != c.rhs:
            fails.append("Tra: premise is not  midpoint =>> rhs")
        side = ReachFormula(c.lhs, app.midpoint)
        d = app.discharge
        if d is None or d.kind not in DISCHARGE_KINDS:
            fails.append("Tra: side goal must be discharged by the oracle or a "
                         "certificate; hypothesis membership is not accepted")
        elif d.kind == "oracle":
            verdict = holds_valid(system, side)
            if not verdict.valid:
                head = verdict.counterexample.head_label
                fails.append(f"Tra: side goal invalid (counterexample from {head})")
        else:
            res = certify_invariant(system, side.lhs, side.rhs, d.invariant)
            if not res.accepted:
                fails.append(f"Tra: certificate rejected ({res.describe()})")
    elif app.rule == "Stp":
        if len(app.premises) != 1:
            return ["Stp: needs exactly one premise"]
        stuck = c.lhs & finals(system)
        if not stuck.is_empty():
            fails.append(f"Stp: lhs contains a final state (witness {stuck.witness()})")
        p = premise(0)
        if p is None:
            return fails
        expected = ReachFormula(post(system, c.lhs), c.rhs)
        if p != expected:
            fails.append("Stp: knot premise is not  post(lhs) =>> rhs")
    return fails


def check_script(system, script):
    """Check a whole script; the report lists per-phase outcomes."""
    hyps = set(script.hypotheses)
    failures = []
    phase_results = []
    if not script.phases:
        if script.target is not None:
            failures.append(("phase 0", "target missing from the first phase"))
        return ScriptReport(not failures, (), tuple(failures))
    x0_formulas = [app.conclusion for app in script.phases[0]]
    if script.target is not None and script.target not in x0_formulas:
        failures.append(("phase 0", "target missing from the first phase"))
    for i, phase in enumerate(script.phases):
        nxt = [a.conclusion for a in script.phases[i + 1]] if i + 1 < len(script.phases) else []
        msgs = []
        for j, app in enumerate(phase):
            if app.conclusion.system is not system:
                raise StructureError("script formula owned by a different system")
            for m in check_rule_app(system, hyps, x0_formulas, app, nxt):
                msgs.append(f"formula {j}: {m}")
        phase_results.append((i, not msgs, tuple(msgs)))
        failures.extend((f"phase {i}", m) for m in msgs)
    return ScriptReport(not failures, tuple(phase_results), tuple(failures))


def invariant_phase_script(system, l, r, q):
    """Script reducing ``l =>> r`` to the invariant certificate ``q``.

    Eight phases with principal rules Str, Spl, Trv, Stp, Str, Spl,
    Trv, Stp; the two step applications close the knot at the first
    phase's ``post(q) =>> r`` entry.  Formulas that merely survive a
    phase ride along under identity strengthenings.  Refuses to
    generate when the certificate inclusions fail.
    """
    cert = certify_invariant(system, l, r, q)
    if not cert.accepted:
        raise GenerationError(f"certificate rejected: {cert.describe()}", cert.failures)
    dq = post(system, q)
    f_l = ReachFormula(l, r)
    f_q = ReachFormula(q, r)
    f_dq = ReachFormula(dq, r)
    f_qr = ReachFormula(q | r, r)
    f_r = ReachFormula(r, r)
    nxt = lambda i: PhaseRef("next", i)
    knot = PhaseRef("x0", 2)

    phases = (
        (RuleApp("Str", f_l, (nxt(0),), strengthened=q | r),
         RuleApp("Str", f_q, (nxt(1),), strengthened=q),
         RuleApp("Str", f_dq, (nxt(2),), strengthened=dq)),
        (RuleApp("Spl", f_qr, (nxt(0), nxt(1))),
         RuleApp("Str", f_q, (nxt(0),), strengthened=q),
         RuleApp("Str", f_dq, (nxt(2),), strengthened=dq)),
        (RuleApp("Str", f_q, (nxt(0),), strengthened=q),
         RuleApp("Trv", f_r),
         RuleApp("Str", f_dq, (nxt(1),), strengthened=dq)),
        (RuleApp("Stp", f_q, (knot,)),
         RuleApp("Str", f_dq, (nxt(0),), strengthened=dq)),
        (RuleApp("Str", f_dq, (nxt(0),), strengthened=q | r),),
        (RuleApp("Spl", f_qr, (nxt(0), nxt(1))),),
        (RuleApp("Str", f_q, (nxt(0),), strengthened=q),
         RuleApp("Trv", f_r)),
        (RuleApp("Stp", f_q, (knot,)),),
    )
    return PhaseScript((), f_l, phases,
                       ("Str", "Spl", "Trv", "Stp", "Str", "Spl", "Trv", "Stp"))


def tra_rule_app(system, goal, midpoint, discharge, premise_index=0):
    """Transitivity application splitting ``goal`` at ``midpoint``.

    The side goal ``lhs(goal) =>> midpoint`` is validated now with the
    given discharge; the returned application expects the remaining
    ``midpoint =>> rhs(goal)`` at ``premise_index`` of the next phase.
    """
    side = ReachFormula(goal.lhs, midpoint)
    if discharge.kind == "oracle":
        verdict = holds_valid(system, side)
        if not verdict.valid:
            raise GenerationError(
                f"side goal invalid; counterexample starts at "
                f"{verdict.counterexample.head_label}")
    elif discharge.kind == "certificate":
        res = certify_invariant(system, side.lhs, side.rhs, discharge.invariant)
        if not res.accepted:
            raise GenerationError(f"certificate rejected: {res.describe()}", res.failures)
    else:
        raise GenerationError(f"unsupported discharge kind {discharge.kind!r}")
    return RuleApp("Tra", goal, (PhaseRef("next", premise_index),),
                   midpoint=midpoint, discharge=discharge)
