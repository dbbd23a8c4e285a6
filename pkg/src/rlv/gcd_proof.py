"""Composed correctness proof for the gcd machine.

End-to-end exercise of every compositionality mechanism: the two
self-loops are split into two overlapping components, each component
proves its own loop's progress goal while assuming the other's goal as
a hypothesis, the two conditional sequents transfer to the full machine
and close each other by mutual composition, and a top-level tree splits
the machine's functional-correctness formula into the initialization
step, the two composed claims, and the equal-arguments exit case.

The guard trichotomy is what makes the mutual assumption sound: inside
a component, states where the *other* loop's guard holds are stuck, so
that case is dischargeable only by citing the other component's goal —
after a step has fired, per the tag discipline.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import efsm, serialize
from .ps_tagged import (ProofTree, TaggedFormula, check_tree,
                        compose_components, invariant_proof_tree)
from .ts import ReachFormula, post

PHI = "c = c1 && gcd(x, y) = gcd(x0, y0) && x0 > 0 && y0 > 0"
PSI = "c = c2 && x = y && x = gcd(x0, y0)"
START = "c = c0 && x0 > 0 && y0 > 0"
INIT = "c = c1 && x = x0 && y = y0 && x0 > 0 && y0 > 0"
GOAL_TEXT = f"{START} =>> {PSI}"

# 1-based arrow indices in models/gcd.rlv: init, x<y loop, y<x loop, exit.
UPPER = (2, 4)  # x < y self-loop plus the exit arrow
LOWER = (3, 4)  # y < x self-loop plus the exit arrow


def _preds(system):
    both = lambda t: efsm.eval_pred(f"{PHI} && {t}", system)
    return {
        "phi": efsm.eval_pred(PHI, system),
        "psi": efsm.eval_pred(PSI, system),
        "lt": both("x < y"),
        "gt": both("y < x"),
        "eq": both("x = y"),
    }


def side_tree(sub, own, stuck, other_goal):
    """Conditional proof of ``own =>> psi`` over one component.

    ``own`` is the lhs whose guard drives this component's loop,
    ``stuck`` the mirror lhs (final here), ``other_goal`` the assumed
    formula ``stuck =>> psi``.  Shape: copy the goal, step (the loop
    guard holds, so the lhs is final-free), widen the step image back
    to the loop region, then split by the guard trichotomy via a
    transitivity at "the loop is done": the own-guard case is the
    invariant tree for the loop, the equal case steps out to the goal
    region, and the stuck case cites the assumed formula.
    """
    p = _preds(sub)
    psi, phi = p["psi"], p["phi"]

    f_own = ReachFormula(own, psi)  # this component's goal
    done = p["eq"] | stuck  # the loop has finished: own guard no longer holds
    h_other = TaggedFormula(False, other_goal)
    h_own = TaggedFormula(False, f_own)
    h0 = frozenset({h_other})
    h1 = h0 | {h_own}

    # Loop branch: after clearing both assumptions, the invariant tree
    # proves  own =>> done  with the loop region itself as certificate.
    loop = invariant_proof_tree(sub, own, done, own, progressed=True)
    loop = ProofTree(h0, TaggedFormula(True, ReachFormula(own, done)),
                     "Clr", (loop,), removed=h_other)
    loop = ProofTree(h1, TaggedFormula(True, ReachFormula(own, done)),
                     "Clr", (loop,), removed=h_own)

    into_loop = ProofTree(
        h1, TaggedFormula(True, ReachFormula(phi, done)), "Str",
        (ProofTree(h1, TaggedFormula(True, ReachFormula(own | done, done)), "Spl",
                   (loop,
                    ProofTree(h1, TaggedFormula(True, ReachFormula(done, done)), "Trv"))),),
        strengthened=own | done)

    # Exit case: states with x = y step straight into the goal region.
    exit_case = ProofTree(
        h1, TaggedFormula(True, ReachFormula(p["eq"], psi)), "Stp",
        (ProofTree(h1, TaggedFormula(True, ReachFormula(post(sub, p["eq"]), psi)), "Str",
                   (ProofTree(h1, TaggedFormula(True, ReachFormula(psi, psi)), "Trv"),),
                   strengthened=psi),))

    after_done = ProofTree(
        h1, TaggedFormula(True, ReachFormula(done, psi)), "Str",
        (ProofTree(h1, TaggedFormula(True, ReachFormula(p["eq"] | stuck, psi)), "Spl",
                   (exit_case,
                    ProofTree(h1, TaggedFormula(True, ReachFormula(stuck, psi)), "Hyp"))),),
        strengthened=p["eq"] | stuck)

    body = ProofTree(h1, TaggedFormula(True, ReachFormula(phi, psi)), "Tra",
                     (into_loop, after_done), midpoint=done)
    step = ProofTree(h1, TaggedFormula(True, ReachFormula(post(sub, own), psi)), "Str",
                     (body,), strengthened=phi)
    opened = ProofTree(h1, TaggedFormula(False, f_own), "Stp", (step,))
    return ProofTree(h0, TaggedFormula(False, f_own), "Cof", (opened,))


@dataclass(frozen=True)
class GcdProof:
    system: object
    sub_upper: object
    sub_lower: object
    tree_upper: ProofTree
    tree_lower: ProofTree
    claims: tuple  # (Claim over main for the x<y goal, Claim for y<x)
    main_tree: ProofTree
    goal: ReachFormula


def build(model):
    """Assemble and check the whole composed proof for ``model``."""
    system, _ = efsm.expand(model)
    upper_model = efsm.select_component(model, list(UPPER), ["c1", "c2"])
    lower_model = efsm.select_component(model, list(LOWER), ["c1", "c2"])
    sub_u, _ = efsm.expand(upper_model)
    sub_l, _ = efsm.expand(lower_model)
    sub_u.name, sub_l.name = "upper", "lower"

    pu = _preds(sub_u)
    pl = _preds(sub_l)
    phi_u = ReachFormula(pu["lt"], pu["psi"])  # x < y goal, upper's own
    phi_l_in_u = ReachFormula(pu["gt"], pu["psi"])  # y < x goal, assumed
    phi_l = ReachFormula(pl["gt"], pl["psi"])
    phi_u_in_l = ReachFormula(pl["lt"], pl["psi"])

    t_upper = side_tree(sub_u, pu["lt"], pu["gt"], phi_l_in_u)
    t_lower = side_tree(sub_l, pl["gt"], pl["lt"], phi_u_in_l)

    c_upper, c_lower = compose_components(
        system, sub_u, sub_l, frozenset(), phi_u, phi_l, t_upper, t_lower,
        relaxed=True)

    pg = _preds(system)
    start = efsm.eval_pred(START, system)
    init = efsm.eval_pred(INIT, system)
    psi = pg["psi"]

    init_leg = ProofTree(
        frozenset(), TaggedFormula(False, ReachFormula(start, init)), "Stp",
        (ProofTree(frozenset(), TaggedFormula(True, ReachFormula(post(system, start), init)),
                   "Str",
                   (ProofTree(frozenset(), TaggedFormula(True, ReachFormula(init, init)),
                              "Trv"),),
                   strengthened=init),))

    exit_case = ProofTree(
        frozenset(), TaggedFormula(False, ReachFormula(pg["eq"], psi)), "Stp",
        (ProofTree(frozenset(), TaggedFormula(True, ReachFormula(post(system, pg["eq"]), psi)),
                   "Str",
                   (ProofTree(frozenset(), TaggedFormula(True, ReachFormula(psi, psi)),
                              "Trv"),),
                   strengthened=psi),))

    lt_leaf = ProofTree(frozenset(), c_upper.goal, "Claim", claim=c_upper.name)
    gt_leaf = ProofTree(frozenset(), c_lower.goal, "Claim", claim=c_lower.name)
    rest = ProofTree(
        frozenset(), TaggedFormula(False, ReachFormula(pg["eq"] | pg["gt"], psi)), "Spl",
        (exit_case, gt_leaf))
    cases = ProofTree(
        frozenset(), TaggedFormula(False, ReachFormula(pg["phi"], psi)), "Spl",
        (lt_leaf, rest))
    main_leg = ProofTree(
        frozenset(), TaggedFormula(False, ReachFormula(init, psi)), "Str",
        (cases,), strengthened=pg["phi"])

    goal = efsm.parse_formula(GOAL_TEXT, system)
    main_tree = ProofTree(
        frozenset(), TaggedFormula(False, goal), "Tra", (init_leg, main_leg),
        midpoint=init)

    rep = check_tree(system, main_tree,
                     {c_upper.name: c_upper, c_lower.name: c_lower})
    if not rep.accepted:
        raise AssertionError(f"main assembly rejected: {rep.first_failure()}")

    return GcdProof(system, sub_u, sub_l, t_upper, t_lower,
                    (c_upper, c_lower), main_tree, goal)


def bundle_steps(model):
    """The same proof as a checkable bundle document."""
    proof = build(model)
    c_upper, c_lower = proof.claims
    steps = [
        {"kind": "component", "name": "upper", "nodes": ["c1", "c2"],
         "arrows": list(UPPER), "relaxed": True},
        {"kind": "component", "name": "lower", "nodes": ["c1", "c2"],
         "arrows": list(LOWER), "relaxed": True},
        {"kind": "tree", "name": "upper-loop", "system": "upper",
         "tree": serialize.tree_to_json(proof.tree_upper)},
        {"kind": "tree", "name": "lower-loop", "system": "lower",
         "tree": serialize.tree_to_json(proof.tree_lower)},
        {"kind": "lift", "name": "lift-0", "from": "upper-loop"},
        {"kind": "lift", "name": "lift-1", "from": "lower-loop"},
        {"kind": "tree", "name": c_upper.name, "system": "main",
         "tree": serialize.tree_to_json(c_upper.tree)},
        {"kind": "tree", "name": c_lower.name, "system": "main",
         "tree": serialize.tree_to_json(c_lower.tree)},
        {"kind": "tree", "name": "main", "system": "main",
         "tree": serialize.tree_to_json(proof.main_tree)},
        {"kind": "oracle", "formula": GOAL_TEXT, "expect": "valid"},
    ]
    return serialize.bundle_to_json(steps)
