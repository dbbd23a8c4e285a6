"""Tagged-sequent proof system: finite trees, hypothesis management.

Goals and hypotheses are tagged formulas; the tag records whether a
step has fired since the goal was copied into the hypotheses.  The copy
rule installs an unprogressed copy of the goal, and the hypothesis rule
may only close a *progressed* goal against an unprogressed hypothesis:
without that discipline one could copy any formula and immediately cite
it, proving everything.  The step rule is the only one that sets the
tag.  Hypotheses are not constant: cut introduces a lemma, copy
installs the goal, clear drops a hypothesis.

Trees may also contain claim leaves, which cite an externally
established sequent (a :class:`Claim`): a component-transfer claim
carries a checked tree over a sub-system plus the sub-system witness,
a mutual-composition claim carries the symmetric assembly over two
transferable claims.  Citing a claim with fewer hypotheses under a
larger hypothesis set is the clear rule read bottom-up.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GenerationError, StructureError
from .ts import (ReachFormula, finals, is_component, post, transfer_formula)

RULES = ("Hyp", "Trv", "Str", "Spl", "Tra", "Stp", "Cut", "Cof", "Clr", "Claim")


@dataclass(frozen=True)
class TaggedFormula:
    progressed: bool  # rendered T (progressed) / F
    formula: ReachFormula

    @property
    def tag(self):
        return "T" if self.progressed else "F"


@dataclass(frozen=True)
class ProofTree:
    """One node: sequent (hyps |- goal), the rule applied, children."""

    hyps: frozenset  # of TaggedFormula
    goal: TaggedFormula
    rule: str
    children: tuple = ()
    strengthened: object = None  # Str
    midpoint: object = None  # Tra
    cut: object = None  # Cut: the introduced formula
    removed: object = None  # Clr: the dropped tagged formula
    claim: object = None  # Claim: name of the cited claim

    def node_count(self):
        return 1 + sum(c.node_count() for c in self.children)

    def rule_sequence(self):
        """Preorder rule labels (handy for golden comparisons)."""
        out = [self.rule]
        for c in self.children:
            out.extend(c.rule_sequence())
        return out


@dataclass(frozen=True)
class TreeReport:
    accepted: bool
    failures: tuple  # of (node path, message)
    node_count: int = 0

    def first_failure(self):
        return self.failures[0] if self.failures else None


def check_tree(system, tree, claims=None):
    """Check every node of ``tree`` against its rule schema.

    ``claims`` maps names to established :class:`Claim` sequents that
    claim leaves may cite.  Failures name the node path (child indices
    from the root) and the violated clause.
    """
    claims = claims or {}
    failures = []
    _check_node(system, tree, (), claims, failures)
    return TreeReport(not failures, tuple(failures), tree.node_count())


def _fail(failures, path, msg):
    failures.append(("/".join(map(str, path)) or "root", msg))


def _check_node(system, node, path, claims, failures):
    H = node.hyps
    b = node.goal.progressed
    f = node.goal.formula
    if f.system is not system:
        raise StructureError("tree formula owned by a different system")
    kids = node.children
    rule = node.rule

    def arity(k):
        if len(kids) != k:
            _fail(failures, path, f"{rule}: expected {k} premises, found {len(kids)}")
            return False
        return True

    if rule not in RULES:
        _fail(failures, path, f"unknown rule {rule!r}")
    elif rule == "Hyp":
        if arity(0):
            if not b:
                _fail(failures, path,
                      "Hyp: conclusion must be progressed (no step has fired "
                      "since the cited hypothesis became available)")
            if TaggedFormula(False, f) not in H:
                _fail(failures, path, "Hyp: no unprogressed copy of the goal in the hypotheses")
    elif rule == "Trv":
        if arity(0) and f.lhs != f.rhs:
            _fail(failures, path, "Trv: goal is not of shape r =>> r")
    elif rule == "Str":
        if arity(1):
            c = kids[0]
            lp = node.strengthened
            if c.hyps != H or c.goal.progressed != b:
                _fail(failures, path, "Str: premise must keep hypotheses and tag")
            if lp is None or c.goal.formula != ReachFormula(lp, f.rhs):
                _fail(failures, path, "Str: premise is not  l' =>> r  for the declared l'")
            elif not f.lhs.leq(lp):
                w = (f.lhs & ~lp).witness()
                _fail(failures, path, f"Str: l <= l' fails (witness {w})")
    elif rule == "Spl":
        if arity(2):
            c1, c2 = kids
            if c1.hyps != H or c2.hyps != H or c1.goal.progressed != b or c2.goal.progressed != b:
                _fail(failures, path, "Spl: premises must keep hypotheses and tag")
            if c1.goal.formula.rhs != f.rhs or c2.goal.formula.rhs != f.rhs:
                _fail(failures, path, "Spl: premise rhs differs from conclusion rhs")
            elif c1.goal.formula.lhs | c2.goal.formula.lhs != f.lhs:
                _fail(failures, path, "Spl: conclusion lhs is not the join of premise lhs")
    elif rule == "Tra":
        if arity(2):
            c1, c2 = kids
            m = node.midpoint
            if c1.hyps != H or c2.hyps != H or c1.goal.progressed != b or c2.goal.progressed != b:
                _fail(failures, path, "Tra: premises must keep hypotheses and tag")
            if m is None or c1.goal.formula != ReachFormula(f.lhs, m) \
                    or c2.goal.formula != ReachFormula(m, f.rhs):
                _fail(failures, path, "Tra: premises are not  l =>> m  and  m =>> r")
    elif rule == "Stp":
        if arity(1):
            c = kids[0]
            stuck = f.lhs & finals(system)
            if not stuck.is_empty():
                _fail(failures, path,
                      f"Stp: lhs contains a final state (witness {stuck.witness()})")
            if c.hyps != H:
                _fail(failures, path, "Stp: premise must keep hypotheses")
            if not c.goal.progressed:
                _fail(failures, path, "Stp: premise must be progressed")
            if c.goal.formula != ReachFormula(post(system, f.lhs), f.rhs):
                _fail(failures, path, "Stp: premise is not  post(l) =>> r")
    elif rule == "Cut":
        if arity(2):
            c1, c2 = kids
            phi = node.cut
            if phi is None:
                _fail(failures, path, "Cut: missing the introduced formula")
            else:
                lemma = TaggedFormula(False, phi)
                if c1.hyps != H or c1.goal != lemma:
                    _fail(failures, path, "Cut: first premise must prove the "
                                          "unprogressed lemma under the same hypotheses")
                if c2.hyps != (H | {lemma}) or c2.goal != node.goal:
                    _fail(failures, path, "Cut: second premise must prove the goal "
                                          "with the lemma added")
    elif rule == "Cof":
        if arity(1):
            c = kids[0]
            copy = TaggedFormula(False, f)
            if c.hyps != (H | {copy}) or c.goal != copy:
                _fail(failures, path, "Cof: premise must restate the goal, unprogressed, "
                                      "with its copy added to the hypotheses")
    elif rule == "Clr":
        if arity(1):
            c = kids[0]
            rm = node.removed
            if rm is None or rm not in H:
                _fail(failures, path, "Clr: removed hypothesis not present")
            elif c.hyps != (H - {rm}) or c.goal != node.goal:
                _fail(failures, path, "Clr: premise must drop exactly the removed hypothesis")
    elif rule == "Claim":
        if arity(0):
            cl = claims.get(node.claim)
            if cl is None:
                _fail(failures, path, f"Claim: unknown claim {node.claim!r}")
            elif cl.system is not system:
                _fail(failures, path, "Claim: cited claim is over a different system")
            elif cl.goal != node.goal:
                _fail(failures, path, "Claim: cited claim proves a different goal")
            elif not cl.hyps <= H:
                _fail(failures, path, "Claim: cited claim needs hypotheses not present here")

    for i, c in enumerate(kids):
        _check_node(system, c, path + (i,), claims, failures)


# ----------------------------------------------------------------- tactics


def invariant_proof_tree(system, l, r, q, progressed=False, hyps=frozenset()):
    """Tree reducing ``l =>> r`` to the invariant certificate ``q``.

    Shape: strengthen to ``q | r``, split; the trivial branch closes,
    the ``q`` branch copies itself, steps (so the tag flips), follows
    the invariant back to ``q | r``, splits, and closes by hypothesis
    and triviality.  Refuses when the certificate inclusions fail.
    The tree is valid for either root tag and under any ambient
    hypotheses, which embedding call sites rely on.
    """
    from .ps_cyclic import certify_invariant

    cert = certify_invariant(system, l, r, q)
    if not cert.accepted:
        raise GenerationError(f"certificate rejected: {cert.describe()}", cert.failures)
    hyps = frozenset(hyps)
    b = progressed
    f_l = ReachFormula(l, r)
    f_q = ReachFormula(q, r)
    f_r = ReachFormula(r, r)
    f_qr = ReachFormula(q | r, r)
    f_dq = ReachFormula(post(system, q), r)
    h1 = hyps | {TaggedFormula(False, f_q)}

    n52 = ProofTree(h1, TaggedFormula(True, f_r), "Trv")
    n51 = ProofTree(h1, TaggedFormula(True, f_q), "Hyp")
    n5 = ProofTree(h1, TaggedFormula(True, f_qr), "Spl", (n51, n52))
    n4 = ProofTree(h1, TaggedFormula(True, f_dq), "Str", (n5,), strengthened=q | r)
    n3 = ProofTree(h1, TaggedFormula(False, f_q), "Stp", (n4,))
    n21 = ProofTree(hyps, TaggedFormula(b, f_q), "Cof", (n3,))
    n22 = ProofTree(hyps, TaggedFormula(b, f_r), "Trv")
    n1 = ProofTree(hyps, TaggedFormula(b, f_qr), "Spl", (n21, n22))
    return ProofTree(hyps, TaggedFormula(b, f_l), "Str", (n1,), strengthened=q | r)


def compose_symmetric(system, hyps, phi1, phi2, t12, t21):
    """Symmetric mutual induction: close both goals from the two
    conditional proofs.

    ``t12`` proves ``phi2`` under ``hyps + {phi1}``; ``t21`` the mirror
    image.  For each goal: copy it, cut in the other formula (one
    branch is the matching conditional proof), and clear the copy so
    the remaining branch is the other conditional proof.
    """
    hyps = frozenset(hyps)

    def assemble(phi_a, phi_b, t_ab, t_ba):
        ha = TaggedFormula(False, phi_a)
        hb = TaggedFormula(False, phi_b)
        want_ab = (hyps | {ha}, TaggedFormula(False, phi_b))
        if (t_ab.hyps, t_ab.goal) != want_ab:
            raise GenerationError("conditional proof has the wrong root sequent")
        want_ba = (hyps | {hb}, TaggedFormula(False, phi_a))
        if (t_ba.hyps, t_ba.goal) != want_ba:
            raise GenerationError("conditional proof has the wrong root sequent")
        if phi_a == phi_b:
            after_cut = t_ba  # the copy is the cut formula; nothing to clear
        else:
            after_cut = ProofTree(hyps | {ha, hb}, TaggedFormula(False, phi_a),
                                  "Clr", (t_ba,), removed=ha)
        n1 = ProofTree(hyps | {ha}, TaggedFormula(False, phi_a), "Cut",
                       (t_ab, after_cut), cut=phi_b)
        return ProofTree(hyps, TaggedFormula(False, phi_a), "Cof", (n1,))

    tree1 = assemble(phi1, phi2, t12, t21)
    tree2 = assemble(phi2, phi1, t21, t12)
    for t in (tree1, tree2):
        rep = check_tree(system, t)
        if not rep.accepted:
            raise GenerationError(f"composed tree rejected: {rep.first_failure()}")
    return tree1, tree2


# ------------------------------------------------------------------ claims


@dataclass(frozen=True)
class Claim:
    """Sequent established outside a single tree (proved-by-lemma).

    ``via`` records the justification: ``"tree"`` (a checked tree over
    the same system), ``"component-transfer"`` (a checked tree over a
    sub-system passing the component conditions), or
    ``"mutual-composition"`` (a symmetric assembly whose claim leaves
    cite two transferred claims).  A claim is deliberately not a tree
    over the host system; fabricating one would misstate how the
    sequent was obtained.
    """

    name: str
    system: object
    hyps: frozenset
    goal: TaggedFormula
    via: str
    component: object = None
    tree: object = None
    relaxed: bool = False
    deps: tuple = ()


def lift_component(sub, system, tree, name="lifted", relaxed=False):
    """Transfer a checked sub-system sequent to the host system.

    Requires the component conditions (optionally the relaxed reading
    of condition (b), which is all the replay of step rules needs: a
    step's lhs never contains sub-system-final states, so host
    transitions out of those states are never consulted) and a tree
    that checks over the sub-system, where step images and finality are
    evaluated with respect to the sub-system.
    """
    chk = is_component(sub, system, relaxed=relaxed)
    if not chk.ok:
        raise GenerationError(
            f"not a component: condition {chk.violations[0][0]} violated at "
            f"{chk.violations[0][1]} -> {chk.violations[0][2]}", chk.violations)
    rep = check_tree(sub, tree)
    if not rep.accepted:
        raise GenerationError(f"tree rejected over the sub-system: {rep.first_failure()}")
    goal = TaggedFormula(tree.goal.progressed, transfer_formula(tree.goal.formula, system))
    hyps = frozenset(TaggedFormula(h.progressed, transfer_formula(h.formula, system))
                     for h in tree.hyps)
    return Claim(name, system, hyps, goal, "component-transfer",
                 component=sub, tree=tree, relaxed=relaxed)


def compose_components(system, sub0, sub1, hyps, phi0, phi1, t0, t1, relaxed=False):
    """Mutual composition across two components.

    ``t_i`` proves ``phi_i`` over ``sub_i`` under ``hyps`` plus the
    other formula; both sequents transfer to the host, where the
    symmetric assembly closes each goal unconditionally.  Reports which
    of the four obligations broke.
    """
    hyps = frozenset(hyps)
    lifted = []
    for i, (sub, t, mine, other) in enumerate(
            ((sub0, t0, phi0, phi1), (sub1, t1, phi1, phi0))):
        want_h = frozenset(TaggedFormula(h.progressed, transfer_formula(h.formula, sub))
                           for h in hyps) | {TaggedFormula(False, transfer_formula(other, sub))}
        if (t.hyps, t.goal) != (want_h, TaggedFormula(False, transfer_formula(mine, sub))):
            raise GenerationError(f"conditional proof {i}: wrong root sequent")
        try:
            lifted.append(lift_component(sub, system, t, name=f"lift-{i}", relaxed=relaxed))
        except GenerationError as e:
            raise GenerationError(f"component {i}: {e}", e.failures) from e
    l0, l1 = lifted
    claims = {l0.name: l0, l1.name: l1}

    def leaf(cl):
        return ProofTree(cl.hyps, cl.goal, "Claim", claim=cl.name)

    def assemble(phi_a, phi_b, cl_ab, cl_ba, name):
        ha = TaggedFormula(False, phi_a)
        hb = TaggedFormula(False, phi_b)
        c1 = leaf(cl_ab)  # hyps + {phi_a} |- phi_b
        if phi_a == phi_b:
            after_cut = leaf(cl_ba)
        else:
            after_cut = ProofTree(hyps | {ha, hb}, TaggedFormula(False, phi_a),
                                  "Clr", (leaf(cl_ba),), removed=ha)
        n1 = ProofTree(hyps | {ha}, TaggedFormula(False, phi_a), "Cut",
                       (c1, after_cut), cut=phi_b)
        tree = ProofTree(hyps, TaggedFormula(False, phi_a), "Cof", (n1,))
        rep = check_tree(system, tree, claims)
        if not rep.accepted:
            raise GenerationError(f"assembly rejected: {rep.first_failure()}")
        return Claim(name, system, hyps, TaggedFormula(False, phi_a),
                     "mutual-composition", tree=tree, deps=(l0, l1))

    phi0s = transfer_formula(phi0, system) if phi0.system is not system else phi0
    phi1s = transfer_formula(phi1, system) if phi1.system is not system else phi1
    c0 = assemble(phi0s, phi1s, l1, l0, "composed-0")
    c1 = assemble(phi1s, phi0s, l0, l1, "composed-1")
    return c0, c1


def check_claim(claim):
    """Re-verify a claim from scratch (recursively over its deps)."""
    if claim.via == "tree":
        rep = check_tree(claim.system, claim.tree)
        ok = rep.accepted and claim.goal == claim.tree.goal \
            and claim.hyps == claim.tree.hyps
        return ok, rep.failures
    if claim.via == "component-transfer":
        chk = is_component(claim.component, claim.system, relaxed=claim.relaxed)
        if not chk.ok:
            return False, (("component", f"{len(chk.violations)} violations"),)
        rep = check_tree(claim.component, claim.tree)
        if not rep.accepted:
            return False, rep.failures
        goal = TaggedFormula(claim.tree.goal.progressed,
                             transfer_formula(claim.tree.goal.formula, claim.system))
        hyps = frozenset(TaggedFormula(h.progressed, transfer_formula(h.formula, claim.system))
                         for h in claim.tree.hyps)
        if (hyps, goal) != (claim.hyps, claim.goal):
            return False, (("claim", "transferred sequent differs from the claimed one"),)
        return True, ()
    if claim.via == "mutual-composition":
        for d in claim.deps:
            ok, fails = check_claim(d)
            if not ok:
                return False, fails
        rep = check_tree(claim.system, claim.tree, {d.name: d for d in claim.deps})
        ok = rep.accepted and claim.goal == claim.tree.goal and claim.hyps == claim.tree.hyps
        return ok, rep.failures
    return False, (("claim", f"unknown justification {claim.via!r}"),)


def hypothesis_rule_is_guarded(tree):
    """Structural cross-check of the tag discipline.

    Every hypothesis-rule leaf citing a copy installed by an ancestor
    copy rule must have a step rule strictly between the two.  The tag
    bookkeeping enforces this already; this walker rechecks it without
    looking at tags.
    """

    def walk(node, installed, steps):
        if node.rule == "Hyp":
            cited = TaggedFormula(False, node.goal.formula)
            if cited in installed and installed[cited] == steps:
                return False
        if node.rule == "Stp":
            steps += 1
        if node.rule == "Cof":
            copy = TaggedFormula(False, node.goal.formula)
            if copy not in node.hyps:  # a genuine install, not a re-statement
                installed = dict(installed)
                installed[copy] = steps
        return all(walk(c, installed, steps) for c in node.children)

    return walk(tree, {}, 0)
