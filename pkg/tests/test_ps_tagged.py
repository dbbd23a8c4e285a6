import json

import numpy as np
import pytest

from rlv import efsm, serialize
from rlv.errors import GenerationError
from rlv.ps_tagged import (Claim, ProofTree, TaggedFormula, check_claim,
                           check_tree, compose_components, compose_symmetric,
                           hypothesis_rule_is_guarded, invariant_proof_tree,
                           lift_component)
from rlv.semantics import holds_valid
from rlv.ts import ReachFormula, TransitionSystem, post

from conftest import make_system
from rlv.fuzz import random_predicate, random_system


def tf(progressed, formula):
    return TaggedFormula(progressed, formula)


@pytest.fixture(scope="module")
def loop_tree(sum_loop, loop_certificate):
    l, r, q = loop_certificate
    return invariant_proof_tree(sum_loop, l, r, q)


class TestCheckTree:
    def test_trivial_leaf_under_any_hypotheses(self, chain3):
        r = ReachFormula(chain3.predicate(["s1"]), chain3.predicate(["s1"]))
        junk = tf(False, ReachFormula(chain3.top(), chain3.bottom()))
        for progressed in (False, True):  # the rule allows both tags
            t = ProofTree(frozenset({junk}), tf(progressed, r), "Trv")
            assert check_tree(chain3, t).accepted

    def test_loop_tree_accepted(self, sum_loop, loop_tree):
        rep = check_tree(sum_loop, loop_tree)
        assert rep.accepted
        assert rep.node_count == 9

    def test_loop_tree_structure(self, loop_tree):
        # preorder walk matches the textbook shape of the certificate tree
        assert loop_tree.rule_sequence() == [
            "Str", "Spl", "Cof", "Stp", "Str", "Spl", "Hyp", "Trv", "Trv"]
        # the step fires between the copy and the hypothesis citation
        assert hypothesis_rule_is_guarded(loop_tree)

    def test_generation_refused(self, sum_loop, loop_certificate):
        l, r, _ = loop_certificate
        bad_q = efsm.eval_pred("c = c1 && i <= m && s = i*(i+1) div 2", sum_loop)
        with pytest.raises(GenerationError) as e:
            invariant_proof_tree(sum_loop, l, r, bad_q)
        assert e.value.failures

    def test_copy_then_cite_without_step_is_rejected(self, chain3):
        # an invalid formula "proved" by copying the goal and citing it:
        # the checker rejects the citation because no step has fired
        bad = ReachFormula(chain3.predicate(["s0"]), chain3.bottom())
        assert not holds_valid(chain3, bad).valid
        copy = tf(False, bad)
        leaf = ProofTree(frozenset({copy}), tf(False, bad), "Hyp")
        tree = ProofTree(frozenset(), tf(False, bad), "Cof", (leaf,))
        rep = check_tree(chain3, tree)
        assert not rep.accepted
        assert "progressed" in rep.first_failure()[1]
        assert not hypothesis_rule_is_guarded(tree)

    def test_progressed_citation_needs_unprogressed_copy(self, chain3):
        f = ReachFormula(chain3.predicate(["s0"]), chain3.predicate(["s1"]))
        t = ProofTree(frozenset({tf(True, f)}), tf(True, f), "Hyp")
        assert not check_tree(chain3, t).accepted


class TestRuleBookkeeping:
    @pytest.fixture()
    def base(self, chain3):
        l = chain3.predicate(["s0"])
        r = chain3.predicate(["s2"])
        return chain3, ReachFormula(l, r)

    def test_str_wrong_strengthening(self, base):
        S, f = base
        child = ProofTree(frozenset(), tf(False, ReachFormula(S.bottom(), f.rhs)), "Trv")
        t = ProofTree(frozenset(), tf(False, f), "Str", (child,),
                      strengthened=S.bottom())
        rep = check_tree(S, t)
        assert any("l <= l'" in m for _, m in rep.failures)

    def test_spl_wrong_join(self, base):
        S, f = base
        c1 = ProofTree(frozenset(), tf(False, ReachFormula(S.bottom(), f.rhs)), "Trv")
        c2 = ProofTree(frozenset(), tf(False, ReachFormula(S.bottom(), f.rhs)), "Trv")
        t = ProofTree(frozenset(), tf(False, f), "Spl", (c1, c2))
        assert any("join" in m for _, m in check_tree(S, t).failures)

    def test_stp_final_state_witnessed(self, base):
        S, f = base
        bad = ReachFormula(S.top(), f.rhs)  # s2 is final
        child = ProofTree(frozenset(), tf(True, ReachFormula(post(S, S.top()), f.rhs)), "Trv")
        t = ProofTree(frozenset(), tf(False, bad), "Stp", (child,))
        assert any("final state" in m for _, m in check_tree(S, t).failures)

    def test_stp_premise_must_progress(self, base):
        S, f = base
        child = ProofTree(frozenset(), tf(False, ReachFormula(post(S, f.lhs), f.rhs)), "Trv")
        t = ProofTree(frozenset(), tf(False, f), "Stp", (child,))
        assert any("progressed" in m for _, m in check_tree(S, t).failures)

    def test_cut_bookkeeping(self, base):
        S, f = base
        lemma = ReachFormula(S.predicate(["s1"]), S.predicate(["s1"]))
        good1 = ProofTree(frozenset(), tf(False, lemma), "Trv")
        # second premise forgets to add the lemma
        bad2 = ProofTree(frozenset(), tf(False, ReachFormula(f.rhs, f.rhs)), "Trv")
        t = ProofTree(frozenset(), tf(False, ReachFormula(f.rhs, f.rhs)), "Cut",
                      (good1, bad2), cut=lemma)
        assert any("lemma added" in m for _, m in check_tree(S, t).failures)

    def test_clr_must_name_present_hypothesis(self, base):
        S, f = base
        h = tf(False, f)
        child = ProofTree(frozenset(), tf(False, ReachFormula(f.rhs, f.rhs)), "Trv")
        t = ProofTree(frozenset(), tf(False, ReachFormula(f.rhs, f.rhs)), "Clr",
                      (child,), removed=h)
        assert any("not present" in m for _, m in check_tree(S, t).failures)

    def test_cof_bookkeeping(self, base):
        S, f = base
        r = ReachFormula(f.rhs, f.rhs)
        child = ProofTree(frozenset(), tf(False, r), "Trv")  # copy not added
        t = ProofTree(frozenset(), tf(False, r), "Cof", (child,))
        assert not check_tree(S, t).accepted


class TestTransitivityContrast:
    def test_symmetric_split_checks_in_trees(self, sum_system):
        # splitting at a midpoint with both branches syntactic is exactly
        # the step the phase-script system's transitivity rule refuses
        goal = efsm.parse_formula("c = c0 =>> c = c2 && s = m*(m+1) div 2", sum_system)
        mid = efsm.eval_pred("c = c1 && i = 0 && s = 0", sum_system)
        hyp = tf(False, ReachFormula(efsm.eval_pred("c = c0", sum_system), mid))
        H = frozenset({hyp})

        first = ProofTree(
            H, tf(False, ReachFormula(goal.lhs, mid)), "Stp",
            (ProofTree(H, tf(True, ReachFormula(post(sum_system, goal.lhs), mid)), "Str",
                       (ProofTree(H, tf(True, ReachFormula(mid, mid)), "Trv"),),
                       strengthened=mid),))
        q = efsm.eval_pred("c = c1 && i <= m && s = i*(i+1) div 2", sum_system)
        second = invariant_proof_tree(sum_system, mid, goal.rhs, q, hyps=H)
        t = ProofTree(H, tf(False, goal), "Tra", (first, second), midpoint=mid)
        assert check_tree(sum_system, t).accepted


class TestComposeSymmetric:
    def test_trivial_pair(self, chain3):
        r = ReachFormula(chain3.predicate(["s1"]), chain3.predicate(["s1"]))
        h = tf(False, r)
        t = ProofTree(frozenset({h}), tf(False, r), "Trv")
        t1, t2 = compose_symmetric(chain3, frozenset(), r, r, t, t)
        assert check_tree(chain3, t1).accepted
        assert check_tree(chain3, t2).accepted

    def test_distinct_pair(self, chain3):
        r1 = ReachFormula(chain3.predicate(["s1"]), chain3.predicate(["s1"]))
        r2 = ReachFormula(chain3.predicate(["s2"]), chain3.predicate(["s2"]))
        t12 = ProofTree(frozenset({tf(False, r1)}), tf(False, r2), "Trv")
        t21 = ProofTree(frozenset({tf(False, r2)}), tf(False, r1), "Trv")
        t1, t2 = compose_symmetric(chain3, frozenset(), r1, r2, t12, t21)
        assert check_tree(chain3, t1).accepted
        assert t1.rule == "Cof" and t1.children[0].rule == "Cut"

    def test_missing_hypothesis_refused(self, chain3):
        r1 = ReachFormula(chain3.predicate(["s1"]), chain3.predicate(["s1"]))
        r2 = ReachFormula(chain3.predicate(["s2"]), chain3.predicate(["s2"]))
        bad12 = ProofTree(frozenset(), tf(False, r2), "Trv")  # hyp r1 missing
        t21 = ProofTree(frozenset({tf(False, r2)}), tf(False, r1), "Trv")
        with pytest.raises(GenerationError, match="root sequent"):
            compose_symmetric(chain3, frozenset(), r1, r2, bad12, t21)


class TestLift:
    def test_identity_lift(self, sum_loop, loop_tree):
        claim = lift_component(sum_loop, sum_loop, loop_tree, name="self")
        assert claim.goal == loop_tree.goal
        ok, fails = check_claim(claim)
        assert ok, fails

    def test_loop_lift_to_full_machine(self, sum_loop, sum_system, loop_tree):
        claim = lift_component(sum_loop, sum_system, loop_tree, name="loop")
        assert claim.system is sum_system
        ok, _ = check_claim(claim)
        assert ok
        # the transferred conclusion is semantically valid on the host
        assert holds_valid(sum_system, claim.goal.formula).valid

    def test_exit_violation_refused(self):
        S = make_system(3, [(0, 1), (1, 2), (1, 1)])
        sub = TransitionSystem(["s0", "s1"], [(0, 1), (1, 1)], name="sub")
        f = ReachFormula(sub.predicate(["s0"]), sub.predicate(["s0"]))
        t = ProofTree(frozenset(), tf(False, f), "Trv")
        with pytest.raises(GenerationError, match="condition c"):
            lift_component(sub, S, t)


class TestComposeComponents:
    def test_degenerate_whole_system(self, chain3):
        r1 = ReachFormula(chain3.predicate(["s1"]), chain3.predicate(["s1"]))
        r2 = ReachFormula(chain3.predicate(["s2"]), chain3.predicate(["s2"]))
        t0 = ProofTree(frozenset({tf(False, r2)}), tf(False, r1), "Trv")
        t1 = ProofTree(frozenset({tf(False, r1)}), tf(False, r2), "Trv")
        c0, c1 = compose_components(chain3, chain3, chain3, frozenset(),
                                    r1, r2, t0, t1)
        for c in (c0, c1):
            ok, fails = check_claim(c)
            assert ok, fails
            assert c.via == "mutual-composition"
            assert {d.via for d in c.deps} == {"component-transfer"}

    def test_swapped_hypotheses_refused(self, chain3):
        r1 = ReachFormula(chain3.predicate(["s1"]), chain3.predicate(["s1"]))
        r2 = ReachFormula(chain3.predicate(["s2"]), chain3.predicate(["s2"]))
        t0_bad = ProofTree(frozenset({tf(False, r1)}), tf(False, r1), "Trv")
        t1 = ProofTree(frozenset({tf(False, r1)}), tf(False, r2), "Trv")
        with pytest.raises(GenerationError, match="root sequent"):
            compose_components(chain3, chain3, chain3, frozenset(),
                               r1, r2, t0_bad, t1)


class TestMutationFuzz:
    def test_corruptions_rejected_or_still_valid(self):
        rng = np.random.default_rng(71)
        tried = 0
        while tried < 60:
            system = random_system(rng, 6)
            f = ReachFormula(random_predicate(rng, system),
                             random_predicate(rng, system))
            if not holds_valid(system, f).valid:
                continue
            from rlv.ps_cyclic import synthesize_invariant
            q = synthesize_invariant(system, f)
            tree = invariant_proof_tree(system, f.lhs, f.rhs, q)
            assert check_tree(system, tree).accepted
            mutated = _mutate(tree, rng, system)
            rep = check_tree(system, mutated)
            if rep.accepted:
                # semantic safety net: an accepted mutant must still be valid
                assert holds_valid(system, mutated.goal.formula).valid
            tried += 1


def _mutate(tree, rng, system):
    kind = rng.integers(0, 3)
    if kind == 0 and tree.strengthened is not None:
        return ProofTree(tree.hyps, tree.goal, tree.rule, tree.children,
                         strengthened=tree.strengthened & random_predicate(rng, system))
    if kind == 1:
        flipped = TaggedFormula(not tree.goal.progressed, tree.goal.formula)
        return ProofTree(tree.hyps, flipped, tree.rule, tree.children,
                         strengthened=tree.strengthened, midpoint=tree.midpoint,
                         cut=tree.cut, removed=tree.removed, claim=tree.claim)
    if tree.children:
        i = int(rng.integers(0, len(tree.children)))
        kids = list(tree.children)
        kids[i] = _mutate(kids[i], rng, system)
        return ProofTree(tree.hyps, tree.goal, tree.rule, tuple(kids),
                         strengthened=tree.strengthened, midpoint=tree.midpoint,
                         cut=tree.cut, removed=tree.removed, claim=tree.claim)
    return ProofTree(tree.hyps, tree.goal, "Hyp")


class TestSerialization:
    def test_tree_roundtrip(self, sum_loop, loop_tree):
        doc = serialize.tree_to_json(loop_tree)
        text1 = json.dumps(doc, sort_keys=True)
        back = serialize.tree_from_json(sum_loop, json.loads(text1))
        assert check_tree(sum_loop, back).accepted
        assert json.dumps(serialize.tree_to_json(back), sort_keys=True) == text1
        assert back.rule_sequence() == loop_tree.rule_sequence()
