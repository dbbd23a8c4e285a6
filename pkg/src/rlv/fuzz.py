"""Differential fuzz harness tying the proof systems to the oracle.

Per random instance it asserts the cross-module invariants: the cyclic
decider agrees with the semantic oracle in both directions; on valid
formulas the synthesized certificate is accepted and the generated
phase script and proof tree check; the two reach-relation formulations
agree on enumerated maximal paths; and validity proved on a passing
component transfers to the whole system (under both the literal and
the relaxed reading of the component conditions).  Violations are
dumped as replayable model/formula files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import ps_cyclic, ps_phases, ps_tagged
from .semantics import enumerate_maximal_paths, holds_valid, leadsto, suffix_reaches
from .ts import ReachFormula, TransitionSystem, is_component, transfer_formula

EDGE_PROB = 0.3


def fault_active(name):
    """Test-build fault injection, enabled via the RLV_FAULT env var."""
    return os.environ.get("RLV_FAULT", "") == name


def random_system(rng, max_states):
    n = int(rng.integers(1, max_states + 1))
    adj = rng.random((n, n)) < EDGE_PROB
    edges = [(i, j) for i in range(n) for j in range(n) if adj[i, j]]
    return TransitionSystem([f"s{i}" for i in range(n)], edges, name="fuzz")


def random_predicate(rng, system):
    return system.predicate((rng.random(system.n) < 0.5).astype(np.bool_))


def random_component(rng, system):
    """Induced sub-system on a random nonempty state subset."""
    keep = rng.random(system.n) < 0.6
    if not keep.any():
        keep[int(rng.integers(system.n))] = True
    idx = np.flatnonzero(keep)
    remap = {int(i): k for k, i in enumerate(idx)}
    edges = [(remap[int(u)], remap[int(v)])
             for u, v in zip(system.src, system.dst)
             if keep[u] and keep[v]]
    return TransitionSystem([system.labels[int(i)] for i in idx], edges, name="fuzz-sub")


def system_to_model_text(system, name="fuzz"):
    """Render a raw system as a variable-free machine (for replay files)."""
    lines = [f"system {name} {{", "  nodes " + " ".join(str(l) for l in system.labels) + " ;"]
    for u, v in zip(system.src, system.dst):
        lines.append(f"  trans {system.labels[int(u)]} -> {system.labels[int(v)]} {{ }}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def predicate_to_expr(pred):
    labs = pred.members()
    if not labs:
        return "0 = 1"
    if len(labs) == pred.system.n:
        return "0 = 0"
    return " || ".join(f"c = {l}" for l in labs)


@dataclass
class Violation:
    index: int
    kind: str
    message: str
    dump: str | None = None


def _dump(dump_dir, index, system, formula, kind, message):
    if dump_dir is None:
        return None
    path = os.path.join(dump_dir, f"fail_{index:05d}")
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "model.rlv"), "w") as fh:
        fh.write(system_to_model_text(system))
    with open(os.path.join(path, "formula.txt"), "w") as fh:
        fh.write(f"{predicate_to_expr(formula.lhs)} =>> {predicate_to_expr(formula.rhs)}\n")
    with open(os.path.join(path, "README.txt"), "w") as fh:
        fh.write(
            f"invariant violated: {kind}\n{message}\n\n"
            "replay:\n"
            "  rlv autoprove   --model model.rlv --formula \"$(cat formula.txt)\"\n"
            "  rlv check-valid --model model.rlv --formula \"$(cat formula.txt)\"\n"
            "the two exit codes must agree; under the fault they do not.\n")
    return path


def run_fuzz(count, max_states, seed, dump_dir=None):
    """Run ``count`` seeded instances; returns (violations, stats)."""
    rng = np.random.default_rng(seed)
    violations = []
    stats = {"instances": count, "valid": 0, "invalid": 0,
             "components_checked": 0, "transfers_checked": 0}

    def report(idx, system, formula, kind, message):
        dump = _dump(dump_dir, idx, system, formula, kind, message)
        violations.append(Violation(idx, kind, message, dump))

    for idx in range(count):
        system = random_system(rng, max_states)
        formula = ReachFormula(random_predicate(rng, system),
                               random_predicate(rng, system))

        semantic = holds_valid(system, formula).valid
        result = ps_cyclic.autoprove(system, formula)
        proved = result.proved
        if fault_active("flip-autoprove"):
            proved = not proved
        stats["valid" if semantic else "invalid"] += 1
        if proved != semantic:
            report(idx, system, formula, "decision-coherence",
                   f"autoprove says {proved}, oracle says {semantic}")
            continue

        if result.proved and not ps_cyclic.replay_cyclic_proof(system, result.proof).accepted:
            report(idx, system, formula, "cyclic-replay", "trace replay rejected")

        paths, _ = enumerate_maximal_paths(system, formula.lhs, system.n)
        for p in paths[:8]:
            if leadsto(p, formula.rhs) != suffix_reaches(p, formula.rhs):
                report(idx, system, formula, "reach-relation",
                       "the two reach formulations disagree")
                break

        if semantic:
            q = ps_cyclic.synthesize_invariant(system, formula)
            if not ps_cyclic.certify_invariant(system, formula.lhs, formula.rhs, q).accepted:
                report(idx, system, formula, "certificate",
                       "synthesized certificate rejected on a valid formula")
                continue
            script = ps_phases.invariant_phase_script(system, formula.lhs, formula.rhs, q)
            if not ps_phases.check_script(system, script).accepted:
                report(idx, system, formula, "phase-script", "generated script rejected")
            tree = ps_tagged.invariant_proof_tree(system, formula.lhs, formula.rhs, q)
            if not ps_tagged.check_tree(system, tree).accepted:
                report(idx, system, formula, "proof-tree", "generated tree rejected")
            elif not ps_tagged.hypothesis_rule_is_guarded(tree):
                report(idx, system, formula, "tag-discipline",
                       "unguarded hypothesis citation in a generated tree")

        sub = random_component(rng, system)
        for relaxed in (False, True):
            chk = is_component(sub, system, relaxed=relaxed)
            stats["components_checked"] += 1
            if not chk.ok:
                continue
            sub_formula = ReachFormula(random_predicate(rng, sub), random_predicate(rng, sub))
            if holds_valid(sub, sub_formula).valid:
                stats["transfers_checked"] += 1
                lifted = transfer_formula(sub_formula, system)
                if not holds_valid(system, lifted).valid:
                    report(idx, system, lifted, "component-transfer",
                           f"validity did not transfer (relaxed={relaxed})")
    return violations, stats
