"""Command-line surface.

Subcommands: check-valid, certify, synth-q, autoprove, check-script,
check-tree, component, expand, fuzz.  Exit codes: 0 the property/check
holds, 1 it does not (with witnesses in the report), 2 parse/usage
error.  ``--json-out`` writes the machine-readable report next to the
human-readable one printed on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import efsm, fuzz, ps_cyclic, ps_phases, ps_tagged, serialize
from .errors import GenerationError, RlvError
from .reports import Report, dump_json
from .semantics import holds_valid
from .ts import is_component
from .serialize import label_to_json


def _load_system(path):
    with open(path) as fh:
        model = efsm.parse_model(fh.read())
    system, warnings = efsm.expand(model)
    return model, system, warnings


def _path_json(path):
    return [label_to_json(path.system, lab) for lab in path.labels()]


def cmd_check_valid(args):
    _, system, warnings = _load_system(args.model)
    formula = efsm.parse_formula(args.formula, system)
    verdict = holds_valid(system, formula)
    rep = Report(verdict.status)
    rep.stats.update(states=system.n, transitions=system.num_transitions,
                     range_warnings=len(warnings))
    if verdict.counterexample is not None:
        rep.add("counterexample", "maximal path from the lhs missing the rhs",
                witness=_path_json(verdict.counterexample))
    return rep


def cmd_certify(args):
    _, system, _ = _load_system(args.model)
    formula = efsm.parse_formula(args.formula, system)
    q = efsm.eval_pred(args.invariant, system)
    res = ps_cyclic.certify_invariant(system, formula.lhs, formula.rhs, q)
    rep = Report("accepted" if res.accepted else "rejected")
    rep.stats.update(states=system.n, invariant_size=q.count)
    for cond, wit in res.failures:
        rep.add("certificate", f"inclusion failed: {cond}",
                witness=label_to_json(system, wit) if wit is not None else None)
    return rep


def cmd_synth_q(args):
    _, system, _ = _load_system(args.model)
    formula = efsm.parse_formula(args.formula, system)
    q = ps_cyclic.synthesize_invariant(system, formula)
    res = ps_cyclic.certify_invariant(system, formula.lhs, formula.rhs, q)
    rep = Report("accepted" if res.accepted else "rejected")
    rep.stats.update(invariant_size=q.count)
    rep.add("invariant", "synthesized certificate",
            witness=[label_to_json(system, l) for l in q.members()[:20]])
    for cond, wit in res.failures:
        rep.add("certificate", f"inclusion failed: {cond}",
                witness=label_to_json(system, wit) if wit is not None else None)
    return rep


def cmd_autoprove(args):
    _, system, _ = _load_system(args.model)
    formula = efsm.parse_formula(args.formula, system)
    result = ps_cyclic.autoprove(system, formula)
    proved = result.proved
    if fuzz.fault_active("flip-autoprove"):
        proved = not proved
    rep = Report("proved" if proved else "refuted")
    if result.proved:
        rep.stats.update(trace_length=result.proof.length,
                         cycle_index=result.proof.cycle_index)
        rep.add("trace", " -> ".join(str(p.count) for p in result.proof.trace)
                + f"  (cycle at {result.proof.cycle_index})")
    elif result.refutation is not None:
        r = result.refutation
        rep.stats.update(failed_at_step=r.step_index)
        rep.add("refutation", f"final state off the rhs at step {r.step_index}",
                witness=label_to_json(system, r.witness))
        if r.counterexample is not None:
            rep.add("counterexample", "maximal path from the lhs missing the rhs",
                    witness=_path_json(r.counterexample))
    return rep


def cmd_check_script(args):
    _, system, _ = _load_system(args.model)
    with open(args.script) as fh:
        doc = json.load(fh)
    script = serialize.script_from_json(system, doc)
    res = ps_phases.check_script(system, script)
    rep = Report("accepted" if res.accepted else "rejected")
    rep.stats.update(phases=len(script.phases))
    for i, ok, _ in res.phase_results:
        rep.add(f"phase {i}", "ok" if ok else "failed")
    for loc, msg in res.failures:
        rep.add(loc, msg)
    return rep


def cmd_check_tree(args):
    model, system, _ = _load_system(args.model)
    with open(args.tree) as fh:
        doc = json.load(fh)
    if doc.get("format") == "rlv-bundle":
        ok, results = serialize.check_bundle(model, doc)
        rep = Report("accepted" if ok else "rejected")
        rep.stats.update(steps=len(results))
        for name, step_ok, msgs in results:
            rep.add(name, "ok" if step_ok else "; ".join(msgs))
        return rep
    tree = serialize.tree_from_json(system, doc)
    res = ps_tagged.check_tree(system, tree)
    rep = Report("accepted" if res.accepted else "rejected")
    rep.stats.update(nodes=res.node_count)
    for loc, msg in res.failures:
        rep.add(f"node {loc}", msg)
    return rep


def cmd_component(args):
    model, system, _ = _load_system(args.model)
    arrows = [int(x) for x in args.select_arrows.split(",") if x]
    nodes = [x for x in args.select_nodes.split(",") if x]
    sub_model = efsm.select_component(model, arrows, nodes)
    sub, _ = efsm.expand(sub_model)
    chk = is_component(sub, system, relaxed=args.relaxed)
    rep = Report("accepted" if chk.ok else "rejected")
    rep.stats.update(reading="relaxed" if args.relaxed else "literal",
                     sub_states=sub.n, sub_transitions=sub.num_transitions)
    by_cond = {}
    for cond, a, b in chk.violations:
        by_cond.setdefault(cond, []).append((a, b))
    for cond in ("a", "b", "c"):
        if cond in by_cond:
            a, b = by_cond[cond][0]
            rep.add(f"condition ({cond})",
                    f"{len(by_cond[cond])} violations, first: {a} -> {b}")
        else:
            rep.add(f"condition ({cond})", "holds")
    return rep


def cmd_expand(args):
    model, system, warnings = _load_system(args.model)
    rep = Report("ok")
    rep.stats.update(states=system.n, transitions=system.num_transitions,
                     range_warnings=len(warnings), finals=int(system.finals_mask.sum()))
    for i, arrow in enumerate(model.arrows, start=1):
        rep.add(f"arrow {i}", arrow.text)
    for w in warnings[:10]:
        rep.add(f"arrow {w.arrow}", f"update leaves {w.var} out of range "
                                    f"(value {w.value})", witness=str(w.state))
    return rep


def cmd_fuzz(args):
    violations, stats = fuzz.run_fuzz(args.count, args.max_states, args.seed,
                                      dump_dir=args.dump_dir)
    rep = Report("ok" if not violations else "violation")
    rep.stats.update(stats)
    rep.stats["violations"] = len(violations)
    for v in violations:
        rep.add(f"instance {v.index}", f"{v.kind}: {v.message}",
                witness=v.dump)
    return rep


def build_parser():
    ap = argparse.ArgumentParser(prog="rlv", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, *flags):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        if "model" in flags:
            p.add_argument("--model", required=True)
        if "formula" in flags:
            p.add_argument("--formula", required=True)
        p.add_argument("--json-out")
        return p

    add("check-valid", cmd_check_valid, "model", "formula")
    p = add("certify", cmd_certify, "model", "formula")
    p.add_argument("--invariant", required=True)
    add("synth-q", cmd_synth_q, "model", "formula")
    add("autoprove", cmd_autoprove, "model", "formula")
    p = add("check-script", cmd_check_script, "model")
    p.add_argument("--script", required=True)
    p = add("check-tree", cmd_check_tree, "model")
    p.add_argument("--tree", required=True)
    p = add("component", cmd_component, "model")
    p.add_argument("--select-arrows", required=True)
    p.add_argument("--select-nodes", required=True)
    p.add_argument("--relaxed", action="store_true")
    add("expand", cmd_expand, "model")
    p = add("fuzz", cmd_fuzz)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--max-states", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-dir")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        rep = args.fn(args)
    except (RlvError, GenerationError, OSError, json.JSONDecodeError) as e:
        rep = Report("error")
        rep.add("error", str(e))
    rep.stats["wall_ms"] = round((time.perf_counter() - t0) * 1000.0, 1)
    print(rep.render())
    if args.json_out:
        dump_json(rep, args.json_out)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
