"""JSON forms for predicates, formulas, scripts, trees, and proof bundles.

Predicates serialize as an expression (when one is attached) or as an
explicit state list; states are ``{"node": ..., "vars": {...}}``
records.  A *bundle* is an ordered list of steps checked against one
main machine: component selections, trees over the main system or a
component, transfers of component sequents to the main system, and
oracle cross-checks.  Later steps may cite earlier ones by name via
claim leaves, which is how composed correctness proofs are packaged.
"""

from __future__ import annotations

import json

from . import efsm, ps_phases, ps_tagged
from .errors import RlvError, StructureError
from .semantics import holds_valid
from .ts import ReachFormula, is_component


# ----------------------------------------------------------- predicates

def label_to_json(system, label):
    if system.frame is not None:
        node, vals = label
        names = [v[0] for v in system.frame.model.vars]
        return {"node": node, "vars": dict(zip(names, [int(x) for x in vals]))}
    return {"node": str(label), "vars": {}}


def label_from_json(system, d):
    if system.frame is not None:
        names = [v[0] for v in system.frame.model.vars]
        try:
            return (d["node"], tuple(int(d["vars"][v]) for v in names))
        except KeyError as e:
            raise StructureError(f"state record missing variable {e}") from e
    return d["node"]


def pred_to_json(pred):
    if pred.expr is not None:
        return {"expr": pred.expr}
    if pred.origin is not None and pred.origin[0] == "post":
        return {"post": pred_to_json(pred.origin[1])}
    system = pred.system
    return {"states": [label_to_json(system, lab) for lab in pred.members()]}


def pred_from_json(system, d):
    if "expr" in d:
        return efsm.eval_pred(d["expr"], system)
    if "post" in d:
        from .ts import post
        return post(system, pred_from_json(system, d["post"]))
    if "states" in d:
        return system.predicate([label_from_json(system, s) for s in d["states"]])
    raise StructureError("predicate JSON must carry 'expr', 'post' or 'states'")


def formula_to_json(f):
    return {"lhs": pred_to_json(f.lhs), "rhs": pred_to_json(f.rhs)}


def formula_from_json(system, d):
    return ReachFormula(pred_from_json(system, d["lhs"]), pred_from_json(system, d["rhs"]))


def tagged_to_json(tf):
    return {"tag": tf.tag, "formula": formula_to_json(tf.formula)}


def tagged_from_json(system, d):
    if d.get("tag") not in ("T", "F"):
        raise StructureError("tag must be 'T' or 'F'")
    return ps_tagged.TaggedFormula(d["tag"] == "T", formula_from_json(system, d["formula"]))


# --------------------------------------------------------- phase scripts

def _ref_to_str(ref):
    return f"{ref.kind}:{ref.index}"


def _ref_from_str(s):
    kind, _, idx = s.partition(":")
    kind = kind.lower()
    if kind not in ("next", "x0") or not idx.isdigit():
        raise StructureError(f"bad premise reference {s!r}")
    return ps_phases.PhaseRef(kind, int(idx))


def script_to_json(script):
    phases = []
    for i, phase in enumerate(script.phases):
        entry = {"formulas": [_app_to_json(app) for app in phase]}
        if script.phase_rules:
            entry["rule"] = script.phase_rules[i]
        phases.append(entry)
    return {
        "hypotheses": [formula_to_json(h) for h in script.hypotheses],
        "target": formula_to_json(script.target) if script.target is not None else None,
        "phases": phases,
    }


def _app_to_json(app):
    d = {"formula": formula_to_json(app.conclusion), "rule": app.rule,
         "premises": [_ref_to_str(r) for r in app.premises]}
    if app.strengthened is not None:
        d["l_prime"] = pred_to_json(app.strengthened)
    if app.midpoint is not None:
        d["midpoint"] = pred_to_json(app.midpoint)
    if app.discharge is not None:
        dd = {"kind": app.discharge.kind}
        if app.discharge.invariant is not None:
            dd["invariant"] = pred_to_json(app.discharge.invariant)
        d["discharge"] = dd
    return d


def _app_from_json(system, d):
    discharge = None
    if "discharge" in d:
        inv = d["discharge"].get("invariant")
        discharge = ps_phases.TraDischarge(
            d["discharge"].get("kind", ""),
            pred_from_json(system, inv) if inv is not None else None)
    return ps_phases.RuleApp(
        d["rule"],
        formula_from_json(system, d["formula"]),
        tuple(_ref_from_str(s) for s in d.get("premises", ())),
        strengthened=pred_from_json(system, d["l_prime"]) if "l_prime" in d else None,
        midpoint=pred_from_json(system, d["midpoint"]) if "midpoint" in d else None,
        discharge=discharge)


def script_from_json(system, d):
    phases = tuple(tuple(_app_from_json(system, a) for a in ph.get("formulas", ()))
                   for ph in d.get("phases", ()))
    rules = tuple(ph.get("rule", "") for ph in d.get("phases", ()))
    return ps_phases.PhaseScript(
        tuple(formula_from_json(system, h) for h in d.get("hypotheses", ())),
        formula_from_json(system, d["target"]) if d.get("target") is not None else None,
        phases,
        rules if any(rules) else ())


# ----------------------------------------------------------------- trees

def tree_to_json(tree):
    d = {"hyps": sorted((tagged_to_json(h) for h in tree.hyps), key=json.dumps),
         "goal": tagged_to_json(tree.goal),
         "rule": tree.rule}
    if tree.strengthened is not None:
        d["l_prime"] = pred_to_json(tree.strengthened)
    if tree.midpoint is not None:
        d["midpoint"] = pred_to_json(tree.midpoint)
    if tree.cut is not None:
        d["cut"] = formula_to_json(tree.cut)
    if tree.removed is not None:
        d["removed"] = tagged_to_json(tree.removed)
    if tree.claim is not None:
        d["claim"] = tree.claim
    if tree.children:
        d["children"] = [tree_to_json(c) for c in tree.children]
    return d


def tree_from_json(system, d):
    return ps_tagged.ProofTree(
        hyps=frozenset(tagged_from_json(system, h) for h in d.get("hyps", ())),
        goal=tagged_from_json(system, d["goal"]),
        rule=d["rule"],
        children=tuple(tree_from_json(system, c) for c in d.get("children", ())),
        strengthened=pred_from_json(system, d["l_prime"]) if "l_prime" in d else None,
        midpoint=pred_from_json(system, d["midpoint"]) if "midpoint" in d else None,
        cut=formula_from_json(system, d["cut"]) if "cut" in d else None,
        removed=tagged_from_json(system, d["removed"]) if "removed" in d else None,
        claim=d.get("claim"))


def claim_to_json(claim):
    d = {"name": claim.name,
         "hyps": sorted((tagged_to_json(h) for h in claim.hyps), key=json.dumps),
         "goal": tagged_to_json(claim.goal),
         "via": claim.via}
    if claim.component is not None:
        d["component"] = claim.component.name
    if claim.tree is not None:
        d["tree"] = tree_to_json(claim.tree)
    return d


# --------------------------------------------------------------- bundles

def bundle_to_json(steps):
    return {"format": "rlv-bundle", "steps": list(steps)}


def check_bundle(model, doc):
    """Execute a bundle against ``model``; returns (accepted, step results).

    Each result is ``(step name, ok, messages)``.  Execution stops at
    the first structurally unusable step but collects check failures.
    """
    if doc.get("format") != "rlv-bundle":
        raise StructureError("not an rlv bundle (missing format tag)")
    main, _ = efsm.expand(model)
    systems = {"main": main}
    relax = {}
    claims = {}
    results = []
    ok_all = True
    for step in doc.get("steps", ()):
        kind = step.get("kind")
        name = step.get("name", kind)
        msgs = []
        if kind == "component":
            sub_model = efsm.select_component(model, step.get("arrows", ()),
                                              step.get("nodes", ()))
            sub, _ = efsm.expand(sub_model)
            sub.name = name
            relaxed = bool(step.get("relaxed", False))
            chk = is_component(sub, main, relaxed=relaxed)
            if not chk.ok:
                cond, a, b = chk.violations[0]
                msgs.append(f"condition ({cond}) violated: {a} -> {b} "
                            f"({len(chk.violations)} violations)")
            systems[name] = sub
            relax[name] = relaxed
        elif kind == "tree":
            sysname = step.get("system", "main")
            system = systems.get(sysname)
            if system is None:
                raise StructureError(f"step {name!r}: unknown system {sysname!r}")
            tree = tree_from_json(system, step["tree"])
            rep = ps_tagged.check_tree(system, tree, claims)
            if not rep.accepted:
                loc, m = rep.first_failure()
                msgs.append(f"node {loc}: {m}")
            else:
                claims[name] = ps_tagged.Claim(name, system, tree.hyps, tree.goal,
                                               "tree", tree=tree)
        elif kind == "lift":
            src = claims.get(step.get("from"))
            if src is None:
                msgs.append(f"claim {step.get('from')!r} not established "
                            "(missing or failed earlier step)")
            elif src.system is main:
                msgs.append("source claim is already over the main system")
            else:
                try:
                    claims[name] = ps_tagged.lift_component(
                        src.system, main, src.tree, name=name,
                        relaxed=relax.get(src.system.name, False))
                except RlvError as e:
                    msgs.append(str(e))
        elif kind == "oracle":
            formula = efsm.parse_formula(step["formula"], main)
            verdict = holds_valid(main, formula)
            expect = step.get("expect", "valid")
            if verdict.status != expect:
                msgs.append(f"oracle says {verdict.status}, bundle expects {expect}")
        else:
            raise StructureError(f"unknown bundle step kind {kind!r}")
        if msgs:
            ok_all = False
        results.append((name, not msgs, tuple(msgs)))
    return ok_all, results
