"""Regenerate the golden files.  Run from the repo root:

    python tests/make_goldens.py

Outputs are deterministic; a diff after regeneration means the
serialized artifact formats or the generators changed.
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from rlv import efsm, gcd_proof, serialize
from rlv.ps_phases import invariant_phase_script
from rlv.ps_tagged import invariant_proof_tree

ROOT = pathlib.Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"


def dump(name, doc):
    path = GOLDEN / name
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print("wrote", path)


def main():
    GOLDEN.mkdir(exist_ok=True)
    sum_model = efsm.parse_model((ROOT / "models" / "sum.rlv").read_text())
    loop_model = efsm.select_component(sum_model, [2], ["c1"])
    loop, _ = efsm.expand(loop_model)
    l = efsm.eval_pred("c = c1 && i = 0 && s = 0", loop)
    r = efsm.eval_pred("c = c1 && i = m && s = i*(i+1) div 2", loop)
    q = efsm.eval_pred("c = c1 && i < m && s = i*(i+1) div 2", loop)

    dump("invariant_script.json",
         serialize.script_to_json(invariant_phase_script(loop, l, r, q)))
    dump("invariant_tree.json",
         serialize.tree_to_json(invariant_proof_tree(loop, l, r, q)))

    gcd_model = efsm.parse_model((ROOT / "models" / "gcd.rlv").read_text())
    dump("gcd_bundle.json", gcd_proof.bundle_steps(gcd_model))


if __name__ == "__main__":
    main()
