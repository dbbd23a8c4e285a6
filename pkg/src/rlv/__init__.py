"""Reachability checker and proof-system toolkit for finite transition systems."""

from .errors import (EvalError, ExpandError, GenerationError, ParseError,
                     RlvError, StructureError)
from .ts import (ComponentCheck, FinitePath, ReachFormula, StatePredicate,
                 TransitionSystem, finals, is_component, post,
                 transfer_formula, transfer_predicate)
from .semantics import (Verdict, enumerate_maximal_paths, holds_valid,
                        leadsto, suffix_reaches)
from .efsm import (EfsmModel, eval_pred, expand, parse_formula, parse_model,
                   select_component)
from .ps_cyclic import (CyclicProof, autoprove, certify_invariant,
                        check_step_conditions, replay_cyclic_proof,
                        step_premise, synthesize_invariant)
from .ps_phases import (PhaseRef, PhaseScript, RuleApp, TraDischarge,
                        check_rule_app, check_script, invariant_phase_script,
                        tra_rule_app)
from .ps_tagged import (Claim, ProofTree, TaggedFormula, check_claim,
                        check_tree, compose_components, compose_symmetric,
                        hypothesis_rule_is_guarded, invariant_proof_tree,
                        lift_component)

__version__ = "0.1.0"
