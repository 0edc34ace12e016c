"""Verification, simulation, and bounded synthesis for finite-state
plans over finite-domain action theories with noisy acting and sensing.
"""

from .belief import (
    BeliefAnnihilated,
    BeliefState,
    ObservationImpossible,
    bel,
    condition,
    eval_goal,
    initial_belief,
    know,
    progress,
)
from .controller import (
    Controller,
    ControllerError,
    canonical_key,
    enumerate_controllers,
    export_dot,
    from_json_dict,
    load_controller,
    to_json_dict,
    validate,
)
from .exec_epistemic import (
    EpistemicConfig,
    ExecutionStuck,
    ScenarioError,
    ScenarioStep,
    load_scenario,
    parse_scenario,
    run_scenario,
    step_belief,
    verify_epistemic,
)
from .exec_exact import (
    Config,
    Verdict,
    VerifierInputError,
    step_exact,
    step_outcomes,
    verify_exact,
    verify_goal_mass,
    verify_termination,
    verify_weak,
    verify_weight_threshold,
)
from .formulas import FormulaError, parse_condition, parse_objective
from .montecarlo import SimReport, absorption_probability, default_step_cap, simulate
from .synth import (
    CriterionError,
    SynthRequest,
    SynthResult,
    parse_criterion,
    synthesize,
)
from .theory import (
    NULL_OBSERVATION,
    Domain,
    DomainError,
    WorldState,
    load_domain,
    parse_domain,
    world_from_dict,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefAnnihilated",
    "BeliefState",
    "Config",
    "Controller",
    "ControllerError",
    "CriterionError",
    "Domain",
    "DomainError",
    "EpistemicConfig",
    "ExecutionStuck",
    "FormulaError",
    "NULL_OBSERVATION",
    "ObservationImpossible",
    "ScenarioError",
    "ScenarioStep",
    "SimReport",
    "SynthRequest",
    "SynthResult",
    "Verdict",
    "VerifierInputError",
    "WorldState",
    "absorption_probability",
    "bel",
    "canonical_key",
    "condition",
    "default_step_cap",
    "enumerate_controllers",
    "eval_goal",
    "export_dot",
    "from_json_dict",
    "initial_belief",
    "know",
    "load_controller",
    "load_domain",
    "load_scenario",
    "parse_condition",
    "parse_criterion",
    "parse_domain",
    "parse_objective",
    "parse_scenario",
    "progress",
    "run_scenario",
    "simulate",
    "step_belief",
    "step_exact",
    "step_outcomes",
    "synthesize",
    "to_json_dict",
    "validate",
    "verify_epistemic",
    "verify_exact",
    "verify_goal_mass",
    "verify_termination",
    "verify_weak",
    "verify_weight_threshold",
    "world_from_dict",
    "__version__",
]
