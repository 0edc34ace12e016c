"""Belief-level execution: scenario replay and epistemic verification.

Here the controller runs against a designated real world while the agent
tracks a belief state. Physical steps spread the belief over the outcome
model and move the real world by the outcome that actually occurred;
sensing steps condition the belief on the reading the real world
produced. The controller branches on observation tokens as usual.

A plan is epistemically correct when, from every positive-weight initial
world taken as the real one, execution reaches the final control state
with the goal formula true at the resulting belief state. Two search
modes quantify over the runtime choices: `existential` asks for some
positive-likelihood run per world, `adversarial` for all of them.
Scenario files replay one designated run instead.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .belief import (
    BeliefAnnihilated,
    BeliefState,
    ObservationImpossible,
    condition,
    eval_goal,
    initial_belief,
    progress,
)
from .controller import Controller, validate
from .exec_exact import Config, Verdict, VerifierInputError
from .theory import NULL_OBSERVATION, Domain, WorldState


class ScenarioError(ValueError):
    """The scenario file is malformed or inconsistent with the domain."""


class ExecutionStuck(RuntimeError):
    """A belief-level step cannot proceed (dead end, not an input error)."""


@dataclass(frozen=True)
class ScenarioStep:
    action: str  # the advised action this step expects
    outcome: Optional[str] = None  # actual outcome, physical steps
    reading: Optional[str] = None  # declared reading token, sensing steps


@dataclass
class EpistemicConfig:
    control: object
    belief: BeliefState
    real: WorldState


def load_scenario(path) -> list:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    return parse_scenario(data)


def parse_scenario(data) -> list:
    if not isinstance(data, list):
        raise ScenarioError("scenario must be a JSON list of steps")
    steps = []
    for entry in data:
        if not isinstance(entry, dict) or "advised_action" not in entry:
            raise ScenarioError(f"bad scenario step: {entry!r}")
        reading = entry.get("reading")
        steps.append(
            ScenarioStep(
                action=str(entry["advised_action"]),
                outcome=entry.get("actual_outcome"),
                reading=None if reading is None else str(reading),
            )
        )
    return steps


def _poss_everywhere(domain: Domain, action: str, belief: BeliefState) -> bool:
    return all(domain.poss(action, world) for world in belief.worlds())


def step_belief(
    controller: Controller,
    domain: Domain,
    cfg: EpistemicConfig,
    step: ScenarioStep,
    poss_mode: str = "belief",
    real_mode: str = "outcome",
):
    """One scenario step; returns (next config, action, observation).

    `poss_mode` picks where the advised action's precondition must hold:
    "belief" requires it at every possible world, "real" only at the
    designated real world. `real_mode` picks how the real world moves on
    physical steps: "outcome" applies the scenario's actual outcome,
    "intended" applies the advised action itself.

    Dead ends (inexecutable advice, undefined transition) raise
    ExecutionStuck; contradictions between the scenario and the domain
    raise ScenarioError.
    """
    if cfg.control == controller.final:
        raise ScenarioError("scenario continues past the final state")
    advised = controller.advice.get(cfg.control)
    if advised is None:
        raise ExecutionStuck(f"state {cfg.control!r} has no advice")
    if step.action != advised:
        raise ScenarioError(
            f"scenario advises {step.action!r} but the controller advises "
            f"{advised!r} at {cfg.control!r}"
        )
    action = domain.actions[advised]
    if poss_mode == "belief":
        if not _poss_everywhere(domain, advised, cfg.belief):
            raise ExecutionStuck(f"{advised!r} is inexecutable in some possible world")
    elif not domain.poss(advised, cfg.real):
        raise ExecutionStuck(f"{advised!r} is inexecutable at the real world")

    if action.kind == "physical":
        if step.reading is not None:
            raise ScenarioError(f"physical step {advised!r} cannot carry a reading")
        actual = step.outcome if step.outcome is not None else advised
        model = domain.outcome_models.get(advised)
        if model is None:
            if actual != advised:
                raise ScenarioError(
                    f"{advised!r} has no outcome model; outcome {actual!r} is impossible"
                )
        elif actual not in {o.action for o in model.positive()}:
            raise ScenarioError(
                f"{actual!r} is not a positive-likelihood outcome of {advised!r}"
            )
        if real_mode == "intended":
            actual = advised
        if not domain.poss(actual, cfg.real):
            raise ScenarioError(f"outcome {actual!r} is inexecutable at the real world")
        try:
            belief = progress(cfg.belief, advised, domain)
        except BeliefAnnihilated as exc:
            raise ExecutionStuck(str(exc)) from exc
        real = domain.apply(actual, cfg.real)
        obs = NULL_OBSERVATION
    else:
        if step.reading is None:
            raise ScenarioError(f"sensing step {advised!r} needs a reading")
        model = domain.sensing_models[advised]
        try:
            reading = model.reading_by_token(step.reading)
        except KeyError as exc:
            raise ScenarioError(
                f"{step.reading!r} is not a declared reading of {advised!r}"
            ) from exc
        if model.likelihood(cfg.real, reading.value) <= 0.0:
            raise ScenarioError(
                f"reading {step.reading!r} has zero likelihood at the real world"
            )
        try:
            belief = condition(cfg.belief, advised, reading, domain)
        except ObservationImpossible as exc:
            raise ScenarioError(str(exc)) from exc
        real = cfg.real
        obs = reading.observation

    target = controller.transitions.get((cfg.control, obs))
    if target is None:
        raise ExecutionStuck(
            f"no transition from {cfg.control!r} on observation {obs!r}"
        )
    return EpistemicConfig(target, belief, real), advised, obs


def run_scenario(
    controller: Controller,
    domain: Domain,
    real0: WorldState,
    scenario: list,
    poss_mode: str = "belief",
    real_mode: str = "outcome",
    tracing: bool = False,
    collect: Optional[list] = None,
):
    """Replay a scenario from a designated real world.

    Returns (Verdict, final EpistemicConfig). Holds iff the final control
    state is reached within the scenario and the goal holds at the final
    belief; running out of scenario steps is Unknown; dead ends are
    Fails. `collect`, when given, receives per-step records
    (control, action, observation, belief, real) for tracing output.
    """
    defects = validate(controller, domain)
    if defects:
        raise VerifierInputError("controller is invalid: " + "; ".join(defects))
    weight = dict((w, wt) for w, wt in domain.initial_worlds).get(real0)
    if weight is None or weight <= 0.0:
        raise VerifierInputError(
            f"designated real world {real0!r} has no positive prior weight"
        )
    cfg = EpistemicConfig(controller.initial, initial_belief(domain, tracing), real0)
    trace = []
    consumed = 0
    for step in scenario:
        if cfg.control == controller.final:
            break
        try:
            nxt, action, obs = step_belief(
                controller, domain, cfg, step, poss_mode, real_mode
            )
        except ExecutionStuck as exc:
            return (
                Verdict(
                    "Fails",
                    witness=trace,
                    counterexample_world=real0,
                    note=str(exc),
                ),
                cfg,
            )
        trace.append((Config(cfg.control, cfg.real), action, obs))
        if collect is not None:
            collect.append((cfg.control, action, obs, nxt.belief, nxt.real))
        cfg = nxt
        consumed += 1
    if cfg.control != controller.final:
        return (
            Verdict(
                "Unknown",
                witness=trace,
                counterexample_world=real0,
                note="scenario exhausted before the final state",
            ),
            cfg,
        )
    note = ""
    if consumed < len(scenario):
        note = f"{len(scenario) - consumed} scenario steps unused"
    if eval_goal(cfg.belief, domain.goal):
        return Verdict("Holds", witnesses=[(real0, trace)], note=note), cfg
    return (
        Verdict(
            "Fails",
            witness=trace,
            counterexample_world=real0,
            note=(note + "; " if note else "") + "goal false at the final belief",
        ),
        cfg,
    )


def _successors(
    controller: Controller,
    domain: Domain,
    node: tuple,
    poss_mode: str,
    real_mode: str,
):
    """Positive-likelihood successor nodes of (control, belief, real)."""
    control, belief, real = node
    advised = controller.advice.get(control)
    if advised is None:
        return []
    if poss_mode == "belief":
        if not _poss_everywhere(domain, advised, belief):
            return []
    elif not domain.poss(advised, real):
        return []
    successors = []
    action = domain.actions[advised]
    if action.kind == "physical":
        target = controller.transitions.get((control, NULL_OBSERVATION))
        if target is None:
            return []
        try:
            next_belief = progress(belief, advised, domain)
        except BeliefAnnihilated:
            return []
        if real_mode == "intended":
            if domain.poss(advised, real):
                successors.append(
                    (
                        (target, next_belief, domain.apply(advised, real)),
                        advised,
                        NULL_OBSERVATION,
                    )
                )
        else:
            for outcome in domain.outcomes_of(advised, real):
                successors.append(
                    (
                        (target, next_belief, domain.apply(outcome.action, real)),
                        outcome.action,
                        NULL_OBSERVATION,
                    )
                )
    else:
        model = domain.sensing_models[advised]
        for reading in model.positive_readings(real):
            target = controller.transitions.get((control, reading.observation))
            if target is None:
                continue
            try:
                next_belief = condition(belief, advised, reading, domain)
            except ObservationImpossible:
                continue
            successors.append(
                ((target, next_belief, real), reading.token, reading.observation)
            )
    return successors


def _node_key(node: tuple) -> tuple:
    control, belief, real = node
    return (control, real.key(), belief.key())


def _search_existential(
    controller: Controller,
    domain: Domain,
    real0: WorldState,
    depth_bound: int,
    poss_mode: str,
    real_mode: str,
):
    """Breadth-first search for one goal-reaching run; returns
    (status, trace or None)."""
    start = (controller.initial, initial_belief(domain), real0)
    parent = {_node_key(start): None}
    nodes = {_node_key(start): start}
    frontier = [start]
    truncated = False
    for _depth in range(depth_bound + 1):
        next_frontier = []
        for node in frontier:
            control, belief, _real = node
            if control == controller.final:
                if eval_goal(belief, domain.goal):
                    steps = []
                    key = _node_key(node)
                    while parent[key] is not None:
                        prev_key, action, obs = parent[key]
                        prev = nodes[prev_key]
                        steps.append((Config(prev[0], prev[2]), action, obs))
                        key = prev_key
                    steps.reverse()
                    return "Holds", steps
                continue
            if _depth == depth_bound:
                truncated = True
                continue
            for nxt, action, obs in _successors(
                controller, domain, node, poss_mode, real_mode
            ):
                key = _node_key(nxt)
                if key not in parent:
                    parent[key] = (_node_key(node), action, obs)
                    nodes[key] = nxt
                    next_frontier.append(nxt)
        frontier = next_frontier
        if not frontier:
            break
    return ("Unknown" if truncated else "Fails"), None


def _search_adversarial(
    controller: Controller,
    domain: Domain,
    real0: WorldState,
    depth_bound: int,
    poss_mode: str,
    real_mode: str,
) -> str:
    """Check that every positive-likelihood run reaches the final state
    with the goal true.

    Nodes within depth_bound are explored once each (beliefs merge under
    the key rounding), giving a finite graph. A final node with the goal
    false or a non-final node with no successors is a failing run; a
    cycle is a run that never terminates, hence Fails. Otherwise the
    graph is a DAG of goal-reaching runs and the verdict is Holds, or
    Unknown when the bound cut off an unexplored node."""
    start = (controller.initial, initial_belief(domain), real0)
    start_key = _node_key(start)
    edges = {}  # key -> successor keys, or None where the bound cut off
    queue = deque([(start, start_key, 0)])
    seen = {start_key}
    truncated = False
    while queue:
        node, key, depth = queue.popleft()
        control, belief, _real = node
        if control == controller.final:
            if not eval_goal(belief, domain.goal):
                return "Fails"
            edges[key] = []
            continue
        if depth == depth_bound:
            truncated = True
            edges[key] = None
            continue
        successors = _successors(controller, domain, node, poss_mode, real_mode)
        if not successors:
            return "Fails"
        keys = []
        for nxt, _action, _obs in successors:
            nxt_key = _node_key(nxt)
            keys.append(nxt_key)
            if nxt_key not in seen:
                seen.add(nxt_key)
                queue.append((nxt, nxt_key, depth + 1))
        edges[key] = keys

    # breadth-first interning means edges can still point at a node that
    # was cut off; that node carries None and acts as a leaf below
    white, gray, black = 0, 1, 2
    color = {key: white for key in edges}
    stack = [(start_key, iter(edges[start_key] or ()))]
    color[start_key] = gray
    while stack:
        key, children = stack[-1]
        pushed = False
        for child in children:
            if color[child] == gray:
                return "Fails"
            if color[child] == white:
                color[child] = gray
                stack.append((child, iter(edges[child] or ())))
                pushed = True
                break
        if not pushed:
            color[key] = black
            stack.pop()
    return "Unknown" if truncated else "Holds"


def verify_epistemic(
    controller: Controller,
    domain: Domain,
    mode: str = "existential",
    depth_bound: int = 64,
    poss_mode: str = "belief",
    real_mode: str = "outcome",
    workers: int = 1,
) -> Verdict:
    """Epistemic correctness over every positive-weight initial world
    taken as the designated real world.

    existential: some positive-likelihood run per world reaches the final
    state with the goal true at the belief. adversarial: every such run
    must. Search deeper than `depth_bound` steps returns Unknown rather
    than guessing.
    """
    if mode not in ("existential", "adversarial"):
        raise VerifierInputError(f"unknown epistemic mode {mode!r}")
    defects = validate(controller, domain)
    if defects:
        raise VerifierInputError("controller is invalid: " + "; ".join(defects))

    worlds = [(w, wt) for w, wt in domain.initial_worlds if wt > 0.0]

    def check(entry):
        world, _weight = entry
        if mode == "existential":
            return _search_existential(
                controller, domain, world, depth_bound, poss_mode, real_mode
            )
        return (
            _search_adversarial(
                controller, domain, world, depth_bound, poss_mode, real_mode
            ),
            None,
        )

    if workers > 1 and len(worlds) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, worlds))
    else:
        results = [check(w) for w in worlds]

    witnesses = []
    unknown_world = None
    for (world, _weight), (status, trace) in zip(worlds, results):
        if status == "Fails":
            return Verdict(
                "Fails",
                counterexample_world=world,
                note=f"no qualifying run from real world {world!r}"
                if mode == "existential"
                else f"some run from real world {world!r} fails",
            )
        if status == "Unknown" and unknown_world is None:
            unknown_world = world
        if trace is not None:
            witnesses.append((world, trace))
    if unknown_world is not None:
        return Verdict(
            "Unknown",
            counterexample_world=unknown_world,
            note=f"depth bound {depth_bound} reached",
        )
    return Verdict("Holds", witnesses=witnesses)
