"""Deterministic and outcome-branching execution over the config graph.

A config pairs a control state with a world. With noise-free acting the
controller induces one run per initial world (step_exact); with a
nontrivial outcome model each step branches over the executable
alternatives (step_outcomes), and correctness criteria become
reachability questions over the finite config graph:

- verify_exact: every initial world's unique run ends at the final
  control state with the goal true.
- verify_weak: from every initial world some branch does.
- verify_termination: every reachable config can still reach the final
  control state.
- verify_weight_threshold: the weak check restricted to initial worlds
  heavier than a cutoff (strictly).
- verify_goal_mass: the prior mass of initial worlds passing the weak
  check must reach a threshold.

All checks here need noise-free sensing; noisy sensors belong to the
belief-level checker.
"""

from __future__ import annotations

import itertools
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .controller import Controller, validate
from .formulas import eval_condition, has_belief_atoms, mentioned_fluents
from .theory import NULL_OBSERVATION, Domain, DomainError, WorldState


class VerifierInputError(ValueError):
    """Raised when inputs violate a checker's applicability conditions."""


class Config(NamedTuple):
    control: object
    world: WorldState


@dataclass
class Verdict:
    status: str  # "Holds" | "Fails" | "Unknown"
    witness: Optional[list] = None  # one trace: list of (Config, action, obs)
    counterexample_world: Optional[WorldState] = None
    witnesses: list = field(default_factory=list)  # [(initial world, trace)]
    note: str = ""

    def holds(self) -> bool:
        return self.status == "Holds"


def _checked(controller: Controller, domain: Domain) -> None:
    defects = validate(controller, domain)
    if defects:
        raise VerifierInputError("controller is invalid: " + "; ".join(defects))


def _require_objective_goal(domain: Domain) -> None:
    if has_belief_atoms(domain.goal):
        raise VerifierInputError(
            "goal contains belief atoms; use the belief-level checker"
        )


def _require_exact_sensing(domain: Domain) -> None:
    """Noise-free sensing: exactly one live reading everywhere.

    Checked statically when the relevant state space is small; larger
    spaces fall back to erroring at the first noisy expansion.
    """
    for model in domain.sensing_models.values():
        if model.is_gaussian:
            raise VerifierInputError(
                f"sensor of {model.action!r} reports continuous readings; "
                "use the belief-level checker"
            )
        relevant = set()
        for condition, _ in model.table:
            relevant |= set(mentioned_fluents(condition))
        names = sorted(relevant)
        size = 1
        for name in names:
            size *= len(domain.fluents[name].values)
        if size > 4096:
            continue
        others = {
            n: domain.fluents[n].values[0] for n in domain.fluents if n not in relevant
        }
        pools = [domain.fluents[n].values for n in names]
        for combo in itertools.product(*pools):
            world = WorldState({**others, **dict(zip(names, combo))})
            if len(model.positive_readings(world)) != 1:
                raise VerifierInputError(
                    f"sensor of {model.action!r} is noisy at {world!r}; "
                    "use the belief-level checker"
                )


def _positive_worlds(domain: Domain) -> list:
    return [(w, wt) for w, wt in domain.initial_worlds if wt > 0.0]


def _expand_exact(controller: Controller, domain: Domain, cfg: Config):
    """Unique successor as (config, action, observation), or None."""
    if cfg.control == controller.final:
        return None
    action = controller.advice.get(cfg.control)
    if action is None:
        return None
    if not domain.poss(action, cfg.world):
        return None
    world = domain.apply(action, cfg.world)
    try:
        obs = domain.exact_observation(action, world)
    except DomainError as exc:
        raise VerifierInputError(str(exc)) from exc
    target = controller.transitions.get((cfg.control, obs))
    if target is None:
        return None
    return Config(target, world), action, obs


def step_exact(controller: Controller, domain: Domain, cfg: Config) -> Optional[Config]:
    """One noise-free step; None when final, inexecutable, or stuck."""
    expanded = _expand_exact(controller, domain, cfg)
    return expanded[0] if expanded else None


def _expand_outcomes(controller: Controller, domain: Domain, cfg: Config) -> list:
    """Successors under outcome branching, sorted by (action, observation)."""
    if cfg.control == controller.final:
        return []
    advised = controller.advice.get(cfg.control)
    if advised is None:
        return []
    successors = []
    if domain.actions[advised].kind == "sensing":
        if domain.poss(advised, cfg.world):
            try:
                obs = domain.exact_observation(advised, cfg.world)
            except DomainError as exc:
                raise VerifierInputError(str(exc)) from exc
            target = controller.transitions.get((cfg.control, obs))
            if target is not None:
                successors.append((Config(target, cfg.world), advised, obs))
    else:
        target = controller.transitions.get((cfg.control, NULL_OBSERVATION))
        if target is not None:
            for outcome in domain.outcomes_of(advised, cfg.world):
                world = domain.apply(outcome.action, cfg.world)
                successors.append(
                    (Config(target, world), outcome.action, NULL_OBSERVATION)
                )
    successors.sort(key=lambda entry: (entry[1], entry[2]))
    return successors


def step_outcomes(controller: Controller, domain: Domain, cfg: Config) -> list:
    """Successor configs with the actions that produce them."""
    return [(nxt, action) for nxt, action, _obs in _expand_outcomes(controller, domain, cfg)]


def _trace_from(parent: dict, cfg: Config) -> list:
    steps = []
    while parent[cfg] is not None:
        prev, action, obs = parent[cfg]
        steps.append((prev, action, obs))
        cfg = prev
    steps.reverse()
    return steps


def verify_exact(controller: Controller, domain: Domain) -> Verdict:
    """Every positive-weight initial world's unique run must reach the
    final state with the goal true there."""
    _checked(controller, domain)
    _require_objective_goal(domain)
    _require_exact_sensing(domain)
    if not domain.is_deterministic():
        raise VerifierInputError(
            "outcome models are nontrivial; use the outcome-branching criteria"
        )
    witnesses = []
    for world, _weight in _positive_worlds(domain):
        cfg = Config(controller.initial, world)
        trace = []
        visited = {cfg}
        while True:
            if cfg.control == controller.final:
                if eval_condition(domain.goal, cfg.world):
                    witnesses.append((world, trace))
                    break
                return Verdict(
                    "Fails",
                    witness=trace,
                    counterexample_world=world,
                    note="goal false at the final state",
                )
            expanded = _expand_exact(controller, domain, cfg)
            if expanded is None:
                return Verdict(
                    "Fails",
                    witness=trace,
                    counterexample_world=world,
                    note="run is stuck before the final state",
                )
            nxt, action, obs = expanded
            trace.append((cfg, action, obs))
            if nxt in visited:
                return Verdict(
                    "Fails",
                    witness=trace,
                    counterexample_world=world,
                    note="run revisits a configuration and diverges",
                )
            visited.add(nxt)
            cfg = nxt
    return Verdict("Holds", witnesses=witnesses)


def _weak_single(controller: Controller, domain: Domain, world: WorldState):
    """Breadth-first search for one goal-reaching branch from `world`."""
    start = Config(controller.initial, world)
    parent = {start: None}
    queue = deque([start])
    while queue:
        cfg = queue.popleft()
        if cfg.control == controller.final:
            if eval_condition(domain.goal, cfg.world):
                return True, _trace_from(parent, cfg)
            continue
        for nxt, action, obs in _expand_outcomes(controller, domain, cfg):
            if nxt not in parent:
                parent[nxt] = (cfg, action, obs)
                queue.append(nxt)
    return False, None


def _map_worlds(task, worlds: list, workers: int) -> list:
    if workers > 1 and len(worlds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task, worlds))
    return [task(w) for w in worlds]


def verify_weak(controller: Controller, domain: Domain, workers: int = 1) -> Verdict:
    """Some outcome branch must reach the goal from every initial world."""
    _checked(controller, domain)
    _require_objective_goal(domain)
    _require_exact_sensing(domain)
    worlds = _positive_worlds(domain)
    results = _map_worlds(
        lambda entry: _weak_single(controller, domain, entry[0]), worlds, workers
    )
    witnesses = []
    for (world, _weight), (ok, trace) in zip(worlds, results):
        if not ok:
            return Verdict(
                "Fails",
                counterexample_world=world,
                note="no outcome branch reaches the goal",
            )
        witnesses.append((world, trace))
    return Verdict("Holds", witnesses=witnesses)


def verify_termination(controller: Controller, domain: Domain) -> Verdict:
    """Every config reachable under outcome branching must still be able
    to reach the final control state."""
    _checked(controller, domain)
    _require_exact_sensing(domain)
    origin = {}
    parent = {}
    order = []
    edges = {}
    queue = deque()
    for world, _weight in _positive_worlds(domain):
        cfg = Config(controller.initial, world)
        if cfg not in parent:
            parent[cfg] = None
            origin[cfg] = world
            order.append(cfg)
            queue.append(cfg)
    while queue:
        cfg = queue.popleft()
        successors = _expand_outcomes(controller, domain, cfg)
        edges[cfg] = [nxt for nxt, _a, _o in successors]
        for nxt, action, obs in successors:
            if nxt not in parent:
                parent[nxt] = (cfg, action, obs)
                origin[nxt] = origin[cfg]
                order.append(nxt)
                queue.append(nxt)

    reverse = {cfg: [] for cfg in parent}
    for cfg, targets in edges.items():
        for nxt in targets:
            reverse[nxt].append(cfg)
    can_finish = set()
    stack = [cfg for cfg in parent if cfg.control == controller.final]
    can_finish.update(stack)
    while stack:
        cfg = stack.pop()
        for prev in reverse[cfg]:
            if prev not in can_finish:
                can_finish.add(prev)
                stack.append(prev)

    for cfg in order:
        if cfg not in can_finish:
            return Verdict(
                "Fails",
                witness=_trace_from(parent, cfg),
                counterexample_world=origin[cfg],
                note=f"config (control={cfg.control!r}, world={cfg.world!r}) "
                "cannot reach the final state",
            )
    return Verdict("Holds")


def verify_weight_threshold(
    controller: Controller, domain: Domain, kappa: float, workers: int = 1
) -> Verdict:
    """Weak-plan check for every initial world of weight strictly above
    `kappa`. The comparison is strict: a world weighing exactly `kappa`
    is exempt."""
    _checked(controller, domain)
    _require_objective_goal(domain)
    _require_exact_sensing(domain)
    note = ""
    total = sum(weight for _w, weight in domain.initial_worlds)
    if kappa < 0.0 or kappa >= total:
        note = f"threshold {kappa} lies outside [0, total weight {total})"
    worlds = [(w, wt) for w, wt in domain.initial_worlds if wt > kappa]
    results = _map_worlds(
        lambda entry: _weak_single(controller, domain, entry[0]), worlds, workers
    )
    witnesses = []
    for (world, _weight), (ok, trace) in zip(worlds, results):
        if not ok:
            return Verdict(
                "Fails",
                counterexample_world=world,
                note=(note + "; " if note else "")
                + f"world above weight threshold {kappa} has no goal-reaching branch",
            )
        witnesses.append((world, trace))
    return Verdict("Holds", witnesses=witnesses, note=note)


def verify_goal_mass(
    controller: Controller, domain: Domain, kappa: float, workers: int = 1
) -> Verdict:
    """The prior mass of initial worlds admitting a goal-reaching branch,
    normalized by the total prior, must be at least `kappa`. At kappa >= 1
    the check requires literally every positive-weight world to pass, so
    the verdict cannot drift across float rounding."""
    _checked(controller, domain)
    _require_objective_goal(domain)
    _require_exact_sensing(domain)
    worlds = _positive_worlds(domain)
    results = _map_worlds(
        lambda entry: _weak_single(controller, domain, entry[0]), worlds, workers
    )
    total = sum(weight for _w, weight in domain.initial_worlds)
    passing = 0.0
    witnesses = []
    first_failure = None
    for (world, weight), (ok, trace) in zip(worlds, results):
        if ok:
            passing += weight
            witnesses.append((world, trace))
        elif first_failure is None:
            first_failure = world
    mass = passing / total
    note = f"goal-reaching mass {mass:.9f} of threshold {kappa}"
    if kappa >= 1.0:
        achieved = first_failure is None
    else:
        achieved = mass >= kappa
    if achieved:
        return Verdict("Holds", witnesses=witnesses, note=note)
    return Verdict("Fails", counterexample_world=first_failure, note=note)
