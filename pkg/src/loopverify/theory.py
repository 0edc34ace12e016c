"""Finite-domain action theories: worlds, actions, noise models, parsing.

A domain fixes a finite set of fluents with finite value domains, a set of
ground actions (physical or sensing), outcome models attaching likelihoods
to the alternatives a physical action may produce when intended, sensing
models attaching likelihoods to the readings a sensing action may report,
a weighted set of initial worlds, and a goal formula.

Everything is immutable after parsing and safe to share across threads.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

from .formulas import (
    FormulaError,
    eval_condition,
    eval_value,
    mentioned_fluents,
    parse_condition,
    parse_objective,
    parse_value_expr,
)

# observation token emitted by every physical action
NULL_OBSERVATION = "0"

# static validation enumerates at most this many assignments per check
_STATIC_CHECK_LIMIT = 4096


class DomainError(ValueError):
    """Raised for structurally invalid domain descriptions."""


@dataclass(frozen=True)
class FluentDecl:
    name: str
    kind: str  # "int" or "enum"
    values: tuple

    def contains(self, value) -> bool:
        return value in self.values


class WorldState:
    """Immutable total assignment of values to fluents."""

    __slots__ = ("_values", "_key", "_hash")

    def __init__(self, values: dict):
        self._values = dict(values)
        self._key = tuple(sorted(self._values.items()))
        self._hash = hash(self._key)

    def __getitem__(self, fluent: str):
        return self._values[fluent]

    def __contains__(self, fluent: str) -> bool:
        return fluent in self._values

    def __iter__(self):
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other) -> bool:
        return isinstance(other, WorldState) and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._key)
        return f"WorldState({inner})"

    def key(self) -> tuple:
        return self._key

    def as_dict(self) -> dict:
        return dict(self._values)

    def updated(self, changes: dict) -> "WorldState":
        merged = dict(self._values)
        merged.update(changes)
        return WorldState(merged)


@dataclass(frozen=True)
class Effect:
    fluent: str
    expr: object  # value-expression AST
    clamp: bool = False  # clamp integer endpoint overflow instead of erroring


@dataclass(frozen=True)
class GroundAction:
    name: str
    kind: str  # "physical" or "sensing"
    precondition: object  # condition AST
    effects: tuple  # tuple[Effect, ...], at most one per fluent


@dataclass(frozen=True)
class Outcome:
    action: str  # the action that actually occurs
    likelihood: float


@dataclass(frozen=True)
class OutcomeModel:
    """Distribution over which action occurs when `intended` is performed.

    Likelihoods are normalized at parse time; `scale` records the factor
    so unnormalized input files stay inspectable.
    """

    intended: str
    outcomes: tuple  # tuple[Outcome, ...], declared order
    scale: float = 1.0

    def positive(self) -> tuple:
        return tuple(o for o in self.outcomes if o.likelihood > 0.0)


@dataclass(frozen=True)
class Reading:
    token: str
    value: float  # the number the sensor reports (identifier for tables)
    observation: str  # controller-visible observation token


@dataclass(frozen=True)
class SensingModel:
    """Likelihood of sensor readings for one sensing action.

    Exactly one of `table` (state-conditioned rows of discrete likelihoods,
    first matching row wins) or a Gaussian model (mean taken from a fluent,
    fixed variance) is present. Every model declares the finite reading
    list the controller can branch on.
    """

    action: str
    readings: tuple  # tuple[Reading, ...]
    table: tuple = ()  # tuple[(condition AST, {token: likelihood})]
    mean_fluent: str = ""
    variance: float = 0.0

    @property
    def is_gaussian(self) -> bool:
        return bool(self.mean_fluent)

    def likelihood(self, world: "WorldState", value: float) -> float:
        """Relative weight of the sensor reporting `value` in `world`."""
        if self.is_gaussian:
            return gaussian_density(value, float(world[self.mean_fluent]), self.variance)
        for condition, row in self.table:
            if eval_condition(condition, world):
                for reading in self.readings:
                    if reading.value == value:
                        return row.get(reading.token, 0.0)
                return 0.0
        return 0.0

    def reading_by_token(self, token: str) -> Reading:
        for reading in self.readings:
            if reading.token == token:
                return reading
        raise KeyError(token)

    def positive_readings(self, world: "WorldState") -> tuple:
        """Readings with positive likelihood in `world`, declared order."""
        return tuple(r for r in self.readings if self.likelihood(world, r.value) > 0.0)


def gaussian_density(value: float, mean: float, variance: float) -> float:
    """Normal density with the third argument a variance, not a deviation."""
    return math.exp(-((value - mean) ** 2) / (2.0 * variance)) / math.sqrt(
        2.0 * math.pi * variance
    )


@dataclass
class Domain:
    name: str
    fluents: dict  # name -> FluentDecl, declaration order
    actions: dict  # name -> GroundAction, declaration order
    outcome_models: dict  # intended action name -> OutcomeModel
    sensing_models: dict  # sensing action name -> SensingModel
    initial_worlds: tuple  # tuple[(WorldState, float)], declared order
    goal: object  # goal formula AST (may contain belief atoms)
    goal_source: str = ""
    notes: str = ""
    _observation_order: tuple = field(default=(), repr=False)

    def observations(self) -> tuple:
        """All observation tokens: the null token first, then sensing
        tokens in declaration order (first occurrence wins)."""
        return self._observation_order

    def poss(self, action: str, world: WorldState) -> bool:
        return eval_condition(self.actions[action].precondition, world)

    def apply(self, action: str, world: WorldState) -> WorldState:
        """Successor world of executing `action`; precondition must hold."""
        act = self.actions[action]
        if not eval_condition(act.precondition, world):
            raise DomainError(f"{action} is not executable at {world!r}")
        changes = {}
        for effect in act.effects:
            value = eval_value(effect.expr, world)
            decl = self.fluents[effect.fluent]
            if decl.kind == "int":
                if isinstance(value, float):
                    if not value.is_integer():
                        raise DomainError(
                            f"effect on {effect.fluent} produced non-integer {value!r}"
                        )
                    value = int(value)
                if effect.clamp:
                    value = min(max(value, decl.values[0]), decl.values[-1])
            if not decl.contains(value):
                raise DomainError(f"effect on {effect.fluent} left its domain: {value!r}")
            changes[effect.fluent] = value
        return world.updated(changes) if changes else world

    def outcomes_of(self, action: str, world: WorldState) -> list:
        """Executable positive-likelihood alternatives of intending `action`.

        An action without an outcome model is its own single outcome.
        Order follows the model declaration; an empty list means no
        alternative is executable (a dead end for the caller).
        """
        model = self.outcome_models.get(action)
        if model is None:
            if self.poss(action, world):
                return [Outcome(action, 1.0)]
            return []
        return [o for o in model.positive() if self.poss(o.action, world)]

    def exact_observation(self, action: str, world: WorldState) -> str:
        """Observation token under noise-free sensing.

        Physical actions emit the null token. A sensing action must have
        exactly one positive-likelihood reading at `world`; anything else
        means the sensor is noisy and needs the belief-level semantics.
        """
        act = self.actions[action]
        if act.kind == "physical":
            return NULL_OBSERVATION
        model = self.sensing_models[action]
        live = model.positive_readings(world)
        if len(live) != 1:
            raise DomainError(
                f"sensor of {action} is not noise-free at {world!r} "
                f"({len(live)} live readings); use the belief-level semantics"
            )
        return live[0].observation

    def is_deterministic(self) -> bool:
        """True when every outcome model is the trivial self-outcome."""
        for model in self.outcome_models.values():
            positive = model.positive()
            if len(positive) != 1 or positive[0].action != model.intended:
                return False
        return True

    def world_space_size(self) -> int:
        size = 1
        for decl in self.fluents.values():
            size *= len(decl.values)
        return size

    def enumerate_worlds(self):
        names = list(self.fluents)
        pools = [self.fluents[n].values for n in names]
        for combo in itertools.product(*pools):
            yield WorldState(dict(zip(names, combo)))


def parse_domain(data) -> Domain:
    """Build a validated Domain from a JSON document (text or parsed)."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise DomainError(f"domain file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError("domain description must be a JSON object")

    fluents = _parse_fluents(data.get("fluents"))
    actions = _parse_actions(data.get("actions"), fluents)
    models = _parse_outcome_models(data.get("outcome_models", []), actions)
    sensing = _parse_sensing_models(data.get("sensing_models", []), fluents, actions)
    for action in actions.values():
        if action.kind == "sensing" and action.name not in sensing:
            raise DomainError(f"sensing action {action.name!r} needs a sensing model")
    worlds = _parse_initial(data.get("initial"), fluents)
    goal_src = data.get("goal")
    if not isinstance(goal_src, str):
        raise DomainError("goal must be a formula string")
    try:
        goal = parse_objective(goal_src, fluents)
    except FormulaError as exc:
        raise DomainError(f"bad goal: {exc}") from exc

    observation_order = [NULL_OBSERVATION]
    for model in sensing.values():
        for reading in model.readings:
            if reading.observation not in observation_order:
                observation_order.append(reading.observation)

    domain = Domain(
        name=str(data.get("name", "domain")),
        fluents=fluents,
        actions=actions,
        outcome_models=models,
        sensing_models=sensing,
        initial_worlds=worlds,
        goal=goal,
        goal_source=goal_src,
        notes=str(data.get("notes", "")),
        _observation_order=tuple(observation_order),
    )
    _check_effect_ranges(domain)
    _check_sensor_coverage(domain)
    return domain


def load_domain(path) -> Domain:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_domain(json.load(handle))


def world_from_dict(domain: Domain, raw: dict) -> WorldState:
    """Validate a fluent->value mapping and intern it as a WorldState."""
    if not isinstance(raw, dict):
        raise DomainError("world must be an object mapping fluents to values")
    if set(raw) != set(domain.fluents):
        raise DomainError(
            f"world must assign every fluent exactly once: {sorted(raw)!r}"
        )
    values = {}
    for name, value in raw.items():
        decl = domain.fluents[name]
        if decl.kind == "int" and isinstance(value, float) and value.is_integer():
            value = int(value)
        if not decl.contains(value):
            raise DomainError(f"value {value!r} not in domain of {name!r}")
        values[name] = value
    return WorldState(values)


def _parse_fluents(raw) -> dict:
    if not isinstance(raw, list) or not raw:
        raise DomainError("fluents must be a nonempty list")
    fluents = {}
    for entry in raw:
        if not isinstance(entry, dict) or "name" not in entry:
            raise DomainError(f"bad fluent entry: {entry!r}")
        name = entry["name"]
        if name in fluents:
            raise DomainError(f"duplicate fluent {name!r}")
        if "range" in entry:
            bounds = entry["range"]
            if (
                not isinstance(bounds, list)
                or len(bounds) != 2
                or not all(isinstance(b, int) and not isinstance(b, bool) for b in bounds)
                or bounds[0] > bounds[1]
            ):
                raise DomainError(f"bad range for {name!r}: {bounds!r}")
            values = tuple(range(bounds[0], bounds[1] + 1))
            kind = "int"
        elif "values" in entry:
            values = tuple(entry["values"])
            if not values:
                raise DomainError(f"fluent {name!r} has an empty value list")
            if len(set(values)) != len(values):
                raise DomainError(f"fluent {name!r} repeats a value")
            if all(isinstance(v, int) and not isinstance(v, bool) for v in values):
                values = tuple(sorted(values))
                kind = "int"
            elif all(isinstance(v, str) for v in values):
                kind = "enum"
            else:
                raise DomainError(f"fluent {name!r} mixes value types")
        else:
            raise DomainError(f"fluent {name!r} needs a range or values list")
        fluents[name] = FluentDecl(name, kind, values)
    return fluents


def _parse_actions(raw, fluents: dict) -> dict:
    if not isinstance(raw, list) or not raw:
        raise DomainError("actions must be a nonempty list")
    actions = {}
    for entry in raw:
        if not isinstance(entry, dict) or "name" not in entry:
            raise DomainError(f"bad action entry: {entry!r}")
        name = entry["name"]
        if name in actions:
            raise DomainError(f"duplicate action {name!r}")
        kind = entry.get("kind", "physical")
        if kind not in ("physical", "sensing"):
            raise DomainError(f"action {name!r} has unknown kind {kind!r}")
        try:
            precondition = parse_condition(entry.get("precondition", "true"), fluents)
        except FormulaError as exc:
            raise DomainError(f"bad precondition for {name!r}: {exc}") from exc
        effects = []
        targets = set()
        for eff in entry.get("effects", []):
            target = eff.get("fluent")
            if target not in fluents:
                raise DomainError(f"effect of {name!r} targets unknown fluent {target!r}")
            if target in targets:
                raise DomainError(f"effect of {name!r} writes {target!r} twice")
            targets.add(target)
            try:
                expr = parse_value_expr(eff.get("value"), fluents)
            except FormulaError as exc:
                raise DomainError(f"bad effect for {name!r}: {exc}") from exc
            clamp = bool(eff.get("clamp", False))
            if clamp and fluents[target].kind != "int":
                raise DomainError(f"clamp on non-integer fluent {target!r}")
            effects.append(Effect(target, expr, clamp))
        if kind == "sensing" and effects:
            raise DomainError(f"sensing action {name!r} must not have effects")
        actions[name] = GroundAction(name, kind, precondition, tuple(effects))
    return actions


def _parse_outcome_models(raw, actions: dict) -> dict:
    if not isinstance(raw, list):
        raise DomainError("outcome_models must be a list")
    models = {}
    for entry in raw:
        intended = entry.get("intended")
        if intended not in actions:
            raise DomainError(f"outcome model for unknown action {intended!r}")
        if intended in models:
            raise DomainError(f"duplicate outcome model for {intended!r}")
        if actions[intended].kind != "physical":
            raise DomainError(f"outcome model on non-physical action {intended!r}")
        declared = entry.get("outcomes")
        if not isinstance(declared, list) or not declared:
            raise DomainError(f"outcome model of {intended!r} needs outcomes")
        outcomes = []
        seen = set()
        for item in declared:
            actual = item.get("actual")
            if actual not in actions:
                raise DomainError(f"outcome of {intended!r} names unknown action {actual!r}")
            if actions[actual].kind != "physical":
                raise DomainError(f"outcome of {intended!r} names sensing action {actual!r}")
            if actual in seen:
                raise DomainError(f"outcome model of {intended!r} repeats {actual!r}")
            seen.add(actual)
            likelihood = item.get("likelihood")
            if not isinstance(likelihood, (int, float)) or likelihood < 0:
                raise DomainError(f"bad likelihood for outcome {actual!r} of {intended!r}")
            outcomes.append(Outcome(actual, float(likelihood)))
        if intended not in seen:
            raise DomainError(f"outcome model of {intended!r} must include {intended!r}")
        total = sum(o.likelihood for o in outcomes)
        if total <= 0.0:
            raise DomainError(f"outcome model of {intended!r} has zero total weight")
        scale = 1.0
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-9):
            # constant positive factors do not change the distribution
            scale = total
            outcomes = [Outcome(o.action, o.likelihood / total) for o in outcomes]
        models[intended] = OutcomeModel(intended, tuple(outcomes), scale)
    return models


def _parse_sensing_models(raw, fluents: dict, actions: dict) -> dict:
    if not isinstance(raw, list):
        raise DomainError("sensing_models must be a list")
    sensing = {}
    for entry in raw:
        name = entry.get("action")
        if name not in actions:
            raise DomainError(f"sensing model for unknown action {name!r}")
        if actions[name].kind != "sensing":
            raise DomainError(f"sensing model on physical action {name!r}")
        if name in sensing:
            raise DomainError(f"duplicate sensing model for {name!r}")

        readings = []
        tokens = set()
        for item in entry.get("readings", []):
            token = str(item["token"])
            if token == NULL_OBSERVATION:
                raise DomainError(
                    f"reading token {NULL_OBSERVATION!r} is reserved for physical actions"
                )
            if token in tokens:
                raise DomainError(f"sensor of {name!r} repeats reading {token!r}")
            tokens.add(token)
            value = item.get("value")
            if value is None:
                # numeric tokens denote themselves; symbolic ones get an ordinal id
                try:
                    value = float(token)
                except ValueError:
                    value = float(len(readings))
            elif not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DomainError(f"bad value for reading {token!r} of {name!r}")
            observation = str(item.get("observation", token))
            if observation == NULL_OBSERVATION:
                raise DomainError(
                    f"observation {NULL_OBSERVATION!r} is reserved for physical actions"
                )
            readings.append(Reading(token, float(value), observation))
        if not readings:
            raise DomainError(f"sensor of {name!r} declares no readings")

        if "gaussian" in entry:
            if "table" in entry:
                raise DomainError(f"sensor of {name!r} mixes table and gaussian forms")
            gauss = entry["gaussian"]
            mean_fluent = gauss.get("mean_fluent")
            if mean_fluent not in fluents or fluents[mean_fluent].kind != "int":
                raise DomainError(f"gaussian sensor of {name!r} needs an integer mean fluent")
            variance = gauss.get("variance")
            if not isinstance(variance, (int, float)) or variance <= 0:
                raise DomainError(f"gaussian sensor of {name!r} needs variance > 0")
            sensing[name] = SensingModel(
                name, tuple(readings), mean_fluent=mean_fluent, variance=float(variance)
            )
            continue

        rows = []
        for row in entry.get("table", []):
            try:
                condition = parse_condition(row.get("when", "true"), fluents)
            except FormulaError as exc:
                raise DomainError(f"bad sensor row for {name!r}: {exc}") from exc
            weights = row.get("likelihoods")
            if not isinstance(weights, dict) or not weights:
                raise DomainError(f"sensor row for {name!r} needs likelihoods")
            for token, weight in weights.items():
                if token not in tokens:
                    raise DomainError(
                        f"sensor row for {name!r} uses undeclared reading {token!r}"
                    )
                if not isinstance(weight, (int, float)) or weight < 0:
                    raise DomainError(f"bad sensor likelihood for {name!r}: {weight!r}")
            rows.append((condition, {t: float(w) for t, w in weights.items()}))
        if not rows:
            raise DomainError(f"sensor of {name!r} needs a table or gaussian form")
        sensing[name] = SensingModel(name, tuple(readings), table=tuple(rows))
    return sensing


def _parse_initial(raw, fluents: dict) -> tuple:
    if not isinstance(raw, list) or not raw:
        raise DomainError("initial must be a nonempty list of weighted worlds")
    worlds = []
    seen = set()
    total = 0.0
    for entry in raw:
        assignment = entry.get("state")
        if not isinstance(assignment, dict):
            raise DomainError(f"bad initial world entry: {entry!r}")
        if set(assignment) != set(fluents):
            raise DomainError(
                f"initial world must assign every fluent exactly once: {assignment!r}"
            )
        for name, value in assignment.items():
            if not fluents[name].contains(value):
                raise DomainError(f"initial value {value!r} not in domain of {name!r}")
        world = WorldState(assignment)
        if world in seen:
            raise DomainError(f"duplicate initial world {world!r}")
        seen.add(world)
        weight = entry.get("weight", 1.0)
        if not isinstance(weight, (int, float)) or weight < 0:
            raise DomainError(f"bad initial weight {weight!r}")
        total += float(weight)
        worlds.append((world, float(weight)))
    if total <= 0.0:
        raise DomainError("initial worlds carry no weight")
    return tuple(worlds)


def _small_assignments(domain: Domain, relevant: set):
    """Worlds varying the `relevant` fluents, others padded; None if too many."""
    names = sorted(relevant)
    size = 1
    for name in names:
        size *= len(domain.fluents[name].values)
    if size > _STATIC_CHECK_LIMIT:
        return None
    others = {
        n: domain.fluents[n].values[0] for n in domain.fluents if n not in relevant
    }
    pools = [domain.fluents[n].values for n in names]
    return [
        WorldState({**others, **dict(zip(names, combo))})
        for combo in itertools.product(*pools)
    ]


def _check_effect_ranges(domain: Domain) -> None:
    """Statically reject effects that can leave a fluent's domain.

    Enumerates assignments of the fluents each action reads or writes when
    that product is small; larger products defer to an apply-time error.
    """
    for action in domain.actions.values():
        if not action.effects:
            continue
        relevant = set(mentioned_fluents(action.precondition))
        for effect in action.effects:
            relevant |= set(mentioned_fluents(effect.expr))
            relevant.add(effect.fluent)
        worlds = _small_assignments(domain, relevant)
        if worlds is None:
            continue
        for world in worlds:
            if not eval_condition(action.precondition, world):
                continue
            for effect in action.effects:
                value = eval_value(effect.expr, world)
                decl = domain.fluents[effect.fluent]
                if decl.kind == "int":
                    if isinstance(value, float) and value.is_integer():
                        value = int(value)
                    if effect.clamp and isinstance(value, int):
                        value = min(max(value, decl.values[0]), decl.values[-1])
                if not decl.contains(value):
                    raise DomainError(
                        f"effect of {action.name!r} on {effect.fluent!r} can leave "
                        f"its domain (value {value!r} at {world!r})"
                    )


def _check_sensor_coverage(domain: Domain) -> None:
    """Every sensing model must give some reading positive likelihood
    everywhere (checked statically on small state spaces)."""
    for model in domain.sensing_models.values():
        if model.is_gaussian:
            continue  # densities are positive everywhere
        relevant = set()
        for condition, _ in model.table:
            relevant |= set(mentioned_fluents(condition))
        worlds = _small_assignments(domain, relevant)
        if worlds is None:
            continue
        for world in worlds:
            if not model.positive_readings(world):
                raise DomainError(
                    f"sensor of {model.action!r} has no possible reading at {world!r}"
                )
