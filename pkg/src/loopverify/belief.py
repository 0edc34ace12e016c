"""Weighted-world belief states: progression, conditioning, queries.

A belief state is a finite map from possible worlds to nonnegative
unnormalized weights. Performing a noisy physical action spreads each
world over the action's executable alternatives, scaled by their
likelihoods; worlds where no alternative is executable contribute
nothing. Sensor readings rescale each world by the reading's likelihood
there. Normalization happens only inside queries, so weights stay exact
products of the declared likelihoods.
"""

from __future__ import annotations

from .formulas import eval_condition, eval_objective
from .theory import Domain, Reading, WorldState

# bel() values within this of 1 count as known
KNOW_EPS = 1e-12


class BeliefAnnihilated(ValueError):
    """The intended action was inexecutable in every possible world."""


class ObservationImpossible(ValueError):
    """The reading has zero likelihood in every possible world."""


class BeliefState:
    """Immutable map from (world, history tag) to weight > 0.

    With tracing off (the default) the tag is always "" and particles
    with equal worlds merge by weight addition, which is sound for every
    supported query since likelihoods depend only on the current world.
    With tracing on, tags record the outcome history so per-history
    weights stay visible for debugging.
    """

    __slots__ = ("particles", "tracing")

    def __init__(self, particles: dict, tracing: bool = False):
        self.particles = {k: w for k, w in particles.items() if w > 0.0}
        self.tracing = tracing

    def total(self) -> float:
        return sum(self.particles.values())

    def worlds(self) -> list:
        """Positive-weight worlds, deduplicated, in sorted key order."""
        seen = {}
        for (world, _tag), weight in self.particles.items():
            seen[world] = seen.get(world, 0.0) + weight
        return [w for w, _ in sorted(seen.items(), key=lambda kv: kv[0].key())]

    def merged(self) -> dict:
        """World -> total weight, ignoring history tags."""
        out = {}
        for (world, _tag), weight in self.particles.items():
            out[world] = out.get(world, 0.0) + weight
        return out

    def as_dicts(self) -> list:
        """JSON-ready dump: sorted list of {state, weight} (tags merged)."""
        merged = self.merged()
        return [
            {"state": world.as_dict(), "weight": weight}
            for world, weight in sorted(merged.items(), key=lambda kv: kv[0].key())
        ]

    def key(self, places: int = 9) -> tuple:
        """Hashable summary: worlds with normalized weights rounded to
        `places` decimals; rounding merges numerically equal beliefs."""
        total = self.total()
        entries = []
        for world, weight in sorted(self.merged().items(), key=lambda kv: kv[0].key()):
            rounded = round(weight / total, places)
            if rounded > 0.0:
                entries.append((world.key(), rounded))
        return tuple(entries)


def initial_belief(domain: Domain, tracing: bool = False) -> BeliefState:
    """Belief matching the prior; zero-weight worlds are not possible."""
    particles = {}
    for world, weight in domain.initial_worlds:
        if weight > 0.0:
            particles[(world, "")] = particles.get((world, ""), 0.0) + weight
    return BeliefState(particles, tracing)


def progress(b: BeliefState, intended: str, domain: Domain) -> BeliefState:
    """Belief after intending a physical action under the outcome model."""
    action = domain.actions[intended]
    if action.kind != "physical":
        raise ValueError(f"progress needs a physical action, got {intended!r}")
    particles = {}
    for (world, tag), weight in b.particles.items():
        for outcome in domain.outcomes_of(intended, world):
            successor = domain.apply(outcome.action, world)
            key = (successor, tag + "." + outcome.action if b.tracing else "")
            particles[key] = particles.get(key, 0.0) + weight * outcome.likelihood
    state = BeliefState(particles, b.tracing)
    if not state.particles:
        raise BeliefAnnihilated(
            f"belief annihilated: {intended!r} is inexecutable in every possible world"
        )
    return state


def condition(b: BeliefState, action: str, reading, domain: Domain) -> BeliefState:
    """Belief after the sensing action reports `reading`.

    `reading` may be a Reading, a declared reading token, or a bare
    number (a raw sampled sensor value for density models).
    """
    model = domain.sensing_models.get(action)
    if model is None:
        raise ValueError(f"{action!r} has no sensing model")
    if isinstance(reading, Reading):
        value = reading.value
    elif isinstance(reading, str):
        value = model.reading_by_token(reading).value
    else:
        value = float(reading)
    particles = {}
    for (world, tag), weight in b.particles.items():
        scaled = weight * model.likelihood(world, value)
        if scaled > 0.0:
            particles[(world, tag)] = scaled
    state = BeliefState(particles, b.tracing)
    if not state.particles:
        raise ObservationImpossible(
            f"observation impossible under current belief: {action!r} reading {reading!r}"
        )
    return state


def bel(b: BeliefState, formula) -> float:
    """Normalized weight of the worlds satisfying an objective formula."""
    total = 0.0
    matching = 0.0
    for (world, _tag), weight in b.particles.items():
        total += weight
        if eval_condition(formula, world):
            matching += weight
    if total <= 0.0:
        raise ValueError("belief state has no weight")
    return matching / total


def know(b: BeliefState, formula) -> bool:
    return bel(b, formula) >= 1.0 - KNOW_EPS


def eval_goal(b: BeliefState, goal) -> bool:
    """Evaluate a goal formula at a belief state.

    Belief/knowledge atoms are answered by bel(); everything objective
    must hold at every positive-weight world.
    """
    cache = {}

    def bel_fn(inner):
        if inner not in cache:
            cache[inner] = bel(b, inner)
        return cache[inner]

    return all(
        eval_objective(goal, world, bel_fn)
        for world in b.worlds()
    )
