#!/usr/bin/env python3
"""Regenerate the bundled demonstration domains, controllers, and
scenarios under src/loopverify/fixtures/.

The noisy tree-chop domain lives on a half-unit lattice so that moves of
one-half stay integral: thickness 1 unit = 2 lattice steps. Outcome
likelihoods are raw normal densities (mean one unit, deviation one half
unit, sampled at half-unit shifts); the loader normalizes them. Sensor
noise is the same density family, variance 1.0 in lattice units.
"""

import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "src", "loopverify", "fixtures")


def density(shift_units: float) -> float:
    # N(shift; mean 1, variance .25) in thickness units
    return math.exp(-((shift_units - 1.0) ** 2) / 0.5) / math.sqrt(2.0 * math.pi * 0.25)


def write(name: str, payload) -> None:
    path = os.path.join(OUT, name)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    print("wrote", os.path.relpath(path, os.path.join(HERE, "..")))


def exact_sensor():
    return {
        "action": "getd",
        "readings": [
            {"token": "down", "observation": "down"},
            {"token": "up", "observation": "up"},
        ],
        "table": [
            {"when": "(= d 0)", "likelihoods": {"down": 1.0}},
            {"when": "true", "likelihoods": {"up": 1.0}},
        ],
    }


def treechop_exact():
    return {
        "name": "treechop_exact",
        "notes": "Deterministic chopping with an exact thickness sensor.",
        "fluents": [{"name": "d", "range": [0, 10]}],
        "actions": [
            {
                "name": "chop",
                "kind": "physical",
                "precondition": "(>= d 1)",
                "effects": [{"fluent": "d", "value": "(- d 1)"}],
            },
            {"name": "getd", "kind": "sensing"},
        ],
        "sensing_models": [exact_sensor()],
        "initial": [{"state": {"d": k}, "weight": 0.1} for k in range(1, 11)],
        "goal": "(= d 0)",
    }


def treechop_noisyact(goal: str, name: str):
    # chop must stay executable everywhere so that intending it never
    # discards belief weight; at d=0 both outcomes leave d at 0
    return {
        "name": name,
        "notes": "Chopping sometimes fails to bite; the sensor stays exact.",
        "fluents": [{"name": "d", "range": [0, 10]}],
        "actions": [
            {
                "name": "chop",
                "kind": "physical",
                "effects": [{"fluent": "d", "value": "(- d 1)", "clamp": True}],
            },
            {"name": "chop_noop", "kind": "physical"},
            {"name": "getd", "kind": "sensing"},
        ],
        "outcome_models": [
            {
                "intended": "chop",
                "outcomes": [
                    {"actual": "chop", "likelihood": 0.9},
                    {"actual": "chop_noop", "likelihood": 0.1},
                ],
            }
        ],
        "sensing_models": [exact_sensor()],
        "initial": [{"state": {"d": k}, "weight": 0.1} for k in range(1, 11)],
        "goal": goal,
    }


def treechop_metal():
    return {
        "name": "treechop_metal",
        "notes": "A possibly-metal tree: chopping only bites into wood.",
        "fluents": [
            {"name": "d", "range": [0, 2]},
            {"name": "material", "values": ["wood", "metal"]},
        ],
        "actions": [
            {
                "name": "chop",
                "kind": "physical",
                "precondition": "(>= d 1)",
                "effects": [
                    {"fluent": "d", "value": "(ite (= material wood) (- d 1) d)"}
                ],
            },
            {"name": "getd", "kind": "sensing"},
        ],
        "sensing_models": [exact_sensor()],
        "initial": [
            {"state": {"d": 1, "material": "wood"}, "weight": 0.4},
            {"state": {"d": 2, "material": "wood"}, "weight": 0.4},
            {"state": {"d": 2, "material": "metal"}, "weight": 0.2},
        ],
        "goal": "(= d 0)",
    }


def treechop_noisy():
    shifts = [0.0, 0.5, 1.0, 1.5, 2.0]
    names = ["chop_0", "chop_1", "chop", "chop_3", "chop_4"]
    actions = [
        {
            "name": name,
            "kind": "physical",
            "effects": [
                {"fluent": "d", "value": f"(- d {int(2 * s)})", "clamp": True}
            ],
        }
        for name, s in zip(names, shifts)
    ]
    actions.append({"name": "getd", "kind": "sensing"})
    return {
        "name": "treechop_noisy",
        "notes": (
            "Noisy chopping and a noisy thickness sensor on a half-unit "
            "lattice: d counts half units, so one unit of thickness is 2. "
            "Outcome likelihoods are raw normal densities at half-unit "
            "shifts (mean one unit, variance .25 square units); they are "
            "normalized on load. The sensor reports d plus unit-lattice "
            "Gaussian noise (variance 1.0 here = .25 square units); reading "
            "tokens are labeled in thickness units."
        ),
        "fluents": [{"name": "d", "range": [0, 20]}],
        "actions": actions,
        "outcome_models": [
            {
                "intended": "chop",
                "outcomes": [
                    {"actual": name, "likelihood": density(s)}
                    for name, s in zip(names, shifts)
                ],
            }
        ],
        "sensing_models": [
            {
                "action": "getd",
                "readings": [
                    {"token": "3.9", "value": 7.8, "observation": "<6"},
                    {"token": "4.5", "value": 9.0, "observation": "<6"},
                    {"token": "5.5", "value": 11.0, "observation": "<6"},
                    {"token": "6.5", "value": 13.0, "observation": ">6"},
                ],
                "gaussian": {"mean_fluent": "d", "variance": 1.0},
            }
        ],
        "initial": [{"state": {"d": 2 * k}, "weight": 0.1} for k in range(1, 11)],
        "goal": "(> (bel (<= d 10)) 0.8)",
    }


def fig4_pickup():
    return {
        "name": "fig4_pickup",
        "notes": "Picking up an object sometimes slips; sensing is exact.",
        "fluents": [{"name": "d", "range": [0, 1]}],
        "actions": [
            {
                "name": "pickup",
                "kind": "physical",
                "effects": [{"fluent": "d", "value": "0"}],
            },
            {"name": "noop", "kind": "physical"},
            {"name": "getd", "kind": "sensing"},
        ],
        "outcome_models": [
            {
                "intended": "pickup",
                "outcomes": [
                    {"actual": "pickup", "likelihood": 0.5},
                    {"actual": "noop", "likelihood": 0.5},
                ],
            }
        ],
        "sensing_models": [exact_sensor()],
        "initial": [{"state": {"d": 1}, "weight": 1.0}],
        "goal": "(= d 0)",
    }


def fig1():
    return {
        "name": "fig1",
        "states": [0, 1, 2],
        "initial": 0,
        "final": 2,
        "advice": {"0": "chop", "1": "getd"},
        "transitions": [[0, "0", 1], [1, "down", 2], [1, "up", 0]],
    }


def fig3():
    return {
        "name": "fig3",
        "states": ["a", "b", "c", "e", "f", "done"],
        "initial": "a",
        "final": "done",
        "advice": {"a": "chop", "b": "getd", "c": "chop", "e": "getd", "f": "getd"},
        "transitions": [
            ["a", "0", "b"],
            ["b", "<6", "c"],
            ["b", ">6", "a"],
            ["c", "0", "e"],
            ["e", "<6", "f"],
            ["e", ">6", "a"],
            ["f", "<6", "done"],
            ["f", ">6", "a"],
        ],
    }


def fig4():
    return {
        "name": "fig4",
        "states": [1, 2, 3, 4],
        "initial": 1,
        "final": 4,
        "advice": {"1": "pickup", "2": "getd", "3": "pickup"},
        "transitions": [[1, "0", 2], [2, "down", 4], [2, "up", 3], [3, "0", 3]],
    }


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    write("treechop_exact.json", treechop_exact())
    write("treechop_noisyact.json", treechop_noisyact("(= d 0)", "treechop_noisyact"))
    write(
        "treechop_noisyact_bel.json",
        treechop_noisyact("(> (bel (< d 10)) 0.9)", "treechop_noisyact_bel"),
    )
    write("treechop_metal.json", treechop_metal())
    write("treechop_noisy.json", treechop_noisy())
    write("fig4_pickup.json", fig4_pickup())
    write("fig1.json", fig1())
    write("fig3.json", fig3())
    write("fig4.json", fig4())
    write(
        "scenario_alpha.json",
        [
            {"advised_action": "chop", "actual_outcome": "chop_noop"},
            {"advised_action": "getd", "reading": "up"},
            {"advised_action": "chop", "actual_outcome": "chop"},
            {"advised_action": "getd", "reading": "down"},
        ],
    )
    write(
        "scenario_gauss.json",
        [
            {"advised_action": "chop", "actual_outcome": "chop"},
            {"advised_action": "getd", "reading": "5.5"},
            {"advised_action": "chop", "actual_outcome": "chop"},
            {"advised_action": "getd", "reading": "4.5"},
            {"advised_action": "getd", "reading": "3.9"},
        ],
    )
    write(
        "expected.json",
        {
            "treechop_exact.json": {
                "controller": "fig1.json",
                "verdicts": {"def4": "Holds", "def6": "Holds", "termination": "Holds"},
            },
            "treechop_noisyact.json": {
                "controller": "fig1.json",
                "verdicts": {"def6": "Holds", "termination": "Holds"},
            },
            "treechop_noisyact_bel.json": {
                "controller": "fig1.json",
                "verdicts": {
                    "def9:existential": "Holds",
                    # the belief trajectory converges only polynomially, so
                    # node keys never revisit within the default bound and
                    # the failing all-noop run stays undetected
                    "def9:adversarial": "Unknown",
                },
            },
            "treechop_metal.json": {
                "controller": "fig1.json",
                "verdicts": {
                    "def6": "Fails",
                    "termination": "Fails",
                    "weight:0.3": "Holds",
                    "weight:0.1": "Fails",
                    "mass:0.7": "Holds",
                    "mass:0.81": "Fails",
                },
            },
            "fig4_pickup.json": {
                "controller": "fig4.json",
                "verdicts": {
                    "def6": "Holds",
                    "def9:existential": "Holds",
                    "def9:adversarial": "Fails",
                    "termination": "Fails",
                },
            },
        },
    )


if __name__ == "__main__":
    main()
