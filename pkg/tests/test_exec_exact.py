import json
import random

import pytest

from conftest import fixture_path

from loopverify.controller import Controller
from loopverify.exec_exact import (
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
from loopverify.theory import parse_domain, world_from_dict

from generators import random_controller, random_population
from oracles import weak_from


def test_exact_holds_on_fixture(fig1, treechop_exact):
    verdict = verify_exact(fig1, treechop_exact)
    assert verdict.status == "Holds"
    assert len(verdict.witnesses) == 10  # one run per positive-weight world
    # the d=3 run chops three times and senses in between
    by_world = {world["d"]: trace for world, trace in verdict.witnesses}
    actions = [action for _cfg, action, _obs in by_world[3]]
    assert actions == ["chop", "getd", "chop", "getd", "chop", "getd"]
    observations = [obs for _cfg, _a, obs in by_world[3]]
    assert observations == ["0", "up", "0", "up", "0", "down"]


def test_exact_requires_deterministic_domain(fig1, treechop_noisyact):
    with pytest.raises(VerifierInputError):
        verify_exact(fig1, treechop_noisyact)


def test_exact_requires_exact_sensing(fig3, treechop_noisy):
    with pytest.raises(VerifierInputError) as err:
        verify_exact(fig3, treechop_noisy)
    assert "belief-level" in str(err.value)


def test_checkers_reject_invalid_controllers(treechop_exact):
    broken = Controller([0], 0, 0, {0: "chop"}, {})
    for check in (verify_exact, verify_weak, verify_termination):
        with pytest.raises(VerifierInputError):
            check(broken, treechop_exact)


def test_exact_detects_divergence(treechop_exact):
    # never senses, so it chops forever once d hits 0... actually it gets
    # stuck at d=0; a self-loop on sensing shows the revisit instead
    spinner = Controller(
        states=[0, 1],
        initial=0,
        final=1,
        advice={0: "getd"},
        transitions={(0, "up"): 0, (0, "down"): 1},
    )
    verdict = verify_exact(spinner, treechop_exact)
    assert verdict.status == "Fails"
    assert "revisits" in verdict.note
    assert verdict.counterexample_world is not None
    assert verdict.counterexample_world["d"] >= 1


def test_exact_detects_stuck_runs(treechop_exact):
    # chops blindly; from d=1 the second chop is inexecutable
    blind = Controller(
        states=[0, 1, 2],
        initial=0,
        final=2,
        advice={0: "chop", 1: "chop"},
        transitions={(0, "0"): 1, (1, "0"): 2},
    )
    verdict = verify_exact(blind, treechop_exact)
    assert verdict.status == "Fails"
    assert "stuck" in verdict.note
    assert verdict.counterexample_world["d"] == 1


def test_exact_detects_goal_failure(treechop_exact):
    # stops after one chop; goal d=0 false except from d=1
    one_shot = Controller(
        states=[0, 1],
        initial=0,
        final=1,
        advice={0: "chop"},
        transitions={(0, "0"): 1},
    )
    verdict = verify_exact(one_shot, treechop_exact)
    assert verdict.status == "Fails"
    assert "goal false" in verdict.note


def test_weak_holds_under_outcome_branching(fig1, treechop_noisyact):
    verdict = verify_weak(fig1, treechop_noisyact)
    assert verdict.status == "Holds"
    assert len(verdict.witnesses) == 10
    for world, trace in verdict.witnesses:
        cfg, _a, _o = trace[0]
        assert cfg.world == world
        assert trace  # at least one step to reach the goal


def test_weak_fails_on_metal(fig1, treechop_metal):
    verdict = verify_weak(fig1, treechop_metal)
    assert verdict.status == "Fails"
    assert verdict.counterexample_world["material"] == "metal"


def test_weak_matches_oracle_per_world(fig1, treechop_metal, treechop_noisyact):
    for name, domain in (
        ("treechop_metal", treechop_metal),
        ("treechop_noisyact", treechop_noisyact),
    ):
        with open(fixture_path(name + ".json")) as handle:
            raw = json.load(handle)
        for world, weight in domain.initial_worlds:
            if weight <= 0.0:
                continue
            expected = weak_from(fig1, domain, world)
            raw["initial"] = [{"state": world.as_dict(), "weight": 1.0}]
            verdict = verify_weak(fig1, parse_domain(raw))
            assert (verdict.status == "Holds") == expected


def test_termination_holds_on_noisyact(fig1, treechop_noisyact):
    assert verify_termination(fig1, treechop_noisyact).status == "Holds"


def test_termination_fails_on_metal(fig1, treechop_metal):
    verdict = verify_termination(fig1, treechop_metal)
    assert verdict.status == "Fails"
    assert verdict.counterexample_world["material"] == "metal"
    assert "cannot reach the final state" in verdict.note


def test_termination_witness_is_replayable(fig4, fig4_pickup):
    verdict = verify_termination(fig4, fig4_pickup)
    assert verdict.status == "Fails"
    assert verdict.witness is not None
    # replay: every witness step is a real outcome-branching edge
    for cfg, action, _obs in verdict.witness:
        successors = step_outcomes(fig4, fig4_pickup, cfg)
        assert any(a == action for _n, a in successors)
    # the dead end is the noop self-loop at control state 3
    last = verdict.witness[-1]
    assert last[1] == "noop"


def test_weight_threshold_is_strict(fig1, treechop_metal):
    # metal world weighs exactly 0.2: kappa=0.2 exempts it
    assert verify_weight_threshold(fig1, treechop_metal, 0.3).status == "Holds"
    assert verify_weight_threshold(fig1, treechop_metal, 0.2).status == "Holds"
    assert verify_weight_threshold(fig1, treechop_metal, 0.1).status == "Fails"
    assert verify_weight_threshold(fig1, treechop_metal, 0.19).status == "Fails"


def test_weight_threshold_notes_suspicious_range(fig1, treechop_exact):
    verdict = verify_weight_threshold(fig1, treechop_exact, 5.0)
    assert verdict.status == "Holds"  # vacuous: no world weighs above 5
    assert "outside" in verdict.note


def test_goal_mass_thresholds(fig1, treechop_metal):
    # goal-reaching mass is exactly 0.8
    assert verify_goal_mass(fig1, treechop_metal, 0.7).status == "Holds"
    assert verify_goal_mass(fig1, treechop_metal, 0.8).status == "Holds"
    assert verify_goal_mass(fig1, treechop_metal, 0.81).status == "Fails"
    verdict = verify_goal_mass(fig1, treechop_metal, 0.81)
    assert "0.800000000" in verdict.note


def test_goal_mass_at_one_requires_every_world(fig1, treechop_metal, treechop_noisyact):
    assert verify_goal_mass(fig1, treechop_metal, 1.0).status == "Fails"
    assert verify_goal_mass(fig1, treechop_noisyact, 1.0).status == "Holds"


def test_goal_mass_normalizes_unnormalized_priors(fig1):
    data = {
        "name": "scaled",
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
        "sensing_models": [
            {
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
        ],
        "initial": [
            {"state": {"d": 1}, "weight": 3.0},
            {"state": {"d": 2}, "weight": 1.0},
        ],
        "goal": "(= d 0)",
    }
    domain = parse_domain(data)
    assert verify_goal_mass(fig1, domain, 0.99).status == "Holds"


def test_workers_do_not_change_verdicts(fig1, treechop_metal):
    for kappa in (0.1, 0.3):
        seq = verify_weight_threshold(fig1, treechop_metal, kappa, workers=1)
        par = verify_weight_threshold(fig1, treechop_metal, kappa, workers=4)
        assert seq.status == par.status
    seq = verify_goal_mass(fig1, treechop_metal, 0.7, workers=1)
    par = verify_goal_mass(fig1, treechop_metal, 0.7, workers=4)
    assert seq.status == par.status and seq.note == par.note


def test_step_helpers(fig1, treechop_exact):
    w = world_from_dict(treechop_exact, {"d": 1})
    cfg = Config(0, w)
    nxt = step_exact(fig1, treechop_exact, cfg)
    assert nxt == Config(1, world_from_dict(treechop_exact, {"d": 0}))
    branches = step_outcomes(fig1, treechop_exact, cfg)
    assert [n for n, _a in branches] == [nxt]
    assert step_exact(fig1, treechop_exact, Config(2, w)) is None  # final


def test_weak_agrees_with_oracle_on_random_pairs():
    domains = random_population(515, 40)
    rng = random.Random(515)
    for domain in domains:
        controller = random_controller(rng, domain, max_states=3)
        verdict = verify_weak(controller, domain)
        expected = all(
            weak_from(controller, domain, world)
            for world, weight in domain.initial_worlds
            if weight > 0.0
        )
        assert (verdict.status == "Holds") == expected
