"""End-to-end acceptance checks, one test per shipping criterion.

Each test prints a single pass line on success; pytest -v adds its own
PASSED/FAILED line per criterion. Expected numbers were computed with the
independent reference code in oracles.py before the engine was wired up.
"""

import math
import random
import time

import pytest

from loopverify.belief import bel, initial_belief, progress
from loopverify.controller import canonical_key, to_json_dict
from loopverify.exec_epistemic import load_scenario, run_scenario, verify_epistemic
from loopverify.exec_exact import (
    verify_exact,
    verify_goal_mass,
    verify_termination,
    verify_weak,
    verify_weight_threshold,
)
from loopverify.formulas import parse_condition
from loopverify.montecarlo import absorption_probability, simulate
from loopverify.synth import SynthRequest, synthesize
from loopverify.theory import parse_domain, world_from_dict

from conftest import fixture_path
from generators import noisy_sensing_domain, random_controller, random_population
from oracles import posterior_bel, posterior_paths


def report(line: str) -> None:
    print(line)


def test_criterion_01_exact_fixture_def4(fig1, treechop_exact):
    start = time.perf_counter()
    verdict = verify_exact(fig1, treechop_exact)
    elapsed = time.perf_counter() - start
    assert verdict.status == "Holds"
    assert elapsed < 1.0
    report(f"criterion 01: PASS def4 Holds on treechop_exact ({elapsed:.3f}s)")


def test_criterion_02_noisy_acting_def6_and_termination(fig1, treechop_noisyact):
    start = time.perf_counter()
    weak = verify_weak(fig1, treechop_noisyact)
    term = verify_termination(fig1, treechop_noisyact)
    elapsed = time.perf_counter() - start
    assert weak.status == "Holds"
    assert term.status == "Holds"
    assert elapsed < 1.0
    report(
        "criterion 02: PASS def6 and termination Hold on treechop_noisyact "
        f"({elapsed:.3f}s)"
    )


def test_criterion_03_metal_thresholds(fig1, treechop_metal):
    weight = verify_weight_threshold(fig1, treechop_metal, 0.3)
    mass_lo = verify_goal_mass(fig1, treechop_metal, 0.7)
    mass_hi = verify_goal_mass(fig1, treechop_metal, 0.81)
    assert weight.status == "Holds"
    assert mass_lo.status == "Holds"
    assert mass_hi.status == "Fails"
    report(
        "criterion 03: PASS weight:0.3 Holds, mass:0.7 Holds, mass:0.81 Fails "
        "on treechop_metal"
    )


def population():
    domains = random_population(2024, 220)
    rng = random.Random(99)
    return [(d, random_controller(rng, d)) for d in domains]


def test_criterion_04_threshold_zero_and_mass_one_collapse_to_def6():
    pairs = population()
    assert len(pairs) >= 100
    mismatches = 0
    for domain, controller in pairs:
        weak = verify_weak(controller, domain).status
        if verify_weight_threshold(controller, domain, 0.0).status != weak:
            mismatches += 1
        if verify_goal_mass(controller, domain, 1.0).status != weak:
            mismatches += 1
    assert mismatches == 0
    report(
        f"criterion 04: PASS weight:0 and mass:1 match def6 on {len(pairs)} "
        "random domains, 0 discrepancies"
    )


def test_criterion_05_deterministic_collapse():
    pairs = [(d, c) for d, c in population() if d.is_deterministic()]
    assert len(pairs) >= 100
    mismatches = 0
    for domain, controller in pairs:
        exact = verify_exact(controller, domain)
        weak = verify_weak(controller, domain)
        if exact.status != weak.status:
            mismatches += 1
        if exact.status == "Holds":
            if verify_termination(controller, domain).status != "Holds":
                mismatches += 1
    assert mismatches == 0
    report(
        f"criterion 05: PASS def4 matches def6 and implies termination on "
        f"{len(pairs)} noise-free domains, 0 discrepancies"
    )


def test_criterion_06_epistemic_implies_exact_when_noise_free():
    pairs = [(d, c) for d, c in population() if d.is_deterministic()]
    mismatches = 0
    applicable = 0
    for domain, controller in pairs:
        epistemic = verify_epistemic(controller, domain, mode="existential")
        if epistemic.status != "Holds":
            continue
        applicable += 1
        if verify_exact(controller, domain).status != "Holds":
            mismatches += 1
    assert mismatches == 0
    report(
        f"criterion 06: PASS def9 existential implies def4 on {applicable} "
        "noise-free Holds cases, 0 discrepancies"
    )


def test_criterion_07_pickup_succeeds_possibly_but_may_spin(fig4, fig4_pickup):
    start = time.perf_counter()
    epistemic = verify_epistemic(fig4, fig4_pickup, mode="existential")
    term = verify_termination(fig4, fig4_pickup)
    elapsed = time.perf_counter() - start
    assert epistemic.status == "Holds"
    assert term.status == "Fails"
    assert term.witness is not None
    assert any(action == "noop" for _cfg, action, _obs in term.witness)
    assert elapsed < 1.0
    report(
        "criterion 07: PASS def9 Holds while termination Fails via the noop "
        f"branch on fig4_pickup ({elapsed:.3f}s)"
    )


def test_criterion_08_scenario_alpha_beliefs(fig1, treechop_noisyact_bel):
    domain = treechop_noisyact_bel
    thin = parse_condition("(< d 10)", domain.fluents)

    blind = progress(progress(initial_belief(domain), "chop", domain), "chop", domain)
    two_chops = bel(blind, thin)
    assert two_chops == pytest.approx(1.0 - 0.1**3, abs=1e-9)

    scenario = load_scenario(fixture_path("scenario_alpha.json"))
    real0 = world_from_dict(domain, {"d": 1})
    verdict, cfg = run_scenario(fig1, domain, real0, scenario)
    assert verdict.status == "Holds"
    final = bel(cfg.belief, thin)
    assert final == 1.0
    report(
        "criterion 08: PASS two blind chops give Bel(d<10)=0.999 and scenario "
        "alpha ends with Bel(d<10)=1.0"
    )


GAUSS_GOLDENS = [
    0.575579865799677,
    0.30509049361828655,
    0.8633641976340105,
    0.9752229757072378,
    0.9997116749010803,
]


def test_criterion_09_quantized_gaussian_readings(fig3, treechop_noisy):
    domain = treechop_noisy
    near = parse_condition("(<= d 10)", domain.fluents)

    # recompute the frozen goldens from the path-enumeration oracle
    oracle_steps = []
    replay = [
        ("act", "chop"),
        ("sense", "getd", 11.0),
        ("act", "chop"),
        ("sense", "getd", 9.0),
        ("sense", "getd", 7.8),
    ]
    for i, step in enumerate(replay):
        oracle_steps.append(step)
        value = posterior_bel(domain, list(oracle_steps), near)
        assert value == pytest.approx(GAUSS_GOLDENS[i], abs=1e-12)

    scenario = load_scenario(fixture_path("scenario_gauss.json"))
    real0 = world_from_dict(domain, {"d": 12})
    collected = []
    verdict, cfg = run_scenario(fig3, domain, real0, scenario, collect=collected)
    values = [bel(belief, near) for _c, _a, _o, belief, _r in collected]
    for value, golden in zip(values, GAUSS_GOLDENS):
        assert value == pytest.approx(golden, abs=1e-9)
    assert values[0] > 0.5  # first chop pulls the estimate under 5 units
    assert values[1] < 0.5  # the 5.5-unit reading pushes it back out
    assert values[2] > 0.5  # the second chop pulls it under again
    assert verdict.status == "Holds"  # final goal Bel(d <= 10) > 0.8
    report(
        "criterion 09: PASS belief trajectory matches the oracle goldens and "
        "flips direction at each stage"
    )


def test_criterion_10_simulation_agrees_with_absorption(fig1, treechop_noisyact):
    runs = 100000
    step_cap = 25
    exact = absorption_probability(fig1, treechop_noisyact, step_cap=step_cap)
    p = exact["success"]
    se = math.sqrt(p * (1.0 - p) / runs)
    start = time.perf_counter()
    within = 0
    for seed in range(100):
        rep = simulate(fig1, treechop_noisyact, runs=runs, step_cap=step_cap, seed=seed)
        if abs(rep.success_rate - p) <= 3.0 * se:
            within += 1
    elapsed = time.perf_counter() - start
    assert within >= 95
    assert elapsed < 30.0
    report(
        f"criterion 10: PASS {within}/100 seeds within 3 standard errors of "
        f"the exact absorption probability ({elapsed:.1f}s)"
    )


def test_criterion_11_synthesis_recovers_reference(fig1, treechop_exact):
    start = time.perf_counter()
    result = synthesize(
        SynthRequest(domain=treechop_exact, criterion="def4", max_states=3)
    )
    elapsed = time.perf_counter() - start
    assert result.found
    solution = result.solutions[0]
    assert canonical_key(solution, treechop_exact) == canonical_key(
        fig1, treechop_exact
    )
    # behavioral equivalence: identical traces from every initial world
    ours = verify_exact(solution, treechop_exact)
    reference = verify_exact(fig1, treechop_exact)
    for (w1, t1), (w2, t2) in zip(ours.witnesses, reference.witnesses):
        assert w1 == w2
        assert [(a, o) for _c, a, o in t1] == [(a, o) for _c, a, o in t2]
    assert elapsed < 60.0
    report(
        f"criterion 11: PASS synthesis at 3 states recovers the reference "
        f"controller after {result.searched} candidates ({elapsed:.2f}s)"
    )


def test_criterion_12_belief_updates_match_enumeration():
    from loopverify.belief import (
        BeliefAnnihilated,
        ObservationImpossible,
        condition,
    )

    rng = random.Random(424242)
    checked = 0
    attempts = 0
    while checked < 50 and attempts < 400:
        attempts += 1
        domain = parse_domain(noisy_sensing_domain(rng))
        assert len(domain.initial_worlds) <= 3
        steps = []
        physical = [a for a, act in domain.actions.items() if act.kind == "physical"]
        for _ in range(rng.randint(1, 3)):
            if rng.random() < 0.5:
                reading = rng.choice(domain.sensing_models["look"].readings)
                steps.append(("sense", "look", reading.value))
            else:
                steps.append(("act", rng.choice(physical)))
        b = initial_belief(domain)
        try:
            for step in steps:
                if step[0] == "act":
                    b = progress(b, step[1], domain)
                else:
                    b = condition(b, step[1], step[2], domain)
        except (BeliefAnnihilated, ObservationImpossible):
            paths = posterior_paths(domain, steps)
            assert sum(w for _h, w in paths) == pytest.approx(0.0, abs=1e-15)
            continue
        fluent = next(iter(domain.fluents))
        values = domain.fluents[fluent].values
        split = (min(values) + max(values)) // 2
        cond = parse_condition(f"(<= {fluent} {split})", domain.fluents)
        expected = posterior_bel(domain, steps, cond)
        assert bel(b, cond) == pytest.approx(expected, abs=1e-9)
        checked += 1
    assert checked == 50
    report(
        "criterion 12: PASS 50 random scenarios match direct path enumeration "
        "within 1e-9"
    )
