import itertools
import random

import pytest

from loopverify.formulas import (
    BELIEF_EPS,
    BeliefAtom,
    Comparison,
    FormulaError,
    KnowledgeAtom,
    eval_condition,
    eval_objective,
    eval_value,
    has_belief_atoms,
    mentioned_fluents,
    parse_condition,
    parse_objective,
    parse_value_expr,
)
from loopverify.theory import FluentDecl, WorldState

FLUENTS = {
    "d": FluentDecl("d", "int", tuple(range(0, 11))),
    "x": FluentDecl("x", "int", tuple(range(0, 4))),
    "material": FluentDecl("material", "enum", ("wood", "metal")),
}


def world(**values) -> WorldState:
    base = {"d": 0, "x": 0, "material": "wood"}
    base.update(values)
    return WorldState(base)


def test_comparison_shapes():
    node = parse_condition("(<= d 5)", FLUENTS)
    assert isinstance(node, Comparison)
    assert node.fluent == "d" and node.op == "<=" and node.rhs == 5.0
    assert not node.rhs_is_fluent


def test_plain_comparisons_are_fluent_first():
    # only belief atoms may sit on either side; plain comparisons put the
    # fluent on the left
    with pytest.raises(FormulaError):
        parse_condition("(> 5 d)", FLUENTS)


def test_connectives_against_truth_tables():
    rng = random.Random(7)
    atoms = ["(<= d 5)", "(= x 1)", "(= material wood)"]
    for _ in range(200):
        a, b = rng.choice(atoms), rng.choice(atoms)
        w = world(
            d=rng.randint(0, 10),
            x=rng.randint(0, 3),
            material=rng.choice(["wood", "metal"]),
        )
        va = eval_condition(parse_condition(a, FLUENTS), w)
        vb = eval_condition(parse_condition(b, FLUENTS), w)
        assert eval_condition(parse_condition(f"(and {a} {b})", FLUENTS), w) == (va and vb)
        assert eval_condition(parse_condition(f"(or {a} {b})", FLUENTS), w) == (va or vb)
        assert eval_condition(parse_condition(f"(not {a})", FLUENTS), w) == (not va)
        assert eval_condition(parse_condition(f"(implies {a} {b})", FLUENTS), w) == (
            (not va) or vb
        )


def test_constants():
    assert eval_condition(parse_condition("true", FLUENTS), world())
    assert not eval_condition(parse_condition("false", FLUENTS), world())


def test_enum_only_equality():
    parse_condition("(!= material metal)", FLUENTS)
    with pytest.raises(FormulaError):
        parse_condition("(< material wood)", FLUENTS)


def test_fluent_vs_fluent_comparison():
    node = parse_condition("(<= x d)", FLUENTS)
    assert eval_condition(node, world(x=2, d=3))
    assert not eval_condition(node, world(x=2, d=1))
    with pytest.raises(FormulaError):
        parse_condition("(= d material)", FLUENTS)


def test_unknown_fluent_rejected():
    with pytest.raises(FormulaError):
        parse_condition("(= q 1)", FLUENTS)


def test_belief_atom_parse_and_flags():
    goal = parse_objective("(> (bel (< d 10)) 0.9)", FLUENTS)
    assert isinstance(goal, BeliefAtom)
    assert goal.op == ">" and goal.bound == 0.9
    assert has_belief_atoms(goal)
    assert not has_belief_atoms(parse_objective("(= d 0)", FLUENTS))


def test_belief_atom_swapped_sides():
    a = parse_objective("(> (bel (< d 10)) 0.9)", FLUENTS)
    b = parse_objective("(< 0.9 (bel (< d 10)))", FLUENTS)
    for v in (0.5, 0.9, 0.95):
        assert eval_objective(a, world(), lambda f: v) == eval_objective(
            b, world(), lambda f: v
        )


def test_belief_atoms_not_allowed_in_conditions():
    with pytest.raises(FormulaError):
        parse_condition("(> (bel (< d 10)) 0.9)", FLUENTS)


def test_know_is_threshold_belief():
    goal = parse_objective("(know (= d 0))", FLUENTS)
    assert isinstance(goal, KnowledgeAtom)
    assert eval_objective(goal, world(), lambda f: 1.0)
    assert eval_objective(goal, world(), lambda f: 1.0 - BELIEF_EPS / 2)
    assert not eval_objective(goal, world(), lambda f: 1.0 - 1e-6)


def test_objective_mixes_belief_and_state():
    goal = parse_objective("(and (= x 1) (> (bel (< d 10)) 0.5))", FLUENTS)
    assert eval_objective(goal, world(x=1), lambda f: 0.8)
    assert not eval_objective(goal, world(x=0), lambda f: 0.8)
    assert not eval_objective(goal, world(x=1), lambda f: 0.4)


def test_value_expressions():
    w = world(d=4, x=2)
    assert eval_value(parse_value_expr("(- d 1)", FLUENTS), w) == 3.0
    assert eval_value(parse_value_expr("(+ d x)", FLUENTS), w) == 6.0
    assert eval_value(parse_value_expr("(* d 2)", FLUENTS), w) == 8.0
    assert eval_value(parse_value_expr("(min d x)", FLUENTS), w) == 2.0
    assert eval_value(parse_value_expr("(max d x)", FLUENTS), w) == 4.0
    assert eval_value(parse_value_expr("7", FLUENTS), w) == 7.0


def test_conditional_value():
    expr = parse_value_expr("(ite (= material wood) (- d 1) d)", FLUENTS)
    assert eval_value(expr, world(d=2, material="wood")) == 1.0
    assert eval_value(expr, world(d=2, material="metal")) == 2.0


def test_mentioned_fluents():
    node = parse_objective("(and (<= d 5) (> (bel (= x 1)) 0.5))", FLUENTS)
    assert mentioned_fluents(node) == frozenset({"d", "x"})


def test_exhaustive_comparison_ops():
    # every operator against every pair on a small grid
    for op in ("=", "!=", "<", "<=", ">", ">="):
        node = parse_condition(f"({op} x 2)", FLUENTS)
        for v in range(4):
            expected = {
                "=": v == 2,
                "!=": v != 2,
                "<": v < 2,
                "<=": v <= 2,
                ">": v > 2,
                ">=": v >= 2,
            }[op]
            assert eval_condition(node, world(x=v)) == expected


def test_malformed_shapes_rejected():
    for bad in ("(and)", "(not a b)", "(<= d)", "(bel (= d 0))", "(= d 0 1)"):
        with pytest.raises(FormulaError):
            parse_condition(bad, FLUENTS)
