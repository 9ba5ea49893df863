import random

import pytest

from conftest import all_points, data_path, parity_tree, read_circuit
from kcx.circuit import (Circuit, CircuitBuilder, ParseError, check_structure,
                         from_decision_tree, parse_c2d, parse_sdd,
                         serialize_c2d, smooth)
from kcx.bruteforce import circuit_truth_table, evaluate_tree, random_rodt
from kcx.queries import count_models, evaluate


def test_parse_running_example(running):
    assert len(running) == 12
    assert running.num_features == 4
    assert running.root == 11
    assert running.var_sets[running.root] == frozenset({1, 2, 3, 4})
    assert running.var_sets[0] == frozenset({1})


def test_parse_skips_comments_and_blank_lines():
    text = "c a comment\n\nnnf 1 0 2\nc another\nL 1\n"
    c = parse_c2d(text)
    assert len(c) == 1 and c.num_features == 2


def test_parse_constant_nodes():
    top = parse_c2d("nnf 1 0 2\nA 0\n")
    bottom = parse_c2d("nnf 1 0 2\nO 0 0\n")
    assert evaluate(top, (0, 1)) == 1
    assert evaluate(bottom, (0, 1)) == 0


@pytest.mark.parametrize("text,fragment", [
    ("", "missing 'nnf' header"),
    ("nnf 2 0 2\nL 1\n", "declares 2 nodes"),
    ("nnf 1 3 2\nL 1\n", "declares 3 edges"),
    ("nnf 1 0 2\nL 0\n", "literal 0 out of range"),
    ("nnf 1 0 2\nL 3\n", "literal 3 out of range"),
    ("nnf 1 0 2\nX 1\n", "unknown node tag"),
    ("nnf 2 1 2\nL 1\nA 1 5\n", "not an earlier node"),
    ("nnf 2 1 2\nL 1\nA 2 0\n", "does not match"),
    ("nnf 1 0 2\nL one\n", "malformed integer"),
    ("nnf x y z\nL 1\n", "header counts must be integers"),
    ("nnf 2 2 2\nL 1\nO 3 1 0\n", "decision variable 3 out of range"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as err:
        parse_c2d(text)
    assert fragment in str(err.value)


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as err:
        parse_c2d("nnf 2 0 2\nL 1\nL 9\n")
    assert err.value.line == 3


def test_structure_report_running(running):
    rep = check_structure(running)
    assert rep.decomposable is True
    assert rep.decision_deterministic is True
    assert rep.smooth is False
    assert rep.offending_node == 10


def test_structure_rejects_shared_variable_and():
    c = read_circuit("shared_var.nnf")
    rep = check_structure(c)
    assert rep.decomposable is False
    assert rep.offending_node == 2


def test_structure_rejects_or_without_decision_form():
    b = CircuitBuilder(2)
    c = b.build(b.disj((b.literal(1), b.literal(2))))
    rep = check_structure(c)
    assert rep.decision_deterministic is False
    assert rep.offending_node == c.root


def test_structure_rejects_decision_var_missing_from_child():
    b = CircuitBuilder(3)
    left = b.conj((b.literal(1), b.literal(2)))
    right = b.conj((b.literal(-1), b.literal(3)))
    wrong = b.disj((left, b.literal(3)), decision_var=1)
    rep = check_structure(b.build(wrong))
    assert rep.decision_deterministic is False


def test_structure_accepts_bare_literal_decision_children():
    c = parse_c2d("nnf 3 2 2\nL 1\nL -1\nO 1 2 0 1\n")
    rep = check_structure(c)
    assert rep.decision_deterministic is True
    assert rep.smooth is True


def test_smooth_running_example(running):
    sm = smooth(running)
    rep = check_structure(sm)
    assert rep.decomposable and rep.decision_deterministic and rep.smooth
    assert rep.offending_node is None
    assert count_models(sm).models == 6
    for pt in all_points(4):
        assert evaluate(sm, pt) == evaluate(running, pt)


def test_smooth_keeps_bottom_up_count_on_nondeterministic_or():
    # Or(x1, And(x1, x2)) overlaps, so the bottom-up sum counts 3, not 2
    b = CircuitBuilder(2)
    c = b.build(b.disj((b.literal(1), b.conj((b.literal(1), b.literal(2))))))
    assert count_models(c).models == 3
    sm = smooth(c)
    assert check_structure(sm).smooth is True
    assert count_models(sm).models == 3
    for pt in all_points(2):
        assert evaluate(sm, pt) == evaluate(c, pt)


def test_serialize_round_trip(running):
    text = serialize_c2d(running)
    assert text.startswith("nnf 12 12 4\n")
    assert parse_c2d(text) == running


def test_serialize_round_trip_random_trees():
    for seed in range(1, 21):
        m = random.Random(seed).randint(2, 8)
        c = from_decision_tree(random_rodt(m, min(4, m), seed=seed), num_features=m)
        again = parse_c2d(serialize_c2d(c))
        assert again == c
        assert hash(again) == hash(c)


def test_serialize_constants():
    b = CircuitBuilder(1)
    top = b.build(b.true())
    assert "A 0" in serialize_c2d(top)
    assert parse_c2d(serialize_c2d(top)) == top


def test_circuit_equality_distinguishes_roots():
    b = CircuitBuilder(2)
    lit = b.literal(1)
    both = b.conj((lit, b.literal(2)))
    c1 = b.build(both)
    b2 = CircuitBuilder(2)
    lit2 = b2.literal(1)
    b2.conj((lit2, b2.literal(2)))
    c2 = b2.build(lit2)
    assert c1 != c2


def test_circuit_rejects_forward_children():
    with pytest.raises(ValueError):
        Circuit([3, 2], [0, 1], [(1,), ()], 0, 1)


def test_parse_sdd_matches_nnf_semantics(running):
    with open(data_path("running.sdd")) as handle:
        c = parse_sdd(handle.read(), 4)
    assert c.num_features == 4
    assert circuit_truth_table(c) == circuit_truth_table(running)
    rep = check_structure(c)
    assert rep.decomposable and rep.decision_deterministic


def test_parse_sdd_header_count_is_advisory():
    c = parse_sdd("sdd 2\nT 0\n", 1)
    assert evaluate(c, (0,)) == 1


def test_parse_sdd_root_is_last_node():
    c = parse_sdd("sdd 3\nT 0\nF 1\nL 2 0 1\n", 2)
    assert evaluate(c, (1, 0)) == 1
    assert evaluate(c, (0, 0)) == 0


@pytest.mark.parametrize("text,fragment", [
    ("L 1 0 1\n", "missing 'sdd' header"),
    ("sdd 1\nsdd 1\n", "duplicate sdd header"),
    ("sdd 1\nT 0\nT 0\n", "duplicate sdd node id"),
    ("sdd 1\nD 0 0 1 7 8\n", "undefined sdd node"),
    ("sdd 1\nQ 0\n", "unknown sdd line tag"),
    ("sdd 1\nL 0 0 9\n", "literal 9 out of range"),
    ("sdd 1\nD 0 0 0\n", "prime/sub pairs"),
    ("sdd\n", "expected header"),
    ("sdd 1\nT zero\n", "malformed integer"),
    ("sdd 1\n", "defines no nodes"),
])
def test_parse_sdd_errors(text, fragment):
    with pytest.raises(ParseError) as err:
        parse_sdd(text, 4)
    assert fragment in str(err.value)


def test_from_decision_tree_matches_tree_semantics():
    tree = {"var": 2, "lo": {"leaf": 0},
            "hi": {"var": 1, "lo": {"leaf": 1}, "hi": {"leaf": 0}}}
    c = from_decision_tree(tree)
    assert c.num_features == 2
    for pt in all_points(2):
        assert evaluate(c, pt) == evaluate_tree(tree, pt)
    rep = check_structure(c)
    assert rep.decomposable and rep.decision_deterministic


def test_from_decision_tree_random_agreement():
    for seed in range(1, 31):
        m = random.Random(100 + seed).randint(2, 7)
        tree = random_rodt(m, min(4, m), seed=seed)
        c = from_decision_tree(tree, num_features=m)
        for pt in all_points(m):
            assert evaluate(c, pt) == evaluate_tree(tree, pt)
        rep = check_structure(c)
        assert rep.decomposable and rep.decision_deterministic


def test_from_decision_tree_extra_features():
    c = from_decision_tree({"leaf": 1}, num_features=3)
    assert c.num_features == 3
    assert evaluate(c, (0, 1, 0)) == 1


def test_from_decision_tree_rejects_repeated_variable():
    tree = {"var": 1, "lo": {"leaf": 0},
            "hi": {"var": 1, "lo": {"leaf": 0}, "hi": {"leaf": 1}}}
    with pytest.raises(ValueError, match="repeats along a path"):
        from_decision_tree(tree)


@pytest.mark.parametrize("tree", [
    {"leaf": 2},
    {"var": 0, "lo": {"leaf": 0}, "hi": {"leaf": 1}},
    {"var": 1, "lo": {"leaf": 0}},
    "leaf",
])
def test_from_decision_tree_rejects_malformed(tree):
    with pytest.raises(ValueError):
        from_decision_tree(tree)


def test_from_decision_tree_rejects_var_beyond_num_features():
    tree = {"var": 5, "lo": {"leaf": 0}, "hi": {"leaf": 1}}
    with pytest.raises(ValueError, match="beyond num_features"):
        from_decision_tree(tree, num_features=3)


def test_parity_tree_compiles_to_decision_circuit():
    c = from_decision_tree(parity_tree([1, 2, 3]), num_features=3)
    for pt in all_points(3):
        assert evaluate(c, pt) == (pt[0] ^ pt[1] ^ pt[2])
    rep = check_structure(c)
    assert rep.decomposable and rep.decision_deterministic
