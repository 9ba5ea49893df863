import itertools
import random

import pytest

from conftest import all_points, data_path
from kcx.bruteforce import (OracleReport, brute_force_families,
                            brute_force_weak_axp, brute_force_weak_cxp,
                            circuit_truth_table, evaluate_tree,
                            load_instances_csv, random_rodt, tree_truth_table,
                            validate_tree)
from kcx.queries import evaluate


def test_validate_tree_returns_max_var():
    tree = {"var": 3, "lo": {"leaf": 0},
            "hi": {"var": 1, "lo": {"leaf": 1}, "hi": {"leaf": 0}}}
    assert validate_tree(tree) == 3
    assert validate_tree({"leaf": 1}) == 0


def test_validate_tree_rejects_malformed():
    with pytest.raises(ValueError):
        validate_tree({"var": 1, "lo": {"leaf": 0}})
    with pytest.raises(ValueError):
        validate_tree({"leaf": 5})
    with pytest.raises(ValueError):
        validate_tree({"var": 1, "lo": {"leaf": 0},
                       "hi": {"var": 1, "lo": {"leaf": 0}, "hi": {"leaf": 1}}})


def test_evaluate_tree():
    tree = {"var": 2, "lo": {"leaf": 0}, "hi": {"leaf": 1}}
    assert evaluate_tree(tree, (0, 1, 0)) == 1
    assert evaluate_tree(tree, (1, 0, 1)) == 0


def test_random_rodt_is_reproducible_and_nonconstant():
    for seed in range(1, 30):
        t1 = random_rodt(6, 4, seed=seed)
        t2 = random_rodt(6, 4, seed=seed)
        assert t1 == t2
        table = tree_truth_table(t1, 6)
        assert 0 < table < (1 << 64) - 1
        assert validate_tree(t1) <= 6


def test_random_rodt_rejects_trivial_depth():
    with pytest.raises(ValueError):
        random_rodt(4, 0, seed=1)


def test_tree_truth_table_matches_pointwise():
    rng = random.Random(3)
    for seed in range(20):
        m = rng.randint(2, 6)
        tree = random_rodt(m, min(3, m), seed=seed + 500)
        table = tree_truth_table(tree, m)
        for idx, pt in enumerate(all_points(m)):
            assert (table >> idx) & 1 == evaluate_tree(tree, pt)


def test_circuit_truth_table_matches_pointwise(running):
    table = circuit_truth_table(running)
    for idx, pt in enumerate(all_points(4)):
        assert (table >> idx) & 1 == evaluate(running, pt)
    assert table.bit_count() == 6


def test_point_order_is_binary_counting(running):
    # index 3 is (0,0,1,1) with x1 as the most significant bit
    pts = all_points(4)
    assert pts[3] == (0, 0, 1, 1)
    assert pts[8] == (1, 0, 0, 0)


def test_weak_helpers_against_definitional_loops(running):
    def predict(pt):
        return evaluate(running, pt)

    for pt in [(0, 0, 0, 0), (1, 1, 0, 1)]:
        klass = predict(pt)
        for r in range(5):
            for s in itertools.combinations(range(1, 5), r):
                s = set(s)
                forced = all(
                    predict(q) == klass
                    for q in itertools.product((0, 1), repeat=4)
                    if all(q[i - 1] == pt[i - 1] for i in s))
                flips = any(
                    predict(q) != klass
                    for q in itertools.product((0, 1), repeat=4)
                    if all(q[i - 1] == pt[i - 1]
                           for i in set(range(1, 5)) - s))
                assert brute_force_weak_axp(predict, 4, pt, klass, s) == forced
                assert brute_force_weak_cxp(predict, 4, pt, klass, s) == flips


def test_weak_helpers_refuse_large_spaces():
    with pytest.raises(ValueError, match="refused"):
        brute_force_weak_axp(lambda p: 0, 21, (0,) * 21, 0, set())


def test_families_running_example(running):
    report = brute_force_families(lambda p: evaluate(running, p), 4,
                                  (0, 0, 0, 0), 0)
    assert report.axps == {frozenset({4}), frozenset({2, 3})}
    assert report.cxps == {frozenset({2, 4}), frozenset({3, 4})}
    assert report.model_count == 6
    assert isinstance(report, OracleReport)


def test_families_weak_table_is_consistent(running):
    def predict(pt):
        return evaluate(running, pt)

    pt = (0, 0, 0, 0)
    report = brute_force_families(predict, 4, pt, 0)
    assert len(report.weak_axp_by_mask) == 16
    for mask in range(16):
        s = {b + 1 for b in range(4) if mask >> b & 1}
        assert report.weak_axp_by_mask[mask] == brute_force_weak_axp(
            predict, 4, pt, 0, s)


def test_families_complement_dichotomy(running):
    report = brute_force_families(lambda p: evaluate(running, p), 4,
                                  (1, 1, 0, 1), 1)
    weak = report.weak_axp_by_mask
    for mask in range(16):
        s = {b + 1 for b in range(4) if mask >> b & 1}
        comp = 15 ^ mask
        assert brute_force_weak_cxp(lambda p: evaluate(running, p), 4,
                                    (1, 1, 0, 1), 1, s) == (not weak[comp])


def test_families_refuse_large_spaces():
    with pytest.raises(ValueError, match="refused"):
        brute_force_families(lambda p: 0, 13, (0,) * 13, 0)


def test_families_minimality_on_random_trees():
    rng = random.Random(17)
    for seed in range(10):
        m = rng.randint(2, 6)
        tree = random_rodt(m, min(3, m), seed=seed + 700)
        pt = tuple(rng.randint(0, 1) for _ in range(m))
        klass = evaluate_tree(tree, pt)
        report = brute_force_families(lambda p: evaluate_tree(tree, p), m, pt, klass)
        weak = report.weak_axp_by_mask
        full = (1 << m) - 1
        for axp in report.axps:
            mask = sum(1 << (f - 1) for f in axp)
            assert weak[mask]
            for f in axp:
                assert not weak[mask ^ (1 << (f - 1))]
        for cxp in report.cxps:
            mask = sum(1 << (f - 1) for f in cxp)
            assert not weak[full ^ mask]
            for f in cxp:
                assert weak[(full ^ mask) | (1 << (f - 1))]


def test_load_instances_csv_with_classes():
    names, points, classes = load_instances_csv(data_path("instances.csv"))
    assert names == ["x1", "x2", "x3", "x4"]
    assert points[0] == (0, 0, 0, 0)
    assert points[1] == (1, 1, 0, 1)
    assert classes == [0, 1, 0, 1]


def test_load_instances_csv_without_classes():
    names, points, classes = load_instances_csv(data_path("instances_nolabel.csv"))
    assert names == ["x1", "x2", "x3", "x4"]
    assert len(points) == 2
    assert classes is None


def test_load_instances_csv_errors(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("a,b\n0\n")
    with pytest.raises(ValueError, match="cells"):
        load_instances_csv(str(ragged))
    nonbin = tmp_path / "nonbin.csv"
    nonbin.write_text("a,b\n0,2\n")
    with pytest.raises(ValueError, match="0 or 1"):
        load_instances_csv(str(nonbin))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_instances_csv(str(empty))
