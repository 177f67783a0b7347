"""Core model semantics: evaluation, paths, shape checks, validation."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpxplain.errors import InputShapeError
from fpxplain.generate import random_instance_bits, random_tree, rng_from_seed
from fpxplain.models import (
    ABSENT, DecisionTree, Ensemble, Majority, Perceptron, ProductDistribution,
    Weighted, bits_to_int, check_instance, check_subset, constant_tree,
    eval_ensemble, eval_model, eval_perceptron, eval_tree, int_to_bits, leaf,
    majority_ensemble, majority_threshold, split, subset_mask, validate_model,
    votes_accept,
)


def xor_tree():
    # x0 xor x1
    nodes = (leaf(0), leaf(1), split(1, 0, 1), leaf(1), leaf(0),
             split(1, 3, 4), split(0, 2, 5))
    return DecisionTree(2, nodes, root=6)


def test_eval_tree_xor():
    t = xor_tree()
    assert [eval_tree(t, x) for x in ((0, 0), (0, 1), (1, 0), (1, 1))] == [0, 1, 1, 0]


def test_constant_tree():
    t = constant_tree(3, 1)
    assert all(eval_tree(t, int_to_bits(z, 3)) == 1 for z in range(8))
    assert t.leaf_count == 1


def test_paths_cover_inputs_exactly_once():
    rng = rng_from_seed(10)
    for _ in range(50):
        n = rng.randint(1, 6)
        t = random_tree(rng, n, 8)
        for z in range(1 << n):
            matches = [(mask, vals, lab) for mask, vals, lab in t.paths
                       if (z ^ vals) & mask == 0]
            assert len(matches) == 1
            assert matches[0][2] == eval_tree(t, int_to_bits(z, n))


def test_paths_are_dfs_zero_branch_first():
    t = xor_tree()
    # 0-branch of the root comes before the 1-branch
    assert t.paths == ((0b11, 0b00, 0), (0b11, 0b10, 1),
                       (0b11, 0b01, 1), (0b11, 0b11, 0))


def test_perceptron_eval_and_ties():
    p = Perceptron((Fraction(1), Fraction(1)), Fraction(-2))
    # 1 + 1 - 2 == 0 counts as firing
    assert eval_perceptron(p, (1, 1)) == 1
    assert eval_perceptron(p, (1, 0)) == 0
    assert eval_perceptron(p, (0, 0)) == 0


def test_perceptron_rejects_floats():
    with pytest.raises(TypeError):
        Perceptron((0.5, 1), 0)


def test_perceptron_scaled_integer_view():
    p = Perceptron((Fraction(1, 2), Fraction(-3, 4)), Fraction(1, 3))
    ws, b, d = p.scaled
    assert d == 12 and ws == (6, -9) and b == 4


def test_majority_threshold_values():
    assert [majority_threshold(k) for k in (1, 2, 3, 4, 5)] == [1, 1, 2, 2, 3]


def test_votes_accept_weighted():
    v = Weighted((Fraction(1), Fraction(-2)), Fraction(1))
    assert votes_accept(v, (1, 0)) == 1
    assert votes_accept(v, (1, 1)) == 0
    assert votes_accept(v, (0, 0)) == 0


def test_majority_ensemble_or_of_two():
    t0 = DecisionTree(2, (leaf(0), leaf(1), split(0, 0, 1)), 2)
    t1 = DecisionTree(2, (leaf(0), leaf(1), split(1, 0, 1)), 2)
    e = majority_ensemble((t0, t1))
    # majority of 2 needs only ceil(2/2) = 1 vote: this is an OR
    assert [eval_ensemble(e, x) for x in ((0, 0), (0, 1), (1, 0), (1, 1))] == [0, 1, 1, 1]


def test_absent_is_falsy_singleton():
    assert not ABSENT
    assert repr(ABSENT) == "Absent"


def test_check_instance_errors():
    with pytest.raises(InputShapeError):
        check_instance((0, 1), 3)
    with pytest.raises(InputShapeError):
        check_instance((0, 2, 1), 3)
    assert check_instance([1, 0], 2) == (1, 0)


def test_check_subset_sorts_and_validates():
    assert check_subset([3, 1, 1], 5) == (1, 3)
    with pytest.raises(InputShapeError):
        check_subset([5], 5)
    with pytest.raises(InputShapeError):
        check_subset([-1], 5)


def test_bit_helpers_roundtrip():
    for z in range(16):
        assert bits_to_int(int_to_bits(z, 4)) == z
    assert subset_mask((0, 2)) == 0b101


def test_product_distribution_validation():
    with pytest.raises(ValueError):
        ProductDistribution((Fraction(3, 2),))
    d = ProductDistribution.uniform(3)
    assert d.is_uniform() and d.bit_prob(0, 0) == Fraction(1, 2)
    d2 = ProductDistribution((Fraction(1, 4),))
    assert d2.bit_prob(0, 1) == Fraction(1, 4)
    assert d2.bit_prob(0, 0) == Fraction(3, 4)


def test_validate_model_diagnostics():
    assert validate_model(xor_tree()) == []
    # feature read twice on one path
    bad = DecisionTree(2, (leaf(0), leaf(1), split(0, 0, 1), split(0, 2, 1)), 3)
    assert any("twice" in p for p in validate_model(bad))
    # child index outside the arena
    assert any("outside" in p for p in validate_model(DecisionTree(1, (split(0, 0, 5),), 0)))
    # label must be 0/1
    assert any("label" in p for p in validate_model(DecisionTree(1, (leaf(7),), 0)))
    # member feature counts must agree
    e = Ensemble((constant_tree(2, 1), constant_tree(3, 1)), Majority())
    assert any("feature count" in p for p in validate_model(e))
    # weighted voting weight count must match member count
    e2 = Ensemble((constant_tree(2, 1),), Weighted((Fraction(1), Fraction(1)), Fraction(1)))
    assert any("weights" in p for p in validate_model(e2))


@settings(deadline=None, max_examples=60)
@given(st.integers(0, 2**30), st.integers(1, 6))
def test_random_tree_is_valid_and_read_once(seed, n):
    rng = rng_from_seed(seed)
    t = random_tree(rng, n, 8)
    assert validate_model(t) == []
    for mask, _, _ in t.paths:
        assert mask.bit_count() <= n


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 2**30))
def test_eval_model_dispatch_consistency(seed):
    rng = rng_from_seed(seed)
    n = rng.randint(1, 5)
    t = random_tree(rng, n, 6)
    e = majority_ensemble((t,))
    x = random_instance_bits(rng, n)
    assert eval_model(t, x) == eval_model(e, x)
