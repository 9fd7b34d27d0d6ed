import math
import random
from fractions import Fraction

import numpy as np
import pytest

from treerep.chain_model import (
    as_fraction,
    brute_force_prob_all_zero,
    make_params,
    params_from_json,
    prob_all_zero,
    sample_percolation,
    sample_percolation_many,
    sample_recursive,
    sample_recursive_many,
    uniform_params,
)
from treerep.tree_core import VertexSet, build_tree, path, star

from conftest import random_params, random_tree

HALF = Fraction(1, 2)


def test_as_fraction_exact_decimals():
    assert as_fraction("9/20") == Fraction(9, 20)
    assert as_fraction("0.45") == Fraction(9, 20)
    assert as_fraction(0.45) == Fraction(9, 20)
    assert as_fraction(1) == 1


def test_make_params_maps():
    t = path(3)
    params = make_params(t, {0: "1/2", 1: "1/3", 2: "1/4"}, {"0-1": "1/5", "1-2": "1/6"})
    assert params.r == (HALF, Fraction(1, 3), Fraction(1, 4))
    assert params.p == (Fraction(1, 5), Fraction(1, 6))
    with pytest.raises(ValueError):
        make_params(t, {0: "1/2"}, "1/2")
    with pytest.raises(ValueError):
        make_params(t, "1/2", "3/2")


def test_params_from_json():
    t = path(3)
    params = params_from_json(t, '{"r": 0.45, "p": {"0-1": "1/5", "1-2": 0.5}}')
    assert params.r == (Fraction(9, 20),) * 3
    assert params.p == (Fraction(1, 5), HALF)
    with pytest.raises(ValueError):
        params_from_json(t, '{"r": 0.5}')


def test_prob_all_zero_frozen_values():
    # two-vertex chain, A = both: r * ((1-p) + p*r) = 3/8 at r = p = 1/2
    t2 = path(2)
    params = uniform_params(t2, HALF, HALF)
    assert prob_all_zero(t2, params, VertexSet.of(0, 1)) == Fraction(3, 8)

    # three-vertex chain at r = p = 1/2, worked by hand
    t3 = path(3)
    params3 = uniform_params(t3, HALF, HALF)
    assert prob_all_zero(t3, params3, VertexSet.of(0, 1, 2)) == Fraction(9, 32)
    assert prob_all_zero(t3, params3, VertexSet.of(0, 2)) == Fraction(5, 16)
    assert prob_all_zero(t3, params3, VertexSet.of(0, 1)) == Fraction(3, 8)
    assert prob_all_zero(t3, params3, VertexSet.of(1)) == HALF
    assert prob_all_zero(t3, params3, VertexSet()) == 1


def test_prob_all_zero_pair_distance_formula():
    # on a path at r = p = 1/2: P(X(0)=X(d)=0) = ((1-p)^d... = (1/4)((1/2)^d + 1)
    t = path(6)
    params = uniform_params(t, HALF, HALF)
    for d in range(1, 6):
        got = prob_all_zero(t, params, VertexSet.of(0, d))
        assert got == Fraction(1, 4) * (HALF**d + 1)


def test_prob_all_zero_degenerate_p():
    rng = random.Random(7)
    for _ in range(20):
        t = random_tree(rng, rng.randint(2, 7))
        r = tuple(Fraction(rng.randint(1, 9), 10) for _ in range(t.n))
        a = VertexSet(rng.randint(1, (1 << t.n) - 1))
        # p == 0: everything copies the root draw
        frozen = make_params(t, dict(enumerate(r)), 0)
        assert prob_all_zero(t, frozen, a) == r[t.root]
        # p == 1: everything independent
        indep = make_params(t, dict(enumerate(r)), 1)
        expect = math.prod((r[v] for v in a), start=Fraction(1))
        assert prob_all_zero(t, indep, a) == expect


def test_prob_all_zero_matches_brute_force():
    rng = random.Random(20240817)
    for _ in range(200):
        t = random_tree(rng, rng.randint(2, 8))  # at most 7 edges
        params = random_params(rng, t, denom=rng.choice([6, 10, 12]), interior=False)
        a = VertexSet(rng.randint(0, (1 << t.n) - 1))
        assert prob_all_zero(t, params, a) == brute_force_prob_all_zero(t, params, a)


def test_prob_all_zero_monotone_in_constraint():
    rng = random.Random(99)
    for _ in range(50):
        t = random_tree(rng, rng.randint(2, 8))
        params = random_params(rng, t)
        bits_b = rng.randint(1, (1 << t.n) - 1)
        bits_a = bits_b & rng.randint(0, (1 << t.n) - 1)
        pa = prob_all_zero(t, params, VertexSet(bits_a))
        pb = prob_all_zero(t, params, VertexSet(bits_b))
        assert pa >= pb


def test_prob_all_zero_positive_association():
    # with a uniform fresh law, forcing zeros is positively associated:
    # P(everything zero on A) >= r^|A|
    rng = random.Random(5)
    for _ in range(50):
        t = random_tree(rng, rng.randint(2, 8))
        r = Fraction(rng.randint(1, 9), 10)
        params = uniform_params(t, r, Fraction(rng.randint(0, 10), 10))
        a = VertexSet(rng.randint(1, (1 << t.n) - 1))
        assert prob_all_zero(t, params, a) >= r ** len(a)


def test_prob_all_zero_cache():
    t = path(4)
    params = uniform_params(t, HALF, HALF)
    cache = {}
    x = prob_all_zero(t, params, VertexSet.of(0, 3), cache)
    assert cache[VertexSet.of(0, 3).bits] == x
    assert prob_all_zero(t, params, VertexSet.of(0, 3), cache) == x


def test_samplers_deterministic_by_seed():
    t = star(3)
    params = uniform_params(t, HALF, Fraction(1, 3))
    a = sample_recursive_many(t, params, 64, seed=42)
    b = sample_recursive_many(t, params, 64, seed=42)
    assert np.array_equal(a, b)
    c = sample_recursive_many(t, params, 64, seed=43)
    assert not np.array_equal(a, c)
    assert sample_recursive(t, params, 42) == tuple(
        (int(a[0]) >> v) & 1 for v in range(t.n)
    )
    pa = sample_percolation_many(t, params, 64, seed=42)
    pb = sample_percolation_many(t, params, 64, seed=42)
    assert np.array_equal(pa, pb)
    assert sample_percolation(t, params, 42) == tuple(
        (int(pa[0]) >> v) & 1 for v in range(t.n)
    )


@pytest.mark.parametrize("maker", [sample_recursive_many, sample_percolation_many])
def test_sampler_matches_exact_law_small_trees(maker):
    # zero-pattern probabilities determine the law; check all of them to 4 sigma
    n_draws = 120_000
    cases = [
        (path(4), uniform_params(path(4), HALF, HALF)),
        (star(3), make_params(star(3), {0: "1/3", 1: "1/2", 2: "2/3", 3: "1/2"}, "2/5")),
    ]
    for t, params in cases:
        draws = maker(t, params, n_draws, seed=2718)
        for bits in range(1, 1 << t.n):
            exact = float(prob_all_zero(t, params, VertexSet(bits)))
            hit = np.count_nonzero(draws & np.uint64(bits) == 0)
            sigma = math.sqrt(exact * (1 - exact) / n_draws)
            assert abs(hit / n_draws - exact) <= 4 * sigma + 1e-12


def test_degenerate_parameter_sampling():
    t = path(3)
    frozen = uniform_params(t, HALF, 0)  # perfect copying: X is constant
    draws = sample_recursive_many(t, frozen, 256, seed=1)
    assert set(np.unique(draws)) <= {0, 7}
    indep = uniform_params(t, 0, 1)  # fresh draws that are never zero
    draws = sample_percolation_many(t, indep, 256, seed=1)
    assert set(np.unique(draws)) == {7}
