import math
import random
from fractions import Fraction

import pytest

from treerep.chain_model import make_params, prob_all_zero, uniform_params
from treerep.signed_measure import (
    MeasureValue,
    condition_measure,
    nu_connected,
    nu_full,
    nu_sign,
    restrict_measure,
)
from treerep.tree_core import VertexSet, build_tree, is_connected, path, star

from conftest import random_params, random_tree

HALF = Fraction(1, 2)


def _slow_log(x: Fraction) -> float:
    """Reference log via exact alternating series (needs |x - 1| <= 0.6)."""
    t = x - 1
    assert abs(t) <= Fraction(3, 5)
    eps = Fraction(1, 10**25)
    total = Fraction(0)
    term = t
    k = 1
    while abs(term) > eps:
        total += term / k if k % 2 else -term / k
        term *= t
        k += 1
    return float(total)


def test_single_vertex_measure():
    t = path(1)
    measure = nu_full(t, uniform_params(t, HALF, HALF))
    mv = measure.value(VertexSet.of(0))
    assert mv.ratio == 2
    assert mv.sign == 1
    assert math.isclose(mv.log_value, math.log(2), rel_tol=1e-15)


def test_path3_frozen_table():
    # worked by hand from the zero-pattern probabilities at r = p = 1/2
    t = path(3)
    measure = nu_full(t, uniform_params(t, HALF, HALF))
    expect = {
        (0,): Fraction(4, 3),
        (1,): Fraction(10, 9),
        (2,): Fraction(4, 3),
        (0, 1): Fraction(6, 5),
        (1, 2): Fraction(6, 5),
        (0, 2): Fraction(1),  # disconnected: zero mass
        (0, 1, 2): Fraction(5, 4),
    }
    for members, ratio in expect.items():
        mv = measure.value(VertexSet.of(*members))
        assert mv.ratio == ratio
        assert nu_sign(mv) == (ratio > 1) - (ratio < 1)


def test_independent_limit():
    # p == 1 decouples everything: only singletons carry mass
    t = star(3)
    params = make_params(t, {0: "1/2", 1: "1/3", 2: "2/3", 3: "1/5"}, 1)
    measure = nu_full(t, params)
    for bits in range(1, 1 << t.n):
        mv = measure.value(bits)
        if bits.bit_count() == 1:
            v = bits.bit_length() - 1
            assert mv.ratio == 1 / params.r[v]
        else:
            assert mv.ratio == 1
            assert mv.sign == 0


def test_disconnected_sets_carry_no_mass():
    rng = random.Random(11)
    for _ in range(25):
        t = random_tree(rng, rng.randint(3, 7))
        measure = nu_full(t, random_params(rng, t))
        for bits in range(1, 1 << t.n):
            if not is_connected(t, VertexSet(bits)):
                assert measure.value(bits).sign == 0


def test_mobius_consistency_small():
    # P(X(V)=0) * prod_{nonempty K inside V\I} ratio_K == P(X(I)=0):
    # summing the measure over the sets avoiding I inverts back to the
    # zero-pattern probability of I.
    rng = random.Random(23)
    for _ in range(10):
        t = random_tree(rng, rng.randint(2, 6))
        params = random_params(rng, t)
        measure = nu_full(t, params)
        full = (1 << t.n) - 1
        p_full = prob_all_zero(t, params, VertexSet(full))
        for i_bits in range(1, full + 1):
            prod = p_full
            c = full & ~i_bits
            sub = c
            while sub:
                prod *= measure.value(sub).ratio
                sub = (sub - 1) & c
            assert prod == prob_all_zero(t, params, VertexSet(i_bits))


def test_nu_connected_agrees_with_full():
    rng = random.Random(37)
    for _ in range(15):
        t = random_tree(rng, rng.randint(2, 7))
        params = random_params(rng, t)
        measure = nu_full(t, params)
        cache = {}
        for bits in range(1, 1 << t.n):
            s = VertexSet(bits)
            if is_connected(t, s):
                assert nu_connected(t, params, s, cache).ratio == measure.value(bits).ratio


def test_nu_connected_interval_formula():
    # run of j consecutive interior vertices inside a path:
    # nu = log(1 + p^2 (1-p)^(j-1) r(1-r) / (r + (1-p)^j - (1-p)^j r)^2)
    for r, p in [(HALF, HALF), (Fraction(1, 3), Fraction(1, 4)), (Fraction(7, 9), Fraction(2, 7))]:
        for j in (1, 2, 3):
            t = path(j + 2)
            params = uniform_params(t, r, p)
            s = VertexSet.from_iter(range(1, j + 1))
            q = (1 - p) ** j
            expect = 1 + p * p * (1 - p) ** (j - 1) * r * (1 - r) / (r + q - q * r) ** 2
            assert nu_connected(t, params, s).ratio == expect
    # anchor values at r = p = 1/2
    t = path(3)
    params = uniform_params(t, HALF, HALF)
    assert nu_connected(t, params, VertexSet.of(1)).ratio == Fraction(10, 9)
    t = path(4)
    params = uniform_params(t, HALF, HALF)
    assert nu_connected(t, params, VertexSet.of(1, 2)).ratio == Fraction(27, 25)


def test_nu_connected_rejects_disconnected():
    t = path(4)
    params = uniform_params(t, HALF, HALF)
    with pytest.raises(ValueError):
        nu_connected(t, params, VertexSet.of(0, 2))
    with pytest.raises(ValueError):
        nu_connected(t, params, VertexSet())


def test_zero_r_rejected_one_allowed():
    t = path(2)
    with pytest.raises(ValueError):
        nu_full(t, make_params(t, {0: 0, 1: "1/2"}, "1/2"))
    measure = nu_full(t, make_params(t, {0: 1, 1: "1/2"}, "1/2"))
    assert measure.value(VertexSet.of(0, 1)).ratio > 0


def test_log_value_relative_accuracy():
    # a moderate entry and a near-zero one (interior pair at small p);
    # reference by exact series
    t2 = path(2)
    moderate = nu_full(t2, uniform_params(t2, HALF, HALF)).value(VertexSet.of(0, 1))
    assert moderate.ratio == Fraction(3, 2)
    ref = _slow_log(moderate.ratio)
    assert abs(moderate.log_value - ref) <= 1e-12 * abs(ref)

    t4 = path(4)
    params = uniform_params(t4, HALF, Fraction(1, 1000))
    tiny = nu_connected(t4, params, VertexSet.of(1, 2))
    ref = _slow_log(tiny.ratio)
    assert 0 < ref < 1e-6  # the interesting regime: heavy float cancellation
    assert abs(tiny.log_value - ref) <= 1e-12 * abs(ref)


def test_restrict_measure_pair_to_point():
    # collapsing {0,1} onto {0} folds the pair mass into the singleton
    t = path(2)
    measure = nu_full(t, uniform_params(t, HALF, HALF))
    restricted = restrict_measure(measure, VertexSet.of(0))
    expect = measure.value(VertexSet.of(0)).ratio * measure.value(VertexSet.of(0, 1)).ratio
    assert restricted.value(VertexSet.of(0)).ratio == expect


def test_restrict_measure_composes_edges():
    # endpoints of a 4-path behave as a 2-chain with p' = 1 - (1-p)^3
    r, p = Fraction(2, 5), Fraction(1, 3)
    t4 = path(4)
    measure = restrict_measure(nu_full(t4, uniform_params(t4, r, p)), VertexSet.of(0, 3))
    t2 = path(2)
    p_prime = 1 - (1 - p) ** 3
    expect = nu_full(t2, uniform_params(t2, r, p_prime))
    pairs = {1 << 0: 1 << 0, 1 << 3: 1 << 1, (1 << 0) | (1 << 3): 0b11}
    for got_bits, want_bits in pairs.items():
        assert measure.value(got_bits).ratio == expect.value(want_bits).ratio


def test_condition_measure_matches_conditional_chain():
    rng = random.Random(41)
    for _ in range(12):
        t = random_tree(rng, 4)
        params = random_params(rng, t)
        measure = nu_full(t, params)
        full = (1 << t.n) - 1
        keep_bits = rng.randint(1, full - 1)
        keep = VertexSet(keep_bits)
        conditioned = condition_measure(measure, keep)
        outside = VertexSet(full & ~keep_bits)
        p_out = prob_all_zero(t, params, outside)
        i_bits = keep_bits
        while i_bits:
            # exp(-nu_cond(sets hitting I)) == P(X(I)=0 | zeros outside)
            prod = Fraction(1)
            k = keep_bits
            while k:
                if k & i_bits:
                    prod *= conditioned.value(k).ratio
                k = (k - 1) & keep_bits
            lhs = 1 / prod
            rhs = prob_all_zero(t, params, VertexSet(i_bits | outside.bits)) / p_out
            assert lhs == rhs
            i_bits = (i_bits - 1) & keep_bits


def test_lazy_assembly_wide_tree():
    t = path(17)
    params = uniform_params(t, HALF, HALF)
    measure = nu_full(t, params)
    assert len(measure.entries) == 0  # nothing materialised yet
    got = measure.value(VertexSet.of(0, 1))
    assert got.ratio == nu_connected(t, params, VertexSet.of(0, 1)).ratio
    assert len(measure.entries) == 1


def test_measure_value_guards():
    with pytest.raises(ValueError):
        MeasureValue.from_ratio(Fraction(0))
    mv = MeasureValue.from_ratio(Fraction(7, 5))
    assert (mv.num, mv.den) == (7, 5)
