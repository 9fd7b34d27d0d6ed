"""Monte-Carlo closure: sample the union-of-atoms field, compare laws.

A nonnegative measure turns into a Poisson field: every subset with
positive mass is an atom, atom counts are independent Poisson draws
with the measure's log-values as intensities, and the output indicator
marks vertices covered by at least one atom with a positive count.
Sampling that field and comparing zero-pattern frequencies against the
chain's exact probabilities closes the loop numerically; a two-sample
chi-square confirms the two chain samplers simulate the same law.

Intensities are double-precision floats (the exact engine guarantees
them to ~1e-12 relative); Monte-Carlo tolerances dwarf that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import chi2

from .chain_model import _rng, prob_all_zero
from .signed_measure import SignedMeasure, nu_full
from .tree_core import VertexSet

MAX_FIELD_ORDER = 12


@dataclass(frozen=True)
class PoissonField:
    """Atoms of a nonnegative measure, ready for Poisson sampling.

    ``atoms`` holds ``(VertexSet, intensity)`` pairs sorted by bitmask;
    zero-mass subsets are dropped at construction.
    """

    measure: SignedMeasure
    atoms: tuple


def poisson_field(measure: SignedMeasure) -> PoissonField:
    """Validate nonnegativity and collect the positive atoms."""
    if measure.n > MAX_FIELD_ORDER:
        raise ValueError("fields are capped at %d vertices" % MAX_FIELD_ORDER)
    measure.materialize()
    atoms = []
    for bits in measure:
        value = measure.value(bits)
        if value.sign < 0:
            raise ValueError(
                "negative intensity on %r: not a Poisson field" % VertexSet(bits)
            )
        if value.sign > 0:
            atoms.append((VertexSet(bits), value.log_value))
    return PoissonField(measure=measure, atoms=tuple(atoms))


def field_from_chain(tree, params) -> PoissonField:
    """Poisson field of a representable chain (raises if any mass is negative)."""
    return poisson_field(nu_full(tree, params))


def sample_poisson_field_many(field: PoissonField, n_draws, seed) -> np.ndarray:
    """Packed bitmask words of ``n_draws`` independent field samples.

    Per atom: a Poisson count with the atom's intensity; draws whose
    count is >= 1 get the atom's vertices switched on.  Randomness is
    consumed in bitmask order, so output is reproducible per seed.
    """
    rng = _rng(seed)
    words = np.zeros(n_draws, dtype=np.uint64)
    for atom, intensity in field.atoms:
        hit = rng.poisson(intensity, n_draws) >= 1
        words[hit] |= np.uint64(atom.bits)
    return words


def sample_poisson_field(field: PoissonField, rng_seed):
    """One field sample as a 0/1 tuple over the vertex ids."""
    word = int(sample_poisson_field_many(field, 1, rng_seed)[0])
    return tuple((word >> v) & 1 for v in range(field.measure.n))


def _pattern_histogram(words, n):
    if len(words) and int(words.max()) >> n:
        raise ValueError("sampler produced a pattern outside %d vertices" % n)
    return np.bincount(words.astype(np.int64), minlength=1 << n)


def _zeros_on_table(hist, n):
    """For every mask I, the number of draws that are all-zero on I.

    Subset-sum transform: f[m] = number of draws whose pattern is
    contained in m; the draws vanishing on I are those contained in the
    complement of I.
    """
    f = hist.astype(np.int64).copy()
    idx = np.arange(1 << n)
    for b in range(n):
        sel = (idx >> b) & 1 == 1
        f[sel] += f[idx[sel] ^ (1 << b)]
    full = (1 << n) - 1
    return lambda bits: int(f[full & ~bits])


@dataclass(frozen=True)
class ComparisonReport:
    """Two-sample chi-square over (pooled) zero/one pattern cells."""

    statistic: float
    dof: int
    p_value: float
    alpha: float
    cells: int
    draws: int
    passed: bool


def compare_laws(sampler_a, sampler_b, n, n_draws=100_000, alpha=0.01, seed=0):
    """Chi-square homogeneity test between two pattern samplers.

    Samplers are callables ``(n_draws, seed) -> packed uint64 words``
    over the same ``n <= 12`` vertices; they receive split seeds
    (``seed`` and ``seed + 1``).  Cells start as all 2^n patterns and
    the smallest-count cells are merged pairwise (ties by pattern id)
    until every expected count reaches 5, the standard validity
    threshold.  Fails loudly if pooling cannot get there.
    """
    if not 1 <= n <= MAX_FIELD_ORDER:
        raise ValueError("pattern chi-square needs 1 <= n <= %d" % MAX_FIELD_ORDER)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    hist_a = _pattern_histogram(sampler_a(n_draws, seed), n)
    hist_b = _pattern_histogram(sampler_b(n_draws, seed + 1), n)
    total_a = int(hist_a.sum())
    total_b = int(hist_b.sum())
    share = min(total_a, total_b) / (total_a + total_b)

    # each cell: [pooled count, tie-break key, count_a, count_b]
    cells = sorted(
        [int(hist_a[i] + hist_b[i]), i, int(hist_a[i]), int(hist_b[i])]
        for i in range(1 << n)
    )
    while len(cells) > 1 and cells[0][0] * share < 5:
        lo = cells.pop(0)
        hi = cells.pop(0)
        merged = [lo[0] + hi[0], min(lo[1], hi[1]), lo[2] + hi[2], lo[3] + hi[3]]
        # re-insert keeping the ascending order
        at = 0
        while at < len(cells) and cells[at] < merged:
            at += 1
        cells.insert(at, merged)
    if len(cells) < 2 or cells[0][0] * share < 5:
        raise ValueError("not enough draws: pooling cannot reach expected counts of 5")

    statistic = 0.0
    grand = total_a + total_b
    for pooled, _, count_a, count_b in cells:
        expect_a = total_a * pooled / grand
        expect_b = total_b * pooled / grand
        statistic += (count_a - expect_a) ** 2 / expect_a
        statistic += (count_b - expect_b) ** 2 / expect_b
    dof = len(cells) - 1
    p_value = float(chi2.sf(statistic, dof))
    return ComparisonReport(
        statistic=statistic,
        dof=dof,
        p_value=p_value,
        alpha=alpha,
        cells=len(cells),
        draws=n_draws,
        passed=p_value >= alpha,
    )


@dataclass(frozen=True)
class ClosureReport:
    """Worst deviation between field frequencies and exact probabilities.

    Every nonempty vertex set I is checked: the fraction of field draws
    vanishing on I against the chain's exact P(all zero on I), in units
    of the binomial standard deviation at the given draw count.
    """

    draws: int
    checked: int
    max_sigmas: float
    worst_set: Optional[VertexSet]
    tolerance: float
    passed: bool


def poisson_closure_report(tree, params, n_draws, seed, tolerance=4.0):
    """Sample the chain's Poisson field and compare all zero patterns."""
    field = field_from_chain(tree, params)
    words = sample_poisson_field_many(field, n_draws, seed)
    zeros_on = _zeros_on_table(_pattern_histogram(words, tree.n), tree.n)
    cache = {}
    worst = 0.0
    worst_set = None
    checked = 0
    for bits in range(1, 1 << tree.n):
        checked += 1
        exact = float(prob_all_zero(tree, params, VertexSet(bits), cache=cache))
        sigma = math.sqrt(exact * (1.0 - exact) / n_draws)
        gap = abs(zeros_on(bits) / n_draws - exact)
        sigmas = gap / sigma if sigma > 0 else (0.0 if gap == 0 else math.inf)
        if sigmas > worst:
            worst = sigmas
            worst_set = VertexSet(bits)
    return ClosureReport(
        draws=n_draws,
        checked=checked,
        max_sigmas=worst,
        worst_set=worst_set,
        tolerance=tolerance,
        passed=worst <= tolerance,
    )
