"""Tree-indexed two-state Markov chains: exact probabilities and samplers.

The chain is parametrised by a root law ``P(fresh draw = 0) = r_v`` per
vertex and a resampling probability ``p_e`` per edge: walking away from the
root, a child copies its parent's value with probability ``1 - p_e`` and
otherwise draws fresh from its own ``r``.  Equivalently (divide-and-color):
cut each edge independently with probability ``p_e`` and give every
resulting component the fresh draw of its vertex closest to the root.

Probabilities are exact ``fractions.Fraction`` values throughout; the
message-passing core only uses ring operations so it also accepts
truncated-jet coefficients for derivative work.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .tree_core import VertexSet


def as_fraction(x):
    """Coerce ints, ``"a/b"`` / decimal strings, floats, and Fractions.

    Floats go through their shortest decimal repr, so ``0.45`` means the
    exact rational 9/20, not the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


@dataclass(frozen=True)
class ChainParams:
    """Per-vertex fresh-draw laws ``r`` and per-edge resampling probs ``p``.

    ``r[v]`` is the probability a fresh draw at vertex ``v`` equals 0;
    ``p[i]`` aligns with ``tree.edges[i]``.  All values are Fractions in
    [0, 1].
    """

    r: tuple
    p: tuple


def uniform_params(tree, r, p):
    """Same ``r`` at every vertex and ``p`` on every edge."""
    r = as_fraction(r)
    p = as_fraction(p)
    return make_params(tree, r, p)


def make_params(tree, r_spec, p_spec):
    """Build :class:`ChainParams` from scalars or per-vertex / per-edge maps.

    ``r_spec``: scalar, or mapping ``vertex -> value`` (all vertices
    required).  ``p_spec``: scalar, or mapping ``"u-v" -> value`` covering
    every edge.  Values may be anything :func:`as_fraction` accepts.
    """
    if isinstance(r_spec, dict):
        r = [None] * tree.n
        for key, val in r_spec.items():
            r[int(key)] = as_fraction(val)
        if any(x is None for x in r):
            raise ValueError("per-vertex r must cover all %d vertices" % tree.n)
    else:
        r = [as_fraction(r_spec)] * tree.n

    if isinstance(p_spec, dict):
        p = [None] * len(tree.edges)
        for key, val in p_spec.items():
            if isinstance(key, str):
                u, v = (int(part) for part in key.split("-"))
            else:
                u, v = key
            p[tree.edge_index(u, v)] = as_fraction(val)
        if any(x is None for x in p):
            raise ValueError("per-edge p must cover all %d edges" % len(tree.edges))
    else:
        p = [as_fraction(p_spec)] * len(tree.edges)

    for x in r:
        if not 0 <= x <= 1:
            raise ValueError("r values must lie in [0, 1]")
    for x in p:
        if not 0 <= x <= 1:
            raise ValueError("p values must lie in [0, 1]")
    return ChainParams(r=tuple(r), p=tuple(p))


def params_from_json(tree, text):
    """Parse ``{"r": ..., "p": ...}`` with decimals kept exact."""
    obj = json.loads(text, parse_float=Fraction)
    if not isinstance(obj, dict) or "r" not in obj or "p" not in obj:
        raise ValueError('params JSON needs "r" and "p" entries')
    return make_params(tree, obj["r"], obj["p"])


@lru_cache(maxsize=None)
def _parent_edges(tree):
    """Edge index of (parent[v], v) for every non-root v, -1 at the root."""
    idx = [-1] * tree.n
    for v in tree.preorder[1:]:
        idx[v] = tree.edge_index(tree.parent[v], v)
    return tuple(idx)


def prob_all_zero(tree, params, zero_on, cache=None):
    """Exact probability that the chain is 0 everywhere on ``zero_on``.

    One bottom-up sweep: ``f_v(x)`` is the probability that the subtree
    below ``v`` respects the zero constraint given ``X(v) = x``; an edge
    passes its child's table through the copy/resample kernel.  Only ring
    operations are used, so parameter entries may be Fractions or jet
    values.  ``cache`` (a dict) memoises results per ``zero_on`` bitmask
    for a fixed (tree, params).
    """
    a = zero_on.bits
    if a >> tree.n:
        raise ValueError("zero_on contains ids outside the tree")
    if a == 0:
        return Fraction(1)
    if cache is not None and a in cache:
        return cache[a]

    pedge = _parent_edges(tree)
    f0 = [None] * tree.n
    f1 = [None] * tree.n
    for v in reversed(tree.preorder):
        m0 = Fraction(1)
        m1 = Fraction(1)
        for c in tree.children[v]:
            pe = params.p[pedge[c]]
            rc = params.r[c]
            mix = rc * f0[c] + (1 - rc) * f1[c]
            m0 = m0 * ((1 - pe) * f0[c] + pe * mix)
            m1 = m1 * ((1 - pe) * f1[c] + pe * mix)
        f0[v] = m0
        f1[v] = 0 * m1 if (a >> v) & 1 else m1
    ro = params.r[tree.root]
    result = ro * f0[tree.root] + (1 - ro) * f1[tree.root]
    if cache is not None:
        cache[a] = result
    return result


def brute_force_prob_all_zero(tree, params, zero_on, max_edges=20):
    """Independent oracle for :func:`prob_all_zero` via percolation.

    Enumerates all 2^|E| cut patterns, splits the tree into components,
    and gives each component the fresh draw of its vertex closest to the
    root.  Exponential in the edge count; refuse above ``max_edges``.
    """
    m = len(tree.edges)
    if m > max_edges:
        raise ValueError("brute force capped at %d edges" % max_edges)
    a = zero_on.bits
    if a >> tree.n:
        raise ValueError("zero_on contains ids outside the tree")
    if a == 0:
        return Fraction(1)

    total = Fraction(0)
    for config in range(1 << m):
        weight = Fraction(1)
        comp = list(range(tree.n))

        def find(x):
            while comp[x] != x:
                comp[x] = comp[comp[x]]
                x = comp[x]
            return x

        for i, (u, v) in enumerate(tree.edges):
            if (config >> i) & 1:
                weight *= params.p[i]
            else:
                weight *= 1 - params.p[i]
                ru, rv = find(u), find(v)
                if ru != rv:
                    comp[ru] = rv
        top = {}
        for v in range(tree.n):
            c = find(v)
            if c not in top or tree.depth[v] < tree.depth[top[c]]:
                top[c] = v
        for c in {find(v) for v in zero_on}:
            weight *= params.r[top[c]]
        total += weight
    return total


# ---------------------------------------------------------------------------
# samplers


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _bern(rng, q, size):
    """Boolean draws that are True with exact rational probability ``q``."""
    if q == 0:
        return np.zeros(size, dtype=bool)
    if q == 1:
        return np.ones(size, dtype=bool)
    threshold = (q.numerator << 63) // q.denominator
    return rng.integers(0, 1 << 63, size=size, dtype=np.int64) < threshold


def sample_recursive_many(tree, params, n_draws, seed):
    """Vectorised root-to-leaf sampler; returns packed bitmask per draw.

    Bit ``v`` of word ``i`` is ``X(v)`` in draw ``i``.  Randomness is
    consumed in preorder, so draws are reproducible per (tree, params,
    seed) and the first word matches :func:`sample_recursive`.
    """
    rng = _rng(seed)
    pedge = _parent_edges(tree)
    x = np.zeros((tree.n, n_draws), dtype=bool)
    for v in tree.preorder:
        if v == tree.root:
            x[v] = ~_bern(rng, params.r[v], n_draws)
        else:
            resample = _bern(rng, params.p[pedge[v]], n_draws)
            fresh = ~_bern(rng, params.r[v], n_draws)
            x[v] = np.where(resample, fresh, x[tree.parent[v]])
    return _pack(x)


def sample_percolation_many(tree, params, n_draws, seed):
    """Vectorised divide-and-color sampler; same output format as
    :func:`sample_recursive_many` but a genuinely different code path:
    cut edges first, then color each component by its top vertex's draw.
    """
    rng = _rng(seed)
    pedge = _parent_edges(tree)
    cut = np.zeros((tree.n, n_draws), dtype=bool)
    for v in tree.preorder[1:]:
        cut[v] = _bern(rng, params.p[pedge[v]], n_draws)
    fresh = np.zeros((tree.n, n_draws), dtype=bool)
    for v in range(tree.n):
        fresh[v] = ~_bern(rng, params.r[v], n_draws)

    top = np.zeros((tree.n, n_draws), dtype=np.int64)
    top[tree.root] = tree.root
    for v in tree.preorder[1:]:
        top[v] = np.where(cut[v], v, top[tree.parent[v]])
    cols = np.arange(n_draws)
    x = np.zeros((tree.n, n_draws), dtype=bool)
    for v in range(tree.n):
        x[v] = fresh[top[v], cols]
    return _pack(x)


def _pack(x):
    words = np.zeros(x.shape[1], dtype=np.uint64)
    for v in range(x.shape[0]):
        words |= x[v].astype(np.uint64) << np.uint64(v)
    return words


def sample_recursive(tree, params, rng_seed):
    """One root-to-leaf draw; returns the 0/1 assignment as a tuple."""
    word = int(sample_recursive_many(tree, params, 1, rng_seed)[0])
    return tuple((word >> v) & 1 for v in range(tree.n))


def sample_percolation(tree, params, rng_seed):
    """One divide-and-color draw; returns the 0/1 assignment as a tuple."""
    word = int(sample_percolation_many(tree, params, 1, rng_seed)[0])
    return tuple((word >> v) & 1 for v in range(tree.n))
