"""Exact parameter derivatives of the signed measure via truncated jets.

Every probability the chain produces is a polynomial in the edge
parameters ``p_e`` and vertex laws ``r_v`` (multilinear in each), so
running the message-passing recursion on truncated-polynomial
coefficients instead of plain rationals yields exact mixed partials —
no finite differences, no floats.  Logarithms are handled symbolically:
inside the truncated algebra ``log u = log c + log1p(u/c - 1)`` and the
second term is a terminating series because ``u/c - 1`` is nilpotent.
The constant terms stay positive at every base point we differentiate
at (they are products of the ``r_v``, or exactly 1 when ``r == 1``), so
the series is always legal.

The closed forms at the degenerate base points ``p == 0`` and ``p == 1``
live here as well, next to the jet oracle that certifies them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .chain_model import ChainParams, as_fraction, prob_all_zero
from .signed_measure import connected_log_events
from .thresholds import f_poly
from .tree_core import VertexSet, is_connected, spanning_subtree

DEFAULT_JET_CAP = 6


class DualValue:
    """Polynomial in named infinitesimal directions, truncated by degree.

    ``terms`` maps exponent tuples (one slot per direction) to rational
    coefficients.  Monomials whose exponent exceeds the per-direction
    ``caps`` or whose total degree exceeds ``order`` are dropped, i.e.
    the ring is Q[e_1..e_k] modulo those monomials.  The truncation is
    closed under +, -, *; division requires an invertible (nonzero)
    constant term.

    Instances mix freely with ints and Fractions on either side, which
    is what lets :func:`treerep.chain_model.prob_all_zero` run on jets
    unchanged.
    """

    __slots__ = ("caps", "order", "terms")

    def __init__(self, caps, order, terms):
        self.caps = tuple(caps)
        self.order = order
        self.terms = {e: c for e, c in terms.items() if c != 0}

    @classmethod
    def constant(cls, caps, order, value):
        zero = (0,) * len(caps)
        return cls(caps, order, {zero: as_fraction(value)})

    @classmethod
    def variable(cls, caps, order, slot, base=0):
        """``base + eps_slot`` as a jet."""
        unit = tuple(1 if i == slot else 0 for i in range(len(caps)))
        terms = {(0,) * len(caps): as_fraction(base), unit: Fraction(1)}
        return cls(caps, order, terms)

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.caps), Fraction(0))

    def coefficient(self, exponents) -> Fraction:
        return self.terms.get(tuple(exponents), Fraction(0))

    def _lift(self, other):
        if isinstance(other, DualValue):
            if other.caps != self.caps or other.order != self.order:
                raise ValueError("jets from different truncated rings")
            return other
        return DualValue.constant(self.caps, self.order, other)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return DualValue(self.caps, self.order, terms)

    __radd__ = __add__

    def __neg__(self):
        return DualValue(
            self.caps, self.order, {e: -c for e, c in self.terms.items()}
        )

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        caps, order = self.caps, self.order
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if sum(e) > order or any(d > cap for d, cap in zip(e, caps)):
                    continue
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return DualValue(caps, order, out)

    __rmul__ = __mul__

    def inverse(self):
        c = self.constant_term
        if c == 0:
            raise ZeroDivisionError("jet with zero constant term has no inverse")
        t = self * (Fraction(1) / c) - 1
        out = DualValue.constant(self.caps, self.order, 1)
        power = t
        sign = -1
        for _ in range(self.order):
            if not power.terms:
                break
            out = out + sign * power
            power = power * t
            sign = -sign
        return out * (Fraction(1) / c)

    def __truediv__(self, other):
        if isinstance(other, DualValue):
            return self * other.inverse()
        return self * (Fraction(1) / as_fraction(other))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def log_series(self):
        """``log(self) - log(constant term)``, exact in the truncated ring.

        The constant term must be positive.  Only the polynomial part of
        the log is representable over the rationals; callers track the
        dropped ``log c`` separately (as a product of the constants).
        """
        c = self.constant_term
        if c <= 0:
            raise ValueError("log needs a positive constant term")
        t = self * (Fraction(1) / c) - 1
        out = DualValue.constant(self.caps, self.order, 0)
        power = t
        k = 1
        while k <= self.order and power.terms:
            out = out + power * Fraction((-1) ** (k + 1), k)
            power = power * t
            k += 1
        return out

    def __eq__(self, other):
        if isinstance(other, DualValue):
            return (
                self.caps == other.caps
                and self.order == other.order
                and self.terms == other.terms
            )
        return self.terms == DualValue.constant(self.caps, self.order, other).terms

    __hash__ = None

    def __repr__(self):
        body = ", ".join(
            "%s: %s" % (e, c) for e, c in sorted(self.terms.items())
        )
        return "DualValue(caps=%s, order=%d, {%s})" % (self.caps, self.order, body)


@dataclass(frozen=True)
class EdgeMultiset:
    """Multiset of tree edges: the differentiation order per edge.

    ``items`` holds ``((u, v), multiplicity)`` pairs with ``u < v``,
    sorted.  A repeated edge means a repeated partial in that edge's
    parameter.
    """

    items: tuple

    @classmethod
    def of(cls, *edges):
        """Build from edges listed with repetition, e.g. ``of((0,1), (0,1))``."""
        counts = {}
        for u, v in edges:
            if u == v:
                raise ValueError("edge endpoints must differ")
            key = (min(u, v), max(u, v))
            counts[key] = counts.get(key, 0) + 1
        return cls(items=tuple(sorted(counts.items())))

    @classmethod
    def from_string(cls, text):
        """Parse ``"0-1,0-1,1-2"`` (an edge per comma-separated ``u-v``)."""
        edges = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            u, v = part.split("-")
            edges.append((int(u), int(v)))
        return cls.of(*edges)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.items)

    @property
    def support(self):
        return tuple(e for e, _ in self.items)

    def multiplicity(self, u, v) -> int:
        key = (min(u, v), max(u, v))
        for e, m in self.items:
            if e == key:
                return m
        return 0

    def __str__(self):
        return ",".join("%d-%d" % e for e, m in self.items for _ in range(m))


def boundary_edge_multiset(tree, subset) -> EdgeMultiset:
    """The edges joining ``subset`` to the rest of the tree, once each.

    This is the distinguished multiset at ``p == 0``: the lowest-order
    non-vanishing derivative of nu(S) takes one partial per boundary
    edge.  For connected S its size equals the outer boundary's size.
    """
    s = subset.bits
    edges = [e for e in tree.edges if ((s >> e[0]) & 1) != ((s >> e[1]) & 1)]
    return EdgeMultiset.of(*edges)


def subtree_edge_multiset(tree, subset) -> EdgeMultiset:
    """The edges of the minimal subtree spanning ``subset``, once each.

    This is the distinguished multiset at ``p == 1``: the lowest-order
    non-vanishing derivative of nu(S) takes one partial per spanning
    subtree edge.
    """
    closure = spanning_subtree(tree, subset).closure.bits
    edges = [
        e
        for e in tree.edges
        if (closure >> e[0]) & 1 and (closure >> e[1]) & 1
    ]
    return EdgeMultiset.of(*edges)


def _nu_jet(tree, params, subset, caps, order):
    """Constant ratio and jet series with ``nu(S) = log(ratio) + series``."""
    const = Fraction(1)
    series = DualValue.constant(caps, order, 0)
    for sign, bits in connected_log_events(tree, subset):
        if bits == 0:
            continue
        prob = prob_all_zero(tree, params, VertexSet(bits))
        if not isinstance(prob, DualValue):
            prob = DualValue.constant(caps, order, prob)
        if sign > 0:
            const *= prob.constant_term
            series = series + prob.log_series()
        else:
            const /= prob.constant_term
            series = series - prob.log_series()
    return const, series


def _extract(series, mults):
    scale = math.prod(math.factorial(m) for m in mults)
    return series.coefficient(mults) * scale


def _require_positive(values, what):
    for x in values:
        if x <= 0:
            raise ValueError("%s must be positive for log derivatives" % what)


def d_nu_dp(tree, params, subset, edges, at="params", degree_cap=DEFAULT_JET_CAP):
    """Exact mixed partial of nu(S) in edge parameters.

    ``edges`` is an :class:`EdgeMultiset` (or anything ``EdgeMultiset.of``
    accepts, listed with repetition); the derivative is
    ``d^|E| nu(S) / prod_e dp_e^mult(e)`` evaluated at ``at``:
    ``"params"`` (the given edge values), ``"p0"`` (every p_e = 0) or
    ``"p1"`` (every p_e = 1).  Vertex laws always come from ``params``
    and must be positive.  Returns a Fraction; disconnected sets give 0
    since their measure vanishes identically.
    """
    if isinstance(edges, EdgeMultiset):
        multiset = edges
    else:
        multiset = EdgeMultiset.of(*edges)
    if not subset.bits:
        raise ValueError("subset must be nonempty")
    if multiset.total == 0:
        raise ValueError("derivative needs at least one edge")
    if multiset.total > degree_cap:
        raise ValueError(
            "jet cap exceeded: order %d > cap %d" % (multiset.total, degree_cap)
        )
    slots = [tree.edge_index(u, v) for u, v in multiset.support]
    _require_positive(params.r, "vertex laws")
    if at == "params":
        base_p = params.p
    elif at == "p0":
        base_p = (Fraction(0),) * len(tree.edges)
    elif at == "p1":
        base_p = (Fraction(1),) * len(tree.edges)
    else:
        raise ValueError('at must be "params", "p0" or "p1"')
    if not is_connected(tree, subset):
        return Fraction(0)

    mults = tuple(m for _, m in multiset.items)
    order = multiset.total
    jet_p = list(base_p)
    for slot_pos, edge_slot in enumerate(slots):
        jet_p[edge_slot] = DualValue.variable(
            mults, order, slot_pos, base_p[edge_slot]
        )
    jet_params = ChainParams(r=params.r, p=tuple(jet_p))
    _, series = _nu_jet(tree, jet_params, subset, mults, order)
    return _extract(series, mults)


def d_nu_dr(tree, params, subset, vertices, at="params", degree_cap=DEFAULT_JET_CAP):
    """Exact mixed partial of nu(S) in vertex laws.

    ``vertices`` is a multiset given as an iterable with repetition
    (``[0, 0, 3]``) or a ``{vertex: multiplicity}`` mapping.  ``at`` is
    ``"params"`` (the given vertex laws, all positive) or ``"r1"``
    (every r_v = 1, where the chain is frozen at zero and the constant
    terms are exactly 1).  Edge parameters always come from ``params``.
    """
    if isinstance(vertices, dict):
        counts = {int(v): int(m) for v, m in vertices.items() if m}
    else:
        counts = {}
        for v in vertices:
            counts[int(v)] = counts.get(int(v), 0) + 1
    if not subset.bits:
        raise ValueError("subset must be nonempty")
    if not counts:
        raise ValueError("derivative needs at least one vertex")
    for v in counts:
        if not 0 <= v < tree.n:
            raise ValueError("vertex %d outside the tree" % v)
    order = sum(counts.values())
    if order > degree_cap:
        raise ValueError("jet cap exceeded: order %d > cap %d" % (order, degree_cap))
    if at == "params":
        base_r = params.r
        _require_positive(base_r, "vertex laws")
    elif at == "r1":
        base_r = (Fraction(1),) * tree.n
    else:
        raise ValueError('at must be "params" or "r1"')
    if not is_connected(tree, subset):
        return Fraction(0)

    support = tuple(sorted(counts))
    mults = tuple(counts[v] for v in support)
    jet_r = list(base_r)
    for slot_pos, v in enumerate(support):
        jet_r[v] = DualValue.variable(mults, order, slot_pos, base_r[v])
    jet_params = ChainParams(r=tuple(jet_r), p=params.p)
    _, series = _nu_jet(tree, jet_params, subset, mults, order)
    return _extract(series, mults)


def closed_form_p0(b, r) -> Fraction:
    """Leading boundary-edge derivative of nu(S) at ``p == 0``.

    For connected S with outer boundary of size ``b`` and uniform vertex
    law ``r``, the mixed partial in the ``b`` boundary edges equals

        (1 - r) * r**(b - 1),

    which is positive on all of (0, 1).  The reference expression that
    subtracts a complementary-Bell correction term (kept verbatim as
    :func:`treerep.thresholds.f_k` for the threshold table it anchors)
    does not reproduce the jet oracle for b >= 3; the plain product here
    is the measured coefficient, for every connected S.
    """
    if b < 2:
        raise ValueError("outer boundary must have at least 2 vertices")
    r = as_fraction(r)
    if not 0 < r < 1:
        raise ValueError("r must lie strictly inside (0, 1)")
    return (1 - r) * r ** (b - 1)


def closed_form_p1(tree, subset, r) -> Fraction:
    """Leading subtree-edge derivative of nu(S) at ``p == 1``.

    For connected S with at least two vertices and uniform vertex law
    ``r``, the mixed partial in the edges of the induced subtree T_S is

        (-1)**|E(T_S)| * (1-r)/r * prod_{j >= 2} (-f_poly(j, r))**k_j

    with ``k_j`` the number of degree-j vertices of T_S.  Degree-2
    vertices contribute factor 1 exactly, so subdividing edges never
    changes the value; the sign flips of the degree-j factor are what
    the ``r1(j)`` thresholds track.
    """
    if not is_connected(tree, subset) or len(subset) < 2:
        raise ValueError("subset must be connected with at least 2 vertices")
    r = as_fraction(r)
    if not 0 < r < 1:
        raise ValueError("r must lie strictly inside (0, 1)")
    sub = spanning_subtree(tree, subset)
    value = Fraction(-1) ** (sub.tree.n - 1) * (1 - r) / r
    for j, count in sub.degree_counts().items():
        if j >= 2:
            value *= (-f_poly(j, r)) ** count
    return value


def d_nu_dr_octopus(m, p_first, p_second) -> Fraction:
    """Center-law derivative of nu(center + inner ring) on octopus(m, 2).

    At ``r == 1`` every first-order vertex-law derivative of nu(S)
    vanishes except the center's, which factors over the arms:

        d nu(S) / d r_center |_{r == 1} = -prod_j (1 - p_{j,1}) * p_{j,2}

    where ``p_first[j]`` is the center-to-inner edge of arm j and
    ``p_second[j]`` the inner-to-leaf edge.  The jet computation of the
    same derivative on the depth-2 truncation must (and does) agree
    exactly; see the companion tests.
    """
    if m < 3:
        raise ValueError("octopus needs at least 3 arms")
    p_first = [as_fraction(x) for x in p_first]
    p_second = [as_fraction(x) for x in p_second]
    if len(p_first) != m or len(p_second) != m:
        raise ValueError("need one (p_{j,1}, p_{j,2}) pair per arm")
    for x in p_first + p_second:
        if not 0 <= x <= 1:
            raise ValueError("edge parameters must lie in [0, 1]")
    value = Fraction(-1)
    for a, b in zip(p_first, p_second):
        value *= (1 - a) * b
    return value
