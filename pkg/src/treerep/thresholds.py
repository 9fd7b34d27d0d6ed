"""Threshold constants of the representability phase picture.

Exact integer/rational machinery for complementary Bell numbers,
negative-order polylogarithms (via Eulerian polynomials), and the derived
critical resampling levels:

* ``r_star(n)``: largest strictly negative root of ``Li_{1-n}``;
* ``r1(n) = 1/(1 - r_star(n))``: where the strong-resampling boundary
  function ``f_poly(n, .)`` changes sign;
* ``r0(k)``: the published weak-resampling companion level derived from
  complementary Bell numbers (kept for reproducing the reference table;
  see :func:`f_k`).

Root finding is sign-change bisection with exact rational evaluation, so
the only float rounding happens in the final conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

MAX_BELL_INDEX = 64
_BISECT_TOL = Fraction(1, 10**13)


@lru_cache(maxsize=None)
def _stirling2_row(n):
    """Stirling numbers of the second kind S(n, 0..n)."""
    if n == 0:
        return (1,)
    prev = _stirling2_row(n - 1)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        row[k] = k * (prev[k] if k <= n - 1 else 0) + prev[k - 1]
    return tuple(row)


def complementary_bell(n):
    """Alternating sum of Stirling partition counts: sum_k (-1)^k S(n,k).

    The sequence runs 1, -1, 0, 1, 1, -2, -9, -9, 50, ... and measures the
    surplus of even- over odd-block set partitions.
    """
    if not 0 <= n <= MAX_BELL_INDEX:
        raise ValueError("complementary Bell index must be in 0..%d" % MAX_BELL_INDEX)
    row = _stirling2_row(n)
    return sum((-1) ** k * row[k] for k in range(n + 1))


@lru_cache(maxsize=None)
def eulerian_coeffs(m):
    """Coefficients of the Eulerian polynomial A_m(z), ascending in z.

    A_0 = 1; A_m has degree m - 1 with the triangle recurrence
    <m,k> = (k+1)<m-1,k> + (m-k)<m-1,k-1>.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return (1,)
    prev = eulerian_coeffs(m - 1)
    row = []
    for k in range(max(m, 1)):
        a = (k + 1) * prev[k] if k < len(prev) else 0
        b = (m - k) * prev[k - 1] if 0 <= k - 1 < len(prev) else 0
        row.append(a + b)
    return tuple(row)


def _eval_poly(coeffs, z: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def polylog_neg_order(n, z):
    """Exact ``Li_{1-n}(z)`` for integer ``n >= 2`` and rational ``z != 1``.

    Uses the closed form ``Li_{-m}(z) = z * A_m(z) / (1-z)^(m+1)`` with
    ``m = n - 1`` and the Eulerian polynomial ``A_m``.
    """
    if n < 2:
        raise ValueError("order 1-n with n >= 2 required")
    z = Fraction(z)
    if z == 1:
        raise ValueError("polylogarithm of negative order has a pole at z=1")
    m = n - 1
    return z * _eval_poly(eulerian_coeffs(m), z) / (1 - z) ** (m + 1)


def _largest_negative_eulerian_root(m) -> Fraction:
    """Largest negative root of A_m, bracketed by an outward doubling scan.

    A_m(0) = 1 > 0 and consecutive negative roots are separated by factors
    of ~10, so the first dyadic point with a nonpositive value brackets
    the largest root together with its predecessor.
    """
    coeffs = eulerian_coeffs(m)
    z = Fraction(-1, 1 << 30)
    while True:
        val = _eval_poly(coeffs, z)
        if val == 0:
            return z
        if val < 0:
            break
        z *= 2
        if z < -(1 << 40):  # cannot happen: A_m(z) -> +/-inf with known sign
            raise RuntimeError("root scan failed to bracket")
    lo, hi = z, z / 2  # A(lo) < 0 < A(hi)
    while hi - lo > _BISECT_TOL:
        mid = (lo + hi) / 2
        val = _eval_poly(coeffs, mid)
        if val == 0:
            return mid
        if val < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def r_star(n) -> float:
    """Largest strictly negative root of ``Li_{1-n}``, for ``n >= 3``.

    The nonzero roots of ``Li_{1-n}`` are the roots of the Eulerian
    polynomial ``A_{n-1}``; these are simple, real and negative.
    """
    if n < 3:
        raise ValueError("r_star needs n >= 3")
    return float(_largest_negative_eulerian_root(n - 1))


def r1(m) -> float:
    """Sign-change location of ``f_poly(m, .)`` in (0, 1): 1/(1 - r_star)."""
    if m < 3:
        raise ValueError("r1 needs m >= 3")
    rho = _largest_negative_eulerian_root(m - 1)
    return float(1 / (1 - rho))


def r0(k):
    """Published weak-resampling companion level, or None when undefined.

    Defined as the maximum over 2 <= j <= k with (-1)^j * bell_c(j) > 0 of
    ``x / (1 + x)`` where ``x = ((-1)^j bell_c(j))^(1/(j-1))``.  For k = 3
    no index qualifies (bell_c(2) = 0, -bell_c(3) < 0), so the value is
    undefined; the reference table prints an anomalous placeholder there.
    """
    if k < 3:
        raise ValueError("r0 needs k >= 3")
    best = None
    for j in range(2, k + 1):
        v = (-1) ** j * complementary_bell(j)
        if v > 0:
            x = math.exp(math.log(v) / (j - 1))
            cand = x / (1 + x)
            if best is None or cand > best:
                best = cand
    return best


def f_k(k, r):
    """Reference boundary polynomial ``(1-r) r^(k-1) - (-1)^k bell_c(k) (1-r)^k``.

    This is the published weak-resampling expression whose roots generate
    :func:`r0`; kept verbatim for table reproduction.  The measured
    leading derivative of the connected-set mass in that regime is the
    plain ``(1-r) r^(k-1)`` term (see ``param_calculus.closed_form_p0``).
    """
    r = Fraction(r)
    return (1 - r) * r ** (k - 1) - (-1) ** k * complementary_bell(k) * (1 - r) ** k


def f_poly(j, r):
    """Strong-resampling boundary function, exactly.

    ``f_poly(j, r) = Li_{1-j}(-(1-r)/r) / (r^(j-1) (1-r))`` for rational
    ``r`` in (0, 1); changes sign exactly once, at ``r1(j)``.
    """
    r = Fraction(r)
    if not 0 < r < 1:
        raise ValueError("r must lie strictly between 0 and 1")
    return polylog_neg_order(j, -(1 - r) / r) / (r ** (j - 1) * (1 - r))


@dataclass(frozen=True)
class ThresholdTable:
    """One row of the threshold table for branching number ``n``."""

    n: int
    bell_c: int
    r_star: float
    r0: float | None
    r1: float


def threshold_table(ns):
    """Rows for each n in ``ns`` (each must be >= 3)."""
    return [
        ThresholdTable(n=n, bell_c=complementary_bell(n), r_star=r_star(n), r0=r0(n), r1=r1(n))
        for n in ns
    ]
