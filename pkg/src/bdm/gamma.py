"""Deviation distribution gamma(d, T, t): closed form, enumeration, mean, lower bound.

gamma(d, T, t) is the stationary mass of all states with drain d at slot
(T, t). The closed form is an alternating sum over h = 1..M with one
exponent per sign of d:

    eps_+(D, h) = h*D + C(h,2) + (M+1)(M-2)/2
    eps_-(D, h) = -h*D + C(h+1,2) + (M+1)(h-1) + M(M+1)/2
    eps_0       = min(eps_+, eps_-)

with D = t - T. These exponents were pinned down against exact enumeration
(every slot, M <= 4, q in {2, 3, 5}); they give exact normalization and
antisymmetry, which the tests check independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod

from .core import all_slots, class_of, witness_state
from .mass import enumerate_states
from .partitions import partition_gf, partition_gf_truncated, weighted_tail_bound


@dataclass(frozen=True)
class GammaQuery:
    q: int
    M: int
    T: int
    t: int
    d: int

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be at least 2")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if not 0 <= self.T <= self.M or not 1 <= self.t <= self.M + 1:
            raise ValueError(f"slot (T={self.T}, t={self.t}) outside the BDM range for M={self.M}")

    @property
    def delta(self) -> int:
        return self.t - self.T

    @property
    def sign(self) -> int:
        return (self.d > 0) - (self.d < 0)


def epsilon(sign: int, delta: int, h: int, M: int) -> int:
    """Exponent of q in the h-th term, for the given sign of d."""
    if not 1 <= h <= M:
        raise ValueError(f"h={h} outside 1..{M}")
    plus = h * delta + comb(h, 2) + (M + 1) * (M - 2) // 2
    minus = -h * delta + comb(h + 1, 2) + (M + 1) * (h - 1) + M * (M + 1) // 2
    if sign > 0:
        return plus
    if sign < 0:
        return minus
    return min(plus, minus)


def _qpow(q: int, e: int) -> Fraction:
    return Fraction(q) ** e


def _geometric_head(q: int, M: int, h: int) -> int:
    # sum_{k=0}^{h-1} q^((M+1)k)
    return sum(q ** ((M + 1) * k) for k in range(h))


def _upper_block(q: int, M: int, h: int) -> int:
    # prod_{k=M+2}^{M+h} (q^k - 1); empty for h = 1
    return prod(q**k - 1 for k in range(M + 2, M + h + 1))


def _term(q: int, M: int, delta: int, sign: int, h: int) -> Fraction:
    # h-th summand at |d| = 0, common factor q^(M(M+1)/2) not yet divided out
    num = _geometric_head(q, M, h) * prod(q**k - 1 for k in range(M - h + 1, M + 1))
    expo = epsilon(sign, delta, h, M) - (M + 1) * (h - 1)
    return (-1) ** (h + 1) * Fraction(num, _upper_block(q, M, h)) * _qpow(q, expo)


def gamma_closed(gq: GammaQuery) -> Fraction:
    """Closed form without the 1/P(M,q) prefactor.

    The common factor q^(M(M+1)/2) is an integer power because M(M+1) is
    even, so it is divided out once after the sum.
    """
    q, M = gq.q, gq.M
    acc = sum(
        (_term(q, M, gq.delta, gq.sign, h) * _qpow(q, -h * (M + 1) * abs(gq.d)) for h in range(1, M + 1)),
        Fraction(0),
    )
    return acc / q ** (M * (M + 1) // 2)


def gamma_closed_normalized(gq: GammaQuery) -> Fraction:
    """Same value written as (1/P(M,q)) times an alternating sum."""
    q, M = gq.q, gq.M
    acc = Fraction(0)
    for h in range(1, M + 1):
        lower = prod(q**k - 1 for k in range(1, M - h + 1))
        ratio = Fraction(_geometric_head(q, M, h), q ** ((M + 1) * (h - 1)))
        expo = epsilon(gq.sign, gq.delta, h, M) - h * (M + 1) * abs(gq.d)
        acc += (-1) ** (h + 1) * ratio * _qpow(q, expo) / (lower * _upper_block(q, M, h))
    return acc / partition_gf(M, q)


def gamma_closed_total(q: int, M: int, T: int, t: int) -> Fraction:
    """Sum of gamma_closed over all integers d, both geometric tails in closed form."""
    acc = gamma_closed(GammaQuery(q, M, T, t, 0))
    scale = q ** (M * (M + 1) // 2)
    for h in range(1, M + 1):
        r = Fraction(1, q ** (h * (M + 1)))
        tail = r / (1 - r)  # sum over |d| >= 1 of r^|d|
        for sign in (1, -1):
            acc += _term(q, M, t - T, sign, h) * tail / scale
    return acc


def gamma_enumerated(gq: GammaQuery, K_max: int) -> tuple[Fraction, Fraction]:
    """(sum of stationary masses over census states with drain d, tail bound)."""
    return gamma_enumerated_slot(gq.q, gq.M, gq.T, gq.t, K_max).get(gq.d, Fraction(0)), _tail(gq.q, gq.M, K_max)


def _tail(q: int, M: int, K_max: int) -> Fraction:
    _, tail = partition_gf_truncated(M, q, K_max)
    return tail / partition_gf(M, q)


def gamma_enumerated_slot(q: int, M: int, T: int, t: int, K_max: int) -> dict[int, Fraction]:
    """Truncated gamma for every drain present in the census of one slot."""
    census = enumerate_states(M, T, t, K_max)
    P = partition_gf(M, q)
    out: dict[int, Fraction] = {}
    for s in census.states:
        out[s.d] = out.get(s.d, Fraction(0)) + Fraction(1, q ** class_of(s))
    return {d: v / P for d, v in sorted(out.items())}


def drain_slack(M: int) -> int:
    """c in K >= |d|(M+1) - c over all states.

    The near-balanced state of drain d sits (M-t)+1+T <= 2M+1 below
    |d|(M+1) for d < 0, and (M-T)+(M-a) <= 2M below it for d > 0; other
    states of the same drain only cost more.
    """
    return 2 * M + 1


def mean_deviation(q: int, M: int, T: int, K_max: int) -> tuple[Fraction, Fraction]:
    """Truncated mean drain at slot (T, M+1) and a bound on the truncation error.

    On the tail |d| <= (K + 2M + 1)/(M + 1), so the error is at most
    sum_{K > K_max} P_M(K) (K + 2M + 1) q^-K / ((M+1) P(M,q)).
    """
    if not 0 <= T <= M:
        raise ValueError(f"T={T} outside 0..{M}")
    by_d = gamma_enumerated_slot(q, M, T, M + 1, K_max)
    value = sum((d * m for d, m in by_d.items()), Fraction(0))
    bound = weighted_tail_bound(M, q, K_max, drain_slack(M)) / ((M + 1) * partition_gf(M, q))
    return value, bound


def mean_of_means(q: int, M: int, K_max: int) -> tuple[Fraction, Fraction]:
    """Average of the truncated means over T = 0..M, with the same error bound."""
    vals = [mean_deviation(q, M, T, K_max) for T in range(M + 1)]
    return sum((v for v, _ in vals), Fraction(0)) / (M + 1), max(b for _, b in vals)


def theta_floor(gq: GammaQuery) -> Fraction:
    return Fraction(1, gq.q ** (abs(gq.d) * (gq.M + 1))) / partition_gf(gq.M, gq.q)


def theta_lower_check(gq: GammaQuery, K_max: int) -> bool:
    """Does the enumerated lower sum reach q^(-|d|(M+1)) / P(M,q)?"""
    lower, _ = gamma_enumerated(gq, K_max)
    return lower >= theta_floor(gq)


@dataclass(frozen=True)
class WitnessCheck:
    state: str
    actual_class: int
    claimed_class: int
    class_cap: int  # |d|(M+1)

    @property
    def formula_holds(self) -> bool:
        return self.actual_class == self.claimed_class

    @property
    def certifies_floor(self) -> bool:
        # one state of class <= |d|(M+1) already carries the floor mass
        return self.actual_class <= self.class_cap


def witness_check(gq: GammaQuery) -> WitnessCheck:
    s, claimed = witness_state(gq.M, gq.T, gq.t, gq.d)
    return WitnessCheck(str(s), class_of(s), claimed, abs(gq.d) * (gq.M + 1))


def queries(q: int, M: int, d_range: int):
    for T, t in all_slots(M):
        for d in range(-d_range, d_range + 1):
            yield GammaQuery(q, M, T, t, d)
