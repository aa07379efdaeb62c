"""Partitions into at most M parts and their generating function at 1/q."""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from .errors import ParameterError


class PartitionTable:
    """Memo of P_M(K) for one M, grown on demand.

    Built with P_M(K) = P_M(K-M) + P_{M-1}(K), P_M(0) = 1, which amounts to
    the usual "parts of size at most M" coin-change recurrence.
    """

    def __init__(self, M: int):
        if M < 1:
            raise ValueError("M must be at least 1")
        self.M = M
        self.values = [1]
        # rows[j][K] = P_j(K) for j = 0..M; row 0 is the indicator of K = 0
        self._rows = [[1] for _ in range(M + 1)]

    def extend(self, horizon: int):
        rows = self._rows
        start = len(rows[0])
        for K in range(start, horizon + 1):
            rows[0].append(0)
            for j in range(1, self.M + 1):
                rows[j].append(rows[j][K - j] + rows[j - 1][K] if K >= j else rows[j - 1][K])
        self.values = rows[self.M]

    def __getitem__(self, K: int) -> int:
        if K < 0:
            return 0
        if K >= len(self.values):
            self.extend(max(K, 2 * len(self.values)))
        return self.values[K]


_tables: dict[int, PartitionTable] = {}


def partition_table(M: int) -> PartitionTable:
    if M not in _tables:
        _tables[M] = PartitionTable(M)
    return _tables[M]


def partition_count(M: int, K: int) -> int:
    """Number of partitions of K into at most M parts; P_M(0) = 1."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if K < 0:
        raise ValueError("K must be nonnegative")
    return partition_table(M)[K]


def partition_gf(M: int, q: int) -> Fraction:
    """prod_{m=1..M} q^m / (q^m - 1)."""
    if q < 2:
        raise ValueError("q must be at least 2")
    out = Fraction(1)
    for m in range(1, M + 1):
        out *= Fraction(q**m, q**m - 1)
    return out


def partial_gf(M: int, q: int, K_max: int) -> Fraction:
    tab = partition_table(M)
    return sum((Fraction(tab[K], q**K) for K in range(K_max + 1)), Fraction(0))


def partition_gf_truncated(M: int, q: int, K_max: int) -> tuple[Fraction, Fraction]:
    """Partial sum over K <= K_max and an upper bound on the neglected tail.

    The bound sums the next 3*K_max terms exactly and bounds the rest by a
    geometric series with ratio r = ((N+M)/N)^(M-1) / q, N = 4*K_max.
    """
    if q < 2 or K_max < 0:
        raise ValueError("need q >= 2 and K_max >= 0")
    tab = partition_table(M)
    N = max(4 * K_max, 1)
    r = Fraction(N + M, N) ** (M - 1) / q
    if r >= 1:
        raise ParameterError(f"tail ratio bound {float(r):.3f} >= 1; increase K_max")
    partial = partial_gf(M, q, K_max)
    middle = sum((Fraction(tab[K], q**K) for K in range(K_max + 1, N + 1)), Fraction(0))
    rest = Fraction(tab[N], q**N) / (1 - r)
    return partial, middle + rest


def weighted_tail_bound(M: int, q: int, K_max: int, c: int) -> Fraction:
    """Upper bound on sum_{K > K_max} P_M(K) * (K + c) * q^-K, c >= 0.

    Exact up to 4*K_max, then P_M(K) <= C(K+M-1, M-1) and a geometric bound
    on the ratio of consecutive majorant terms, which is decreasing in K.
    """
    tab = partition_table(M)
    N = max(4 * K_max, K_max + 1)
    exact = sum((Fraction(tab[K] * (K + c), q**K) for K in range(K_max + 1, N + 1)), Fraction(0))
    K0 = N + 1
    rho = Fraction(K0 + M, K0 + 1) * Fraction(K0 + 1 + c, K0 + c) / q
    if rho >= 1:
        raise ParameterError("weighted tail ratio bound >= 1; increase K_max")
    first = Fraction(comb(K0 + M - 1, M - 1) * (K0 + c), q**K0)
    return exact + first / (1 - rho)


def partition_asymptotic(M: int, K: int) -> Fraction:
    """K^(M-1) / (M! (M-1)!), the leading-order growth of P_M(K)."""
    if M < 1 or K < 1:
        raise ValueError("need M >= 1 and K >= 1")
    return Fraction(K ** (M - 1), factorial(M) * factorial(M - 1))


def partitions(K: int, M: int, largest: int | None = None):
    """Yield partitions of K into at most M parts as nonincreasing M-tuples (zero padded)."""
    if largest is None:
        largest = K
    if K == 0:
        yield (0,) * M
        return
    if M == 0:
        return
    for first in range(min(K, largest), 0, -1):
        for rest in partitions(K - first, M - 1, first):
            yield (first,) + rest
