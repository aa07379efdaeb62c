import random
from collections import Counter
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdm.errors import BudgetExceededError, NotPrimeError, ParseError
from bdm.field_oracle import (
    FieldSpec,
    Multisequence,
    brute_force_joint_lc,
    exhaustive_histogram,
    exhaustive_histograms,
    find_recurrence,
    joint_lc,
    joint_lc_streams,
    parse_multisequence,
    profile,
    solve_recurrence,
    typical_lc,
)


def berlekamp_massey(s, p):
    """Textbook single-sequence linear complexity over GF(p)."""
    C, B = [1], [1]
    L, m, b = 0, 1, 1
    for n in range(len(s)):
        d = s[n]
        for i in range(1, L + 1):
            d = (d + C[i] * s[n - i]) % p
        if d == 0:
            m += 1
            continue
        coef = d * pow(b, -1, p) % p
        T = C[:]
        C = C + [0] * (len(B) + m - len(C))
        for i, x in enumerate(B):
            C[i + m] = (C[i + m] - coef * x) % p
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, d, 1
        else:
            m += 1
    return L


def seq(q, *rows):
    return Multisequence(q, tuple(tuple(r) for r in rows))


def test_field_rejects_composite():
    with pytest.raises(NotPrimeError):
        FieldSpec(4)
    assert FieldSpec(7).inv(3) == 5


def test_symbol_range_enforced():
    with pytest.raises(ValueError):
        seq(2, [0, 2])


def test_solve_recurrence_examples():
    assert solve_recurrence(seq(2, [0, 0, 0]), 0)
    assert not solve_recurrence(seq(2, [1]), 0)
    assert solve_recurrence(seq(2, [1, 1, 0]), 2)
    # exhaustive over F_2^2: a_2 = a1*a_1 + a2*a_0 leaves (0,0) and (1,1)
    valid = {a for a in product(range(2), repeat=2) if (a[0] * 1 + a[1] * 1) % 2 == 0}
    assert (1, 1) in valid
    assert find_recurrence([[1, 1, 0]], 2, 2) in valid


def test_solve_recurrence_rejects_long_L():
    with pytest.raises(ValueError):
        solve_recurrence(seq(2, [1]), 2)


def test_joint_lc_examples():
    assert joint_lc(seq(2, [0])) == 0
    assert joint_lc(seq(2, [1])) == 1
    assert joint_lc(Multisequence.from_columns(2, [(1, 0)])) == 1


def test_profile_examples():
    zero = profile(seq(2, [0] * 4, [0] * 4))
    assert zero.L == [0] * 5
    assert zero.d == [-typical_lc(n, 2) for n in range(5)]
    impulse = profile(seq(2, [1] + [0] * 7))
    assert impulse.L[1:] == [1] * 8
    assert profile(seq(2, [1])).d[1] == 0


def test_histogram_examples():
    assert exhaustive_histogram(2, 1, 1) == {-1: 1, 0: 1}
    assert exhaustive_histogram(2, 1, 0) == {0: 1}
    assert sum(exhaustive_histogram(2, 1, 2).values()) == 4


@pytest.mark.parametrize("q,M,n", [(2, 1, 9), (2, 2, 5), (3, 1, 6), (2, 3, 3), (5, 1, 4)])
def test_histogram_totals(q, M, n):
    hists = exhaustive_histograms(q, M, n)
    for k, h in enumerate(hists):
        assert sum(h.values()) == q ** (M * k)


def test_histogram_budget():
    with pytest.raises(BudgetExceededError):
        exhaustive_histogram(2, 2, 10, budget=2**10)


def test_sharded_histograms_identical():
    assert exhaustive_histograms(2, 2, 5, workers=3) == exhaustive_histograms(2, 2, 5)
    assert exhaustive_histograms(3, 1, 5, workers=2, symbol_level=True) == exhaustive_histograms(
        3, 1, 5, symbol_level=True
    )


def test_histogram_matches_direct_oracle():
    # recount with joint_lc on every prefix, no shared search state
    q, M, n = 2, 2, 3
    direct = Counter()
    for flat in product(range(q), repeat=M * n):
        rows = [flat[m * n : (m + 1) * n] for m in range(M)]
        direct[joint_lc(seq(q, *rows)) - typical_lc(n, M)] += 1
    assert exhaustive_histogram(q, M, n) == dict(direct)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.data())
def test_single_stream_matches_berlekamp_massey(q, data):
    s = data.draw(st.lists(st.integers(0, q - 1), max_size=24))
    assert joint_lc_streams([s], q) == berlekamp_massey(s, q)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3), st.data())
def test_joint_lc_matches_brute_force(q, M, data):
    n = data.draw(st.integers(0, 4 if q == 2 else 3))
    rows = [data.draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n)) for _ in range(M)]
    assert joint_lc(seq(q, *rows)) == brute_force_joint_lc(rows, q)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3), st.data())
def test_profile_monotone(q, M, data):
    n = data.draw(st.integers(0, 10))
    rows = [data.draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n)) for _ in range(M)]
    prof = profile(seq(q, *rows))
    assert prof.symbol_L[0] == 0
    assert all(a <= b for a, b in zip(prof.symbol_L, prof.symbol_L[1:]))
    for k in range(n + 1):
        assert prof.d[k] == prof.L[k] - typical_lc(k, M)


def test_profile_partial_columns_match_truncated_prefix():
    rng = random.Random(5)
    q, M, n = 3, 3, 6
    rows = [[rng.randrange(q) for _ in range(n)] for _ in range(M)]
    prof = profile(seq(q, *rows))
    for k in range(1, n + 1):
        for m in range(1, M + 1):
            streams = [r[:k] if i < m else r[: k - 1] for i, r in enumerate(rows)]
            oracle = brute_force_joint_lc if k <= 3 else joint_lc_streams
            assert prof.at(k, m) == oracle(streams, q)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 3), st.data())
def test_extensions_split_into_one_and_rest(q, M, data):
    # among the q next symbols, complexity either stays put for all of them, or
    # exactly one keeps it and the other q-1 share one larger value
    n = data.draw(st.integers(0, 5))
    m = data.draw(st.integers(0, M - 1))
    streams = [data.draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n)) for _ in range(M)]
    for i in range(m):
        streams[i].append(data.draw(st.integers(0, q - 1)))
    before = joint_lc_streams(streams, q)
    after = []
    for x in range(q):
        ext = [list(s) for s in streams]
        ext[m].append(x)
        after.append(joint_lc_streams(ext, q))
    values = Counter(after)
    if len(values) == 1:
        assert after[0] >= before
    else:
        assert len(values) == 2
        assert values[before] == 1
        assert values[max(values)] == q - 1


def test_parse_roundtrip_and_errors():
    s = seq(3, [0, 1, 2], [2, 2, 0])
    assert parse_multisequence(s.to_text()) == s
    with pytest.raises(ParseError, match="line 2"):
        parse_multisequence("2 1 2\n1 7\n")
    with pytest.raises(ParseError, match="line 3"):
        parse_multisequence("2 2 2\n1 0\n1\n")
    with pytest.raises(NotPrimeError):
        parse_multisequence("4 1 1\n1\n")
    with pytest.raises(ParseError, match="line 1"):
        parse_multisequence("2 x 1\n")
