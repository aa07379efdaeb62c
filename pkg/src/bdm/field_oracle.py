"""Joint linear complexity of multisequences over prime fields.

Everything here is computed from the recurrence characterization by exact
Gaussian elimination mod p. Nothing in this module knows about the battery
discharge chain, so it can be used as ground truth against it.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .errors import BudgetExceededError, NotPrimeError, ParseError

DEFAULT_BUDGET = 2**26


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for f in range(3, math.isqrt(n) + 1, 2):
        if n % f == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    q: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise NotPrimeError(f"q={self.q} is not prime; only prime fields are supported")

    def inv(self, a: int) -> int:
        return pow(a, -1, self.q)


@dataclass(frozen=True)
class Multisequence:
    """M parallel streams of n symbols each over F_q.

    ``rows[m][j]`` is the (j+1)-th symbol of stream m+1.
    """

    q: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        FieldSpec(self.q)
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise ValueError("a multisequence needs at least one stream")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("all streams must have the same length")
        for r in rows:
            for x in r:
                if not 0 <= x < self.q:
                    raise ValueError(f"symbol {x} outside [0, {self.q})")

    @property
    def M(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    @classmethod
    def from_columns(cls, q: int, columns: Sequence[Sequence[int]]) -> "Multisequence":
        if not columns:
            raise ValueError("use the rows constructor for empty multisequences")
        return cls(q, tuple(zip(*columns)))

    def prefix(self, n: int) -> "Multisequence":
        return Multisequence(self.q, tuple(r[:n] for r in self.rows))

    def to_text(self) -> str:
        lines = [f"{self.q} {self.M} {self.n}"]
        lines += [" ".join(str(x) for x in r) for r in self.rows]
        return "\n".join(lines) + "\n"


def parse_multisequence(text: str) -> Multisequence:
    """Parse the text format: a ``q M n`` header, then M lines of n symbols."""
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty input", 1)
    hline, header = lines[0]
    try:
        q, M, n = (int(x) for x in header.split())
    except ValueError:
        raise ParseError(f"header must be 'q M n', got {header!r}", hline) from None
    if not is_prime(q):
        raise NotPrimeError(f"line {hline}: q={q} is not prime")
    if M < 1 or n < 0:
        raise ParseError(f"need M >= 1 and n >= 0, got M={M} n={n}", hline)
    body = lines[1:]
    if len(body) != M:
        where = body[-1][0] if body else hline
        raise ParseError(f"expected {M} stream lines, found {len(body)}", where)
    rows = []
    for lineno, ln in body:
        toks = ln.split()
        if len(toks) != n:
            raise ParseError(f"expected {n} symbols, found {len(toks)}", lineno)
        row = []
        for tok in toks:
            try:
                x = int(tok)
            except ValueError:
                raise ParseError(f"symbol {tok!r} is not an integer", lineno) from None
            if not 0 <= x < q:
                raise ParseError(f"symbol {x} outside [0, {q})", lineno)
            row.append(x)
        rows.append(tuple(row))
    return Multisequence(q, tuple(rows))


def _solve_mod_p(rows: list[list[int]], nvars: int, p: int) -> list[int] | None:
    """Solve an augmented system mod p; each row is nvars coefficients plus rhs.

    Returns one solution (free variables set to 0) or None if inconsistent.
    """
    rows = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(nvars):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] % p), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    for i in range(r, len(rows)):
        if rows[i][nvars] % p:
            return None
    sol = [0] * nvars
    for i, c in enumerate(pivots):
        sol[c] = rows[i][nvars]
    return sol


def _recurrence_rows(streams: Sequence[Sequence[int]], L: int) -> list[list[int]]:
    # one equation a_j = sum_i alpha_i * a_{j-i} per stream and position j > L
    out = []
    for s in streams:
        for j in range(L, len(s)):
            out.append([s[j - i] for i in range(1, L + 1)] + [s[j]])
    return out


def find_recurrence(streams: Sequence[Sequence[int]], q: int, L: int) -> tuple[int, ...] | None:
    """Return feedback coefficients (alpha_1..alpha_L) shared by all streams, or None.

    Streams may have different lengths (partial last column).
    """
    if L < 0:
        raise ValueError("recurrence length must be nonnegative")
    rows = _recurrence_rows(streams, L)
    if not rows:
        return (0,) * L
    sol = _solve_mod_p(rows, L, q)
    return None if sol is None else tuple(sol)


def solve_recurrence(prefix: Multisequence, L: int) -> bool:
    if not 0 <= L <= prefix.n:
        raise ValueError(f"need 0 <= L <= n, got L={L} n={prefix.n}")
    return find_recurrence(prefix.rows, prefix.q, L) is not None


def _predicts(streams: Sequence[Sequence[int]], alpha: Sequence[int], q: int, m: int) -> bool:
    # does alpha still generate the last symbol of stream m?
    s = streams[m]
    j = len(s) - 1
    L = len(alpha)
    if j < L:
        return True
    return sum(a * s[j - i] for i, a in enumerate(alpha, 1)) % q == s[j]


def _min_recurrence(streams, q, lower=0):
    top = max((len(s) for s in streams), default=0)
    for L in range(lower, top + 1):
        alpha = find_recurrence(streams, q, L)
        if alpha is not None:
            return L, alpha
    raise AssertionError("a recurrence of length max(n_m) always exists")


def joint_lc_streams(streams: Sequence[Sequence[int]], q: int, lower: int = 0) -> int:
    """Joint linear complexity of streams of possibly unequal length.

    ``lower`` is a known lower bound (for instance the value of a shorter prefix).
    """
    return _min_recurrence(streams, q, lower)[0]


def joint_lc(prefix: Multisequence) -> int:
    return joint_lc_streams(prefix.rows, prefix.q)


def typical_lc(n: int, M: int) -> int:
    """ceil(n*M/(M+1)), the complexity a typical prefix of n columns has."""
    return -((-n * M) // (M + 1))


@dataclass
class Profile:
    """Linear complexity profile of one multisequence.

    ``symbol_L[0]`` belongs to the empty prefix, timestep (0, M); entry
    ``(n-1)*M + m`` belongs to timestep (n, m). ``L[n]`` and ``d[n]`` are the
    full-column values.
    """

    M: int
    symbol_L: list[int]
    L: list[int] = field(default_factory=list)
    d: list[int] = field(default_factory=list)

    def at(self, n: int, m: int) -> int:
        if n == 0:
            return 0
        return self.symbol_L[(n - 1) * self.M + m]


def profile(seq: Multisequence) -> Profile:
    q, M, n = seq.q, seq.M, seq.n
    streams: list[list[int]] = [[] for _ in range(M)]
    symbol_L = [0]
    L, alpha = 0, ()
    for j in range(n):
        for m in range(M):
            streams[m].append(seq.rows[m][j])
            if not _predicts(streams, alpha, q, m):
                L, alpha = _min_recurrence(streams, q, L)
            symbol_L.append(L)
    cols = [symbol_L[k * M] for k in range(n + 1)]
    devs = [cols[k] - typical_lc(k, M) for k in range(n + 1)]
    return Profile(M, symbol_L, cols, devs)


def _walk(q, M, n_max, streams, depth, L, alpha, hists, symbol_hists):
    """Depth-first over all symbol-by-symbol extensions, tallying deviations."""
    if depth % M == 0:
        ncol = depth // M
        hists[ncol][L - typical_lc(ncol, M)] += 1
    elif symbol_hists is not None:
        ncol, m = depth // M + 1, depth % M
        symbol_hists[(ncol, m)][L - typical_lc(ncol, M)] += 1
    if depth == M * n_max:
        return
    m = depth % M
    s = streams[m]
    for x in range(q):
        s.append(x)
        if _predicts(streams, alpha, q, m):
            _walk(q, M, n_max, streams, depth + 1, L, alpha, hists, symbol_hists)
        else:
            L2, alpha2 = _min_recurrence(streams, q, L)
            _walk(q, M, n_max, streams, depth + 1, L2, alpha2, hists, symbol_hists)
        s.pop()


def _check_budget(q, M, n, budget):
    if q ** (M * n) > budget:
        raise BudgetExceededError(
            f"q^(M*n) = {q}^{M * n} prefixes exceeds the enumeration budget {budget}; "
            "reduce n or raise the budget"
        )


def _shard(args):
    q, M, n_max, first_column, with_symbols = args
    hists = [Counter() for _ in range(n_max + 1)]
    symbol_hists = _symbol_counters(M, n_max) if with_symbols else None
    streams = [[] for _ in range(M)]
    L, alpha = 0, ()
    # replay the fixed first column, recording the shared interior nodes only once
    for m, x in enumerate(first_column):
        streams[m].append(x)
        if not _predicts(streams, alpha, q, m):
            L, alpha = _min_recurrence(streams, q, L)
    _walk(q, M, n_max, streams, M, L, alpha, hists, symbol_hists)
    return hists, symbol_hists


def _symbol_counters(M, n_max):
    return {(n, m): Counter() for n in range(1, n_max + 1) for m in range(1, M)}


def exhaustive_histograms(
    q: int,
    M: int,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    symbol_level: bool = False,
):
    """Deviation histograms N(n, d; q) for every n <= n_max in one pass.

    Returns a list indexed by n of ``{d: count}`` dicts. With
    ``symbol_level=True`` also returns counts at partial columns keyed by
    (n, m), 1 <= m < M, using d = L(n, m) - ceil(n*M/(M+1)).

    With ``workers > 1`` the prefix space is split by first column into
    disjoint shards; the merged result is identical to the sequential one.
    """
    FieldSpec(q)
    if M < 1 or n_max < 0:
        raise ValueError("need M >= 1 and n >= 0")
    _check_budget(q, M, n_max, budget)
    if n_max == 0:
        hists = [Counter({0: 1})]
        return (hists, {}) if symbol_level else [dict(h) for h in hists]

    hists = [Counter() for _ in range(n_max + 1)]
    symbol_hists = _symbol_counters(M, n_max) if symbol_level else None
    hists[0][0] += 1
    # interior nodes of the first column, visited once rather than per shard
    if symbol_level:
        for prefix_len in range(1, M):
            for col in product(range(q), repeat=prefix_len):
                streams = [[x] for x in col] + [[] for _ in range(M - prefix_len)]
                symbol_hists[(1, prefix_len)][joint_lc_streams(streams, q) - typical_lc(1, M)] += 1

    jobs = [(q, M, n_max, col, symbol_level) for col in product(range(q), repeat=M)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_shard, jobs))
    else:
        results = [_shard(j) for j in jobs]
    for h, sh in results:
        for k in range(1, n_max + 1):
            hists[k].update(h[k])
        if symbol_level:
            for key, c in sh.items():
                symbol_hists[key].update(c)
    out = [dict(sorted(h.items())) for h in hists]
    if symbol_level:
        return out, {k: dict(sorted(v.items())) for k, v in symbol_hists.items()}
    return out


def exhaustive_histogram(q: int, M: int, n: int, budget: int = DEFAULT_BUDGET, workers: int = 1) -> dict[int, int]:
    """N(n, d; q): how many of the q^(M*n) prefixes have deviation d."""
    return exhaustive_histograms(q, M, n, budget=budget, workers=workers)[n]


def brute_force_joint_lc(streams: Iterable[Sequence[int]], q: int) -> int:
    """Minimal L found by trying every coefficient vector. Exponential; tiny inputs only."""
    streams = [list(s) for s in streams]
    top = max((len(s) for s in streams), default=0)
    for L in range(top + 1):
        for alpha in product(range(q), repeat=L):
            if all(
                s[j] == sum(a * s[j - i] for i, a in enumerate(alpha, 1)) % q
                for s in streams
                for j in range(L, len(s))
            ):
                return L
    return top
