"""Exact mass propagation, class-bounded state enumeration and stationary masses."""

from __future__ import annotations

import csv
import io
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

from .core import (
    Action,
    BdmState,
    all_slots,
    class_of,
    feasible_actions,
    initial_state,
    tau_to_slot,
)
from .errors import BudgetExceededError, IncompletePredecessorsError
from .partitions import partition_gf

DEFAULT_MAX_STATES = 10_000_000


def default_kmax(M: int) -> int:
    return 60 if M <= 3 else 40


@lru_cache(maxsize=32)
def _explore(M: int, K_max: int, max_states: int) -> dict[tuple[int, int], frozenset[BdmState]]:
    """Breadth-first search from s_0, never entering a state of class > K_max.

    Every state reachable at all has an N<-free path from s_0 along which the
    class never decreases, so the pruned search still finds every state of
    class <= K_max.
    """
    s0 = initial_state(M)
    seen = {s0}
    queue = deque([s0])
    while queue:
        s = queue.popleft()
        for _, nxt in feasible_actions(s):
            if nxt in seen or class_of(nxt) > K_max:
                continue
            seen.add(nxt)
            if len(seen) > max_states:
                raise BudgetExceededError(
                    f"census for M={M}, K_max={K_max} exceeds {max_states} states; lower K_max"
                )
            queue.append(nxt)
    by_slot: dict[tuple[int, int], set[BdmState]] = {sl: set() for sl in all_slots(M)}
    for s in seen:
        by_slot[s.slot].add(s)
    return {k: frozenset(v) for k, v in by_slot.items()}


@dataclass
class StateCensus:
    """All states of one slot with class <= K_max, grouped by class."""

    M: int
    T: int
    t: int
    K_max: int
    by_class: dict[int, list[BdmState]]

    @property
    def states(self) -> list[BdmState]:
        return [s for K in sorted(self.by_class) for s in self.by_class[K]]

    def counts(self) -> list[int]:
        return [len(self.by_class.get(K, [])) for K in range(self.K_max + 1)]

    def __len__(self):
        return sum(len(v) for v in self.by_class.values())

    @cached_property
    def incoming(self) -> dict[BdmState, list[tuple[Action, BdmState]]]:
        """Successor-indexed view: for each state one ministep later, its census predecessors."""
        out: dict[BdmState, list[tuple[Action, BdmState]]] = defaultdict(list)
        for s in self.states:
            for a, nxt in feasible_actions(s):
                out[nxt].append((a, s))
        return out

    def to_csv(self, q: int) -> str:
        P = partition_gf(self.M, q)
        buf = io.StringIO()
        buf.write(f"# M={self.M} q={q} T={self.T} t={self.t} K_max={self.K_max} tail=none\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["state", "class", "mass_num", "mass_den"])
        for s in self.states:
            m = Fraction(1, q ** class_of(s)) / P
            w.writerow([str(s), class_of(s), m.numerator, m.denominator])
        return buf.getvalue()


def enumerate_states(M: int, T: int, t: int, K_max: int, max_states: int = DEFAULT_MAX_STATES) -> StateCensus:
    if K_max < 0:
        raise ValueError("K_max must be nonnegative")
    if not 0 <= T <= M or not 1 <= t <= M + 1:
        raise ValueError(f"slot (T={T}, t={t}) outside the BDM range for M={M}")
    states = _explore(M, K_max, max_states)[(T, t)]
    by_class: dict[int, list[BdmState]] = {K: [] for K in range(K_max + 1)}
    for s in states:
        by_class[class_of(s)].append(s)
    for v in by_class.values():
        v.sort(key=BdmState.sort_key)
    return StateCensus(M, T, t, K_max, by_class)


@dataclass
class MassDistribution:
    """mu_tau restricted to states of class <= K_max, plus the mass cut off."""

    M: int
    q: int
    tau: int
    K_max: int
    entries: dict[BdmState, Fraction] = field(default_factory=dict)
    tail: Fraction = Fraction(0)

    @classmethod
    def initial(cls, M: int, q: int, K_max: int) -> "MassDistribution":
        return cls(M, q, 0, K_max, {initial_state(M): Fraction(1)})

    @property
    def slot(self) -> tuple[int, int]:
        return tau_to_slot(self.tau, self.M)

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0)) + self.tail

    def by_drain(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = defaultdict(Fraction)
        for s, m in self.entries.items():
            out[s.d] += m
        return dict(sorted(out.items()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            f"# M={self.M} q={self.q} tau={self.tau} K_max={self.K_max} "
            f"tail={self.tail.numerator}/{self.tail.denominator}\n"
        )
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["state", "class", "mass_num", "mass_den"])
        for s in sorted(self.entries, key=BdmState.sort_key):
            m = self.entries[s]
            w.writerow([str(s), class_of(s), m.numerator, m.denominator])
        return buf.getvalue()


def step(mu: MassDistribution) -> MassDistribution:
    """One ministep: mu_{tau+1} = T . mu_tau, spilling class > K_max into the tail."""
    q = mu.q
    probs = {a: a.probability(q) for a in Action}
    out: dict[BdmState, Fraction] = defaultdict(Fraction)
    tail = mu.tail
    target = tau_to_slot(mu.tau + 1, mu.M)
    for s, m in mu.entries.items():
        for a, nxt in feasible_actions(s):
            w = m * probs[a]
            if class_of(nxt) > mu.K_max:
                tail += w
            else:
                out[nxt] += w
    for s in out:
        if s.slot != target:
            raise AssertionError(f"mass left slot {target} at tau={mu.tau + 1}: {s}")
    return MassDistribution(mu.M, q, mu.tau + 1, mu.K_max, dict(out), tail)


def run(M: int, q: int, tau: int, K_max: int):
    """Yield mu_0, mu_1, ..., mu_tau."""
    mu = MassDistribution.initial(M, q, K_max)
    yield mu
    for _ in range(tau):
        mu = step(mu)
        yield mu


def run_to_tau(M: int, q: int, tau: int, K_max: int) -> MassDistribution:
    for mu in run(M, q, tau, K_max):
        pass
    return mu


def run_to_column(M: int, q: int, n: int, K_max: int) -> MassDistribution:
    """The distribution after all M symbols of column n, i.e. mu_{(M+1) n}."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return run_to_tau(M, q, (M + 1) * n, K_max)


def stationary_mass(s: BdmState, q: int) -> Fraction:
    """q^-K(s) / prod_m q^m/(q^m-1)."""
    if q < 2:
        raise ValueError("q must be at least 2")
    return Fraction(1, q ** class_of(s)) / partition_gf(s.M, q)


def _predecessor_slot(T: int, t: int, M: int) -> tuple[int, int]:
    if t > 1:
        return T, t - 1
    return (T - 1) % (M + 1), M + 1


def balance_residual(s: BdmState, census: StateCensus, q: int) -> Fraction:
    """sum_{s' -> s} p(s' -> s) q^-K(s') - q^-K(s).

    ``census`` must be the census of the slot preceding s; predecessors of s
    have class at most K(s)+1, so the census certifies them all only when
    K(s) <= census.K_max - 1.
    """
    if (census.T, census.t) != _predecessor_slot(s.T, s.t, s.M) or census.M != s.M:
        raise IncompletePredecessorsError(f"census slot {(census.T, census.t)} does not precede {s}")
    K = class_of(s)
    if K > census.K_max - 1:
        raise IncompletePredecessorsError(
            f"state of class {K} needs a census with K_max >= {K + 1}, got {census.K_max}"
        )
    inflow = sum(
        (a.probability(q) * Fraction(1, q ** class_of(src)) for a, src in census.incoming.get(s, [])),
        Fraction(0),
    )
    return inflow - Fraction(1, q**K)


def census_for_predecessors(s: BdmState, K_max: int) -> StateCensus:
    T, t = _predecessor_slot(s.T, s.t, s.M)
    return enumerate_states(s.M, T, t, K_max)
