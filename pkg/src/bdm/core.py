"""States, transitions and the class function of the battery discharge model.

A state ``(b_1..b_M, d; T, t)`` holds M battery charges, the drain d (the
linear complexity deviation), the time residue T and the ministep t. Ministeps
1..M visit battery t; ministep M+1 closes the column with a drain decrement
(d-) or, when T = M, a battery increment (b+).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import InvalidStateError, UnreachableStateError


@dataclass(frozen=True, slots=True)
class BdmState:
    b: tuple[int, ...]
    d: int
    T: int
    t: int

    def __post_init__(self):
        if not isinstance(self.b, tuple):
            object.__setattr__(self, "b", tuple(self.b))
        M = len(self.b)
        if M < 1:
            raise InvalidStateError("a state needs at least one battery")
        if not 1 <= self.t <= M + 1:
            raise InvalidStateError(f"ministep t={self.t} outside 1..{M + 1}")
        if self.d + self.T + sum(self.b) != 0:
            raise InvalidStateError(f"invariant d + T + sum(b) = 0 violated by {self}")

    @property
    def M(self) -> int:
        return len(self.b)

    @property
    def slot(self) -> tuple[int, int]:
        return (self.T, self.t)

    def in_S(self) -> bool:
        return 0 <= self.T <= self.M

    def __str__(self):
        return f"{','.join(map(str, self.b))};{self.d};{self.T};{self.t}"

    def sort_key(self):
        return (self.T, self.t, self.b, self.d)


def parse_state(text: str) -> BdmState:
    """Inverse of ``str(state)``: ``b1,...,bM;d;T;t``."""
    try:
        bs, d, T, t = text.strip().split(";")
        return BdmState(tuple(int(x) for x in bs.split(",")), int(d), int(T), int(t))
    except ValueError as e:
        if isinstance(e, InvalidStateError):
            raise
        raise InvalidStateError(f"cannot parse state {text!r}") from None


def initial_state(M: int) -> BdmState:
    if M < 1:
        raise ValueError("M must be at least 1")
    return BdmState((0,) * M, 0, 0, M + 1)


class Action(enum.Enum):
    D = "D"
    I = "I"  # noqa: E741
    N_EQ = "N="
    N_LT = "N<"
    D_MINUS = "d-"
    B_PLUS = "b+"

    def probability(self, q: int) -> Fraction:
        if self is Action.D:
            return Fraction(q - 1, q)
        if self is Action.I:
            return Fraction(1, q)
        return Fraction(1)

    def __str__(self):
        return self.value


_CLASS_DELTA = {
    Action.I: 1,
    Action.N_LT: -1,
    Action.D: 0,
    Action.N_EQ: 0,
    Action.D_MINUS: 0,
    Action.B_PLUS: 0,
}


def class_delta(kind: Action) -> int:
    return _CLASS_DELTA[kind]


def _check_in_S(s: BdmState):
    if not s.in_S():
        raise InvalidStateError(f"T={s.T} outside 0..{s.M}; state {s} is not in S")


def feasible_actions(s: BdmState) -> list[tuple[Action, BdmState]]:
    """All transitions out of s, in the order D before I."""
    _check_in_S(s)
    M, t = s.M, s.t
    if t <= M:
        bt = s.b[t - 1]
        stay = BdmState(s.b, s.d, s.T, t + 1)
        if bt > s.d:
            swapped = s.b[: t - 1] + (s.d,) + s.b[t:]
            return [(Action.D, BdmState(swapped, bt, s.T, t + 1)), (Action.I, stay)]
        if bt == s.d:
            return [(Action.N_EQ, stay)]
        return [(Action.N_LT, stay)]
    if s.T < M:
        return [(Action.D_MINUS, BdmState(s.b, s.d - 1, s.T + 1, 1))]
    return [(Action.B_PLUS, BdmState(tuple(x + 1 for x in s.b), s.d, 0, 1))]


def predecessors(s: BdmState) -> list[tuple[Action, BdmState]]:
    """All (action, s') with s' -> s, obtained by inverting the transition table."""
    _check_in_S(s)
    M, t = s.M, s.t
    if t == 1:
        if s.T >= 1:
            return [(Action.D_MINUS, BdmState(s.b, s.d + 1, s.T - 1, M + 1))]
        return [(Action.B_PLUS, BdmState(tuple(x - 1 for x in s.b), s.d, M, M + 1))]
    m = t - 1
    bm = s.b[m - 1]
    same = BdmState(s.b, s.d, s.T, t - 1)
    if bm < s.d:
        swapped = s.b[: m - 1] + (s.d,) + s.b[m:]
        return [(Action.D, BdmState(swapped, bm, s.T, t - 1)), (Action.N_LT, same)]
    if bm == s.d:
        return [(Action.N_EQ, same)]
    return [(Action.I, same)]


def sort_sequence(s: BdmState) -> tuple[int, ...]:
    """The tuple (b_1..b_{t-1}, d, b_t..b_M) whose sorting defines the class."""
    return s.b[: s.t - 1] + (s.d,) + s.b[s.t - 1 :]


def adjacent_sort_distance(v) -> int:
    """Minimum adjacent transpositions sorting v into nonincreasing order.

    Equal neighbours never need swapping, so this counts pairs i < j with
    v[i] < v[j] strictly.
    """
    n = len(v)
    return sum(1 for i in range(n) for j in range(i + 1, n) if v[i] < v[j])


def class_value(b, d: int, T: int, t: int) -> int:
    """K = -pi + M*T + 2 * sum_m sorted_m * (M + 1 - m) for raw values.

    No invariant check: the formula makes sense for any tuple, which lets
    it be evaluated on hand-written examples as well as on states.
    """
    b = tuple(b)
    M = len(b)
    seq = b[: t - 1] + (d,) + b[t - 1 :]
    ranked = sorted(seq, reverse=True)
    weighted = sum(v * (M + 1 - m) for m, v in enumerate(ranked, 1))
    return -adjacent_sort_distance(seq) + M * T + 2 * weighted


@lru_cache(maxsize=1 << 20)
def class_of(s: BdmState) -> int:
    """Class of a state of the augmented set (T may be any integer)."""
    return class_value(s.b, s.d, s.T, s.t)


def _reverse_step(s: BdmState) -> tuple[Action, BdmState]:
    # the unique predecessor avoiding N<
    M, t = s.M, s.t
    if t == 1:
        return predecessors(s)[0]
    bm = s.b[t - 2]
    if bm < s.d:
        swapped = s.b[: t - 2] + (s.d,) + s.b[t - 1 :]
        return Action.D, BdmState(swapped, bm, s.T, t - 1)
    kind = Action.N_EQ if bm == s.d else Action.I
    return kind, BdmState(s.b, s.d, s.T, t - 1)


def step_cap(K: int, M: int) -> int:
    return (K + 1) * (M + 1) ** 2 + (M + 1) ** 2


def canonical_path(s: BdmState) -> list[Action]:
    """The N<-free action sequence leading from s_0 to s.

    Reconstructed backwards; raises UnreachableStateError if s_0 is not met
    within ``step_cap`` reverse steps (which only happens for states outside
    the reachable set, e.g. hand-built ones with negative class).
    """
    _check_in_S(s)
    s0 = initial_state(s.M)
    K = class_of(s)
    cap = step_cap(max(K, 0), s.M)
    actions = []
    cur = s
    while cur != s0:
        if len(actions) >= cap:
            raise UnreachableStateError(
                f"no N<-free path from s_0 to {s} within {cap} steps (class {K})"
            )
        kind, cur = _reverse_step(cur)
        actions.append(kind)
    actions.reverse()
    return actions


def replay(M: int, actions) -> list[BdmState]:
    """Forward replay of an action sequence from s_0; returns every visited state."""
    states = [initial_state(M)]
    for a in actions:
        nxt = {k: s2 for k, s2 in feasible_actions(states[-1])}
        if a not in nxt:
            raise ValueError(f"action {a} not feasible from {states[-1]}")
        states.append(nxt[a])
    return states


@dataclass(frozen=True)
class IVector:
    """Per-battery inhibition counts along the canonical path."""

    I: tuple[int, ...]  # noqa: E741

    @property
    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.I, reverse=True))

    @property
    def total(self) -> int:
        return sum(self.I)


@lru_cache(maxsize=1 << 18)
def i_vector(s: BdmState) -> IVector:
    counts = [0] * s.M
    cur = s
    s0 = initial_state(s.M)
    cap = step_cap(max(class_of(s), 0), s.M)
    steps = 0
    while cur != s0:
        if steps >= cap:
            raise UnreachableStateError(f"no N<-free path from s_0 to {s} within {cap} steps")
        kind, prev = _reverse_step(cur)
        if kind is Action.I:
            counts[prev.t - 1] += 1
        cur = prev
        steps += 1
    return IVector(tuple(counts))


def generation(s: BdmState) -> int:
    """ceil(largest inhibition count / (M+1)) * (M+1)."""
    M1 = s.M + 1
    top = i_vector(s).sorted[0]
    return -(-top // M1) * M1


def mirror_state(s: BdmState) -> BdmState:
    """(b_1..b_M, d; T, M+1) -> (-b_M-1, .., -b_1-1, T+X; M-T, M+1), X = sum(b).

    Negates the drain and maps T to M-T while keeping the class.
    """
    if s.t != s.M + 1:
        raise InvalidStateError(f"mirror is only defined at ministep t = M+1, got {s}")
    X = sum(s.b)
    return BdmState(tuple(-x - 1 for x in reversed(s.b)), s.T + X, s.M - s.T, s.t)


def witness_state(M: int, T: int, t: int, d: int) -> tuple[BdmState, int]:
    """A state of drain d at slot (T, t) with near-minimal class.

    Batteries are as equal as the invariant allows: M-a copies of b and a
    copies of b+1, with b = floor((-d-T)/M). The returned integer is the
    closed-form class claimed for this state,
    |d|(M+1) - [(M-t)+1+T] for d < 0, |d|(M+1) - (M-T) - (M-a) for d > 0,
    and 0 for d = 0. ``class_of`` on the state is the authority; the two
    agree only when d is strictly below (resp. above) every battery and d
    sits where the closed form assumes.
    """
    if not 0 <= T <= M or not 1 <= t <= M + 1:
        raise ValueError(f"slot (T={T}, t={t}) outside the BDM range for M={M}")
    b, a = divmod(-d - T, M)
    state = BdmState((b,) * (M - a) + (b + 1,) * a, d, T, t)
    if d < 0:
        claimed = -d * (M + 1) - ((M - t) + 1 + T)
    elif d > 0:
        claimed = d * (M + 1) - (M - T) - (M - a)
    else:
        claimed = 0
    return state, claimed


def tau_to_slot(tau: int, M: int) -> tuple[int, int]:
    """The slot (T, t) occupied by all mass at ministep tau."""
    u = (M + tau) % (M + 1) ** 2
    return u // (M + 1), u % (M + 1) + 1


def slot_congruent(slot: tuple[int, int], tau: int, M: int) -> bool:
    return tau_to_slot(tau, M) == tuple(slot)


def all_slots(M: int) -> list[tuple[int, int]]:
    return [(T, t) for T in range(M + 1) for t in range(1, M + 2)]
