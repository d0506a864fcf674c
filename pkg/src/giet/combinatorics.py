"""Combinatorial data of generalized interval exchanges and Rauzy moves.

A combinatorial datum is a pair of bijections (pi0, pi1) from a finite
alphabet onto {1..d}: pi0 orders the domain intervals, pi1 the image
intervals.  The two elementary moves ("type 0" and "type 1") act on such
pairs; admissible sequences of moves are the combinatorial skeleton of
everything else in this package.

Letters are opaque strings with alphabetical order used for tie-breaking.
All objects here are immutable and hashable.
"""

from dataclasses import dataclass
from collections import deque
import random

from .errors import GietError, MalformedCombinatorics, ReducibleCombinatorics


def _is_irreducible(top, bottom):
    d = len(top)
    pos1 = {a: i for i, a in enumerate(bottom)}
    seen = set()
    for s in range(d - 1):
        seen.add(pos1[top[s]])
        if max(seen) == s:
            return False
    return True


@dataclass(frozen=True)
class CombinatorialData:
    """Ordered pair of rows: top = domain order, bottom = image order."""

    alphabet: tuple
    top: tuple
    bottom: tuple

    def __post_init__(self):
        d = len(self.alphabet)
        if d < 2:
            raise MalformedCombinatorics("need at least two letters")
        if tuple(sorted(self.alphabet)) != self.alphabet:
            raise MalformedCombinatorics("alphabet must be given in sorted order")
        for row in (self.top, self.bottom):
            if len(row) != d or set(row) != set(self.alphabet):
                raise MalformedCombinatorics(
                    "rows must be permutations of the alphabet"
                )
        if not _is_irreducible(self.top, self.bottom):
            raise ReducibleCombinatorics(
                f"{self.top}/{self.bottom} splits into smaller exchanges"
            )

    @property
    def d(self):
        return len(self.alphabet)

    @property
    def pi0(self):
        return {a: i + 1 for i, a in enumerate(self.top)}

    @property
    def pi1(self):
        return {a: i + 1 for i, a in enumerate(self.bottom)}

    def top_last(self):
        """Letter whose domain interval is rightmost."""
        return self.top[-1]

    def bottom_last(self):
        """Letter whose image interval is rightmost."""
        return self.bottom[-1]

    @classmethod
    def from_maps(cls, alphabet, pi0, pi1):
        alphabet = tuple(sorted(alphabet))
        d = len(alphabet)
        for name, m in (("pi0", pi0), ("pi1", pi1)):
            if set(m.keys()) != set(alphabet) or sorted(m.values()) != list(
                range(1, d + 1)
            ):
                raise MalformedCombinatorics(
                    f"{name} is not a bijection from the alphabet onto 1..{d}"
                )
        top = tuple(sorted(alphabet, key=lambda a: pi0[a]))
        bottom = tuple(sorted(alphabet, key=lambda a: pi1[a]))
        return cls(alphabet, top, bottom)

    def to_json(self):
        return {
            "alphabet": list(self.alphabet),
            "pi0": self.pi0,
            "pi1": self.pi1,
        }

    @classmethod
    def from_json(cls, obj):
        return cls.from_maps(obj["alphabet"], obj["pi0"], obj["pi1"])

    def __repr__(self):
        return f"({' '.join(self.top)} / {' '.join(self.bottom)})"


def validate(alphabet, pi0, pi1):
    """True iff the maps are bijections onto 1..d and irreducible.

    Structurally malformed input (non-bijection) raises
    MalformedCombinatorics; a well-formed but reducible pair returns False.
    """
    try:
        CombinatorialData.from_maps(alphabet, pi0, pi1)
    except ReducibleCombinatorics:
        return False
    return True


@dataclass(frozen=True)
class RauzyStep:
    """One elementary move applied at `pi`, with its bookkeeping."""

    pi: CombinatorialData
    eps: int
    winner: str
    loser: str
    next_pi: CombinatorialData


def rauzy_move(pi, eps):
    """Apply the type-`eps` move.

    Type 0: the top-last letter wins; the bottom row is rewritten with the
    loser reinserted right after the winner.  Type 1 is the mirror image
    acting on the top row.
    """
    if eps not in (0, 1):
        raise GietError(f"move type must be 0 or 1, got {eps!r}")
    a0, a1 = pi.top_last(), pi.bottom_last()
    if a0 == a1:
        raise ReducibleCombinatorics("top and bottom rows end with the same letter")
    if eps == 0:
        winner, loser = a0, a1
        row = [x for x in pi.bottom if x != loser]
        row.insert(row.index(winner) + 1, loser)
        nxt = CombinatorialData(pi.alphabet, pi.top, tuple(row))
    else:
        winner, loser = a1, a0
        row = [x for x in pi.top if x != loser]
        row.insert(row.index(winner) + 1, loser)
        nxt = CombinatorialData(pi.alphabet, tuple(row), pi.bottom)
    return RauzyStep(pi, eps, winner, loser, nxt)


def rauzy_class(pi):
    """All data reachable from `pi` under both moves, in BFS order."""
    seen = {pi}
    order = [pi]
    queue = deque([pi])
    while queue:
        cur = queue.popleft()
        for eps in (0, 1):
            nxt = rauzy_move(cur, eps).next_pi
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return tuple(order)


class CombinatoricsSequence:
    """An admissible finite sequence of moves (consecutive data must chain)."""

    def __init__(self, steps):
        steps = tuple(steps)
        for a, b in zip(steps, steps[1:]):
            if a.next_pi != b.pi:
                raise GietError("steps do not chain")
        self.steps = steps

    @classmethod
    def from_eps(cls, pi, eps_list):
        steps = []
        cur = pi
        for eps in eps_list:
            step = rauzy_move(cur, eps)
            steps.append(step)
            cur = step.next_pi
        return cls(steps)

    def __len__(self):
        return len(self.steps)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return CombinatoricsSequence(self.steps[idx])
        return self.steps[idx]

    def __iter__(self):
        return iter(self.steps)

    def __add__(self, other):
        return CombinatoricsSequence(self.steps + tuple(other.steps))

    @property
    def start(self):
        return self.steps[0].pi

    @property
    def end(self):
        return self.steps[-1].next_pi

    def pi_at(self, n):
        """Combinatorial datum before step n (0 <= n <= len)."""
        if n == len(self.steps):
            return self.end
        return self.steps[n].pi

    def eps_list(self):
        return [s.eps for s in self.steps]

    def to_json(self):
        return [{"eps": s.eps} for s in self.steps]

    @classmethod
    def from_json(cls, pi, arr):
        return cls.from_eps(pi, [e["eps"] for e in arr])

    def __repr__(self):
        return f"CombinatoricsSequence({self.start!r}, eps={self.eps_list()})"


def is_k_bounded(seq, k):
    """Three-valued check of k-bounded combinatorics on a finite window.

    For every n whose full window fits inside the sequence, and every ordered
    letter pair (beta, gamma), there must exist n1 and p >= 0 with
    |n - n1| < k and |n - n1 - p| < k such that beta wins at step n1, gamma
    loses at step n1 + p, and the chain condition holds in between: the
    winner of each intermediate step is the loser of the following step.

    Returns True/False, or None when no window fits (indeterminate: the
    sequence is shorter than the window, never reported as False).
    """
    if k < 1:
        raise GietError("k must be >= 1")
    steps = seq.steps if isinstance(seq, CombinatoricsSequence) else tuple(seq)
    N = len(steps)
    letters = steps[0].pi.alphabet if N else ()
    lo_n, hi_n = k - 1, N - k  # n for which all admissible (n1, p) fit
    if N == 0 or lo_n > hi_n:
        return None
    winners = [s.winner for s in steps]
    losers = [s.loser for s in steps]

    def pair_ok(n, beta, gamma):
        for n1 in range(max(0, n - k + 1), min(N, n + k)):
            if winners[n1] != beta:
                continue
            # extend the chain while it links; record admissible endpoints
            p = 0
            while True:
                idx = n1 + p
                if abs(n - idx) < k and losers[idx] == gamma:
                    return True
                nxt = idx + 1
                if (
                    nxt >= N
                    or nxt - n >= k  # endpoint would leave the window
                    or losers[nxt] != winners[idx]
                ):
                    break
                p += 1
        return False

    for n in range(lo_n, hi_n + 1):
        for beta in letters:
            for gamma in letters:
                if not pair_ok(n, beta, gamma):
                    return False
    return True


def close_path(prefix, target):
    """Minimal completion from prefix.end to `target`, ties broken by
    preferring type 0 first.  Returns a (possibly empty) sequence."""
    start = prefix.end if isinstance(prefix, CombinatoricsSequence) else prefix
    if target not in rauzy_class(start):
        raise GietError(f"{target!r} is not reachable from {start!r}")
    if start == target:
        return CombinatoricsSequence([])
    parent = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for eps in (0, 1):
            step = rauzy_move(cur, eps)
            nxt = step.next_pi
            if nxt not in parent:
                parent[nxt] = step
                if nxt == target:
                    chain = []
                    while parent[nxt] is not None:
                        chain.append(parent[nxt])
                        nxt = parent[nxt].pi
                    return CombinatoricsSequence(reversed(chain))
                queue.append(nxt)
    raise GietError("unreachable")  # pragma: no cover


def generate_k_bounded(pi, length, k, rng_seed=0, retries=400):
    """Random admissible sequence of the given length that passes
    ``is_k_bounded`` on every full window.  Deterministic for a fixed seed.

    Strategy: biased random walk that prefers the move whose winner has
    waited longest, with rejection and restart.  Raises ConvergenceError
    (with diagnostics) when k is infeasible within the retry budget.
    """
    from .errors import ConvergenceError

    if length == 0:
        return CombinatoricsSequence([])
    rng = random.Random(rng_seed)
    best_fail = None
    for attempt in range(retries):
        steps = []
        cur = pi
        last_win = {a: -1 for a in pi.alphabet}
        ok = True
        for n in range(length):
            cands = [rauzy_move(cur, eps) for eps in (0, 1)]
            # prefer the winner that has waited longest; random tie-break
            cands.sort(key=lambda s: (last_win[s.winner], rng.random()))
            step = cands[0] if rng.random() < 0.85 else cands[-1]
            steps.append(step)
            last_win[step.winner] = n
            cur = step.next_pi
        seq = CombinatoricsSequence(steps)
        verdict = is_k_bounded(seq, k)
        if verdict:
            return seq
        best_fail = verdict
    raise ConvergenceError(
        f"no k-bounded sequence found (k={k}, length={length}, "
        f"retries={retries}, last verdict={best_fail}); "
        "k may be below the minimum achievable for this class"
    )
