"""Alice strategies built on the push move, and a suite of Bob adversaries.

The avoidance strategy drives the ball away from one level of a friendly
family at a time:

* seeking: play concentrically while the ball still meets two or more
  members of the current level k;
* trigger: once Bob's ball B_m meets at most one member C, push towards the
  side away from C for ``push_rounds`` Alice moves;
* certify: the resulting Bob ball B_s must miss every level-k member and meet
  at least two level-(k+1) members.  The record is kept and k advances.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exact import Interval, format_rational
from .families import IntervalFamily
from .game import ALICE, BOB, GameParams, GameTranscript
from .rng import ALGORITHM, SplitMix64

RIGHT = "right"
LEFT = "left"
NO_PUSH = "none"

SEEKING = "seeking"
PUSHING = "pushing"

MAX_LEVEL_SEARCH = 4096


class VerificationError(RuntimeError):
    """A post-push check failed: the family is not friendly for these
    parameters, the start level is wrong, or the engine is broken."""


def push_rounds(params: GameParams) -> int:
    """Smallest t >= 1 with (alpha*beta)**t < gamma/2."""
    gamma = params.gamma
    if gamma <= 0:
        raise ValueError(f"gamma = {gamma} <= 0: ({params}) is not in S")
    ab, half = params.ab, gamma / 2
    t, power = 1, ab
    while power >= half:
        t += 1
        power *= ab
    return t


def push_move(ball: Interval, alpha: Fraction, direction: str) -> Interval:
    """The radius ``alpha * rho(ball)`` subinterval flush with one end of ``ball``."""
    length = alpha * ball.length
    if direction == RIGHT:
        return Interval.closed(ball.right - length, ball.right)
    if direction == LEFT:
        return Interval.closed(ball.left, ball.left + length)
    raise ValueError(f"direction must be {RIGHT!r} or {LEFT!r}, got {direction!r}")


def concentric_move(ball: Interval, ratio: Fraction) -> Interval:
    return Interval.around(ball.center, ratio * ball.radius)


def push_watermark(ball: Interval, gamma: Fraction, direction: str) -> Fraction:
    """b + rho*gamma/2 (or its mirror): the bound a full push must clear."""
    shift = ball.radius * gamma / 2
    return ball.center + shift if direction == RIGHT else ball.center - shift


class CenteredAlice:
    role = ALICE

    def __init__(self, params: GameParams):
        self.params = params

    def move(self, t: GameTranscript) -> Interval:
        return concentric_move(t.last, self.params.alpha)


class PushAlice:
    role = ALICE

    def __init__(self, params: GameParams, direction: str = RIGHT):
        self.params = params
        self.direction = direction

    def move(self, t: GameTranscript) -> Interval:
        return push_move(t.last, self.params.alpha, self.direction)


@dataclass
class PushPlan:
    direction: str
    t: int
    watermark: Fraction
    trigger_round: int
    remaining: int


@dataclass
class CertificationRecord:
    level: int
    trigger_round: int
    direction: str
    push_length: int
    certified_round: int
    ball: Interval
    disjoint: bool
    two_members: bool

    def to_dict(self) -> dict:
        return {
            "record": "certification",
            "level": self.level,
            "trigger_round": self.trigger_round,
            "direction": self.direction,
            "push_length": self.push_length,
            "certified_round": self.certified_round,
            "left": format_rational(self.ball.left),
            "right": format_rational(self.ball.right),
            "disjoint": self.disjoint,
            "two_members": self.two_members,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CertificationRecord":
        return cls(d["level"], d["trigger_round"], d["direction"], d["push_length"],
                   d["certified_round"], Interval.closed(d["left"], d["right"]),
                   d["disjoint"], d["two_members"])


def certification_verdicts(family: IntervalFamily, level: int, ball: Interval) -> tuple:
    """(ball misses every level-k member, ball meets >= 2 level-(k+1) members)."""
    return family.count_in(level, ball) == 0, family.count_in(level + 1, ball) >= 2


@dataclass
class AvoidanceState:
    family: IntervalFamily
    level: Optional[int] = None
    phase: str = SEEKING
    plan: Optional[PushPlan] = None
    previous: Optional[Interval] = None
    certified: list = field(default_factory=list)


class AvoidanceAlice:
    """Forces the play out of every level of a friendly family past its start."""

    role = ALICE

    def __init__(self, params: GameParams, family: IntervalFamily,
                 start: Optional[int] = None):
        self.params = params
        self.family = family
        self.start = family.friendliness_start(params) if start is None else start
        self.t = push_rounds(params)
        self.state = AvoidanceState(family)

    @property
    def certified(self) -> list:
        return self.state.certified

    def move(self, transcript: GameTranscript) -> Interval:
        ball = transcript.last
        rnd = transcript.round
        st = self.state
        if st.level is None:
            st.level = self._first_level(ball)
        if st.phase == PUSHING:
            if st.plan.remaining > 0:
                return self._push(ball)
            self._certify(ball, rnd, st.plan)
        return self._seek(ball, rnd)

    def _first_level(self, ball: Interval) -> int:
        k = self.start + 1
        while self.family.count_in(k, ball) < 2:
            k += 1
            if k > self.start + MAX_LEVEL_SEARCH:
                raise VerificationError(f"opening ball {ball} never meets two members "
                                        f"within {MAX_LEVEL_SEARCH} levels")
        return k

    def _seek(self, ball: Interval, rnd: int) -> Interval:
        st, family = self.state, self.family
        k = st.level
        if family.count_in(k, ball) >= 2:
            st.previous = ball
            return concentric_move(ball, self.params.alpha)
        if st.previous is None:
            raise VerificationError(f"round {rnd}: level {k} trigger without a previous ball")
        hit = family.members_in(k, ball)
        if not hit:
            self._certify(ball, rnd, PushPlan(NO_PUSH, 0, ball.center, rnd, 0))
            return self._seek(ball, rnd)
        _, C = hit[0]
        pair = self._bracketing_pair(k, st.previous, ball)
        g = max([C.length] + [c.length for c in pair])
        gamma = self.params.gamma
        if g >= gamma * ball.length:
            raise VerificationError(
                f"round {rnd}: level {k} member length {format_rational(g)} >= "
                f"gamma*len(B) = {format_rational(gamma * ball.length)}; "
                f"the family is not friendly at this level")
        direction = RIGHT if C.center <= ball.center else LEFT
        st.plan = PushPlan(direction, self.t, push_watermark(ball, gamma, direction),
                           rnd, self.t)
        st.phase = PUSHING
        return self._push(ball)

    def _bracketing_pair(self, k: int, previous: Interval, ball: Interval) -> list:
        row = [c for _, c in self.family.members_in(k, previous)]
        if len(row) < 2:
            return row
        lefts = [c.left for c in row]
        i = bisect.bisect_right(lefts, ball.center) - 1
        i = min(max(i, 0), len(row) - 2)
        return row[i:i + 2]

    def _push(self, ball: Interval) -> Interval:
        plan = self.state.plan
        plan.remaining -= 1
        return push_move(ball, self.params.alpha, plan.direction)

    def _certify(self, ball: Interval, rnd: int, plan: PushPlan) -> None:
        st = self.state
        k = st.level
        disjoint, two = certification_verdicts(self.family, k, ball)
        if not (disjoint and two):
            raise VerificationError(
                f"round {rnd}: certification of level {k} failed for {ball} "
                f"(disjoint={disjoint}, two_members={two}); trigger round "
                f"{plan.trigger_round}, push {plan.direction} x{plan.t}")
        st.certified.append(CertificationRecord(k, plan.trigger_round, plan.direction,
                                                plan.t, rnd, ball, disjoint, two))
        st.level = k + 1
        st.phase = SEEKING
        st.plan = None
        st.previous = ball


def bob_move_at(prev: Interval, beta: Fraction, u: Fraction) -> Interval:
    """Bob's legal move at relative offset ``u`` in [0, 1] (0 leftmost, 1 rightmost)."""
    if not 0 <= u <= 1:
        raise ValueError(f"offset u must lie in [0, 1], got {u}")
    length = beta * prev.length
    left = prev.left + u * (prev.length - length)
    return Interval.closed(left, left + length)


def bob_random_move(prev: Interval, beta: Fraction, rng: SplitMix64) -> Interval:
    return bob_move_at(prev, beta, rng.dyadic())


def bob_adversarial_move(prev: Interval, beta: Fraction, family: IntervalFamily,
                         level: int) -> Interval:
    """The legal move with the largest overlap with level-``level`` members.

    Candidate left endpoints: both extremes, each member endpoint inside
    ``prev`` (placed flush left or flush right against it) and each member
    centre.  Ties go to the move closest to a member centre, then leftmost.
    """
    length = beta * prev.length
    lo, hi = prev.left, prev.right - length
    members = [c for _, c in family.members_in(level, prev)]
    cands = {lo, hi}
    for c in members:
        for e in (c.left, c.right):
            if e in prev or e == prev.right:
                cands.update((e, e - length))
        cands.add(c.center - length / 2)
    centers = sorted(c.center for c in members)

    def distance(x: Fraction):
        if not centers:
            return 0
        mid = x + length / 2
        i = bisect.bisect_left(centers, mid)
        near = [abs(centers[j] - mid) for j in (i - 1, i) if 0 <= j < len(centers)]
        return min(near)

    scored = [(family.covered_length(level, Interval.closed(x, x + length)), x)
              for x in cands if lo <= x <= hi]
    best = max(s for s, _ in scored)
    x = min((distance(x), x) for s, x in scored if s == best)[1]
    return Interval.closed(x, x + length)


class _Bob:
    role = BOB

    def __init__(self, params: GameParams, opening: Optional[Interval] = None):
        self.params = params
        self.opening = opening if opening is not None else Interval.closed(0, 1)

    def move(self, t: GameTranscript) -> Interval:
        if not t.moves:
            return self.opening
        return self.respond(t)

    def respond(self, t: GameTranscript) -> Interval:
        raise NotImplementedError


class RandomBob(_Bob):
    """Uniform dyadic offsets from SplitMix64.

    The draw for Bob's move in round r is output r-1 of the stream seeded with
    ``seed``, so the strategy can resume from any transcript prefix.
    """

    algorithm = ALGORITHM

    def __init__(self, params: GameParams, seed: int, opening: Optional[Interval] = None):
        super().__init__(params, opening)
        self.seed = seed

    def respond(self, t: GameTranscript) -> Interval:
        rng = SplitMix64.at(self.seed, t.round - 1)
        return bob_random_move(t.last, self.params.beta, rng)


class ExtremeBob(_Bob):
    def __init__(self, params: GameParams, side: str, opening: Optional[Interval] = None):
        super().__init__(params, opening)
        if side not in (LEFT, RIGHT):
            raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")
        self.side = side

    def respond(self, t: GameTranscript) -> Interval:
        return bob_move_at(t.last, self.params.beta, Fraction(int(self.side == RIGHT)))


class AdversarialBob(_Bob):
    """Steers into members of ``level``; with ``level=None`` it attacks the
    coarsest level that the current ball still meets."""

    def __init__(self, params: GameParams, family: IntervalFamily,
                 level: Optional[int] = None, opening: Optional[Interval] = None):
        super().__init__(params, opening)
        self.family = family
        self.level = level

    def target_level(self, prev: Interval) -> int:
        if self.level is not None:
            return self.level
        for k in range(1, MAX_LEVEL_SEARCH + 1):
            if self.family.count_in(k, prev) >= 1:
                return k
        return MAX_LEVEL_SEARCH

    def respond(self, t: GameTranscript) -> Interval:
        prev = t.last
        return bob_adversarial_move(prev, self.params.beta, self.family,
                                    self.target_level(prev))


class ReplayBob(_Bob):
    """Plays back Bob's recorded balls B_1, B_2, ... in order."""

    def __init__(self, params: GameParams, balls: Sequence[Interval]):
        if not balls:
            raise ValueError("replay needs at least the opening ball")
        super().__init__(params, balls[0])
        self.balls = list(balls)

    def respond(self, t: GameTranscript) -> Interval:
        i = t.round
        if i >= len(self.balls):
            raise IndexError(f"replay transcript has only {len(self.balls)} Bob moves")
        return self.balls[i]
