"""The (alpha, beta) interval game on the real line.

Bob opens with any closed interval B_1.  Alice answers with A_i inside B_i of
radius ``alpha * rho(B_i)``, Bob with B_{i+1} inside A_i of radius
``beta * rho(A_i)``, and so on.  Radii are enforced with exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Protocol

from .exact import Interval, RationalLike, as_rational, format_rational

ALICE = "alice"
BOB = "bob"


def _check_unit(name: str, value: Fraction) -> None:
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


def gamma_of(alpha: RationalLike, beta: RationalLike) -> Fraction:
    alpha, beta = as_rational(alpha), as_rational(beta)
    _check_unit("alpha", alpha)
    _check_unit("beta", beta)
    return 1 + alpha * beta - 2 * alpha


def abg_product(x: RationalLike, y: RationalLike) -> Fraction:
    """``x*y*(1 + x*y - 2*x)`` on the closed square, no domain check."""
    x, y = as_rational(x), as_rational(y)
    return x * y * (1 + x * y - 2 * x)


@dataclass(frozen=True)
class GameParams:
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        object.__setattr__(self, "beta", as_rational(self.beta))
        _check_unit("alpha", self.alpha)
        _check_unit("beta", self.beta)

    @property
    def gamma(self) -> Fraction:
        return gamma_of(self.alpha, self.beta)

    @property
    def in_S(self) -> bool:
        return self.gamma > 0

    @property
    def ab(self) -> Fraction:
        return self.alpha * self.beta

    @property
    def abg(self) -> Fraction:
        return self.alpha * self.beta * self.gamma

    def ratio(self, role: str) -> Fraction:
        return self.alpha if role == ALICE else self.beta

    def __str__(self):
        return f"alpha={format_rational(self.alpha)} beta={format_rational(self.beta)}"


@dataclass(frozen=True)
class Move:
    round: int
    role: str
    ball: Interval

    def to_line(self) -> str:
        return (f"{self.round} {self.role} "
                f"{format_rational(self.ball.left)} {format_rational(self.ball.right)}")

    @classmethod
    def from_line(cls, line: str) -> "Move":
        rnd, role, left, right = line.split()
        if role not in (ALICE, BOB):
            raise ValueError(f"unknown role {role!r} in transcript line {line!r}")
        return cls(int(rnd), role, Interval.closed(left, right))


@dataclass
class GameTranscript:
    params: GameParams
    moves: list = field(default_factory=list)

    @property
    def balls(self) -> list:
        return [m.ball for m in self.moves]

    @property
    def round(self) -> int:
        return self.moves[-1].round if self.moves else 0

    def next_role(self) -> str:
        if not self.moves or self.moves[-1].role == ALICE:
            return BOB
        return ALICE

    def bob_balls(self) -> list:
        """B_1, B_2, ... in order."""
        return [m.ball for m in self.moves if m.role == BOB]

    def alice_balls(self) -> list:
        return [m.ball for m in self.moves if m.role == ALICE]

    def bob_ball(self, i: int) -> Interval:
        """B_i, 1-based."""
        return self.moves[2 * (i - 1)].ball

    @property
    def last(self) -> Optional[Interval]:
        return self.moves[-1].ball if self.moves else None

    def append(self, role: str, ball: Interval) -> Move:
        rnd = self.round + 1 if role == BOB else self.round
        move = Move(rnd, role, ball)
        self.moves.append(move)
        return move

    def to_text(self) -> str:
        return "".join(m.to_line() + "\n" for m in self.moves)

    @classmethod
    def from_text(cls, params: GameParams, text: str) -> "GameTranscript":
        t = cls(params)
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                t.moves.append(Move.from_line(line))
        return t

    def copy(self) -> "GameTranscript":
        return GameTranscript(self.params, list(self.moves))


@dataclass(frozen=True)
class Violation:
    kind: str  # "containment" | "ratio" | "kind" | "order"
    round: int
    role: str
    detail: str

    def __str__(self):
        return f"round {self.round} {self.role}: {self.kind} violation ({self.detail})"


class IllegalMoveError(Exception):
    def __init__(self, violation: Violation, transcript: GameTranscript):
        super().__init__(str(violation))
        self.violation = violation
        self.transcript = transcript


class Strategy(Protocol):
    """A player.  ``move`` sees the transcript so far and returns the next ball."""

    role: str

    def move(self, transcript: GameTranscript) -> Interval:
        ...


def validate_move(t: GameTranscript, role: str, candidate: Interval) -> Optional[Violation]:
    """Return ``None`` for a legal move, else the first broken rule."""
    expected = t.next_role()
    rnd = t.round + 1 if role == BOB else t.round
    if role != expected:
        return Violation("order", rnd, role, f"expected a {expected} move")
    if not candidate.is_closed:
        return Violation("kind", rnd, role, "moves must be closed intervals")
    prev = t.last
    if prev is None:
        if candidate.length <= 0:
            return Violation("ratio", rnd, role, "opening ball must have positive radius")
        return None
    if not prev.contains(candidate):
        return Violation("containment", rnd, role, f"{candidate} not inside {prev}")
    want = t.params.ratio(role) * prev.length
    if candidate.length != want:
        return Violation("ratio", rnd, role,
                         f"length {format_rational(candidate.length)} != {format_rational(want)}")
    return None


def run_game(params: GameParams, alice: Strategy, bob: Strategy, rounds: int,
             transcript: Optional[GameTranscript] = None) -> GameTranscript:
    """Play ``rounds`` Bob+Alice exchanges, validating every move."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    t = transcript if transcript is not None else GameTranscript(params)
    while t.round < rounds or t.next_role() == ALICE:
        role = t.next_role()
        player = bob if role == BOB else alice
        ball = player.move(t)
        violation = validate_move(t, role, ball)
        if violation is not None:
            raise IllegalMoveError(violation, t)
        t.append(role, ball)
    return t


def enclosure(t: GameTranscript) -> Interval:
    """The last Bob ball B_N; the limit point of the play lies inside it."""
    bobs = t.bob_balls()
    if not bobs:
        raise ValueError("empty transcript")
    return bobs[-1]


def check_transcript(t: GameTranscript) -> Optional[Violation]:
    """Replay every move of ``t`` through :func:`validate_move`."""
    replay = GameTranscript(t.params)
    for m in t.moves:
        v = validate_move(replay, m.role, m.ball)
        if v is not None:
            return v
        if replay.append(m.role, m.ball).round != m.round:
            return Violation("order", m.round, m.role, "round counter mismatch")
    return None


def max_abg_check(samples: Iterable) -> Optional[tuple]:
    """First ``(alpha, beta)`` in S with alpha*beta*gamma >= 1/4, or ``None``."""
    quarter = Fraction(1, 4)
    for alpha, beta in samples:
        p = GameParams(alpha, beta)
        if not p.in_S:
            raise ValueError(f"sample {p} is outside S")
        if p.abg >= quarter:
            return (p.alpha, p.beta)
    return None
