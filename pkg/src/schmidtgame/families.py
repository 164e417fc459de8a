"""Level systems of half-open intervals and the friendliness checker.

A family is a sequence of levels k = 1, 2, ...; level k is a bi-infinite,
left-to-right ordered row of members C_{k,n} separated by gaps D_{k,n}
(D_{k,n} sits between C_{k,n-1} and C_{k,n}).  The lattice families are
described in closed form and never materialised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .cantor import BasicSequence
from .exact import CLOSED, HALF_OPEN, Interval, as_rational, format_rational
from .game import GameParams


class NotFriendlyError(ValueError):
    """No friendliness start level exists (or none was found in the searched prefix)."""


def friendly_threshold(params: GameParams) -> Fraction:
    """6 / ((alpha*beta)^2 * gamma): the lower bound the level ratios must beat."""
    _require_S(params)
    return 6 / (params.ab ** 2 * params.gamma)


def i_threshold(params: GameParams) -> Fraction:
    """Right endpoint alpha*beta*gamma / (1 + alpha*beta*gamma) of the avoided cell."""
    _require_S(params)
    return params.abg / (1 + params.abg)


def grouping_t(params: GameParams) -> int:
    """1 + ceil(log2(6 / ((alpha*beta)^2 gamma))), by integer comparisons only."""
    x = friendly_threshold(params)
    e = max(0, x.numerator.bit_length() - x.denominator.bit_length() - 1)
    while Fraction(2) ** e < x:
        e += 1
    while e > 0 and Fraction(2) ** (e - 1) >= x:
        e -= 1
    return 1 + e


def group_sequence(Q: BasicSequence, t: int) -> BasicSequence:
    """psi_j = q_{(j-1)t+1} * ... * q_{jt}; t = 1 returns ``Q`` itself."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if t == 1:
        return Q
    return BasicSequence("grouped", base=Q, t=t)


def _require_S(params: GameParams) -> None:
    if not params.in_S:
        raise ValueError(f"({params}) is not in S: gamma = {params.gamma} <= 0")


class IntervalFamily:
    """Contract shared by all families.  Subclasses supply ``member`` and
    ``members_in``; everything else has a generic fallback."""

    analytic = False

    def member(self, k: int, n: int) -> Interval:
        raise NotImplementedError

    def gap(self, k: int, n: int) -> Interval:
        """D_{k,n}, the half-open gap between C_{k,n-1} and C_{k,n}."""
        left = self.member(k, n - 1).right
        right = self.member(k, n).left
        return Interval(left, right, HALF_OPEN)

    def members_in(self, k: int, window: Interval) -> list:
        """Ordered ``(n, C_{k,n})`` pairs for every member meeting ``window``."""
        raise NotImplementedError

    def count_in(self, k: int, window: Interval) -> int:
        return len(self.members_in(k, window))

    def covered_length(self, k: int, window: Interval) -> Fraction:
        """Total length of level-k members inside ``window``."""
        total = Fraction(0)
        for _, c in self.members_in(k, window):
            total += max(Fraction(0), min(c.right, window.right) - max(c.left, window.left))
        return total

    def gap_contents(self, k: int, n: int) -> tuple:
        """(number of level-(k+1) members inside D_{k,n}, lengths of the
        level-(k+1) gaps inside D_{k,n}), by enumeration."""
        D = self.gap(k, n)
        inner = self.members_in(k + 1, Interval(D.left, D.right, CLOSED))
        w = sum(1 for _, c in inner if D.contains(c))
        if not inner:
            return 0, []
        lengths = []
        for m in range(inner[0][0], inner[-1][0] + 2):
            try:
                g = self.gap(k + 1, m)
            except IndexError:
                continue
            if D.contains(g):
                lengths.append(g.length)
        return w, lengths

    def friendliness_start(self, params: GameParams) -> int:
        raise NotImplementedError

    def describe(self) -> str:
        return repr(self)


class LatticeFamily(IntervalFamily):
    """Members [(n + c)/P_k, (n + d)/P_k) for a cell [c, d) in [0, 1)."""

    analytic = True

    def __init__(self, cell: Interval):
        if cell.kind != HALF_OPEN or cell.left < 0 or cell.right > 1:
            raise ValueError(f"cell must be a half-open subinterval of [0, 1), got {cell}")
        if cell.length >= 1:
            raise ValueError("cell must be shorter than 1 so that gaps have positive length")
        self.cell = cell

    def scale(self, k: int) -> int:
        raise NotImplementedError

    def member(self, k: int, n: int) -> Interval:
        if k < 1:
            raise ValueError("levels start at k = 1")
        P = self.scale(k)
        return Interval((n + self.cell.left) / P, (n + self.cell.right) / P, HALF_OPEN)

    def _index_range(self, k: int, window: Interval) -> tuple:
        P = self.scale(k)
        c, d = self.cell.left, self.cell.right
        lo = math.floor(window.left * P - d)
        hi = math.ceil(window.right * P - c)
        while lo <= hi and not self.member(k, lo).intersects(window):
            lo += 1
        while hi >= lo and not self.member(k, hi).intersects(window):
            hi -= 1
        return lo, hi

    def members_in(self, k: int, window: Interval) -> list:
        lo, hi = self._index_range(k, window)
        return [(n, self.member(k, n)) for n in range(lo, hi + 1)]

    def count_in(self, k: int, window: Interval) -> int:
        lo, hi = self._index_range(k, window)
        return max(0, hi - lo + 1)

    def covered_length(self, k: int, window: Interval) -> Fraction:
        P = self.scale(k)
        c, width = self.cell.left, self.cell.length

        def cumulative(z: Fraction) -> Fraction:
            whole = math.floor(z)
            return whole * width + min(max(z - whole - c, Fraction(0)), width)

        return (cumulative(window.right * P) - cumulative(window.left * P)) / P

    def gap_contents(self, k: int, n: int) -> tuple:
        # Scaled by P_{k+1}, D_{k,n} = [(n-1+d)r, (n+c)r) with r = q_{k+1}; member m
        # spans [m+c, m+d) and gap m spans [m-1+d, m+c).
        r = self.scale(k + 1) // self.scale(k)
        c, d = self.cell.left, self.cell.right
        lo, hi = (n - 1 + d) * r, (n + c) * r
        w = max(0, math.floor(hi - d) - math.ceil(lo - c) + 1)
        v = max(0, math.floor(hi - c) - math.ceil(lo + 1 - d) + 1)
        return w, [(1 - self.cell.length) / self.scale(k + 1)] * v

    def closed_form(self, params: GameParams, k: int) -> dict:
        """Level-k friendliness decided from the family's lengths alone."""
        lam = self.cell.length
        ratio = Fraction(self.scale(k + 1), self.scale(k))
        return {
            # sufficient, not necessary: a gap this wide always holds 3 whole members
            "three_members": (1 - lam) * ratio >= 4,
            "friendly1": (1 - lam) > lam / params.abg,
            "friendly2": 1 / ratio < params.ab ** 2 * params.gamma / 6,
        }


class UniformFamily(LatticeFamily):
    """Preimages of a cell under x -> eta*x mod 1, level k at scale eta**k."""

    def __init__(self, eta: int, cell: Interval):
        if eta < 2:
            raise ValueError("eta must be >= 2")
        super().__init__(cell)
        self.eta = eta

    def scale(self, k: int) -> int:
        return self.eta ** k

    def friendliness_start(self, params: GameParams) -> int:
        form = self.closed_form(params, 1)
        if not (form["friendly1"] and form["friendly2"]):
            failed = [name for name in ("friendly1", "friendly2") if not form[name]]
            raise NotFriendlyError(f"{self.describe()} fails {', '.join(failed)} at every level")
        return 0

    def describe(self) -> str:
        return (f"uniform eta={self.eta} cell="
                f"{format_rational(self.cell.left)},{format_rational(self.cell.right)}")

    def __repr__(self):
        return f"UniformFamily({self.describe()!r})"


class CantorFamily(LatticeFamily):
    """Preimages of a cell under T_{Q,k}; level k at scale q_1...q_k."""

    def __init__(self, Q: BasicSequence, cell: Interval, prefix: int = 1_000):
        super().__init__(cell)
        self.Q = Q
        self.prefix = prefix

    def scale(self, k: int) -> int:
        return self.Q.product(k)

    def friendliness_start(self, params: GameParams) -> int:
        """Least k0 with q_j > 6/((alpha beta)^2 gamma) for all k0 < j <= prefix."""
        bound = friendly_threshold(params)
        Q = self.Q
        if Q.rule == "const":
            if Q.value <= bound:
                raise NotFriendlyError(f"constant q = {Q.value} never exceeds "
                                       f"{format_rational(bound)}")
            return 0
        if Q.rule == "affine":
            # q_j = c0 + c1*j is nondecreasing; k0 is the last j with q_j <= bound
            if Q.c1 == 0:
                if Q.c0 <= bound:
                    raise NotFriendlyError(f"constant q = {Q.c0} never exceeds "
                                           f"{format_rational(bound)}")
                return 0
            return max(0, math.floor((bound - Q.c0) / Q.c1))
        limit = self.prefix if Q.length is None else min(self.prefix, Q.length)
        k0 = 0
        for j in range(1, limit + 1):
            if Q.q(j) <= bound:
                k0 = j
        if k0 >= limit:
            raise NotFriendlyError(
                f"q_j never exceeds {format_rational(bound)} within the first {limit} terms")
        return k0

    def describe(self) -> str:
        return (f"cantor q={self.Q.describe()} cell="
                f"{format_rational(self.cell.left)},{format_rational(self.cell.right)}")

    def __repr__(self):
        return f"CantorFamily({self.describe()!r})"


class FiniteFamily(IntervalFamily):
    """Hand-listed levels for tests; member indices run 0..len-1 per level."""

    def __init__(self, levels: dict, start: int = 0):
        self.levels = {k: sorted(v, key=lambda c: c.left) for k, v in levels.items()}
        self.start = start

    def member(self, k: int, n: int) -> Interval:
        row = self.levels.get(k, [])
        if not 0 <= n < len(row):
            raise IndexError(f"no member C_{{{k},{n}}}")
        return row[n]

    def members_in(self, k: int, window: Interval) -> list:
        return [(n, c) for n, c in enumerate(self.levels.get(k, [])) if c.intersects(window)]

    def friendliness_start(self, params: GameParams) -> int:
        return self.start

    def describe(self) -> str:
        return f"finite levels={sorted(self.levels)}"


@dataclass
class FriendlinessEntry:
    k: int
    n: int
    three_members: bool
    friendly1: Optional[bool]
    friendly2: Optional[bool]
    nesting: Optional[bool] = None


@dataclass
class FriendlinessReport:
    family: str
    params: str
    k_range: tuple
    n_range: tuple
    start: Optional[int]
    entries: list = field(default_factory=list)
    first_violation: Optional[tuple] = None
    closed_form: dict = field(default_factory=dict)
    closed_form_agrees: Optional[bool] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.first_violation is None

    def violations(self, condition: str) -> list:
        return [e for e in self.entries if getattr(e, condition) is False]


CONDITIONS = ("three_members", "friendly1", "friendly2", "nesting")


def check_friendly(family: IntervalFamily, params: GameParams,
                   k_range: Sequence[int], n_range: Sequence[int]) -> FriendlinessReport:
    """Check every gap D_{k,n} in the window against the friendliness conditions.

    ``k_range`` and ``n_range`` are inclusive ``(lo, hi)`` pairs.  friendly1 is
    required against all three members around D_{k,n} (C_{k,n-1}, C_{k,n},
    C_{k,n+1}); the inequalities only apply past the family's start level.
    """
    _require_S(params)
    k_lo, k_hi = k_range
    n_lo, n_hi = n_range
    note = ""
    try:
        start = family.friendliness_start(params)
    except NotFriendlyError as exc:
        start, note = None, str(exc)
    inv_abg = 1 / params.abg
    f2_factor = params.ab ** 2 * params.gamma / 6
    report = FriendlinessReport(family.describe(), str(params), (k_lo, k_hi), (n_lo, n_hi),
                                start, note=note)

    for k in range(k_lo, k_hi + 1):
        applies = start is None or k > start
        for n in range(n_lo, n_hi + 1):
            D = family.gap(k, n)
            w, v_lengths = family.gap_contents(k, n)
            entry = FriendlinessEntry(k, n, w >= 3, None, None)
            if applies:
                neighbours = (family.member(k, n - 1), family.member(k, n),
                              family.member(k, n + 1))
                entry.friendly1 = D.length > inv_abg * max(c.length for c in neighbours)
                bound = f2_factor * min(family.gap(k, n - 1).length, D.length,
                                        family.gap(k, n + 1).length)
                entry.friendly2 = all(g < bound for g in v_lengths)
            if not family.analytic:
                entry.nesting = _nested(family, k, n, D)
            report.entries.append(entry)
            if report.first_violation is None:
                for cond in CONDITIONS:
                    if getattr(entry, cond) is False:
                        report.first_violation = (k, n, cond)
                        break

    if isinstance(family, LatticeFamily):
        forms = {k: family.closed_form(params, k) for k in range(k_lo, k_hi + 1)}
        report.closed_form = forms
        agrees = True
        for k, form in forms.items():
            rows = [e for e in report.entries if e.k == k]
            for cond in ("friendly1", "friendly2"):
                seen = {getattr(e, cond) for e in rows} - {None}
                if seen and seen != {form[cond]}:
                    agrees = False
        report.closed_form_agrees = agrees
    return report


def _nested(family: IntervalFamily, k: int, n: int, D: Interval) -> bool:
    """Every level-(k+1) member and gap meeting D_{k,n} sits inside D_{k,n}
    or one of its two neighbouring members."""
    hosts = [D, family.member(k, n - 1), family.member(k, n)]
    inner = family.members_in(k + 1, Interval(D.left, D.right, CLOSED))
    pieces = [c for _, c in inner] + [family.gap(k + 1, m) for m, _ in inner[1:]]
    return all(any(h.contains(p) for h in hosts) for p in pieces if p.intersects(D))


def parse_family(descriptor: str, params: Optional[GameParams] = None) -> IntervalFamily:
    """Build a family from ``uniform eta=<int> cell=<a>,<b>`` or
    ``cantor q=<rule> [group t=<int|auto>] cell=<a>,<b>``.

    q rules: ``const:<v>``, ``affine:<c0>+<c1>*n``, ``list:<v1>,<v2>,...``.
    ``cell=auto`` (cantor only) selects [0, alpha*beta*gamma/(1+alpha*beta*gamma)).
    """
    tokens = descriptor.split()
    if not tokens:
        raise ValueError("empty family descriptor")
    kind, rest = tokens[0], tokens[1:]
    opts, group = {}, None
    i = 0
    while i < len(rest):
        tok = rest[i]
        if tok == "group":
            if i + 1 >= len(rest) or not rest[i + 1].startswith("t="):
                raise ValueError("'group' must be followed by t=<int|auto>")
            group = rest[i + 1][2:]
            i += 2
            continue
        if "=" not in tok:
            raise ValueError(f"bad family token {tok!r}")
        key, value = tok.split("=", 1)
        opts[key] = value
        i += 1

    def cell() -> Interval:
        text = opts.get("cell")
        if text is None:
            raise ValueError("family descriptor needs cell=<a>,<b>")
        if text == "auto":
            if params is None:
                raise ValueError("cell=auto needs game parameters")
            return Interval.half_open(0, i_threshold(params))
        a, b = text.split(",")
        return Interval.half_open(as_rational(a), as_rational(b))

    if kind == "uniform":
        if group is not None:
            raise ValueError("group modifier applies to cantor families only")
        return UniformFamily(int(opts["eta"]), cell())
    if kind == "cantor":
        Q = parse_q_rule(opts["q"])
        if group is not None:
            if group == "auto":
                if params is None:
                    raise ValueError("group t=auto needs game parameters")
                t = grouping_t(params)
            else:
                t = int(group)
            Q = group_sequence(Q, t)
        return CantorFamily(Q, cell())
    raise ValueError(f"unknown family kind {kind!r}")


def parse_q_rule(text: str) -> BasicSequence:
    rule, _, arg = text.partition(":")
    if rule == "const":
        return BasicSequence.const(int(arg))
    if rule == "affine":
        c0, _, tail = arg.partition("+")
        if not tail.endswith("*n"):
            raise ValueError(f"affine rule must read <c0>+<c1>*n, got {text!r}")
        return BasicSequence.affine(int(c0), int(tail[:-2]))
    if rule == "list":
        return BasicSequence.from_list(int(v) for v in arg.split(","))
    raise ValueError(f"unknown q rule {text!r}")
