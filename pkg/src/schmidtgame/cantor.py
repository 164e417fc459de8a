"""Q-Cantor series expansions and finite-n normality statistics.

Nothing here decides normality; every statistic is evaluated at a finite
prefix and returned as an exact rational.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .exact import Interval, RationalLike, as_rational, frac_part


class BasicSequence:
    """An integer sequence q_1, q_2, ... with every term >= 2.

    Rules: ``const`` (v), ``affine`` (c0 + c1*n), ``list`` (finite, explicit)
    and ``grouped`` (products of consecutive blocks of another sequence).
    Partial products q_1...q_n are cached; the sequence itself never changes.
    """

    def __init__(self, rule: str, *, value: int = 0, c0: int = 0, c1: int = 0,
                 terms: Sequence[int] = (), base: "BasicSequence" = None, t: int = 1):
        self.rule = rule
        self.value, self.c0, self.c1 = value, c0, c1
        self.terms = tuple(terms)
        self.base, self.t = base, t
        if rule == "const":
            if value < 2:
                raise ValueError(f"constant basic sequence needs value >= 2, got {value}")
        elif rule == "affine":
            if c1 < 0 or c0 + c1 < 2:
                raise ValueError("affine rule needs c1 >= 0 and q_1 = c0 + c1 >= 2")
        elif rule == "list":
            if not self.terms or min(self.terms) < 2:
                raise ValueError("list rule needs a nonempty list of integers >= 2")
        elif rule == "grouped":
            if base is None or t < 1:
                raise ValueError("grouped rule needs a base sequence and t >= 1")
        else:
            raise ValueError(f"unknown basic sequence rule {rule!r}")
        self._products = [1]

    @classmethod
    def const(cls, value: int) -> "BasicSequence":
        return cls("const", value=value)

    @classmethod
    def affine(cls, c0: int, c1: int) -> "BasicSequence":
        return cls("affine", c0=c0, c1=c1)

    @classmethod
    def from_list(cls, terms: Iterable[int]) -> "BasicSequence":
        return cls("list", terms=list(terms))

    @property
    def length(self) -> Optional[int]:
        """Number of available terms, ``None`` when unbounded."""
        if self.rule == "list":
            return len(self.terms)
        if self.rule == "grouped":
            n = self.base.length
            return None if n is None else n // self.t
        return None

    def q(self, n: int) -> int:
        if n < 1:
            raise IndexError(f"basic sequence is indexed from 1, got {n}")
        if self.rule == "const":
            return self.value
        if self.rule == "affine":
            return self.c0 + self.c1 * n
        if self.rule == "list":
            if n > len(self.terms):
                raise IndexError(f"list basic sequence has only {len(self.terms)} terms")
            return self.terms[n - 1]
        lo = (n - 1) * self.t
        return math.prod(self.base.q(i) for i in range(lo + 1, lo + self.t + 1))

    def __getitem__(self, n: int) -> int:
        return self.q(n)

    def prefix(self, n: int) -> list:
        return [self.q(j) for j in range(1, n + 1)]

    def product(self, n: int) -> int:
        """q_1 * ... * q_n (1 for n = 0)."""
        p = self._products
        while len(p) <= n:
            p.append(p[-1] * self.q(len(p)))
        return p[n]

    def describe(self) -> str:
        if self.rule == "const":
            return f"const:{self.value}"
        if self.rule == "affine":
            return f"affine:{self.c0}+{self.c1}*n"
        if self.rule == "list":
            return "list:" + ",".join(map(str, self.terms))
        return f"{self.base.describe()} group t={self.t}"

    def __eq__(self, other):
        if not isinstance(other, BasicSequence):
            return NotImplemented
        return self.describe() == other.describe()

    def __hash__(self):
        return hash(self.describe())

    def __repr__(self):
        return f"BasicSequence({self.describe()!r})"


def sequence_trends(Q: BasicSequence, checkpoints: Sequence[int], k: int = 1) -> list:
    """Prefix evidence for "infinite in limit" and k-divergence.

    One row per checkpoint n: the minimum of q_j over the second half of the
    prefix (should grow for q_n -> oo) and Q_n^(k) (should grow without bound
    for a k-divergent sequence).  These are trends, not decisions.
    """
    rows = []
    for n in checkpoints:
        tail = [Q.q(j) for j in range(n // 2 + 1, n + 1)]
        rows.append({"n": n, "tail_min_q": min(tail), "q_sum": q_sum(Q, k, n)})
    return rows


@dataclass(frozen=True)
class DigitExpansion:
    Q: BasicSequence
    digits: tuple
    origin: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(self.digits))
        for j, e in enumerate(self.digits, start=1):
            q = self.Q.q(j)
            if not 0 <= e < q:
                raise ValueError(f"digit E_{j} = {e} outside [0, {q - 1}]")

    def __len__(self):
        return len(self.digits)

    def digit(self, j: int) -> int:
        """E_j, 1-based."""
        return self.digits[j - 1]


def digits_of(x: RationalLike, Q: BasicSequence, n: int) -> DigitExpansion:
    """First ``n`` greedy digits of ``x`` in [0, 1).

    Each step keeps only the residue ``p mod r`` of the numerator, so operand
    sizes stay bounded by the denominator of ``x`` times q_j.
    """
    x = as_rational(x)
    if not 0 <= x < 1:
        raise ValueError(f"x must lie in [0, 1), got {x}")
    if n < 1:
        raise ValueError("n must be >= 1")
    p, r = x.numerator, x.denominator
    digits = []
    for j in range(1, n + 1):
        e, p = divmod(p * Q.q(j), r)
        digits.append(e)
    return DigitExpansion(Q, tuple(digits), x)


def value_of(d: DigitExpansion) -> Fraction:
    v = Fraction(0)
    for j in range(len(d.digits), 0, -1):
        v = (d.digits[j - 1] + v) / d.Q.q(j)
    return v


def shift_T(x: RationalLike, Q: BasicSequence, n: int) -> Fraction:
    """q_1...q_n * x mod 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    x = as_rational(x)
    r = x.denominator
    p = x.numerator % r
    for j in range(1, n + 1):
        p = p * Q.q(j) % r
    return Fraction(p, r)


def count_block(d: DigitExpansion, block: Sequence[int], n: int) -> int:
    """Occurrences of ``block`` starting at positions 1..n."""
    block = tuple(block)
    k = len(block)
    if k < 1:
        raise ValueError("block must be nonempty")
    need = n + k - 1
    if need > len(d.digits):
        raise ValueError(f"need {need} digits to count a length-{k} block up to n={n}, "
                         f"have {len(d.digits)}")
    digits = d.digits
    return sum(1 for j in range(n) if digits[j:j + k] == block)


def q_sum(Q: BasicSequence, k: int, n: int) -> Fraction:
    """Q_n^(k) = sum_{j<=n} 1/(q_j ... q_{j+k-1})."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    return sum((Fraction(1, math.prod(Q.q(i) for i in range(j, j + k)))
                for j in range(1, n + 1)), Fraction(0))


@dataclass
class NormalityReport:
    """Finite-n block statistics for one expansion.

    ``order_ratios`` maps each block to N_n(B)/Q_n^(k); ``pair_ratios`` maps
    ``(B, B')`` to N_n(B)/N_n(B') or ``None`` when N_n(B') = 0.
    """

    k: int
    n: int
    alphabet: tuple
    counts: dict
    q_sum: Fraction
    order_ratios: dict
    pair_ratios: dict
    simple_ratios: dict
    zero_counts: list = field(default_factory=list)

    HEADER = ("finite-n statistics; Q-normal of order k means N_n(B)/Q_n^(k) -> 1 "
              "for every length-k block, ratio normal means N_n(B)/N_n(B') -> 1")

    def undefined_pairs(self) -> list:
        return [pair for pair, v in self.pair_ratios.items() if v is None]


def normality_stats(d: DigitExpansion, k: int, n: int,
                    alphabet_cap: Optional[int] = None) -> NormalityReport:
    """Order-k, ratio and simple normality statistics at prefix length ``n``.

    Blocks range over the digits observed in positions 1..n, optionally
    truncated to the ``alphabet_cap`` smallest.
    """
    need = n + k - 1
    if need > len(d.digits):
        raise ValueError(f"need {need} digits for k={k}, n={n}")
    alphabet = sorted(set(d.digits[:n]))
    if alphabet_cap is not None:
        alphabet = alphabet[:alphabet_cap]
    blocks = list(itertools.product(alphabet, repeat=k))
    counts = {b: count_block(d, b, n) for b in blocks}
    qk = q_sum(d.Q, k, n)
    order = {b: Fraction(c) / qk for b, c in counts.items()}
    pairs = {}
    for b in blocks:
        for b2 in blocks:
            if b != b2:
                pairs[(b, b2)] = Fraction(counts[b], counts[b2]) if counts[b2] else None
    q1 = q_sum(d.Q, 1, n)
    simple = {(a,): Fraction(count_block(d, (a,), n)) / q1 for a in alphabet}
    zeros, running = [], 0
    for j in range(n):
        running += d.digits[j] == 0
        zeros.append(running)
    return NormalityReport(k, n, tuple(alphabet), counts, qk, order, pairs, simple, zeros)


def a_count(X: Sequence, I: Interval, N: int) -> int:
    """Number of n <= N whose fractional part x_n - floor(x_n) lies in I."""
    if N > len(X):
        raise ValueError(f"N={N} exceeds sequence length {len(X)}")
    return sum(1 for x in X[:N] if frac_part(x) in I)


def star_discrepancy(points: Sequence) -> Fraction:
    pts = sorted(as_rational(p) for p in points)
    if not pts:
        raise ValueError("star discrepancy of an empty point set")
    N = len(pts)
    return max(max(Fraction(i, N) - x, x - Fraction(i - 1, N))
               for i, x in enumerate(pts, start=1))


def distribution_points(x: RationalLike, Q: BasicSequence, N: int,
                        k: int = 1, p: int = 0) -> list:
    """(T_{Q,k+p}(x), T_{Q,2k+p}(x), ..., T_{Q,Nk+p}(x))."""
    if k < 1 or p < 0 or N < 0:
        raise ValueError("need k >= 1, p >= 0, N >= 0")
    x = as_rational(x)
    r = x.denominator
    res = x.numerator % r
    out, pos = [], 0
    for i in range(1, N + 1):
        target = k * i + p
        while pos < target:
            pos += 1
            res = res * Q.q(pos) % r
        out.append(Fraction(res, r))
    return out


def champernowne_digits(b: int, n: int) -> DigitExpansion:
    """First ``n`` digits of 0.1 2 3 ... written in base ``b``."""
    if b < 2:
        raise ValueError("base must be >= 2")
    digits = []
    m = 1
    while len(digits) < n:
        chunk = []
        v = m
        while v:
            v, r = divmod(v, b)
            chunk.append(r)
        digits.extend(reversed(chunk))
        m += 1
    return DigitExpansion(BasicSequence.const(b), tuple(digits[:n]))


@dataclass
class OrbitCoverage:
    bins: int
    start: int
    stop: int
    counts: list

    @property
    def untouched(self) -> list:
        return [i for i, c in enumerate(self.counts) if c == 0]


def orbit_coverage(x: RationalLike, Q: BasicSequence, N: int, bins: int,
                   start: int = 1) -> OrbitCoverage:
    """Histogram of T_{Q,n}(x) for start <= n <= N over ``bins`` equal cells of [0, 1)."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if start < 1:
        raise ValueError("start must be >= 1")
    counts = [0] * bins
    if N >= start:
        for y in distribution_points(x, Q, N - start + 1, 1, start - 1):
            counts[math.floor(y * bins)] += 1
    return OrbitCoverage(bins, start, N, counts)
