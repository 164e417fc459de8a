import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schmidtgame.cantor import BasicSequence
from schmidtgame.exact import Interval
from schmidtgame.families import (CantorFamily, FiniteFamily, IntervalFamily, LatticeFamily,
                                  NotFriendlyError, UniformFamily, check_friendly,
                                  friendly_threshold, group_sequence, grouping_t, i_threshold,
                                  parse_family, parse_q_rule)
from schmidtgame.game import GameParams

F = Fraction
HALF = F(1, 2)
P = GameParams(HALF, HALF)
ETA512 = UniformFamily(512, Interval.half_open(0, F(1, 512)))

params_in_S = st.tuples(
    st.fractions(min_value=0, max_value=1, max_denominator=60),
    st.fractions(min_value=0, max_value=1, max_denominator=60),
).filter(lambda ab: 0 < ab[0] < 1 and 0 < ab[1] < 1).map(lambda ab: GameParams(*ab)).filter(
    lambda p: p.in_S)


def test_member_examples():
    assert ETA512.member(1, 0) == Interval.half_open(0, F(1, 262144))
    ten = CantorFamily(BasicSequence.const(10), Interval.half_open(0, F(1, 10)))
    assert ten.member(2, 3) == Interval.half_open(F(3, 100), F(31, 1000))


def test_member_and_gap_lengths():
    for k in (1, 2, 3):
        c = ETA512.member(k, 7)
        assert c.length == F(1, 512) / 512 ** k
        assert ETA512.gap(k, 8).length == F(511, 512) / 512 ** k


def test_members_in_examples():
    row = ETA512.members_in(1, Interval.half_open(0, 1))
    assert [n for n, _ in row] == list(range(512))
    # the closed window also touches C_{1,512} = [1, ...) at the point 1
    assert ETA512.count_in(1, Interval.closed(0, 1)) == 513
    D = ETA512.gap(1, 5)
    inside = Interval.closed(D.left + D.length / 4, D.right - D.length / 4)
    assert ETA512.members_in(1, inside) == []
    c = ETA512.member(1, 9)
    assert ETA512.members_in(1, Interval.half_open(c.left, c.right)) == [(9, c)]


def _brute_members(fam, k, window, span=3):
    # scan every index whose member could plausibly be near the window
    P = fam.scale(k)
    lo = math.floor(window.left * P) - span
    hi = math.ceil(window.right * P) + span
    return [(n, fam.member(k, n)) for n in range(lo, hi + 1)
            if fam.member(k, n).intersects(window)]


windows = st.tuples(
    st.fractions(min_value=-2, max_value=2, max_denominator=10**5),
    st.fractions(min_value=0, max_value=F(1, 50), max_denominator=10**5),
    st.sampled_from(["closed", "half_open_right"]),
).filter(lambda t: t[1] > 0 or t[2] == "closed").map(lambda t: Interval(t[0], t[0] + t[1], t[2]))

cells = st.tuples(st.integers(0, 8), st.integers(1, 8)).filter(
    lambda t: t[0] + t[1] <= 9).map(lambda t: Interval.half_open(F(t[0], 10), F(t[0] + t[1], 10)))


@settings(max_examples=150, deadline=None)
@given(windows, cells, st.integers(1, 2),
       st.sampled_from([UniformFamily, "cantor"]))
def test_members_in_matches_brute_force(window, cell, k, kind):
    if kind == "cantor":
        fam = CantorFamily(BasicSequence.affine(3, 2), cell)
    else:
        fam = UniformFamily(7, cell)
    got = fam.members_in(k, window)
    assert got == _brute_members(fam, k, window)
    assert fam.count_in(k, window) == len(got)
    assert fam.covered_length(k, window) == IntervalFamily.covered_length(fam, k, window)


@settings(max_examples=60, deadline=None)
@given(cells, st.integers(1, 2), st.integers(-5, 5),
       st.sampled_from([BasicSequence.affine(3, 2), BasicSequence.const(6)]))
def test_analytic_gap_contents_match_enumeration(cell, k, n, Q):
    fam = CantorFamily(Q, cell)
    assert fam.gap_contents(k, n) == IntervalFamily.gap_contents(fam, k, n)


def test_check_friendly_eta512_passes():
    rep = check_friendly(ETA512, P, (1, 6), (-100, 100))
    assert rep.passed
    assert rep.start == 0
    assert rep.closed_form_agrees
    # friendly1: 511/512 > 16/512 and friendly2: 1/512 < 1/384
    assert F(511, 512) > 16 * F(1, 512) and F(1, 512) < F(1, 384)


def test_check_friendly_eta256_fails_friendly2():
    fam = UniformFamily(256, Interval.half_open(0, F(1, 256)))
    rep = check_friendly(fam, P, (1, 6), (-100, 100))
    assert not rep.passed
    assert rep.first_violation[2] == "friendly2"
    assert rep.start is None and "friendly2" in rep.note
    assert rep.violations("friendly1") == []
    with pytest.raises(NotFriendlyError):
        fam.friendliness_start(P)


def test_check_friendly_cantor_narrow_cell_passes():
    fam = CantorFamily(BasicSequence.affine(400, 1), Interval.half_open(0, F(1, 18)))
    rep = check_friendly(fam, P, (1, 4), (-20, 20))
    assert rep.passed and rep.start == 0


def test_cantor_cell_at_threshold_is_friendly1_equality():
    # at lambda(I) = abg/(1+abg) the friendly1 inequality is an equality
    lam = i_threshold(P)
    assert (1 - lam) == lam / P.abg
    fam = CantorFamily(BasicSequence.affine(400, 1), Interval.half_open(0, lam))
    rep = check_friendly(fam, P, (1, 2), (-5, 5))
    assert rep.first_violation == (1, -5, "friendly1")
    assert rep.violations("friendly2") == []


def test_thresholds():
    assert friendly_threshold(P) == 384
    assert i_threshold(P) == F(1, 17)
    assert i_threshold(GameParams(HALF, F(1, 4))) == F(1, 65)
    assert grouping_t(P) == 10
    assert 2 ** 8 < 384 <= 2 ** 9


@given(params_in_S)
def test_threshold_ranges(p):
    assert 0 < i_threshold(p) < 1
    t = grouping_t(p)
    assert 2 ** (t - 1) >= friendly_threshold(p) > 2 ** (t - 2) or t == 1


def test_grouping_t_monotone_in_gamma():
    # alpha = 1/2 gives gamma = beta/2; doubling beta doubles gamma
    ts = [grouping_t(GameParams(HALF, F(1, 2 ** j))) for j in range(6, 0, -1)]
    assert ts == sorted(ts, reverse=True)


def test_group_sequence_examples():
    g = group_sequence(BasicSequence.const(2), 10)
    assert g.prefix(5) == [1024] * 5 and g.q(1) > 384
    g = group_sequence(BasicSequence.from_list([2, 3, 4, 5, 6, 7]), 3)
    assert g.prefix(2) == [24, 210] and g.length == 2
    Q = BasicSequence.affine(1, 1)
    assert group_sequence(Q, 1) is Q


@given(st.integers(1, 6), st.integers(1, 20))
def test_grouped_products_are_subproducts(t, n):
    Q = BasicSequence.affine(1, 1)
    g = group_sequence(Q, t)
    assert g.product(n) == Q.product(n * t)


def test_cantor_friendliness_start():
    assert CantorFamily(BasicSequence.affine(400, 1), Interval.half_open(0, F(1, 17))) \
        .friendliness_start(P) == 0
    assert CantorFamily(BasicSequence.affine(1, 1), Interval.half_open(0, F(1, 17))) \
        .friendliness_start(P) == 383
    listed = CantorFamily(BasicSequence.from_list([2, 500, 3, 900, 900]),
                          Interval.half_open(0, F(1, 17)))
    assert listed.friendliness_start(P) == 3
    with pytest.raises(NotFriendlyError):
        CantorFamily(BasicSequence.const(2), Interval.half_open(0, F(1, 17))).friendliness_start(P)


def test_parse_family():
    assert parse_family("uniform eta=512 cell=0/1,1/512").describe() == ETA512.describe()
    fam = parse_family("cantor q=const:2 group t=auto cell=auto", P)
    assert fam.Q.q(1) == 1024 and fam.cell.right == F(1, 17)
    fam = parse_family("cantor q=affine:400+1*n cell=0/1,1/17")
    assert fam.Q.q(1) == 401
    assert parse_q_rule("list:2,3,4").prefix(3) == [2, 3, 4]
    for bad in ("", "uniform eta=512", "triangle q=1", "cantor q=const:2 cell=auto",
                "cantor q=affine:3*n cell=0/1,1/2"):
        with pytest.raises(ValueError):
            parse_family(bad)


def test_finite_family_conditions():
    # hand-built two-level family: level-2 members sit inside level-1 gaps
    lvl1 = [Interval.half_open(F(i), F(i) + F(1, 100)) for i in range(-3, 4)]
    lvl2 = []
    for i in range(-3, 4):
        for j in range(1, 10):
            a = F(i) + F(j, 10)
            lvl2.append(Interval.half_open(a, a + F(1, 1000)))
    fam = FiniteFamily({1: lvl1, 2: lvl2}, start=0)
    rep = check_friendly(fam, P, (1, 1), (2, 4))
    assert all(e.three_members for e in rep.entries)
    assert all(e.nesting for e in rep.entries)
    assert all(e.friendly1 for e in rep.entries)
    # gaps at level 2 are ~1/10 of D_{1,n}, far above the friendly2 bound
    assert rep.first_violation[2] == "friendly2"


def test_finite_family_nesting_violation():
    lvl1 = [Interval.half_open(F(i), F(i) + F(1, 100)) for i in range(-2, 4)]
    straddler = Interval.half_open(F(1, 200), F(1, 50))  # crosses C_{1,2}'s right end
    lvl2 = [straddler] + [Interval.half_open(F(1) + F(j, 10), F(1) + F(j, 10) + F(1, 1000))
                          for j in range(1, 10)]
    fam = FiniteFamily({1: lvl1, 2: lvl2})
    rep = check_friendly(fam, P, (1, 1), (3, 3))
    assert rep.entries[0].nesting is False


def test_lattice_closed_form_is_sufficient_for_three_members():
    rep = check_friendly(ETA512, P, (1, 2), (-3, 3))
    for k, form in rep.closed_form.items():
        if form["three_members"]:
            assert all(e.three_members for e in rep.entries if e.k == k)
    assert isinstance(ETA512, LatticeFamily)
