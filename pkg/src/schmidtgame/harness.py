"""Experiment runner: configs, game runs, reports and post-hoc verification.

Config files are plain ``key = value`` lines (``#`` starts a comment).  Reports
are JSON lines with sorted keys; every rational is written as an exact
``numerator``/``denominator`` pair and any float is labelled
``decimal_approx``.
"""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .cantor import (BasicSequence, DigitExpansion, champernowne_digits, digits_of,
                     normality_stats, orbit_coverage, shift_T, value_of)
from .exact import Interval, as_rational, format_rational
from .families import (CantorFamily, IntervalFamily, NotFriendlyError, UniformFamily,
                       check_friendly, parse_family, parse_q_rule)
from .game import (GameParams, GameTranscript, IllegalMoveError, check_transcript,
                   enclosure, run_game)
from .rng import ALGORITHM
from .strategies import (LEFT, NO_PUSH, RIGHT, AdversarialBob, AvoidanceAlice,
                         CenteredAlice, CertificationRecord, ExtremeBob, PushAlice,
                         RandomBob, ReplayBob, VerificationError, certification_verdicts,
                         push_move)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ILLEGAL = 3
EXIT_VERIFY = 4

TRANSCRIPT = "transcript.txt"
CERTIFICATIONS = "certifications.jsonl"
REPORT = "report.jsonl"
SUMMARY = "summary.txt"
CONFIG = "config.txt"
FRIENDLINESS = "friendliness.jsonl"


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _pair(text: str) -> tuple:
    a, b = text.split(",")
    return int(a), int(b)


def _depths(text: str) -> tuple:
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = text.split("-")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(v) for v in text.split(","))


@dataclass
class ExperimentConfig:
    alpha: Fraction = Fraction(1, 2)
    beta: Fraction = Fraction(1, 2)
    family: str = "uniform eta=512 cell=0/1,1/512"
    alice: str = "avoidance"
    bob: str = "random"
    seed: int = 1
    rounds: int = 60
    start: str = "0/1,1/1"
    window_k: tuple = (1, 6)
    window_n: tuple = (-100, 100)
    waive_friendly: bool = False
    min_levels: int = 0
    stats_k: int = 1
    stats_n: int = 0
    bins: int = 0
    stats_x: str = ""
    stats_q: str = ""
    dim_base: int = 3
    dim_avoid: str = "0"
    dim_depths: tuple = (6, 7, 8, 9, 10)

    _parsers = {
        "alpha": as_rational, "beta": as_rational, "seed": int, "rounds": int,
        "window_k": _pair, "window_n": _pair, "waive_friendly": _bool,
        "min_levels": int, "stats_k": int, "stats_n": int, "bins": int,
        "dim_base": int, "dim_depths": _depths,
    }

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = cls._parsers.get(key, str)(value)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.parse(text)

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                v = format_rational(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif f.name in ("window_k", "window_n"):
                v = f"{v[0]},{v[1]}"
            elif f.name == "dim_depths":
                v = ",".join(map(str, v))
            out.append(f"{f.name} = {v}\n")
        return "".join(out)

    @property
    def params(self) -> GameParams:
        try:
            return GameParams(self.alpha, self.beta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def opening(self) -> Interval:
        a, b = self.start.split(",")
        return Interval.closed(a, b)

    def build_family(self) -> IntervalFamily:
        try:
            return parse_family(self.family, self.params)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad family descriptor {self.family!r}: {exc}") from exc


def _call(spec: str) -> tuple:
    spec = spec.strip()
    if spec.endswith(")") and "(" in spec:
        name, arg = spec[:-1].split("(", 1)
        return name.strip(), arg.strip()
    return spec, None


def build_alice(cfg: ExperimentConfig, family: Optional[IntervalFamily]):
    params = cfg.params
    name = cfg.alice.strip()
    if name == "centered":
        return CenteredAlice(params)
    if name == "push_right":
        return PushAlice(params, RIGHT)
    if name == "push_left":
        return PushAlice(params, LEFT)
    if name == "avoidance":
        if not params.in_S:
            raise ConfigError(f"avoidance needs (alpha, beta) in S; gamma = {params.gamma}")
        try:
            return AvoidanceAlice(params, family)
        except NotFriendlyError:
            if not cfg.waive_friendly:
                raise
            # negative-result runs: attack every level from the first
            return AvoidanceAlice(params, family, start=0)
    raise ConfigError(f"unknown alice strategy {cfg.alice!r}")


def build_bob(cfg: ExperimentConfig, family: Optional[IntervalFamily]):
    params, opening = cfg.params, cfg.opening()
    name, arg = _call(cfg.bob)
    if name == "random":
        return RandomBob(params, int(arg) if arg else cfg.seed, opening)
    if name == "adversarial":
        level = None if arg in (None, "", "auto") else int(arg)
        return AdversarialBob(params, family, level, opening)
    if name == "extreme_left":
        return ExtremeBob(params, LEFT, opening)
    if name == "extreme_right":
        return ExtremeBob(params, RIGHT, opening)
    if name == "replay":
        if not arg:
            raise ConfigError("replay needs a transcript path: replay(<file>)")
        try:
            t = GameTranscript.from_text(params, Path(arg).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read replay transcript {arg}: {exc}") from exc
        return ReplayBob(params, t.bob_balls())
    raise ConfigError(f"unknown bob strategy {cfg.bob!r}")


def family_digit_sequence(family: IntervalFamily) -> BasicSequence:
    """Basic sequence whose digits the family's levels constrain."""
    if isinstance(family, UniformFamily):
        return BasicSequence.const(family.eta)
    if isinstance(family, CantorFamily):
        return family.Q
    raise ConfigError(f"no digit sequence for {family.describe()}")


def rational_record(statistic: str, value: Optional[Fraction], **extra) -> dict:
    rec = {"statistic": statistic}
    rec.update(extra)
    if value is None:
        rec.update(numerator=None, denominator=None, decimal_approx=None)
    else:
        value = Fraction(value)
        rec.update(numerator=value.numerator, denominator=value.denominator,
                   decimal_approx=f"{float(value):.12g}")
    return rec


def _block(b) -> str:
    return ",".join(map(str, b))


def stats_records(d: DigitExpansion, k: int, n: int, bins: int = 0) -> list:
    """Block statistics of a digit expansion as report records."""
    rep = normality_stats(d, k, n)
    recs = [{"statistic": "header", "note": rep.HEADER, "k": k, "n": n,
             "alphabet": list(rep.alphabet)}]
    for b, c in rep.counts.items():
        recs.append(rational_record("count", Fraction(c), block=_block(b), n=n))
    recs.append(rational_record("q_sum", rep.q_sum, block="", n=n, k=k))
    for b, v in rep.order_ratios.items():
        recs.append(rational_record("order_ratio", v, block=_block(b), n=n))
    for b, v in rep.simple_ratios.items():
        recs.append(rational_record("simple_ratio", v, block=_block(b), n=n))
    for (b1, b2), v in rep.pair_ratios.items():
        recs.append(rational_record("pair_ratio", v, block=f"{_block(b1)}|{_block(b2)}", n=n))
    for j, z in enumerate(rep.zero_counts, start=1):
        recs.append(rational_record("zero_count", Fraction(z), block="0", n=j))
    if bins and d.origin is not None:
        cov = orbit_coverage(d.origin, d.Q, n, bins)
        for i, c in enumerate(cov.counts):
            recs.append(rational_record("orbit_bin", Fraction(c), block=str(i), n=n,
                                        bins=bins))
    return recs


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    transcript: GameTranscript
    certifications: list
    enclosure: Interval
    records: list
    exit_code: int = EXIT_OK
    error: str = ""

    @property
    def center(self) -> Fraction:
        return self.enclosure.center


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Play one configured game and (optionally) write its artifacts.

    Configuration problems raise :class:`ConfigError`; illegal moves,
    failed certifications and non-friendly families are reported through
    ``exit_code`` so that partial artifacts are still written.
    """
    params = cfg.params
    family = cfg.build_family() if cfg.family else None
    records = [{"record": "run", "params": str(params), "family": cfg.family,
                "alice": cfg.alice, "bob": cfg.bob, "seed": cfg.seed,
                "rng": ALGORITHM, "rounds": cfg.rounds}]
    transcript = GameTranscript(params)
    exit_code, error = EXIT_OK, ""
    alice = None
    bob = build_bob(cfg, family)

    if family is not None and cfg.alice == "avoidance" and not cfg.waive_friendly:
        rep = check_friendly(family, params, cfg.window_k, cfg.window_n)
        if not rep.passed:
            exit_code = EXIT_VERIFY
            error = (f"family {family.describe()} is not ({params})-friendly: first "
                     f"violation {rep.first_violation}; rerun with --waive-friendly")
    if exit_code == EXIT_OK:
        alice = build_alice(cfg, family)
        try:
            run_game(params, alice, bob, cfg.rounds, transcript)
        except IllegalMoveError as exc:
            exit_code, error = EXIT_ILLEGAL, str(exc)
        except VerificationError as exc:
            exit_code, error = EXIT_VERIFY, str(exc)

    certs = list(getattr(alice, "certified", []))
    if exit_code == EXIT_OK and len(certs) < cfg.min_levels:
        exit_code = EXIT_VERIFY
        error = f"only {len(certs)} levels certified, min_levels = {cfg.min_levels}"
    encl = enclosure(transcript) if transcript.moves else cfg.opening()
    records.extend(c.to_dict() for c in certs)
    records.append({"record": "enclosure", "left": format_rational(encl.left),
                    "right": format_rational(encl.right),
                    "center": format_rational(encl.center),
                    "length": format_rational(encl.length)})
    if family is not None and transcript.moves and 0 <= encl.center < 1:
        records.extend(_digit_records(cfg, family, encl.center, certs))
    records.append({"record": "status", "exit_code": exit_code, "error": error,
                    "levels_certified": len(certs)})
    result = ExperimentResult(cfg, transcript, certs, encl, records, exit_code, error)
    if out_dir is not None:
        write_run(result, out_dir)
    return result


def _digit_records(cfg, family, x: Fraction, certs: list) -> list:
    try:
        Q = family_digit_sequence(family)
    except ConfigError:
        return []
    top = max([c.level + 1 for c in certs] + [1])
    n = cfg.stats_n or top
    k = cfg.stats_k
    d = digits_of(x, Q, n + k - 1)
    recs = [{"record": "digit", "position": j, "digit": d.digit(j),
             "certified": any(c.level + 1 == j for c in certs)}
            for j in range(1, len(d) + 1)]
    recs.extend(dict(record="stat", **r) for r in stats_records(d, k, n, cfg.bins))
    return recs


def _jsonl(records: Sequence[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def emit_report(records: Sequence[dict], out_dir, name: str = REPORT,
                summary: Optional[str] = None) -> Path:
    """Write ``records`` as JSON lines (and an optional text summary) into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / name
        path.write_text(_jsonl(records))
        if summary is not None:
            (out / SUMMARY).write_text(summary)
    except OSError as exc:
        raise OSError(f"cannot write report into {out}: {exc}") from exc
    return path


def summarize(result: ExperimentResult) -> str:
    cfg = result.config
    lines = [
        f"params: {cfg.params}  gamma={format_rational(cfg.params.gamma)}",
        f"family: {cfg.family}",
        f"alice: {cfg.alice}  bob: {cfg.bob}  seed: {cfg.seed} ({ALGORITHM})",
        f"rounds played: {result.transcript.round}",
        f"levels certified: {len(result.certifications)}",
    ]
    for c in result.certifications:
        lines.append(f"  level {c.level}: trigger round {c.trigger_round}, push "
                     f"{c.direction} x{c.push_length}, certified at round "
                     f"{c.certified_round}")
    if result.certifications:
        rounds = result.certifications[-1].certified_round
        lines.append(f"rounds per certified level: "
                     f"{rounds / len(result.certifications):.3f} (approx)")
    lines.append(f"enclosure: {result.enclosure}")
    lines.append(f"exit code: {result.exit_code}" + (f"  ({result.error})" if result.error else ""))
    return "\n".join(lines) + "\n"


def write_run(result: ExperimentResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / TRANSCRIPT).write_text(result.transcript.to_text())
    (out / CONFIG).write_text(result.config.to_text())
    (out / CERTIFICATIONS).write_text(_jsonl([c.to_dict() for c in result.certifications]))
    emit_report(result.records, out, REPORT, summarize(result))


def run_sweep(cfg: ExperimentConfig, seeds: Sequence[int], workers: int = 1) -> list:
    """One game per seed; results come back in ``seeds`` order."""
    configs = [ExperimentConfig(**{**cfg.__dict__, "seed": s}) for s in seeds]
    if workers <= 1:
        return [run_experiment(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_experiment, configs))


@dataclass
class VerifyOutcome:
    exit_code: int
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK


def verify_run(cfg: ExperimentConfig, out_dir) -> VerifyOutcome:
    """Re-check a written run from its transcript and records alone."""
    out = Path(out_dir)
    params = cfg.params
    family = cfg.build_family()
    try:
        t = GameTranscript.from_text(params, (out / TRANSCRIPT).read_text())
        raw = (out / CERTIFICATIONS).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read run artifacts in {out}: {exc}") from exc
    v = check_transcript(t)
    if v is not None:
        return VerifyOutcome(EXIT_ILLEGAL, [f"illegal transcript: {v}"])
    records = [CertificationRecord.from_dict(json.loads(line)) for line in raw if line.strip()]
    msgs, ok = [], True
    bobs = t.bob_balls()
    alices = t.alice_balls()
    last_level = None
    for rec in records:
        problems = check_record(rec, params, family, bobs, alices)
        if last_level is not None and rec.level <= last_level:
            problems.append(f"levels not increasing ({last_level} then {rec.level})")
        last_level = rec.level
        if problems:
            ok = False
            msgs.append(f"level {rec.level}: " + "; ".join(problems))
        else:
            msgs.append(f"level {rec.level}: ok (round {rec.certified_round})")
    return VerifyOutcome(EXIT_OK if ok else EXIT_VERIFY, msgs)


def check_record(rec: CertificationRecord, params: GameParams, family: IntervalFamily,
                 bobs: list, alices: list) -> list:
    problems = []
    s = rec.certified_round
    if not 1 <= s <= len(bobs) or bobs[s - 1] != rec.ball:
        return [f"ball does not match B_{s} of the transcript"]
    disjoint, two = certification_verdicts(family, rec.level, rec.ball)
    if not disjoint:
        problems.append("ball meets a level member")
    if not two:
        problems.append("ball meets fewer than two next-level members")
    if (disjoint, two) != (rec.disjoint, rec.two_members):
        problems.append("recorded verdicts differ from recomputation")
    if rec.direction != NO_PUSH:
        m = rec.trigger_round
        if s != m + rec.push_length:
            problems.append("certified round != trigger round + push length")
        for i in range(m, min(s, len(alices) + 1)):
            if alices[i - 1] != push_move(bobs[i - 1], params.alpha, rec.direction):
                problems.append(f"A_{i} is not a {rec.direction} push")
                break
    return problems


def certify_family(cfg: ExperimentConfig, out_dir=None):
    """Friendliness report for the configured family over its window."""
    params = cfg.params
    family = cfg.build_family()
    rep = check_friendly(family, params, cfg.window_k, cfg.window_n)
    if out_dir is not None:
        recs = [{"record": "friendliness", "family": rep.family, "params": rep.params,
                 "k_range": list(rep.k_range), "n_range": list(rep.n_range),
                 "start": rep.start, "passed": rep.passed,
                 "first_violation": list(rep.first_violation) if rep.first_violation else None,
                 "closed_form_agrees": rep.closed_form_agrees, "note": rep.note}]
        for k, form in sorted(rep.closed_form.items()):
            recs.append({"record": "closed_form", "k": k, **form})
        for e in rep.entries:
            recs.append({"record": "gap", "k": e.k, "n": e.n,
                         "three_members": e.three_members, "friendly1": e.friendly1,
                         "friendly2": e.friendly2, "nesting": e.nesting})
        summary = (f"family: {rep.family}\nparams: {rep.params}\n"
                   f"window: k in {rep.k_range}, n in {rep.n_range}\n"
                   f"start level K_C: {rep.start}\n"
                   f"verdict: {'pass' if rep.passed else 'fail'}\n")
        if rep.first_violation:
            summary += "first violation: k={} n={} condition={}\n".format(*rep.first_violation)
        emit_report(recs, out_dir, FRIENDLINESS, summary)
    return rep


@dataclass
class DimensionEstimate:
    base: int
    avoid: tuple
    depths: tuple
    counts: list
    slope: float

    @property
    def expected(self) -> float:
        """log(b - |V|) / log(b), the exact dimension of the digit-avoiding set."""
        return math.log(self.base - len(self.avoid)) / math.log(self.base)


def cover_count(base: int, avoid: Sequence[int], depth: int) -> int:
    """Number of depth-m base-b cells whose digits all avoid ``avoid``."""
    allowed = sum(1 for d in range(base) if d not in set(avoid))
    count = 1
    for _ in range(depth):
        count *= allowed
    return count


def box_dimension(base: int, avoid: Sequence[int], depths: Sequence[int]) -> DimensionEstimate:
    """Least-squares slope of log N(m) against log(b**m) over ``depths``."""
    avoid = tuple(sorted(set(avoid)))
    if base < 2 or any(not 0 <= d < base for d in avoid):
        raise ValueError("need base >= 2 and avoided digits in [0, base)")
    if len(avoid) >= base:
        raise ValueError("cannot avoid every digit")
    if len(depths) < 2:
        raise ValueError("need at least two depths for a slope")
    counts = [cover_count(base, avoid, m) for m in depths]
    x = [math.log(base ** m) for m in depths]
    y = [math.log(c) for c in counts]
    slope = statistics.linear_regression(x, y).slope
    return DimensionEstimate(base, avoid, tuple(depths), counts, slope)


FOOTNOTE_DIGITS = (0, 1, 0, 2, 1, 3, 0, 3, 1, 4, 2, 5)
FOOTNOTE_Q = (2, 2, 4, 4, 4, 4, 6, 6, 6, 6, 6, 6)


@dataclass
class FootnoteRow:
    n: int
    digit: int
    q: int
    passed: bool
    t_odd: Fraction
    t_even: Fraction


def footnote_demo() -> list:
    """E_{2n} >= q_{2n}/2 on the printed 12-digit prefix, with both shift conventions.

    A digit E_{j} >= q_j/2 puts T_{Q,j-1}(x) at or above 1/2, so the even
    digits are witnessed by T_{Q,2n-1}; T_{Q,2n} is shown alongside.
    """
    Q = BasicSequence.from_list(FOOTNOTE_Q)
    d = DigitExpansion(Q, FOOTNOTE_DIGITS)
    x = value_of(d)
    rows = []
    for n in range(1, 7):
        e, q = d.digit(2 * n), Q.q(2 * n)
        rows.append(FootnoteRow(n, e, q, 2 * e >= q, shift_T(x, Q, 2 * n - 1),
                                shift_T(x, Q, 2 * n)))
    return rows


def footnote_records(rows: Sequence[FootnoteRow]) -> list:
    recs = []
    for r in rows:
        recs.append({"record": "footnote", "n": r.n, "digit": r.digit, "q": r.q,
                     "passed": r.passed})
        recs.append(rational_record("T_2n-1", r.t_odd, n=r.n,
                                    exceeds_half=r.t_odd > Fraction(1, 2)))
        recs.append(rational_record("T_2n", r.t_even, n=r.n,
                                    exceeds_half=r.t_even > Fraction(1, 2)))
    return recs


def stats_target(cfg: ExperimentConfig) -> DigitExpansion:
    """Digits named by ``stats_x`` (a rational or ``champernowne:<b>``)."""
    n = cfg.stats_n or 100
    need = n + cfg.stats_k - 1
    if cfg.stats_x.startswith("champernowne:"):
        return champernowne_digits(int(cfg.stats_x.split(":", 1)[1]), need)
    if not cfg.stats_x:
        raise ConfigError("stats needs stats_x = <rational> or champernowne:<b>")
    if not cfg.stats_q:
        raise ConfigError("stats needs stats_q = <q rule> for a rational stats_x")
    try:
        return digits_of(as_rational(cfg.stats_x), parse_q_rule(cfg.stats_q), need)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
