"""Command-line entry point: ``schmidtgame <subcommand> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .families import NotFriendlyError
from .harness import (EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, ConfigError, ExperimentConfig,
                      box_dimension, certify_family, emit_report, footnote_demo,
                      footnote_records, run_experiment, stats_records,
                      stats_target, summarize, verify_run)


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "rounds", None) is not None:
        cfg.rounds = args.rounds
    if getattr(args, "waive_friendly", False):
        cfg.waive_friendly = True
    return cfg


def cmd_play(args) -> int:
    cfg = _config(args)
    result = run_experiment(cfg, args.out)
    sys.stdout.write(summarize(result))
    if result.error:
        print(f"error: {result.error}", file=sys.stderr)
    return result.exit_code


def cmd_certify(args) -> int:
    cfg = _config(args)
    rep = certify_family(cfg, args.out)
    verdict = "pass" if rep.passed else "fail"
    print(f"{rep.family} under {rep.params}: {verdict}")
    if rep.first_violation:
        print("first violation: k={} n={} condition={}".format(*rep.first_violation))
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_stats(args) -> int:
    cfg = _config(args)
    d = stats_target(cfg)
    n = cfg.stats_n or 100
    recs = stats_records(d, cfg.stats_k, n, cfg.bins)
    if args.out:
        emit_report(recs, args.out, "stats.jsonl")
    for r in recs:
        if r["statistic"] in ("simple_ratio", "order_ratio"):
            print(f"{r['statistic']} block=({r['block']}) n={r['n']}: "
                  f"{r['numerator']}/{r['denominator']} ~ {r['decimal_approx']}")
    return EXIT_OK


def cmd_dimension(args) -> int:
    cfg = _config(args)
    base = args.base if args.base is not None else cfg.dim_base
    avoid_text = args.avoid if args.avoid is not None else cfg.dim_avoid
    avoid = [int(v) for v in avoid_text.split(",") if v.strip()]
    depths = cfg.dim_depths
    if args.depths:
        depths = ExperimentConfig.parse(f"dim_depths = {args.depths}").dim_depths
    est = box_dimension(base, avoid, depths)
    print(f"base {est.base}, avoiding {list(est.avoid)}, depths {list(est.depths)}")
    for m, c in zip(est.depths, est.counts):
        print(f"  depth {m}: {c} cells")
    print(f"slope (approx): {est.slope:.6f}   log(b-|V|)/log(b) (approx): {est.expected:.6f}")
    if args.out:
        recs = [{"record": "cover", "depth": m, "count": c}
                for m, c in zip(est.depths, est.counts)]
        recs.append({"record": "slope", "decimal_approx": f"{est.slope:.12g}",
                     "expected_decimal_approx": f"{est.expected:.12g}"})
        emit_report(recs, args.out, "dimension.jsonl")
    return EXIT_OK


def cmd_footnote(args) -> int:
    rows = footnote_demo()
    for r in rows:
        print(f"n={r.n}: E_{2 * r.n}={r.digit} q_{2 * r.n}={r.q} "
              f"{'pass' if r.passed else 'FAIL'}  "
              f"T_(2n-1)={r.t_odd} ({'>' if r.t_odd > 0.5 else '<='} 1/2)  "
              f"T_(2n)={r.t_even} ({'>' if r.t_even > 0.5 else '<='} 1/2)")
    if args.out:
        emit_report(footnote_records(rows), args.out, "footnote.jsonl")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VERIFY


def cmd_verify(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    if not args.config and (out / "config.txt").exists():
        cfg = ExperimentConfig.load(out / "config.txt")
    outcome = verify_run(cfg, out)
    for m in outcome.messages:
        print(m)
    print("verify: " + ("ok" if outcome.ok else "FAILED"))
    return outcome.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schmidtgame",
                                     description="Exact (alpha, beta)-game experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--out", required=out_required, help="output directory")

    p = sub.add_parser("play", help="play one game and write its artifacts")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--waive-friendly", action="store_true",
                   help="play even if the family fails the friendliness check")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("certify", help="check friendliness over the configured window")
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("stats", help="block statistics of stats_x")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("dimension", help="box-counting slope of a digit-avoiding set")
    common(p)
    p.add_argument("--base", type=int)
    p.add_argument("--avoid", help="comma-separated digits, empty for none")
    p.add_argument("--depths", help="e.g. 6-10 or 6,8,10")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("footnote", help="the distribution-normality counterexample prefix")
    p.add_argument("--out")
    p.set_defaults(func=cmd_footnote)

    p = sub.add_parser("verify", help="re-check a play directory from its files")
    common(p, out_required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NotFriendlyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
