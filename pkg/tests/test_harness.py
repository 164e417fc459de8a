import itertools
import json
import math
from fractions import Fraction

import pytest

from schmidtgame.cli import main
from schmidtgame.harness import (CERTIFICATIONS, CONFIG, EXIT_CONFIG, EXIT_ILLEGAL, EXIT_OK,
                                 EXIT_VERIFY, REPORT, SUMMARY, TRANSCRIPT, ConfigError,
                                 ExperimentConfig, box_dimension, certify_family, cover_count,
                                 emit_report, footnote_demo, run_experiment, run_sweep,
                                 verify_run)

F = Fraction
CANTOR_CFG = """\
family = cantor q=affine:400+1*n cell=0/1,1/18
rounds = 40
window_k = 1,3
window_n = -10,10
"""


def _write_cfg(tmp_path, text, name="cfg.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _records(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_config_round_trip():
    cfg = ExperimentConfig.parse("""
        # comment line
        alpha = 1/3
        beta = 2/3   # trailing comment
        family = cantor q=const:2 group t=auto cell=auto
        bob = random(9)
        window_n = -5,5
        waive_friendly = yes
        dim_depths = 3-5
    """)
    assert cfg.alpha == F(1, 3) and cfg.window_n == (-5, 5) and cfg.waive_friendly
    assert cfg.dim_depths == (3, 4, 5)
    again = ExperimentConfig.parse(cfg.to_text())
    assert again == cfg
    assert again.to_text() == cfg.to_text()


@pytest.mark.parametrize("text", ["colour = red", "alpha = 0.5", "rounds = many",
                                  "just words", "alpha = 1/0"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.parse(text)


def test_play_writes_artifacts_and_verifies(tmp_path):
    out = tmp_path / "run"
    assert main(["play", "--out", str(out), "--seed", "1"]) == EXIT_OK
    for name in (TRANSCRIPT, CERTIFICATIONS, REPORT, SUMMARY, CONFIG):
        assert (out / name).exists()
    recs = _records(out / REPORT)
    certs = [r for r in recs if r["record"] == "certification"]
    assert len(certs) >= 3
    assert len(_records(out / CERTIFICATIONS)) == len(certs)
    digits = {r["position"]: r for r in recs if r["record"] == "digit"}
    for c in certs:
        assert digits[c["level"] + 1]["certified"]
        assert digits[c["level"] + 1]["digit"] != 0
    assert recs[-1] == {"record": "status", "exit_code": 0, "error": "",
                        "levels_certified": len(certs)}
    assert main(["verify", "--out", str(out)]) == EXIT_OK


def test_verify_rejects_tampered_record(tmp_path):
    out = tmp_path / "run"
    assert main(["play", "--out", str(out)]) == EXIT_OK
    lines = (out / CERTIFICATIONS).read_text().splitlines()
    rec = json.loads(lines[0])
    rec["level"] += 1  # claim avoidance of the wrong level
    lines[0] = json.dumps(rec, sort_keys=True)
    (out / CERTIFICATIONS).write_text("\n".join(lines) + "\n")
    assert main(["verify", "--out", str(out)]) == EXIT_VERIFY


def test_verify_rejects_illegal_transcript(tmp_path):
    out = tmp_path / "run"
    assert main(["play", "--out", str(out)]) == EXIT_OK
    lines = (out / TRANSCRIPT).read_text().splitlines()
    lines[1] = "1 alice 0/1 1/3"
    (out / TRANSCRIPT).write_text("\n".join(lines) + "\n")
    cfg = ExperimentConfig.load(out / CONFIG)
    assert verify_run(cfg, out).exit_code == EXIT_ILLEGAL


def test_non_friendly_family_exit_code(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "family = uniform eta=256 cell=0/1,1/256\n")
    assert main(["play", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_VERIFY
    assert "friendly2" in capsys.readouterr().err
    assert main(["certify", "--config", cfg]) == EXIT_VERIFY


def test_waived_non_friendly_family_plays(tmp_path):
    # alice may fail; the waiver only lets the game start
    cfg = _write_cfg(tmp_path, "family = uniform eta=256 cell=0/1,1/256\nrounds = 20\n")
    code = main(["play", "--config", cfg, "--waive-friendly", "--out", str(tmp_path / "o")])
    assert code in (EXIT_OK, EXIT_VERIFY)
    assert (tmp_path / "o" / TRANSCRIPT).exists()


def test_config_error_exit_code(tmp_path):
    cfg = _write_cfg(tmp_path, "family = hexagon\n")
    assert main(["play", "--config", cfg]) == EXIT_CONFIG
    assert main(["play", "--config", str(tmp_path / "missing.txt")]) == EXIT_CONFIG
    cfg = _write_cfg(tmp_path, "bob = wizard\n", "b.txt")
    assert main(["play", "--config", cfg]) == EXIT_CONFIG


def test_illegal_replay_exit_code(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 bob 0/1 1/1\n1 alice 1/4 3/4\n2 bob 0/1 1/2\n")
    cfg = _write_cfg(tmp_path, f"alice = centered\nbob = replay({bad})\nrounds = 3\n")
    assert main(["play", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_ILLEGAL


def test_play_is_byte_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["play", "--seed", "5", "--out", str(tmp_path / name)]) == EXIT_OK
    for f in (TRANSCRIPT, REPORT, CERTIFICATIONS, SUMMARY):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_replay_reproduces_records(tmp_path):
    assert main(["play", "--seed", "3", "--out", str(tmp_path / "a")]) == EXIT_OK
    cfg = _write_cfg(tmp_path, f"bob = replay({tmp_path / 'a' / TRANSCRIPT})\n")
    assert main(["play", "--config", cfg, "--out", str(tmp_path / "b")]) == EXIT_OK
    for f in (TRANSCRIPT, CERTIFICATIONS):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    a, b = _records(tmp_path / "a" / REPORT), _records(tmp_path / "b" / REPORT)
    assert a[1:] == b[1:]


def test_cantor_play_certifies_nonzero_digits(tmp_path):
    cfg = ExperimentConfig.parse(CANTOR_CFG)
    res = run_experiment(cfg, tmp_path)
    assert res.exit_code == EXIT_OK and len(res.certifications) >= 3
    digits = {r["position"]: r["digit"] for r in res.records if r["record"] == "digit"}
    assert all(digits[c.level + 1] != 0 for c in res.certifications)
    assert verify_run(cfg, tmp_path).ok


def test_levels_non_decreasing_in_rounds():
    counts = []
    for rounds in (10, 20, 30, 45, 60):
        res = run_experiment(ExperimentConfig(seed=11, rounds=rounds))
        counts.append(len(res.certifications))
    assert counts == sorted(counts) and counts[-1] >= 3


def test_sweep_parallel_matches_serial():
    cfg = ExperimentConfig(rounds=30)
    serial = run_sweep(cfg, [1, 2, 3])
    parallel = run_sweep(cfg, [1, 2, 3], workers=2)
    assert [r.records for r in serial] == [r.records for r in parallel]
    assert [r.config.seed for r in parallel] == [1, 2, 3]


def test_min_levels_gate():
    res = run_experiment(ExperimentConfig(rounds=6, min_levels=5))
    assert res.exit_code == EXIT_VERIFY and "min_levels" in res.error


def test_certify_family_report(tmp_path):
    cfg = ExperimentConfig(window_k=(1, 2), window_n=(-3, 3))
    rep = certify_family(cfg, tmp_path)
    assert rep.passed
    recs = _records(tmp_path / "friendliness.jsonl")
    assert recs[0]["passed"] is True and recs[0]["first_violation"] is None
    assert sum(1 for r in recs if r["record"] == "gap") == 2 * 7


def test_certify_cli_eta256(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "family = uniform eta=256 cell=0/1,1/256\nwindow_k = 1,2\n")
    assert main(["certify", "--config", cfg, "--out", str(tmp_path / "c")]) == EXIT_VERIFY
    assert "condition=friendly2" in capsys.readouterr().out


def test_emit_report_empty(tmp_path):
    path = emit_report([], tmp_path / "r")
    assert path.read_text() == ""


def test_stats_cli(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "stats_x = champernowne:10\nstats_n = 9\n")
    assert main(["stats", "--config", cfg, "--out", str(tmp_path / "s")]) == EXIT_OK
    recs = _records(tmp_path / "s" / "stats.jsonl")
    one = [r for r in recs if r["statistic"] == "order_ratio" and r["block"] == "1"][0]
    assert (one["numerator"], one["denominator"]) == (10, 9)
    assert "approx" not in one or isinstance(one["decimal_approx"], str)
    cfg = _write_cfg(tmp_path, "stats_x = 1/4\nstats_q = const:10\nstats_n = 4\n", "c2.txt")
    assert main(["stats", "--config", cfg]) == EXIT_OK
    cfg = _write_cfg(tmp_path, "stats_x = 1/4\n", "c3.txt")
    assert main(["stats", "--config", cfg]) == EXIT_CONFIG


def _brute_cover(base, avoid, depth):
    # enumerate every depth-m digit string
    return sum(1 for w in itertools.product(range(base), repeat=depth)
               if not set(w) & set(avoid))


def test_cover_count_matches_enumeration():
    for base, avoid, depth in [(3, [0], 4), (4, [1, 3], 3), (5, [], 3), (10, [0], 2)]:
        assert cover_count(base, avoid, depth) == _brute_cover(base, avoid, depth)


def test_box_dimension():
    est = box_dimension(3, [0], range(6, 11))
    assert est.counts == [2 ** m for m in range(6, 11)]
    assert abs(est.slope - math.log(2) / math.log(3)) < 1e-12
    assert box_dimension(3, [], range(6, 11)).slope == 1
    ten = box_dimension(10, [0], range(2, 8))
    assert abs(ten.slope - math.log(9) / math.log(10)) < 1e-12
    slopes = [box_dimension(b, [0], range(3, 7)).slope for b in (3, 5, 10, 50)]
    assert slopes == sorted(slopes)
    with pytest.raises(ValueError):
        box_dimension(3, [0, 1, 2], [1, 2])


def test_dimension_cli(tmp_path, capsys):
    assert main(["dimension", "--base", "3", "--avoid", "0", "--depths", "6-10",
                 "--out", str(tmp_path)]) == EXIT_OK
    assert "slope (approx): 0.630930" in capsys.readouterr().out
    assert main(["dimension", "--avoid", ""]) == EXIT_OK
    assert "slope (approx): 1.000000" in capsys.readouterr().out


def test_footnote():
    rows = footnote_demo()
    assert [(r.digit, r.q) for r in rows] == [(1, 2), (2, 4), (3, 4), (3, 6), (4, 6), (5, 6)]
    assert all(r.passed for r in rows)
    assert all(r.t_odd >= F(1, 2) for r in rows)


def test_footnote_cli(tmp_path, capsys):
    assert main(["footnote", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("pass") == 6
    assert (tmp_path / "footnote.jsonl").exists()
