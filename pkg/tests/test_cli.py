import csv
import io
import json
from collections import defaultdict

import pytest

from causalbench.cli import main
from causalbench.evaluation.answers import render_answer
from causalbench.store import MANIFEST, TASK_FILES

from conftest import SMALL_CONFIG


@pytest.fixture()
def cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL_CONFIG)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_twice_identical(cfg, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "gen", "--config", cfg, "--seed", 42, "--out", a)[0] == 0
    assert run(capsys, "gen", "--config", cfg, "--seed", 42, "--out", b)[0] == 0
    for name in list(TASK_FILES.values()) + [MANIFEST]:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert json.loads((a / MANIFEST).read_text())["config"]["master_seed"] == 42


def test_stats_and_verify(small_bench, tmp_path, capsys):
    code, out, _ = run(capsys, "stats", "--bench", small_bench, "--csv", tmp_path / "s.csv")
    assert code == 0 and out.splitlines()[0].split() == ["Task", "GS", "QN", "IND", "CH", "FO", "CO"]
    assert (tmp_path / "s.csv").read_text().startswith("task,GS")
    code, out, _ = run(capsys, "verify", "--bench", small_bench)
    assert code == 0 and "verified" in out


def test_solve_prints_stored_truth(small_bench, small_records, capsys):
    q = next(q for q in small_records if q.task.value == "CP")
    code, out, _ = run(capsys, "solve", "--bench", small_bench, "--id", q.id)
    assert code == 0
    stored = out.split("recomputed ground truth:")[0]
    assert render_answer(q) in stored and out.strip().endswith("match")


def test_prompt(small_bench, small_records, capsys):
    q = small_records[0]
    code, out, _ = run(capsys, "prompt", "--bench", small_bench, "--id", q.id, "--style", "icl-2")
    assert code == 0 and "### Example 2" in out and q.question_text in out


def test_eval_and_report_match_tally(small_bench, tmp_path, capsys):
    res = tmp_path / "res.jsonl"
    code, out, _ = run(capsys, "eval", "--bench", small_bench, "--mock", "oracle", "--styles", "zero,cot1",
                       "--cache", tmp_path / "cache", "--out", res)
    assert code == 0
    code, out, _ = run(capsys, "report", "--results", res, "--dims", "shape,prompt", "--csv", tmp_path / "t.csv")
    assert code == 0
    tally = defaultdict(lambda: [0, 0])
    for line in res.read_text().splitlines():
        r = json.loads(line)
        tally[(r["shape"], r["prompt"])][0] += 1
        tally[(r["shape"], r["prompt"])][1] += r["verdict"] == "correct"
    rows = list(csv.reader(io.StringIO((tmp_path / "t.csv").read_text())))[1:-2]
    assert {(r[0], r[1]): (int(r[2]), r[3]) for r in rows} == {
        k: (n, f"{100 * c / n:.2f}") for k, (n, c) in tally.items()
    }
    # warm cache: no network calls and identical verdicts
    res2 = tmp_path / "res2.jsonl"
    code, out, _ = run(capsys, "eval", "--bench", small_bench, "--mock", "oracle", "--styles", "zero,cot1",
                       "--cache", tmp_path / "cache", "--out", res2)
    assert " 0 requests" in out
    verdicts = lambda p: [json.loads(l)["verdict"] for l in p.read_text().splitlines()]
    assert verdicts(res) == verdicts(res2)


def test_usage_errors_exit_2(capsys):
    for argv in (["bogus"], ["gen"], ["report", "--results", "x", "--nope"], []):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 2
    capsys.readouterr()


def test_config_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[cp]\nshapes = 1*3\n")
    code, _, err = run(capsys, "gen", "--config", bad, "--out", tmp_path / "o")
    assert code == 1 and err.startswith("causalbench: error:") and len(err.strip().splitlines()) == 1
    code, _, err = run(capsys, "gen", "--config", tmp_path / "missing.cfg", "--out", tmp_path / "o")
    assert code == 1
    code, _, err = run(capsys, "stats", "--bench", tmp_path)
    assert code == 1


def test_unknown_id_and_dim(small_bench, tmp_path, capsys):
    code, _, err = run(capsys, "solve", "--bench", small_bench, "--id", "nope")
    assert code == 1 and "nope" in err
    res = tmp_path / "r.jsonl"
    run(capsys, "eval", "--bench", small_bench, "--mock", "garbage", "--limit", "1", "--out", res)
    code, _, err = run(capsys, "report", "--results", res, "--dims", "colour")
    assert code == 1 and "colour" in err


def test_verify_fails_on_tamper(small_bench, tmp_path, capsys):
    for f in small_bench.iterdir():
        (tmp_path / f.name).write_bytes(f.read_bytes())
    with open(tmp_path / "ba.jsonl", "a") as fh:
        fh.write("\n")
    code, out, _ = run(capsys, "verify", "--bench", tmp_path)
    assert code == 1 and "checksum" in out
