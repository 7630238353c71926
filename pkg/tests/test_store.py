import hashlib
import json

import pytest

from causalbench.errors import RecordFormatError, ValidationError
from causalbench.graph import TieredDag, complexity_stats
from causalbench.naming import RANDOM_ONLY, assign_names
from causalbench.questions import TaskKind, build_cp_question
from causalbench.store import (
    MANIFEST,
    TASK_FILES,
    BenchmarkManifest,
    assemble,
    compare_records,
    find_record,
    generate_questions,
    load_config,
    parse_config,
    read_records,
    record_from_json,
    record_to_json,
    shape_stats,
    solve,
    stats_report,
    verify,
    write_records,
)


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_roundtrip_every_task(small_records, tmp_path):
    by_task = {}
    for q in small_records:
        by_task.setdefault(q.task, []).append(q)
    assert set(by_task) == set(TaskKind)
    for task, records in by_task.items():
        path = tmp_path / TASK_FILES[task]
        write_records(path, records)
        back = read_records(path)
        assert len(back) == len(records)
        for a, b in zip(records, back):
            assert record_to_json(a) == record_to_json(b)
            assert compare_records(a, b) == []
            assert a.question_text == b.question_text and a.params == b.params


def test_same_seed_byte_identical(small_config, small_bench, tmp_path):
    assemble(small_config, tmp_path)
    for name in list(TASK_FILES.values()) + [MANIFEST]:
        assert sha(tmp_path / name) == sha(small_bench / name)


def test_different_seed_differs(small_config, small_bench, tmp_path):
    assemble(small_config.with_seed(8), tmp_path)
    assert sha(tmp_path / "cp.jsonl") != sha(small_bench / "cp.jsonl")


def test_truncated_line(small_bench, tmp_path):
    lines = (small_bench / "fi.jsonl").read_text().splitlines()
    bad = tmp_path / "fi.jsonl"
    bad.write_text("\n".join(lines[:2] + [lines[2][: len(lines[2]) // 2]]) + "\n")
    with pytest.raises(RecordFormatError) as err:
        read_records(bad)
    assert err.value.line == 3 and "line 3" in str(err.value)


def test_tampered_stats_rejected(small_records):
    data = record_to_json(small_records[0])
    data["stats"]["fork_count"] += 1
    with pytest.raises(RecordFormatError):
        record_from_json(data)


def test_unknown_schema_version(small_records):
    data = record_to_json(small_records[0])
    data["schema_version"] = 99
    with pytest.raises(RecordFormatError):
        record_from_json(data)


def test_record_fields(small_records):
    data = record_to_json(small_records[0])
    for key in ("id", "task", "shape", "tiers", "edges", "names", "name_style", "question_text",
                "ground_truth", "params", "stats", "schema_version"):
        assert key in data, key
    assert json.loads(json.dumps(data)) == data


def test_verify_clean(small_bench):
    assert verify(small_bench) == []


def test_verify_detects_edit(small_bench, tmp_path):
    for f in small_bench.iterdir():
        (tmp_path / f.name).write_bytes(f.read_bytes())
    path = tmp_path / "cp.jsonl"
    lines = path.read_text().splitlines()
    rec = json.loads(lines[0])
    rec["ground_truth"]["pairs"][0]["paths"] = []
    lines[0] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
    path.write_text("\n".join(lines) + "\n")
    problems = verify(tmp_path)
    assert any("checksum" in p for p in problems)
    assert any("ground_truth" in p for p in problems)


def test_solve_matches_every_record(small_records):
    for q in small_records:
        assert compare_records(q, solve(q)) == []


def test_find_record(small_bench, small_records):
    q = small_records[-1]
    assert find_record(small_bench, q.id).id == q.id
    with pytest.raises(KeyError):
        find_record(small_bench, "nope")


def test_manifest_stats_recompute(small_bench, small_records):
    m = BenchmarkManifest.load(small_bench)
    for task in TaskKind:
        recs = [q for q in small_records if q.task is task]
        assert [s for s in m.stats if s["task"] == task.value] == shape_stats(task, recs)


def test_counts(small_bench, small_config):
    m = BenchmarkManifest.load(small_bench)
    cp_rows = [r for r in m.counts if r["task"] == "CP"]
    # 3 graphs x 2 iteration values per shape, name style and ce_d
    assert all(r["generated"] == 6 for r in cp_rows)
    assert len(cp_rows) == 2 * (1 + 2)  # styles x (1*5 one ce_d, 2*6 two)
    ci_rows = [r for r in m.counts if r["task"] == "CI"]
    assert {r["param"] for r in ci_rows} == {"wi_n=1", "wi_n=3"}


def test_ids_unique(small_records):
    ids = [q.id for q in small_records]
    assert len(ids) == len(set(ids))


def test_name_styles_present(small_records):
    styles = {q.name_style.label for q in small_records if q.task is TaskKind.BA}
    assert styles == {"random", "change:biology"}
    q = next(q for q in small_records if q.name_style.label == "change:biology")
    assert all(n.startswith(("increase of ", "decrease of ")) for n in q.names.values())


def test_stats_report_empty():
    text, csv_text = stats_report(BenchmarkManifest("h", {}, [], [], {}))
    assert text.split()[:7] == ["Task", "GS", "QN", "IND", "CH", "FO", "CO"]
    assert csv_text.strip() == "task,GS,QN,IND,CH,FO,CO"


def test_single_chain_stats():
    g = TieredDag.from_edges([1] * 5, [(i, i + 1) for i in range(4)])
    q = build_cp_question(g, assign_names(g, RANDOM_ONLY, None, 0), 1, name_style=RANDOM_ONLY)
    (row,) = shape_stats(TaskKind.CP, [q])
    assert row["chain_count"] == complexity_stats(g).chain_count == 3


def test_default_config_counts():
    cfg = load_config()
    cp = cfg.tasks[TaskKind.CP]
    assert [s.label for s in cp.shapes] == ["1*5", "1*6", "2*5", "2*6"]
    n = sum(1 for _ in generate_questions(cfg, TaskKind.CP) if _[0].startswith("cp-1x5"))
    assert n == 200


@pytest.mark.parametrize("text", [
    "[cp]\nshapes = 1*3\n",
    "[ci]\nshapes = 1*5\n",
    "[benchmark]\nmaster_seed = x\n",
    "[cp]\nname_styles = random\n",
    "not an ini",
])
def test_bad_config(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_config_hash_stable(small_config):
    assert small_config.hash() == parse_config(small_config_text()).hash()
    assert small_config.hash() != small_config.with_seed(1).hash()


def small_config_text():
    from conftest import SMALL_CONFIG

    return SMALL_CONFIG


def test_config_inline_comments():
    cfg = parse_config("[benchmark]\nmaster_seed = 5   ; seed\n[fi]\nshapes = 1*5 ; one\n")
    assert cfg.master_seed == 5 and [str(s) for s in cfg.tasks[TaskKind.FI].shapes] == ["1*5"]
