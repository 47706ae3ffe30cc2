import json
import shutil
from fractions import Fraction as F


from conftest import DATA
from unitselect.cli import _rank_key, main, run
from unitselect.core import Interval

TASK1 = str(DATA / "vaccine_task1.json")
TASK2 = str(DATA / "vaccine_task2.json")


def call(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out + out.err


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def probs_doc(exp, obs, vector=None):
    doc = {"m": len(exp), "n": len(exp[0]), "experimental": {"probs": exp}, "observational": {"probs": obs}}
    if vector is not None:
        doc["benefit_vector"] = vector
    return doc


def test_validate_vaccine(capsys):
    code, out = call(["validate", TASK1], capsys)
    assert code == 0 and "ok" in out


def test_validate_bad_grand_total(tmp_path, capsys):
    path = write(tmp_path, "bad.json", probs_doc([["1/2", "1/2"], ["1/2", "1/2"]],
                                                 [["1/4", "1/4"], ["1/4", "1/8"]]))
    code, out = call(["validate", path], capsys)
    assert code == 2
    assert out.count("violation:") == 1 and "grand_sum" in out


def test_malformed_file(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{ not json")
    code, out = call(["validate", str(bad)], capsys)
    assert code == 64 and "line 1" in out


def test_unknown_flag_is_usage_error(capsys):
    code, _ = call(["bounds", TASK1, "--no-such-flag"], capsys)
    assert code == 64


def test_identify_outputs(tmp_path, capsys):
    assert call(["identify", TASK2], capsys) == (0, "identifiable: yes, value = -1/6 (-0.167)\n")
    assert call(["identify", TASK1], capsys) == (0, "identifiable: no\n")
    doc = json.loads((DATA / "vaccine_task1.json").read_text())
    doc["benefit_vector"] = [0] * 9
    code, out = call(["identify", write(tmp_path, "zero.json", doc)], capsys)
    assert code == 0 and out.startswith("identifiable: yes, value = 0")


def test_bounds_task1(capsys):
    code, out = call(["bounds", TASK1], capsys)
    assert code == 0
    assert out.splitlines()[0] == "-0.228 ≤ f(c) ≤ -0.107"
    assert "exact: [-137/600, -8/75]" in out


def test_bounds_oracle_and_trace(capsys):
    code, out = call(["bounds", TASK1, "--oracle", "--trace"], capsys)
    assert code == 0 and "containment ok" in out
    assert "lower bound reductions:" in out and "upper bound reductions:" in out
    code, out = call(["oracle", TASK1, "--json"], capsys)
    assert json.loads(out)["containment"] == "ok"


def test_identifiable_bounds_point(capsys):
    code, lines, result = run(["bounds", TASK2])
    assert code == 0 and lines[1] == "exact: [-1/6, -1/6]"


def test_json_keeps_exact_values(capsys):
    code, out = call(["bounds", TASK1, "--json"], capsys)
    doc = json.loads(out)
    assert doc["bounds"]["lower"] == {"exact": "-137/600", "decimal": "-0.228"}


def test_budget_exit_code(capsys):
    code, _ = call(["identify", TASK1, "--max-states", "3"], capsys)
    assert code == 3


def test_pc_bound(capsys):
    code, out = call(["pc-bound", TASK1, "--pairs", "1:2,2:1", "--oracle"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "0.431 ≤ P(y2_x1, y1_x2) ≤ 0.523"
    assert "containment ok" in out
    code, _ = call(["pc-bound", TASK1, "--pairs", "1:2,1:1"], capsys)
    assert code == 64
    code, _ = call(["pc-bound", TASK1, "--pairs", "5:1"], capsys)
    assert code == 64


def test_simulate_single_record(tmp_path, capsys):
    outs = []
    for run_id in ("a", "b"):
        csv = tmp_path / f"{run_id}.csv"
        summary = tmp_path / f"{run_id}.json"
        code, _ = call(["simulate", "--count", "1", "--seed", "4", "--out", str(csv),
                        "--summary", str(summary)], capsys)
        assert code == 0
        outs.append((csv.read_bytes(), summary.read_bytes()))
    assert outs[0] == outs[1]
    assert len(outs[0][0].decode().splitlines()) == 2


def test_simulate_vector_length(capsys):
    code, _ = call(["simulate", "--count", "1", "--vector", "1,2,3"], capsys)
    assert code == 64


def test_rank_tie_by_path(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    shutil.copy(TASK1, a)
    shutil.copy(TASK1, b)
    code, lines, result = run(["rank", str(b), str(a)])
    assert code == 0
    assert [r["path"] for r in result["ranking"]] == [str(a), str(b)]


def test_rank_orders_by_lower_bound(tmp_path):
    vector = ["1", "1", "0", "0"]  # P(y1_x1), identified from experimental data
    low = write(tmp_path, "low.json", probs_doc([["1/4", "3/4"], ["1/2", "1/2"]],
                                                [["1/8", "3/8"], ["1/4", "1/4"]], vector))
    high = write(tmp_path, "high.json", probs_doc([["3/4", "1/4"], ["1/2", "1/2"]],
                                                  [["3/8", "1/8"], ["1/4", "1/4"]], vector))
    code, lines, result = run(["rank", low, high])
    assert code == 0
    assert [(r["path"], r["bounds"]["lower"]["exact"]) for r in result["ranking"]] == [(high, "3/4"), (low, "1/4")]
    assert lines[0].endswith(": 0.750")


def test_rank_key_mixes_points_and_intervals():
    identified = {"path": "a", "interval": Interval(F(3, 10), F(3, 10))}
    above = {"path": "b", "interval": Interval(F(4, 10), F(9, 10))}
    below = {"path": "c", "interval": Interval(F(2, 10), F(9, 10))}
    order = sorted([identified, below, above], key=_rank_key)
    assert [e["path"] for e in order] == ["b", "a", "c"]


def test_rank_rejects_different_vectors(capsys):
    code, out = call(["rank", TASK1, TASK2], capsys)
    assert code == 64 and "benefit vectors differ" in out


def test_manifest_replay(tmp_path, capsys):
    manifest = tmp_path / "run.json"
    code, _ = call(["bounds", TASK1, "--manifest", str(manifest)], capsys)
    doc = json.loads(manifest.read_text())
    assert doc["argv"] == ["bounds", TASK1] and doc["exit_code"] == 0
    assert doc["inputs"][0]["sha256"]
    code, out = call(["replay", str(manifest)], capsys)
    assert code == 0 and "identical" in out
