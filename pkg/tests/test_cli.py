import json
import subprocess
import sys

import pytest

from ptower.corpus import entry_by_label, load_corpus, parse_poly
from ptower.errors import ValidationError


def run_cli(*args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "ptower.cli", *args],
        capture_output=True, text=True, **kw,
    )


def test_parse_poly():
    assert parse_poly("x") == [0, 1]
    assert parse_poly("-x") == [0, -1]
    assert parse_poly("2x^2-3x+1") == [1, -3, 2]
    assert parse_poly("5") == [5]
    assert parse_poly("x^2+2") == [2, 0, 1]
    assert parse_poly("-2*x") == [0, -2]
    with pytest.raises(ValidationError):
        parse_poly("x+y")


def test_corpus_exact_validation():
    for entry in load_corpus():
        assert entry.validate_exact(), entry.label


def test_corpus_roots():
    entries = load_corpus()
    fig8 = entry_by_label(entries, "fig8")
    assert fig8.usable_roots(7) == [2, 4]
    assert fig8.usable_roots(3) == []  # ramified
    assert fig8.usable_roots(5) == []  # inert
    m2 = entry_by_label(entries, "bianchi_m2")
    assert m2.usable_roots(3) == [1, 2]
    assert m2.usable_roots(11) == [3, 8]


def test_cohom_command_and_cache(tmp_path):
    cache = str(tmp_path / "cache")
    args = ["--cache-dir", cache, "cohom", "z2", "-p", "3", "-k", "1", "--subgroup", "principal"]
    cold = run_cli(*args)
    assert cold.returncode == 0, cold.stderr
    out = json.loads(cold.stdout)
    assert out["result"]["h1"] == 2
    warm = run_cli(*args)
    assert warm.returncode == 0
    assert warm.stdout == cold.stdout  # cache hit is byte-identical


def test_cohom_f2_trivial():
    res = run_cli("cohom", "free_f2", "-p", "5", "-k", "1", "--subgroup", "full")
    assert res.returncode == 0
    assert json.loads(res.stdout)["result"]["h1"] == 2


def test_cohom_weight_zero_matches_plain():
    plain = run_cli("cohom", "fig8", "-p", "7", "-k", "1", "--subgroup", "borel0")
    weighted = run_cli("cohom", "fig8", "-p", "7", "-k", "1", "--subgroup", "borel0", "--weight", "0")
    assert plain.returncode == weighted.returncode == 0
    assert json.loads(plain.stdout)["result"] == json.loads(weighted.stdout)["result"]


def test_bad_subgroup_argument_exit_code():
    res = run_cli("cohom", "z2", "-p", "3", "--subgroup", "principal:x")
    assert res.returncode == 1
    res = run_cli("cohom", "z2", "-p", "3", "--subgroup", "wedge")
    assert res.returncode == 1


def test_malformed_entry_exit_code(tmp_path):
    corpus = tmp_path / "bad.json"
    corpus.write_text(
        json.dumps(
            [
                {
                    "label": "bad",
                    "generators": ["a", "b"],
                    "relators": ["abAB"],
                    "ring": {"min_poly": [0, 1]},
                    "generator_images": [
                        [["1", "1"], ["0", "1"]],
                        [["0", "-1"], ["1", "0"]],
                    ],
                }
            ]
        )
    )
    res = run_cli("--corpus", str(corpus), "cohom", "bad", "-p", "5", "-k", "1")
    assert res.returncode == 1
    assert "abAB" in res.stderr  # diagnostic names the failing relator


def test_tower_command_truncation_exit_code():
    res = run_cli("--max-dim", "10", "tower", "free_f2", "-p", "3", "--kmax", "2")
    assert res.returncode == 2
    rep = json.loads(res.stdout)
    assert rep["truncated"]
    res = run_cli("tower", "z2", "-p", "3", "--kmax", "2")
    assert res.returncode == 0
    rep = json.loads(res.stdout)
    assert [lv["h1"] for lv in rep["levels"]] == [2, 2]


def test_survey_deterministic_and_parallel(tmp_path):
    base = ["survey", "--pmin", "5", "--pmax", "7"]
    r1 = run_cli(*base)
    assert r1.returncode == 0, r1.stderr
    r2 = run_cli("--jobs", "2", *base)
    assert r2.returncode == 0, r2.stderr
    assert r1.stdout == r2.stdout
    lines = r1.stdout.splitlines()
    assert lines[0] == "label,arithmetic,primes_tested,analytic_holds"
    # file outputs
    out = str(tmp_path / "survey")
    r3 = run_cli(*base, "--out", out)
    assert r3.returncode == 0
    with open(out + ".csv", encoding="utf-8") as fh:
        assert fh.read().startswith("label,arithmetic")
    with open(out + ".json", encoding="utf-8") as fh:
        data = json.load(fh)
    assert {row["label"] for row in data["rows"]} == {e.label for e in load_corpus()}


def test_survey_empty_corpus(tmp_path):
    corpus = tmp_path / "empty.json"
    corpus.write_text("[]")
    res = run_cli("--corpus", str(corpus), "survey", "--pmin", "5", "--pmax", "5")
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "label,arithmetic,primes_tested,analytic_holds"


def test_survey_cache_round_trip(tmp_path):
    cache = str(tmp_path / "c")
    args = ["--cache-dir", cache, "survey", "--pmin", "5", "--pmax", "5"]
    r1 = run_cli(*args)
    r2 = run_cli(*args)
    assert r1.returncode == r2.returncode == 0
    assert r1.stdout == r2.stdout


def test_verify41_shallow_and_partial(tmp_path):
    res = run_cli("verify41", "bianchi_m2", "-n", "2", "--degrees", "0")
    assert res.returncode == 0, res.stderr
    rep = json.loads(res.stdout)
    assert rep["dense_image"] and rep["degrees"]["0"]["laplacian"]["status"] == "certified"
    # shallow truncation on the big group: inconclusive is reported distinctly
    res1 = run_cli("verify41", "bianchi_m2", "-n", "1", "--degrees", "0")
    assert res1.returncode == 0
    rep1 = json.loads(res1.stdout)
    statuses = {rep1["degrees"]["0"][op]["status"] for op in ("laplacian", "adjoint_pair")}
    assert statuses <= {"certified", "inconclusive"}
    assert rep1["pass"] in (True, False)


def test_weights_command(tmp_path):
    data = {
        "labels": ["s", "sbar"],
        "conjugation": {"s": "sbar", "sbar": "s"},
        "group_elements": [],
        "weight": {"s": 1, "sbar": 1},
    }
    path = tmp_path / "gd.json"
    path.write_text(json.dumps(data))
    res = run_cli("weights", "--input", str(path))
    assert res.returncode == 0
    assert json.loads(res.stdout)["admissible"] is True
