"""Command-line interface: verbs, exit codes, determinism."""

import json
import subprocess
import sys

import pytest

from camech.cli import main

THREE = {
    "goods": ["a", "b"],
    "bids": [
        {"bidder": "red", "bundle": ["a"], "amount": "10"},
        {"bidder": "green", "bundle": ["a", "b"], "amount": "19"},
        {"bidder": "blue", "bundle": ["b"], "amount": "8"},
    ],
}

TIED = {
    "goods": ["a", "b", "c", "d"],
    "bids": [
        {"bidder": "green", "bundle": ["a", "b"], "amount": "1"},
        {"bidder": "red", "bundle": ["c", "d"], "amount": "1"},
        {"bidder": "black", "bundle": ["a", "c"], "amount": "1"},
    ],
}


@pytest.fixture()
def three_path(tmp_path):
    path = tmp_path / "three.json"
    path.write_text(json.dumps(THREE))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_run_greedy(capsys, three_path):
    code, out = run_cli(capsys, "run", three_path, "--mechanism", "greedy")
    assert code == 0
    doc = json.loads(out)
    assert {e["bidder"] for e in doc["granted"]} == {"red", "blue"}
    assert doc["revenue"] == "9.5"


def test_run_gva(capsys, three_path):
    code, out = run_cli(capsys, "run", three_path, "--mechanism", "gva")
    assert code == 0
    doc = json.loads(out)
    assert doc["granted"] == [
        {"bidder": "green", "bundle": ["a", "b"], "payment": "18", "norm": None}
    ]


def test_run_clarke_greedy(capsys, three_path):
    code, out = run_cli(capsys, "run", three_path, "--mechanism", "clarke-greedy")
    assert code == 0
    doc = json.loads(out)
    payments = {e["bidder"]: e["payment"] for e in doc["granted"]}
    assert payments["red"] == "11"


def test_run_norm_exponent_flag(capsys, tmp_path):
    doc = {
        "goods": ["a", "b"],
        "bids": [
            {"bidder": "red", "bundle": ["a"], "amount": "10"},
            {"bidder": "green", "bundle": ["a", "b"], "amount": "13"},
        ],
    }
    path = tmp_path / "surd.json"
    path.write_text(json.dumps(doc))
    code, out = run_cli(capsys, "run", str(path), "--norm-exponent", "1/2")
    assert code == 0
    parsed = json.loads(out)
    assert parsed["norm_exponent"] == "1/2"
    assert parsed["granted"][0]["payment"] == "9.19238815543"


def test_run_gva_brute_solver_agrees(capsys, three_path):
    _, dp_out = run_cli(capsys, "run", three_path, "--mechanism", "gva", "--solver", "dp")
    code, brute_out = run_cli(
        capsys, "run", three_path, "--mechanism", "gva", "--solver", "brute"
    )
    assert code == 0
    dp_doc, brute_doc = json.loads(dp_out), json.loads(brute_out)
    assert dp_doc["granted"] == brute_doc["granted"]
    assert dp_doc["revenue"] == brute_doc["revenue"]


def test_check_gva_probed_critical(capsys, three_path):
    code, out = run_cli(
        capsys, "check", three_path, "--mechanism", "gva",
        "--axioms", "exactness,participation,critical",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["all_hold"] is True


def test_run_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(THREE)))
    code, out = run_cli(capsys, "run", "-")
    assert code == 0
    assert json.loads(out)["revenue"] == "9.5"


def test_run_validation_error_exit_2(capsys, tmp_path):
    bad = {"goods": ["a"], "bids": [{"bidder": "x", "bundle": ["z"], "amount": "1"}]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out = run_cli(capsys, "run", str(path))
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "validation"


def test_run_parse_error_exit_2(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    code, out = run_cli(capsys, "run", str(path))
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "parse"


def test_run_ties_rejected_exit_3(capsys, tmp_path):
    path = tmp_path / "tied.json"
    path.write_text(json.dumps(TIED))
    code, out = run_cli(capsys, "run", str(path), "--tie-rule", "reject")
    assert code == 3
    assert json.loads(out)["error"]["kind"] == "ties"


def test_gen_too_large_exit_4(capsys):
    code, out = run_cli(capsys, "gen", "--goods", "64", "--bids", "2")
    assert code == 4
    assert json.loads(out)["error"]["kind"] == "too-large"


def test_gen_deterministic_and_valid(capsys):
    code1, out1 = run_cli(capsys, "gen", "--goods", "4", "--bids", "6", "--seed", "7")
    code2, out2 = run_cli(capsys, "gen", "--goods", "4", "--bids", "6", "--seed", "7")
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical
    doc = json.loads(out1)
    assert len(doc["bids"]) == 6
    code3, out3 = run_cli(capsys, "gen", "--goods", "4", "--bids", "6", "--seed", "8")
    assert out3 != out1


def test_gen_output_validates_and_ranks_tie_free(capsys, tmp_path):
    path = tmp_path / "gen.json"
    code, _ = run_cli(capsys, "gen", "--goods", "5", "--bids", "7",
                      "--seed", "11", "--output", str(path))
    assert code == 0
    code, out = run_cli(capsys, "run", str(path), "--tie-rule", "reject")
    assert code == 0


def test_env_seed_default(capsys, monkeypatch):
    monkeypatch.setenv("CAMECH_SEED", "42")
    _, with_env = run_cli(capsys, "gen", "--goods", "4", "--bids", "5")
    _, explicit = run_cli(capsys, "gen", "--goods", "4", "--bids", "5", "--seed", "42")
    assert with_env == explicit


def test_check_greedy_all_axioms_exit_0(capsys, three_path):
    code, out = run_cli(capsys, "check", three_path, "--mechanism", "greedy")
    assert code == 0
    doc = json.loads(out)
    assert doc["all_hold"] is True
    assert {c["axiom"] for c in doc["checks"]} == {
        "exactness", "monotonicity", "participation", "critical",
    }


def test_check_subset_of_axioms(capsys, three_path):
    code, out = run_cli(
        capsys, "check", three_path, "--axioms", "exactness,participation"
    )
    assert code == 0
    doc = json.loads(out)
    assert [c["axiom"] for c in doc["checks"]] == ["exactness", "participation"]


def test_check_clarke_greedy_deviations_exit_1(capsys, three_path):
    code, out = run_cli(
        capsys, "check", three_path, "--mechanism", "clarke-greedy",
        "--axioms", "none", "--deviations",
    )
    assert code == 1
    doc = json.loads(out)
    found = {d["bidder"]: d["profitable_deviation"] for d in doc["deviations"]}
    assert found["red"] is not None
    assert found["red"]["deviating_utility"] == "0"
    assert found["red"]["truthful_utility"] == "-1"


def test_check_greedy_deviations_none(capsys, three_path):
    code, out = run_cli(
        capsys, "check", three_path, "--axioms", "none", "--deviations"
    )
    assert code == 0
    doc = json.loads(out)
    assert all(d["profitable_deviation"] is None for d in doc["deviations"])


def test_check_critical_violated_for_clarke_greedy(capsys, three_path):
    code, out = run_cli(
        capsys, "check", three_path, "--mechanism", "clarke-greedy",
        "--axioms", "critical",
    )
    assert code == 1
    doc = json.loads(out)
    entry = doc["checks"][0]
    assert entry["verdict"] == "violated"
    assert entry["witness"]["instance"]["bids"]  # replayable witness embedded


def test_check_ties_rejected_exit_3(capsys, tmp_path):
    path = tmp_path / "tied.json"
    path.write_text(json.dumps(TIED))
    code, out = run_cli(capsys, "check", str(path), "--tie-rule", "reject")
    assert code == 3
    assert json.loads(out)["error"]["kind"] == "ties"


def test_check_deterministic(capsys, three_path):
    args = ("check", three_path, "--seed", "5", "--samples", "4")
    _, out1 = run_cli(capsys, *args)
    _, out2 = run_cli(capsys, *args)
    assert out1 == out2


def test_experiment_reproduce(capsys):
    code, out = run_cli(capsys, "experiment", "--suite", "reproduce")
    assert code == 0
    doc = json.loads(out)
    assert doc["all_pass"] is True
    assert len(doc["rows"]) >= 40


def test_experiment_reproduce_text(capsys):
    code, out = run_cli(capsys, "experiment", "--suite", "reproduce",
                        "--format", "text")
    assert code == 0
    assert "PASS" in out and "FAIL" not in out
    assert out.splitlines()[-1].endswith("expectations reproduced")


def test_experiment_ratio(capsys):
    args = ("experiment", "--suite", "ratio", "--k", "5", "--n", "6",
            "--trials", "25", "--l", "1/2", "--seed", "3")
    code, out1 = run_cli(capsys, *args)
    assert code == 0
    doc = json.loads(out1)
    assert doc["violations"] == []
    _, out2 = run_cli(capsys, *args)
    assert out1 == out2


def test_experiment_revenue(capsys):
    code, out = run_cli(
        capsys, "experiment", "--suite", "revenue", "--scenario", "better", "--l", "1"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["greedy_average_revenue"] == "0.666666666667"
    assert doc["gva_revenue"] == "0"
    assert doc["orders"] == 6
    assert doc["pass"] is True


def test_experiment_revenue_needs_scenario(capsys):
    code, out = run_cli(capsys, "experiment", "--suite", "revenue")
    assert code == 2


def test_experiment_unknown_scenario(capsys):
    code, out = run_cli(
        capsys, "experiment", "--suite", "revenue", "--scenario", "nonesuch"
    )
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "unknown-scenario"


def test_experiment_tight(capsys):
    code, out = run_cli(capsys, "experiment", "--suite", "tight", "--l", "1/2")
    assert code == 0
    doc = json.loads(out)
    assert doc["all_pass"] is True
    assert [row["goods"] for row in doc["rows"]] == [4, 9, 16]


def test_entry_point_subprocess(three_path):
    result = subprocess.run(
        [sys.executable, "-m", "camech.cli", "run", three_path],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout)["revenue"] == "9.5"
