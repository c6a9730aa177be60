import json
import subprocess
import sys
from pathlib import Path

import pytest

from lcm_ident.cli import EXIT_INPUT, EXIT_INVARIANT, EXIT_OK, main
from lcm_ident.mammillary import make
from lcm_ident.model import serialize_model

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
GOLDEN = Path(__file__).resolve().parent / "golden"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_model(tmp_path, m, name="m.json"):
    p = tmp_path / name
    p.write_text(serialize_model(m))
    return p


def verdicts(doc):
    return {v["parameter"]: v["class"] for v in doc["verdicts"]}


# -- analyze ---------------------------------------------------------------------------------

def test_analyze_star(capsys):
    code, out, _ = run(["analyze", MODELS / "mammillary4_in1_out2.json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["command"] == "analyze" and doc["tool"] == "lcm-ident"
    assert doc["coefficients"]["d2"] == "1*k21"
    assert doc["cross_validation"]["pass"]
    assert doc["model_identifiability"]["identifiable"]
    v = verdicts(doc)
    assert v["k21"] == "GloballyIdentifiable"
    assert {v[p] for p in ("k12", "k13", "k14", "k31", "k41")} == {"SLING"}


def test_analyze_forest_on_leak_model(capsys):
    code, _, err = run(["analyze", MODELS / "cycle3_leak.json", "--method", "forest"], capsys)
    assert code == EXIT_INPUT
    assert "forest method inapplicable" in err


def test_analyze_det_on_leak_model(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    code, out, _ = run(["analyze", MODELS / "cycle3_leak.json", "--method", "det",
                        "--starts", "20", "--output", out_file], capsys)
    assert code == EXIT_OK and out == ""
    doc = json.loads(out_file.read_text())
    assert doc["constant_coefficients"] == {"d2": 0}  # input 1, output 2; c0 varies because of the leak
    assert "cross_validation" not in doc
    assert all(v["empirical"] for v in doc["verdicts"])


def test_analyze_markdown(capsys):
    code, out, _ = run(["analyze", MODELS / "mammillary4_in1_out1.json", "--format", "md"], capsys)
    assert code == EXIT_OK
    assert out.startswith("# lcm-ident analyze\n")
    assert "## verdicts" in out and "SLING" in out


def test_malformed_model(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(["analyze", p], capsys)
    assert code == EXIT_INPUT and "malformed" in err


def test_missing_file(capsys, tmp_path):
    code, _, _ = run(["analyze", tmp_path / "absent.json"], capsys)
    assert code == EXIT_INPUT


def test_bad_seed_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["table", "--seed", "-1"])
    assert exc.value.code == 2


# -- mammillary ------------------------------------------------------------------------------

def test_mammillary_report(capsys):
    code, out, _ = run(["mammillary", "-n", "5", "--input", "1", "--output-comp", "2"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["family"] == [1, 2]
    assert all(doc["identities"].values())
    assert verdicts(doc)["k21"] == "GloballyIdentifiable"


def test_mammillary_relabelled(capsys):
    code, out, _ = run(["mammillary", "-n", "4", "--input", "3", "--output-comp", "1"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["family"] == [2, 1]


def test_mammillary_too_small(capsys):
    code, _, err = run(["mammillary", "-n", "2", "--input", "1", "--output-comp", "1"], capsys)
    assert code == EXIT_INPUT and "n >= 3" in err


# -- table -------------------------------------------------------------------------------------

@pytest.mark.parametrize("fmt,name", [("md", "table_n6.md"), ("json", "table_n6.json")])
def test_table_golden(capsys, fmt, name):
    code, out, _ = run(["table", "--n-max", "6", "--format", fmt], capsys)
    assert code == EXIT_OK
    assert out == (GOLDEN / name).read_text()


def test_table_no_mismatches(capsys):
    doc = json.loads((GOLDEN / "table_n6.json").read_text())
    assert doc["mismatches"] == 0
    assert all(p["agrees"] for p in doc["conjecture_probe"])


def test_table_thread_invariant(monkeypatch, capsys):
    monkeypatch.setenv("LCM_IDENT_THREADS", "4")
    _, four, _ = run(["table", "--n-max", "6"], capsys)
    monkeypatch.setenv("LCM_IDENT_THREADS", "1")
    _, one, _ = run(["table", "--n-max", "6"], capsys)
    assert one == four


def test_table_n_max_too_small(capsys):
    code, _, _ = run(["table", "--n-max", "4"], capsys)
    assert code == EXIT_INPUT


# -- verify ------------------------------------------------------------------------------------

def test_verify_all(capsys):
    code, out, _ = run(["verify", "--family", "all", "--n-max", "6"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["pass"] and len(doc["results"]) == 4 + 3 + 3 + 3 + 3


def test_verify_model_file(capsys):
    code, out, _ = run(["verify", MODELS / "mammillary4_in1_out2.json"], capsys)
    assert code == EXIT_OK and json.loads(out)["pass"]


def test_verify_bad_family(capsys):
    code, _, err = run(["verify", "--family", "3,3"], capsys)
    assert code == EXIT_INPUT and "unknown family" in err


def test_verify_needs_target(capsys):
    code, _, _ = run(["verify"], capsys)
    assert code == EXIT_INPUT


def test_verify_reports_engine_disagreement(capsys, monkeypatch):
    import lcm_ident.cli as cli
    from lcm_ident.ioeq import cross_validate

    monkeypatch.setattr(cli, "cross_validate",
                        lambda m, trials, seed: cross_validate(m, trials, seed, fault="flip-d-sign"))
    code, _, err = run(["verify", "--family", "1,2", "--n-max", "4"], capsys)
    assert code == EXIT_INVARIANT and "d2" in err


# -- fiber ---------------------------------------------------------------------------------------

def test_fiber_star_has_several_values(capsys):
    code, out, _ = run(["fiber", MODELS / "mammillary4_in1_out1.json", "--starts", "40"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert all(doc["locally_identifiable"].values())
    assert all(c >= 2 for c in doc["fiber"]["distinct_counts"].values())


def test_fiber_deterministic(capsys, tmp_path):
    p = write_model(tmp_path, make(4, 1, 2))
    _, a, _ = run(["fiber", p, "--starts", "15", "--seed", "3"], capsys)
    _, b, _ = run(["fiber", p, "--starts", "15", "--seed", "3"], capsys)
    assert a == b


# -- entry point -----------------------------------------------------------------------------------

def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lcm_ident", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout


def test_help_mentions_threads():
    res = subprocess.run([sys.executable, "-m", "lcm_ident", "--help"],
                         capture_output=True, text=True)
    assert "LCM_IDENT_THREADS" in res.stdout
