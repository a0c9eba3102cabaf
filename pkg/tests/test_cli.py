from __future__ import annotations

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from qmprime.cli import main
from qmprime.eisenstein import HSpec
from qmprime.qseries import QSeries
from qmprime.wexpr import WExpression, parse_terms

EXAMPLE_TERMS = "1,0,3;1,1,1;-1,0,2;-1,1,2"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_certify_w_example(capsys):
    code, out, _ = run(capsys, "certify-w", "--terms", EXAMPLE_TERMS, "--mode", "all")
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"] == "detects"
    assert set(payload["certificates"]) == {"exponents", "primes", "decomposition"}
    assert WExpression.from_json(payload["input"]) == parse_terms(EXAMPLE_TERMS)


def test_certify_w_refuted(capsys):
    code, out, _ = run(capsys, "certify-w", "--terms", "1,0,1", "--mode", "primes")
    assert code == 1
    cert = json.loads(out)["certificates"]["primes"]
    assert cert["witness"] == {"p": "2", "a": "3/1"}


def test_certify_w_paper_prime_count(capsys):
    code, _, _ = run(capsys, "certify-w", "--terms", "2,0,1;-3,0,0", "--mode", "primes", "--prime-count", "1")
    assert code == 0
    code, _, _ = run(capsys, "certify-w", "--terms", "2,0,1;-3,0,0", "--mode", "primes")
    assert code == 1


def test_decompose_w(capsys):
    code, out, _ = run(capsys, "decompose-w", "--terms", EXAMPLE_TERMS)
    assert code == 0
    payload = json.loads(out)
    assert payload["decomposition"] == [["1/1", ["0", "1", "0", "2"]], ["-1/1", ["0", "1", "0", "3"]]]
    code, out, _ = run(capsys, "decompose-w", "--terms", "1,0,1", "--format", "text")
    assert code == 1 and out.startswith("refuted")


def test_terms_parse_error_is_annotated(capsys):
    code, _, err = run(capsys, "decompose-w", "--terms", "1,0,3;oops")
    assert code == 2 and "term 2" in err


def test_macmahon_csv(capsys):
    code, out, _ = run(capsys, "macmahon", "--a", "2", "--nmax", "10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,M_2(n)" and "5,9" in lines
    code, out, _ = run(capsys, "macmahon", "--a", "2", "--nmax", "10", "--format", "json")
    assert json.loads(out)["values"][5] == "9"


def test_macmahon_identity_report(capsys):
    code, out, _ = run(capsys, "macmahon", "--nmax", "300", "--verify-identity")
    assert code == 0
    report = json.loads(out)
    assert report["ok"] is True and report["failures"] == []


def test_missing_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "gen-h", "--k", "4", "--l", "3", "--M", "1", "--m", "1", "--nmax", "0")
    assert code == 2 and "required" in err


def test_bad_values_are_usage_errors(capsys):
    assert run(capsys, "gen-eisenstein", "--k", "3", "--nmax", "5")[0] == 2  # parity
    assert run(capsys, "gen-eisenstein", "--k", "4", "--chi", "x:y", "--nmax", "5")[0] == 2
    assert run(capsys, "gen-h", "--k", "3", "--l", "3", "--chi", "0", "--psi", "0", "--M", "4", "--m", "2", "--nmax", "5")[0] == 2
    assert run(capsys, "macmahon", "--nmax", "-1")[0] == 2
    assert run(capsys, "characters", "--M", "5", "--format", "xml")[0] == 2
    assert run(capsys, "spanning-set", "--K", "6", "--M", "1", "--m", "1", "--format", "csv")[0] == 2


def test_gen_eisenstein_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-eisenstein", "--k", "4", "--nmax", "6")
    f = QSeries.from_json(json.loads(out))
    assert f[0] == Fraction(1, 120)
    assert f[2] == 18
    code, out, _ = run(capsys, "gen-eisenstein", "--e2", "--nmax", "3", "--format", "csv")
    assert out.splitlines() == ["n,coefficient", "0,1/1", "1,-24/1", "2,-72/1", "3,-96/1"]
    code, out, _ = run(capsys, "gen-eisenstein", "--k", "3", "--psi", "3:1", "--nmax", "4", "--format", "text")
    assert code == 0 and out.splitlines()[1] == "0: -2/9"  # L(-2, chi_{-3}) = -B_{3,chi}/3


def test_gen_h(capsys):
    code, out, _ = run(capsys, "gen-h", "--k", "4", "--l", "3", "--chi", "0", "--psi", "0", "--m", "1", "--M", "1", "--nmax", "6")
    assert code == 0
    assert QSeries.from_json(json.loads(out))[5] == 6248


def test_spanning_set_and_certify(capsys, tmp_path):
    path = tmp_path / "pairs.json"
    code, _, _ = run(capsys, "spanning-set", "--K", "6", "--M", "3", "--m", "2", "--output", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    assert int(doc["count"]) == len(doc["pairs"]) > 0
    h1 = HSpec.from_json(doc["pairs"][0]["h1"])
    assert h1.M == 3 and h1.m == 2
    code, out, _ = run(capsys, "certify", "--spec", str(path))
    assert code == 0
    payload = json.loads(out)
    assert payload["refuted"] == "0"
    single = tmp_path / "one.json"
    single.write_text(json.dumps(doc["pairs"][0]))
    code, out, _ = run(capsys, "certify", "--spec", str(single), "--primes", "2,5,11,17,23,29,41,47")
    assert code == 0 and json.loads(out)["verdict"] == "detects"


def test_certify_refuted_and_errors(capsys, tmp_path):
    spec = tmp_path / "e4.json"
    spec.write_text(json.dumps({"k": 4}))
    code, out, _ = run(capsys, "certify", "--spec", str(spec), "--progression", "1/1", "--primes", "2,3,5,7,11")
    assert code == 1
    assert json.loads(out)["witness"]["p"] == "2"
    code, _, err = run(capsys, "certify", "--spec", str(spec))
    assert code == 2 and "--progression" in err
    code, _, err = run(capsys, "certify", "--spec", str(spec), "--progression", "1/1", "--primes", "2,3")
    assert code == 2 and "need at least 4" in err
    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "k": 4,\n  "ell": \n}')
    code, _, err = run(capsys, "certify", "--spec", str(broken), "--progression", "1/1")
    assert code == 2 and "broken.json:4:1" in err
    code, _, err = run(capsys, "certify", "--spec", str(tmp_path / "missing.json"), "--progression", "1/1")
    assert code == 2


def test_scan(capsys, tmp_path):
    spec = tmp_path / "h.json"
    spec.write_text(json.dumps({"h1": HSpec.from_json({"k": 4, "l": 3, "chi": 0, "psi": 0, "m": 1, "M": 1}).to_json(),
                                "h2": {"k": 5, "l": 2, "chi": 0, "psi": 0, "m": 1, "M": 1}}))
    code, out, _ = run(capsys, "scan", "--spec", str(spec), "--bound", "500")
    assert code == 0 and json.loads(out)["verdict"] == "detects"
    code, out, _ = run(capsys, "scan", "--spec", str(spec), "--bound", "500", "--strong")
    assert code == 1 and json.loads(out)["verdict"] == "detects"
    series = tmp_path / "e4.json"
    assert run(capsys, "gen-eisenstein", "--k", "4", "--nmax", "100", "--output", str(series))[0] == 0
    code, out, _ = run(capsys, "scan", "--spec", str(series), "--bound", "100", "--progression", "1/4")
    assert code == 1
    assert json.loads(out)["witnesses"][0]["n"] == "5"


def test_sign_changes(capsys, tmp_path):
    code, out, _ = run(capsys, "sign-changes", "--series", "delta", "--bound", "100")
    assert code == 0 and int(json.loads(out)["count"]) >= 1
    code, out, _ = run(capsys, "sign-changes", "--series", "e2", "--bound", "500")
    assert json.loads(out)["count"] == "0"
    assert run(capsys, "sign-changes", "--series", "spec", "--bound", "10")[0] == 2
    spec = tmp_path / "twist.json"
    spec.write_text(json.dumps({"k": 3, "chi": {"modulus": 1, "index": 0}, "psi": {"modulus": 5, "index": 1}, "kind": "standard"}))
    assert run(capsys, "sign-changes", "--series", "spec", "--spec", str(spec), "--bound", "30")[0] == 2


def test_characters(capsys):
    code, out, _ = run(capsys, "characters", "--M", "5")
    payload = json.loads(out)
    assert payload["count"] == "4"
    assert payload["characters"][1]["values"][2] == "zeta4"
    code, out, _ = run(capsys, "characters", "--M", "12", "--format", "csv")
    assert out.splitlines()[0] == "label,order,parity,conductor,primitive"
    assert [row.split(",")[3] for row in out.splitlines()[1:]] == ["1", "3", "4", "12"]


def test_output_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QMPRIME_OUTPUT_DIR", str(tmp_path / "out"))
    assert run(capsys, "macmahon", "--nmax", "5", "--output", "m.csv")[0] == 0
    assert (tmp_path / "out" / "m.csv").read_text().startswith("n,M_1(n)")


def test_json_numbers_are_strings(capsys):
    _, out, _ = run(capsys, "gen-h", "--k", "2", "--l", "2", "--chi", "0", "--psi", "0", "--m", "1", "--M", "1", "--nmax", "3")
    payload = json.loads(out)

    def walk(x):
        if isinstance(x, dict):
            for v in x.values():
                walk(v)
        elif isinstance(x, list):
            for v in x:
                walk(v)
        else:
            assert isinstance(x, (str, bool)) or x is None

    walk(payload)


@pytest.mark.parametrize(
    "argv",
    [
        ["spanning-set", "--K", "6", "--M", "4", "--m", "1"],
        ["certify-w", "--terms", EXAMPLE_TERMS],
        ["characters", "--M", "16", "--format", "text"],
        ["gen-eisenstein", "--k", "3", "--psi", "4:1", "--nmax", "30", "--ell", "1"],
    ],
)
def test_deterministic_output(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qmprime", "macmahon", "--a", "2", "--nmax", "5"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.splitlines()[-1] == "5,9"
    proc = subprocess.run([sys.executable, "-m", "qmprime", "nonsense"], capture_output=True, text=True)
    assert proc.returncode == 2
