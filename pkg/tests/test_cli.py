import json
import subprocess
import sys
from pathlib import Path

import pytest

from padic_selfsim.cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_PRECISION,
    EXIT_PRECONDITION,
    main,
    parse_matrix,
    ParseError,
)

GOLDEN = Path(__file__).parent / "golden" / "apartment_default.svg"


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("p, m, d", [("2", "2", 48), ("3", "1", 24), ("2", "1", 6)])
def test_transversal(capsys, p, m, d):
    code, out, _ = run(capsys, "transversal", "-p", p, "-n", "2", "-m", m)
    data = json.loads(out)
    assert code == EXIT_OK and data["d"] == d == len(data["reps"])
    assert data["reps"][0] == [1, 0, 0, 1]


def test_transversal_bad_prime(capsys):
    code, _, err = run(capsys, "transversal", "-p", "4", "-m", "1")
    assert code == EXIT_PRECONDITION and "not a prime" in err


def test_budget_exit(capsys):
    code, _, err = run(capsys, "transversal", "-m", "3", "--budget", "10")
    assert code == EXIT_BUDGET and "too large" in err


def test_act_identity_and_reps(capsys):
    code, out, _ = run(capsys, "act", "--matrix", "1,0,0,1", "--word", "3.40.7", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK and data["image"] == "3.40.7"
    assert data["restriction"] == [[1, 0], [0, 1]] and data["precision"] == 18
    code, out, _ = run(capsys, "act", "--rep", "17", "--word", "0", "--format", "json")
    assert json.loads(out)["image"] == "17"


def test_act_text(capsys):
    code, out, _ = run(capsys, "act", "--matrix", "1,0,4,1", "--word", "0")
    assert code == EXIT_OK
    assert "image: 0" in out and "[1 0; 1 1] (mod 2^22)" in out


def test_act_precision_exhausted(capsys):
    code, _, err = run(capsys, "act", "--matrix", "1,0,4,1", "--word", ".".join(["0"] * 12), "--precision", "10")
    assert code == EXIT_PRECISION
    assert "K >= 26" in err


@pytest.mark.parametrize(
    "args",
    [["act", "--matrix", "1,2,3", "--word", "0"], ["act", "--matrix", "1,0,x,1", "--word", "0"],
     ["act", "--matrix", "1,0,0,1", "--word", "a"], ["no-such-command"], ["act", "--precision", "many"]],
)
def test_parse_errors(capsys, args):
    assert main(args) == EXIT_PARSE


def test_precondition_errors(capsys):
    assert main(["act", "--matrix", "2,0,0,1", "--word", "0"]) == EXIT_PRECONDITION
    assert main(["act", "--matrix", "1,0,0,1", "--word", "48"]) == EXIT_PRECONDITION
    assert main(["transversal", "--vals", "1,1,-2"]) == EXIT_PRECONDITION


def test_parse_matrix():
    assert parse_matrix("1 0; 4 1") == [[1, 0], [4, 1]]
    with pytest.raises(ParseError):
        parse_matrix("1,2")


def test_portrait(capsys):
    code, out, _ = run(capsys, "portrait", "--rep", "5", "--depth", "1")
    data = json.loads(out)
    assert data["nodes"][0]["perm"][0] == 5


def test_check_wreath(capsys):
    code, out, _ = run(capsys, "check-wreath", "--samples", "40", "--format", "json")
    assert code == EXIT_OK and json.loads(out) == {"samples": 40, "max_len": 4, "violations": 0}


def test_check_wreath_parallel_same_result(capsys):
    code, out, _ = run(capsys, "check-wreath", "--samples", "20", "--jobs", "2", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["violations"] == 0


def test_invariance(capsys):
    code, out, _ = run(capsys, "invariance", "--format", "json")
    data = json.loads(out)
    assert data["invariance"]["verdict"] == "witness"
    assert data["invariance"]["witness"] == [[[1, 0], [4, 1]], [[1, 0], [1, 1]]]
    code, out, _ = run(capsys, "invariance", "--subgroup", "torus", "--format", "json")
    data = json.loads(out)
    assert data["invariance"]["verdict"] == "invariant-on-sample"
    assert data["normality"]["verdict"] == "witness"


def test_building_distance(capsys):
    code, out, _ = run(capsys, "building-distance", "--to", "4,0,0,1")
    assert out.strip() == "2"
    code, out, _ = run(capsys, "building-distance", "-n", "3", "--to", "1,0,0,0,1,0,0,0,1/4", "--vals", "1,0,-1")
    assert out.strip() == "2"
    code, out, _ = run(capsys, "building-distance", "--ball", "2")
    data = json.loads(out)
    assert len(data["vertices"]) == 10 and len(data["edges"]) == 9


def test_displacement_csv(capsys):
    code, out, _ = run(capsys, "displacement", "--t-max", "8")
    rows = out.strip().splitlines()
    assert rows[0] == "t,distance"
    assert [int(r.split(",")[1]) for r in rows[1:]] == [2 * t for t in range(9)]


def test_apartment_svg(capsys, tmp_path):
    out_file = tmp_path / "a.svg"
    assert main(["apartment-svg", "-o", str(out_file)]) == EXIT_OK
    assert out_file.read_bytes() == GOLDEN.read_bytes()
    code, out, _ = run(capsys, "apartment-svg", "--N", "0")
    assert code == EXIT_OK and "<line" not in out
    assert main(["apartment-svg", "-n", "2"]) == EXIT_PRECONDITION
    assert main(["apartment-svg", "--x", "1/2,1/2,0"]) == EXIT_PRECONDITION


def test_quat_check(capsys):
    code, out, _ = run(capsys, "quat-check", "--coords", "0,1,0,0", "--format", "json", "--samples", "20")
    data = json.loads(out)
    assert data["nrd"] == 1 and data["sl1"] and data["w"] == 0
    assert data["dichotomy"]["max_displacement"] == 0
    assert main(["quat-check", "-p", "5", "--a", "-1", "--b", "-1"]) == EXIT_PRECONDITION


def test_dichotomy_report_defaults(capsys):
    code, out, _ = run(capsys, "dichotomy-report", "--format", "json", "--samples", "30")
    data = json.loads(out)
    assert [r["building_displacement"] for r in data["rows"]] == [2 * t for t in range(9)]
    assert [r["quaternion_displacement"] for r in data["rows"]] == [0] * 9
    assert "unbounded" in data["isotropic"] and "bounded" in data["anisotropic"]


def test_dichotomy_report_variants(capsys):
    code, out, _ = run(capsys, "dichotomy-report", "--t-max", "0", "--format", "json")
    assert len(json.loads(out)["rows"]) == 1
    code, out, _ = run(capsys, "dichotomy-report", "--anisotropic-only", "--t-max", "2", "--samples", "10")
    assert "single point" in out


def test_determinism(capsys):
    for args in (["check-wreath", "--samples", "5", "--seed", "9", "--format", "json"],
                 ["invariance", "--seed", "3", "--format", "json"],
                 ["dichotomy-report", "--t-max", "2", "--samples", "10", "--seed", "4"]):
        a = run(capsys, *args)
        b = run(capsys, *args)
        assert a == b


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "padic_selfsim", "displacement", "--t-max", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "t,distance\n0,0\n1,2\n2,4\n"
