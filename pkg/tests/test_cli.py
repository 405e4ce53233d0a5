"""End-to-end runs of every subcommand through ``run(argv)``."""

import json
import math

import pytest

from advbound.adversary import gamma_to_dict
from advbound.boolfn import function_to_dict, make_family
from advbound.cli import SCHEMA, load_function, run
from advbound.solver import SolverOptions, certify, gadget_cost_adv


def invoke(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    report = json.loads(out.out) if out.out.strip().startswith("{") else None
    return code, report, out.err


def test_parse_reports_ast(capsys):
    code, report, err = invoke(capsys, ["parse", "(x1&x2)|~x3"])
    assert code == 0
    assert report["schema"] == SCHEMA
    assert report["tool"]["name"] == "advbound"
    assert report["command"] == ["parse", "(x1&x2)|~x3"]
    assert report["results"]["n"] == 3
    assert report["results"]["variables"] == [1, 2, 3]
    assert report["results"]["read_once"] is True
    assert report["results"]["ast"]["op"] == "or"
    assert len(report["inputs_digest"]) == 64
    assert "parse:" in err


def test_parse_error_is_usage_error(capsys):
    code, report, err = invoke(capsys, ["parse", "x1 &"])
    assert code == 2
    assert report is None
    assert err.startswith("error:")


def test_bound_matches_library(capsys):
    code, report, _ = invoke(capsys, ["bound", "--family", "or", "--n", "2", "--restarts", "2"])
    assert code == 0
    cert = certify(make_family("or", 2), (1.0, 1.0), SolverOptions(restarts=2))
    got = report["results"]["certificate"]
    assert got["lower"]["value"] == cert.lower_value
    assert got["upper"]["value"] == cert.upper_value
    assert report["seed"] == 0
    assert report["inputs"]["alpha"] == [1.0, 1.0]


def test_bound_with_costs(capsys):
    code, report, _ = invoke(
        capsys,
        ["bound", "--family", "and", "--n", "2", "--alpha", "3,4", "--restarts", "2", "--seed", "5"],
    )
    assert code == 0
    got = report["results"]["certificate"]
    assert got["lower"]["value"] <= 5.0 + 1e-9
    assert 5.0 <= got["upper"]["value"] + 1e-9
    assert report["seed"] == 5


def test_bound_input_validation(capsys):
    assert invoke(capsys, ["bound", "--family", "or"])[0] == 2  # missing --n
    assert invoke(capsys, ["bound", "--formula", "x1", "--family", "or", "--n", "1"])[0] == 2
    assert invoke(capsys, ["bound"])[0] == 2
    assert invoke(capsys, ["bound", "--family", "or", "--n", "2", "--alpha", "1"])[0] == 2


def test_bound_from_table_file(capsys, tmp_path):
    path = tmp_path / "parity.json"
    path.write_text(json.dumps(function_to_dict(make_family("parity", 2))))
    code, report, _ = invoke(capsys, ["bound", "--table", str(path), "--restarts", "2"])
    assert code == 0
    got = report["results"]["certificate"]
    assert got["lower"]["value"] <= 2.0 + 1e-9 <= got["upper"]["value"] + 2e-9


def test_gadget_values(capsys):
    code, report, err = invoke(capsys, ["gadget", "--gate", "and", "--beta", "3,4"])
    assert code == 0
    assert report["results"]["value"] == 5.0
    assert report["inputs"] == {"gate": "and", "beta": [3.0, 4.0]}
    rows = {r["x"]: r["p"] for r in report["results"]["witness"]["rows"]}
    assert rows["01"] == [1.0, 0.0]
    assert "gadget and" in err


def test_gadget_argument_errors(capsys):
    assert invoke(capsys, ["gadget", "--gate", "xor", "--beta", "1,1"])[0] == 2
    assert invoke(capsys, ["gadget", "--gate", "and", "--beta", "1,2,3"])[0] == 2
    assert invoke(capsys, ["gadget", "--gate", "and"])[0] == 2


def test_readonce_weighted(capsys):
    code, report, _ = invoke(capsys, ["readonce", "(x1|x2)&~x3", "--alpha", "3,4,12"])
    assert code == 0
    assert report["results"]["value"] == 13.0
    assert report["results"]["n"] == 3
    assert report["results"]["trace"]["op"] == "and"


def test_readonce_rejects_repeats(capsys):
    code, _, err = invoke(capsys, ["readonce", "x1&x1"])
    assert code == 2
    assert "error:" in err


def test_compose(capsys):
    code, report, _ = invoke(
        capsys,
        ["compose", "--outer", "family:and:2", "--inner", "family:or:2", "--inner", "formula:x1&x2"],
    )
    assert code == 0
    assert report["results"]["total_arity"] == 4
    assert report["results"]["offsets"] == [1, 3]
    assert len(report["results"]["function"]["rows"]) == 16


def test_compose_bad_spec(capsys):
    code, _, err = invoke(capsys, ["compose", "--outer", "nope:and", "--inner", "family:or:2"])
    assert code == 2
    assert "unknown function spec" in err


def test_verify_composition_passes(capsys):
    code, report, err = invoke(
        capsys,
        [
            "verify-composition",
            "--outer", "family:and:2",
            "--inner", "family:or:2",
            "--inner", "family:or:2",
            "--restarts", "2",
        ],
    )
    assert code == 0
    assert report["results"]["ok"] is True
    assert report["results"]["lhs"]["lower"] <= 2.0 + 1e-9
    assert "PASS" in err


def test_verify_iteration_passes(capsys):
    code, report, _ = invoke(
        capsys,
        ["verify-iteration", "--family", "nand", "--n", "2", "--d", "2", "--restarts", "2"],
    )
    assert code == 0
    assert report["results"]["ok"] is True


def test_verify_iteration_depth_cap(capsys):
    code, _, err = invoke(
        capsys, ["verify-iteration", "--family", "nand", "--n", "2", "--d", "3", "--restarts", "2"]
    )
    assert code == 2
    assert "error:" in err


def test_check_gamma_valid(capsys, tmp_path):
    _, gamma, _ = gadget_cost_adv("and", (3.0, 4.0))
    path = tmp_path / "gamma.json"
    path.write_text(json.dumps(gamma_to_dict(gamma)))
    code, report, err = invoke(capsys, ["check-gamma", "--matrix", str(path)])
    assert code == 0
    assert report["results"]["ok"] is True
    assert "PASS" in err


def test_check_gamma_invalid_exits_one(capsys, tmp_path):
    _, gamma, _ = gadget_cost_adv("and", (3.0, 4.0))
    data = gamma_to_dict(gamma)
    data["entries"][0][1] = data["entries"][1][0] = 2.0  # same-output pair 00,01
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, report, err = invoke(capsys, ["check-gamma", "--matrix", str(path)])
    assert code == 1
    assert report["results"]["ok"] is False
    assert report["results"]["violations"]
    assert "FAIL" in err


def test_check_gamma_function_flags_override(capsys, tmp_path):
    _, gamma, _ = gadget_cost_adv("and", (1.0, 1.0))
    data = gamma_to_dict(gamma)
    del data["function"]
    path = tmp_path / "raw.json"
    path.write_text(json.dumps(data))
    # without a function the matrix is unusable ...
    assert invoke(capsys, ["check-gamma", "--matrix", str(path)])[0] == 2
    # ... with one it validates
    code, report, _ = invoke(
        capsys, ["check-gamma", "--matrix", str(path), "--family", "and", "--n", "2"]
    )
    assert code == 0 and report["results"]["ok"] is True


def test_check_gamma_bad_files(capsys, tmp_path):
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    assert invoke(capsys, ["check-gamma", "--matrix", str(garbled)])[0] == 2
    assert invoke(capsys, ["check-gamma", "--matrix", str(tmp_path / "missing.json")])[0] == 2


def test_reports_identical_except_timing(capsys):
    _, first, _ = invoke(capsys, ["gadget", "--gate", "or", "--beta", "1,1"])
    _, second, _ = invoke(capsys, ["gadget", "--gate", "or", "--beta", "1,1"])
    first.pop("timing")
    second.pop("timing")
    assert first == second


def test_bound_deterministic_across_runs(capsys):
    argv = ["bound", "--family", "or", "--n", "2", "--restarts", "2", "--jobs", "2"]
    _, first, _ = invoke(capsys, argv)
    _, second, _ = invoke(capsys, argv)
    first.pop("timing")
    second.pop("timing")
    assert first == second


def test_digest_tracks_inputs(capsys):
    _, a, _ = invoke(capsys, ["gadget", "--gate", "and", "--beta", "1,1"])
    _, b, _ = invoke(capsys, ["gadget", "--gate", "and", "--beta", "1,2"])
    assert a["inputs_digest"] != b["inputs_digest"]


def test_load_function_specs():
    assert load_function("family:or:2") == make_family("or", 2)
    assert load_function("formula:x1&x2") == make_family("and", 2)
    with pytest.raises(ValueError):
        load_function("family:or")
    with pytest.raises(ValueError):
        load_function("mystery:or:2")


def test_no_subcommand_is_usage_error(capsys):
    assert run([]) == 2
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "advbound" in capsys.readouterr().out
