import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from numrad import acceptance
from numrad.cli import main, read_config
from numrad.report import Check, Report, dumps, schema, to_plain
from numrad.spaces import INF

VALIDATOR = jsonschema.Draft202012Validator(schema())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    lines = [json.loads(line) for line in out.splitlines() if line.strip()]
    for line in lines:
        VALIDATOR.validate(line)
    return code, lines, err


def test_rotation_example(capsys):
    code, [rep], _ = run(capsys, "radius", "--space", "lp(2,2)", "--field", "real", "--op", "[[0,-1],[1,0]]")
    assert code == 0
    assert abs(rep["results"]["value"]) <= 1e-12
    assert rep["contract"]["pass"]
    assert rep["provenance"]["methods"] == ["ClosedForm"]


def test_counterexample_example(capsys):
    code, [rep], _ = run(capsys, "counterexample", "--p", "2", "--q", "1", "--outer", "inf",
                         "--schedule", "32,64,128")
    assert code == 0
    assert rep["results"]["norm_S"] == pytest.approx(2 ** 0.5, abs=1e-3)
    assert rep["results"]["ve_S_upper"] <= 1 + 1e-6


@pytest.mark.parametrize("argv", [
    ["norm", "--space", "lp(3,3)", "--builder", "random"],
    ["index", "--space", "lp(2,inf)"],
    ["essential", "--builder", "harmonic:1", "--p", "3"],
    ["three-ball", "--builder", "harmonic:1", "--compact", "geometric"],
    ["msummand", "--space", "lp(3,3)", "--builder", "identity"],
    ["m-probe", "--space", "lp(3,2)", "--x", "[0.5,0,0]", "--y", "[1,0,0]", "--index-value", "0.5"],
    ["moduli", "--s", "c0", "--which", "sum_1"],
    ["farthest", "--space", "lp(3,3)", "--builder", "antisymmetric", "--samples", "5"],
    ["acpp", "--builder", "harmonic:2", "--p", "1.5"],
    ["perturb", "--builder", "harmonic:1", "--epsilon", "0.2"],
    ["radius", "--builder", "geometric:1:0.5", "--truncation", "32"],
    ["radius", "--space", "sum(inf; lp(2,1), lp(1,1))", "--builder", "shift", "--field", "complex"],
])
def test_subcommands_pass_and_validate(capsys, argv):
    code, lines, err = run(capsys, *argv)
    assert code == 0, err
    assert len(lines) == 1 and lines[0]["subcommand"] == argv[0]


def test_every_subcommand_is_in_the_schema():
    from numrad.cli import SUBCOMMANDS
    assert set(SUBCOMMANDS) <= set(schema()["properties"]["subcommand"]["enum"])


def test_contract_violation_exit_code(capsys):
    # an inequality index larger than the true ratio breaks the probe's contract
    code, [rep], err = run(capsys, "m-probe", "--space", "lp(2,2)", "--x", "[1,0]", "--y", "[1,0]",
                           "--index-value", "2")
    assert code == 2
    assert not rep["contract"]["pass"]
    assert "margin" in err


@pytest.mark.parametrize("argv,needle", [
    (["radius", "--space", "lp(2,x)", "--op", "[[1]]"], "column 6"),
    (["radius", "--space", "lp(2,2)", "--op", "[[1,2],\n[3 4]]"], "line 2 column 4"),
    (["radius", "--space", "lp(2,2)", "--builder", "nonsense"], "unknown builder"),
    (["radius", "--space", "lp(2,2)"], "need --op or --builder"),
    (["suite", "--preset", "nope"], "unknown preset"),
    (["acpp", "--space", "lp(2,2)", "--builder", "identity"], "tail operator"),
])
def test_errors_exit_one(capsys, argv, needle):
    code, lines, err = run(capsys, *argv)
    assert code == 1 and not lines
    assert needle in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# rotation\nspace = lp(2,2)\nop = [[0,-1],[1,0]]\nseed = 5\n")
    code, [rep], _ = run(capsys, "radius", "--config", str(cfg))
    assert code == 0 and rep["config"]["seed"] == 5
    code, [rep], _ = run(capsys, "radius", "--config", str(cfg), "--seed", "9")
    assert rep["config"]["seed"] == 9


def test_config_errors_carry_line_and_column(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("space = lp(2,2)\nseed = x\n")
    code, _, err = run(capsys, "radius", "--config", str(cfg))
    assert code == 1 and "bad.cfg:2:8" in err
    with pytest.raises(ValueError):
        (tmp_path / "u.cfg").write_text("colour = red\n")
        read_config(str(tmp_path / "u.cfg"))


def test_determinism_modulo_timestamp(capsys):
    argv = ["farthest", "--space", "lp(3,2)", "--builder", "random", "--samples", "5", "--seed", "11"]
    _, [a], _ = run(capsys, *argv)
    _, [b], _ = run(capsys, *argv)
    assert dumps(a["results"]) == dumps(b["results"])
    assert dumps(a["config"]) == dumps(b["config"])


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    for _ in range(2):
        assert main(["radius", "--space", "lp(2,3)", "--builder", "identity", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and capsys.readouterr().out == ""


def test_json_schema_flag(capsys):
    assert main(["--json-schema"]) == 0
    assert json.loads(capsys.readouterr().out)["title"] == "numrad experiment report"


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "numrad.cli", "radius", "--space", "lp(2,inf)",
                           "--op", "[[1,2],[0,1]]"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["value"] == 3


def test_report_serialization():
    assert dumps({"b": 0.1, "a": [1, True, None]}) == '{"a":[1,true,null],"b":0.10000000000000001}'
    assert to_plain(np.array([1 + 2j])) == [{"re": 1.0, "im": 2.0}]
    assert to_plain(INF) == "inf"
    assert dumps(float("nan")) == '"NaN"'
    rep = Report("radius", {"seed": 0}, {"v": 1.0}, {"methods": [], "package": "numrad"}, [Check("x", False, -1.0)])
    assert not rep.passed
    VALIDATOR.validate(json.loads(rep.line()))


def test_suite_preset_coverage():
    assert set(acceptance.PRESETS) == {"quick", "paper"}
    assert set(acceptance.PRESETS["paper"]["c12_repeat"]) == set(range(1, 12))
    assert set(acceptance.CRITERIA) | {12} == set(acceptance.NAMES) == set(range(1, 13))
