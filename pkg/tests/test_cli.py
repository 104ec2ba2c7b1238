import json
import subprocess
import sys

import pytest

from hftcube.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, parse_gen, run
from hftcube.hft import dumps
from hftcube.instances import grid


def out_of(capsys, argv):
    code = run(argv)
    return code, capsys.readouterr()


@pytest.mark.parametrize("argv", [
    ["validate", "--gen", "grid:2,3"],
    ["build", "--gen", "transverse:3"],
    ["dualize", "--gen", "nested:3"],
    ["verify-duality", "--gen", "flats:abcaabbc"],
    ["median", "--gen", "grid:2,2", "--points", "x", "y", "0,2,0"],
    ["path", "--gen", "gamma:2"],
    ["trim", "--gen", "gamma:2"],
    ["collapse", "--gen", "flats:abcaabbc", "--r", "1"],
    ["firewall", "--gen", "flats:aacbb"],
    ["sep-distance", "--gen", "gamma:2", "--firewall"],
    ["fuzz", "--count", "5", "--caps", "4,5,2"],
])
def test_subcommands_pass(argv, capsys):
    code, cap = out_of(capsys, argv)
    assert code == EXIT_PASS, cap.out + cap.err


def test_sep_distance_prints_number(capsys):
    code, cap = out_of(capsys, ["sep-distance", "--gen", "grid:3,3"])
    assert code == EXIT_PASS and cap.out.strip() == "1"
    code, cap = out_of(capsys, ["sep-distance", "--gen", "gamma:3", "--firewall"])
    assert cap.out.strip() == "6"


def test_json_output(capsys):
    code, cap = out_of(capsys, ["validate", "--gen", "grid:2,3", "--json"])
    doc = json.loads(cap.out)
    assert code == EXIT_PASS and doc["status"] == "pass" and doc["schema_version"] == 1


def test_failures_exit_one(capsys):
    code, _ = out_of(capsys, ["build", "--gen", "grid:4,4,4", "--budget-q", "10"])
    assert code == EXIT_FAIL
    code, _ = out_of(capsys, ["path", "--gen", "grid:2,2", "--from", "0,0,5"])
    assert code == EXIT_FAIL


def test_usage_errors_exit_two(tmp_path, capsys):
    assert run(["validate", "--gen", "pentagon:3"]) == EXIT_USAGE
    assert run(["validate"]) == EXIT_USAGE
    assert run(["validate", "--instance", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert run(["path", "--gen", "grid:2,2", "--from", "0,0"]) == EXIT_USAGE
    for argv in (["nonsense"], ["build", "--gen", "grid:1", "--instance", "f"],
                 ["build", "--gen", "grid:1", "--budget-q", "0"]):
        with pytest.raises(SystemExit) as exc:
            run(argv)
        assert exc.value.code == EXIT_USAGE
    capsys.readouterr()


def test_instance_file(tmp_path, capsys):
    f = tmp_path / "g.json"
    f.write_text(dumps(grid([1, 2])))
    code, cap = out_of(capsys, ["build", "--instance", str(f), "--json"])
    assert code == EXIT_PASS
    assert json.loads(cap.out)["info"]["points"] == 6


def test_out_directory_contents(tmp_path, capsys):
    d = tmp_path / "build"
    run(["build", "--gen", "grid:2,3", "--out", str(d), "--dot", str(tmp_path / "q.dot")])
    names = {p.name for p in d.iterdir()}
    assert {"report.json", "vertices.tsv", "edges.tsv", "q.png"} <= names
    assert (tmp_path / "q.dot").read_text().startswith("graph")
    rows = (d / "vertices.tsv").read_text().splitlines()
    assert len(rows) == 1 + 12 and "\t" in rows[0]
    d2 = tmp_path / "table"
    run(["sep-distance", "--table", "3", "--out", str(d2)])
    assert {"sep_table.tsv", "sep_table.png", "report.json"} <= {p.name for p in d2.iterdir()}
    capsys.readouterr()


def test_reports_are_reproducible(tmp_path, capsys):
    for cmd in (["verify-duality", "--gen", "random:7:5,6,3"], ["path", "--gen", "gamma:2"],
                ["fuzz", "--count", "4", "--seed", "3"]):
        a, b = tmp_path / "a", tmp_path / "b"
        run(cmd + ["--out", str(a)])
        run(cmd + ["--out", str(b)])
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes(), cmd
    capsys.readouterr()


def test_parse_gen():
    h, rts = parse_gen("flats:ab")
    assert rts is not None and len(h.domains) == 3
    h, rts = parse_gen("random:4:3,4,2")
    assert rts is None and len(h.domains) <= 3


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "hftcube.cli", "validate", "--gen", "grid:1,1"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
