import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from fitzlab.cli import describe, main
from fitzlab.reports import CHECKS

ROOT = Path(__file__).resolve().parent.parent
FULL = ROOT / "configs" / "full.json"


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_full_config_passes(capsys):
    code, out, _ = _run(capsys, "run", str(FULL))
    assert code == 0
    lines = [json.loads(s) for s in out.splitlines()]
    assert {r["verdict"] for r in lines} == {"pass"}
    for r in lines:
        assert list(r)[:5] == ["check", "anchor", "verdict", "tol", "probes"]
        assert r["anchor"]


def test_nonmaximal_config_fails_with_witness(capsys):
    code, out, _ = _run(capsys, "run", str(ROOT / "configs" / "nonmaximal.json"))
    assert code == 1
    reps = [json.loads(s) for s in out.splitlines()]
    assert reps[0]["verdict"] == "pass"
    assert reps[1]["check"] == "maximality" and reps[1]["verdict"] == "fail" and reps[1]["witnesses"]


def test_exhausted_exit_code(tmp_path, capsys):
    cfg = {
        "space": {"dim": 1, "norm": "l2"},
        "operators": [{"name": "id", "kind": "linear", "A": [[1.0]], "grid": {"radius": 4.0, "spacing": 0.1}}],
        "functions": [{"name": "phi", "kind": "fitzpatrick", "operator": "id", "grid": {"radius": 2.0, "m": 5}}],
        "checks": [{"check": "br_search", "function": "phi", "x": 1.0, "xstar": 0.0, "eps": 0.3, "lambda": 0.3}],
    }
    code, out, _ = _run(capsys, "run", _write(tmp_path, cfg))
    assert code == 3 and json.loads(out)["verdict"] == "exhausted"


def test_parse_error_reports_location(tmp_path, capsys):
    code, out, err = _run(capsys, "run", _write(tmp_path, '{"space": {"dim": 1,,}}'))
    assert code == 2 and out == ""
    assert "cfg.json:1:" in err


@pytest.mark.parametrize("cfg", [
    {"space": {"dim": 1}, "checks": [{"check": "nope"}]},
    {"space": {"dim": 1}, "checks": [{"check": "monotonicity", "operator": "missing"}]},
    {"space": {"dim": 9}, "checks": []},
])
def test_invalid_config_exit_2(tmp_path, capsys, cfg):
    code, _, err = _run(capsys, "run", _write(tmp_path, cfg))
    assert code == 2 and "invalid config" in err


def test_missing_file(capsys):
    code, _, err = _run(capsys, "run", "/nonexistent/cfg.json")
    assert code == 2 and "cannot read" in err


def test_csv_format(capsys):
    code, out, _ = _run(capsys, "run", str(FULL), "--format=csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["verdict"] == "pass" for r in rows)
    assert list(rows[0]) == ["check", "verdict", "anchor", "probes", "tol", "first_violation", "details"]
    json.loads(rows[0]["tol"])


def test_parallel_keeps_order_and_bytes(capsys):
    _, seq, _ = _run(capsys, "run", str(FULL))
    _, par, _ = _run(capsys, "run", str(FULL), "--parallel")
    assert seq == par


def test_tol_scale_changes_tolerances(capsys):
    _, a, _ = _run(capsys, "run", str(FULL))
    _, b, _ = _run(capsys, "run", str(FULL), "--tol-scale=2")
    ta = json.loads(a.splitlines()[7])["tol"]
    tb = json.loads(b.splitlines()[7])["tol"]
    assert tb["tol"] == pytest.approx(2 * ta["tol"])
    with pytest.raises(SystemExit) as exc:
        main(["run", str(FULL), "--tol-scale=0"])
    assert exc.value.code == 2


def test_describe_every_check(capsys):
    for name in CHECKS:
        code, out, _ = _run(capsys, "describe", name)
        assert code == 0 and out.startswith(name) and "anchor:" in out and "parameters:" in out
    assert describe("sum_rule").count("\n") == 3


def test_describe_unknown(capsys):
    code, _, err = _run(capsys, "describe", "bogus")
    assert code == 2 and "valid checks" in err and "sum_rule" in err


def test_module_entry_point_and_determinism():
    env = dict(os.environ)
    outs = [subprocess.run([sys.executable, "-m", "fitzlab", "run", str(FULL)], capture_output=True, env=env)
            for _ in range(2)]
    assert all(o.returncode == 0 for o in outs)
    assert outs[0].stdout == outs[1].stdout and outs[0].stdout
