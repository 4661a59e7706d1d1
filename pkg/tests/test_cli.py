import json
import subprocess
import sys

import numpy as np
import pytest

from qilab import cones
from qilab.cli import canonical_json, emit, main, run
from qilab.states import MultiState
from qilab.tensorlab import Shape, random_density


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_pbt_bounds_report(capsys):
    code, out = _run(["pbt", "bounds", "--d", "2", "--eps", "0.1", "--json"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert abs(rep["result"]["N_lower_combined"] - 3.9204) < 1e-9
    for key in ("command", "seed", "tolerances", "version", "anchor"):
        assert key in rep
    assert rep["command"] == "pbt bounds" and rep["version"].startswith("v")


def test_cadney_file_is_a_verification_failure(tmp_path, capsys):
    f = tmp_path / "cadney.json"
    f.write_text(json.dumps(cones.cadney_vector().to_json()))
    code, out = _run(["cones", "check", "--file", str(f)], capsys)
    rep = json.loads(out)
    assert code == 2
    assert "liwi" in rep["result"]["violations"]
    assert rep["result"]["vn_type"]["passed"]


def test_quantum_vector_passes_check(tmp_path, capsys):
    v = cones.entropy_vector(random_density(16, seed=1), (2, 2, 2, 2))
    f = tmp_path / "v.json"
    f.write_text(json.dumps(v.to_json()))
    code, out = _run(["cones", "check", "--file", str(f)], capsys)
    assert code == 0 and json.loads(out)["result"]["violations"] == []


def test_usage_errors_exit_one(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["nosuch"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["pbt", "bounds", "--d", "2", "--eps", "0.1", "--bogus"])
    assert e.value.code == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["cones", "check", "--file", str(bad)]) == 1
    bad.write_text(json.dumps({"n": 2, "entries": [1, 2]}))
    assert main(["cones", "check", "--file", str(bad)]) == 1
    assert main(["pbt", "bounds", "--d", "2", "--eps", "0.9"]) == 1
    capsys.readouterr()


def test_sweep_csv_header(capsys):
    code, out = _run(["pbt", "sweep", "--d", "2", "--Nmax", "3", "--csv"], capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "d,N,F,eps_sim,lb_comm,lb_ns,lb_combined,achievable_N"
    assert len(lines) == 4 and lines[1].startswith("2,1,0.5,")


def test_determinism_and_out_file(tmp_path, capsys):
    argv = ["qes", "nm", "--scheme", "clifford", "--attacks", "3", "--seed", "5"]
    _, a = _run(argv, capsys)
    _, b = _run(argv, capsys)
    assert a == b
    out = tmp_path / "r.json"
    assert main(argv + ["--out", str(out)]) == 0
    assert out.read_text() == a


def test_emit_contract():
    assert emit({}, "json") == b"{}\n"
    assert emit({}, "csv") == b"key,value\n"
    assert emit({"result": {"columns": ["a", "b"], "rows": []}}, "csv") == b"a,b\n"
    rep = {"b": 1.0 / 3, "a": [1, 2.5, True, None], "c": {"z": np.float64(2e-20), "y": "s"}}
    text = canonical_json(rep)
    assert text == '{"a":[1,2.5,true,null],"b":0.333333333333,"c":{"y":"s","z":2e-20}}'
    back = json.loads(text)
    assert canonical_json(back) == text
    assert canonical_json({"x": float("nan")}) == '{"x":"nan"}'


def test_entropy_and_decouple_commands(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(json.dumps(MultiState(random_density(8, seed=2), Shape((2, 2, 2))).to_json()))
    code, out = _run(["entropy", "--state", str(f), "--kind", "I_cond", "--A", "0", "--B", "1", "--C", "2"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["result"]["quantity"]["value"] >= 0
    g = tmp_path / "ae.json"
    g.write_text(json.dumps(MultiState(random_density(8, seed=3), Shape((4, 2))).to_json()))
    code, out = _run(["decouple", "--state", str(g), "--split", "2,2", "--trials", "3"], capsys)
    assert code == 0 and len(json.loads(out)["result"]["distances"]) == 3
    assert main(["decouple", "--state", str(g), "--split", "3,2"]) == 1
    capsys.readouterr()


def test_convex_split_command(tmp_path, capsys):
    code, out = _run(["convex-split", "--k", "1", "--delta", "0.1"], capsys)
    assert code == 0 and json.loads(out)["result"]["split"]["n"] == 53151
    X = random_density(4, seed=4)
    a, e = np.trace(X.reshape(2, 2, 2, 2), axis1=1, axis2=3), np.trace(X.reshape(2, 2, 2, 2), axis1=0, axis2=2)
    f = tmp_path / "ae.json"
    f.write_text(json.dumps(MultiState(0.98 * np.kron(a, e) + 0.02 * X, Shape((2, 2))).to_json()))
    code, out = _run(["convex-split", "--k", "0.3", "--delta", "0.12", "--build", "--state", str(f)], capsys)
    assert code == 0 and json.loads(out)["result"]["build"]["in_guard"]
    code, out = _run(["convex-split", "--k", "1", "--delta", "0.1", "--build", "--state", str(f)], capsys)
    assert code == 0 and not json.loads(out)["result"]["build"]["in_guard"]


def test_qes_commands(capsys):
    code, out = _run(["qes", "nm", "--scheme", "injection"], capsys)
    assert code == 0 and abs(json.loads(out)["result"]["mutual_info"] - 2) < 1e-9
    code, out = _run(["qes", "nm", "--scheme", "pauli", "--attacks", "2"], capsys)
    assert code == 0 and json.loads(out)["result"]["nm_holds"] is False
    code, out = _run(["qes", "auth", "--scheme", "tagged-clifford", "--n", "1", "--attacks", "2"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["result"]["max_gyz_residual"] <= rep["result"]["ceiling"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qilab", "cones", "independence"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["certificate_checks"]["valid"]


def test_selftest_summary_matches_exit_code(capsys):
    report, code, _ = run(["selftest", "--seed", "1"])
    res = report["result"]
    assert res["total"] == 12
    assert res["passed"] == sum(c["passed"] for c in res["criteria"])
    assert code == (0 if res["passed"] == res["total"] else 2)
    capsys.readouterr()


def test_cadney_report_feeds_check(tmp_path, capsys):
    f = tmp_path / "v.json"
    assert main(["cones", "cadney", "--out", str(f)]) == 0
    assert main(["cones", "check", "--file", str(f)]) == 2
    capsys.readouterr()
