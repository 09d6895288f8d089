import io
import json
import subprocess
import sys

import pytest

from curvecluster.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def a2_seed(tmp_path):
    path = tmp_path / "a2.json"
    path.write_text(json.dumps({"m": 2, "variables": ["x1", "x2"], "matrix": [[0, 1], [-1, 0]]}))
    return str(path)


@pytest.fixture
def torus_seed(tmp_path):
    path = tmp_path / "torus.json"
    path.write_text(json.dumps({"m": 3, "matrix": [[0, 2, -2], [-2, 0, 2], [2, -2, 0]]}))
    return str(path)


def test_matrix_builtins():
    code, out = run("matrix", "--surface", "sigma_0_4_twoB")
    assert code == EXIT_OK
    rows = [line for line in out.splitlines() if not line.startswith("#")]
    assert rows == ["0 0 0 0 1 -1", "0 0 0 0 1 -1", "0 0 0 0 -1 1", "0 0 0 0 -1 1",
                    "-1 -1 1 1 0 0", "1 1 -1 -1 0 0"]
    assert "# g=0 n=4 m=6 t=4" in out
    code, out = run("matrix", "--surface", "sigma_1_1")
    assert out.splitlines()[:3] == ["0 2 -2", "-2 0 2", "2 -2 0"]


def test_matrix_input_errors(tmp_path):
    assert run("matrix", "--surface", str(tmp_path / "missing.json"))[0] == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text('{"pieces": [{"kind": "A", "edges": [1, 2, 3]}]}')
    assert run("matrix", "--surface", str(bad))[0] == EXIT_INPUT
    assert run("matrix")[0] == EXIT_INPUT


def test_mutate(a2_seed, torus_seed):
    code, out = run("mutate", "--seed", a2_seed, "--word", "1")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["vars"] == ["x1^-1*x2 + x1^-1", "x2"]
    assert data["matrix"] == [[0, -1], [1, 0]]
    _, original = run("mutate", "--seed", a2_seed)
    assert run("mutate", "--seed", a2_seed, "--word", "1,1")[1] == original
    assert run("mutate", "--seed", torus_seed, "--word", "9")[0] == EXIT_INPUT
    assert run("mutate", "--seed", torus_seed, "--word", "x")[0] == EXIT_INPUT


def test_flipgraph(tmp_path, a2_seed):
    out_path = tmp_path / "g.json"
    code, out = run("flipgraph", "--seed", a2_seed, "--depth", "5", "--out", str(out_path))
    assert code == EXIT_OK
    assert out.strip() == "nodes 5 edges 5 frontier 0 partial false"
    graph = json.loads(out_path.read_text())
    assert len(graph["nodes"]) == 5 and len(graph["edges"]) == 5
    assert out_path.with_suffix(".dot").read_text().startswith("graph")
    assert run("flipgraph", "--seed", a2_seed)[0] == EXIT_INPUT
    assert run("flipgraph", "--seed", a2_seed, "--depth", "-1")[0] == EXIT_INPUT
    code, out = run("flipgraph", "--surface", "sigma_1_1", "--depth", "4", "--node-cap", "3")
    assert code == EXIT_OK and out.rstrip().endswith("partial true")


def test_laurent(torus_seed):
    code, out = run("laurent", "--seed", torus_seed, "--word", "1")
    assert code == EXIT_OK
    assert out.splitlines() == ["x1 = x1^-1*x2^2 + x1^-1*x3^2", "x2 = x2", "x3 = x3"]
    code, out = run("laurent", "--surface", "sigma_0_4_twoB", "--word", "6,1,2")
    assert code == EXIT_OK and len(out.splitlines()) == 6


def test_laurent_violation_exits_one(tmp_path):
    path = tmp_path / "bogus.json"
    path.write_text(json.dumps({"m": 2, "matrix": [[0, 1], [-1, 0]], "vars": ["x1 + 1", "x2"]}))
    code, out = run("laurent", "--seed", str(path), "--word", "1")
    assert code == EXIT_FAIL and out.startswith("laurent violation")


def test_upper(torus_seed, a2_seed):
    code, out = run("upper", "--seed", torus_seed, "--depth", "3",
                    "--candidate", "(x1^2 + x2^2 + x3^2)/(x1*x2*x3)")
    assert code == EXIT_OK and out.splitlines()[-1] == "true"
    assert all(line.startswith("laurent") for line in out.splitlines()[:-1])
    code, out = run("upper", "--seed", a2_seed, "--depth", "1", "--candidate", "1/x1")
    assert code == EXIT_OK and out.splitlines()[-1] == "false"
    assert any(line.startswith("not-laurent") for line in out.splitlines())
    assert run("upper", "--seed", a2_seed, "--depth", "1", "--candidate", "1/(")[0] == EXIT_INPUT


def test_verify_rho():
    code, out = run("verify-rho", "--surface", "sigma_0_4_twoB", "--depth", "2")
    assert code == EXIT_OK
    assert out.splitlines()[-1] == "result pass"
    assert any(line.startswith("identity case8-I") for line in out.splitlines())
    assert run("verify-rho", "--surface", "elsewhere", "--depth", "1")[0] == EXIT_INPUT


def test_grade(tmp_path):
    path = tmp_path / "exprs.json"
    path.write_text(json.dumps({"punctures": 3, "expressions": [
        {"name": "v1", "terms": [{"atoms": [{"vertex": 1}]}]},
        {"name": "arc", "terms": [{"coeff": 2, "atoms": [{"arc": "a", "ends": [1, 2]}]}]},
        {"name": "mixed", "terms": [{"atoms": [{"arc": "a", "ends": [1, 2]}]},
                                    {"atoms": [{"vertex": 1}]}]},
        {"name": "loop", "terms": [{"atoms": [{"const": "contractible"}, {"loop": "g"}]}]},
    ]}))
    code, out = run("grade", str(path))
    assert code == EXIT_OK
    assert out.splitlines() == ["v1\t[-2, 0, 0]", "arc\t[1, 1, 0]", "mixed\tinhomogeneous",
                                "loop\t[0, 0, 0]"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"punctures": 1, "expressions": [
        {"terms": [{"atoms": [{"vertex": 4}]}]}]}))
    assert run("grade", str(bad))[0] == EXIT_INPUT
    assert run("grade", str(tmp_path / "none.json"))[0] == EXIT_INPUT


def test_output_is_deterministic(torus_seed):
    args = ("flipgraph", "--seed", torus_seed, "--depth", "3")
    assert run(*args) == run(*args)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "curvecluster.cli", "matrix", "--surface", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_INPUT and "error" in proc.stderr
