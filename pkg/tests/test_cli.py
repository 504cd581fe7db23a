"""The command-line front end and the report plumbing."""

import json
from fractions import Fraction

from qdyb.cli import main
from qdyb.scalars import QContext, qnum
from qdyb.tensor import TensorOp
from qdyb.verify import RunConfig, run_suite, strip_timing
from qdyb.weights import SLnParams


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_and_dump_roundtrip(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "build", "--n", "2", "--q", "2",
                           "--beta", "1", "--p", "p12=2")
    assert code == 0
    doc = json.loads(out)
    R = TensorOp.load(doc["rhat_dynamical"])
    assert R.entry((1, 2), (2, 1)) == Fraction(6, 11)
    assert R.dump() == doc["rhat_dynamical"]

    code, out, _ = run_cli(capsys, "dump", "rhat-constant", "--n", "3",
                           "--q", "5/2", "--p", "p12=1,p23=1")
    assert code == 0
    doc = json.loads(out)
    ctx = QContext(Fraction(5, 2), 3)
    from qdyb.rmatrix import build_dj
    assert TensorOp.load(doc) == build_dj(3, ctx)


def test_params_file_flow(tmp_path, capsys):
    params = SLnParams(QContext(Fraction(2), 2), [Fraction(1)])
    f = tmp_path / "params.json"
    f.write_text(json.dumps(params.to_json()))
    code, out, _ = run_cli(capsys, "dump", "params", "--params", str(f),
                           "--p", "p12=2")
    assert code == 0
    assert json.loads(out) == params.to_json()


def test_pole_exits_2(capsys):
    # beta tuned so f(2, beta) = 0
    ctx = QContext(Fraction(2), 2)
    beta = -ctx.qbar**2 / qnum(2, ctx)
    code, _, err = run_cli(capsys, "build", "--n", "2", "--q", "2",
                           "--beta=%s" % beta, "--p", "p12=2")
    assert code == 2
    assert "pole" in err


def test_bad_usage_exits_2(capsys):
    code, _, err = run_cli(capsys, "dump", "params", "--n", "2")
    assert code == 2


def test_verify_exit_codes(capsys):
    code, out, _ = run_cli(capsys, "verify", "params", "--n", "2",
                           "--draws", "2", "--points", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "pass" and doc["schema"] == "qdyb-report/1"

    code, out, _ = run_cli(capsys, "verify", "params", "--n", "2",
                           "--draws", "2", "--corrupt", "beta")
    assert code == 1
    doc = json.loads(out)
    assert any(r["status"] == "fail"
               for rep in doc["reports"] for r in rep["records"])


def test_report_determinism():
    cfg = RunConfig(n=2, draws=2, points=2, seed=11)
    a = strip_timing(run_suite("qdybe", cfg))
    b = strip_timing(run_suite("qdybe", RunConfig(n=2, draws=2, points=2,
                                                  seed=11)))
    assert json.dumps(a, sort_keys=True, default=str) \
        == json.dumps(b, sort_keys=True, default=str)


def test_report_records_sorted():
    rep = run_suite("params", RunConfig(n=2, draws=2, seed=5))
    ids = [r["id"] for r in rep["records"]]
    assert ids == sorted(ids)


def test_derive_builtin_and_script(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "derive", "--n", "2", "--builtin",
                           "D1,D3", "--points", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "pass" and len(doc["records"]) == 2

    from qdyb.qmatrix import builtin_derivations, derivation_to_json
    script = tmp_path / "d4.json"
    script.write_text(derivation_to_json(builtin_derivations(2)["D4"]))
    code, out, _ = run_cli(capsys, "derive", "--n", "2", "--script",
                           str(script), "--points", "2")
    assert code == 0

    bad = tmp_path / "bad.json"
    d = builtin_derivations(2)["D4"]
    d = dict(d)
    d["moves"] = [{"move": "intertwine", "at": 0, "dir": "lr"}]
    bad.write_text(derivation_to_json(d))
    code, out, _ = run_cli(capsys, "derive", "--n", "2", "--script",
                           str(bad), "--points", "2")
    assert code == 1
    doc = json.loads(out)
    assert "move[0]" in doc["records"][0]["id"]


def test_wznw_command(capsys):
    code, out, _ = run_cli(capsys, "wznw", "--n", "2", "--q", "4",
                           "--root", "2", "--beta", "1", "--p", "p12=1")
    assert code == 0
    doc = json.loads(out)
    assert doc["casimir"] == "0"
    assert doc["dimensions"] == ["-3/2", "1/2"]
    assert all(r["status"] == "pass" for r in doc["normalization"])


def test_prime_backend_suite():
    rep = run_suite("params", RunConfig(n=2, draws=2, seed=5,
                                        backend="prime"))
    assert rep["status"] == "pass"
    assert rep["backend"].startswith("prime(")


def test_runconfig_roundtrip():
    cfg = RunConfig(n=3, q="5/2", beta=["1", "2"], alpha="unit", draws=4,
                    points=2, seed=9, backend="prime", corrupt=None)
    doc = cfg.to_json()
    back = RunConfig.from_json(doc)
    assert back.to_json() == doc
