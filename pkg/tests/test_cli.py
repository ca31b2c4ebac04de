import json
from pathlib import Path

import jsonschema
import pytest

from maxsyn.cli import main
from maxsyn.cnf import VarKind, WeightedCnf, write_wcnf
from maxsyn.weights import INV_SQRT2

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "output-schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--output", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return code, doc


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def test_schema_is_valid():
    jsonschema.Draft202012Validator.check_schema(SCHEMA)


def test_synth_s(capsys, files):
    s = files("s.qc", "S 0\n")
    code, out = run(capsys, "synth", "--spec", s, "--mode", "exact", "--encoding", "lc", "--basis", "pb", "--max-depth", "4")
    assert code == 0
    assert "T 0\nLAYER\nT 0" in out
    assert "depth: 2" in out
    code, doc = run_json(capsys, "synth", "--spec", s, "--encoding", "lc", "--basis", "pb")
    assert doc["found"] and doc["depth"] == 2
    assert doc["log"][0]["score_norm"] == pytest.approx(0.854, abs=1e-3)


def test_synth_rz(capsys, files):
    rz = files("rz.qc", "RZ(pi/8) 0\n")
    code, doc = run_json(capsys, "synth", "--spec", rz, "--mode", "approx", "--eps", "0.05", "--basis", "pb", "--encoding", "cyclic")
    assert code == 0
    assert doc["circuit"].strip().splitlines()[-1] == "T 0"
    assert doc["fidelity"] == pytest.approx(0.962, abs=1e-3)


def test_synth_not_found_exit_2(capsys, files):
    t = files("t.qc", "T 0\n")
    code, doc = run_json(capsys, "synth", "--spec", t, "--gates", "H", "--max-depth", "2")
    assert code == 2 and not doc["found"]


def test_synth_missing_file(capsys, tmp_path):
    code = main(["synth", "--spec", str(tmp_path / "nope.qc")])
    captured = capsys.readouterr()
    assert code == 1
    assert "error" in captured.err


def test_synth_error_json(capsys, tmp_path):
    code, doc = run_json(capsys, "synth", "--spec", str(tmp_path / "nope.qc"))
    assert code == 1 and doc["command"] == "synth" and doc["error"]


def test_synth_validation_errors(capsys, files):
    s = files("s.qc", "S 0\n")
    assert main(["synth", "--spec", s, "--mode", "approx"]) == 1
    assert main(["synth", "--spec", s, "--encoding", "lc", "--basis", "cb"]) == 1
    u = files("u.txt", "1\n1 0\n0 1j\n")
    assert main(["synth", "--spec", u, "--basis", "pb"]) == 1
    capsys.readouterr()


def test_synth_unitary_defaults_to_cb(capsys, files):
    u = files("u.txt", "1\n1 0\n0 1j\n")
    code, doc = run_json(capsys, "synth", "--spec", u)
    assert code == 0 and doc["basis"] == "cb" and doc["depth"] == 2


def test_synth_dump_cnf(capsys, files, tmp_path):
    s = files("s.qc", "S 0\n")
    code, _ = run(capsys, "synth", "--spec", s, "--encoding", "lc", "--dump-cnf", str(tmp_path / "f.{depth}.wcnf"))
    assert code == 0
    assert (tmp_path / "f.1.wcnf").exists() and (tmp_path / "f.2.wcnf").exists()


def test_check_eq(capsys, files):
    a = files("a.qc", "S 0\n")
    b = files("b.qc", "T 0\nLAYER\nT 0\n")
    c = files("c.qc", "T 0\n")
    code, doc = run_json(capsys, "check-eq", a, b, "--encoding", "cyclic", "--basis", "cb")
    assert code == 0 and doc["equivalent"]
    assert doc["abs_raw"] == pytest.approx(2)
    code, doc = run_json(capsys, "check-eq", a, c, "--encoding", "lc")
    assert code == 2 and not doc["equivalent"]
    assert doc["score"] == pytest.approx(0.8536, abs=1e-4)
    code, doc = run_json(capsys, "check-eq", a, b, "--encoding", "linear")
    assert code == 0


def test_check_eq_linear_rejects_cb(capsys, files):
    a = files("a.qc", "S 0\n")
    assert main(["check-eq", a, a, "--encoding", "linear", "--basis", "cb"]) == 1
    capsys.readouterr()


def test_fidelity(capsys, files):
    a = files("a.qc", "H 0\nLAYER\nCX 0 1\n")
    code, doc = run_json(capsys, "fidelity", a, a)
    assert code == 0 and doc["fidelity"] == pytest.approx(1)
    rz = files("rz.qc", "RZ(pi/8) 0\n")
    t = files("t.qc", "T 0\n")
    code, doc = run_json(capsys, "fidelity", rz, t)
    assert doc["fidelity"] == pytest.approx(0.962, abs=1e-3)
    assert doc["raw"]["re"] == pytest.approx(3.848, abs=1e-3)


def test_count(capsys, tmp_path):
    f = WeightedCnf()
    q, h, r = f.fresh_vars(VarKind.STATE, 1) + f.fresh_vars(VarKind.AUX, 2)
    f.set_weight(h, INV_SQRT2)
    f.set_weight(r, -1)
    f.add_clause((h,))
    f.add_clause((-r, q))
    f.add_clause((r, -q))
    f.add_clause((q,))
    path = tmp_path / "m.wcnf"
    write_wcnf(f, path)
    code, doc = run_json(capsys, "count", str(path))
    assert code == 0
    assert doc["count"]["re"] == pytest.approx(-INV_SQRT2.__complex__().real)


def test_count_max_threshold(capsys, tmp_path):
    f = WeightedCnf()
    s = f.fresh_var(VarKind.SELECT)
    a = f.fresh_var(VarKind.AUX)
    f.set_weight(a, 3)
    f.add_clause((-s, a))
    f.add_clause((s, -a))
    path = tmp_path / "m.wcnf"
    write_wcnf(f, path)
    code, doc = run_json(capsys, "count", str(path), "--max")
    assert code == 0 and doc["objective"] == pytest.approx(3)
    assert doc["best_assignment"] == {str(s): True}
    code, doc = run_json(capsys, "count", str(path), "--max", "--threshold", "5")
    assert code == 2 and not doc["threshold_hit"]


def test_count_bad_file(capsys, tmp_path):
    p = tmp_path / "bad.wcnf"
    p.write_text("p wcnf 1 1\n1 2 0\n")
    code, doc = run_json(capsys, "count", str(p))
    assert code == 1 and "error" in doc


def test_bench_gen(capsys, tmp_path):
    out = tmp_path / "b.qc"
    code, doc = run_json(capsys, "bench", "gen", "-n", "2", "-d", "3", "--seed", "7", "--irreducible", "--out", str(out))
    assert code == 0
    first = out.read_text()
    assert doc["circuit"] == first
    code, doc = run_json(capsys, "bench", "gen", "-n", "2", "-d", "3", "--seed", "7", "--irreducible")
    assert doc["circuit"] == first


def test_threads_env_and_flag(capsys, files, monkeypatch):
    import maxsyn.cli as cli

    seen = []
    real = cli.synthesize

    def spy(*a, **kw):
        seen.append(kw["threads"])
        return real(*a, **kw)

    monkeypatch.setattr(cli, "synthesize", spy)
    s = files("s.qc", "S 0\n")
    monkeypatch.setenv("MAXSYN_THREADS", "3")
    run(capsys, "synth", "--spec", s, "--encoding", "lc")
    run(capsys, "synth", "--spec", s, "--encoding", "lc", "--threads", "2")
    assert seen == [3, 2]


def test_threads_results_identical(capsys, files):
    s = files("s.qc", "S 0\n")
    _, one = run_json(capsys, "synth", "--spec", s, "--encoding", "lc", "--threads", "1")
    _, many = run_json(capsys, "synth", "--spec", s, "--encoding", "lc", "--threads", "4")
    assert one["circuit"] == many["circuit"] and one["raw"] == many["raw"]
