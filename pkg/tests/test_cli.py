import subprocess
import sys

import pytest

from bncx.bif import serialize_bif
from bncx.cli import cactus, main, parse_instance
from bncx.fixtures import disease_net, disease_store
from bncx.nnf import negate, write_circuit

DISEASE = ["--target", "D", "--features", "CT,BP,HR"]
X = "BP=High,CT=true,HR=Normal"


@pytest.fixture
def disease_bif(tmp_path):
    p = tmp_path / "disease.bif"
    p.write_text(serialize_bif(disease_net()))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compile_then_explain(tmp_path, capsys, disease_bif):
    circ = tmp_path / "type2.nnf"
    code, out, _ = run(capsys, "compile", disease_bif, *DISEASE, "--class", "2", "--out", str(circ))
    assert code == 0
    assert "class=2" in out and "omega_T=" in out
    code, out, _ = run(capsys, "explain", str(circ), X, "--gsr", "--gnr")
    assert code == 0
    assert out.splitlines() == [
        "general sufficient reasons: 2",
        "  CT in {true} AND BP in {High}",
        "  BP in {Low,High} AND HR in {Normal,High}",
        "general necessary reasons: 2",
        "  BP in {Low,High}",
        "  CT in {true} OR HR in {Normal,High}",
    ]


def test_compile_to_stdout(capsys):
    code, out, err = run(capsys, "compile", "fixture:disease", *DISEASE, "--class", "0")
    assert code == 0
    assert out.startswith("mvnnf 6 ")
    assert "problem=fixture:disease:D class=0" in err


def test_explain_all_sections(tmp_path, capsys):
    ref = disease_store()
    circ = tmp_path / "c.nnf"
    circ.write_text(write_circuit(ref.store, ref.roots["type2"]))
    code, out, _ = run(capsys, "explain", str(circ), X)
    assert code == 0
    heads = [ln.split(":")[0] for ln in out.splitlines() if not ln.startswith("  ")]
    assert heads == [
        "complete reason",
        "general reason",
        "sufficient reasons",
        "necessary reasons",
        "general sufficient reasons",
        "general necessary reasons",
    ]


def test_explain_negative_instance(tmp_path, capsys):
    ref = disease_store()
    circ = tmp_path / "c.nnf"
    circ.write_text(write_circuit(ref.store, ref.roots["type2"]))
    code, _, err = run(capsys, "explain", str(circ), "BP=Normal,CT=true,HR=Normal")
    assert code == 4
    assert "not a positive instance" in err


def test_contrast(capsys):
    code, out, _ = run(capsys, "contrast", "fixture:disease", *DISEASE, "--instance", X, "--to", "0")
    assert code == 0
    assert out.splitlines() == [
        "contrastive explanations (2 -> 0): 3",
        "  CT in {true} OR BP in {Low,High}",
        "  CT in {true} OR HR in {Normal,High}",
        "  BP in {High} OR HR in {Normal,High}",
    ]


def test_check_all_fixtures(capsys):
    for net in ("fixture:hub", "fixture:disease"):
        argv = DISEASE if net.endswith("disease") else ["--target", "A", "--features", "D,E,F"]
        code, out, _ = run(capsys, "check", net, *argv)
        assert code == 0
        assert all("verdict=pass" in ln for ln in out.splitlines())
    code, out, _ = run(capsys, "check", "fixture:random", "--seed", "3", "--target", "V0", "--all-leaves")
    assert code == 0


def test_check_corrupted_circuit(tmp_path, capsys, disease_bif):
    ref = disease_store()
    s = ref.store
    circ = tmp_path / "bad.nnf"
    circ.write_text(write_circuit(s, negate(s, ref.roots["type2"])))
    code, out, _ = run(capsys, "check", disease_bif, *DISEASE, "--class", "2", "--circuit", str(circ))
    assert code == 1
    assert "verdict=fail" in out and "counterexample=" in out


def test_threshold_flags(capsys):
    argv = ["check", "fixture:hub", "--target", "A", "--features", "D,E,F"]
    assert run(capsys, *argv, "--threshold", "0.4")[0] == 0
    assert run(capsys, *argv, "--threshold-avg", "--threshold-class", "1")[0] == 0
    code, _, err = run(capsys, *argv, "--threshold", "1.5")
    assert code == 2 and "strictly between" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "missing.bif", "--target", "A", "--all-leaves"],
        ["check", "fixture:nope", "--target", "A", "--all-leaves"],
        ["check", "fixture:hub", "--target", "Z", "--all-leaves"],
        ["check", "fixture:hub", "--target", "A"],
        ["check", "fixture:hub", "--target", "B", "--features", "D"],
        ["compile", "fixture:hub", "--target", "A", "--all-leaves", "--class", "7"],
        ["contrast", "fixture:disease", *DISEASE, "--instance", "BP=Huge", "--to", "0"],
        ["contrast", "fixture:disease", *DISEASE, "--instance", X, "--to", "2"],
    ],
)
def test_input_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_bad_bif_reports_diagnostics(tmp_path, capsys):
    p = tmp_path / "bad.bif"
    p.write_text("variable A { type discrete [ 2 ] { a, b }; }\n")
    code, _, err = run(capsys, "check", str(p), "--target", "A", "--all-leaves")
    assert code == 2
    assert "bad.bif:1: error: variable 'A' has no probability block" in err


def test_timeout_exit_code(capsys):
    code, _, err = run(capsys, "compile", "fixture:hub", "--target", "A", "--all-leaves", "--class", "0", "--timeout", "-1")
    assert code == 3
    assert err.startswith("limit:")


def test_parse_instance():
    names = {"A": (0, ("x", "y")), "B": (1, ("p", "q", "r"))}
    assert parse_instance("A=y, B=r", names) == {0: 1, 1: 2}
    from bncx.cli import InputError

    for bad in ("A", "C=x", "A=z"):
        with pytest.raises(InputError):
            parse_instance(bad, names)


def test_bench_manifest(tmp_path, capsys):
    manifest = tmp_path / "problems.txt"
    lines = ["# ten seeded random problems"]
    lines += [f"fixture:random --seed {k} --target V0 --all-leaves" for k in range(10)]
    manifest.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "bench", str(manifest), "--workers", "2")
    assert code == 0
    rows = [ln for ln in out.splitlines() if ln.startswith("problem=")]
    assert len(rows) == 10 and all("status=ok" in r for r in rows)
    table = out.split("# rank seconds cumulative\n")[1].splitlines()
    cum = [float(ln.split()[2]) for ln in table]
    assert len(cum) == 10 and cum == sorted(cum)


def test_bench_partial_results(tmp_path, capsys):
    manifest = tmp_path / "p.txt"
    manifest.write_text("fixture:hub --target A --all-leaves\nfixture:hub --target Q --all-leaves\n")
    code, out, _ = run(capsys, "bench", str(manifest))
    assert code == 2
    assert "status=ok" in out and "status=error:InputError" in out
    code, out, _ = run(capsys, "bench", str(manifest), "--timeout", "-1")
    assert "status=timeout" in out


def test_cactus_sorted():
    rows = [{"status": "ok", "seconds": 3.0}, {"status": "cap", "seconds": 9.0}, {"status": "ok", "seconds": 1.0}]
    assert cactus(rows) == [(1, 1.0, 1.0), (2, 3.0, 4.0)]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bncx", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "compile" in out.stdout
