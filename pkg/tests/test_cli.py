import io
import subprocess
import sys

import pytest

from conftest import CIRCUITS
from diagcirc.cli import run_cli
from diagcirc.lattice import builtin_signature
from diagcirc.term import parse, parse_file
from diagcirc.tfpg import from_term, iso_equal


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def circ(name):
    return CIRCUITS / f"{name}.circ"


@pytest.fixture
def write(tmp_path):
    def make(text, name="c.circ"):
        p = tmp_path / name
        p.write_text(text)
        return p
    return make


def test_check():
    code, out, _ = cli("check", circ("ccc_t"))
    assert code == 0 and out.startswith("ok 0→1") and "feedback=1" in out


def test_parse_error(write):
    code, _, err = cli("check", write("t ; (and"))
    assert code == 1 and err.startswith("error: parse:")


def test_missing_file(tmp_path):
    code, _, err = cli("check", tmp_path / "nope.circ")
    assert code == 1 and err.startswith("error: io:")


def test_arity_error(write):
    code, _, err = cli("check", write("t ; and"))
    assert code == 2 and err.startswith("error: arity:")


def test_usage_errors():
    assert cli()[0] == 1
    assert cli("frobnicate")[0] == 1
    assert cli("run", circ("forever_v"), "--ticks", "-1")[0] == 1


def test_signature_default(write):
    code, out, _ = cli("--sig", "mos6", "check", write("H ; inv"))
    assert code == 0
    assert cli("check", write("H ; inv"))[0] == 1


def test_run_productive():
    code, out, _ = cli("run", circ("forever_v"), "--ticks", 3)
    assert code == 0
    assert out.splitlines() == ["tick 0 emit t", "tick 1 emit t", "tick 2 emit t",
                                "verdict Productive(3)"]


def test_run_unproductive():
    code, out, _ = cli("run", circ("instant_and"))
    assert code == 0 and out.strip() == "verdict Unproductive"


def test_run_trace():
    code, out, _ = cli("run", circ("and_chain"), "--ticks", 1, "--trace")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("rule ConstantGate @") and "tick 0 emit f" in lines


def test_run_step_limit():
    code, out, err = cli("run", circ("forever_v"), "--ticks", 50, "--budget", 30)
    assert code == 3 and "StepLimit" in out


def test_run_open_circuit():
    code, _, err = cli("run", circ("malik"))
    assert code == 2 and err.startswith("error: semantic:")


def test_eval():
    code, out, _ = cli("eval", circ("guarded_and"), "--ticks", 3)
    assert code == 0 and out.strip() == "bot,bot,bot"
    code, out, _ = cli("--sig", "bool4", "eval", circ("mux_bool"), "--in", "t;f;t", "--ticks", 1)
    assert code == 0 and out.strip() in {"f", "t"}


def test_eval_wrong_inputs():
    assert cli("eval", circ("mux_bool"), "--in", "t")[0] == 2
    assert cli("eval", circ("mux_bool"), "--in", "t;q;t")[0] == 1


def test_peval_malik(tmp_path):
    sig = builtin_signature("bool4")
    out_file, dot_file = tmp_path / "r.circ", tmp_path / "r.dot"
    code, out, _ = cli("peval", circ("malik"), "--set", "0=t", "-o", out_file, "--dot", dot_file)
    assert code == 0
    _, term = parse_file(out_file.read_text())
    assert iso_equal(from_term(term), from_term(parse("box G 1 1 ; box F 1 1", sig)))
    assert dot_file.read_text().startswith("digraph")


def test_peval_stdout_and_trace():
    code, out, _ = cli("peval", circ("malik_f"), "--trace")
    assert code == 0 and out.rstrip().endswith("box F 1 1 ; box G 1 1")
    assert any(line.startswith("rule ") for line in out.splitlines())


def test_peval_bad_binding():
    assert cli("peval", circ("malik"), "--set", "7=t")[0] == 1
    assert cli("peval", circ("malik"), "--set", "x")[0] == 1


def test_equiv(write):
    a, b, c = write("and", "a.circ"), write("sym 1 1 ; and", "b.circ"), write("or", "c.circ")
    code, out, _ = cli("equiv", a, b)
    assert code == 0 and out.startswith("equal (tested 16")
    code, out, _ = cli("equiv", a, c)
    assert code == 0 and out.startswith("counterexample")
    assert cli("equiv", a, write("not", "d.circ"))[0] == 2
    code, _, err = cli("equiv", a, c, "--budget", 5)
    assert code == 3 and err.startswith("error: budget:")


@pytest.mark.parametrize("form", ["local", "global-trace", "global-delay"])
def test_normalize_forms(form, tmp_path):
    dest = tmp_path / "n.circ"
    code, _, _ = cli("normalize", circ("guarded_and"), "--form", form, "-o", dest)
    assert code == 0
    sig, term = parse_file(dest.read_text())
    assert sig.name == "bool4"
    from diagcirc.oracle import simulate
    _, orig = parse_file(circ("guarded_and").read_text())
    assert simulate(from_term(term), sig, [], 4) == simulate(from_term(orig), sig, [], 4)


def test_normalize_passive():
    code, out, _ = cli("normalize", circ("and_chain"), "--form", "passive")
    assert code == 0 and out.splitlines()[0] == "values t f t"
    code, _, err = cli("normalize", circ("guarded_and"), "--form", "passive")
    assert code == 2


def test_dot(tmp_path):
    code, out, _ = cli("dot", circ("ccc"))
    assert code == 0 and out.startswith("digraph")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "diagcirc", "run", str(circ("forever_v")), "--ticks", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict Productive(1)" in proc.stdout
