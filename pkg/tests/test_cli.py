import json
import subprocess
import sys
from fractions import Fraction

import pytest

from cantorlab import cli
from cantorlab.clopen import canonicalize
from cantorlab.couplings import domination, solve_coupling
from cantorlab.exact import format_rational, parse_rational
from cantorlab.measures import bernoulli
from cantorlab.pushforward import image_mass
from cantorlab.showcase import survival_prob, threshold_map, tree_dist_percolation


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def doc(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    parsed = json.loads(out)
    assert list(parsed)[0] == "status"
    return code, parsed


def test_documented_examples(capsys):
    code, out, _ = run(capsys, "measure", "mass", "--measure", "bernoulli:1/3", "--prefix", "11")
    assert (code, out.strip()) == (0, '{"status":"ok","value":"1/9"}')
    code, out, _ = run(capsys, "tree", "pn", "--n", "1")
    assert (code, out.strip()) == (0, '{"status":"ok","value":"8/9"}')
    code, d = doc(capsys, "coupling", "solve", "--p", "bernoulli:1/2", "--q", "bernoulli:2/3",
                  "--relation", "domination", "--depth", "1")
    assert code == 1
    assert d["status"] == "infeasible"
    assert d["cut"]["input_side"] == ["0"]


def test_round_trips(capsys):
    _, d = doc(capsys, "measure", "clopen-mass", "--measure", "bernoulli:1/2", "--set", "0,11")
    assert parse_rational(d["value"]) == Fraction(3, 4)
    _, d = doc(capsys, "measure", "distance", "--measure", "uniform", "--a", "0", "--b", "00")
    assert parse_rational(d["value"]) == Fraction(1, 4)
    _, d = doc(capsys, "clopen", "op", "--kind", "complement", "--a", "00")
    assert canonicalize(d["set"]) == ~canonicalize(["00"])
    _, d = doc(capsys, "clopen", "refine", "--set", "ε", "--depth", "1")
    assert d["strings"] == ["0", "1"]
    _, d = doc(capsys, "image", "mass", "--map", "threshold:1/3", "--prefix", "10", "--eps", "1/64")
    r = image_mass(threshold_map(Fraction(1, 3)), "10", Fraction(1, 64))
    assert (parse_rational(d["value"]), parse_rational(d["error_bound"]), d["stage_used"]) == (
        r.value, r.error_bound, r.stage_used)
    _, d = doc(capsys, "coupling", "solve", "--p", "bernoulli:1/2", "--q", "bernoulli:1/3",
               "--relation", "domination", "--depth", "2")
    m = solve_coupling(bernoulli("1/2"), bernoulli("1/3"), domination(), 2)
    assert {(e["u"], e["v"]): parse_rational(e["mass"]) for e in d["entries"]} == m.entries
    _, d = doc(capsys, "tree", "dist", "--k", "1", "--process", "percolation")
    closed = {s.label(): w for s, w in tree_dist_percolation(1, False).items()}
    assert {e["shape"]: parse_rational(e["mass"]) for e in d["shapes"]} == closed
    _, d = doc(capsys, "tree", "pn", "--n", "5")
    assert parse_rational(d["value"]) == survival_prob(5)


def test_other_commands(capsys):
    code, d = doc(capsys, "test", "check", "--test", "zeros", "--max-i", "4", "--max-t", "3")
    assert code == 0 and d["violations"] == []
    code, d = doc(capsys, "test", "check", "--test", "full", "--max-i", "1", "--max-t", "0")
    assert code == 1 and d["violations"][0]["kind"] == "bound"
    code, d = doc(capsys, "test", "combine", "--test", "zeros", "--test", "ones", "--max-i", "3", "--max-t", "3")
    assert code == 0 and len(d["masses"]) == 3
    _, d = doc(capsys, "test", "deficiency", "--test", "zeros", "--prefix", "000", "--time", "10")
    assert d["value"] == 3
    _, d = doc(capsys, "map", "eval", "--map", "identity", "--input", "1", "--stage", "2", "--bits", "2")
    assert d["bits"] == [1, "undetermined"]
    _, d = doc(capsys, "map", "defect", "--map", "threshold:1/3", "--level", "2", "--horizon", "8")
    assert parse_rational(d["mass"]) <= parse_rational(d["bound"])
    code, d = doc(capsys, "map", "convert", "--map", "threshold:1/2", "--level", "3")
    assert code == 0 and parse_rational(d["distance"]) <= parse_rational(d["bound"])
    code, d = doc(capsys, "map", "convert", "--total", "split", "--bit", "1", "--level", "3")
    assert code == 0 and d["set"] == ["001", "011", "101", "111"]
    code, d = doc(capsys, "image", "pullback", "--map", "split", "--test", "ones", "--max-i", "3", "--max-t", "8")
    assert code == 0 and d["shift"] >= 0
    _, d = doc(capsys, "image", "complement", "--map", "identity", "--r-complement", "1", "--stage", "2",
               "--output-depth", "1", "--input-depth", "3")
    assert d["cylinders"] == ["1"]
    code, d = doc(capsys, "coupling", "check", "--relation", "empty", "--depth", "2")
    assert code == 1 and d["violations"][0] == {"kind": "totality", "depth": 1, "u": "0", "v": None}
    code, d = doc(capsys, "coupling", "witness", "--p", "treecode:3", "--relation", "paths", "--depth", "3")
    assert code == 0 and sum(parse_rational(e["mass"]) for e in d["entries"]) == 1
    _, d = doc(capsys, "tree", "bracket", "--k", "1", "--horizon", "8", "--conditioned")
    assert all(parse_rational(e["lo"]) <= Fraction(1, 3) <= parse_rational(e["hi"]) for e in d["shapes"])
    code, d = doc(capsys, "examples", "threshold", "--theta", "1/3", "--eps", "1/256")
    assert code == 0 and d["bernoulli"] == "1/3"
    _, d = doc(capsys, "examples", "split", "--input", "0101")
    assert d["output"] == "00"


def test_files(capsys, tmp_path):
    m = tmp_path / "m.txt"
    m.write_text("2\n00 1/2\n11 1/2\n")
    _, d = doc(capsys, "measure", "mass", "--measure", f"explicit@{m}", "--prefix", "1")
    assert d["value"] == "1/2"
    r = tmp_path / "r.txt"
    r.write_text("1 0 0\n1 1 1\n")
    code, d = doc(capsys, "coupling", "solve", "--p", f"explicit@{m}", "--q", "uniform", "--relation", f"@{r}",
                  "--depth", "1")
    assert code == 0


def test_budget_env(capsys, monkeypatch):
    monkeypatch.setenv("CANTORLAB_MAX_BUDGET", "10")
    code, d = doc(capsys, "map", "convert", "--total", "threshold:1/3", "--level", "8", "--budget", "1000")
    assert code == 1 and d["status"] == "budget-exhausted" and d["steps"] == 10
    monkeypatch.setenv("CANTORLAB_MAX_BUDGET", "lots")
    assert run(capsys, "map", "convert", "--total", "split", "--level", "2")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nope"],
        ["measure"],
        ["measure", "mass", "--prefix", "1"],
        ["measure", "mass", "--measure", "bernoulli:0.3", "--prefix", "1"],
        ["measure", "mass", "--measure", "bernoulli:3/2", "--prefix", "1"],
        ["measure", "mass", "--measure", "poisson", "--prefix", "1"],
        ["measure", "mass", "--measure", "uniform", "--prefix", "012"],
        ["clopen", "op", "--kind", "complement", "--a", "0", "--b", "1"],
        ["clopen", "op", "--kind", "union", "--a", "0"],
        ["clopen", "refine", "--set", "000", "--depth", "1"],
        ["tree", "pn", "--n", "-1"],
        ["tree", "bracket", "--k", "2", "--horizon", "1"],
        ["map", "eval", "--map", "threshold:2", "--input", "1", "--stage", "1"],
        ["map", "convert", "--level", "2"],
        ["coupling", "check", "--relation", "bogus", "--depth", "1"],
        ["measure", "mass", "-m", "uniform", "--prefix", "1"],
        ["measure", "mass", "--meas", "uniform", "--prefix", "1"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert "usage:" in err


def test_pretty_and_deterministic(capsys):
    argv = ["coupling", "solve", "--p", "bernoulli:2/3", "--q", "bernoulli:1/2", "--relation", "domination",
            "--depth", "2"]
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first
    code, out, _ = run(capsys, "--pretty", *argv)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "status: ok"
    assert "\x1b" not in out
    assert any(line.split() == ["00", "00", "1/9"] for line in lines)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cantorlab", "tree", "pn", "--n", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"status": "ok", "value": format_rational(survival_prob(2))}
