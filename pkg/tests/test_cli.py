import json
import subprocess
import sys
from fractions import Fraction as Fr
from pathlib import Path

import pytest

from mjtoric.cli import main
from mjtoric.errors import ParseError
from mjtoric.problem_file import parse_text

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

P2 = """version = 1
[fan]
normals = [[1, 0], [0, 1], [-1, -1]]
[classes]
beta = ["0", "0", "1"]
alpha = ["0", "0", "{a}"]
[hamiltonian]
a_v = [{av}]
"""


def write(tmp_path, text, name="p.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_roundtrip():
    prob = parse_text(P2.format(a="3/10", av='"1", 0'))
    assert prob.alpha == [0, 0, Fr(3, 10)] and prob.a_v == [1, 0] and prob.n == 2
    assert prob.solver.grid == 129 and prob.solver.margin == Fr(1, 50)


@pytest.mark.parametrize("bad,line", [
    ('alpha = ["0", "0", "1/0"]', 6),
    ('alpha = ["0", "0", 0.3]', 6),
    ('alpha = ["0", "0", "x"]', 6),
    ('alpha = ["0", "0", "1"]\ncolour = 1', 7),
])
def test_parse_errors_have_positions(bad, line):
    text = P2.format(a="1", av="1, 0").replace('alpha = ["0", "0", "1"]', bad)
    with pytest.raises(ParseError) as exc:
        parse_text(text)
    assert exc.value.line == line and exc.value.column is not None


def test_toml_syntax_error_position():
    with pytest.raises(ParseError) as exc:
        parse_text("version = 1\n[fan\n")
    assert exc.value.line == 2


def test_exit_codes(tmp_path, capsys):
    assert main(["validate", str(PROBLEMS / "p2.toml")]) == 0
    assert main(["validate", str(PROBLEMS / "bad_triangle.toml")]) == 2
    assert main(["validate", write(tmp_path, P2.format(a="1/0", av="1, 0"))]) == 1
    assert main(["check", str(PROBLEMS / "p2.toml")]) == 0
    out = capsys.readouterr().out
    assert "5/3" in out and "2/3" in out and "PASS" in out
    assert main(["check", str(PROBLEMS / "p2_small_alpha.toml")]) == 3
    assert "-1/30" in capsys.readouterr().out
    assert main(["check", write(tmp_path, P2.format(a="1", av="0, 0"))]) == 0
    assert main(["solve", str(PROBLEMS / "p2_small_alpha.toml"), "--out", str(tmp_path)]) == 3
    assert main(["lab", "nonsense"]) == 2
    assert main(["lab", "thresholds"]) == 0
    assert "eps3 = 0.125" in capsys.readouterr().out


def test_missing_file_is_a_parse_error(tmp_path):
    assert main(["check", str(tmp_path / "nope.toml")]) == 1


def test_solve_interval_writes_reports(tmp_path):
    out = tmp_path / "run"
    code = main(["solve", str(PROBLEMS / "interval.toml"), "--grid", "65", "--tol", "1e-6", "--out", str(out)])
    assert code == 0
    report = json.loads((out / "solve_report.json").read_text())
    assert report["solver"]["status"] == "converged" and report["solver"]["res_sup"] <= 1e-6
    assert report["solver"]["E_nonincreasing"] and report["solver"]["dJ_nonincreasing"]
    assert (out / "trace.csv").read_text().splitlines()[0] == "step,t,dt,res_sup,res_l2,E,dJ"
    assert (out / "grid.csv").read_text().splitlines()[0] == "y1,u,h,residual"


def test_solve_non_convergence_exit(tmp_path):
    text = (PROBLEMS / "interval.toml").read_text().replace("record_every = 1000", "record_every = 10\nmax_steps = 50")
    assert main(["solve", write(tmp_path, text), "--grid", "33", "--out", str(tmp_path)]) == 4


def test_reports_are_deterministic(tmp_path):
    runs = []
    for k in range(2):
        d = tmp_path / str(k)
        main(["check", str(PROBLEMS / "p2.toml"), "--out", str(d)])
        main(["lab", "regmax", "--seed", "3", "--samples", "50", "--out", str(d)])
        main(["solve", str(PROBLEMS / "interval.toml"), "--grid", "33", "--out", str(d)])
        runs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert runs[0] == runs[1]
    assert {"check_report.json", "lab_regmax.json", "solve_report.json", "trace.csv", "grid.csv"} <= set(runs[0])


def test_console_module_entry():
    proc = subprocess.run([sys.executable, "-m", "mjtoric.cli", "check", str(PROBLEMS / "p2.toml")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout
