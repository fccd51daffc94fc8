import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from simplexbundle.cli import main, parse_grid

GOLDEN = Path(__file__).parent / "golden"


def run(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env)


def table(result):
    assert result.exit_code == 0, result.output
    return list(csv.DictReader(io.StringIO(result.output)))


@pytest.mark.parametrize("text, expected", [
    ("0:1:5", [0.0, 0.25, 0.5, 0.75, 1.0]),
    ("0.5:0.5:1", [0.5]),
    ("0.1,0.2", [0.1, 0.2]),
    ("-3:3:601", None),
])
def test_parse_grid(text, expected):
    grid = parse_grid(text)
    if expected is not None:
        assert grid == expected
    else:
        assert len(grid) == 601 and grid[300] == 0.0 and grid[-1] == 3.0


def test_grid_endpoints_exact():
    grid = parse_grid("0.11:0.79:200")
    assert grid[0] == 0.11 and grid[-1] == 0.79


@pytest.mark.parametrize("text", ["0:1", "0:1:0", "0:1:1", "a:b:3", ""])
def test_bad_grids_exit_2(text):
    assert run("eval", "--model", "line", "--grid", text).exit_code == 2


def test_eval_line_interior():
    rows = table(run("eval", "--model", "line", "--grid", "0.05:0.45:9", "--with-score"))
    assert len(rows) == 9
    assert {r["status"] for r in rows} == {"ok"}


def test_eval_line_endpoint_contact():
    rows = table(run("eval", "--model", "line", "--grid", "0.5:0.5:1", "--with-score"))
    assert len(rows) == 1 and rows[0]["status"] == "abs_continuity_violation"


def test_eval_entropy_tangential_hit():
    (row,) = table(run("eval", "--model", "entropy3", "--grid", "0.5:0.5:1", "--with-score"))
    assert row["status"] == "ok"
    assert float(row["s_2"]) == 0.0
    assert row["determined_mask"] == "101"


def test_eval_out_of_domain_rows_do_not_abort():
    rows = table(run("eval", "--model", "line", "--grid", "0.25,0.75", "--with-score"))
    assert [r["status"] for r in rows] == ["ok", "out_of_domain"]
    assert math.isnan(float(rows[1]["w_1"]))


def test_eval_golden():
    out = run("eval", "--model", "line", "--grid", "0.125,0.25", "--with-velocity",
              "--with-score")
    assert out.exit_code == 0
    assert out.output == (GOLDEN / "eval_line.csv").read_text()


def test_gibbs_golden():
    out = run("gibbs", "--beta", "-1:1:3", "--params", '{"U": [0, 0], "V": [0, 1]}')
    assert out.output == (GOLDEN / "gibbs_two_cell.csv").read_text()


def test_output_is_bit_stable():
    args = ("geodesic", "--base", "0.2,0.3,0.5", "--direction", "1,-2,0.5", "--grid", "-2:2:9")
    assert run(*args).output == run(*args).output


def test_gibbs_trajectory():
    rows = table(run("gibbs", "--beta", "-3:3:601"))
    assert len(rows) == 601
    zero = [r for r in rows if float(r["beta"]) == 0.0]
    assert [float(zero[0][k]) for k in ("w_1", "w_2", "w_3")] == [0.5, 0.5, 0.0]


def test_entropy_production_exact_hit():
    rows = table(run("entropy", "--production", "--grid", "0.11:0.79:69"))
    (hit,) = [r for r in rows if float(r["t"]) == 0.5]
    assert abs(float(hit["dHdt"])) < 1e-6


def test_entropy_production_dense_grid_matches_closed_form():
    # The row nearest 1/2 on this grid is 0.49955, where dH/dt is about -0.0115;
    # compare every row against the closed form instead.
    rows = table(run("entropy", "--production", "--grid", "0.11:0.79:200"))
    assert len(rows) == 200
    for r in rows:
        t = float(r["t"])
        closed = -(math.log(t) + 2 * (t - 0.5) * math.log((t - 0.5) ** 2)
                   - 2 * t * math.log(0.75 - t * t)) if t != 0.5 else 0.0
        assert float(r["dHdt"]) == pytest.approx(closed, abs=1e-9)


def test_entropy_heatmap():
    rows = table(run("entropy", "--heatmap", "--resolution", "100"))
    assert len(rows) == 100 ** 2
    H = np.array([float(r["H"]) for r in rows])
    assert H.min() >= 0 and H.max() <= math.log(3)


def test_entropy_both_tables(tmp_path):
    out = run("entropy", "--resolution", "5", "--outdir", str(tmp_path))
    assert out.exit_code == 0, out.output
    assert (tmp_path / "entropy_heatmap.csv").exists()
    assert (tmp_path / "entropy_production.csv").exists()
    assert run("entropy").exit_code == 2


def test_geodesic_psi_equals_kl():
    rows = table(run("geodesic", "--base", "0.5,0.5,0", "--direction", "1,-1,0",
                     "--grid", "-2:2:5"))
    for r in rows:
        assert float(r["w_3"]) == 0.0
        assert float(r["psi"]) == pytest.approx(float(r["kl_check"]), abs=1e-12)
    assert float(rows[3]["psi"]) == pytest.approx(0.4337808304830272, abs=1e-15)


def test_flow_entropy():
    rows = table(run("flow", "--start", "0.7,0.3,0"))
    last = rows[-1]
    assert float(last["w_1"]) == pytest.approx(0.5, abs=1e-6)
    assert float(last["w_3"]) == 0.0
    assert [int(r["k"]) for r in rows] == list(range(len(rows)))


def test_flow_json_and_labels():
    out = run("flow", "--start", '{"labels": ["a", "b"], "weights": [0.9, 0.1]}',
              "--functional", "expectation", "--g", "1,0", "--steps", "3", "--format", "json")
    assert out.exit_code == 0, out.output
    records = json.loads(out.output)
    assert len(records) == 4 and "w_a" in records[0]
    assert records[-1]["G_value"] > records[0]["G_value"]


def test_algebra_file(tmp_path):
    model = tmp_path / "indep.txt"
    model.write_text("# independence on a 2x2 table\np11*p22 - p12*p21\n")
    out = run("algebra", str(model))
    assert out.exit_code == 0, out.output
    assert "p11*p22*s11 + p11*p22*s22 - p12*p21*s12 - p12*p21*s21" in out.output
    assert "s11 - s12 - s21 + s22 = 0" in out.output


def test_algebra_explicit_labels(tmp_path):
    model = tmp_path / "line.txt"
    model.write_text("p1 - p2\np3 + 2*p1 - 1\n")
    out = run("algebra", str(model), "--labels", "1,2,3")
    assert "2*p1*s1 + p3*s3" in out.output
    assert "s1 - s2 = 0" in out.output


@pytest.mark.parametrize("args, code", [
    (("eval", "--model", "nope", "--grid", "0:1:2"), 3),
    (("eval", "--model", "gibbs", "--params", '{"U": [1, 2]}', "--grid", "0:1:2"), 3),
    (("eval", "--model", "gibbs", "--params", "{bad json", "--grid", "0:1:2"), 2),
    (("gibbs", "--output", "/nonexistent/dir/out.csv"), 4),
    (("flow", "--start", "1,0,0"), 5),
    (("flow", "--start", "0.5,0.6"), 2),
    (("flow", "--start", "0.5,0.5", "--functional", "expectation"), 2),
    (("algebra", "/nonexistent/model.txt"), 3),
    (("verify", "--only", "nope"), 2),
    (("bogus",), 2),
])
def test_exit_codes(args, code):
    assert run(*args).exit_code == code


def test_algebra_bad_polynomial(tmp_path):
    model = tmp_path / "bad.txt"
    model.write_text("p1 + * p2\n")
    assert run("algebra", str(model)).exit_code == 3


def test_table_model_file(tmp_path):
    ts = np.linspace(0.1, 0.4, 31).tolist()
    lines = ["t,w_a,w_b,w_c"] + [f"{t!r},{t!r},{t!r},{1 - 2 * t!r}" for t in ts]
    path = tmp_path / "line.csv"
    path.write_text("\n".join(lines) + "\n")
    rows = table(run("eval", "--model", str(path), "--grid", "0.2,0.3", "--with-score"))
    assert float(rows[0]["s_a"]) == pytest.approx(5.0, rel=1e-9)


def test_json_model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"model": "mixture",
                                "params": {"p": [1, 0], "q": [0, 1]}}))
    rows = table(run("eval", "--model", str(path), "--grid", "0.5"))
    assert float(rows[0]["w_1"]) == 0.5


def test_tolerance_env():
    loose = {"SIMPLEX_BUNDLE_TOL": "1e-3"}
    assert run("flow", "--start", "0.5,0.5005", "--steps", "1").exit_code == 2
    assert run("flow", "--start", "0.5,0.5005", "--steps", "1", env=loose).exit_code == 0
    assert run("flow", "--start", "0.5,0.5", env={"SIMPLEX_BUNDLE_TOL": "-1"}).exit_code == 2


def test_verify_subset_and_seed():
    out = run("verify", "--only", "cramer-rao", "--seed", "7")
    assert out.exit_code == 0, out.output
    assert out.output.count("[PASS]") == 1 and "cramer-rao" in out.output
    again = run("verify", "--only", "cramer-rao", "--seed", "7")
    strip = lambda s: [ln.split(";")[0] for ln in s.splitlines()]
    assert strip(out.output) == strip(again.output)
