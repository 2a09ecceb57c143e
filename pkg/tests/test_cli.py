"""Command-line interface: exit codes, stdout text, and file outputs.

Everything runs in-process through ``main(argv)`` so coverage tools see
it and failures carry real tracebacks; one subprocess smoke test checks
the installed ``cmclab`` entry point.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cmclab.cli import main
from cmclab.graphs import load_solution
from cmclab.immersion import load_immersion
from cmclab.reporting import parse_report


def run_cli(capsys, *argv):
    """Invoke main() and hand back (exit_code, stdout, stderr)."""
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse errors
        code = exc.code
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ----------------------------------------------------------------- catalog


def test_catalog_listing(capsys):
    code, out, _ = run_cli(capsys, "catalog")
    assert code == 0
    assert "catalog kinds:" in out
    for kind in ("slice", "vplane", "tilted", "cylinder"):
        assert kind in out


def test_catalog_writes_loadable_grid_file(capsys, tmp_path):
    path = tmp_path / "cyl.grid"
    code, out, _ = run_cli(capsys, "catalog", "cylinder", "--chart",
                           "poincare", "--H", "0.75", "--grid", "21",
                           "--out", str(path))
    assert code == 0
    assert f"wrote 21x21 samples to {path}" in out
    # second stdout line is the descriptor as JSON
    desc = json.loads(out.splitlines()[1])
    assert desc["kind"] == "vertical_cylinder"
    assert desc["parameters"]["H"] == 0.75
    imm = load_immersion(str(path))
    assert imm.sample((21, 21))[0].shape == (21, 21)


# ------------------------------------------------------------------ verify


def test_verify_passes_and_prints_each_equation(capsys):
    code, out, _ = run_cli(capsys, "verify", "cylinder", "--chart",
                           "poincare", "--H", "0.75", "--grid", "41")
    assert code == 0
    for eq in ("eq2_intrinsic_gauss", "eq3_height_gradient",
               "eq4_height_hopf", "eq5_height_laplacian",
               "eq6_angle_gradient", "eq7_codazzi"):
        assert f"[PASS] {eq}" in out
    assert "overall: PASS  [11 checks]" in out


def test_verify_writes_structured_report(capsys, tmp_path):
    path = tmp_path / "verify.json"
    code, out, _ = run_cli(capsys, "verify", "cylinder", "--chart",
                           "poincare", "--H", "0.75", "--grid", "41",
                           "--out", str(path))
    assert code == 0
    assert f"report written to {path}" in out
    report = parse_report(str(path))
    assert report.name == "structure-equations"
    assert report.overall_pass
    assert len(report.records) == 11


def test_verify_convention_flag(capsys):
    code, _, _ = run_cli(capsys, "verify", "cylinder", "--chart", "poincare",
                         "--H", "0.75", "--grid", "41",
                         "--convention", "flipped")
    assert code == 0
    code, _, err = run_cli(capsys, "verify", "cylinder", "--chart",
                           "poincare", "--H", "0.75",
                           "--convention", "upside-down")
    assert code == 2
    assert "invalid choice" in err


# ------------------------------------------------------------- solve-graph


def test_solve_graph_converged_exits_zero(capsys, tmp_path):
    sol_path = tmp_path / "cap.solution"
    code, out, _ = run_cli(capsys, "solve-graph", "--chart", "flat",
                           "--H", "0.5", "--delta", "0.9", "--grid", "33",
                           "--solution-out", str(sol_path))
    assert code == 0
    assert "solve-graph: converged" in out
    assert "[PASS] graph_solution" in out
    sol = load_solution(str(sol_path))
    assert sol["converged"] == "true"
    # spherical cap of curvature H: depth sqrt(1/H^2 - r^2) + const
    depth = math.sqrt(4.0 - 0.81) - 2.0
    assert abs(float(sol["u"].min()) - depth) < 5e-4


def test_solve_graph_infeasible_exits_one(capsys):
    code, out, _ = run_cli(capsys, "solve-graph", "--chart", "poincare",
                           "--H", "0.75", "--delta", "2.0", "--grid", "33")
    assert code == 1
    assert "did not converge" in out
    assert "note: metric gradient" in out
    assert "overall: FAIL" in out


def test_solve_graph_domain_error_exits_one(capsys):
    # coordinate ball sticking out of the Poincare disk
    code, _, err = run_cli(capsys, "solve-graph", "--chart", "poincare",
                           "--H", "0.75", "--delta", "-1.0", "--grid", "17")
    assert code == 1
    assert "error: DomainError" in err


# ---------------------------------------------------------------- spectrum


def test_spectrum_ball_csv(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--ball", "0", "1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "problem,parameters,lambda1,reference,relative_error"
    fields = lines[1].split(",")
    assert fields[0] == "ball"
    assert fields[1] == "kappa0=0 delta=1"
    assert abs(float(fields[2]) - 5.783185962946785) < 1e-8
    assert float(fields[4]) < 1e-3  # 1D shooting vs 2D cross-check


def test_spectrum_stability_csv(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--stability",
                           "0.75", "-1", "10", "10")
    assert code == 0
    fields = out.strip().splitlines()[1].split(",")
    assert fields[0] == "stability"
    assert abs(float(fields[2]) - (-1.12663969745)) < 1e-6
    assert float(fields[4]) < 1e-4  # grid vs closed-form separable mode


def test_spectrum_requires_a_mode(capsys):
    code, _, err = run_cli(capsys, "spectrum")
    assert code == 2
    assert "--ball" in err and "--stability" in err


# ----------------------------------------------------------------- cheeger


def test_cheeger_tabulates_and_verifies_bound(capsys):
    code, out, _ = run_cli(capsys, "cheeger", "--kappa0", "-1",
                           "--deltas", "2", "10", "--lambda1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ("delta,boundary_length,volume,cheeger_constant,"
                        "lower_bound,lambda1,satisfied")
    assert len(lines) == 3
    for line, delta in zip(lines[1:], (2.0, 10.0)):
        fields = line.split(",")
        assert fields[-1] == "true"
        # hyperbolic ball: h = coth(delta / 2)
        assert abs(float(fields[3]) - 1.0 / math.tanh(delta / 2)) < 1e-9


# ----------------------------------------------------------------- predict


@pytest.mark.parametrize("H, c, expected", [
    ("0.75", "-1", "vertical cylinder, geodesic curvature 1.5"),
    ("0", "-1", "slice | vertical plane"),
    ("0", "0", "slice | vertical plane | tilted plane"),
    ("1.0", "0", "vertical cylinder, geodesic curvature 2"),
    ("0.5", "-1", "outside theorem hypotheses"),
])
def test_predict_prints_classification(capsys, H, c, expected):
    code, out, _ = run_cli(capsys, "predict", "--H", H, "--c", c)
    assert code == 0
    assert out == expected + "\n"


# --------------------------------------------------------------------- run


def test_run_builtin_scenario(capsys):
    code, out, _ = run_cli(capsys, "run", "lemma42")
    assert code == 0
    assert out.splitlines()[0] == "report: lemma42"
    assert "overall: PASS" in out


def test_run_unknown_builtin(capsys):
    code, _, err = run_cli(capsys, "run", "no-such-scenario")
    assert code == 2
    assert "unknown builtin scenario" in err
    assert "catalog-all" in err and "lemma42" in err


def test_run_scenario_file_with_report_output(capsys, tmp_path):
    toml = tmp_path / "demo.toml"
    toml.write_text(
        '[scenario]\nname = "cli-demo"\n\n'
        '[[step]]\noperation = "predict"\nH = 0.75\nc = -1.0\n'
        'expect = "vertical cylinder, geodesic curvature 1.5"\n')
    out_path = tmp_path / "demo.json"
    code, out, _ = run_cli(capsys, "run", str(toml), "--out", str(out_path))
    assert code == 0
    report = parse_report(str(out_path))
    assert report.name == "cli-demo"
    assert report.overall_pass


def test_run_honours_cmclab_out_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CMCLAB_OUT", str(tmp_path))
    code, out, _ = run_cli(capsys, "run", "lemma42")
    assert code == 0
    written = tmp_path / "lemma42.json"
    assert written.exists()
    assert parse_report(str(written)).overall_pass


def test_report_outputs_are_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        code, _, _ = run_cli(capsys, "run", "lemma42", "--out", str(path))
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_unwritable_out_path_exits_two(capsys, tmp_path):
    missing = tmp_path / "no" / "such" / "dir" / "r.json"
    code, _, err = run_cli(capsys, "run", "lemma42", "--out", str(missing))
    assert code == 2
    assert "error:" in err


# ----------------------------------------------------------- miscellaneous


def test_ball_geometry_line(capsys):
    code, out, _ = run_cli(capsys, "ball-geometry", "--kappa0", "-1",
                           "--delta", "2")
    assert code == 0
    values = dict(part.split("=") for part in out.split())
    assert abs(float(values["boundary_length"])
               - 2 * math.pi * math.sinh(2.0)) < 1e-9
    assert abs(float(values["volume"])
               - 2 * math.pi * (math.cosh(2.0) - 1.0)) < 1e-9


def test_ball_geometry_rejects_oversized_sphere_ball(capsys):
    code, _, err = run_cli(capsys, "ball-geometry", "--kappa0", "1",
                           "--delta", "4")
    assert code == 1
    assert "DomainError" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "cmclab" in capsys.readouterr().out


def test_installed_entry_point_smoke():
    proc = subprocess.run(
        [sys.executable, "-c",
         "import sys; from cmclab.cli import main; "
         "sys.exit(main(['predict', '--H', '0.75', '--c', '-1']))"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "vertical cylinder, geodesic curvature 1.5"
