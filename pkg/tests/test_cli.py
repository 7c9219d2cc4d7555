"""Command-line surface: reports, curves, exit codes, file handling."""

import json
import math

import numpy as np
import pytest

from specbounds.bounds import BoundKind, bound_function, ms_saturation_point
from specbounds.cli import (
    CurveGrid,
    bound_report,
    constants_report,
    curve_csv,
    main,
)
from specbounds.core import HermitianMatrix, eigen_decompose, spectral_projection
from specbounds.errors import ConfigurationError
from specbounds.lab import (
    Layout,
    PerturbationKind,
    ScenarioSpec,
    build_perturbation,
    build_unperturbed,
    run_trial,
)
from specbounds.matrixfile import write_matrix_file


def _write(tmp_path, name, array):
    path = tmp_path / name
    write_matrix_file(path, HermitianMatrix(np.asarray(array, dtype=complex)))
    return str(path)


# ------------------------------------------------------------------ constants


def test_constants_report_values():
    doc = constants_report()
    assert doc["schema_version"] == 1
    c = doc["constants"]
    assert set(c) == {"c_s", "generic_threshold", "off_threshold",
                      "off_threshold_capped", "ms_threshold",
                      "kmm_saturation"}
    assert c["c_s"]["value"] == pytest.approx(0.454839961132706, abs=1e-12)
    assert c["generic_threshold"]["value"] == pytest.approx(
        c["c_s"]["value"], abs=5e-3)
    assert c["ms_threshold"]["value"] == pytest.approx(0.67598932, abs=1e-6)
    assert c["kmm_saturation"]["value"] == pytest.approx(
        0.5032886579583096, abs=1e-12)
    assert c["off_threshold"]["value"] > c["ms_threshold"]["value"]
    assert c["off_threshold_capped"]["value"] == pytest.approx(
        0.692834, abs=2e-3)


def test_constants_command_exits_zero(capsys):
    assert main(["constants"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["constants"]["c_s"]["value"] > 0.45


# -------------------------------------------------------------------- curves


def test_curve_csv_shape_and_scaling():
    grid = CurveGrid(x_min=0.0, x_max=0.69, points=3)
    text = curve_csv(grid)
    lines = text.splitlines()
    assert lines[0] == "x,off_opt,ms,kmm"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert [float(v) for v in first] == [0.0, 0.0, 0.0, 0.0]
    # scaled by 2/pi: values live in [0, 1] and keep the ordering
    for line in lines[2:]:
        x, off_v, ms_v, kmm_v = (float(v) for v in line.split(","))
        assert 0.0 < off_v <= ms_v <= kmm_v <= 1.0 + 1e-15


def test_curve_csv_saturated_cells_print_one():
    grid = CurveGrid(x_min=0.6, x_max=0.69, points=4,
                     functions=(BoundKind.KMM,))
    lines = curve_csv(grid).splitlines()
    # kmm saturates at ~0.5033, so the scaled column is identically 1 here.
    assert all(line.split(",")[1] == "1" for line in lines[1:])


def test_curve_csv_blank_cell_outside_domain():
    grid = CurveGrid(x_min=0.3, x_max=0.69, points=3,
                     functions=(BoundKind.GENERIC_SIN2, BoundKind.KMM))
    lines = curve_csv(grid).splitlines()
    last = lines[-1].split(",")
    assert last[1] == ""      # gen_sin2 stops at 1/pi
    assert last[2] != ""


def test_curve_csv_reproducible_and_raw_mode():
    grid = CurveGrid(x_min=0.0, x_max=0.6, points=40)
    assert curve_csv(grid) == curve_csv(grid)
    raw = curve_csv(grid, raw_radians=True)
    assert raw != curve_csv(grid)
    x, off_v = raw.splitlines()[-1].split(",")[:2]
    f = bound_function(BoundKind.OFF_OPT)
    assert float(off_v) == pytest.approx(f(float(x)), abs=1e-12)


def test_curve_grid_validation():
    with pytest.raises(ConfigurationError):
        CurveGrid(x_min=0.0, x_max=0.9, points=10)
    with pytest.raises(ConfigurationError):
        CurveGrid(x_min=0.5, x_max=0.4, points=10)
    with pytest.raises(ConfigurationError):
        CurveGrid(x_min=0.0, x_max=0.6, points=1)
    assert main(["curves", "--grid-max", "0.9"]) == 2
    assert main(["curves", "--points", "1"]) == 2
    assert main(["curves", "--functions", "nope"]) == 2


def test_curves_out_file(tmp_path, capsys):
    out = tmp_path / "curves.csv"
    assert main(["curves", "--points", "5", "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.read_text().splitlines()[0] == "x,off_opt,ms,kmm"


# -------------------------------------------------------------------- verify


def test_verify_command_pass_and_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["verify", "--layout", "ground-state", "--kind", "generic",
                 "--trials", "20", "--seed", "1", "--out", str(out)])
    text = capsys.readouterr().out
    assert code == 0
    assert text.startswith("PASS")
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert len(doc["records"]) == 20


def test_verify_rejects_bad_strength(capsys):
    # generic theory needs ||V|| < d/2
    assert main(["verify", "--layout", "ground-state", "--kind", "generic",
                 "--strength", "0.6", "--trials", "5"]) == 2
    assert main(["verify", "--layout", "interlaced", "--kind", "off-diagonal",
                 "--strength", "0.9", "--trials", "5"]) == 2
    assert main(["verify", "--layout", "ground-state", "--kind", "generic",
                 "--strength", "-1", "--trials", "5"]) == 2
    assert main(["verify", "--layout", "ground-state", "--kind", "generic",
                 "--trials", "0"]) == 2
    capsys.readouterr()


# --------------------------------------------------------------------- bound


def test_bound_subordinated_two_by_two(tmp_path, capsys):
    a = _write(tmp_path, "a.txt", np.diag([0.0, 1.0]))
    v = _write(tmp_path, "v.txt", [[0.0, 0.2], [0.2, 0.0]])
    assert main(["bound", a, v, "--sigma", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["regime"]["kind"] == "off-diagonal"
    assert doc["regime"]["disposition"] == "subordinated"
    assert doc["d"] == 1.0 and doc["norm_v"] == pytest.approx(0.2)
    assert doc["theta"] == pytest.approx(0.5 * math.atan(0.4), abs=1e-12)
    assert doc["margins"]["dk_tan2"] == pytest.approx(0.0, abs=1e-12)
    assert doc["tightest"]["name"] == "dk_tan2"
    assert doc["passed"] is True
    assert doc["epsilon"] is not None


def test_bound_zero_perturbation(tmp_path, capsys):
    a = _write(tmp_path, "a.txt", np.diag([0.0, 2.0, 3.0]))
    v = _write(tmp_path, "v.txt", np.zeros((3, 3)))
    assert main(["bound", a, v, "--sigma", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["regime"]["kind"] == "off-diagonal"
    assert doc["theta"] == 0.0 and doc["x"] == 0.0
    assert doc["margins"] == doc["bounds"]


def test_bound_oversized_generic_has_no_bound(tmp_path, capsys):
    a = _write(tmp_path, "a.txt", np.diag([0.0, 1.0]))
    v = _write(tmp_path, "v.txt", [[0.7, 0.1], [0.1, -0.2]])
    code = main(["bound", a, v, "--sigma", "0"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 1
    assert doc["bounds"] == {}
    assert doc["passed"] is False
    assert "note" in doc


def test_bound_finite_gap_disposition(tmp_path, capsys):
    a = _write(tmp_path, "a.txt", np.diag([-2.0, 0.0, 0.5, 3.0]))
    v = _write(tmp_path, "v.txt", 0.05 * np.eye(4))
    assert main(["bound", a, v, "--sigma", "0,0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["regime"]["disposition"] == "finite-gap"
    assert doc["sigma_indices"] == [1, 2]


def test_bound_usage_errors(tmp_path, capsys):
    a = _write(tmp_path, "a.txt", np.diag([0.0, 1.0]))
    v = _write(tmp_path, "v.txt", np.zeros((2, 2)))
    v3 = _write(tmp_path, "v3.txt", np.zeros((3, 3)))
    assert main(["bound", str(tmp_path / "missing.txt"), v,
                 "--sigma", "0"]) == 2
    assert main(["bound", a, v3, "--sigma", "0"]) == 2       # dim mismatch
    assert main(["bound", a, v, "--sigma", "0,1"]) == 2      # sigma=everything
    assert main(["bound", a, v, "--sigma", "0.1,0.2"]) == 2  # collide on E0
    assert main(["bound", a, v, "--sigma", "abc"]) == 2
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_bound_out_file(tmp_path, capsys):
    a = _write(tmp_path, "a.txt", np.diag([0.0, 1.0]))
    v = _write(tmp_path, "v.txt", [[0.0, 0.1], [0.1, 0.0]])
    out = tmp_path / "bound.json"
    assert main(["bound", a, v, "--sigma", "0", "--out", str(out)]) == 0
    capsys.readouterr()
    assert json.loads(out.read_text())["passed"] is True


# --------------------------------------------- bound/verify route agreement


@pytest.mark.parametrize("layout,kind,strength", [
    (Layout.GROUND_STATE, PerturbationKind.OFF_DIAGONAL, 0.6),
    (Layout.FINITE_GAP, PerturbationKind.GENERIC, 0.3),
    (Layout.INTERLACED, PerturbationKind.OFF_DIAGONAL, 0.5),
])
def test_bound_report_matches_lab_trial(tmp_path, layout, kind, strength):
    if layout is Layout.GROUND_STATE:
        sigma, comp = (0.0,), (1.0, 2.0, 5.0)
    elif layout is Layout.FINITE_GAP:
        sigma, comp = (0.0, 0.4), (-1.5, 2.0, 3.0)
    else:
        sigma, comp = (0.0, 2.0, 4.0), (1.0, 3.0)
    spec = ScenarioSpec(layout=layout, sigma_levels=sigma,
                        complement_levels=comp, perturbation=kind,
                        strength=strength, seed=77)
    record = run_trial(spec)

    a, partition = build_unperturbed(spec)
    proj = spectral_projection(eigen_decompose(a), partition.sigma_indices)
    v = build_perturbation(spec, proj)
    doc = bound_report(a, v, sigma)

    assert doc["regime"]["kind"] == kind.value
    # the CLI reports a three-way disposition; a single lowest level is a
    # special case of the subordinated order, not its own label
    expected = ("subordinated" if layout is Layout.GROUND_STATE
                else layout.value)
    assert doc["regime"]["disposition"] == expected
    assert doc["theta"] == pytest.approx(record.theta, abs=1e-12)
    assert set(doc["bounds"]) == set(record.bounds)
    for name, value in record.bounds.items():
        assert doc["bounds"][name] == pytest.approx(value, abs=1e-9)
    assert doc["passed"] is True


def test_bound_report_rejects_non_isolated_sigma():
    a = HermitianMatrix(np.diag([0.0, 0.0, 1.0]))
    v = HermitianMatrix(np.zeros((3, 3)))
    with pytest.raises(ConfigurationError):
        bound_report(a, v, (0.0,))
