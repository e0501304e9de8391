import copy
import json
import math

import numpy as np
import pytest

from conescale.cli import main, parse_problem, cylinder_problem_dict
from conescale.errors import ValidationError


def quad_problem(**overrides):
    data = {
        "schema_version": 1,
        "pencil": {"degree": 2, "dim": 1,
                   "coefficients": [[[[1.0, 0.0]]], [[[0.0, 0.0]]],
                                    [[[1.0, 0.0]]]]},
        "geometry": {"cone": {"angle": math.pi / 6, "vertex": [0.0, 2.0],
                              "orientation": 1},
                     "weight": [0.0, 0.0]},
        "grid": {"half_width": 20.0, "count": 2048},
        "rhs": {"kind": "gaussian"},
    }
    data.update(overrides)
    return data


def identity_problem():
    data = quad_problem()
    data["pencil"] = {"degree": 1, "dim": 1,
                      "coefficients": [[[[0.0, 0.0]]], [[[1.0, 0.0]]]]}
    return data


def linear_problem():
    data = quad_problem()
    data["pencil"] = {"degree": 1, "dim": 1,
                      "coefficients": [[[[1.0, 0.0]]], [[[0.0, 1.0]]]]}
    return data


def write(tmp_path, data, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def run(args):
    return main(args)


def table_lines(text, name):
    lines = text.splitlines()
    start = lines.index(f"# table={name}")
    out = []
    for line in lines[start + 1:]:
        if line.startswith("#"):
            break
        out.append(line)
    return out


class TestSpectrumCommand:
    def test_identity_empty(self, tmp_path, capsys):
        path = write(tmp_path, identity_problem())
        assert run(["spectrum", path]) == 0
        rows = table_lines(capsys.readouterr().out, "spectrum")
        assert rows == ["re,im,multiplicity,residual"]

    def test_quadratic_rows(self, tmp_path, capsys):
        path = write(tmp_path, quad_problem())
        assert run(["spectrum", path]) == 0
        rows = table_lines(capsys.readouterr().out, "spectrum")
        assert len(rows) == 3
        assert rows[1].startswith("0,-1,1,")
        assert rows[2].startswith("0,1,1,")

    def test_radius_filter(self, tmp_path, capsys):
        path = write(tmp_path, quad_problem())
        assert run(["spectrum", path, "--radius", "0.5"]) == 0
        rows = table_lines(capsys.readouterr().out, "spectrum")
        assert len(rows) == 1


MALFORMED = {
    "missing_degree": lambda d: d["pencil"].pop("degree"),
    "unknown_field": lambda d: d.update(extra_field=1),
    "bad_complex_pair": lambda d: d["geometry"].update(weight=[0.0]),
    "ragged_coefficients": lambda d: d["pencil"].update(
        coefficients=[[[[1.0, 0.0]]], [[[0.0, 0.0]]]]),
    "bad_rhs_kind": lambda d: d["rhs"].update(kind="sinusoid"),
}


class TestValidation:
    @pytest.mark.parametrize("name", sorted(MALFORMED))
    def test_malformed_rejected_exit_2(self, tmp_path, capsys, name):
        data = quad_problem()
        MALFORMED[name](data)
        path = write(tmp_path, data, f"{name}.json")
        assert run(["spectrum", path]) == 2
        assert "error:" in capsys.readouterr().err

    def test_diagnostic_names_field(self):
        data = quad_problem()
        del data["pencil"]["degree"]
        with pytest.raises(ValidationError, match="pencil.degree"):
            parse_problem(data)

    def test_wrong_schema_version(self, tmp_path):
        path = write(tmp_path, quad_problem(schema_version=2))
        assert run(["spectrum", path]) == 2

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert run(["spectrum", str(path)]) == 2

    def test_sampled_rhs_roundtrip(self, tmp_path, capsys):
        data = identity_problem()
        count = data["grid"]["count"]
        t = np.linspace(-20.0, 20.0, count)
        vals = np.exp(-t ** 2)
        data["rhs"] = {"kind": "sampled",
                       "values": [[v, 0.0] for v in vals]}
        path = write(tmp_path, data)
        assert run(["solve", path]) == 0


class TestClearanceCommand:
    def test_clear(self, tmp_path, capsys):
        path = write(tmp_path, quad_problem())
        assert run(["clearance", path]) == 0
        assert "# verdict=clear" in capsys.readouterr().out

    def test_violated(self, tmp_path, capsys):
        data = quad_problem()
        data["geometry"]["cone"] = {"angle": math.pi, "vertex": [0.0, 0.0],
                                    "orientation": 1}
        path = write(tmp_path, data)
        assert run(["clearance", path]) == 0
        out = capsys.readouterr().out
        assert "# verdict=violated" in out
        assert len(table_lines(out, "violations")) == 3


class TestSolveCommand:
    def test_identity_echoes_rhs(self, tmp_path, capsys):
        path = write(tmp_path, identity_problem())
        assert run(["solve", path]) == 0
        out = capsys.readouterr().out
        rows = table_lines(out, "solution")[1:]
        t, re, im = map(float, rows[1024].split(","))
        assert re == pytest.approx(math.exp(-t ** 2), abs=1e-10)
        assert abs(im) < 1e-10

    def test_residual_line(self, tmp_path, capsys):
        path = write(tmp_path, linear_problem())
        assert run(["solve", path]) == 0
        out = capsys.readouterr().out
        res = [l for l in out.splitlines() if l.startswith("# residual=")]
        assert res and float(res[0].split("=")[1]) <= 1e-6

    def test_scaled_deviation_line(self, tmp_path, capsys):
        path = write(tmp_path, linear_problem())
        assert run(["solve", path, "--scaled", str(math.pi / 8)]) == 0
        out = capsys.readouterr().out
        dev = [l for l in out.splitlines() if l.startswith("# deviation=")]
        assert dev and float(dev[0].split("=")[1]) <= 1e-6

    def test_solve_on_eigenvalue_line_exit_4(self, tmp_path, capsys):
        data = linear_problem()
        data["geometry"]["weight"] = [0.0, -1.0]   # line through -i
        path = write(tmp_path, data)
        assert run(["solve", path]) == 4

    def test_contraction_failure_exit_4(self, tmp_path, capsys):
        data = linear_problem()
        data["rhs"] = {"kind": "shifted_gaussian", "center": [5.0, 0.0]}
        data["perturbation"] = {"kind": "rational_decay", "epsilon": 50.0,
                                "pole_scale": 3.0}
        path = write(tmp_path, data)
        assert run(["solve", path]) == 4
        assert "not contracting" in capsys.readouterr().err

    def test_variable_solve_converges(self, tmp_path, capsys):
        data = linear_problem()
        data["rhs"] = {"kind": "shifted_gaussian", "center": [5.0, 0.0]}
        data["perturbation"] = {"kind": "rational_decay", "epsilon": 0.05,
                                "pole_scale": 3.0}
        data["solver"] = {"res_tol": 1e-8}
        path = write(tmp_path, data)
        assert run(["solve", path]) == 0
        out = capsys.readouterr().out
        assert "# mode=variable" in out


class TestVerifyCommand:
    def test_parseval_suite(self, tmp_path, capsys):
        path = write(tmp_path, identity_problem())
        assert run(["verify", "--suite", "parseval", path]) == 0
        out = capsys.readouterr().out
        worst = [l for l in out.splitlines()
                 if l.startswith("# max_rel_err=")][0]
        assert float(worst.split("=")[1]) <= 1e-6

    def test_hardy_suite(self, tmp_path, capsys):
        path = write(tmp_path, linear_problem())
        assert run(["verify", "--suite", "hardy", path]) == 0
        assert "# verdict=member-consistent" in capsys.readouterr().out

    def test_paley_wiener_suite(self, tmp_path, capsys):
        data = identity_problem()
        data["rhs"] = {"kind": "one_sided_exp"}
        path = write(tmp_path, data)
        assert run(["verify", "--suite", "paley-wiener", path]) == 0
        out = capsys.readouterr().out
        assert "# verdict=consistent" in out
        assert "# opposite_verdict=correctly-rejected" in out

    def test_continuation_suite(self, tmp_path, capsys):
        data = linear_problem()
        data["solver"] = {"phi_list": [math.pi / 8]}
        path = write(tmp_path, data)
        assert run(["verify", "--suite", "continuation", path]) == 0
        assert "# verdict=holds" in capsys.readouterr().out


class TestDemoCylinder:
    def test_byte_determinism_and_round_trip(self, tmp_path):
        out1 = tmp_path / "r1.csv"
        out2 = tmp_path / "r2.csv"
        prob = tmp_path / "cyl.json"
        args = ["demo-cylinder", "--n", "4", "--phi", str(math.pi / 16),
                "--out-problem", str(prob)]
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

        sol = tmp_path / "solve.csv"
        assert run(["solve", str(prob), "--out", str(sol)]) == 0
        demo_solution = table_lines(out1.read_text(), "solution")
        solve_solution = table_lines(sol.read_text(), "solution")
        assert demo_solution == solve_solution

    def test_eigenvalue_table(self, tmp_path, capsys):
        assert run(["demo-cylinder", "--n", "2", "--phi", str(math.pi / 16),
                    "--out-problem", str(tmp_path / "p.json")]) == 0
        out = capsys.readouterr().out
        line = [l for l in out.splitlines()
                if l.startswith("# eigenvalue_max_rel_err=")][0]
        assert float(line.split("=")[1]) <= 1e-10

    def test_single_mode(self, tmp_path, capsys):
        assert run(["demo-cylinder", "--n", "1", "--phi", str(math.pi / 16),
                    "--out-problem", str(tmp_path / "p.json")]) == 0
        rows = table_lines(capsys.readouterr().out, "eigenvalues")[1:]
        h = 0.5
        target = 2.0 / h * math.sin(math.pi * h / 2.0)
        ims = sorted(float(r.split(",")[1]) for r in rows)
        assert ims == pytest.approx([-target, target], rel=1e-12)

    def test_phi_zero_degenerate(self, tmp_path, capsys):
        assert run(["demo-cylinder", "--n", "2", "--phi", "0.0",
                    "--out-problem", str(tmp_path / "p.json")]) == 0
        out = capsys.readouterr().out
        dev = [l for l in out.splitlines() if l.startswith("# deviation=")][0]
        assert float(dev.split("=")[1]) <= 1e-6

    def test_clearance_failure_exit_4(self, tmp_path, capsys):
        # phi wide enough that the cone reaches the imaginary-axis spectrum
        assert run(["demo-cylinder", "--n", "2", "--phi", str(math.pi / 2),
                    "--out-problem", str(tmp_path / "p.json")]) == 4

    def test_generated_file_validates(self, tmp_path):
        data = cylinder_problem_dict(3, math.pi / 16)
        parse_problem(copy.deepcopy(data))


class TestDeterminism:
    def test_solve_bytes_stable(self, tmp_path):
        path = write(tmp_path, quad_problem())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["solve", path, "--out", str(a)]) == 0
        assert run(["solve", path, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_threads_flag_accepted_without_effect(self, tmp_path):
        path = write(tmp_path, quad_problem())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["solve", path, "--out", str(a), "--threads", "1"]) == 0
        assert run(["solve", path, "--out", str(b), "--threads", "8"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_scaled_with_non_analytic_rhs_exit_2(self, tmp_path):
        data = identity_problem()
        data["rhs"] = {"kind": "one_sided_exp"}
        path = write(tmp_path, data)
        assert run(["solve", path, "--scaled", str(math.pi / 8)]) == 2

    def test_continuation_suite_with_perturbation(self, tmp_path, capsys):
        data = linear_problem()
        data["rhs"] = {"kind": "shifted_gaussian", "center": [5.0, 0.0]}
        data["perturbation"] = {"kind": "rational_decay", "epsilon": 0.05,
                                "pole_scale": 3.0}
        data["solver"] = {"phi_list": [math.pi / 16]}
        path = write(tmp_path, data)
        assert run(["verify", "--suite", "continuation", path]) == 0
        assert "# verdict=holds" in capsys.readouterr().out
