"""Command-line interface: artifacts, schemas, and the exit-code contract."""

import math

from fracspline.cli import main

EXAMPLE2_CFG = """\
[problem]
m = 2
A = -1.5 0.5 0.5 -1.5
X0 = 1 2
gamma = 0.5
T = 1

[discretization]
n = 3
j = 4
"""

EXAMPLE1_CFG = """\
[problem]
m = 1
A = -1
X0 = 0
gamma = 0.5
T = 1
forcing1 = poly 2 1.0, caputo_power 2 1.0
reference1 = poly 2 1.0

[discretization]
n = 3
j = 5
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestSolve:
    def test_homogeneous_run_writes_solution(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, EXAMPLE2_CFG)
        assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "solution.csv")
        assert header == ["t", "x_1", "x_2", "ref_1", "ref_2", "err_1", "err_2"]
        # grid level defaults to s + 2 = 7
        assert len(rows) == 2**7 + 1
        ts = [float(r[0]) for r in rows]
        assert ts == sorted(ts) and ts[0] == 0.0 and ts[-1] == 1.0
        out = capsys.readouterr().out
        assert "residual_norm" in out and "linf_error_1" in out

    def test_forced_run_reports_noise_floor_error(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, EXAMPLE1_CFG)
        assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        linf = float(out.split("linf_error_1 = ")[1].splitlines()[0])
        assert linf <= 1e-12

    def test_grid_level_override(self, tmp_path):
        cfg = write_cfg(tmp_path, EXAMPLE2_CFG)
        assert main(["solve", "--config", cfg, "--out", str(tmp_path), "--grid-level", "5"]) == 0
        _, rows = read_csv(tmp_path / "solution.csv")
        assert len(rows) == 2**5 + 1

    def test_solvability_violation_exits_2(self, tmp_path, capsys):
        bad = EXAMPLE2_CFG + "s = 3\n"
        cfg = write_cfg(tmp_path, bad.replace("j = 4", "j = 4"))
        assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "solvability" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["solve", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_dump_config_round_trips(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, EXAMPLE1_CFG)
        assert main(["solve", "--config", cfg, "--dump-config"]) == 0
        dumped = capsys.readouterr().out
        from fracspline import parse_config

        assert parse_config(dumped) == parse_config(EXAMPLE1_CFG)

    def test_reruns_are_bit_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, EXAMPLE2_CFG)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["solve", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["solve", "--config", cfg, "--out", str(out_b)]) == 0
        assert (out_a / "solution.csv").read_bytes() == (out_b / "solution.csv").read_bytes()


class TestConverge:
    def test_sweep_table(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, EXAMPLE2_CFG)
        code = main(
            ["converge", "--config", cfg, "--j-min", "3", "--j-max", "5",
             "--out", str(tmp_path), "--threads", "1"]
        )
        assert code == 0
        header, rows = read_csv(tmp_path / "convergence.csv")
        assert header == ["j", "err_1", "err_2", "rho_1", "rho_2"]
        assert [r[0] for r in rows] == ["3", "4", "5"]
        assert rows[0][3] == "" and rows[0][4] == ""
        rhos = [float(r[3]) for r in rows[1:]]
        assert all(0.2 <= rho <= 1.0 for rho in rhos)
        errs = [float(r[1]) for r in rows]
        assert errs[0] > errs[1] > errs[2]

    def test_threaded_sweep_matches_serial(self, tmp_path):
        cfg = write_cfg(tmp_path, EXAMPLE2_CFG)
        out_a, out_b = tmp_path / "ser", tmp_path / "par"
        main(["converge", "--config", cfg, "--j-min", "3", "--j-max", "5",
              "--out", str(out_a), "--threads", "1"])
        main(["converge", "--config", cfg, "--j-min", "3", "--j-max", "5",
              "--out", str(out_b), "--threads", "4"])
        assert (out_a / "convergence.csv").read_bytes() == (out_b / "convergence.csv").read_bytes()

    def test_reversed_range_exits_2(self, tmp_path):
        cfg = write_cfg(tmp_path, EXAMPLE2_CFG)
        assert main(["converge", "--config", cfg, "--j-min", "5", "--j-max", "3"]) == 2

    def test_forced_problem_without_reference_exits_2(self, tmp_path, capsys):
        text = EXAMPLE1_CFG.replace("reference1 = poly 2 1.0\n", "")
        cfg = write_cfg(tmp_path, text)
        assert main(["converge", "--config", cfg, "--j-min", "3", "--j-max", "4"]) == 2
        assert "reference" in capsys.readouterr().err

    def test_classical_order_column(self, tmp_path):
        cfg = write_cfg(tmp_path, EXAMPLE2_CFG.replace("gamma = 0.5", "gamma = 1"))
        code = main(["converge", "--config", cfg, "--j-min", "2", "--j-max", "4",
                     "--out", str(tmp_path), "--threads", "1"])
        assert code == 0
        _, rows = read_csv(tmp_path / "convergence.csv")
        rhos = [float(r[3]) for r in rows[1:]] + [float(r[4]) for r in rows[1:]]
        assert all(3.3 <= rho <= 4.7 for rho in rhos)


class TestBasis:
    def test_writes_boundary_series(self, tmp_path):
        assert main(["basis", "--degree", "3", "--gamma", "0.5", "--out", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "basis.csv")
        assert header == ["ell", "t", "phi", "dgamma_phi"]
        ells = sorted({int(r[0]) for r in rows})
        assert ells == [-3, -2, -1, 0]
        start = [r for r in rows if float(r[1]) == 0.0]
        assert all(float(r[3]) == 0.0 for r in start)

    def test_classical_order_series(self, tmp_path):
        assert main(["basis", "--degree", "3", "--gamma", "1.0", "--out", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "basis.csv")
        from fracspline import bspline_derivative

        for row in rows[:50]:
            ell, t, _, dphi = int(row[0]), float(row[1]), row[2], float(row[3])
            assert math.isclose(dphi, bspline_derivative(3, t - ell), abs_tol=1e-12)

    def test_invalid_gamma_exits_2(self, tmp_path):
        assert main(["basis", "--degree", "3", "--gamma", "1.5", "--out", str(tmp_path)]) == 2


class TestMl:
    def test_exponential_column(self, tmp_path):
        assert main(
            ["ml", "--gamma", "1", "--z-min", "-1", "--z-max", "1", "--step", "0.5",
             "--out", str(tmp_path)]
        ) == 0
        _, rows = read_csv(tmp_path / "ml.csv")
        assert len(rows) == 5
        for z_str, value_str in rows:
            assert math.isclose(float(value_str), math.exp(float(z_str)), abs_tol=1e-12)

    def test_single_point(self, tmp_path):
        assert main(
            ["ml", "--gamma", "0.5", "--z-min", "0", "--z-max", "0", "--step", "1",
             "--out", str(tmp_path)]
        ) == 0
        _, rows = read_csv(tmp_path / "ml.csv")
        assert len(rows) == 1 and float(rows[0][1]) == 1.0

    def test_monotone_on_negative_axis(self, tmp_path):
        main(["ml", "--gamma", "0.5", "--z-min", "-2", "--z-max", "0", "--step", "0.25",
              "--out", str(tmp_path)])
        _, rows = read_csv(tmp_path / "ml.csv")
        values = [float(r[1]) for r in rows]
        assert values == sorted(values)  # increasing in z means decreasing in |z|

    def test_out_of_trust_region_exits_2(self, tmp_path):
        assert main(
            ["ml", "--gamma", "0.5", "--z-min", "-60", "--z-max", "0", "--step", "10",
             "--out", str(tmp_path)]
        ) == 2

    def test_numerical_failure_exits_3(self, tmp_path):
        # the positive-axis series for gamma = 0.1 at z = 50 outgrows the budget
        assert main(
            ["ml", "--gamma", "0.1", "--z-min", "50", "--z-max", "50", "--step", "1",
             "--out", str(tmp_path)]
        ) == 3
