import hashlib
import subprocess
import sys

import numpy as np

import subgreen as sg
from subgreen import cli


def run_cli(args, tmp_path):
    return cli.main([*args, "--out", str(tmp_path)])


class TestCsvFormat:
    def test_single_cell_field(self, tmp_path):
        fld = sg.SolutionField(np.array([0.5]), np.array([1.0]),
                               np.array([[0.0]]), "greens")
        path = tmp_path / "one.csv"
        cli.emit_csv(fld, path)
        assert path.read_text() == "t,x,u\n0.5,1,0\n"

    def test_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(7)
        fld = sg.SolutionField(np.sort(rng.uniform(0.1, 2.0, 5)),
                               np.sort(rng.uniform(0.0, 3.0, 4)),
                               rng.standard_normal((5, 4)) * 1e-3, "greens")
        path = tmp_path / "field.csv"
        cli.emit_csv(fld, path)
        back = cli.parse_csv(path)
        assert np.array_equal(back.t_nodes, fld.t_nodes)
        assert np.array_equal(back.x_nodes, fld.x_nodes)
        assert np.array_equal(back.values, fld.values)
        path2 = tmp_path / "again.csv"
        cli.emit_csv(back, path2)
        assert path.read_text() == path2.read_text()

    def test_line_count(self, tmp_path):
        rc = run_cli(["--mode", "example1", "--beta", "0.5",
                      "--nt", "21", "--nx", "21"], tmp_path)
        assert rc == 0
        body = (tmp_path / "example1_beta0.5_greens.csv").read_text()
        assert body.count("\n") == 1 + 21 * 21
        assert body.endswith("\n")


class TestRunModes:
    def test_custom_zero_data(self, tmp_path):
        rc = run_cli(["--mode", "custom", "--beta", "0.5", "--nt", "4",
                      "--nx", "5", "--a", "3.0", "--T", "1.0"], tmp_path)
        assert rc == 0
        fld = cli.parse_csv(tmp_path / "custom_beta0.5_greens.csv")
        assert np.all(fld.values == 0.0)

    def test_custom_expressions(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode=custom\ntau=sin(x)\na=3.141592653589793\n"
                       "T=2.0\nnt=4\nnx=5\nbeta=0.5\n")
        rc = cli.main(["--mode", "custom", "--config", str(cfg),
                       "--out", str(tmp_path)])
        assert rc == 0
        fld = cli.parse_csv(tmp_path / "custom_beta0.5_greens.csv")
        # mid-domain value: the sine mode partially relaxed by t = 0.5
        assert 0.3 < fld.values[0, 2] < 1.0

    def test_determinism(self, tmp_path):
        digests = []
        for _ in range(2):
            rc = run_cli(["--mode", "example1", "--beta", "0.5",
                          "--nt", "5", "--nx", "7"], tmp_path)
            assert rc == 0
            digests.append(hashlib.sha256(
                (tmp_path / "example1_beta0.5_greens.csv").read_bytes()
            ).hexdigest())
        assert digests[0] == digests[1]

    def test_both_mode_writes_diff_summary(self, tmp_path):
        rc = run_cli(["--mode", "example1", "--beta", "0.5", "--nt", "64",
                      "--nx", "10", "--method", "both"], tmp_path)
        assert rc == 0
        summary = (tmp_path / "example1_beta0.5_diff.txt").read_text()
        rel = float(summary.splitlines()[1].split("=")[1])
        assert rel <= 5e-2

    def test_source_accumulation_monotone_in_time(self, tmp_path):
        # with zero initial data and a growing source, the field at any
        # fixed position accumulates monotonically
        rc = run_cli(["--mode", "example2", "--beta", "0.9", "--nt", "12",
                      "--nx", "9"], tmp_path)
        assert rc == 0
        fld = cli.parse_csv(tmp_path / "example2_beta0.9_greens.csv")
        interior = fld.values[:, 1:-1]
        assert np.all(np.diff(interior, axis=0) >= -1e-12)

    def test_beta_sweep_default(self, tmp_path):
        rc = run_cli(["--mode", "example1", "--nt", "4", "--nx", "5"],
                     tmp_path)
        assert rc == 0
        for beta in ("0.1", "0.5", "0.9"):
            assert (tmp_path / f"example1_beta{beta}_greens.csv").exists()

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode=custom\nnt=4\nnx=5\nT=1.0\nbeta=0.5\n")
        rc = cli.main(["--mode", "custom", "--config", str(cfg), "--nt", "3",
                       "--out", str(tmp_path)])
        assert rc == 0
        fld = cli.parse_csv(tmp_path / "custom_beta0.5_greens.csv")
        assert len(fld.t_nodes) == 3


class TestConfigValidation:
    def test_verify_tol_flag_parsed(self):
        cfg = cli.build_config(["--mode", "verify", "--verify-tol", "3.5"])
        assert cfg.verify_tol == 3.5


    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("speed=11\n")
        assert cli.main(["--mode", "custom", "--config", str(cfg)]) == 2

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nt 12\n")
        assert cli.main(["--mode", "custom", "--config", str(cfg)]) == 2

    def test_unsafe_expression_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("tau=__import__('os')\n")
        assert cli.main(["--mode", "custom", "--config", str(cfg), "--nt", "4",
                         "--nx", "5", "--out", str(tmp_path)]) == 2

    def test_invalid_beta_is_numerical_error_not_crash(self, tmp_path):
        rc = cli.main(["--mode", "custom", "--beta", "1.0", "--nt", "4",
                       "--nx", "5", "--out", str(tmp_path)])
        assert rc == 1

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "subgreen", "--mode", "custom", "--beta",
             "0.5", "--nt", "4", "--nx", "5", "--out", str(tmp_path)],
            capture_output=True, text=True)
        assert proc.returncode == 0
