"""Secondary acceptance: render the two reference sweeps from the solver CLI.

Consumes the primary package only through its public CSV interface (the
``subgreen`` console entry point run in a subprocess).
"""

import subprocess
import sys

import pytest

from plotkit import PanelSpec, load_grid, render, slice_positions
from plotkit.panels import GridMismatch

BETAS = ("0.1", "0.5", "0.9")


def run_solver(mode, out_dir, nt="10", nx="9"):
    cmd = [sys.executable, "-m", "subgreen", "--mode", mode,
           "--nt", nt, "--nx", nx, "--out", str(out_dir)]
    for b in BETAS:
        cmd += ["--beta", b]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return [out_dir / f"{mode}_beta{b}_greens.csv" for b in BETAS]


@pytest.fixture(scope="module")
def sweeps(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("sweeps")
    return {mode: run_solver(mode, out_dir)
            for mode in ("example1", "example2")}


def test_example_sweeps_render_with_expected_ordering(sweeps, tmp_path):
    for mode, expect_increasing in (("example1", False), ("example2", True)):
        paths = sweeps[mode]
        out = tmp_path / f"{mode}.png"
        render(PanelSpec(csv_paths=[str(p) for p in paths],
                         labels=[f"beta={b}" for b in BETAS],
                         out_path=str(out)))
        assert out.stat().st_size > 0
        grids = [load_grid(p) for p in paths]
        # at the default slice positions, the final-time values order
        # monotonically across the sweep
        for idx in slice_positions(grids[0].x, (0.25, 0.5, 0.75)):
            finals = [g.u[-1, idx] for g in grids]
            if expect_increasing:
                assert finals[0] < finals[1] < finals[2]
            else:
                assert finals[0] > finals[1] > finals[2]


def test_mixed_resolution_sweep_refused(sweeps, tmp_path):
    coarse = run_solver("example1", tmp_path, nt="6", nx="7")
    mixed = [str(sweeps["example1"][0]), str(coarse[1])]
    with pytest.raises(GridMismatch):
        render(PanelSpec(csv_paths=mixed, out_path=str(tmp_path / "no.png")))
