import math

import numpy as np
import pytest

import subgreen as sg
from subgreen.errors import DomainError, GridMismatch

from conftest import params_for


class TestGridAndWeights:
    def test_grid_geometry(self, domain):
        grid = sg.FdGrid(nt=8, nx=6, domain=domain)
        assert grid.dt == pytest.approx(domain.T / 8)
        assert grid.dx == pytest.approx(domain.a / 7)
        assert len(grid.t_nodes) == 8 and grid.t_nodes[0] > 0
        assert grid.x_all[0] == 0.0 and grid.x_all[-1] == pytest.approx(domain.a)

    def test_minimum_sizes(self, domain):
        with pytest.raises(DomainError):
            sg.FdGrid(nt=3, nx=8, domain=domain)

    def test_telescoping(self, domain, beta_sweep):
        for beta in beta_sweep:
            p = params_for(beta)
            grid = sg.FdGrid(nt=64, nx=8, domain=domain)
            table = sg.build_weights(grid, p)
            for n in (1, 9, 64):
                assert table.row_sum(n) == pytest.approx(
                    sg.kernel_antiderivative(n * grid.dt, p), rel=1e-12)

    def test_first_weight_is_primitive_at_dt(self, domain, base_params):
        grid = sg.FdGrid(nt=16, nx=8, domain=domain)
        table = sg.build_weights(grid, base_params)
        assert table.w(1, 0) == pytest.approx(
            sg.kernel_antiderivative(grid.dt, base_params), rel=1e-14)

    def test_zero_weight_matches_classical_l1(self, domain):
        p0 = sg.FracParams(alpha=0.8, beta=0.5, gamma=0.0, delta=0.9)
        grid = sg.FdGrid(nt=32, nx=8, domain=domain)
        table = sg.build_weights(grid, p0)
        m = np.arange(1, grid.nt + 1)
        classical = ((m * grid.dt) ** 0.5 - ((m - 1) * grid.dt) ** 0.5)
        classical /= math.gamma(1.5)
        assert np.max(np.abs(table.diffs[1:] - classical)) <= 1e-12

    def test_weight_index_bounds(self, domain, base_params):
        grid = sg.FdGrid(nt=8, nx=8, domain=domain)
        table = sg.build_weights(grid, base_params)
        with pytest.raises(DomainError):
            table.w(3, 3)

    def test_nonpositive_weights_flagged_not_fatal(self, domain):
        p9 = params_for(0.9)
        grid = sg.FdGrid(nt=64, nx=8, domain=domain)
        table = sg.build_weights(grid, p9)
        assert not table.all_positive  # this kernel is not sign-definite here
        ps = sg.ProblemSpec(domain=domain, params=p9, tau=np.sin)
        fld = sg.fd_solve(ps, grid)
        assert np.all(np.isfinite(fld.values))
        assert fld.meta["weights_all_positive"] is False


class TestFdSolve:
    def test_zero_data(self, domain, base_params):
        grid = sg.FdGrid(nt=8, nx=8, domain=domain)
        ps = sg.ProblemSpec(domain=domain, params=base_params)
        fld = sg.fd_solve(ps, grid)
        assert fld.method == "oracle"
        assert np.all(fld.values == 0.0)

    def test_manufactured_convergence(self, domain, base_params):
        p = base_params

        def forcing(t, x):
            return np.sin(x) * (sg.kernel_antiderivative(t, p) + 1.0 + t)

        ps = sg.ProblemSpec(domain=domain, params=p, tau=np.sin, f=forcing)
        rels = []
        for (nt, nx) in [(64, 32), (128, 64)]:
            grid = sg.FdGrid(nt=nt, nx=nx, domain=domain)
            fld = sg.fd_solve(ps, grid)
            exact = (1.0 + grid.t_nodes)[:, None] * np.sin(grid.x_all)[None, :]
            rels.append(np.max(np.abs(fld.values - exact)) / np.max(np.abs(exact)))
        assert rels[0] <= 2e-2
        assert rels[0] / rels[1] >= 1.5

    @pytest.mark.parametrize("beta", [0.1, 0.5, 0.9])
    def test_eigenmode_relaxation_within_scheme_error(self, beta, domain):
        ps = sg.ProblemSpec(domain=domain, params=params_for(beta), tau=np.sin)
        grid = sg.FdGrid(nt=64, nx=32, domain=domain)
        fld = sg.fd_solve(ps, grid)
        m = np.array([sg.eigen_relaxation(t, 1.0, ps.params)
                      for t in grid.t_nodes])
        exact = m[:, None] * np.sin(grid.x_all)[None, :]
        rel = np.max(np.abs(fld.values - exact)) / np.max(np.abs(exact))
        assert rel <= 5e-2

    def test_classical_limit_cross_check(self, domain):
        # with zero weight and scale the operators are classical; the
        # closed-form path and the scheme must agree
        p0 = sg.FracParams(alpha=0.8, beta=0.5, gamma=0.0, delta=0.0)
        ps = sg.ProblemSpec(domain=domain, params=p0, tau=np.sin)
        grid = sg.FdGrid(nt=64, nx=24, domain=domain)
        fld = sg.fd_solve(ps, grid)
        gf = sg.solve_u(ps, (grid.t_nodes, grid.x_all))
        assert sg.max_rel_diff(gf, fld) <= 5e-2

    def test_dirichlet_walls_written(self, domain, base_params):
        ps = sg.ProblemSpec(domain=domain, params=base_params,
                            phi0=lambda t: 0.3 * np.ones_like(t),
                            check_compat=False)
        grid = sg.FdGrid(nt=8, nx=8, domain=domain)
        fld = sg.fd_solve(ps, grid)
        assert np.allclose(fld.values[:, 0], 0.3)
        assert np.allclose(fld.values[:, -1], 0.0)


class TestApplyOperator:
    def test_self_consistency_reproduces_forcing(self, domain, base_params):
        ps = sg.ProblemSpec(domain=domain, params=base_params, tau=np.sin,
                            f=lambda t, x: t * np.sin(x))
        grid = sg.FdGrid(nt=16, nx=12, domain=domain)
        fld = sg.fd_solve(ps, grid)
        res = sg.fd_apply_operator(fld, grid, base_params,
                                   initial=np.sin(grid.x_all))
        f_vals = grid.t_nodes[:, None] * np.sin(grid.x_all[1:-1])[None, :]
        assert np.max(np.abs(res - f_vals)) <= 1e-10

    def test_zero_field(self, domain, base_params):
        grid = sg.FdGrid(nt=8, nx=8, domain=domain)
        fld = sg.SolutionField(grid.t_nodes, grid.x_all,
                               np.zeros((8, 10)), "oracle")
        res = sg.fd_apply_operator(fld, grid, base_params)
        assert np.all(res == 0.0)

    def test_grid_mismatch_rejected(self, domain, base_params):
        grid = sg.FdGrid(nt=8, nx=8, domain=domain)
        fld = sg.SolutionField(grid.t_nodes + 0.01, grid.x_all,
                               np.zeros((8, 10)), "oracle")
        with pytest.raises(GridMismatch):
            sg.fd_apply_operator(fld, grid, base_params)

    def test_residual_of_kernel_solution_shrinks(self, domain):
        # the discrete operator applied to the closed-form field tends to
        # the forcing (zero here) away from the starting layer
        ps = sg.ProblemSpec(domain=domain, params=params_for(0.5), tau=np.sin)
        maxima = []
        for (nt, nx) in [(16, 12), (32, 24)]:
            grid = sg.FdGrid(nt=nt, nx=nx, domain=domain)
            fld = sg.solve_u(ps, (grid.t_nodes, grid.x_all))
            res = sg.fd_apply_operator(fld, grid, ps.params,
                                       initial=np.sin(grid.x_all))
            window = grid.t_nodes >= 0.25
            maxima.append(np.max(np.abs(res[window])))
        assert maxima[1] < maxima[0]


class TestCrossMethod:
    def test_initial_data_configuration(self, domain):
        # the full sweep over orders and both configurations runs in the
        # acceptance suite; one mid-order check lives here
        ps = sg.ProblemSpec(domain=domain, params=params_for(0.5), tau=np.sin)
        grid = sg.FdGrid(nt=64, nx=32, domain=domain)
        gf = sg.solve_u(ps, (grid.t_nodes, grid.x_all))
        ff = sg.fd_solve(ps, grid)
        assert sg.max_rel_diff(gf, ff) <= 5e-2
