"""Command-line entry point.

Runs the two reference configurations (initial-data relaxation and
external forcing), user-configured problems, or the verification suite,
and writes solution grids as plain CSV for downstream plotting.

Exit codes: 0 success, 1 numerical failure or failed verification,
2 invalid configuration.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SubgreenError
from .greens import DomainSpec
from .operators import QuadratureSpec
from .oracle import FdGrid, fd_solve
from .solver import ProblemSpec, SolutionField, max_rel_diff, solve_u
from .specfun import FracParams, SeriesControl
from . import verification

__all__ = ["RunConfig", "run", "emit_csv", "parse_csv", "main"]

_EXAMPLE_DEFAULTS = {
    "alpha": 0.8, "gamma": 0.3, "delta": 0.5, "a": math.pi, "T": 2.0,
}
_DEFAULT_BETAS = (0.1, 0.5, 0.9)
_EXPR_NAMES = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "sqrt": np.sqrt, "log": np.log, "abs": np.abs, "tanh": np.tanh,
    "pi": math.pi, "e": math.e,
}


@dataclass
class RunConfig:
    """Fully resolved run description (flags over config over defaults)."""

    mode: str
    alpha: float = 0.8
    betas: tuple = _DEFAULT_BETAS
    gamma: float = 0.3
    delta: float = 0.5
    a: float = math.pi
    T: float = 2.0
    nt: int = 41
    nx: int = 21
    method: str = "greens"
    out: str = "."
    verify_tol: float = 1.0
    k_max: int | None = None
    i_max: int | None = None
    n_images: int | None = None
    n_panels: int | None = None
    data: dict = field(default_factory=dict)  # custom-mode expressions

    def series_control(self) -> SeriesControl:
        base = SeriesControl()
        return SeriesControl(
            k_max=self.k_max or base.k_max,
            i_max=self.i_max or base.i_max,
            n_images=self.n_images or base.n_images,
        )

    def quadrature(self) -> QuadratureSpec:
        base = QuadratureSpec()
        return QuadratureSpec(n_panels=self.n_panels or base.n_panels)


def _compile_expr(expr: str, variables: tuple):
    """Compile a restricted math expression of the given variables."""
    code = compile(expr, "<config>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in variables:
            raise ValueError(f"name {name!r} not allowed in expression {expr!r}")

    def fn(*args):
        env = dict(_EXPR_NAMES)
        env.update(zip(variables, args))
        return eval(code, {"__builtins__": {}}, env)  # noqa: S307 - sandboxed

    return fn


def _problem(cfg: RunConfig, beta: float) -> ProblemSpec:
    dom = DomainSpec(a=cfg.a, T=cfg.T)
    p = FracParams(alpha=cfg.alpha, beta=beta, gamma=cfg.gamma, delta=cfg.delta)
    if cfg.mode == "example1":
        return ProblemSpec(domain=dom, params=p, tau=np.sin)
    if cfg.mode == "example2":
        return ProblemSpec(domain=dom, params=p, f=lambda t, x: t * np.sin(x))
    data = {}
    for key, variables in (("phi0", ("t",)), ("phi1", ("t",)),
                           ("tau", ("x",)), ("f", ("t", "x"))):
        if key in cfg.data:
            data[key] = _compile_expr(cfg.data[key], variables)
    return ProblemSpec(domain=dom, params=p, check_compat=False, **data)


def emit_csv(fld: SolutionField, path) -> None:
    """Write a field as `t,x,u` rows, t-major, 17 significant digits."""
    lines = ["t,x,u"]
    for i, t in enumerate(fld.t_nodes):
        for j, x in enumerate(fld.x_nodes):
            lines.append(f"{t:.17g},{x:.17g},{fld.values[i, j]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_csv(path) -> SolutionField:
    """Inverse of emit_csv; floats round-trip bitwise."""
    rows = Path(path).read_text().strip().splitlines()
    if rows[0] != "t,x,u":
        raise SubgreenError(f"{path}: expected header 't,x,u', got {rows[0]!r}")
    data = [tuple(float(v) for v in line.split(",")) for line in rows[1:]]
    t_nodes = list(dict.fromkeys(r[0] for r in data))
    x_nodes = list(dict.fromkeys(r[1] for r in data))
    values = np.array([r[2] for r in data]).reshape(len(t_nodes), len(x_nodes))
    return SolutionField(t_nodes=np.array(t_nodes), x_nodes=np.array(x_nodes),
                         values=values, method="parsed")


def _solve(cfg: RunConfig, beta: float, method: str) -> SolutionField:
    ps = _problem(cfg, beta)
    if method == "oracle":
        grid = FdGrid(nt=cfg.nt, nx=cfg.nx - 2, domain=ps.domain)
        return fd_solve(ps, grid, cfg.series_control())
    t_nodes = ps.domain.T / cfg.nt * np.arange(1, cfg.nt + 1)
    x_nodes = ps.domain.a / (cfg.nx - 1) * np.arange(cfg.nx)
    return solve_u(ps, (t_nodes, x_nodes), cfg.quadrature(), cfg.series_control())


def run(cfg: RunConfig, emit=print) -> int:
    """Execute one configuration; returns the process exit status."""
    if cfg.mode == "verify":
        ok = verification.run_all(tol_scale=cfg.verify_tol, emit=emit)
        emit("verification " + ("PASSED" if ok else "FAILED"))
        return 0 if ok else 1
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    methods = ("greens", "oracle") if cfg.method == "both" else (cfg.method,)
    try:
        for beta in cfg.betas:
            fields = {}
            for method in methods:
                fld = _solve(cfg, beta, method)
                fields[method] = fld
                path = out_dir / f"{cfg.mode}_beta{beta:g}_{method}.csv"
                emit_csv(fld, path)
                emit(f"wrote {path}")
            if cfg.method == "both":
                diff = np.abs(fields["greens"].values - fields["oracle"].values)
                rel = max_rel_diff(fields["greens"], fields["oracle"])
                path = out_dir / f"{cfg.mode}_beta{beta:g}_diff.txt"
                path.write_text(
                    f"max_abs_diff={np.max(diff):.17g}\n"
                    f"max_rel_diff={rel:.17g}\n")
                emit(f"wrote {path} (max rel diff {rel:.3e})")
    except SubgreenError as exc:
        emit(f"numerical failure: {exc}")
        return 1
    except ValueError as exc:
        emit(f"invalid configuration: {exc}")
        return 2
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="subgreen",
        description="Green's-function and finite-difference solvers for "
                    "Prabhakar sub-diffusion on a strip.")
    ap.add_argument("--mode", choices=("example1", "example2", "custom", "verify"),
                    required=True)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--beta", type=float, action="append",
                    help="repeatable; defaults to the 0.1/0.5/0.9 sweep")
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--delta", type=float)
    ap.add_argument("--a", type=float)
    ap.add_argument("--T", type=float)
    ap.add_argument("--nt", type=int)
    ap.add_argument("--nx", type=int)
    ap.add_argument("--method", choices=("greens", "oracle", "both"))
    ap.add_argument("--out", type=str)
    ap.add_argument("--config", type=str, help="flat key=value file")
    ap.add_argument("--verify-tol", type=float, dest="verify_tol")
    return ap


_CONFIG_KEYS = {
    "mode": str, "alpha": float, "gamma": float, "delta": float,
    "a": float, "T": float, "nt": int, "nx": int, "method": str,
    "out": str, "verify_tol": float, "k_max": int, "i_max": int,
    "n_images": int, "n_panels": int,
}
_DATA_KEYS = ("phi0", "phi1", "tau", "f")


def _read_config(path: str) -> dict:
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "beta":
            out.setdefault("betas", []).append(float(value))
        elif key in _CONFIG_KEYS:
            out[key] = _CONFIG_KEYS[key](value)
        elif key in _DATA_KEYS:
            out.setdefault("data", {})[key] = value
        else:
            raise ValueError(f"{path}:{ln}: unknown key {key!r}")
    return out


def build_config(argv=None) -> RunConfig:
    """Resolve flags, config file and mode defaults into a RunConfig."""
    args = _build_parser().parse_args(argv)
    merged: dict = {}
    if args.config:
        merged.update(_read_config(args.config))
    for key in ("mode", "alpha", "gamma", "delta", "a", "T", "nt", "nx",
                "method", "out", "verify_tol"):
        val = getattr(args, key)
        if val is not None:
            merged[key] = val
    if args.beta:
        merged["betas"] = args.beta
    mode = merged.get("mode")
    defaults = dict(_EXAMPLE_DEFAULTS) if mode in ("example1", "example2") else {}
    for key, val in defaults.items():
        merged.setdefault(key, val)
    merged.setdefault("betas", list(_DEFAULT_BETAS))
    merged["betas"] = tuple(merged["betas"])
    if merged.get("nx", 21) < 3:
        raise ValueError("nx must be at least 3 (two walls and an interior)")
    return RunConfig(**merged)


def main(argv=None) -> int:
    try:
        cfg = build_config(argv)
    except (ValueError, TypeError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
