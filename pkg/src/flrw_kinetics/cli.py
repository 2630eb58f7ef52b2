"""Batch driver: JSON run configuration in, CSV trajectory and report out.

Physics lives in the config file (there are too many knobs for flags); the
command line only selects what to do with it:

    flrw-kinetics simulate CONFIG [--out DIR] [--verbose]
    flrw-kinetics verify collision CONFIG [--out DIR]
    flrw-kinetics verify energy CONFIG [--out DIR]
    flrw-kinetics sweep CONFIG --param physics.Lambda --values 1,2,3 [--out DIR]

Exit codes: 0 ok, 1 a hard check failed, 2 config error, 3 the run ended at
its validity horizon.  Initialization is always constrained: U0 is derived
from the Hamiltonian constraint and must not appear in the config.
"""

import argparse
import copy
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .collision import CollisionConfig, Kernel, kernel_by_name, sphere_quadrature
from .cosmo import (
    ConstraintUnsolvableError,
    CosmoState,
    PhysParams,
    apriori_check,
    solve_constraint_for_U,
)
from .phase_space import (
    GridFunction,
    MomentumGrid,
    SobolevParams,
    gaussian_profile,
    load_grid_function,
    make_grid,
)
from .solver import (
    STATUS_HORIZON,
    NoContractionError,
    SolveConfig,
    Trajectory,
    decay_check,
    direct_solve,
    energy_estimate_check,
    picard_solve,
    save_trajectory,
)
from . import verification

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_HORIZON = 3

MODES = ("direct", "picard", "verify-collision", "verify-energy", "sweep")


class ConfigError(Exception):
    """Anything wrong with the run configuration (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    mode: str
    physics: PhysParams
    E0: float
    W0: float
    Z0: float
    Phi0: float
    psi0: float
    f0_desc: dict
    grid: MomentumGrid
    kernel: Kernel
    sphere_order: int
    stride: int
    solve: SolveConfig
    out_dir: str
    decay_r: Optional[float] = None
    decay_delta1: Optional[float] = None
    verify_samples: int = 1000
    verify_jacobian_samples: int = 100
    verify_moser_pairs: int = 20
    verify_kappa: Optional[float] = None
    seed: int = 0


def _need(raw: dict, key: str, section: str):
    if key not in raw:
        raise ConfigError(f"missing '{key}' in {section}")
    return raw[key]


def _config_from_dict(raw: dict, base_dir: str) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    mode = raw.get("mode", "direct")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")

    phys_raw = _need(raw, "physics", "config")
    try:
        physics = PhysParams(float(_need(phys_raw, "Lambda", "physics")),
                             float(_need(phys_raw, "m", "physics")),
                             float(phys_raw.get("rho", 0.0)))
    except ValueError as exc:
        raise ConfigError(f"physics: {exc}") from None

    init = _need(raw, "initial", "config")
    if "U0" in init:
        raise ConfigError("U0 is derived from the Hamiltonian constraint; "
                          "remove it from 'initial'")
    E0 = float(_need(init, "E0", "initial"))
    W0 = float(init.get("W0", 0.0))
    Z0 = float(init.get("Z0", 0.0))
    Phi0 = float(init.get("Phi0", 0.0))
    psi0 = float(init.get("psi0", 0.0))
    if E0 <= 0.0:
        raise ConfigError("E0 must be > 0")
    if W0 > 0.0:
        raise ConfigError("W0 must be <= 0")
    if Phi0 < 0.0:
        raise ConfigError("Phi0 must be >= 0")
    if psi0 < 0.0:
        raise ConfigError("psi0 must be >= 0")
    if psi0 == 0.0 and physics.rho > 0.0:
        raise ConfigError("psi0 must be > 0 when rho > 0 "
                          "(sqrt(2 psi) degenerates at psi=0)")
    f0_desc = _need(init, "f0", "initial")
    if not (isinstance(f0_desc, dict)
            and f0_desc.get("type") in ("gaussian", "zero", "file")):
        raise ConfigError("initial.f0 must be an object with type "
                          "'gaussian', 'zero' or 'file'")

    grid_raw = _need(raw, "grid", "config")
    try:
        grid = make_grid(float(_need(grid_raw, "u_max", "grid")),
                         int(_need(grid_raw, "n", "grid")))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None

    coll = _need(raw, "collision", "config")
    try:
        kernel = kernel_by_name(_need(coll, "kernel", "collision"),
                                float(coll.get("amplitude", 1.0)))
        sphere_order = int(coll.get("sphere_order", 6))
        stride = int(coll.get("stride", 1))
        CollisionConfig(sphere_order, stride)
    except ValueError as exc:
        raise ConfigError(f"collision: {exc}") from None
    if (grid.n - 1) % stride != 0:
        raise ConfigError(f"collision stride {stride} must divide n-1={grid.n - 1}")

    solve_raw = _need(raw, "solve", "config")
    try:
        solve = SolveConfig(
            dt=float(_need(solve_raw, "dt", "solve")),
            T=float(_need(solve_raw, "T", "solve")),
            picard_tol=float(solve_raw.get("picard_tol", 1e-8)),
            picard_max_iters=int(solve_raw.get("picard_max_iters", 25)),
            sobolev=SobolevParams(int(solve_raw.get("sobolev_m", 3)),
                                  float(solve_raw.get("sobolev_d", 3.0))),
            storage_stride=int(raw.get("output", {}).get("stride", 1)),
            record_source_norm=bool(solve_raw.get("record_source_norm", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"solve: {exc}") from None

    out_dir = raw.get("output", {}).get("directory", "out")
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(base_dir, out_dir)

    decay = raw.get("decay", {})
    decay_r = float(decay["r"]) if "r" in decay else None
    decay_delta1 = float(decay["delta1"]) if "delta1" in decay else None
    if (decay_r is None) != (decay_delta1 is None):
        raise ConfigError("decay block needs both 'r' and 'delta1'")

    verify = raw.get("verify", {})
    if f0_desc.get("type") == "file":
        path = f0_desc.get("path")
        if not path:
            raise ConfigError("initial.f0 of type 'file' needs a 'path'")
        if not os.path.isabs(path):
            f0_desc = dict(f0_desc, path=os.path.join(base_dir, path))

    return RunConfig(
        mode=mode, physics=physics, E0=E0, W0=W0, Z0=Z0, Phi0=Phi0, psi0=psi0,
        f0_desc=f0_desc, grid=grid, kernel=kernel, sphere_order=sphere_order,
        stride=stride, solve=solve, out_dir=out_dir,
        decay_r=decay_r, decay_delta1=decay_delta1,
        verify_samples=int(verify.get("samples", 1000)),
        verify_jacobian_samples=int(verify.get("jacobian_samples", 100)),
        verify_moser_pairs=int(verify.get("moser_pairs", 20)),
        verify_kappa=float(verify["kappa"]) if "kappa" in verify else None,
        seed=int(raw.get("seed", 0)),
    )


def load_config(path: str) -> RunConfig:
    """Read and validate a JSON run configuration."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"parse error in {path}: {exc.msg} at line {exc.lineno} "
            f"column {exc.colno}") from None
    return _config_from_dict(raw, os.path.dirname(os.path.abspath(path)))


def build_initial(cfg: RunConfig):
    """Materialize f0 and complete the state via the constraint (U0 derived)."""
    desc = cfg.f0_desc
    if desc["type"] == "zero":
        f0 = GridFunction(cfg.grid, np.zeros((cfg.grid.n,) * 3))
    elif desc["type"] == "gaussian":
        try:
            f0 = gaussian_profile(cfg.grid, float(_need(desc, "amplitude", "f0")),
                                  float(_need(desc, "width", "f0")))
        except ValueError as exc:
            raise ConfigError(f"initial.f0: {exc}") from None
    else:
        f0 = load_grid_function(desc["path"])
        if f0.grid != cfg.grid:
            raise ConfigError(
                f"f0 file grid (u_max={f0.grid.u_max}, n={f0.grid.n}) does not "
                f"match config grid (u_max={cfg.grid.u_max}, n={cfg.grid.n})")
    try:
        U0 = solve_constraint_for_U(cfg.E0, cfg.W0, cfg.Z0, cfg.Phi0, cfg.psi0,
                                    f0, cfg.physics)
    except ConstraintUnsolvableError as exc:
        raise ConfigError(str(exc)) from None
    s0 = CosmoState(cfg.E0, U0, cfg.W0, cfg.Z0, cfg.Phi0, cfg.psi0)
    return s0, f0


def _apriori_applicable(cfg: RunConfig, U0: float) -> bool:
    lam_floor = -4.0 * np.pi * cfg.physics.m ** 2 * cfg.Phi0 ** 2
    return U0 > 0.0 and cfg.physics.Lambda > lam_floor


def _simulate(cfg: RunConfig, verbose: bool) -> int:
    s0, f0 = build_initial(cfg)
    sq = sphere_quadrature(cfg.sphere_order)
    ccfg = CollisionConfig(cfg.sphere_order, cfg.stride)
    report = [f"mode: {cfg.mode}",
              f"grid: u_max={cfg.grid.u_max:g} n={cfg.grid.n}",
              f"derived U0 = {s0.U!r}"]
    if verbose:
        print(f"U0 = {s0.U!r}; integrating to T={cfg.solve.T:g} "
              f"with dt={cfg.solve.dt_effective:g}")

    contraction = None
    if cfg.mode == "picard":
        try:
            traj, contraction = picard_solve((s0, f0), cfg.physics, cfg.kernel,
                                             sq, ccfg, cfg.solve)
        except NoContractionError as exc:
            os.makedirs(cfg.out_dir, exist_ok=True)
            report.append(f"picard: {exc}")
            if exc.report is not None:
                report.append(exc.report.summary())
            _write(cfg.out_dir, "report.txt", "\n".join(report) + "\n")
            print(f"no contraction: {exc}", file=sys.stderr)
            return EXIT_CHECK_FAILED
    else:
        traj = direct_solve((s0, f0), cfg.physics, cfg.kernel, sq, ccfg, cfg.solve)

    os.makedirs(cfg.out_dir, exist_ok=True)
    save_trajectory(traj, os.path.join(cfg.out_dir, "trajectory.csv"))

    failed = False
    res = traj.diagnostics["ham_residual"]
    report.append(f"status: {traj.status}"
                  + (f" at t={traj.horizon_time:g}" if traj.horizon_time else ""))
    report.append(f"hamiltonian residual: t=0 {res[0]:.3e} (limit 1e-10), "
                  f"peak {np.max(np.abs(res)):.3e}")
    flux = traj.diagnostics["flux"]
    if flux[0] != 0.0:
        report.append(f"conserved flux drift: {np.max(np.abs(flux - flux[0])) / abs(flux[0]):.3e} relative")
    else:
        report.append(f"conserved flux: zero initially, peak |Z/E^3| {np.max(np.abs(flux)):.3e}")

    if _apriori_applicable(cfg, s0.U):
        bounds = apriori_check(traj, cfg.physics)
        report.append(bounds.summary())
        failed |= not bounds.passed
    else:
        report.append("a-priori bounds: skipped (needs U0 > 0 and "
                      "Lambda > -4 pi m^2 Phi0^2)")

    if cfg.decay_r is not None:
        dec = decay_check(traj, cfg.decay_r, cfg.decay_delta1)
        report.append(f"decay check: {'pass' if dec.passed else 'FAIL'} "
                      f"sup={dec.sup:.4e} vs 4r={4 * cfg.decay_r:.4e} "
                      f"(margin {dec.margin:+.3e})")
        failed |= not dec.passed

    if contraction is not None:
        report.append(contraction.summary())
        failed |= not contraction.converged

    final = traj.states[-1]
    report.append(f"final state: E={final.E!r} U={final.U!r} W={final.W!r} "
                  f"Z={final.Z!r} Phi={final.Phi!r} psi={final.psi!r}")
    _write(cfg.out_dir, "report.txt", "\n".join(report) + "\n")
    if verbose:
        print("\n".join(report))

    if traj.status == STATUS_HORIZON:
        return EXIT_HORIZON
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _verify_collision(cfg: RunConfig, verbose: bool) -> int:
    sq = sphere_quadrature(cfg.sphere_order)
    ccfg = CollisionConfig(cfg.sphere_order, cfg.stride)
    space = SobolevParams(3, cfg.solve.sobolev.d)
    suites = [
        verification.kinematics_suite(cfg.verify_samples, cfg.seed),
        verification.jacobian_suite(cfg.verify_jacobian_samples, cfg.seed + 1),
        verification.moser_suite(cfg.grid, 1.0, cfg.kernel, sq, ccfg, space,
                                 cfg.verify_moser_pairs, cfg.seed + 2),
    ]
    text = "\n".join(s.summary() for s in suites) + "\n"
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write(cfg.out_dir, "report.txt", text)
    print(text, end="")
    return EXIT_OK if all(s.passed for s in suites) else EXIT_CHECK_FAILED


def _verify_energy(cfg: RunConfig, verbose: bool) -> int:
    s0, f0 = build_initial(cfg)
    sq = sphere_quadrature(cfg.sphere_order)
    ccfg = CollisionConfig(cfg.sphere_order, cfg.stride)
    solve = SolveConfig(cfg.solve.dt, cfg.solve.T, cfg.solve.picard_tol,
                        cfg.solve.picard_max_iters, cfg.solve.sobolev,
                        cfg.solve.storage_stride, record_source_norm=True)
    traj = direct_solve((s0, f0), cfg.physics, cfg.kernel, sq, ccfg, solve)
    kappa = cfg.verify_kappa
    if kappa is None:
        kappa = max(float(min(s.U for s in traj.states)), 1e-3)
    ineq = energy_estimate_check(traj, kappa, cfg.solve.sobolev)
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_trajectory(traj, os.path.join(cfg.out_dir, "trajectory.csv"))
    text = ineq.summary() + f"\n(kappa={kappa:g}, status={traj.status})\n"
    _write(cfg.out_dir, "report.txt", text)
    print(text, end="")
    if traj.status == STATUS_HORIZON:
        return EXIT_HORIZON
    return EXIT_OK if ineq.feasible else EXIT_CHECK_FAILED


def _set_path(raw: dict, dotted: str, value: float) -> None:
    keys = dotted.split(".")
    node = raw
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError(f"sweep param path {dotted!r} not found in config")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError(f"sweep param path {dotted!r} not found in config")
    node[keys[-1]] = value


def _sweep(raw: dict, base_dir: str, param: str, values, out_override, verbose) -> int:
    rows = ["param,value,exit,status"]
    worst = EXIT_OK
    base_out = None
    for val in values:
        mutated = copy.deepcopy(raw)
        _set_path(mutated, param, val)
        sub = _config_from_dict(mutated, base_dir)
        out_root = out_override or sub.out_dir
        base_out = base_out or out_root
        sub_dir = os.path.join(out_root, f"{param.replace('.', '_')}={val:g}")
        sub = _replace_out(sub, sub_dir)
        code = _simulate(sub, verbose)
        status = {0: "ok", 1: "check-failed", 3: "validity-horizon"}.get(code, str(code))
        rows.append(f"{param},{val!r},{code},{status}")
        if worst == EXIT_OK and code != EXIT_OK:
            worst = code
    os.makedirs(base_out, exist_ok=True)
    _write(base_out, "sweep.csv", "\n".join(rows) + "\n")
    return worst


def _replace_out(cfg: RunConfig, out_dir: str) -> RunConfig:
    kw = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    kw["out_dir"] = out_dir
    return RunConfig(**kw)


def _write(directory: str, name: str, text: str) -> None:
    with open(os.path.join(directory, name), "w") as fh:
        fh.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="flrw-kinetics",
        description="Homogeneous relativistic kinetic matter on flat FLRW")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a direct or picard solve")
    sim.add_argument("config")
    sim.add_argument("--out", default=None)
    sim.add_argument("--verbose", action="store_true")

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", choices=("collision", "energy"))
    ver.add_argument("config")
    ver.add_argument("--out", default=None)
    ver.add_argument("--verbose", action="store_true")

    swp = sub.add_parser("sweep", help="repeat a simulate over parameter values")
    swp.add_argument("config")
    swp.add_argument("--param", required=True,
                     help="dotted config path, e.g. physics.Lambda")
    swp.add_argument("--values", required=True, help="comma-separated numbers")
    swp.add_argument("--out", default=None)
    swp.add_argument("--verbose", action="store_true")

    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"--values must be comma-separated numbers, "
                                  f"got {args.values!r}") from None
            if not values:
                raise ConfigError("--values is empty")
            try:
                with open(args.config) as fh:
                    raw = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read {args.config}: {exc}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"parse error in {args.config}: {exc.msg} at "
                                  f"line {exc.lineno} column {exc.colno}") from None
            base_dir = os.path.dirname(os.path.abspath(args.config))
            _config_from_dict(raw, base_dir)  # validate the base config as-is
            return _sweep(raw, base_dir, args.param, values, args.out, args.verbose)

        cfg = load_config(args.config)
        if args.out is not None:
            cfg = _replace_out(cfg, args.out)
        if args.command == "simulate":
            if cfg.mode not in ("direct", "picard"):
                raise ConfigError(f"simulate needs mode direct or picard, "
                                  f"got {cfg.mode!r}")
            return _simulate(cfg, args.verbose)
        if args.suite == "collision":
            return _verify_collision(cfg, args.verbose)
        return _verify_energy(cfg, args.verbose)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
