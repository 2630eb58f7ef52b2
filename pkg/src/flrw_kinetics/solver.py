"""Coupled time integration of the scalar sector and the kinetic equation.

Two integration routes are provided.

direct_solve marches the full nonlinear system: per step, RK4 on the six
scalars over a half step with f frozen (moments recomputed at every RK
stage), one Strang-split transport step for f at the half-step state, then
the second scalar half step.  The outer Strang sandwich keeps the
scalar/field coupling second order, so the Hamiltonian-constraint drift is
dominated by the splitting, not the RK4 truncation.

picard_solve reproduces the iteration that underlies the existence argument:
iterate n+1 integrates the previous iterate's right-hand sides directly
(the scalar equations' sources depend on iterate n alone, so with knot
values interpolated linearly in time, RK4 per step reduces exactly to the
trapezoid rule), and f is advected at the frozen speed Eⁿ Zⁿ ∫fⁿ with the
frozen collision source (1/u⁰ₙ) Q̃(fⁿ,fⁿ) added along the characteristic.
Successive iterates are compared in the Cauchy norm

    Σᵢ sup_t |ΔXᵢ(t)| + sup_t ‖Δf(t)‖_{H²_d},

the norm in which the underlying fixed-point argument contracts; three
consecutive non-decreasing distances signal that T is too large for
contraction.

Both routes mirror maximal-interval behavior: when ψ reaches its floor with
ρ > 0 (or E collapses), the run ends early with a validity-horizon status
rather than an exception.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .collision import CollisionConfig, Kernel, SphereQuadrature, collision_term
from .cosmo import (
    EPS_E,
    EPS_PSI,
    CosmoState,
    PhysParams,
    PsiDegenerateError,
    compute_moments,
    conserved_em_flux,
    cosmo_rhs,
    hamiltonian_residual,
)
from .phase_space import GridFunction, SobolevParams, moment_number, sobolev_norm
from .transport import advection_speed, shift_interpolate, transport_step

STATUS_COMPLETED = "completed"
STATUS_HORIZON = "validity-horizon"

#: Initial data must satisfy the Hamiltonian constraint to this tolerance.
CONSTRAINT_TOL = 1e-10


class InvalidInitialDataError(ValueError):
    """Initial data violate the Hamiltonian constraint."""


class MisalignedTrajectoriesError(ValueError):
    """Two trajectories do not share a time grid."""


class NoContractionError(RuntimeError):
    """Picard distances failed to decrease; T exceeds the contraction window."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolveConfig:
    """Integration parameters shared by both solvers."""

    dt: float
    T: float
    picard_tol: float = 1e-8
    picard_max_iters: int = 25
    sobolev: SobolevParams = field(default_factory=lambda: SobolevParams(3, 3.0))
    storage_stride: int = 1
    record_source_norm: bool = False

    def __post_init__(self):
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if not (self.T >= self.dt):
            raise ValueError("T must be >= dt")
        if self.picard_tol <= 0.0:
            raise ValueError("picard_tol must be positive")
        if int(self.picard_max_iters) < 1:
            raise ValueError("picard_max_iters must be >= 1")
        if int(self.storage_stride) < 1:
            raise ValueError("storage_stride must be >= 1")

    @property
    def nsteps(self) -> int:
        return max(1, int(round(self.T / self.dt)))

    @property
    def dt_effective(self) -> float:
        # Land exactly on T even when T/dt is not a whole number.
        return self.T / self.nsteps


@dataclass(frozen=True)
class Trajectory:
    """Stored solution knots plus per-time diagnostics.

    diagnostics maps column name to an array aligned with times; the always
    present columns are ham_residual, flux, f_sobolev, f_min, f_mass, with
    src_sobolev added when the run recorded collision-source norms.
    """

    times: np.ndarray
    states: tuple
    fields: tuple
    diagnostics: dict
    sobolev: SobolevParams
    status: str = STATUS_COMPLETED
    horizon_time: Optional[float] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be 1-D and strictly increasing")
        if not (len(self.states) == len(self.fields) == times.size):
            raise ValueError("states/fields must align with times")
        for arr in self.diagnostics.values():
            if np.shape(arr) != times.shape:
                raise ValueError("diagnostics must align with times")


CSV_COLUMNS = ("t", "E", "U", "W", "Z", "Phi", "psi",
               "ham_residual", "flux", "f_sobolev", "f_min", "f_mass")


def save_trajectory(traj: Trajectory, path) -> None:
    """Write the CSV time series (fixed shortest round-trip float format)."""
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for j, t in enumerate(traj.times):
            s = traj.states[j]
            row = [t, s.E, s.U, s.W, s.Z, s.Phi, s.psi,
                   traj.diagnostics["ham_residual"][j],
                   traj.diagnostics["flux"][j],
                   traj.diagnostics["f_sobolev"][j],
                   traj.diagnostics["f_min"][j],
                   traj.diagnostics["f_mass"][j]]
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


class _Recorder:
    """Accumulates stored knots and diagnostics during a run."""

    def __init__(self, p, kernel, sq, ccfg, cfg):
        self.p, self.kernel, self.sq, self.ccfg, self.cfg = p, kernel, sq, ccfg, cfg
        self.times, self.states, self.fields = [], [], []
        self.diag = {k: [] for k in
                     ("ham_residual", "flux", "f_sobolev", "f_min", "f_mass")}
        if cfg.record_source_norm:
            self.diag["src_sobolev"] = []

    def record(self, t, s, f):
        self.times.append(t)
        self.states.append(s)
        self.fields.append(f)
        self.diag["ham_residual"].append(hamiltonian_residual(s, f, self.p))
        self.diag["flux"].append(conserved_em_flux(s))
        self.diag["f_sobolev"].append(sobolev_norm(f, self.cfg.sobolev))
        self.diag["f_min"].append(f.min_value)
        self.diag["f_mass"].append(moment_number(f))
        if self.cfg.record_source_norm:
            src = collision_term(f, s.E, self.kernel, self.sq, self.ccfg)
            self.diag["src_sobolev"].append(sobolev_norm(src, self.cfg.sobolev))

    def build(self, status, horizon_time=None) -> Trajectory:
        return Trajectory(np.array(self.times), tuple(self.states),
                          tuple(self.fields),
                          {k: np.array(v) for k, v in self.diag.items()},
                          self.cfg.sobolev, status, horizon_time)


def _check_initial(s0: CosmoState, f0: GridFunction, p: PhysParams) -> None:
    res = hamiltonian_residual(s0, f0, p)
    if abs(res) > CONSTRAINT_TOL:
        raise InvalidInitialDataError(
            f"Hamiltonian residual {res:.3e} at t=0 exceeds {CONSTRAINT_TOL:g}; "
            "derive U0 with solve_constraint_for_U")


def _horizon_reason(s: CosmoState, p: PhysParams):
    if s.psi <= EPS_PSI and p.rho > 0.0:
        return f"psi={s.psi:.3e} at floor with rho>0"
    if s.psi < -EPS_PSI:
        return f"psi={s.psi:.3e} negative"
    if s.E <= EPS_E:
        return f"E={s.E:.3e} at floor"
    return None


def _rk4_scalar_step(s: CosmoState, f: GridFunction, h: float,
                     p: PhysParams) -> CosmoState:
    """Classic RK4 on the six scalars with f frozen; moments use stage E."""
    if np.any(f.values):
        def rhs(state):
            return cosmo_rhs(state, compute_moments(f, state.E), p)
    else:
        zero = compute_moments(f, s.E)

        def rhs(state):
            return cosmo_rhs(state, zero, p)
    y = s.as_array()
    k1 = rhs(s)
    k2 = rhs(CosmoState.from_array(y + 0.5 * h * k1))
    k3 = rhs(CosmoState.from_array(y + 0.5 * h * k2))
    k4 = rhs(CosmoState.from_array(y + h * k3))
    return CosmoState.from_array(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def direct_solve(init, p: PhysParams, kernel: Kernel, sq: SphereQuadrature,
                 ccfg: CollisionConfig, cfg: SolveConfig,
                 check_constraint: bool = True) -> Trajectory:
    """March the full nonlinear system from init = (CosmoState, GridFunction).

    check_constraint=False admits unconstrained data (useful for studying
    the pure scalar flow from states that do not satisfy the constraint);
    constrained initialization is the only mode the CLI exposes.
    """
    s, f = init
    if check_constraint:
        _check_initial(s, f, p)
    dt = cfg.dt_effective
    stride = int(cfg.storage_stride)
    rec = _Recorder(p, kernel, sq, ccfg, cfg)
    rec.record(0.0, s, f)

    for j in range(cfg.nsteps):
        reason = _horizon_reason(s, p)
        if reason is not None:
            return rec.build(STATUS_HORIZON, horizon_time=j * dt)
        try:
            s_half = _rk4_scalar_step(s, f, dt / 2.0, p)
            f = transport_step(f, s_half, dt, s_half.E, kernel, sq, ccfg)
            s = _rk4_scalar_step(s_half, f, dt / 2.0, p)
        except PsiDegenerateError:
            return rec.build(STATUS_HORIZON, horizon_time=j * dt)
        if (j + 1) % stride == 0 or j + 1 == cfg.nsteps:
            rec.record((j + 1) * dt, s, f)
    return rec.build(STATUS_COMPLETED)


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionReport:
    """Per-iteration Cauchy distances of the Picard sequence."""

    norms: tuple
    ratios: tuple
    converged: bool
    iterations: int

    def summary(self) -> str:
        lines = [f"picard: {'converged' if self.converged else 'NOT converged'} "
                 f"after {self.iterations} iteration(s)"]
        for i, nrm in enumerate(self.norms):
            ratio = f"  ratio {self.ratios[i - 1]:.3f}" if i >= 1 else ""
            lines.append(f"  iter {i + 1}: |X^n+1 - X^n| = {nrm:.6e}{ratio}")
        return "\n".join(lines)


def _cauchy_distance(xa, xb, fa, fb, d: float) -> float:
    """Σᵢ sup_t |ΔXᵢ| + sup_t ‖Δf‖_{H²_d} between two knot sequences."""
    total = float(np.sum(np.max(np.abs(xa - xb), axis=0)))
    space = SobolevParams(2, d)
    worst = 0.0
    for ga, gb in zip(fa, fb):
        diff = GridFunction(ga.grid, ga.values - gb.values)
        worst = max(worst, sobolev_norm(diff, space))
    return total + worst


def cauchy_norm(a: Trajectory, b: Trajectory, d: Optional[float] = None) -> float:
    """Cauchy norm between two trajectories on the same time grid."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times,
                                                         rtol=0.0, atol=1e-12):
        raise MisalignedTrajectoriesError("trajectories use different time grids")
    if d is None:
        d = a.sobolev.d
    xa = np.array([s.as_array() for s in a.states])
    xb = np.array([s.as_array() for s in b.states])
    return _cauchy_distance(xa, xb, a.fields, b.fields, d)


def _picard_sweep(x, fields, times, p, kernel, sq, ccfg):
    """One Picard update: integrate the previous iterate's right-hand sides."""
    nk = times.size
    rhs = np.empty((nk, 6))
    speed = np.empty(nk)
    sources = []
    for j in range(nk):
        s_j = CosmoState.from_array(x[j])
        f_j = fields[j]
        rhs[j] = cosmo_rhs(s_j, compute_moments(f_j, s_j.E), p)
        speed[j] = advection_speed(s_j, f_j)
        sources.append(collision_term(f_j, s_j.E, kernel, sq, ccfg))

    # Scalar knots: X^{n+1}(t) = X0 + integral of the knot RHS.  With linear
    # interpolation between knots this is exactly what stepwise RK4 yields.
    x_new = x[0] + cumulative_trapezoid(rhs, times, axis=0, initial=0.0)

    # Field knots: advect at the frozen speed and add the frozen source along
    # the characteristic (trapezoid in time, midpoint shift for the source).
    grid = fields[0].grid
    f_new = [fields[0]]
    for j in range(nk - 1):
        dt = times[j + 1] - times[j]
        delta = 0.5 * (speed[j] + speed[j + 1]) * dt
        mid = GridFunction(grid, 0.5 * (sources[j].values + sources[j + 1].values))
        vals = (shift_interpolate(f_new[j], delta).values
                + dt * shift_interpolate(mid, delta / 2.0).values)
        f_new.append(GridFunction(grid, vals))
    return x_new, f_new


def picard_solve(init, p: PhysParams, kernel: Kernel, sq: SphereQuadrature,
                 ccfg: CollisionConfig, cfg: SolveConfig,
                 check_constraint: bool = True):
    """Fixed-point iteration from the constant initial guess.

    Returns (Trajectory, ContractionReport).  Raises NoContractionError after
    three consecutive non-decreasing Cauchy distances (or a non-finite one),
    the numerical echo of the smallness condition on T.
    """
    s0, f0 = init
    if check_constraint:
        _check_initial(s0, f0, p)
    nsteps = cfg.nsteps
    times = np.linspace(0.0, cfg.T, nsteps + 1)

    x = np.tile(s0.as_array(), (nsteps + 1, 1))
    fields = [f0] * (nsteps + 1)

    norms, ratios = [], []
    converged = False
    rising = 0
    iterations = 0
    for iterations in range(1, int(cfg.picard_max_iters) + 1):
        try:
            x_new, f_new = _picard_sweep(x, fields, times, p, kernel, sq, ccfg)
        except (ValueError, PsiDegenerateError) as exc:
            # A diverging iterate shows up as unphysical knots (E <= 0, a
            # non-finite field, a shift past the box) before the Cauchy
            # distances can record the rise; same verdict either way.
            raise NoContractionError(
                f"iterate {iterations} left the physical domain: {exc}",
                ContractionReport(tuple(norms), tuple(ratios), False,
                                  iterations)) from exc
        dist = _cauchy_distance(x, x_new, fields, f_new, cfg.sobolev.d)
        if not np.isfinite(dist):
            raise NoContractionError(
                f"iterate {iterations} diverged (non-finite Cauchy distance)",
                ContractionReport(tuple(norms), tuple(ratios), False, iterations))
        norms.append(dist)
        if len(norms) >= 2:
            ratio = norms[-1] / norms[-2] if norms[-2] > 0.0 else 0.0
            ratios.append(ratio)
            rising = rising + 1 if ratio >= 1.0 else 0
            if rising >= 3:
                raise NoContractionError(
                    "Cauchy distances non-decreasing for 3 iterations; "
                    "shrink T to restore contraction",
                    ContractionReport(tuple(norms), tuple(ratios), False, iterations))
        x, fields = x_new, f_new
        if dist <= cfg.picard_tol:
            converged = True
            break

    report = ContractionReport(tuple(norms), tuple(ratios), converged, iterations)
    if any(r >= 1.0 for r in ratios[next(
            (i for i, r in enumerate(ratios) if r < 1.0), len(ratios)):]):
        warnings.warn("contraction ratios rose again after first dropping below 1",
                      stacklevel=2)

    stride = int(cfg.storage_stride)
    keep = [j for j in range(nsteps + 1) if j % stride == 0 or j == nsteps]
    rec = _Recorder(p, kernel, sq, ccfg, cfg)
    for j in keep:
        rec.record(times[j], CosmoState.from_array(x[j]), fields[j])
    return rec.build(STATUS_COMPLETED), report


# ---------------------------------------------------------------------------
# Post-hoc inequality diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    """Result of the energy-estimate constant search."""

    feasible: bool
    delta1: float
    C1: float
    worst_slack: float
    delta_max: float
    c_max: float

    def summary(self) -> str:
        if self.feasible:
            return (f"energy estimate: feasible with delta1={self.delta1:.4f}, "
                    f"C1={self.C1:.4e} (worst slack {self.worst_slack:+.3e})")
        return (f"energy estimate: INFEASIBLE over delta1 in [0,{self.delta_max:g}], "
                f"C1 in [0,{self.c_max:g}]")


def energy_estimate_check(traj: Trajectory, kappa: float,
                          p: SobolevParams, c_max: float = 1e8) -> InequalityReport:
    """Search constants (δ₁, C₁) certifying the damped energy inequality

        e^{−δ₁t} ‖f(t)‖² ≤ ‖f₀‖² + C₁ ∫₀ᵗ e^{−δ₁s} ‖S(s)‖² ds

    at every stored time, with S = (1/u⁰)Q̃(f,f) the collision source.  The
    search box is δ₁ ∈ [0, 12κ] (decay rates scale with the Hubble floor κ)
    and C₁ ∈ [0, c_max].  The norms come from the trajectory's diagnostics,
    so the run must have recorded source norms at the same Sobolev indices.
    """
    if p != traj.sobolev:
        raise ValueError(f"trajectory recorded norms at {traj.sobolev}, not {p}")
    if "src_sobolev" not in traj.diagnostics:
        raise ValueError("trajectory lacks source norms; "
                         "solve with record_source_norm=True")
    if not (kappa > 0.0):
        raise ValueError("kappa must be positive")
    t = traj.times
    fn2 = traj.diagnostics["f_sobolev"] ** 2
    sn2 = traj.diagnostics["src_sobolev"] ** 2

    delta_max = 12.0 * kappa
    best = None
    for delta in np.linspace(0.0, delta_max, 241):
        damp = np.exp(-delta * t)
        lhs = damp * fn2
        integral = cumulative_trapezoid(damp * sn2, t, initial=0.0)
        deficit = lhs - fn2[0]
        need = 0.0
        ok = True
        for j in range(1, t.size):
            if deficit[j] <= 0.0:
                continue
            if integral[j] <= 0.0:
                ok = False
                break
            need = max(need, deficit[j] / integral[j])
        if not ok or need > c_max:
            continue
        slack = float(np.min(fn2[0] + need * integral - lhs))
        if best is None or need < best[1]:
            best = (float(delta), float(need), slack)
    if best is None:
        return InequalityReport(False, np.nan, np.nan, np.nan, delta_max, c_max)
    return InequalityReport(True, best[0], best[1], best[2], delta_max, c_max)


@dataclass(frozen=True)
class DecayResult:
    """Outcome of the small-data decay bound sup_t e^{−δ₁t/2}‖f‖_{H³_d} ≤ 4r."""

    passed: bool
    margin: float
    sup: float

    def __bool__(self) -> bool:
        return self.passed


def decay_check(traj: Trajectory, r: float, delta1: float) -> DecayResult:
    """Check the 4r decay envelope against stored H³_d norms."""
    if traj.sobolev.m != 3:
        raise ValueError("decay_check needs norms recorded at m=3")
    if not (r > 0.0 and delta1 >= 0.0):
        raise ValueError("r must be positive and delta1 nonnegative")
    weighted = np.exp(-0.5 * delta1 * traj.times) * traj.diagnostics["f_sobolev"]
    sup = float(np.max(weighted))
    return DecayResult(sup <= 4.0 * r, 4.0 * r - sup, sup)
