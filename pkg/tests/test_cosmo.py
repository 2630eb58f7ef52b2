"""Scalar-sector dynamics: constraint algebra, monotonicity, and conserved flux."""
import math

import numpy as np
import pytest

import flrw_kinetics as fk
from flrw_kinetics.cosmo import Moments, compute_moments

PI = math.pi


def test_cosmo_rhs_golden_point():
    """Frozen hand-evaluated derivative at a generic state."""
    s = fk.CosmoState(E=1.0, U=1.0, W=-1.0, Z=0.1, Phi=1.0, psi=0.5)
    p = fk.PhysParams(Lambda=1.0, m=1.0, rho=0.1)
    mom = Moments(n0=0.3, e0=0.5, p11=0.2)
    rhs = fk.cosmo_rhs(s, mom, p)
    expected = np.array([
        -1.0,
        -1.0 - 0.82 * PI,          # -3.5761059759436304
        2.99,
        -0.3,
        1.0,
        -4.01,
    ])
    assert np.allclose(rhs, expected, rtol=1e-14, atol=1e-14)
    assert rhs[1] == pytest.approx(-3.5761059759436304, rel=1e-15)


def test_cosmo_rhs_vacuum_riccati():
    """With no matter the expansion rate follows dU = -1.5 U^2 + Lambda/2."""
    s = fk.CosmoState(E=1.0, U=2.0, W=0.0, Z=0.0, Phi=0.0, psi=0.0)
    p = fk.PhysParams(Lambda=3.0, m=1.0, rho=0.0)
    rhs = fk.cosmo_rhs(s, Moments(0.0, 0.0, 0.0), p)
    assert rhs[1] == pytest.approx(-1.5 * 4.0 + 1.5, rel=1e-15)
    assert rhs[0] == pytest.approx(-2.0, rel=1e-15)
    assert np.all(rhs[2:] == 0.0)


def test_cosmo_rhs_static_limit():
    """U = 0 freezes E and Z."""
    s = fk.CosmoState(E=0.7, U=0.0, W=-0.2, Z=0.3, Phi=0.0, psi=0.0)
    p = fk.PhysParams(Lambda=0.0, m=1.0, rho=0.0)
    rhs = fk.cosmo_rhs(s, Moments(0.0, 0.0, 0.0), p)
    assert rhs[0] == 0.0
    assert rhs[3] == 0.0


def test_cosmo_rhs_psi_floor_raises():
    s = fk.CosmoState(E=1.0, U=1.0, W=0.0, Z=0.0, Phi=0.5, psi=0.0)
    p = fk.PhysParams(Lambda=3.0, m=1.0, rho=0.1)
    with pytest.raises(fk.PsiDegenerateError):
        fk.cosmo_rhs(s, Moments(0.0, 0.0, 0.0), p)
    calm = fk.PhysParams(Lambda=3.0, m=1.0, rho=0.0)
    assert np.all(np.isfinite(fk.cosmo_rhs(s, Moments(0.0, 0.0, 0.0), calm)))


def test_compute_moments_matches_phase_space(gauss17):
    mom = compute_moments(gauss17, 1.3)
    assert mom.n0 == pytest.approx(fk.moment_number(gauss17), rel=1e-15)
    assert mom.e0 == pytest.approx(fk.moment_energy(gauss17, 1.3), rel=1e-15)
    assert mom.p11 == pytest.approx(fk.moment_pressure(gauss17, 1.3), rel=1e-15)


def test_solve_constraint_vacuum_examples(grid17):
    zero = fk.GridFunction(grid17, np.zeros((17, 17, 17)))
    p = fk.PhysParams(Lambda=3.0, m=1.0, rho=0.0)
    U = fk.solve_constraint_for_U(1.0, 0.0, 0.0, 0.0, 0.0, zero, p)
    assert U == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(fk.ConstraintUnsolvableError):
        fk.solve_constraint_for_U(1.0, 0.0, 0.0, 0.0, 0.0, zero,
                                  fk.PhysParams(Lambda=-5.0, m=1.0, rho=0.0))


def test_solve_constraint_completes_residual(grid17, gauss17):
    p = fk.PhysParams(Lambda=2.0, m=0.5, rho=0.1)
    U = fk.solve_constraint_for_U(1.2, -0.3, 0.2, 0.4, 0.15, gauss17, p)
    s = fk.CosmoState(E=1.2, U=U, W=-0.3, Z=0.2, Phi=0.4, psi=0.15)
    assert abs(fk.hamiltonian_residual(s, gauss17, p)) <= 1e-12


def test_hamiltonian_residual_gradient(grid17, gauss17):
    """Central differences of the residual match the analytic partials.

    The E-derivative includes the moment's own E-dependence, reconstructed
    here by direct quadrature of E |u|^2 / u0 against f.
    """
    p = fk.PhysParams(Lambda=2.0, m=0.5, rho=0.1)
    s0 = np.array([1.2, 0.9, -0.3, 0.2, 0.4, 0.15])   # (E, U, W, Z, Phi, psi)

    def residual(x):
        s = fk.CosmoState(E=x[0], U=x[1], W=x[2], Z=x[3], Phi=x[4], psi=x[5])
        return fk.hamiltonian_residual(s, gauss17, p)

    E, U, W, Z, Phi, psi = s0
    e0 = fk.moment_energy(gauss17, E)
    r2 = grid17.radius ** 2
    de0_dE = float(np.sum(grid17.weights * gauss17.values
                          * E * r2 / np.sqrt(1.0 + E ** 2 * r2)))
    analytic = np.array([
        -(24.0 * PI * E ** 2 * e0 + 8.0 * PI * E ** 3 * de0_dE
          - 24.0 * PI * Z ** 2 / E ** 3),
        6.0 * U,
        8.0 * PI,
        -24.0 * PI * Z / E ** 2,
        -8.0 * PI * p.m ** 2 * Phi,
        -8.0 * PI,
    ])
    delta = 1e-5
    for i in range(6):
        hi, lo = s0.copy(), s0.copy()
        hi[i] += delta
        lo[i] -= delta
        fd = (residual(hi) - residual(lo)) / (2.0 * delta)
        assert fd == pytest.approx(analytic[i], rel=1e-6, abs=1e-8)


def test_expansion_rate_decreases_on_constraint_surface(grid17, gauss17):
    """On constrained data with W <= 0 the expansion rate cannot increase."""
    rng = np.random.default_rng(12)
    p = fk.PhysParams(Lambda=1.5, m=0.8, rho=0.05)
    for _ in range(10):
        E = float(rng.uniform(0.5, 2.0))
        W = float(-rng.uniform(0.0, 1.0))
        Z = float(rng.normal(0.0, 0.5))
        Phi = float(rng.uniform(0.0, 1.0))
        psi = float(rng.uniform(0.05, 1.0))
        U = fk.solve_constraint_for_U(E, W, Z, Phi, psi, gauss17, p)
        s = fk.CosmoState(E=E, U=U, W=W, Z=Z, Phi=Phi, psi=psi)
        rhs = fk.cosmo_rhs(s, compute_moments(gauss17, E), p)
        assert rhs[1] <= 1e-12


def test_conserved_flux_examples():
    assert fk.conserved_em_flux(
        fk.CosmoState(E=1.0, U=1.0, W=0.0, Z=0.0, Phi=0.0, psi=0.0)) == 0.0
    assert fk.conserved_em_flux(
        fk.CosmoState(E=1.0, U=1.0, W=0.0, Z=2.0, Phi=0.0, psi=0.0)) == 2.0


def test_flux_derivative_vanishes_identically():
    """d/dt (Z E^-3) = 0 follows from dZ = -3UZ and dE = -UE, any moments."""
    rng = np.random.default_rng(13)
    p = fk.PhysParams(Lambda=2.0, m=1.0, rho=0.0)
    for _ in range(10):
        s = fk.CosmoState(E=float(rng.uniform(0.3, 2.0)),
                          U=float(rng.normal(0.0, 1.0)),
                          W=float(-rng.uniform(0, 1)),
                          Z=float(rng.normal(0.0, 1.0)),
                          Phi=float(rng.uniform(0, 1)),
                          psi=float(rng.uniform(0.01, 1)))
        mom = Moments(*rng.uniform(0, 1, 3))
        rhs = fk.cosmo_rhs(s, mom, p)
        ddt_flux = rhs[3] / s.E ** 3 - 3.0 * s.Z * rhs[0] / s.E ** 4
        scale = max(1.0, abs(s.Z), 1.0 / s.E ** 3)
        assert abs(ddt_flux) <= 1e-13 * scale


def test_pressure_tensor_integral_identity():
    """W/E^3 - W0/E0^3 = -rho^2 * Integral E^-3 dt along a matter-free run."""
    grid = fk.make_grid(1.0, 9)
    zero = fk.GridFunction(grid, np.zeros((9, 9, 9)))
    p = fk.PhysParams(Lambda=3.0, m=1.0, rho=0.1)
    U0 = fk.solve_constraint_for_U(1.0, -0.1, 0.1, 0.5, 0.2, zero, p)
    init = (fk.CosmoState(E=1.0, U=U0, W=-0.1, Z=0.1, Phi=0.5, psi=0.2), zero)
    cfg = fk.SolveConfig(dt=1e-3, T=1.0, storage_stride=1)
    traj = fk.direct_solve(init, p, fk.kernel_by_name("gaussian", 1.0),
                           fk.sphere_quadrature(6), fk.CollisionConfig(6, 2), cfg)
    E = np.array([s.E for s in traj.states])
    W = np.array([s.W for s in traj.states])
    lhs = W / E ** 3 - W[0] / E[0] ** 3
    rhs = -p.rho ** 2 * np.concatenate(
        ([0.0], np.cumsum(np.diff(traj.times) * 0.5
                          * (E[1:] ** -3 + E[:-1] ** -3))))
    assert np.max(np.abs(lhs - rhs)) <= 1e-5 * max(1.0, np.max(np.abs(lhs)))


def test_scalar_constraint_drift_is_rk4_order():
    """Without matter the only drift is RK4's: halving dt buys about 16x."""
    grid = fk.make_grid(1.0, 9)
    zero = fk.GridFunction(grid, np.zeros((9, 9, 9)))
    p = fk.PhysParams(Lambda=3.0, m=1.0, rho=0.0)
    U0 = fk.solve_constraint_for_U(1.0, -0.2, 0.1, 0.6, 0.3, zero, p)
    init = (fk.CosmoState(E=1.0, U=U0, W=-0.2, Z=0.1, Phi=0.6, psi=0.3), zero)
    peaks = []
    for dt in (2e-3, 1e-3):
        cfg = fk.SolveConfig(dt=dt, T=1.0, storage_stride=1)
        traj = fk.direct_solve(init, p, fk.kernel_by_name("gaussian", 1.0),
                               fk.sphere_quadrature(6), fk.CollisionConfig(6, 2),
                               cfg)
        peaks.append(np.max(np.abs(traj.diagnostics["ham_residual"])))
    assert 10.0 <= peaks[0] / peaks[1] <= 25.0


def test_apriori_check_vacuum(vacuum_run):
    report = fk.apriori_check(vacuum_run["traj"], vacuum_run["p"])
    assert report.passed
    assert "pass" in report.summary()


def test_apriori_check_negative_control(vacuum_run):
    """Bumping U upward mid-run must break the monotone-decrease bound."""
    traj = vacuum_run["traj"]
    states = list(traj.states)
    k = len(states) // 2
    s = states[k]
    states[k] = fk.CosmoState(E=s.E, U=s.U + 0.5, W=s.W, Z=s.Z,
                              Phi=s.Phi, psi=s.psi)
    corrupted = fk.Trajectory(traj.times, tuple(states), traj.fields,
                              traj.diagnostics, traj.sobolev, traj.status,
                              traj.horizon_time)
    report = fk.apriori_check(corrupted, vacuum_run["p"])
    assert not report.passed
    assert "FAIL" in report.summary()
    broken = {c.name for c in report.checks if not c.passed}
    assert "U nonincreasing" in broken


def test_cosmo_state_validation():
    with pytest.raises(ValueError):
        fk.CosmoState(E=0.0, U=1.0, W=0.0, Z=0.0, Phi=0.0, psi=0.0)
    with pytest.raises(ValueError):
        fk.CosmoState(E=float("nan"), U=1.0, W=0.0, Z=0.0, Phi=0.0, psi=0.0)
    # Transient RK4 stage values may leave the physical region; the type
    # only polices E > 0 and finiteness.
    s = fk.CosmoState(E=1.0, U=1.0, W=0.5, Z=0.0, Phi=0.0, psi=-1e-9)
    assert s.W == 0.5


def test_cosmo_state_array_roundtrip():
    s = fk.CosmoState(E=1.1, U=0.9, W=-0.2, Z=0.3, Phi=0.4, psi=0.5)
    back = fk.CosmoState.from_array(s.as_array())
    assert back == s


def test_phys_params_validation():
    with pytest.raises(ValueError):
        fk.PhysParams(Lambda=1.0, m=0.0, rho=0.0)
    with pytest.raises(ValueError):
        fk.PhysParams(Lambda=1.0, m=1.0, rho=-0.1)
    with pytest.raises(ValueError):
        fk.PhysParams(Lambda=float("inf"), m=1.0, rho=0.0)
