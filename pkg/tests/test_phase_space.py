"""Grid construction, moments, and weighted norms against closed-form oracles."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

import flrw_kinetics as fk

# Radial reductions of the isotropic Gaussian exp(-|u|^2), evaluated once with
# adaptive quadrature and frozen (guards against both code and oracle drift).
NUMBER_GAUSS = 5.568327996831708        # pi^(3/2)
ENERGY_GAUSS_E1 = 8.579720036200552     # integrand sqrt(1+r^2)
PRESSURE_GAUSS_E1 = 1.596043616538189   # integrand (r^2/3)/sqrt(1+r^2)
ENERGY_GAUSS_E2 = 13.938963210999084    # integrand sqrt(1+4 r^2)


def radial_moment(integrand):
    """4*pi * Integral r^2 * integrand(r) dr over [0, inf)."""
    val, err = quad(lambda r: 4.0 * np.pi * r * r * integrand(r), 0.0, np.inf)
    assert err < 1e-7   # an order below the 1e-6 comparison tolerance
    return val


def test_make_grid_spacing_examples():
    assert fk.make_grid(4.0, 5).h == pytest.approx(2.0, rel=1e-15)
    assert fk.make_grid(6.0, 33).h == pytest.approx(0.375, rel=1e-15)


def test_make_grid_rejects_bad_shapes():
    with pytest.raises(ValueError):
        fk.make_grid(1.0, 3)       # too coarse
    with pytest.raises(ValueError):
        fk.make_grid(1.0, 8)       # even: origin not a node
    with pytest.raises(ValueError):
        fk.make_grid(-2.0, 9)      # empty box


def test_grid_axis_symmetric(grid17):
    axis = grid17.axis
    assert axis[0] == -grid17.u_max
    assert axis[-1] == grid17.u_max
    assert axis[grid17.n // 2] == 0.0
    assert np.allclose(np.diff(axis), grid17.h, rtol=0, atol=1e-15)


def test_grid_equality_is_geometric(grid17):
    assert grid17 == fk.make_grid(4.0, 17)
    assert grid17 != fk.make_grid(4.0, 33)
    assert hash(grid17) == hash(fk.make_grid(4.0, 17))


def test_u_zero_examples():
    assert fk.u_zero(np.array([3.0, 0.0, 4.0]), 1.0) == pytest.approx(
        math.sqrt(26.0), rel=1e-15)
    assert fk.u_zero(np.array([1.0, 1.0, 1.0]), 2.0) == pytest.approx(
        math.sqrt(13.0), rel=1e-15)


def test_u_zero_vectorized():
    u = np.zeros((7, 3))
    assert np.asarray(fk.u_zero(u, 0.5)).shape == (7,)
    assert np.allclose(fk.u_zero(u, 0.5), 1.0)


@settings(deadline=None, max_examples=50)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5),
       st.floats(0.1, 4.0))
def test_u_zero_dominates_momentum(x, y, z, E):
    """u0 = sqrt(1 + E^2 |u|^2) >= max(1, E |u|), the mass-shell bounds."""
    u = np.array([x, y, z])
    u0 = float(fk.u_zero(u, E))
    assert u0 >= 1.0
    assert u0 >= E * np.linalg.norm(u) - 1e-12


def test_moment_oracles_gaussian():
    """Trapezoid moments of exp(-|u|^2) at u_max=6, n=49 match the radial quadrature."""
    grid = fk.make_grid(6.0, 49)
    f = fk.gaussian_profile(grid, 1.0, 1.0)
    number = fk.moment_number(f)
    assert number == pytest.approx(radial_moment(lambda r: np.exp(-r * r)), abs=1e-6)
    assert number == pytest.approx(NUMBER_GAUSS, abs=1e-6)

    energy1 = fk.moment_energy(f, 1.0)
    oracle1 = radial_moment(lambda r: np.sqrt(1 + r * r) * np.exp(-r * r))
    assert energy1 == pytest.approx(oracle1, abs=1e-6)
    assert energy1 == pytest.approx(ENERGY_GAUSS_E1, abs=1e-6)

    pressure1 = fk.moment_pressure(f, 1.0)
    oracle_p = radial_moment(
        lambda r: (r * r / 3.0) / np.sqrt(1 + r * r) * np.exp(-r * r))
    assert pressure1 == pytest.approx(oracle_p, abs=1e-6)
    assert pressure1 == pytest.approx(PRESSURE_GAUSS_E1, abs=1e-6)

    energy2 = fk.moment_energy(f, 2.0)
    oracle2 = radial_moment(lambda r: np.sqrt(1 + 4 * r * r) * np.exp(-r * r))
    assert energy2 == pytest.approx(oracle2, abs=1e-6)
    assert energy2 == pytest.approx(ENERGY_GAUSS_E2, abs=1e-6)


def test_moment_single_interior_node(grid17):
    """An indicator of one interior node integrates to exactly h^3."""
    vals = np.zeros((grid17.n,) * 3)
    vals[8, 8, 8] = 1.0
    f = fk.GridFunction(grid17, vals)
    assert fk.moment_number(f) == pytest.approx(grid17.h ** 3, rel=1e-15)


def test_moment_boundary_node_weight(grid17):
    """A corner node carries the product weight (h/2)^3."""
    vals = np.zeros((grid17.n,) * 3)
    vals[0, 0, 0] = 1.0
    f = fk.GridFunction(grid17, vals)
    assert fk.moment_number(f) == pytest.approx((grid17.h / 2.0) ** 3, rel=1e-15)


def test_charge_density_example(grid17):
    """charge = E^3 * number: a profile with number 5 at E=2 gives 40."""
    vals = np.zeros((grid17.n,) * 3)
    vals[8, 8, 8] = 5.0 / grid17.h ** 3
    f = fk.GridFunction(grid17, vals)
    assert fk.moment_number(f) == pytest.approx(5.0, rel=1e-14)
    assert fk.charge_density(f, 2.0) == pytest.approx(40.0, rel=1e-14)


def test_moments_linear(grid17, gauss17):
    g = fk.gaussian_profile(grid17, 0.7, 1.5, center=(0.5, -0.3, 0.2))
    combo = fk.GridFunction(grid17, 2.0 * gauss17.values - 3.0 * g.values)
    for moment in (fk.moment_number,
                   lambda f: fk.moment_energy(f, 1.3),
                   lambda f: fk.moment_pressure(f, 1.3)):
        expected = 2.0 * moment(gauss17) - 3.0 * moment(g)
        assert moment(combo) == pytest.approx(expected, rel=1e-12, abs=1e-13)


def test_moments_reject_nonpositive_E(gauss17):
    with pytest.raises(ValueError):
        fk.moment_energy(gauss17, 0.0)
    with pytest.raises(ValueError):
        fk.moment_pressure(gauss17, -1.0)


def test_sobolev_constant_oracle(grid17):
    """For constant f all derivatives vanish: the norm is the weighted L2 mass."""
    c = 0.75
    f = fk.GridFunction(grid17, np.full((grid17.n,) * 3, c))
    p = fk.SobolevParams(2, 3.0)
    oracle = c * math.sqrt(float(np.sum(
        grid17.weights * (1.0 + grid17.radius) ** (2 * p.d))))
    assert fk.sobolev_norm(f, p) == pytest.approx(oracle, abs=1e-10)


def test_sobolev_scaling_exact(gauss17, sob33):
    base = fk.sobolev_norm(gauss17, sob33)
    scaled = fk.GridFunction(gauss17.grid, 2.5 * gauss17.values)
    assert fk.sobolev_norm(scaled, sob33) == pytest.approx(2.5 * base, rel=1e-14)


def test_sobolev_rejects_unresolvable_order():
    grid = fk.make_grid(1.0, 5)
    f = fk.gaussian_profile(grid, 1.0, 0.5)
    with pytest.raises(ValueError):
        fk.sobolev_norm(f, fk.SobolevParams(3, 3.0))


def test_sobolev_params_validated():
    with pytest.raises(ValueError):
        fk.SobolevParams(4, 3.0)
    with pytest.raises(ValueError):
        fk.SobolevParams(2, 2.0)   # d must exceed 5/2


def test_weighted_embedding(grid17):
    """number(|f|) <= C * H^0_d norm with C the L2 norm of the inverse weight.

    Cauchy-Schwarz on the trapezoid sum, so it holds exactly at the discrete
    level; checked over a few random smooth profiles.
    """
    from flrw_kinetics.verification import random_smooth_profile
    d = 3.0
    C = math.sqrt(float(np.sum(
        grid17.weights * (1.0 + grid17.radius) ** (-2 * d))))
    rng = np.random.default_rng(5)
    for _ in range(5):
        f = random_smooth_profile(grid17, rng)
        lhs = fk.moment_number(fk.GridFunction(grid17, np.abs(f.values)))
        rhs = C * fk.sobolev_norm(f, fk.SobolevParams(0, d))
        assert lhs <= rhs * (1 + 1e-12)


def test_moment_refinement_converges():
    """Halving h cuts the quadrature error by at least 3x per doubling.

    Width 0.8 keeps n=9 visibly under-resolved; the error floor guards the
    ratio because trapezoid sums of a Gaussian reach machine precision fast.
    """
    analytic = 0.8 ** 3 * NUMBER_GAUSS   # exp(-|u|^2/w^2) integrates to w^3 pi^(3/2)
    errs = []
    for n in (9, 17, 33):
        grid = fk.make_grid(6.0, n)
        f = fk.gaussian_profile(grid, 1.0, 0.8)
        errs.append(max(abs(fk.moment_number(f) - analytic), 1e-15))
    assert errs[0] / errs[1] >= 3.0
    assert errs[1] / errs[2] >= 3.0


@settings(deadline=None, max_examples=30)
@given(st.floats(-3.0, 3.0))
def test_moment_scaling(alpha):
    grid = fk.make_grid(2.0, 9)
    f = fk.gaussian_profile(grid, 1.0, 1.0)
    scaled = fk.GridFunction(grid, alpha * f.values)
    assert fk.moment_number(scaled) == pytest.approx(
        alpha * fk.moment_number(f), rel=1e-12, abs=1e-15)


def test_grid_function_validates(grid17):
    with pytest.raises(ValueError):
        fk.GridFunction(grid17, np.zeros((3, 3, 3)))
    bad = np.zeros((grid17.n,) * 3)
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        fk.GridFunction(grid17, bad)


def test_grid_function_immutable(gauss17):
    with pytest.raises(AttributeError):
        gauss17.values = np.zeros((17, 17, 17))
    with pytest.raises(ValueError):
        gauss17.values[0, 0, 0] = 1.0   # numpy write lock


def test_grid_function_positivity_monitor(grid17, gauss17):
    assert gauss17.is_physical
    assert gauss17.min_value >= 0.0
    dip = np.array(gauss17.values)
    dip[0, 0, 0] = -1e-3
    g = fk.GridFunction(grid17, dip)
    assert not g.is_physical
    assert g.min_value == pytest.approx(-1e-3)


def test_gaussian_profile_peak(grid17):
    mid = grid17.n // 2
    f = fk.gaussian_profile(grid17, 2.0, 1.3)
    assert f.values[mid, mid, mid] == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(ValueError):
        fk.gaussian_profile(grid17, 1.0, 0.0)


def test_save_load_roundtrip(tmp_path):
    grid = fk.make_grid(2.0, 9)
    rng = np.random.default_rng(0)
    f = fk.GridFunction(grid, rng.uniform(0, 1, (9, 9, 9)))
    path = tmp_path / "f.csv"
    fk.save_grid_function(f, path)
    header = path.read_text().splitlines()[0]
    assert header == "u_max,n"
    g = fk.load_grid_function(path)
    assert g.grid == grid
    assert np.array_equal(g.values, f.values)   # repr round-trips exactly


def test_load_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("u_max,n\n2.0,9\n1.0\n")   # far too few values
    with pytest.raises(ValueError):
        fk.load_grid_function(path)
    path2 = tmp_path / "worse.csv"
    path2.write_text("nope\n")
    with pytest.raises(ValueError):
        fk.load_grid_function(path2)
