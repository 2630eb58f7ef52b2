"""Momentum-space discretization, moments, and weighted Sobolev norms.

The distribution function f(t, u) lives on a uniform cubic grid truncating the
covariant momentum space R^3 to [-u_max, u_max]^3.  With E = 1/a the inverse
scale factor, the energy of a particle with covariant momentum u is

    u^0 = sqrt(1 + E^2 |u|^2)

Moments of f (number, energy, pressure) are product trapezoid quadratures over
the cube.  The weighted Sobolev norm H^m_d is

    ||f||_{H^m_d} = max_{|beta| <= m} || (1 + |u|)^(d + |beta|) D^beta f ||_{L^2}

with D^beta realized by 2nd-order finite differences (one-sided at the
boundary layer) and the L^2 norm by the same trapezoid weights.  The weight
exponent must satisfy d > 5/2 so that L^2_d embeds into L^1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

__all__ = [
    "MomentumGrid",
    "GridFunction",
    "SobolevParams",
    "make_grid",
    "gaussian_profile",
    "u_zero",
    "moment_number",
    "moment_energy",
    "moment_pressure",
    "charge_density",
    "sobolev_norm",
    "save_grid_function",
    "load_grid_function",
]


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Uniform cubic grid on [-u_max, u_max]^3 with an odd number of nodes per axis.

    n odd guarantees the origin is a node.  Construct through make_grid, which
    validates the invariants and precomputes the trapezoid weights and the
    nodal radii |u| shared by all quadratures on this grid.
    """

    u_max: float
    n: int
    h: float
    axis: np.ndarray      # (n,) node coordinates, identical on all three axes
    weights: np.ndarray   # (n, n, n) product trapezoid weights
    radius: np.ndarray    # (n, n, n) Euclidean norm |u| at each node

    def __eq__(self, other):
        if not isinstance(other, MomentumGrid):
            return NotImplemented
        return self.u_max == other.u_max and self.n == other.n

    def __hash__(self):
        return hash((self.u_max, self.n))

    def coords(self):
        """Broadcastable node coordinate arrays (X, Y, Z), each of shape (n, n, n)."""
        a = self.axis
        return a[:, None, None], a[None, :, None], a[None, None, :]

    def __repr__(self):
        return f"MomentumGrid(u_max={self.u_max}, n={self.n}, h={self.h})"


def make_grid(u_max: float, n: int) -> MomentumGrid:
    """Build a MomentumGrid with spacing h = 2*u_max/(n-1).

    Raises ValueError for non-positive u_max, even n, or n < 5.
    """
    if not np.isfinite(u_max) or u_max <= 0:
        raise ValueError(f"u_max must be positive, got {u_max}")
    n = int(n)
    if n < 5:
        raise ValueError(f"n must be at least 5, got {n}")
    if n % 2 == 0:
        raise ValueError(f"n must be odd so the origin is a node, got {n}")
    u_max = float(u_max)
    h = 2.0 * u_max / (n - 1)
    axis = -u_max + h * np.arange(n)
    w1 = np.full(n, h)
    w1[0] = w1[-1] = 0.5 * h
    weights = w1[:, None, None] * w1[None, :, None] * w1[None, None, :]
    x, y, z = axis[:, None, None], axis[None, :, None], axis[None, None, :]
    radius = np.sqrt(x * x + y * y + z * z)
    weights.flags.writeable = False
    radius.flags.writeable = False
    axis.flags.writeable = False
    return MomentumGrid(u_max=u_max, n=n, h=h, axis=axis, weights=weights, radius=radius)


class GridFunction:
    """A scalar field sampled on a MomentumGrid.

    values are stored as an immutable (n, n, n) float array in lexicographic
    (i, j, k) node order.  Finiteness is enforced; positivity is a physical
    expectation that is monitored, never silently enforced (clipping would
    corrupt conservation diagnostics).
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: MomentumGrid, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.size != grid.n ** 3:
            raise ValueError(
                f"expected {grid.n ** 3} values for n={grid.n}, got {arr.size}")
        arr = np.ascontiguousarray(arr.reshape(grid.n, grid.n, grid.n))
        if not np.all(np.isfinite(arr)):
            raise ValueError("GridFunction values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    @property
    def min_value(self) -> float:
        """Smallest nodal value; negative means a positivity excursion."""
        return float(self.values.min())

    @property
    def is_physical(self) -> bool:
        return self.min_value >= 0.0

    def __repr__(self):
        return (f"GridFunction(n={self.grid.n}, u_max={self.grid.u_max}, "
                f"min={self.min_value:.3e}, max={self.values.max():.3e})")


def gaussian_profile(grid: MomentumGrid, amplitude: float = 1.0,
                     width: float = 1.0, center=(0.0, 0.0, 0.0)) -> GridFunction:
    """Isotropic Gaussian amplitude * exp(-|u - center|^2 / width^2) on the grid."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    x, y, z = grid.coords()
    cx, cy, cz = center
    r2 = (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2
    return GridFunction(grid, amplitude * np.exp(-r2 / width ** 2))


@dataclass(frozen=True)
class SobolevParams:
    """Order m in {0,1,2,3} and weight exponent d > 5/2 of the H^m_d norm."""

    m: int
    d: float

    def __post_init__(self):
        if self.m not in (0, 1, 2, 3):
            raise ValueError(f"m must be one of 0..3, got {self.m}")
        if not self.d > 2.5:
            raise ValueError(f"d must exceed 5/2 for the weighted embeddings, got {self.d}")


def u_zero(u, E: float):
    """Particle energy sqrt(1 + E^2 |u|^2) for covariant momentum u.

    u may be a single 3-vector or an array of shape (..., 3); the result
    broadcasts accordingly and is always >= 1.
    """
    if E <= 0:
        raise ValueError(f"E must be positive, got {E}")
    u = np.asarray(u, dtype=np.float64)
    r2 = np.sum(u * u, axis=-1)
    out = np.sqrt(1.0 + E * E * r2)
    return float(out) if out.ndim == 0 else out


def _energy_on_grid(grid: MomentumGrid, E: float) -> np.ndarray:
    return np.sqrt(1.0 + (E * grid.radius) ** 2)


def moment_number(f: GridFunction) -> float:
    """Trapezoid approximation of the number moment, integral of f over the cube."""
    return float(np.sum(f.grid.weights * f.values))


def moment_energy(f: GridFunction, E: float) -> float:
    """Quadrature of the energy moment, integral of v^0(v, E) f(v)."""
    if E <= 0:
        raise ValueError(f"E must be positive, got {E}")
    v0 = _energy_on_grid(f.grid, E)
    return float(np.sum(f.grid.weights * v0 * f.values))


def moment_pressure(f: GridFunction, E: float) -> float:
    """Quadrature of the pressure moment, integral of (v^1)^2 / v^0 * f(v)."""
    if E <= 0:
        raise ValueError(f"E must be positive, got {E}")
    grid = f.grid
    v0 = _energy_on_grid(grid, E)
    x1 = grid.axis[:, None, None]
    return float(np.sum(grid.weights * (x1 * x1 / v0) * f.values))


def charge_density(f: GridFunction, E: float) -> float:
    """Charge density E^3 * moment_number(f).

    The E^3 factor is the Jacobian of passing from proper momentum volume to
    covariant momentum volume, so this equals a^3 times the proper-variable
    number integral.
    """
    if E <= 0:
        raise ValueError(f"E must be positive, got {E}")
    return E ** 3 * moment_number(f)


def _axis_derivative(vals: np.ndarray, h: float, axis: int) -> np.ndarray:
    """First derivative along one axis: 2nd-order central, one-sided at the edges."""
    v = np.moveaxis(vals, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def _multi_indices(m: int):
    for beta in product(range(m + 1), repeat=3):
        if sum(beta) <= m:
            yield beta


def sobolev_norm(f: GridFunction, p: SobolevParams) -> float:
    """Weighted Sobolev norm H^m_d of f on its grid.

    Takes the max over multi-indices |beta| <= m of the trapezoid-weighted L^2
    norm of (1 + |u|)^(d + |beta|) D^beta f.  Exact 1-homogeneity in f holds
    because every ingredient is linear in the nodal values.
    """
    if not isinstance(p, SobolevParams):
        p = SobolevParams(*p)
    grid = f.grid
    if grid.n < 2 * p.m + 1:
        raise ValueError(f"grid with n={grid.n} too coarse for m={p.m} derivatives")
    if not f.values.any():
        return 0.0
    w = grid.weights
    base = 1.0 + grid.radius
    best = 0.0
    for beta in _multi_indices(p.m):
        g = f.values
        for ax, order in enumerate(beta):
            for _ in range(order):
                g = _axis_derivative(g, grid.h, ax)
        weighted = base ** (p.d + sum(beta)) * g
        best = max(best, float(np.sqrt(np.sum(w * weighted * weighted))))
    return best


def save_grid_function(f: GridFunction, path) -> None:
    """Write f as CSV: a "u_max,n" header row, its values row, then n^3 nodal values.

    The values appear one per line in lexicographic (i, j, k) order, at full
    double precision.
    """
    path = Path(path)
    lines = ["u_max,n", f"{float(f.grid.u_max)!r},{f.grid.n}"]
    lines.extend(repr(float(v)) for v in f.values.ravel())
    path.write_text("\n".join(lines) + "\n")


def load_grid_function(path) -> GridFunction:
    """Read a GridFunction written by save_grid_function."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != "u_max,n":
            raise ValueError(f"{path}: expected 'u_max,n' header, got {header!r}")
        meta = fh.readline().split(",")
        if len(meta) != 2:
            raise ValueError(f"{path}: malformed metadata row {meta!r}")
        u_max, n = float(meta[0]), int(meta[1])
        values = np.loadtxt(fh, dtype=np.float64)
    grid = make_grid(u_max, n)
    return GridFunction(grid, values)
