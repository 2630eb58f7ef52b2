"""Binary collision kinematics and quadrature for the relativistic Boltzmann operator.

Collisions are parametrized in the covariant momentum variables ū, v̄ (Glassey
style): given a unit vector ω the outgoing pair is

    ū′ = ū + b̃ ω,   v̄′ = v̄ − b̃ ω,

with

    b̃ = 2 a² u⁰ v⁰ ẽ ω·(v̂ − û) / (a² ẽ² − [ω·(ū + v̄)]²),

where a = 1/E, u⁰ = √(1 + E²|ū|²), û = ū/u⁰, and ẽ = u⁰ + v⁰ is the conserved
elementary energy.  Momentum conservation ū′+v̄′ = ū+v̄ is exact by
construction; the denominator written above is strictly positive because
a ẽ = √(a²+|ū|²) + √(a²+|v̄|²) > |ū| + |v̄| ≥ |ω·(ū+v̄)|, which also gives
energy conservation u′⁰+v′⁰ = ẽ for every ω.

The gain and loss integrals

    Q̃⁺(f,g)(ū) = E³ ∫ dv̄/v⁰ ∫_{S²} dω f(ū′) g(v̄′) B̃
    Q̃⁻(f,g)(ū) = E³ ∫ dv̄/v⁰ ∫_{S²} dω f(ū) g(v̄) B̃

are evaluated with trapezoid weights over the (optionally subsampled) cube
grid and a fixed sphere rule; off-grid values f(ū′), g(v̄′) come from
tricubic interpolation with zero extension outside the cube.  The builtin
shock kernel is B̃ = A exp(−a² − |ū|² − |v̄|² − |ū′|² − |v̄′|²).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .phase_space import GridFunction, MomentumGrid, u_zero

#: Hard floor for the collision denominator relative to its leading term
#: a²ẽ².  The physics guarantees positivity; anything at or below this is an
#: implementation bug and raises.
EPS_DEN = 1e-14


class DegenerateDenominatorError(RuntimeError):
    """The collision denominator lost positivity (should be impossible)."""


@dataclass(frozen=True)
class Kernel:
    """Collision kernel B̃, selected by name.

    name : "gaussian" (amplitude A) or "constant" (value c; testing only,
        integrable on the truncated cube but not on all of ℝ³).
    amplitude : the single scalar parameter of either builtin.
    """

    name: str
    amplitude: float

    def evaluate(self, E, u, v, up, vp, omega):
        """Kernel value for momenta of shape (..., 3); broadcasts."""
        if self.name == "constant":
            shape = np.broadcast_shapes(np.shape(u)[:-1], np.shape(v)[:-1],
                                        np.shape(up)[:-1], np.shape(vp)[:-1])
            return np.full(shape, self.amplitude) if shape else self.amplitude
        a2 = 1.0 / float(E) ** 2
        s = (np.sum(np.square(u), axis=-1) + np.sum(np.square(v), axis=-1)
             + np.sum(np.square(up), axis=-1) + np.sum(np.square(vp), axis=-1))
        return self.amplitude * np.exp(-a2 - s)


def kernel_by_name(name: str, amplitude: float) -> Kernel:
    """Build a builtin kernel; amplitude must be finite and nonnegative."""
    if name not in ("gaussian", "constant"):
        raise ValueError(f"unknown kernel {name!r}; expected 'gaussian' or 'constant'")
    amplitude = float(amplitude)
    if not np.isfinite(amplitude) or amplitude < 0.0:
        raise ValueError("kernel amplitude must be finite and >= 0")
    return Kernel(name, amplitude)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Fixed quadrature rule on S²: unit nodes and positive weights summing to 4π."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        weights = np.ascontiguousarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 2 or nodes.shape[1] != 3 or weights.shape != (nodes.shape[0],):
            raise ValueError("nodes must be (K, 3) and weights (K,)")
        if np.any(weights <= 0.0):
            raise ValueError("sphere weights must be positive")
        if abs(weights.sum() - 4.0 * np.pi) > 1e-12:
            raise ValueError("sphere weights must sum to 4*pi")
        if np.max(np.abs(np.linalg.norm(nodes, axis=1) - 1.0)) > 1e-14:
            raise ValueError("sphere nodes must be unit vectors")


def _octahedral_nodes(order: int):
    axes = np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0],
                     [0, -1.0, 0], [0, 0, 1.0], [0, 0, -1.0]])
    r3 = 1.0 / np.sqrt(3.0)
    corners = np.array([[sx * r3, sy * r3, sz * r3]
                        for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)])
    if order == 6:
        return axes, np.full(6, 1.0 / 6.0)
    if order == 14:
        nodes = np.vstack([axes, corners])
        weights = np.concatenate([np.full(6, 1.0 / 15.0), np.full(8, 3.0 / 40.0)])
        return nodes, weights
    if order == 26:
        r2 = 1.0 / np.sqrt(2.0)
        edges = []
        for i in range(3):
            for j in range(i + 1, 3):
                for si in (1, -1):
                    for sj in (1, -1):
                        e = [0.0, 0.0, 0.0]
                        e[i] = si * r2
                        e[j] = sj * r2
                        edges.append(e)
        nodes = np.vstack([axes, np.array(edges), corners])
        weights = np.concatenate([np.full(6, 1.0 / 21.0),
                                  np.full(12, 4.0 / 105.0),
                                  np.full(8, 27.0 / 840.0)])
        return nodes, weights
    return None


def sphere_quadrature(order: int) -> SphereQuadrature:
    """Sphere rule with `order` nodes.

    Orders 6, 14 and 26 are the octahedrally symmetric sets (exact for all
    spherical harmonics up to degree 3, 5 and 7).  Any other order falls back
    to a product Gauss-Legendre (cos θ) × uniform (φ) grid with at least
    `order` nodes.
    """
    order = int(order)
    if order < 2:
        raise ValueError("sphere_order must be >= 2")
    octa = _octahedral_nodes(order)
    if octa is not None:
        nodes, weights = octa
        return SphereQuadrature(nodes, 4.0 * np.pi * weights)
    ntheta = 1
    while 2 * ntheta * ntheta < order:
        ntheta += 1
    nphi = 2 * ntheta
    ct, wt = np.polynomial.legendre.leggauss(ntheta)
    st = np.sqrt(1.0 - ct**2)
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    nodes = np.empty((ntheta * nphi, 3))
    weights = np.empty(ntheta * nphi)
    for i in range(ntheta):
        for j in range(nphi):
            nodes[i * nphi + j] = (st[i] * np.cos(phi[j]), st[i] * np.sin(phi[j]), ct[i])
            weights[i * nphi + j] = wt[i] * (2.0 * np.pi / nphi)
    return SphereQuadrature(nodes, weights)


@dataclass(frozen=True)
class CollisionConfig:
    """Quadrature resolution knobs.

    sphere_order : node count for the S² rule.
    velocity_subsample : stride over the v̄ grid (1 = every node).  Must
        divide n−1 so the subsampled grid still spans the full cube.
    """

    sphere_order: int = 6
    velocity_subsample: int = 1

    def __post_init__(self):
        if int(self.sphere_order) < 2:
            raise ValueError("sphere_order must be >= 2")
        if int(self.velocity_subsample) < 1:
            raise ValueError("velocity_subsample must be >= 1")


# ---------------------------------------------------------------------------
# Pointwise kinematics
# ---------------------------------------------------------------------------

def elementary_energy(u, v, E):
    """Conserved total energy ẽ = u⁰ + v⁰ of a colliding pair."""
    return u_zero(u, E) + u_zero(v, E)


def _btilde_parts(u, v, omega, E):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    omega = np.asarray(omega, dtype=float)
    a2 = 1.0 / float(E) ** 2
    u0 = np.asarray(u_zero(u, E))
    v0 = np.asarray(u_zero(v, E))
    ee = u0 + v0
    dhat = v / v0[..., None] - u / u0[..., None]
    num = 2.0 * a2 * u0 * v0 * ee * np.sum(omega * dhat, axis=-1)
    s2 = np.sum(omega * (u + v), axis=-1)
    den0 = a2 * ee**2
    den = den0 - s2**2
    if np.any(den <= EPS_DEN * den0):
        raise DegenerateDenominatorError(
            "collision denominator a^2*e^2 - (omega.(u+v))^2 lost positivity")
    out = num / den
    return float(out) if out.ndim == 0 else out


def btilde(u, v, omega, E):
    """Scalar collision parameter b̃(ū, v̄, ω); broadcasts over leading axes.

    The denominator is a²ẽ² − [ω·(ū+v̄)]², which is strictly positive for
    all physical inputs; a nonpositive value raises DegenerateDenominatorError.
    """
    return _btilde_parts(u, v, omega, E)


def post_collision(u, v, omega, E):
    """Outgoing pair (ū′, v̄′) = (ū + b̃ω, v̄ − b̃ω)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    omega = np.asarray(omega, dtype=float)
    b = np.asarray(btilde(u, v, omega, E))[..., None]
    return u + b * omega, v - b * omega


def jacobian_residual(u, v, omega, E, delta: float = 1e-4) -> float:
    """|det J − (−u′⁰v′⁰/(u⁰v⁰))| with J the 6×6 central-difference Jacobian
    of (ū, v̄) ↦ (ū′, v̄′).  Second order in delta."""
    z = np.concatenate([np.asarray(u, dtype=float), np.asarray(v, dtype=float)])
    jac = np.empty((6, 6))
    for i in range(6):
        zp = z.copy()
        zm = z.copy()
        zp[i] += delta
        zm[i] -= delta
        upp, vpp = post_collision(zp[:3], zp[3:], omega, E)
        upm, vpm = post_collision(zm[:3], zm[3:], omega, E)
        jac[:, i] = (np.concatenate([upp, vpp]) - np.concatenate([upm, vpm])) / (2.0 * delta)
    up, vp = post_collision(z[:3], z[3:], omega, E)
    expected = -(u_zero(up, E) * u_zero(vp, E)) / (u_zero(z[:3], E) * u_zero(z[3:], E))
    return float(abs(np.linalg.det(jac) - expected))


# ---------------------------------------------------------------------------
# Quadrature evaluation of the operator
# ---------------------------------------------------------------------------

def _subsample(grid: MomentumGrid, stride: int):
    if (grid.n - 1) % stride != 0:
        raise ValueError(f"velocity_subsample {stride} does not divide n-1={grid.n - 1}")
    idx = np.arange(0, grid.n, stride, dtype=np.int64)
    hs = grid.h * stride
    w = np.full(idx.shape[0], hs)
    w[0] = w[-1] = hs / 2.0
    return idx, w


_KERNEL_KINDS = {"gaussian": _core.KIND_GAUSSIAN, "constant": _core.KIND_CONSTANT}


def gain_and_loss(f: GridFunction, g: GridFunction, E, kernel: Kernel,
                  sq: SphereQuadrature, cfg: CollisionConfig):
    """One quadrature pass producing (Q̃⁺(f,g), Q̃⁻(f,g)) together.

    Evaluating both in one sweep halves the cost when Q̃ = Q̃⁺ − Q̃⁻ is wanted.
    """
    if f.grid != g.grid:
        raise ValueError("f and g must live on the same grid")
    grid = f.grid
    E = float(E)
    if not (np.isfinite(E) and E > 0.0):
        raise ValueError("E must be positive and finite")
    if kernel.name not in _KERNEL_KINDS:
        raise ValueError(f"unsupported kernel {kernel.name!r}")
    zero = GridFunction(grid, np.zeros((grid.n,) * 3))
    if kernel.amplitude == 0.0 or not (np.any(f.values) and np.any(g.values)):
        return zero, zero

    idx, w = _subsample(grid, int(cfg.velocity_subsample))
    gain, loss, dmin = _core.collision_gain_loss(
        f.values, g.values, grid.axis, E, idx, w,
        sq.nodes, sq.weights, _KERNEL_KINDS[kernel.name], float(kernel.amplitude),
        grid.u_max, 1.0 / grid.h)
    if dmin <= EPS_DEN:
        raise DegenerateDenominatorError(
            f"collision denominator ratio fell to {dmin:.3e} during quadrature")
    return GridFunction(grid, gain), GridFunction(grid, loss)


def q_gain(f: GridFunction, g: GridFunction, E, kernel: Kernel,
           sq: SphereQuadrature, cfg: CollisionConfig) -> GridFunction:
    """Gain term Q̃⁺(f,g) on the grid of f."""
    return gain_and_loss(f, g, E, kernel, sq, cfg)[0]


def q_loss(f: GridFunction, g: GridFunction, E, kernel: Kernel,
           sq: SphereQuadrature, cfg: CollisionConfig) -> GridFunction:
    """Loss term Q̃⁻(f,g) = E³ f(ū) ∫ dv̄/v⁰ ∫ dω g(v̄) B̃."""
    return gain_and_loss(f, g, E, kernel, sq, cfg)[1]


def collision_term(f: GridFunction, E, kernel: Kernel,
                   sq: SphereQuadrature, cfg: CollisionConfig) -> GridFunction:
    """(1/u⁰) Q̃(f,f), the Boltzmann right-hand side in covariant variables."""
    gain, loss = gain_and_loss(f, f, E, kernel, sq, cfg)
    u0 = np.sqrt(1.0 + (float(E) * f.grid.radius) ** 2)
    return GridFunction(f.grid, (gain.values - loss.values) / u0)
