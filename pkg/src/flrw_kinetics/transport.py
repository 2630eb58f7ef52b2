"""Semi-Lagrangian momentum-space transport.

The distribution function obeys

    ∂f/∂t − c(t) Σᵢ ∂f/∂uⁱ = (1/u⁰) Q̃(f,f),   c(t) = E Z ∫ f dv̄,

a rigid advection along the diagonal (1,1,1) because the coefficient is
independent of ū.  Characteristics satisfy duⁱ/dt = −c, so the pure-advection
solution is the pullback f(t, ū) = f₀(ū + C(t)·(1,1,1)) with C = ∫₀ᵗ c; one
step therefore samples the old field at ū + c·dt·(1,1,1).  The shift is
evaluated by three separable cubic-Lagrange passes (zero beyond the cube),
the same interpolation order the collision quadrature uses off-grid, and is
an exact re-indexing whenever the shift is a whole number of cells.

A step couples advection and collisions by Strang splitting: half shift,
explicit-midpoint collision update, half shift.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .collision import CollisionConfig, Kernel, SphereQuadrature, collision_term
from .cosmo import CosmoState
from .phase_space import GridFunction, moment_number


@dataclass(frozen=True)
class AdvectionState:
    """Accumulated characteristic displacement C(t) = ∫₀ᵗ c(s) ds.

    Tracks how far the pure-advection pullback has moved the field along the
    diagonal, in covariant momentum units per axis.  Useful for judging when
    the total drift approaches the box size even though each individual step
    stays small.
    """

    cumulative_shift: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.cumulative_shift):
            raise ValueError("cumulative_shift must be finite")

    def advanced(self, c: float, dt: float) -> "AdvectionState":
        """State after one further step at frozen speed c over dt."""
        return AdvectionState(self.cumulative_shift + c * dt)


def advection_speed(s: CosmoState, f: GridFunction) -> float:
    """Transport coefficient c = E·Z·∫f dv̄."""
    return s.E * s.Z * moment_number(f)


def _cubic_weights(frac: float) -> np.ndarray:
    w = np.empty(4)
    w[0] = -frac * (frac - 1.0) * (frac - 2.0) / 6.0
    w[1] = (frac + 1.0) * (frac - 1.0) * (frac - 2.0) / 2.0
    w[2] = -(frac + 1.0) * frac * (frac - 2.0) / 2.0
    w[3] = (frac + 1.0) * frac * (frac - 1.0) / 6.0
    return w


def _shift_axis(vals: np.ndarray, cells: float, axis: int) -> np.ndarray:
    """out[i] = Σ_d w_d · vals[i + k − 1 + d] along one axis, zero-padded."""
    k = int(np.floor(cells))
    w = _cubic_weights(cells - k)
    n = vals.shape[axis]
    out = np.zeros_like(vals)
    for d in range(4):
        off = k - 1 + d
        if w[d] == 0.0:
            continue
        src_lo, src_hi = max(0, off), min(n, n + off)
        if src_lo >= src_hi:
            continue
        dst_lo = max(0, -off)
        src = [slice(None)] * vals.ndim
        dst = [slice(None)] * vals.ndim
        src[axis] = slice(src_lo, src_hi)
        dst[axis] = slice(dst_lo, dst_lo + (src_hi - src_lo))
        out[tuple(dst)] += w[d] * vals[tuple(src)]
    return out


def shift_interpolate(f: GridFunction, delta: float) -> GridFunction:
    """g(ū) = f(ū + Δ·(1,1,1)), cubic interpolation, zero outside the cube.

    Exact (bitwise re-indexing) when Δ is an integer multiple of the grid
    spacing; warns when |Δ| exceeds half the cube radius since most of the
    support is then pushed out of the box.
    """
    delta = float(delta)
    grid = f.grid
    if not np.isfinite(delta) or abs(delta) >= grid.u_max:
        raise ValueError(f"shift {delta!r} must satisfy |delta| < u_max={grid.u_max}")
    if abs(delta) > grid.u_max / 2.0:
        warnings.warn(f"shift {delta:.3g} exceeds half the cube; mass is leaving",
                      stacklevel=2)
    if delta == 0.0:
        return f
    cells = delta / grid.h
    vals = f.values
    for axis in range(3):
        vals = _shift_axis(vals, cells, axis)
    return GridFunction(grid, vals)


def transport_step(f: GridFunction, s: CosmoState, dt: float, E: float,
                   kernel: Kernel, sq: SphereQuadrature,
                   cfg: CollisionConfig) -> GridFunction:
    """One Strang-split step of length dt.

    Advection speed is frozen from (s, f) at entry; E is the inverse scale
    factor used for the collision kinematics (the caller passes the staged
    value, normally s.E).  The collision half is one explicit-midpoint (RK2)
    update of df/dt = (1/u⁰) Q̃(f,f).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    c = advection_speed(s, f)
    half = c * dt / 2.0

    f = shift_interpolate(f, half)
    k1 = collision_term(f, E, kernel, sq, cfg)
    f_mid = GridFunction(f.grid, f.values + (dt / 2.0) * k1.values)
    k2 = collision_term(f_mid, E, kernel, sq, cfg)
    f = GridFunction(f.grid, f.values + dt * k2.values)
    return shift_interpolate(f, half)
