"""The six-scalar cosmological sector and its constraint structure.

The geometry and homogeneous matter fields reduce to six scalars

    E = 1/a (inverse scale factor),  U = ȧ/a (Hubble rate),
    W = θ⁰⁰ (pressure pseudo-tensor, ≤ 0),  Z = F⁰¹ (electric field),
    Φ (massive scalar field),  ψ = ½ Φ̇²,

evolving as the first-order system

    Ė = −U E
    U̇ = −(3/2)U² + Λ/2 − 4π E⁵ p11 − 2π Z²/E² − 2π (2ψ − m²Φ²)
    Ẇ = −3UW − ρ²
    Ż = −3UZ
    Φ̇ = √(2ψ)
    ψ̇ = −6Uψ − m²Φ√(2ψ) − ρ²

with p11 = ∫ (v¹)²/v⁰ f dv̄ the kinetic pressure moment.  The Hamiltonian
constraint ties U to the rest:

    3U² = Λ + 8π E³ ∫ v⁰ f dv̄ + 12π Z²/E² − 8π W + 4π (2ψ + m²Φ²),

is preserved by the flow, and is used to derive U₀ from the other initial
data.  Z/E³ is exactly conserved.  A-priori bounds (monotone U and E,
bounded Z, ψ, Φ, exponentially controlled W) hold whenever U₀ > 0 and
Λ > −4π m² Φ₀²; apriori_check audits a computed trajectory against them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .phase_space import GridFunction, moment_energy, moment_number, moment_pressure

if TYPE_CHECKING:  # pragma: no cover
    from .solver import Trajectory

#: Below this, ψ is treated as degenerate: √(2ψ) has unbounded slope at 0 and
#: the source ρ² > 0 then drives ψ negative, ending the validity interval.
EPS_PSI = 1e-12
#: Floor on the inverse scale factor; E decays like e^{−U₀t} and a run that
#: reaches this floor has expanded far beyond anything the grid resolves.
EPS_E = 1e-12


class PsiDegenerateError(RuntimeError):
    """ψ hit its floor while ρ > 0 keeps pushing it down (validity exit)."""


class ConstraintUnsolvableError(ValueError):
    """The Hamiltonian constraint has no real root U₀ for these data."""


@dataclass(frozen=True)
class CosmoState:
    """Values of (E, U, W, Z, Φ, ψ) at one instant."""

    E: float
    U: float
    W: float
    Z: float
    Phi: float
    psi: float

    def __post_init__(self):
        for name in ("E", "U", "W", "Z", "Phi", "psi"):
            object.__setattr__(self, name, float(getattr(self, name)))
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.E <= 0.0:
            raise ValueError("E (inverse scale factor) must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.E, self.U, self.W, self.Z, self.Phi, self.psi])

    @staticmethod
    def from_array(x) -> "CosmoState":
        return CosmoState(*map(float, x))


@dataclass(frozen=True)
class PhysParams:
    """Physical constants: cosmological constant Λ, scalar mass m, charge ρ."""

    Lambda: float
    m: float
    rho: float = 0.0

    def __post_init__(self):
        for name in ("Lambda", "m", "rho"):
            object.__setattr__(self, name, float(getattr(self, name)))
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.m <= 0.0:
            raise ValueError("scalar field mass m must be positive")
        if self.rho < 0.0:
            raise ValueError("rho must be nonnegative")


@dataclass(frozen=True)
class Moments:
    """Velocity moments of f entering the scalar sector.

    n0 = ∫ f dv̄, e0 = ∫ v⁰ f dv̄, p11 = ∫ (v¹)²/v⁰ f dv̄.
    """

    n0: float
    e0: float
    p11: float


def compute_moments(f: GridFunction, E: float) -> Moments:
    """All three moments of f at inverse scale factor E."""
    return Moments(moment_number(f), moment_energy(f, E), moment_pressure(f, E))


def cosmo_rhs(s: CosmoState, mom: Moments, p: PhysParams) -> np.ndarray:
    """Time derivative of (E, U, W, Z, Φ, ψ) as a length-6 array.

    Raises PsiDegenerateError when ψ ≤ EPS_PSI while ρ > 0: the ρ² source
    then forces ψ negative and √(2ψ) leaves the real line, which is the
    validity-horizon mechanism rather than a numerical accident.
    """
    if s.psi <= EPS_PSI and p.rho > 0.0:
        raise PsiDegenerateError(
            f"psi={s.psi:.3e} at the sqrt(2*psi) floor with rho={p.rho} > 0")
    root = np.sqrt(2.0 * max(s.psi, 0.0))
    pi = np.pi
    dE = -s.U * s.E
    dU = (-1.5 * s.U**2 + 0.5 * p.Lambda - 4.0 * pi * s.E**5 * mom.p11
          - 2.0 * pi * s.Z**2 / s.E**2 - 2.0 * pi * (2.0 * s.psi - p.m**2 * s.Phi**2))
    dW = -3.0 * s.U * s.W - p.rho**2
    dZ = -3.0 * s.U * s.Z
    dPhi = root
    dpsi = -6.0 * s.U * s.psi - p.m**2 * s.Phi * root - p.rho**2
    return np.array([dE, dU, dW, dZ, dPhi, dpsi])


def _constraint_bracket(E, W, Z, psi, Phi, f: GridFunction, p: PhysParams) -> float:
    pi = np.pi
    return (8.0 * pi * E**3 * moment_energy(f, E) + 12.0 * pi * Z**2 / E**2
            - 8.0 * pi * W + 4.0 * pi * (2.0 * psi + p.m**2 * Phi**2))


def hamiltonian_residual(s: CosmoState, f: GridFunction, p: PhysParams) -> float:
    """3U² minus everything the Hamiltonian constraint says it should equal."""
    return float(3.0 * s.U**2 - p.Lambda
                 - _constraint_bracket(s.E, s.W, s.Z, s.psi, s.Phi, f, p))


def solve_constraint_for_U(E, W, Z, Phi, psi, f: GridFunction, p: PhysParams) -> float:
    """Positive root U₀ of the Hamiltonian constraint for the given data.

    Raises ConstraintUnsolvableError when Λ is negative enough that the
    radicand drops below zero.
    """
    radicand = (p.Lambda + _constraint_bracket(E, W, Z, psi, Phi, f, p)) / 3.0
    if radicand < 0.0:
        raise ConstraintUnsolvableError(
            f"constraint radicand {radicand:.6e} < 0; no real Hubble rate")
    return float(np.sqrt(radicand))


def conserved_em_flux(s: CosmoState) -> float:
    """Z/E³, exactly constant along the flow (Ż = −3UZ against Ė = −UE)."""
    return s.Z / s.E**3


# ---------------------------------------------------------------------------
# A-priori bound audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    """Outcome of one inequality over a whole trajectory."""

    name: str
    passed: bool
    worst: float  # most violated margin (≥ 0 means the bound held everywhere)

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"  [{status}] {self.name:34s} worst margin {self.worst:+.3e}"


@dataclass(frozen=True)
class BoundReport:
    """All a-priori checks for one trajectory."""

    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        head = "a-priori bounds: " + ("all pass" if self.passed else "FAILURES present")
        return "\n".join([head] + [c.line() for c in self.checks])


def apriori_check(traj: "Trajectory", p: PhysParams, tol: float = 1e-6) -> BoundReport:
    """Audit a trajectory against the closed-form a-priori bounds.

    Requires U₀ > 0 and Λ > −4π m² Φ₀² (the regime in which the bounds are
    derived).  Each check reports its worst margin, where margin ≥ 0 means
    the inequality held with room `tol` to spare at every stored time.
    """
    states = traj.states
    s0 = states[0]
    U0, E0, Z0, W0, Phi0 = s0.U, s0.E, s0.Z, s0.W, s0.Phi
    T = float(traj.times[-1])
    pi = np.pi

    U = np.array([s.U for s in states])
    E = np.array([s.E for s in states])
    Z = np.array([s.Z for s in states])
    W = np.array([s.W for s in states])
    Phi = np.array([s.Phi for s in states])
    psi = np.array([s.psi for s in states])

    u_floor = np.sqrt(max(p.Lambda / 3.0 + (4.0 * pi / 3.0) * p.m**2 * Phi0**2, 0.0))
    psi_cap = (3.0 * U0**2 - p.Lambda) / (8.0 * pi)
    phi_cap = np.sqrt(max(3.0 * U0**2 - p.Lambda, 0.0) / (4.0 * pi * p.m**2))
    w_cap = abs(W0) + (p.rho**2 / (3.0 * U0)) * np.exp(3.0 * U0 * T)

    def check(name, margins):
        # A single stored knot leaves the step-difference checks vacuous.
        worst = float(np.min(margins)) if np.size(margins) else np.inf
        return BoundCheck(name, worst >= 0.0, worst)

    checks = (
        check("U >= sqrt(L/3 + 4pi m^2 Phi0^2 / 3)", U - (u_floor - tol)),
        check("U <= U0", (U0 + tol) - U),
        check("U nonincreasing", (U[:-1] + tol) - U[1:]),
        check("E nonincreasing", (E[:-1] + tol) - E[1:]),
        check("0 < E <= E0", (E0 + tol) - E),
        check("|Z| <= |Z0|", (abs(Z0) + tol) - np.abs(Z)),
        check("psi >= 0", psi + tol),
        check("psi <= (3U0^2 - L)/(8pi)", (psi_cap + tol) - psi),
        check("Phi >= 0", Phi + tol),
        check("Phi <= sqrt((3U0^2 - L)/(4pi m^2))", (phi_cap + tol) - Phi),
        check("|W| <= |W0| + rho^2 e^{3 U0 T}/(3U0)", (w_cap + tol) - np.abs(W)),
    )
    return BoundReport(checks)
