"""
Binary collision kinematics on the mass shell
=============================================

Post-collision momenta for a binary elastic collision of massive particles,
parametrized by a unit scattering direction.  The construction conserves
total momentum to rounding and total elementary energy to near machine
precision, and its momentum-space Jacobian obeys a closed-form identity.
"""

import numpy as np

import flrw_kinetics as fk
from flrw_kinetics import verification

rng = np.random.default_rng(7)

# One random collision: two covariant momenta, a scattering direction omega
# on the unit sphere, and an inverse scale factor E.
u = rng.normal(0.0, 2.0, 3)
v = rng.normal(0.0, 2.0, 3)
omega = rng.normal(size=3)
omega /= np.linalg.norm(omega)
E = 1.3

up, vp = fk.post_collision(u, v, omega, E)
print("incoming  u =", u)
print("incoming  v =", v)
print("outgoing  u' =", up)
print("outgoing  v' =", vp)

# Momentum conservation: u' + v' = u + v, component by component.
print("\nmomentum defect  u'+v'-u-v =", up + vp - u - v)

# Energy conservation: the elementary energy e = u0 + v0 is invariant.
e_in = fk.elementary_energy(u, v, E)
e_out = fk.u_zero(up, E) + fk.u_zero(vp, E)
print(f"energy in {e_in:.15f}  out {e_out:.15f}  defect {e_out - e_in:.3e}")

# The shift magnitude along omega comes from solving energy conservation;
# it vanishes when the momenta are equal (nothing can scatter).
print("\nb along omega for u=v:", fk.btilde(u, u, omega, E))

# The Jacobian of (u,v) -> (u',v') has |det J| = u'0 v'0 / (u0 v0); the
# residual compares a finite-difference determinant against that identity.
res = fk.jacobian_residual(u, v, omega, E, delta=1e-4)
print(f"jacobian identity residual (delta=1e-4): {res:.3e}")

# The packaged verification suites run the same checks over random samples.
print()
print(verification.kinematics_suite(200, seed=0).summary())
print(verification.jacobian_suite(50, seed=1).summary())
