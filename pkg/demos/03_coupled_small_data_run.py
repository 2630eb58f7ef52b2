"""
A full coupled run with its diagnostic ledger
=============================================

The whole system at once: expansion, electromagnetic flux, massive scalar
field, and a small kinetic gas that both advects in momentum space and
collides.  The solver records the Hamiltonian-constraint residual, the
conserved flux Z/E^3, and weighted Sobolev norms of the distribution
function at every stored knot, and the closed-form a-priori bounds plus the
damped energy inequality can be audited after the fact.
"""

import numpy as np

import flrw_kinetics as fk

grid = fk.make_grid(4.0, 9)
f0 = fk.gaussian_profile(grid, 1e-3, 1.0)
p = fk.PhysParams(Lambda=3.0, m=0.1, rho=1e-3)

# U0 is never chosen by hand: the Hamiltonian constraint is solved for it.
U0 = fk.solve_constraint_for_U(1.0, -0.1, 0.05, 0.5, 0.2, f0, p)
print(f"derived U0 = {U0!r}")
init = (fk.CosmoState(E=1.0, U=U0, W=-0.1, Z=0.05, Phi=0.5, psi=0.2), f0)

cfg = fk.SolveConfig(dt=0.01, T=0.5, storage_stride=10,
                     record_source_norm=True)
traj = fk.direct_solve(init, p, fk.kernel_by_name("gaussian", 1.0),
                       fk.sphere_quadrature(6), fk.CollisionConfig(6, 2), cfg)

print("\n   t       U          E         |constraint|   Z/E^3        ||f||_H3_d")
for j, t in enumerate(traj.times):
    s = traj.states[j]
    print(f"  {t:4.2f}  {s.U:9.6f}  {s.E:9.6f}   {abs(traj.diagnostics['ham_residual'][j]):.3e}"
          f"   {traj.diagnostics['flux'][j]:.8f}   {traj.diagnostics['f_sobolev'][j]:.6e}")

flux = traj.diagnostics["flux"]
print(f"\nflux drift: {np.max(np.abs(flux - flux[0])) / abs(flux[0]):.3e} relative")

# Closed-form a-priori bounds: monotone U and E, capped psi / Phi / |W|, ...
print()
print(fk.apriori_check(traj, p).summary())

# The damped energy inequality: search for certifying constants (delta1, C1).
kappa = min(s.U for s in traj.states)
print()
print(fk.energy_estimate_check(traj, kappa, traj.sobolev).summary())
