"""Compiled inner loops for the collision quadrature.

The operator evaluation is a triple sum (output node, incoming partner node,
sphere direction) whose innermost work is a pair of tricubic interpolations
plus the collision kinematics.  That is far too hot for array-at-a-time numpy
at n^3 output nodes, so the loops live here under numba.  Everything is
deterministic: each output node accumulates its own sums in a fixed order, so
results do not depend on thread count.

Interpolation is tensor-product cubic Lagrange on the 4x4x4 neighborhood with
zero extension outside the cube, matching the transport module's shift
interpolation order.
"""

import numpy as np
from numba import config, njit, prange

# The portable threading layer keeps single-machine runs quiet and
# deterministic; the accumulation order is fixed per output node anyway.
config.THREADING_LAYER = "workqueue"

KIND_GAUSSIAN = 0
KIND_CONSTANT = 1


@njit(cache=True, inline="always")
def _axis_stencil(t, n, idx, w):
    """Fill the 4-point cubic Lagrange stencil for grid-unit coordinate t."""
    i0 = int(np.floor(t))
    s = t - i0
    w[0] = -s * (s - 1.0) * (s - 2.0) / 6.0
    w[1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
    w[2] = -(s + 1.0) * s * (s - 2.0) / 2.0
    w[3] = (s + 1.0) * s * (s - 1.0) / 6.0
    for d in range(4):
        ii = i0 - 1 + d
        if ii < 0 or ii >= n:
            idx[d] = 0
            w[d] = 0.0
        else:
            idx[d] = ii


@njit(cache=True, inline="always")
def _tricubic_sample(vals, n, u_max, inv_h, x, y, z):
    """Cubic-Lagrange sample of vals at physical point (x, y, z); 0 outside the cube."""
    tx = (x + u_max) * inv_h
    ty = (y + u_max) * inv_h
    tz = (z + u_max) * inv_h
    if tx < 0.0 or tx > n - 1.0 or ty < 0.0 or ty > n - 1.0 or tz < 0.0 or tz > n - 1.0:
        return 0.0

    ix = np.empty(4, dtype=np.int64)
    iy = np.empty(4, dtype=np.int64)
    iz = np.empty(4, dtype=np.int64)
    wx = np.empty(4)
    wy = np.empty(4)
    wz = np.empty(4)
    _axis_stencil(tx, n, ix, wx)
    _axis_stencil(ty, n, iy, wy)
    _axis_stencil(tz, n, iz, wz)

    acc = 0.0
    for a in range(4):
        wa = wx[a]
        if wa == 0.0:
            continue
        for b in range(4):
            wab = wa * wy[b]
            if wab == 0.0:
                continue
            row = vals[ix[a], iy[b]]
            for c in range(4):
                acc += wab * wz[c] * row[iz[c]]
    return acc


@njit(cache=True, parallel=True)
def collision_gain_loss(fv, gv, axis, E, sub_idx, sub_w, omegas, omega_w,
                        kind, amp, u_max, inv_h):
    """Quadrature of the gain and loss integrands at every grid node.

    For each output node u the accumulated sums are

        gain(u) = E^3 sum_v (w_v / v0) sum_k w_k f(u') g(v') B
        loss(u) = E^3 f(u) sum_v (w_v / v0) sum_k w_k g(v) B

    with u' = u + b*omega, v' = v - b*omega from the collision parametrization

        b = 2 a^2 u0 v0 e (omega . (v/v0 - u/u0)) / (a^2 e^2 - (omega . (u+v))^2)

    where a^2 = 1/E^2 and e = u0 + v0.  The denominator is strictly positive
    because a*e = sqrt(a^2 + |u|^2) + sqrt(a^2 + |v|^2) > |u| + |v|; its
    smallest ratio to a^2 e^2 over all quadrature nodes is returned so the
    caller can hard-fail if an implementation bug ever drives it nonpositive.

    Returns (gain, loss, min_den_ratio).
    """
    n = axis.shape[0]
    m = sub_idx.shape[0]
    nk = omegas.shape[0]
    a2 = 1.0 / (E * E)
    e3 = E * E * E

    # Incoming-partner tables on the subsampled grid.
    vcoord = np.empty(m)
    for a in range(m):
        vcoord[a] = axis[sub_idx[a]]
    v0tab = np.empty((m, m, m))
    gtab = np.empty((m, m, m))
    for a in range(m):
        for b in range(m):
            for c in range(m):
                vx = vcoord[a]
                vy = vcoord[b]
                vz = vcoord[c]
                v0tab[a, b, c] = np.sqrt(1.0 + E * E * (vx * vx + vy * vy + vz * vz))
                gtab[a, b, c] = gv[sub_idx[a], sub_idx[b], sub_idx[c]]

    gain = np.zeros((n, n, n))
    loss = np.zeros((n, n, n))
    dmin = np.full(n * n * n, np.inf)

    for p in prange(n * n * n):
        i = p // (n * n)
        j = (p // n) % n
        k = p % n
        ux = axis[i]
        uy = axis[j]
        uz = axis[k]
        uu2 = ux * ux + uy * uy + uz * uz
        u0 = np.sqrt(1.0 + E * E * uu2)
        fu = fv[i, j, k]

        gacc = 0.0
        lacc = 0.0
        dworst = np.inf
        for a in range(m):
            vx = vcoord[a]
            wa = sub_w[a]
            for b in range(m):
                vy = vcoord[b]
                wab = wa * sub_w[b]
                for c in range(m):
                    vz = vcoord[c]
                    v0 = v0tab[a, b, c]
                    gvb = gtab[a, b, c]
                    wv = wab * sub_w[c] / v0

                    ee = u0 + v0
                    base = 2.0 * a2 * u0 * v0 * ee
                    den0 = a2 * ee * ee
                    dhx = vx / v0 - ux / u0
                    dhy = vy / v0 - uy / u0
                    dhz = vz / v0 - uz / u0
                    sx = ux + vx
                    sy = uy + vy
                    sz = uz + vz
                    vv2 = vx * vx + vy * vy + vz * vz

                    for q in range(nk):
                        ox = omegas[q, 0]
                        oy = omegas[q, 1]
                        oz = omegas[q, 2]
                        s1 = ox * dhx + oy * dhy + oz * dhz
                        s2 = ox * sx + oy * sy + oz * sz
                        den = den0 - s2 * s2
                        ratio = den / den0
                        if ratio < dworst:
                            dworst = ratio
                        if den <= 0.0:
                            continue
                        bt = base * s1 / den
                        upx = ux + bt * ox
                        upy = uy + bt * oy
                        upz = uz + bt * oz
                        vpx = vx - bt * ox
                        vpy = vy - bt * oy
                        vpz = vz - bt * oz

                        if kind == KIND_GAUSSIAN:
                            arg = -(a2 + uu2 + vv2
                                    + upx * upx + upy * upy + upz * upz
                                    + vpx * vpx + vpy * vpy + vpz * vpz)
                            bk = amp * np.exp(arg)
                        else:
                            bk = amp

                        wq = wv * omega_w[q]
                        lacc += wq * gvb * bk
                        fup = _tricubic_sample(fv, n, u_max, inv_h, upx, upy, upz)
                        if fup != 0.0:
                            gvp = _tricubic_sample(gv, n, u_max, inv_h, vpx, vpy, vpz)
                            gacc += wq * fup * gvp * bk

        gain[i, j, k] = e3 * gacc
        loss[i, j, k] = e3 * fu * lacc
        dmin[p] = dworst

    return gain, loss, dmin.min()
