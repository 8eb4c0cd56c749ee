"""Pure-Python radial shooting integrator.

Reference implementation of the compiled kernel in _shooting.pyx; the two
must stay algorithmically identical (same tableau, same step control,
same event logic) so that backends agree to roundoff.  Selection between
them happens in _kernels.__init__.

The ODE integrated is the radial profile equation

    u'' + (dim-1)/r * u' = -(lam*u + mu*|u|^(q-2)*u + |u|^(p-2)*u),

started from u(0) = height, u'(0) = 0 via a fourth-order series expansion
around the regular singular point r = 0, then advanced with a Dormand-
Prince 4(5) pair.  Two entry points:

    shoot          adaptive steps, classification only (fast event scan)
    shoot_sampled  fixed substeps landing exactly on the output grid, so
                   node values are direct RK states (no dense output);
                   this keeps finite-difference residual checks honest.

Events implement the shooting dichotomy: CROSSED (u hit zero while
falling, height too large) versus TURNED (u started growing while still
positive, height too small).
"""

from __future__ import annotations

import math

# status codes (shared contract with the compiled kernel)
RMAX = 0      # reached r_max still positive and decreasing
CROSSED = 1   # u <= 0
TURNED = 2    # u' >= 0 with u > 0, or u > 2*height
FAIL = 3      # step underflow or step budget exhausted

_FIRST_STEP_R = 1e-3
_MAX_STEPS = 2_000_000
_BLOW_FACTOR = 2.0

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# error weights: 5th-order solution minus embedded 4th-order solution
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


def _fnl(u: float, lam: float, mu: float, q: float, p: float) -> float:
    """lam*u + mu*|u|^(q-2)*u + |u|^(p-2)*u (odd continuation in u)."""
    au = abs(u)
    if au == 0.0:
        return 0.0
    return lam * u + mu * au ** (q - 2.0) * u + au ** (p - 2.0) * u


def _fnl_prime(u: float, lam: float, mu: float, q: float, p: float) -> float:
    au = abs(u)
    if au == 0.0:
        return lam
    return lam + mu * (q - 1.0) * au ** (q - 2.0) + (p - 1.0) * au ** (p - 2.0)


def _step(r, u, v, h, k1u, k1v, nm1, lam, mu, q, p):
    """One DP5 step from (r, u, v); returns (unew, vnew, k7u, k7v, err_u, err_v)."""
    ru = r + _C2 * h
    yu = u + h * _A21 * k1u
    yv = v + h * _A21 * k1v
    k2u = yv
    k2v = -nm1 / ru * yv - _fnl(yu, lam, mu, q, p)

    ru = r + _C3 * h
    yu = u + h * (_A31 * k1u + _A32 * k2u)
    yv = v + h * (_A31 * k1v + _A32 * k2v)
    k3u = yv
    k3v = -nm1 / ru * yv - _fnl(yu, lam, mu, q, p)

    ru = r + _C4 * h
    yu = u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
    yv = v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
    k4u = yv
    k4v = -nm1 / ru * yv - _fnl(yu, lam, mu, q, p)

    ru = r + _C5 * h
    yu = u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
    yv = v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
    k5u = yv
    k5v = -nm1 / ru * yv - _fnl(yu, lam, mu, q, p)

    ru = r + h
    yu = u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
    yv = v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
    k6u = yv
    k6v = -nm1 / ru * yv - _fnl(yu, lam, mu, q, p)

    unew = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
    vnew = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)

    k7u = vnew
    k7v = -nm1 / (r + h) * vnew - _fnl(unew, lam, mu, q, p)

    erru = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
    errv = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
    return unew, vnew, k7u, k7v, erru, errv


def _series_start(height, lam, mu, q, p, dim):
    """Series coefficients (c2, c4) of u = h + c2 r^2 + c4 r^4 near r = 0."""
    f0 = _fnl(height, lam, mu, q, p)
    c2 = -f0 / (2.0 * dim)
    c4 = -_fnl_prime(height, lam, mu, q, p) * c2 / (4.0 * (dim + 2.0))
    return f0, c2, c4


def _series_radius(height, c4, cap):
    """Start radius keeping the truncated series error under 1e-16 * h.

    The c4 term is used as a proxy for the truncation scale; stiff
    nonlinearities (large local frequency) shrink the start radius so the
    unstable separatrix mode is not seeded with start-up error.
    """
    r = cap
    bound = 1e-16 * height
    ac4 = abs(c4)
    for _ in range(40):
        if ac4 * r ** 4 <= bound:
            break
        r *= 0.5
    return r


def shoot(height, lam, mu, q, p, dim, r_max, rtol, atol):
    """Adaptive classification shot: returns (status, r_end, u_end, du_end, n_steps)."""
    nm1 = dim - 1.0
    f0, c2, c4 = _series_start(height, lam, mu, q, p, dim)
    if f0 <= 0.0:
        return TURNED, 0.0, height, 0.0, 0

    r = _series_radius(height, c4, min(_FIRST_STEP_R, 0.5 * r_max))
    u = height + c2 * r * r + c4 * r**4
    v = 2.0 * c2 * r + 4.0 * c4 * r**3

    k1u = v
    k1v = -nm1 / r * v - _fnl(u, lam, mu, q, p)

    h = min(r, 0.05 * r_max)
    hmin = 1e-14 * r_max
    steps = 0
    status = RMAX

    while True:
        if steps >= _MAX_STEPS:
            status = FAIL
            break
        if r >= r_max:
            status = RMAX
            break
        if h > r_max - r:
            h = r_max - r
        if h < hmin:
            status = FAIL
            break
        steps += 1

        unew, vnew, k7u, k7v, erru, errv = _step(r, u, v, h, k1u, k1v, nm1, lam, mu, q, p)
        su = atol + rtol * max(abs(u), abs(unew))
        sv = atol + rtol * max(abs(v), abs(vnew))
        err = math.sqrt(0.5 * ((erru / su) ** 2 + (errv / sv) ** 2))

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue

        u, v, r = unew, vnew, r + h
        k1u, k1v = k7u, k7v

        if u <= 0.0:
            status = CROSSED
            break
        if v >= 0.0 or u > _BLOW_FACTOR * height:
            status = TURNED
            break

        h *= min(5.0, 0.9 * err ** -0.2) if err > 0.0 else 5.0

    return status, r, u, v, steps


def shoot_sampled(height, lam, mu, q, p, dim, grid, out_u, out_du, n_sub):
    """Fixed-step shot sampled on a uniform grid (grid[0] = 0).

    Takes n_sub equal DP5 substeps per grid cell so that every node value
    is a direct Runge-Kutta state.  Stops at the first dichotomy event.
    Returns (status, r_end, u_end, du_end, n_steps, n_sampled).
    """
    nm1 = dim - 1.0
    ngrid = len(grid)
    f0, c2, c4 = _series_start(height, lam, mu, q, p, dim)
    out_u[0] = height
    out_du[0] = 0.0
    if f0 <= 0.0:
        return TURNED, 0.0, height, 0.0, 0, 1

    # series start at a radius safe for the local stiffness, then fixed
    # substeps carry the state to the first grid node
    r = _series_radius(height, c4, 0.5 * grid[1])
    u = height + c2 * r * r + c4 * r**4
    v = 2.0 * c2 * r + 4.0 * c4 * r**3
    gidx = 1

    k1u = v
    k1v = -nm1 / r * v - _fnl(u, lam, mu, q, p)

    steps = 0
    status = RMAX
    stop = False

    while gidx < ngrid and not stop:
        rnext = grid[gidx]
        h = (rnext - r) / n_sub
        for _ in range(n_sub):
            unew, vnew, k7u, k7v, _eu, _ev = _step(r, u, v, h, k1u, k1v, nm1, lam, mu, q, p)
            steps += 1
            u, v = unew, vnew
            r += h
            k1u, k1v = k7u, k7v
            if u <= 0.0:
                status = CROSSED
                stop = True
                break
            if v >= 0.0 or u > _BLOW_FACTOR * height:
                status = TURNED
                stop = True
                break
        else:
            r = rnext  # kill accumulated roundoff in the node position
            out_u[gidx] = u
            out_du[gidx] = v
            gidx += 1

    return status, r, u, v, steps, gidx
