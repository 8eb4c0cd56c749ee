# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled radial shooting integrator.

Twin of shooting_py.py: identical tableau, step control, and event logic.
Any change here must be mirrored there (the test suite cross-checks the
two backends against each other).
"""

from libc.math cimport fabs, sqrt, pow

cdef int _RMAX = 0
cdef int _CROSSED = 1
cdef int _TURNED = 2
cdef int _FAIL = 3

RMAX = _RMAX
CROSSED = _CROSSED
TURNED = _TURNED
FAIL = _FAIL

cdef double _FIRST_STEP_R = 1e-3
cdef long _MAX_STEPS = 2000000
cdef double _BLOW_FACTOR = 2.0

cdef double _C2 = 1.0 / 5.0
cdef double _C3 = 3.0 / 10.0
cdef double _C4 = 4.0 / 5.0
cdef double _C5 = 8.0 / 9.0
cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0
cdef double _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0
cdef double _A42 = -56.0 / 15.0
cdef double _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0
cdef double _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0
cdef double _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0
cdef double _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0
cdef double _A64 = 49.0 / 176.0
cdef double _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0
cdef double _B3 = 500.0 / 1113.0
cdef double _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0
cdef double _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0
cdef double _E3 = -71.0 / 16695.0
cdef double _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0
cdef double _E6 = 22.0 / 525.0
cdef double _E7 = -1.0 / 40.0


cdef inline double _fnl(double u, double lam, double mu, double q, double p) nogil:
    cdef double au = fabs(u)
    if au == 0.0:
        return 0.0
    return lam * u + mu * pow(au, q - 2.0) * u + pow(au, p - 2.0) * u


cdef inline double _fnl_prime(double u, double lam, double mu, double q, double p) nogil:
    cdef double au = fabs(u)
    if au == 0.0:
        return lam
    return lam + mu * (q - 1.0) * pow(au, q - 2.0) + (p - 1.0) * pow(au, p - 2.0)


cdef inline double _series_radius(double height, double c4, double cap) nogil:
    # start radius keeping the truncated series error under 1e-16 * h
    cdef double r = cap
    cdef double bound = 1e-16 * height
    cdef double ac4 = fabs(c4)
    cdef int i
    for i in range(40):
        if ac4 * r * r * r * r <= bound:
            break
        r *= 0.5
    return r


cdef struct StepOut:
    double u
    double v
    double k7u
    double k7v
    double erru
    double errv


cdef inline void _step(double r, double u, double v, double h,
                       double k1u, double k1v, double nm1,
                       double lam, double mu, double q, double p,
                       StepOut *out) nogil:
    cdef double ru, yu, yv
    cdef double k2u, k2v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v

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

    out.u = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
    out.v = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)

    out.k7u = out.v
    out.k7v = -nm1 / (r + h) * out.v - _fnl(out.u, lam, mu, q, p)

    out.erru = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * out.k7u)
    out.errv = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * out.k7v)


def shoot(double height, double lam, double mu, double q, double p,
          int dim, double r_max, double rtol, double atol):
    """Adaptive classification shot: returns (status, r_end, u_end, du_end, n_steps)."""
    cdef double nm1 = dim - 1.0
    cdef double f0 = _fnl(height, lam, mu, q, p)
    cdef double c2 = -f0 / (2.0 * dim)
    cdef double c4 = -_fnl_prime(height, lam, mu, q, p) * c2 / (4.0 * (dim + 2.0))
    cdef double r, u, v, k1u, k1v, h, hmin, su, sv, err, fac
    cdef long steps = 0
    cdef int status = _RMAX
    cdef StepOut so

    if f0 <= 0.0:
        return _TURNED, 0.0, height, 0.0, 0

    r = _FIRST_STEP_R
    if r >= 0.5 * r_max:
        r = 0.5 * r_max
    r = _series_radius(height, c4, r)
    u = height + c2 * r * r + c4 * r * r * r * r
    v = 2.0 * c2 * r + 4.0 * c4 * r * r * r

    k1u = v
    k1v = -nm1 / r * v - _fnl(u, lam, mu, q, p)

    h = r
    if 0.05 * r_max < h:
        h = 0.05 * r_max
    hmin = 1e-14 * r_max

    with nogil:
        while True:
            if steps >= _MAX_STEPS:
                status = _FAIL
                break
            if r >= r_max:
                status = _RMAX
                break
            if h > r_max - r:
                h = r_max - r
            if h < hmin:
                status = _FAIL
                break
            steps += 1

            _step(r, u, v, h, k1u, k1v, nm1, lam, mu, q, p, &so)
            su = fabs(u)
            if fabs(so.u) > su:
                su = fabs(so.u)
            su = atol + rtol * su
            sv = fabs(v)
            if fabs(so.v) > sv:
                sv = fabs(so.v)
            sv = atol + rtol * sv
            err = sqrt(0.5 * ((so.erru / su) * (so.erru / su) + (so.errv / sv) * (so.errv / sv)))

            if err > 1.0:
                fac = 0.9 * pow(err, -0.2)
                if fac < 0.2:
                    fac = 0.2
                h *= fac
                continue

            u = so.u
            v = so.v
            r += h
            k1u = so.k7u
            k1v = so.k7v

            if u <= 0.0:
                status = _CROSSED
                break
            if v >= 0.0 or u > _BLOW_FACTOR * height:
                status = _TURNED
                break

            if err > 0.0:
                fac = 0.9 * pow(err, -0.2)
                if fac > 5.0:
                    fac = 5.0
            else:
                fac = 5.0
            h *= fac

    return status, r, u, v, steps


def shoot_sampled(double height, double lam, double mu, double q, double p,
                  int dim, double[::1] grid, double[::1] out_u, double[::1] out_du,
                  int n_sub):
    """Fixed-step shot sampled on a uniform grid (grid[0] = 0).

    Takes n_sub equal DP5 substeps per grid cell so that every node value
    is a direct Runge-Kutta state.  Stops at the first dichotomy event.
    Returns (status, r_end, u_end, du_end, n_steps, n_sampled).
    """
    cdef double nm1 = dim - 1.0
    cdef double f0 = _fnl(height, lam, mu, q, p)
    cdef double c2 = -f0 / (2.0 * dim)
    cdef double c4 = -_fnl_prime(height, lam, mu, q, p) * c2 / (4.0 * (dim + 2.0))
    cdef double r, u, v, k1u, k1v, h, rnext
    cdef long steps = 0
    cdef int status = _RMAX
    cdef Py_ssize_t ngrid = grid.shape[0]
    cdef Py_ssize_t gidx
    cdef int sub, stop = 0
    cdef StepOut so

    out_u[0] = height
    out_du[0] = 0.0
    if f0 <= 0.0:
        return _TURNED, 0.0, height, 0.0, 0, 1

    # series start at a radius safe for the local stiffness, then fixed
    # substeps carry the state to the first grid node
    r = _series_radius(height, c4, 0.5 * grid[1])
    u = height + c2 * r * r + c4 * r * r * r * r
    v = 2.0 * c2 * r + 4.0 * c4 * r * r * r
    gidx = 1

    k1u = v
    k1v = -nm1 / r * v - _fnl(u, lam, mu, q, p)

    with nogil:
        while gidx < ngrid and not stop:
            rnext = grid[gidx]
            h = (rnext - r) / n_sub
            sub = 0
            while sub < n_sub:
                _step(r, u, v, h, k1u, k1v, nm1, lam, mu, q, p, &so)
                steps += 1
                u = so.u
                v = so.v
                r += h
                k1u = so.k7u
                k1v = so.k7v
                if u <= 0.0:
                    status = _CROSSED
                    stop = 1
                    break
                if v >= 0.0 or u > _BLOW_FACTOR * height:
                    status = _TURNED
                    stop = 1
                    break
                sub += 1
            if not stop:
                r = rnext
                out_u[gidx] = u
                out_du[gidx] = v
                gidx += 1

    return status, r, u, v, steps, gidx
