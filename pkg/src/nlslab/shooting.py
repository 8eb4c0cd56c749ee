"""Height-shooting policy for radial stationary profiles.

Solves  u'' + (N-1)/r u' + lam*u + mu*|u|^(q-2)u + |u|^(p-2)u = 0  with
u(0) = h, u'(0) = 0, u > 0 decreasing, u -> 0, by bisection on h.  The
dichotomy is the classical one: too large a height makes u cross zero
(CROSSED), too small makes it turn around while positive (TURNED); the
ground state sits on the separatrix.

Everything is integrated at unit frequency lam = -1.  A profile at any
other lam < 0 is obtained from the exact rescaling

    u(r) = kappa^(2/(p-2)) * v(kappa r),   kappa = sqrt(-lam),

which maps the problem to lam = -1 with mu replaced by
mu * kappa^(2(q-p)/(p-2)).  This keeps the integration domain O(40/kappa
decay lengths) and the boundary smallness uniform in lam.

Sampled profiles come from fixed Runge-Kutta steps landing exactly on the
grid nodes, so finite differences of the node values measure the genuine
ODE residual instead of dense-output interpolation noise.  Beyond the
radius where u drops below TAIL_EPS * h the bisection iterate is garbage
(contaminated by the unstable separatrix mode), so the far field is
replaced by the analytic decay

    N = 1:  u ~ A e^(-kappa r)
    N = 2:  u ~ A K0(kappa r)  (two-term asymptotic expansion)
    N = 3:  u ~ A e^(-kappa r) / r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from ._kernels import CROSSED, FAIL, RMAX, TURNED
from .errors import ShootingError
from .fields import RadialField, quad_weights, uniform_grid

TAIL_EPS = 1e-6
SHOOT_RTOL = 1e-12
BISECT_RTOL = 1e-15
MAX_DOUBLINGS = 200
MAX_BISECT = 200


@dataclass(frozen=True)
class GridSpec:
    """Uniform radial grid: points values on [0, radius]."""

    radius: float = 40.0
    points: int = 16384

    def make(self) -> np.ndarray:
        return uniform_grid(self.radius, self.points)


@dataclass
class ShotResult:
    """Converged shooting profile plus diagnostics.

    junction is the grid index where the analytic tail takes over;
    residual is the relative weighted-L2 ODE residual of the profile.
    """

    field: RadialField
    height: float
    lam: float
    mu: float
    junction: int
    residual: float
    bracket: tuple[float, float]
    n_bisect: int


def positive_zero(lam: float, mu: float, q: float, p: float) -> float:
    """Largest zero of lam + mu*t^(q-2) + t^(p-2) on t > 0.

    Heights at or below this value turn immediately (the nonlinearity
    cannot overcome the linear decay), so it is a lower bracket endpoint.
    """
    if lam >= 0.0:
        raise ShootingError("positive frequency: shooting requires lam < 0")

    def g(t: float) -> float:
        return lam + mu * t ** (q - 2.0) + t ** (p - 2.0)

    if mu >= 0.0:
        lo = 1e-12
    else:
        # g dips below g(0+) then increases; the relevant zero is past the dip
        lo = (abs(mu) * (q - 2.0) / (p - 2.0)) ** (1.0 / (p - q))
    hi = max(2.0 * lo, 1.0)
    for _ in range(MAX_DOUBLINGS):
        if g(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise ShootingError("no positive zero of the nonlinearity found")
    return brentq(g, lo, hi, xtol=1e-300, rtol=1e-15)


def classify_height(height: float, mu: float, q: float, p: float, dim: int,
                    r_max: float) -> int:
    """One adaptive shot at lam = -1; returns a kernel status code."""
    status, _r, _u, _v, _n = _kernels.shoot(
        height, -1.0, mu, q, p, dim, r_max, SHOOT_RTOL, 1e-14 * max(height, 1.0))
    return status


def bracket_height(mu: float, q: float, p: float, dim: int,
                   r_max: float) -> tuple[float, float]:
    """Find heights (h_lo TURNED, h_hi CROSSED) straddling the separatrix."""
    zeta = positive_zero(-1.0, mu, q, p)
    h_lo = zeta * (1.0 + 1e-9)
    st = classify_height(h_lo, mu, q, p, dim, r_max)
    if st == CROSSED:
        raise ShootingError(
            "height at the nonlinearity zero already crosses",
            bracket=(zeta, h_lo))
    h_hi = 2.0 * zeta
    for _ in range(MAX_DOUBLINGS):
        st = classify_height(h_hi, mu, q, p, dim, r_max)
        if st == CROSSED:
            return h_lo, h_hi
        if st == FAIL:
            raise ShootingError("integrator failure during bracket search",
                                bracket=(h_lo, h_hi))
        h_lo = h_hi
        h_hi *= 2.0
    raise ShootingError("no crossing height found", bracket=(h_lo, h_hi))


def bisect_height(h_lo: float, h_hi: float, mu: float, q: float, p: float,
                  dim: int, r_max: float) -> tuple[float, int]:
    """Bisect the TURNED/CROSSED bracket down to relative width BISECT_RTOL."""
    n = 0
    for n in range(1, MAX_BISECT + 1):
        h_mid = 0.5 * (h_lo + h_hi)
        if h_mid <= h_lo or h_mid >= h_hi:
            break
        st = classify_height(h_mid, mu, q, p, dim, r_max)
        if st == CROSSED:
            h_hi = h_mid
        elif st == TURNED or st == RMAX:
            # RMAX: still positive and falling at r_max; treat as under-shot
            h_lo = h_mid
        else:
            raise ShootingError("integrator failure during bisection",
                                bracket=(h_lo, h_hi))
        if (h_hi - h_lo) <= BISECT_RTOL * h_hi:
            break
    return 0.5 * (h_lo + h_hi), n


def _tail_value_slope(dim: int, kappa: float, r: np.ndarray,
                      r_m: float, u_m: float, mu: float, q: float,
                      p: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic decay matched to value u_m at r_m; returns (u, u').

    The linear far-field solution is corrected to leading order for the
    nonlinear source terms: for a source coef*u^(s-1) the correction
    -coef * u^(s-1) / (kappa^2 s (s-2)) solves the linearized tail
    equation up to O(1/r) factors.  Corrections are skipped when s is
    close enough to 2 that the expansion degenerates.
    """
    decay = np.exp(-kappa * (r - r_m))
    if dim == 1:
        u = u_m * decay
        du = -kappa * u
    elif dim == 3:
        u = u_m * (r_m / r) * decay
        du = -(kappa + 1.0 / r) * u
    else:
        def s(x):
            return 1.0 - 1.0 / (8.0 * kappa * x) + 9.0 / (128.0 * (kappa * x) ** 2)

        def sp(x):
            return 1.0 / (8.0 * kappa * x * x) - 9.0 / (64.0 * kappa ** 2 * x ** 3)

        u = u_m * np.sqrt(r_m / r) * decay * s(r) / s(r_m)
        du = u * (-kappa - 0.5 / r + sp(r) / s(r))

    w = np.zeros_like(u)
    dw = np.zeros_like(u)
    w_m = 0.0
    for coef, s_exp in ((mu, q), (1.0, p)):
        gap = s_exp * (s_exp - 2.0)
        if coef != 0.0 and gap > 0.15:
            c = -coef / (kappa * kappa * gap)
            w += c * u ** (s_exp - 1.0)
            dw += c * (s_exp - 1.0) * u ** (s_exp - 2.0) * du
            w_m += c * u_m ** (s_exp - 1.0)
    factor = u_m / (u_m + w_m)
    return factor * (u + w), factor * (du + dw)


def _stiffness_scale(height: float, mu: float, q: float, p: float) -> float:
    """Largest local frequency sqrt(|f'(u)|) over the height range.

    u sweeps down from the height, so |f'| is sampled along that range
    (it can peak in the interior when mu < 0).
    """
    fp = 1.0
    for frac in (1.0, 0.75, 0.5, 0.25, 0.1):
        u = frac * height
        fp = max(fp, abs(-1.0 + mu * (q - 1.0) * u ** (q - 2.0)
                         + (p - 1.0) * u ** (p - 2.0)))
    return math.sqrt(fp)


def _substeps(height: float, mu: float, q: float, p: float, dr: float) -> int:
    """Substeps per cell so that step * local frequency stays small."""
    scale = _stiffness_scale(height, mu, q, p)
    return max(1, min(64, int(math.ceil(dr * scale / 0.02))))


def _auto_points(radius: float, height: float, mu: float, q: float,
                 p: float) -> int:
    """Node count keeping dr * stiffness <= 0.06 for the residual check.

    Stiff cores (strong defocusing, rescaled small-frequency problems)
    need finer grids than the default for the sixth-order residual
    stencil to resolve them; smooth cases keep the default.
    """
    scale = _stiffness_scale(height, mu, q, p)
    points = GridSpec().points
    while points * 0.06 < radius * scale and points < 2 ** 20:
        points *= 2
    return points


def refine_height_sampled(height: float, mu: float, q: float, p: float,
                          dim: int, grid: GridSpec) -> float:
    """Re-bisect the last digits of the height against the sampler.

    The adaptive and fixed-step integrators have separatrix heights that
    differ by a few ulps-to-1e-10 relative; the unstable mode amplifies
    that offset exponentially, so the profile must sit on the separatrix
    of the integrator that actually produces the samples.
    """
    r = grid.make()
    u = np.zeros(grid.points)
    du = np.zeros(grid.points)
    n_sub = _substeps(height, mu, q, p, r[1] - r[0])

    def cls(h: float) -> int:
        status, _re, _ue, _ve, _ns, _m = _kernels.shoot_sampled(
            h, -1.0, mu, q, p, dim, r, u, du, n_sub)
        if status == FAIL:
            raise ShootingError("integrator failure during height refinement",
                                bracket=(height, height))
        return status

    off = 4e-12
    h_lo = height * (1.0 - off)
    while cls(h_lo) == CROSSED:
        off *= 4.0
        if off > 1e-6:
            raise ShootingError("no turning height near the adaptive estimate",
                                bracket=(h_lo, height))
        h_lo = height * (1.0 - off)
    off = 4e-12
    h_hi = height * (1.0 + off)
    while cls(h_hi) != CROSSED:
        off *= 4.0
        if off > 1e-6:
            raise ShootingError("no crossing height near the adaptive estimate",
                                bracket=(height, h_hi))
        h_hi = height * (1.0 + off)
    for _ in range(MAX_BISECT):
        h_mid = 0.5 * (h_lo + h_hi)
        if h_mid <= h_lo or h_mid >= h_hi:
            break
        if cls(h_mid) == CROSSED:
            h_hi = h_mid
        else:
            h_lo = h_mid
        if (h_hi - h_lo) <= BISECT_RTOL * h_hi:
            break
    return 0.5 * (h_lo + h_hi)


def sample_profile(height: float, mu: float, q: float, p: float, dim: int,
                   grid: GridSpec, tail_eps: float = TAIL_EPS) -> tuple[RadialField, int]:
    """Fixed-step sampling of the lam = -1 shot, with analytic tail patch.

    Returns the field and the junction index where the patch starts.
    """
    r = grid.make()
    n = grid.points
    u = np.zeros(n)
    du = np.zeros(n)
    n_sub = _substeps(height, mu, q, p, r[1] - r[0])
    status, _re, _ue, _ve, _ns, n_sampled = _kernels.shoot_sampled(
        height, -1.0, mu, q, p, dim, r, u, du, n_sub)

    level = tail_eps * height
    below = np.nonzero(u[:n_sampled] <= level)[0]
    below = below[below > 0]
    if below.size == 0:
        if status == RMAX and u[n_sampled - 1] > level:
            raise ShootingError(
                "profile did not decay below the tail threshold; "
                "increase the grid radius")
        # event fired before clean decay: patch from the last trusted node
        m = n_sampled - 1
        if m < 8 or u[m] > 1e-3 * height:
            raise ShootingError("shot lost before reaching the tail region",
                                bracket=(height, height))
    else:
        m = int(below[0])
    u[m:], du[m:] = _tail_value_slope(dim, 1.0, r[m:], r[m], u[m], mu, q, p)
    field = RadialField(grid=r, values=u, dim=dim, deriv=du)
    return field, m


def ode_residual(field: RadialField, lam: float, mu: float, q: float, p: float,
                 skip: tuple[int, int] | None = None) -> float:
    """Relative weighted-L2 residual of u'' + (N-1)/r u' + f(u) = 0.

    Sixth-order central differences on the uniform grid, even extension
    through r = 0.  skip masks index window [lo, hi) (the tail junction,
    where the patch kinks the derivative).  Normalized by the weighted-L2
    norm of the nonlinear term f(u), which scales like |Delta u|.
    """
    r = field.grid
    u = field.values
    n = u.size
    dr = field.dr
    ext = np.concatenate([u[3:0:-1], u])  # even reflection: indices -3..-1
    d2 = (2.0 * (ext[:-6] + ext[6:]) - 27.0 * (ext[1:-5] + ext[5:-1])
          + 270.0 * (ext[2:-4] + ext[4:-2]) - 490.0 * ext[3:-3]) / (180.0 * dr * dr)
    d1 = ((ext[6:] - ext[:-6]) - 9.0 * (ext[5:-1] - ext[1:-5])
          + 45.0 * (ext[4:-2] - ext[2:-4])) / (60.0 * dr)
    au = np.abs(u)
    fu = lam * u + mu * au ** (q - 2.0) * u + au ** (p - 2.0) * u
    res = np.zeros(n)
    res[1:n - 3] = d2[1:n - 3] + (field.dim - 1.0) / r[1:n - 3] * d1[1:n - 3] \
        + fu[1:n - 3]
    w = quad_weights(r, field.dim)
    mask = np.ones(n, dtype=bool)
    mask[0] = False          # origin handled by symmetry, not by the stencil
    mask[n - 3:] = False     # one-sided region at the outer boundary
    if skip is not None:
        mask[max(0, skip[0]):skip[1]] = False
    num = math.sqrt(float(np.sum(w[mask] * res[mask] ** 2)))
    den = math.sqrt(float(np.sum(w * fu ** 2)))
    if den == 0.0:
        return math.inf
    return num / den


def normalized_profile(mu: float, q: float, p: float, dim: int,
                       grid: GridSpec | None = None) -> ShotResult:
    """Ground-state profile of the unit-frequency problem (lam = -1)."""
    auto = grid is None
    if auto:
        grid = GridSpec()
    h_lo, h_hi = bracket_height(mu, q, p, dim, grid.radius)
    height, n_bisect = bisect_height(h_lo, h_hi, mu, q, p, dim, grid.radius)
    if auto:
        grid = GridSpec(grid.radius,
                        _auto_points(grid.radius, height, mu, q, p))
    height = refine_height_sampled(height, mu, q, p, dim, grid)
    field, junction = sample_profile(height, mu, q, p, dim, grid)
    resid = ode_residual(field, -1.0, mu, q, p,
                         skip=(junction - 6, junction + 7))
    return ShotResult(field=field, height=height, lam=-1.0, mu=mu,
                      junction=junction, residual=resid,
                      bracket=(h_lo, h_hi), n_bisect=n_bisect)


def scaled_profile(lam: float, mu: float, q: float, p: float, dim: int,
                   grid: GridSpec | None = None) -> ShotResult:
    """Ground-state profile at arbitrary lam < 0 via the kappa rescaling.

    grid, when given, is in the physical radial variable; the integration
    runs on the rescaled variable with the same point count.
    """
    if lam >= 0.0:
        raise ShootingError("shooting requires lam < 0")
    kappa = math.sqrt(-lam)
    alpha = kappa ** (2.0 / (p - 2.0))
    mu_eff = mu * kappa ** (2.0 * (q - p) / (p - 2.0))
    if grid is None:
        ngrid = GridSpec()
    else:
        ngrid = GridSpec(radius=grid.radius * kappa, points=grid.points)
    shot = normalized_profile(mu_eff, q, p, dim, ngrid)
    v = shot.field
    if (grid is not None
            and abs(v.values[-1]) > 1e-10 * np.max(np.abs(v.values))):
        raise ShootingError(
            f"physical radius {grid.radius:.3g} does not contain the state: "
            f"the decay length is 1/kappa = {1.0 / kappa:.3g}")
    field = RadialField(grid=v.grid / kappa, values=alpha * v.values,
                        dim=dim, deriv=alpha * kappa * v.deriv)
    return ShotResult(field=field, height=alpha * shot.height, lam=lam, mu=mu,
                      junction=shot.junction, residual=shot.residual,
                      bracket=shot.bracket, n_bisect=shot.n_bisect)
