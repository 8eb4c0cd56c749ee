"""Explicit existence thresholds for the combined-power problem.

Once the two sharp interpolation constants are known, every threshold is
scalar arithmetic.  The central object in the mixed focusing regime
(2 < q < pbar < p < 2*, mu > 0) is

    h(t) = t^2/2 - mu*(Cq^q/q)*a^((1-gamma_q)q)*t^(gamma_q q)
                 - (Cp^p/p)*a^((1-gamma_p)p)*t^(gamma_p p),

whose positivity window (r0, r1) in the variable t = |grad u|_2 carries
the whole two-branch geometry: the local minimizer lives at gradient norm
below r0, the mountain pass above.  The window exists iff an explicit
inequality between (a, mu) and the two constants holds; cond_mixed
evaluates that inequality and h_roots returns the window.  cond_critical
and cond_defocusing are the matching inequalities when the lower power is
mass-critical (mu > 0) and when the perturbation is defocusing (mu < 0).

blowup_bound_M bounds the negative dip of the related function g that
controls the virial derivative along the flow, and stability_window
computes the largest coupling for which a doubled lower root at mass
a_tilde + rho still clears the upper root at mass a_tilde.

Everything here is pure scalar computation; nothing shoots the ODE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import RegimeError, StructureError, ValidationError
from .gn import ConstantsPair, GNConstants
from .params import ModelParams, Regime, RegimeTag, classify, derive

GRID_POINTS = 512
GRID_LO = 1e-8
GRID_HI = 1e8
ROOT_RTOL = 1e-12
# Comparisons closer than this (relative) are reported as a boundary case.
BOUNDARY_TOL = 1e-9

_GRID = np.geomspace(GRID_LO, GRID_HI, GRID_POINTS)


@dataclass(frozen=True)
class ThresholdReport:
    """Outcome of one threshold inequality.

    margin = rhs - lhs in the orientation of the inequality, so the
    condition holds iff the margin is positive.  Within a relative
    BOUNDARY_TOL dead band the two sides are numerically
    indistinguishable: the margin is then reported as exactly 0 and the
    condition is not asserted.
    """

    condition_holds: bool
    lhs: float
    rhs: float
    margin: float
    regime: Regime


@dataclass(frozen=True)
class HGeometry:
    """Positivity window of h plus its interior landmarks.

    r0 < tbar < r1, where tbar maximizes the reduced function
    phi(t) = t^(2-gamma_q q)/2 - (Cp^p/p) a^((1-gamma_p)p) t^(gamma_p p - gamma_q q)
    and has a closed form.  hmax is the maximum of h itself on (r0, r1);
    local_min_level is the (negative) minimum of h on (0, r0).
    """

    r0: float
    r1: float
    tbar: float
    hmax: float
    local_min_level: float


class BlowupBound(NamedTuple):
    r2: float
    r3: float
    m_bound: float


@dataclass(frozen=True)
class _Scalars:
    """Coefficient bundle shared by h, g and the inequalities."""

    q: float
    p: float
    gq: float      # gamma_q * q, in (0, 2)
    gp: float      # gamma_p * p, in (2, 2*)
    qterm: float   # mu * Cq^q * a^((1-gamma_q) q)
    pterm: float   # Cp^p * a^((1-gamma_p) p)


def _scalars(params: ModelParams, gn_q: GNConstants, gn_p: GNConstants) -> _Scalars:
    d = derive(params)
    gq = d.gamma_q * params.q
    gp = d.gamma_p * params.p
    qterm = params.mu * gn_q.c_np ** params.q * params.a ** ((1.0 - d.gamma_q) * params.q)
    pterm = gn_p.c_np ** params.p * params.a ** ((1.0 - d.gamma_p) * params.p)
    return _Scalars(q=params.q, p=params.p, gq=gq, gp=gp, qterm=qterm, pterm=pterm)


def _h(t, sc: _Scalars):
    return 0.5 * t * t - (sc.qterm / sc.q) * t ** sc.gq - (sc.pterm / sc.p) * t ** sc.gp


def _g(t, sc: _Scalars):
    bq = sc.qterm * sc.gq / sc.q
    bp = sc.pterm * sc.gp / sc.p
    return t * t - bq * t ** sc.gq - bp * t ** sc.gp


def _tbar(sc: _Scalars) -> float:
    # maximizer of phi; the a-power is already folded into pterm
    return (sc.p * (2.0 - sc.gq) / (2.0 * sc.pterm * (sc.gp - sc.gq))) ** (1.0 / (sc.gp - 2.0))


def _require_tag(params: ModelParams, tag: RegimeTag, what: str) -> Regime:
    regime = classify(params)
    if regime.tag is not tag:
        raise RegimeError(
            f"{what} applies to the {tag.value} regime, "
            f"but (N={params.N}, q={params.q}, p={params.p}, mu={params.mu}) "
            f"classifies as {regime.tag.value}")
    return regime


def _report(lhs: float, rhs: float, regime: Regime) -> ThresholdReport:
    margin = rhs - lhs
    if abs(margin) <= BOUNDARY_TOL * (1.0 + abs(lhs) + abs(rhs)):
        return ThresholdReport(condition_holds=False, lhs=lhs, rhs=rhs,
                               margin=0.0, regime=regime)
    return ThresholdReport(condition_holds=lhs < rhs, lhs=lhs, rhs=rhs,
                           margin=margin, regime=regime)


def h_eval(t, params: ModelParams, gn_q: GNConstants, gn_p: GNConstants):
    """The scalar function h at gradient norm t.  Pure formula, no regime gate."""
    return _h(t, _scalars(params, gn_q, gn_p))


def cond_mixed(params: ModelParams, gn: ConstantsPair) -> ThresholdReport:
    """Existence inequality for the two-branch mixed focusing geometry.

    Holds iff the peak of the reduced function phi clears the coupling
    term, which is equivalent to h having a positivity window.
    """
    regime = _require_tag(params, RegimeTag.MIXED_FOCUSING, "cond_mixed")
    d = derive(params)
    gq = d.gamma_q * params.q
    gp = d.gamma_p * params.p
    aq = params.a ** ((1.0 - d.gamma_q) * params.q)
    ap = params.a ** ((1.0 - d.gamma_p) * params.p)
    cq = gn.at_q.c_np ** params.q
    cp = gn.at_p.c_np ** params.p
    lhs = (params.mu * aq) ** (gp - 2.0) * ap ** (2.0 - gq)
    rhs = (params.p * (2.0 - gq) / (2.0 * cp * (gp - gq))) ** (2.0 - gq) \
        * (params.q * (gp - 2.0) / (2.0 * cq * (gp - gq))) ** (gp - 2.0)
    return _report(lhs, rhs, regime)


def cond_critical(params: ModelParams, gn: ConstantsPair) -> ThresholdReport:
    """Existence inequality when the lower power sits at the mass-critical
    exponent: mu * a^(4/N) must stay below the critical mass power
    pbar / (2 C^pbar) = abar_N^(4/N).  mu = 0 holds trivially."""
    if params.cmp_q_pbar() != 0 or params.cmp_p_pbar() <= 0:
        raise RegimeError(
            f"cond_critical needs q = pbar < p, got q={params.q}, p={params.p} "
            f"with pbar={2.0 + 4.0 / params.N}")
    if params.mu < 0.0:
        raise RegimeError("cond_critical needs mu >= 0; use cond_defocusing for mu < 0")
    regime = classify(params)
    lhs = params.mu * params.a ** (4.0 / params.N)
    rhs = params.q / (2.0 * gn.at_q.c_np ** params.q)
    return _report(lhs, rhs, regime)


def cond_defocusing(params: ModelParams, gn: ConstantsPair) -> ThresholdReport:
    """Compactness inequality for a defocusing lower-power perturbation
    (q <= pbar < p, mu < 0), controlling |mu| against the mass."""
    regime = _require_tag(params, RegimeTag.SUPERCRITICAL_DEFOCUSING, "cond_defocusing")
    d = derive(params)
    gq = d.gamma_q * params.q
    gp = d.gamma_p * params.p
    cq = gn.at_q.c_np ** params.q
    cp = gn.at_p.c_np ** params.p
    lhs = (abs(params.mu) * params.a ** ((1.0 - d.gamma_q) * params.q)) ** (gp - 2.0) \
        * params.a ** (params.p * (1.0 - d.gamma_p) * (2.0 - gq))
    rhs = ((1.0 - d.gamma_p) / (cq * (d.gamma_p - d.gamma_q))) ** (gp - 2.0) \
        * (1.0 / (d.gamma_p * cp)) ** (2.0 - gq)
    return _report(lhs, rhs, regime)


def _bracketed_root(f: Callable, lo: float, hi: float) -> float:
    """Root of f in (lo, hi), given sign(f(lo)) != sign(f(hi)).

    Points of the global log grid falling inside the bracket tighten it
    first; Brent's method then polishes to ROOT_RTOL relative.  The grid
    pass keeps the bracket short when the window endpoints are separated
    by many orders of magnitude (small mu).
    """
    inside = _GRID[(_GRID > lo) & (_GRID < hi)]
    ts = np.concatenate(([lo], inside, [hi]))
    vals = f(ts)
    signs = np.sign(vals)
    flips = np.nonzero(signs[:-1] * signs[1:] <= 0)[0]
    if flips.size == 0:
        raise StructureError("lost the sign change while bracketing a root")
    i = int(flips[0])
    return float(brentq(f, ts[i], ts[i + 1], rtol=ROOT_RTOL, xtol=1e-300))


def _interior_extremum(f: Callable, lo: float, hi: float) -> tuple[float, float]:
    """(argmin, min) of f on (lo, hi) for f with a single interior critical
    point there."""
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13 * hi, "maxiter": 500})
    return float(res.x), float(res.fun)


def _h_window(sc: _Scalars) -> tuple[float, float, float] | None:
    """(r0, r1, tbar) of the h positivity window, or None when the peak
    does not rise above zero (boundary or failing condition)."""
    tbar = _tbar(sc)
    if not _h(tbar, sc) > 0.0:
        return None
    # h(t) <= t^2/2 - (qterm/q) t^gq < 0 once t^(2-gq) < 2 qterm/q
    lo_seed = (0.5 * sc.qterm / sc.q) ** (1.0 / (2.0 - sc.gq))
    # h(t) <= t^2/2 - (pterm/p) t^gp < 0 once t^(gp-2) > p/(2 pterm)
    hi_seed = (2.0 * sc.p / sc.pterm) ** (1.0 / (sc.gp - 2.0))
    if not (0.0 < lo_seed < tbar < hi_seed) or not math.isfinite(hi_seed):
        raise ValidationError(
            "window endpoints fall outside the resolvable floating-point range")
    f = lambda t: _h(t, sc)
    r0 = _bracketed_root(f, lo_seed, tbar)
    r1 = _bracketed_root(f, tbar, hi_seed)
    return r0, r1, tbar


def h_roots(params: ModelParams, gn: ConstantsPair) -> HGeometry | None:
    """Positivity window of h, or None exactly when cond_mixed fails.

    The returned landmarks satisfy 0 < r0 < tbar < r1, h(r0) = h(r1) = 0
    to root tolerance, hmax > 0, and local_min_level < 0.
    """
    rep = cond_mixed(params, gn)
    if not rep.condition_holds:
        return None
    sc = _scalars(params, gn.at_q, gn.at_p)
    window = _h_window(sc)
    if window is None:       # sub-tolerance tangency: treat as boundary
        return None
    r0, r1, tbar = window
    _, neg_hmax = _interior_extremum(lambda t: -_h(t, sc), r0, r1)
    hmax = -neg_hmax
    # the dip bottoms out near (qterm * gq / q)^(1/(2-gq)); keep the search
    # bracket comfortably below both that estimate and the analytic seed
    lo_seed = (0.5 * sc.qterm / sc.q) ** (1.0 / (2.0 - sc.gq))
    dip_est = (sc.qterm * sc.gq / sc.q) ** (1.0 / (2.0 - sc.gq))
    floor = 1e-2 * min(lo_seed, dip_est)
    _, local_min = _interior_extremum(lambda t: _h(t, sc), floor, r0)
    if not (hmax > 0.0 and local_min < 0.0):
        raise StructureError(
            f"window extrema have impossible signs: hmax={hmax}, min={local_min}")
    return HGeometry(r0=r0, r1=r1, tbar=tbar, hmax=hmax, local_min_level=local_min)


def mu_star(params: ModelParams, gn: ConstantsPair) -> float:
    """Largest coupling for which cond_mixed holds at params.a.

    The inequality is a pure power law in mu, so the supremum inverts in
    closed form; params.mu only selects the regime.
    """
    _require_tag(params, RegimeTag.MIXED_FOCUSING, "mu_star")
    d = derive(params)
    gq = d.gamma_q * params.q
    gp = d.gamma_p * params.p
    aq = params.a ** ((1.0 - d.gamma_q) * params.q)
    ap = params.a ** ((1.0 - d.gamma_p) * params.p)
    cq = gn.at_q.c_np ** params.q
    cp = gn.at_p.c_np ** params.p
    rhs = (params.p * (2.0 - gq) / (2.0 * cp * (gp - gq))) ** (2.0 - gq) \
        * (params.q * (gp - 2.0) / (2.0 * cq * (gp - gq))) ** (gp - 2.0)
    scale = aq ** (gp - 2.0) * ap ** (2.0 - gq)
    return (rhs / scale) ** (1.0 / (gp - 2.0))


def blowup_bound_M(params: ModelParams, gn: ConstantsPair) -> BlowupBound:
    """Roots (r2, r3) of the virial lower-bound function g and the bound
    M = -min g on [0, r2].

    g(t) = t^2 - mu gamma_q Cq^q a^((1-gamma_q)q) t^(gamma_q q)
               - gamma_p Cp^p a^((1-gamma_p)p) t^(gamma_p p)

    Requires the mixed regime with cond_mixed holding (the positivity
    interval of g exists whenever the h window does).
    """
    rep = cond_mixed(params, gn)
    if not rep.condition_holds:
        raise StructureError(
            "the mixed threshold inequality fails; g has no positivity interval")
    sc = _scalars(params, gn.at_q, gn.at_p)
    bq = sc.qterm * sc.gq / sc.q
    bp = sc.pterm * sc.gp / sc.p
    f = lambda t: _g(t, sc)
    tbar_g = ((2.0 - sc.gq) / (bp * (sc.gp - sc.gq))) ** (1.0 / (sc.gp - 2.0))
    if not f(tbar_g) > 0.0:
        raise StructureError("no positivity interval for g at these parameters")
    lo_seed = (0.25 * bq) ** (1.0 / (2.0 - sc.gq))     # g < 0: t^(2-gq) < bq
    hi_seed = (4.0 / bp) ** (1.0 / (sc.gp - 2.0))      # g < 0: t^(gp-2) > 1/bp
    r2 = _bracketed_root(f, lo_seed, tbar_g)
    r3 = _bracketed_root(f, tbar_g, hi_seed)
    dip_est = (0.5 * bq * sc.gq) ** (1.0 / (2.0 - sc.gq))
    floor = 1e-2 * min(lo_seed, dip_est)
    _, gmin = _interior_extremum(f, floor, r2)
    return BlowupBound(r2=r2, r3=r3, m_bound=max(0.0, -gmin))


def stability_window(a_tilde: float, rho: float, params: ModelParams,
                     gn: ConstantsPair) -> float:
    """Largest mu such that cond_mixed holds at mass a_tilde + rho and
    2 r0(a_tilde + rho, mu)^2 < r1(a_tilde, mu)^2.

    Both sides of the window inequality move monotonically in mu (r0 up,
    r1 down), so the supremum is found by geometric bisection; it is
    capped at mu_star(a_tilde + rho) where the window itself closes.
    """
    if not (a_tilde > 0.0 and math.isfinite(a_tilde)):
        raise ValidationError(f"need a_tilde > 0, got {a_tilde}")
    if not (rho > 0.0 and math.isfinite(rho)):
        raise ValidationError(f"need rho > 0, got {rho}")
    _require_tag(params, RegimeTag.MIXED_FOCUSING, "stability_window")

    def windows(mu: float) -> bool:
        sc_plus = _scalars(params.replace(a=a_tilde + rho, mu=mu),
                           gn.at_q, gn.at_p)
        wp = _h_window(sc_plus)
        if wp is None:
            return False
        sc_tilde = _scalars(params.replace(a=a_tilde, mu=mu), gn.at_q, gn.at_p)
        wt = _h_window(sc_tilde)
        if wt is None:
            return False
        return 2.0 * wp[0] ** 2 < wt[1] ** 2

    cap = mu_star(params.replace(a=a_tilde + rho), gn)
    hi = cap * (1.0 - 1e-12)
    if windows(hi):
        return hi
    lo = 0.5 * cap
    halvings = 0
    while not windows(lo):
        lo *= 0.5
        halvings += 1
        if halvings > 200:
            raise StructureError("stability window appears empty; it should "
                                 "contain a right neighborhood of mu = 0")
    for _ in range(200):
        if hi / lo - 1.0 <= 1e-12:
            break
        mid = math.sqrt(lo * hi)
        if windows(mid):
            lo = mid
        else:
            hi = mid
    return lo
