"""Mass-preserving dilations, energy/Pohozaev functionals, and fiber maps.

The dilation (s * u)(x) = e^(Ns/2) u(e^s x) keeps |u|_2 fixed and acts on
the three remaining integrals by pure exponential factors, so the energy
along a fiber,

    Psi(s) = E(s * u) = e^(2s) G/2 - e^(gp s) MP/p - mu e^(gq s) MQ/q,

depends on u only through the integral triple (G, MQ, MP) = (|grad u|_2^2,
|u|_q^q, |u|_p^p).  Here gq = N(q-2)/2 and gp = N(p-2)/2 are the scaling
weights of the two powers; a power is mass-subcritical, critical, or
supercritical according to whether its weight is below, at, or above 2.
Psi'(s) equals the Pohozaev functional of the dilated field, so critical
points of Psi project u onto the Pohozaev manifold, and the sign of Psi''
there splits the manifold into its P+ / P0 / P- pieces.

Everything in this module is a pure function of the triple and the model
parameters; fields enter only through ``triple_of``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy.optimize import brentq

from .errors import RegimeError, StructureError, ValidationError
from .gn import GNConstants
from .params import ModelParams, RegimeTag, classify, derive

# On-manifold tolerance: |P| below POHOZAEV_TOL times the sum of the
# terms entering P.  Relative to the triple's own scale, so states whose
# natural size is far from unity classify the same as their rescalings.
POHOZAEV_TOL = 1e-8
# Degenerate-second-derivative band for the P0 label.
PZERO_BAND = 1e-12
# Root search window; beyond |s| = 60 the dilation factors exhaust the
# dynamic range of double precision for every admissible exponent pair.
S_WINDOW = 60.0
_ROOT_XTOL = 1e-14


class FiberClass(str, Enum):
    PPLUS = "Pplus"
    PZERO = "Pzero"
    PMINUS = "Pminus"
    NOT_ON_P = "NotOnP"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FiberTriple:
    """The four integrals (|grad u|_2^2, |u|_q^q, |u|_p^p, |u|_2^2).

    All entries are nonnegative; a zero mass is representable (the zero
    field) but rejected by every operation that needs a fiber.
    """

    grad2: float
    mq: float
    mp: float
    mass2: float

    def __post_init__(self):
        for name in ("grad2", "mq", "mp", "mass2"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise ValidationError(f"triple entry {name}={v} must be finite and >= 0")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class FiberCriticalPoints:
    """Critical points and zeros of the fiber map of one triple.

    t_u is the global maximum of Psi (always present on success).  In the
    two-point regime a local minimum s_u precedes it and Psi crosses zero
    at c_u in (s_u, t_u) and at d_u beyond t_u; elsewhere those three are
    None.  class_at_zero labels the unscaled triple itself: one of the
    Pohozaev-manifold pieces when |Psi'(0)| is inside tolerance, NotOnP
    otherwise.
    """

    s_u: float | None
    t_u: float
    c_u: float | None
    d_u: float | None
    class_at_zero: FiberClass


def _exp(x: float) -> float:
    # math.exp raises OverflowError instead of returning inf
    return math.exp(x) if x < 709.0 else math.inf


def triple_of(field, params: ModelParams) -> FiberTriple:
    """Quadrature triple of a field (anything with the four integral methods)."""
    return FiberTriple(
        grad2=field.grad2(),
        mq=field.norm_power(params.q),
        mp=field.norm_power(params.p),
        mass2=field.mass2(),
    )


def scale(tr: FiberTriple, params: ModelParams, s: float) -> FiberTriple:
    """Triple of s * u given the triple of u; mass is invariant."""
    d = derive(params)
    return FiberTriple(
        grad2=tr.grad2 * _exp(2.0 * s),
        mq=tr.mq * _exp(d.gamma_q * params.q * s),
        mp=tr.mp * _exp(d.gamma_p * params.p * s),
        mass2=tr.mass2,
    )


def energy(tr: FiberTriple, params: ModelParams) -> float:
    return 0.5 * tr.grad2 - tr.mp / params.p - params.mu * tr.mq / params.q


def pohozaev(tr: FiberTriple, params: ModelParams) -> float:
    d = derive(params)
    return tr.grad2 - d.gamma_p * tr.mp - params.mu * d.gamma_q * tr.mq


def gn_violation(tr: FiberTriple, params: ModelParams, constant: GNConstants) -> float:
    """Relative amount by which mp exceeds its interpolation bound.

    Nonpositive for every genuine field; the sharp constant makes the
    soliton itself sit at zero.  Values above ~1e-6 indicate a triple
    that no H^1 function can realize.
    """
    if tr.mp == 0.0:
        return 0.0
    gam = derive(params).gamma_p
    p = params.p
    bound = (constant.c_np ** p
             * tr.mass2 ** (0.5 * p * (1.0 - gam))
             * tr.grad2 ** (0.5 * p * gam))
    if bound == 0.0:
        return math.inf
    return (tr.mp - bound) / bound


def classify_on_manifold(tr: FiberTriple, params: ModelParams) -> FiberClass:
    """Pohozaev-manifold label of a triple by the signs of Psi'(0), Psi''(0).

    Needs no global fiber structure, so it applies in every regime.
    """
    d = derive(params)
    gq = d.gamma_q * params.q
    gp = d.gamma_p * params.p
    A = tr.grad2
    B = params.mu * d.gamma_q * tr.mq
    C = d.gamma_p * tr.mp
    p0 = pohozaev(tr, params)
    if abs(p0) > POHOZAEV_TOL * (A + abs(B) + C):
        return FiberClass.NOT_ON_P
    d0 = 2.0 * A - gq * B - gp * C
    band = PZERO_BAND * (2.0 * A + abs(gq * B) + gp * C)
    if abs(d0) <= band:
        return FiberClass.PZERO
    return FiberClass.PPLUS if d0 > 0.0 else FiberClass.PMINUS


def _gate_max_exists(params: ModelParams) -> None:
    """Reject parameter regimes where no fiber has a global maximum."""
    regime = classify(params)
    if regime.tag is RegimeTag.PURE_SUBCRITICAL:
        raise RegimeError(
            "both powers are mass-subcritical: the fiber map grows like "
            "e^(2s) and has no global maximum; t_u does not exist")
    if regime.tag is RegimeTag.CRITICAL_LEADING and params.mu > 0:
        raise RegimeError(
            "critical leading power with a focusing subcritical term: the "
            "fiber map has no interior maximum on any fiber")
    if regime.tag is RegimeTag.HOMOGENEOUS and params.cmp_p_pbar() <= 0:
        raise RegimeError(
            "single power at or below the mass-critical weight: the fiber "
            "map is monotone and has no maximum")


def fiber_critical_points(tr: FiberTriple, params: ModelParams) -> FiberCriticalPoints:
    """Locate the critical points and zeros of Psi for one triple.

    The derivative in the dilation variable is

        Psi'(s) = A e^(2s) - B e^(gq s) - C e^(gp s),
        A = grad2,  B = mu * gamma_q * mq,  C = gamma_p * mp,

    and the exponent/sign pattern of (B, C) decides the structure: a
    focusing subcritical B with supercritical C gives the two-point
    geometry (minimum then maximum), every other admissible pattern gives
    a single maximum, located in closed form when one term drops out.
    StructureError means the requested structure does not exist for this
    triple (typically a coupling past its threshold); RegimeError means
    no triple in this regime has it.
    """
    if tr.mass2 <= 0.0:
        raise ValidationError("fiber operations need mass2 > 0")
    if tr.grad2 <= 0.0:
        raise ValidationError("fiber operations need grad2 > 0")
    _gate_max_exists(params)

    d = derive(params)
    gq = d.gamma_q * params.q
    gp = d.gamma_p * params.p
    A = tr.grad2
    B = params.mu * d.gamma_q * tr.mq
    C = d.gamma_p * tr.mp
    q_critical = params.cmp_q_pbar() == 0
    p_critical = params.cmp_p_pbar() == 0

    def dpsi(s: float) -> float:
        return pohozaev(scale(tr, params, s), params)

    def psi(s: float) -> float:
        return energy(scale(tr, params, s), params)

    def d2psi(s: float) -> float:
        return (2.0 * A * _exp(2.0 * s)
                - gq * B * _exp(gq * s)
                - gp * C * _exp(gp * s))

    s_u = c_u = d_u = None
    if C == 0.0:
        # top power absent: two-term balance A e^(2s) = B e^(gq s)
        if B <= 0.0 or gq <= 2.0:
            raise StructureError(
                "fiber derivative has no maximum-type zero: top power absent "
                "and the remaining term cannot turn the map over")
        t_u = math.log(A / B) / (gq - 2.0)
    elif B == 0.0:
        if gp <= 2.0:
            raise StructureError("single active power is not mass-supercritical")
        t_u = math.log(A / C) / (gp - 2.0)
    elif q_critical:
        # e^(2s) coefficient becomes A - B
        if A - B <= 0.0:
            raise StructureError(
                "critical term absorbs the gradient term: fiber map is "
                "strictly decreasing, no critical point")
        t_u = math.log((A - B) / C) / (gp - 2.0)
    elif p_critical:
        # defocusing B < 0 (the focusing case is gated out above)
        if C - A <= 0.0:
            raise StructureError(
                "gradient term dominates the critical power: fiber map is "
                "nondecreasing, no maximum")
        t_u = math.log(-B / (C - A)) / (2.0 - gq)
    elif B > 0.0 and gq < 2.0:
        # two-point structure; divide Psi' by e^(gq s): the reduced map is
        # concave with an interior peak at s_hat, negative at both seeds
        s_hat = math.log(A * (2.0 - gq) / (C * (gp - gq))) / (gp - 2.0)
        if not -S_WINDOW < s_hat < S_WINDOW:
            raise StructureError("fiber peak outside the |s| <= 60 window")
        if dpsi(s_hat) <= 0.0:
            raise StructureError(
                "fiber derivative never positive: the two critical points do "
                "not exist (subcritical coupling beyond its threshold)")
        s_lo = math.log(B / (2.0 * A)) / (2.0 - gq)
        while dpsi(s_lo) >= 0.0:
            s_lo -= 2.0
            if s_lo < -S_WINDOW:
                raise StructureError("no lower bracket in |s| <= 60")
        s_hi = math.log(2.0 * A / C) / (gp - 2.0)
        while dpsi(s_hi) >= 0.0:
            s_hi += 2.0
            if s_hi > S_WINDOW:
                raise StructureError("no upper bracket in |s| <= 60")
        s_u = brentq(dpsi, s_lo, s_hat, xtol=_ROOT_XTOL)
        t_u = brentq(dpsi, s_hat, s_hi, xtol=_ROOT_XTOL)
    else:
        # single monotone crossing; expand a bracket outward from s = 0
        f0 = dpsi(0.0)
        if f0 == 0.0:
            t_u = 0.0
        elif f0 > 0.0:
            lo, hi = 0.0, 2.0
            while dpsi(hi) > 0.0:
                lo, hi = hi, hi + 2.0
                if hi > S_WINDOW:
                    raise StructureError("no sign change of Psi' in |s| <= 60")
            t_u = brentq(dpsi, lo, hi, xtol=_ROOT_XTOL)
        else:
            lo, hi = -2.0, 0.0
            while dpsi(lo) < 0.0:
                lo, hi = lo - 2.0, lo
                if lo < -S_WINDOW:
                    raise StructureError("no sign change of Psi' in |s| <= 60")
            t_u = brentq(dpsi, lo, hi, xtol=_ROOT_XTOL)

    if not d2psi(t_u) < 0.0:
        raise StructureError("critical point is not a maximum (degenerate tangency)")
    if s_u is not None:
        if not d2psi(s_u) > 0.0:
            raise StructureError("lower critical point is not a minimum")
        # zeros of the map itself: Psi(s_u) < 0 < Psi(t_u) brackets the
        # first, decay beyond the maximum brackets the second
        if psi(t_u) <= 0.0:
            raise StructureError(
                "fiber maximum at nonpositive level: the map has no zeros "
                "(existence window violated for this triple)")
        if psi(s_u) >= 0.0:
            raise StructureError("fiber minimum at nonnegative level")
        c_u = brentq(psi, s_u, t_u, xtol=_ROOT_XTOL)
        hi = t_u + 2.0
        while psi(hi) > 0.0:
            hi += 2.0
            if hi > S_WINDOW:
                raise StructureError("no upper zero of Psi in |s| <= 60")
        d_u = brentq(psi, t_u, hi, xtol=_ROOT_XTOL)

    cls = classify_on_manifold(tr, params)
    return FiberCriticalPoints(s_u=s_u, t_u=t_u, c_u=c_u, d_u=d_u, class_at_zero=cls)
