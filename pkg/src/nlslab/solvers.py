"""Normalized stationary states at prescribed mass.

Two independent routes produce the same states:

* an outer mass-matching loop over the shooting family lam -> u_lam,
  bisecting lam geometrically along a monotone sub-arc of the mass
  curve a(lam) until |u_lam|_2 hits the requested mass, and
* a mass-projected preconditioned descent on the energy, which finds
  the local minimizer inside the gradient well directly.

The mass curve in the MixedFocusing regime is folded: it rises from 0
as lam decreases from 0-, peaks, and falls back to 0 as lam -> -inf.
The arc between the fold and 0 carries the Pplus (local minimum)
states, the arc left of the fold the Pminus (mountain pass) states, so
branch selection reduces to picking the sub-arc and checking the fiber
class of each shot.  Regimes with a single branch use one monotone
curve and the Unique tag.

Shots at very small |lam| in focusing regimes push the standard
rescaling (unit coefficient on the leading power) into effective
couplings beyond what height bisection tolerates; those are re-shot
with the subleading power normalized instead, which turns the same
profile into a mild perturbation of the lower-power soliton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .criteria import cond_critical, cond_defocusing, cond_mixed, h_roots
from .errors import (BranchError, FlowError, NlsLabError, RegimeError,
                     ShootingError, StructureError, ValidationError)
from .fiber import FiberClass, classify_on_manifold, energy, pohozaev, triple_of
from .fields import RadialField, quad_weights, uniform_grid
from .gn import constants_pair, gn_constant
from .params import ModelParams, RegimeTag, classify, derive
from .shooting import GridSpec, normalized_profile, scaled_profile

# Mass-matching stop: |mass - a| / a below this ends the bisection.
MASS_RTOL = 1e-8
# Safety stop on the lam bracket width, relative to its magnitude.
LAMBDA_INTERVAL_RTOL = 1e-12
# Effective coupling beyond which shooting switches to the route with
# the subleading power normalized (empirically the standard route
# degrades somewhere above 1e7).
Q_ROUTE_COUPLING = 1e5
# Smallest |lam| whose physical grid and amplitude still fit in doubles.
LAMBDA_FLOOR = 1e-180

_SCAN_LO = -1e4
_SCAN_HI = -1e-12
_SCAN_PER_DECADE = 3
_MAX_BISECT = 300


class BranchTag(str, Enum):
    LOCAL_MIN = "LocalMin"
    MOUNTAIN_PASS = "MountainPass"
    UNIQUE = "Unique"


@dataclass(frozen=True)
class FlowConfig:
    """Knobs for the constrained descent."""

    step0: float = 1e-2
    step_max: float = 1.0
    max_iter: int = 50000
    energy_tol: float = 1e-12
    lam_tol: float = 1e-9


@dataclass(frozen=True)
class GroundStateResult:
    """A stationary state with its multiplier and branch diagnostics.

    pohozaev_residual is |P(u)| relative to the sum of the terms
    entering P; mass_error is |mass - a| / a against the requested a.
    """

    profile: RadialField
    lam: float
    energy_level: float
    pohozaev_residual: float
    fiber_class: FiberClass
    branch: BranchTag
    mass_error: float


class MassCurvePoint(NamedTuple):
    lam: float
    mass: float
    energy: float
    fiber_class: FiberClass


@dataclass(frozen=True)
class SweepRow:
    """One row of an asymptotic sweep table.

    value is the swept parameter; r0 is the gradient-well radius at
    that value; error is empty on success and carries the failure
    otherwise, with the numeric columns set to nan.
    """

    value: float
    m_level: float
    grad_local: float
    sigma_level: float
    h1_dist: float
    r0: float
    error: str = ""


def _coerce_branch(branch) -> BranchTag:
    if isinstance(branch, BranchTag):
        return branch
    try:
        return BranchTag(str(branch))
    except ValueError:
        pass
    low = str(branch).strip().lower()
    for tag in BranchTag:
        if tag.value.lower() == low:
            return tag
    raise ValidationError(f"unknown branch {branch!r}; expected one of "
                          f"{[t.value for t in BranchTag]}")


# ---------------------------------------------------------------------------
# shooting wrappers


def _shoot_q_normalized(lam: float, params: ModelParams,
                        grid: GridSpec | None) -> RadialField:
    """Profile at lam with the q-power given unit coefficient.

    u(r) = beta * v(kappa r) with beta = (kappa^2/mu)^(1/(q-2)) maps the
    problem to -v'' - ... = -v + v^(q-1) + eps v^(p-1), a small
    perturbation of the q-soliton whenever the standard effective
    coupling is large.  Only available for mu > 0.
    """
    mu, q, p, dim = params.mu, float(params.q), float(params.p), params.N
    kappa = math.sqrt(-lam)
    beta = (kappa * kappa / mu) ** (1.0 / (q - 2.0))
    radius = (grid.radius * kappa) if grid is not None else 40.0
    if beta < 1e-290 or (radius / kappa) ** dim > 1e300:
        raise ShootingError(
            f"profile scale at lam = {lam:.3g} exceeds the double range")
    eps = beta ** (p - 2.0) / (kappa * kappa)
    ngrid = None if grid is None else GridSpec(radius=radius,
                                               points=grid.points)
    # exponent roles swapped: the p-power rides in the mu slot
    shot = normalized_profile(eps, p, q, dim, ngrid)
    v = shot.field
    if (grid is not None
            and abs(v.values[-1]) > 1e-10 * np.max(np.abs(v.values))):
        raise ShootingError(
            f"physical radius {grid.radius:.3g} does not contain the state: "
            f"the decay length is 1/kappa = {1.0 / kappa:.3g}")
    return RadialField(grid=v.grid / kappa, values=beta * v.values,
                       dim=dim, deriv=beta * kappa * v.deriv)


def _shoot(lam: float, params: ModelParams,
           grid: GridSpec | None = None) -> RadialField:
    """Radial stationary profile at lam, routing by coupling size."""
    mu, q, p, dim = params.mu, float(params.q), float(params.p), params.N
    kappa = math.sqrt(-lam)
    mu_eff = mu * kappa ** (2.0 * (q - p) / (p - 2.0)) if mu != 0.0 else 0.0
    if mu_eff > Q_ROUTE_COUPLING:
        return _shoot_q_normalized(lam, params, grid)
    try:
        return scaled_profile(lam, mu, q, p, dim, grid).field
    except ShootingError:
        if mu_eff > 1.0:
            return _shoot_q_normalized(lam, params, grid)
        raise


def stationary_shoot(lam: float, params: ModelParams,
                     grid: GridSpec | None = None) -> RadialField:
    """Positive decaying solution of the stationary problem at lam < 0."""
    lam = float(lam)
    if not math.isfinite(lam) or lam >= 0.0:
        raise ValidationError(f"stationary shooting needs lam < 0, got {lam}")
    return _shoot(lam, params, grid)


def mass_curve(lambda_grid: Sequence[float], params: ModelParams,
               grid: GridSpec | None = None) -> list[MassCurvePoint]:
    """Shoot every lam in the grid and tabulate (lam, mass, E, class).

    Individual shooting failures leave gaps instead of aborting the
    scan; an empty result means no point of the grid admits a profile.
    """
    arr = np.asarray(lambda_grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("lambda grid must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(arr)) or np.any(arr >= 0.0):
        raise ValidationError("lambda grid must be finite and strictly negative")
    if np.any(np.diff(arr) <= 0.0):
        raise ValidationError("lambda grid must be strictly increasing")
    out: list[MassCurvePoint] = []
    for lam in arr:
        try:
            field = _shoot(float(lam), params, grid)
        except ShootingError:
            continue
        tr = triple_of(field, params)
        out.append(MassCurvePoint(float(lam), math.sqrt(tr.mass2),
                                  energy(tr, params),
                                  classify_on_manifold(tr, params)))
    return out


# ---------------------------------------------------------------------------
# mass scale estimates


def _lambda_scale_q(params: ModelParams) -> float | None:
    """lam at which the q-dominated limit of the mass curve hits a.

    In the limit lam -> 0- of the folded curve the profile is the
    rescaled q-soliton, giving mass^2 = |lam|^e_q mu^(-2/(q-2)) m2(w_q)
    with e_q = 2/(q-2) - N/2.  Returns None when the limit does not
    apply (q not subcritical, or mu <= 0) and 0.0 on underflow.
    """
    if params.mu <= 0.0 or params.cmp_q_pbar() >= 0:
        return None
    q, dim = float(params.q), params.N
    e_q = 2.0 / (q - 2.0) - dim / 2.0
    m2q = gn_constant(dim, q).mass_w ** 2
    base = params.a ** 2 * params.mu ** (2.0 / (q - 2.0)) / m2q
    try:
        lam = -(base ** (1.0 / e_q))
    except OverflowError:
        return None
    if not math.isfinite(lam):
        return None
    return lam


def _lambda_scale_p(params: ModelParams) -> float | None:
    """lam of the pure leading-power problem at mass a (exact for mu = 0)."""
    if params.cmp_p_pbar() == 0:
        return None
    p, dim = float(params.p), params.N
    e_p = 2.0 / (p - 2.0) - dim / 2.0
    m2p = gn_constant(dim, p).mass_w ** 2
    try:
        lam = -((params.a ** 2 / m2p) ** (1.0 / e_p))
    except OverflowError:
        return None
    if not math.isfinite(lam) or lam == 0.0:
        return None
    return lam


# ---------------------------------------------------------------------------
# mass matching


def _curve_point(lam: float, params: ModelParams,
                 grid: GridSpec | None) -> tuple[float, RadialField, FiberClass]:
    field = _shoot(lam, params, grid)
    tr = triple_of(field, params)
    return math.sqrt(tr.mass2), field, classify_on_manifold(tr, params)


def _package(field: RadialField, params: ModelParams, lam: float,
             branch: BranchTag) -> GroundStateResult:
    tr = triple_of(field, params)
    d = derive(params)
    scale = (tr.grad2 + abs(params.mu) * d.gamma_q * tr.mq
             + d.gamma_p * tr.mp)
    pres = abs(pohozaev(tr, params)) / scale if scale > 0.0 else 0.0
    return GroundStateResult(
        profile=field,
        lam=lam,
        energy_level=energy(tr, params),
        pohozaev_residual=pres,
        fiber_class=classify_on_manifold(tr, params),
        branch=branch,
        mass_error=abs(math.sqrt(tr.mass2) - params.a) / params.a,
    )


def _bisect_mass(lam_left: float, lam_right: float, m_left: float,
                 m_right: float, params: ModelParams, branch: BranchTag,
                 grid: GridSpec | None) -> GroundStateResult:
    """Geometric bisection of lam between a mass-straddling bracket.

    lam_left < lam_right < 0 and (m_left - a)(m_right - a) <= 0.  Works
    in ln(-lam) so brackets spanning many decades contract uniformly.
    """
    a = params.a
    if abs(m_left - a) / a < MASS_RTOL:
        return _package(_shoot(lam_left, params, grid), params, lam_left, branch)
    if abs(m_right - a) / a < MASS_RTOL:
        return _package(_shoot(lam_right, params, grid), params, lam_right, branch)
    t_left, t_right = math.log(-lam_left), math.log(-lam_right)
    sgn_left = 1.0 if m_left > a else -1.0
    best: tuple[float, float, RadialField] | None = None
    for _ in range(_MAX_BISECT):
        # relative width: the folded branch spans |lam| from 1e1 down to
        # 1e-29, where any absolute interval floor is either instant or
        # unreachable
        if (lam_right - lam_left) < LAMBDA_INTERVAL_RTOL * abs(lam_left):
            break
        t_mid = 0.5 * (t_left + t_right)
        lam_mid = -math.exp(t_mid)
        mass = None
        for nudge in (0.0, 0.05, -0.05, 0.15, -0.15):
            try:
                lam_try = -math.exp(t_mid + nudge * (t_left - t_right))
                mass, field, _ = _curve_point(lam_try, params, grid)
                lam_mid = lam_try
                break
            except ShootingError:
                continue
        if mass is None:
            raise BranchError(
                f"shooting failed throughout the bracket near lam = {lam_mid:.6g}")
        err = abs(mass - a) / a
        if best is None or err < best[0]:
            best = (err, lam_mid, field)
        if err < MASS_RTOL:
            return _package(field, params, lam_mid, branch)
        if (1.0 if mass > a else -1.0) == sgn_left:
            t_left = math.log(-lam_mid)
            lam_left = lam_mid
        else:
            t_right = math.log(-lam_mid)
            lam_right = lam_mid
    if best is not None and best[0] < 1e-6:
        return _package(best[2], params, best[1], branch)
    raise BranchError("mass matching did not converge: bracket "
                      f"[{lam_left:.6g}, {lam_right:.6g}] collapsed with "
                      f"residual mass error {best[0] if best else math.nan:.3g}")


def _fast_bracket(params: ModelParams, branch: BranchTag,
                  grid: GridSpec | None) -> GroundStateResult | None:
    """Bracket a folded-curve branch around its scale estimate.

    Returns None when the estimate-centered window cannot be trusted
    (wrong fiber class at an endpoint, shooting failure) so the caller
    falls back to a full scan.
    """
    a = params.a
    if branch is BranchTag.LOCAL_MIN:
        lam_c = _lambda_scale_q(params)
        if lam_c is None:
            return None
        if -lam_c < LAMBDA_FLOOR:
            raise BranchError(
                "local-minimizer multiplier scale "
                f"|lam| ~ {-lam_c:.3g} is not representable; the state "
                "is numerically out of reach")
        want = FiberClass.PPLUS
    else:
        lam_c = _lambda_scale_p(params)
        if lam_c is None:
            return None
        want = FiberClass.PMINUS
    # mass decreases toward lam -> 0- on the Pplus arc and toward
    # lam -> -inf on the Pminus arc; the orientation test below covers
    # both without distinguishing them.
    lam_lo, lam_hi = lam_c * 2.0, lam_c / 2.0
    try:
        m_lo, _, c_lo = _curve_point(lam_lo, params, grid)
        m_hi, _, c_hi = _curve_point(lam_hi, params, grid)
    except ShootingError:
        return None
    for _ in range(6):
        if c_lo != want or c_hi != want:
            return None
        if min(m_lo, m_hi) <= a <= max(m_lo, m_hi):
            return _bisect_mass(lam_lo, lam_hi, m_lo, m_hi, params,
                                branch, grid)
        grow_low = (a > max(m_lo, m_hi)) == (m_lo >= m_hi)
        lam_new = lam_lo * 8.0 if grow_low else lam_hi / 8.0
        if -lam_new < LAMBDA_FLOOR or -lam_new > 1e12:
            return None
        try:
            point = _curve_point(lam_new, params, grid)
        except ShootingError:
            return None
        if grow_low:
            lam_lo, (m_lo, _, c_lo) = lam_new, point
        else:
            lam_hi, (m_hi, _, c_hi) = lam_new, point
    return None


def _scan_curve(params: ModelParams, grid: GridSpec | None, lam_lo: float,
                lam_hi: float, per_decade: int = _SCAN_PER_DECADE
                ) -> tuple[np.ndarray, np.ndarray, list[FiberClass | None]]:
    decades = math.log10(-lam_lo) - math.log10(-lam_hi)
    n = max(int(math.ceil(decades * per_decade)) + 1, 8)
    lams = -np.geomspace(-lam_lo, -lam_hi, n)
    masses = np.full(n, np.nan)
    classes: list[FiberClass | None] = [None] * n
    for i, lam in enumerate(lams):
        try:
            masses[i], _, classes[i] = _curve_point(float(lam), params, grid)
        except ShootingError:
            continue
    return lams, masses, classes


def _arc_bracket(lams: np.ndarray, masses: np.ndarray, a: float,
                 indices: np.ndarray) -> tuple[int, int] | None:
    valid = [int(i) for i in indices if np.isfinite(masses[i])]
    for i, j in zip(valid, valid[1:]):
        if (masses[i] - a) * (masses[j] - a) <= 0.0:
            return i, j
    return None


def _solve_folded(params: ModelParams, branch: BranchTag,
                  grid: GridSpec | None) -> GroundStateResult:
    """Branch solve on the folded MixedFocusing mass curve."""
    fast = _fast_bracket(params, branch, grid)
    if fast is not None:
        return fast
    lam_lo, lam_hi = _scan_bounds(params)
    lams, masses, _ = _scan_curve(params, grid, lam_lo, lam_hi)
    if not np.any(np.isfinite(masses)):
        raise BranchError("no stationary profile anywhere on the scan grid")
    i_fold = int(np.nanargmax(masses))
    # one refinement pass localizes the fold between its grid neighbors
    if 0 < i_fold < len(lams) - 1:
        fl, fm, _ = _scan_curve(params, grid, float(lams[i_fold - 1]),
                                float(lams[i_fold + 1]), per_decade=24)
        lams = np.concatenate([lams, fl])
        masses = np.concatenate([masses, fm])
        order = np.argsort(lams)
        lams, masses = lams[order], masses[order]
        i_fold = int(np.nanargmax(masses))
    fold_mass = masses[i_fold]
    if branch is BranchTag.LOCAL_MIN:
        arc = np.arange(i_fold, len(lams))
    else:
        arc = np.arange(0, i_fold + 1)
    pair = _arc_bracket(lams, masses, params.a, arc)
    if pair is None:
        if params.a > fold_mass:
            raise BranchError(
                f"prescribed mass {params.a:.6g} exceeds the fold maximum "
                f"{fold_mass:.6g}; no {branch.value} state on the curve")
        raise BranchError(
            f"no {branch.value} bracket for mass {params.a:.6g} on the "
            f"scanned curve (fold at lam = {lams[i_fold]:.6g})")
    i, j = pair
    return _bisect_mass(float(lams[i]), float(lams[j]), float(masses[i]),
                        float(masses[j]), params, branch, grid)


def _scan_bounds(params: ModelParams) -> tuple[float, float]:
    """Default scan window stretched to cover the known mass scales."""
    lam_lo, lam_hi = _SCAN_LO, _SCAN_HI
    lam_p = _lambda_scale_p(params)
    if lam_p is not None:
        lam_lo = min(lam_lo, lam_p * 1e3)
        lam_hi = max(lam_hi, lam_p * 1e-3)
    lam_q = _lambda_scale_q(params)
    if lam_q is not None and lam_q < 0.0:
        lam_hi = -max(min(-lam_hi, -lam_q * 1e-3), LAMBDA_FLOOR)
    return lam_lo, lam_hi


def _solve_unique(params: ModelParams,
                  grid: GridSpec | None) -> GroundStateResult:
    """Mass matching on a single-branch (monotone) curve."""
    lam_lo, lam_hi = _scan_bounds(params)
    for _ in range(3):
        lams, masses, _ = _scan_curve(params, grid, lam_lo, lam_hi)
        if not np.any(np.isfinite(masses)):
            raise BranchError("no stationary profile anywhere on the scan grid")
        pair = _arc_bracket(lams, masses, params.a, np.arange(len(lams)))
        if pair is not None:
            i, j = pair
            return _bisect_mass(float(lams[i]), float(lams[j]),
                                float(masses[i]), float(masses[j]),
                                params, BranchTag.UNIQUE, grid)
        # extend toward whichever open end sits nearer the target mass
        valid = np.isfinite(masses)
        m_first = masses[valid][0]
        m_last = masses[valid][-1]
        if abs(m_last - params.a) <= abs(m_first - params.a):
            if -lam_hi <= LAMBDA_FLOOR * 1e6:
                break
            lam_hi = -max(-lam_hi * 1e-6, LAMBDA_FLOOR)
        else:
            if -lam_lo >= 1e12:
                break
            lam_lo = lam_lo * 1e6
    raise BranchError(f"no lam with mass {params.a:.6g} found on the curve "
                      f"(scanned [{lam_lo:.3g}, {lam_hi:.3g}])")


def _solve_homogeneous(params: ModelParams,
                       grid: GridSpec | None) -> GroundStateResult:
    if params.cmp_p_pbar() == 0:
        raise BranchError(
            "at the mass-critical exponent the soliton mass is independent "
            "of lam; no prescribed-mass family exists")
    p, dim = float(params.p), params.N
    e_p = 2.0 / (p - 2.0) - dim / 2.0
    m2p = gn_constant(dim, p).mass_w ** 2
    lam = -((params.a ** 2 / m2p) ** (1.0 / e_p))
    field = _shoot(lam, params, grid)
    return _package(field, params, lam, BranchTag.UNIQUE)


def solve_prescribed_mass(a: float, branch, params: ModelParams,
                          grid: GridSpec | None = None) -> GroundStateResult:
    """Stationary state of mass a on the requested branch.

    Dispatches on the regime: the homogeneous problem has a closed-form
    multiplier, the MixedFocusing fold carries the LocalMin and
    MountainPass branches, and the single-branch regimes go through a
    monotone-curve scan.  Raises a branch error when the branch does
    not exist, the regime's threshold inequality fails, or the
    requested mass misses the curve.
    """
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise ValidationError(f"mass must be positive and finite, got {a}")
    branch = _coerce_branch(branch)
    pe = params.replace(a=a)
    tag = classify(pe).tag

    if tag is RegimeTag.HOMOGENEOUS:
        if branch is not BranchTag.UNIQUE:
            raise BranchError("the homogeneous problem has a single branch; "
                              "request Unique")
        return _solve_homogeneous(pe, grid)

    if tag is RegimeTag.MIXED_FOCUSING:
        rep = cond_mixed(pe, constants_pair(pe))
        if not rep.condition_holds:
            raise BranchError(
                "existence threshold fails at this (a, mu): "
                f"lhs {rep.lhs:.6g} !< rhs {rep.rhs:.6g}")
        if branch is BranchTag.UNIQUE:
            raise BranchError("the folded curve carries two branches; "
                              "request LocalMin or MountainPass")
        return _solve_folded(pe, branch, grid)

    if tag is RegimeTag.CRITICAL_PERTURBATION:
        rep = cond_critical(pe, constants_pair(pe))
        gate_name = "critical-perturbation threshold"
    elif tag is RegimeTag.SUPERCRITICAL_DEFOCUSING:
        rep = cond_defocusing(pe, constants_pair(pe))
        gate_name = "defocusing threshold"
    elif tag in (RegimeTag.PURE_SUBCRITICAL, RegimeTag.PURE_SUPERCRITICAL):
        rep = None
        gate_name = ""
    else:  # CriticalLeading: the dilation energy is unbounded on the fiber
        raise BranchError("no prescribed-mass branch is available when the "
                          "leading power is mass-critical")
    if branch is not BranchTag.UNIQUE:
        raise BranchError(f"regime {tag.value} has a single branch; "
                          "request Unique")
    if rep is not None and not rep.condition_holds:
        raise BranchError(f"{gate_name} fails at this (a, mu): "
                          f"lhs {rep.lhs:.6g} !< rhs {rep.rhs:.6g}")
    return _solve_unique(pe, grid)


# ---------------------------------------------------------------------------
# constrained descent


def _radial_d1(u: np.ndarray, dr: float) -> np.ndarray:
    """Fourth-order first derivative of an even radial sample."""
    d = np.empty_like(u)
    d[0] = 0.0
    d[1] = (u[1] - 8.0 * u[0] + 8.0 * u[2] - u[3]) / (12.0 * dr)
    d[2:-2] = (u[:-4] - 8.0 * u[1:-3] + 8.0 * u[3:-1] - u[4:]) / (12.0 * dr)
    d[-2] = (u[-4] - 8.0 * u[-3] + 8.0 * u[-1]) / (12.0 * dr)
    d[-1] = (u[-3] - 8.0 * u[-2]) / (12.0 * dr)
    return d


def _radial_laplacian(u: np.ndarray, dr: float, dim: int) -> np.ndarray:
    """Fourth-order radial Laplacian with even extension at the origin.

    Samples beyond the outer edge are taken as zero, which is exact to
    rounding for profiles that have decayed at the boundary.
    """
    n = u.size
    upp = np.empty_like(u)
    upp[2:-2] = (-u[:-4] + 16.0 * u[1:-3] - 30.0 * u[2:-2]
                 + 16.0 * u[3:-1] - u[4:]) / (12.0 * dr * dr)
    upp[1] = (16.0 * u[0] - 31.0 * u[1] + 16.0 * u[2] - u[3]) / (12.0 * dr * dr)
    upp[-2] = (-u[-4] + 16.0 * u[-3] - 30.0 * u[-2]
               + 16.0 * u[-1]) / (12.0 * dr * dr)
    upp[-1] = (-u[-3] + 16.0 * u[-2] - 30.0 * u[-1]) / (12.0 * dr * dr)
    d1 = _radial_d1(u, dr)
    lap = np.empty_like(u)
    r = np.arange(1, n, dtype=float) * dr
    lap[1:] = upp[1:] + (dim - 1) / r * d1[1:]
    lap[0] = dim * (16.0 * u[1] - u[2] - 15.0 * u[0]) / (6.0 * dr * dr)
    return lap


def _precond_bands(alpha: float, dr: float, dim: int, n: int) -> np.ndarray:
    """Banded (alpha - Laplacian) operator for the descent metric."""
    inv2 = 1.0 / (dr * dr)
    ab = np.zeros((3, n))
    j = np.arange(1, n, dtype=float)
    drift = (dim - 1) / (2.0 * j * dr * dr)
    ab[1, :] = alpha + 2.0 * inv2
    ab[1, 0] = alpha + 2.0 * dim * inv2
    ab[0, 1] = -2.0 * dim * inv2              # row 0 couples only to u_1
    ab[0, 2:] = -inv2 - drift[:-1]            # superdiagonal of rows 1..n-2
    ab[2, :-1] = -inv2 + drift                # subdiagonal of rows 1..n-1
    return ab


def localmin_seed(params: ModelParams, points: int = 16384) -> RadialField:
    """Wide low-gradient bump of mass a inside the gradient well.

    A Gaussian of width sigma has |grad u|_2 = sqrt(N/2) a / sigma, so
    sigma = 4 sqrt(N/2) a / r0 places the seed at a quarter of the well
    radius.  The grid extends past both the seed and the expected width
    of the minimizer so the converged tail still fits.
    """
    tag = classify(params).tag
    if tag is not RegimeTag.MIXED_FOCUSING:
        raise RegimeError(f"the gradient well needs the MixedFocusing "
                          f"regime, got {tag.value}")
    pair = constants_pair(params)
    rep = cond_mixed(params, pair)
    if not rep.condition_holds:
        raise StructureError("existence threshold fails: "
                             f"lhs {rep.lhs:.6g} !< rhs {rep.rhs:.6g}")
    geo = h_roots(params, pair)
    if geo is None:
        raise StructureError("positivity window vanished despite the "
                             "threshold holding")
    dim, a = params.N, params.a
    sigma = 4.0 * math.sqrt(dim / 2.0) * a / geo.r0
    lam_q = _lambda_scale_q(params)
    width = 1.0 / math.sqrt(-lam_q) if lam_q is not None and lam_q < 0.0 \
        else sigma
    radius = 10.0 * max(sigma, width)
    grid = uniform_grid(radius, points)
    u = np.exp(-grid * grid / (2.0 * sigma * sigma))
    field = RadialField(grid=grid, values=u, dim=dim,
                        deriv=-grid / (sigma * sigma) * u)
    u *= a / math.sqrt(field.mass2())
    return RadialField(grid=grid, values=u, dim=dim,
                       deriv=-grid / (sigma * sigma) * u)


def gradient_flow_local_min(params: ModelParams,
                            init: RadialField | None = None,
                            flow: FlowConfig | None = None
                            ) -> GroundStateResult:
    """Local minimizer by mass-projected preconditioned descent.

    Each step preconditions the energy gradient with (alpha - Lap)^-1,
    alpha tracking the multiplier estimate, takes a backtracked descent
    step, and rescales exactly back to mass a.  Terminates when both
    the energy decrement and the multiplier stabilize.  Raises a flow
    error if the iterate ever leaves the gradient well |grad u|_2 < r0,
    which signals a bad seed or a near-violated threshold.
    """
    if flow is None:
        flow = FlowConfig()
    tag = classify(params).tag
    if tag is not RegimeTag.MIXED_FOCUSING:
        raise RegimeError(f"constrained descent targets the MixedFocusing "
                          f"local minimizer; regime is {tag.value}")
    pair = constants_pair(params)
    rep = cond_mixed(params, pair)
    if not rep.condition_holds:
        raise StructureError("existence threshold fails: "
                             f"lhs {rep.lhs:.6g} !< rhs {rep.rhs:.6g}")
    geo = h_roots(params, pair)
    if geo is None:
        raise StructureError("positivity window vanished despite the "
                             "threshold holding")
    r0 = geo.r0
    if init is None:
        init = localmin_seed(params)
    if init.dim != params.N:
        raise ValidationError(f"seed dimension {init.dim} does not match "
                              f"N = {params.N}")
    a, mu, q, p, dim = (params.a, params.mu, float(params.q),
                        float(params.p), params.N)
    grid = np.asarray(init.grid, dtype=float)
    dr = float(grid[1] - grid[0])
    w = quad_weights(grid, dim)
    n = grid.size

    def split(u):
        d1 = _radial_d1(u, dr)
        au = np.abs(u)
        mass2 = float(w @ (u * u))
        grad2 = float(w @ (d1 * d1))
        mq = float(w @ au ** q)
        mp = float(w @ au ** p)
        return d1, mass2, grad2, mq, mp

    def en(grad2, mq, mp):
        return 0.5 * grad2 - mp / p - mu * mq / q

    u = np.asarray(init.values, dtype=float).copy()
    _, mass2, grad2, mq, mp = split(u)
    u *= a / math.sqrt(mass2)
    _, mass2, grad2, mq, mp = split(u)
    if math.sqrt(grad2) >= r0:
        raise ValidationError(
            f"seed gradient {math.sqrt(grad2):.6g} is outside the well "
            f"radius {r0:.6g}")
    E = en(grad2, mq, mp)
    lam = (grad2 - mu * mq - mp) / mass2
    alpha = max(abs(lam), 1e-300)
    bands = _precond_bands(alpha, dr, dim, n)
    tau = flow.step0
    dE_last = math.inf
    dlam_last = math.inf
    converged = False
    for it in range(1, flow.max_iter + 1):
        au = np.abs(u)
        g = (-_radial_laplacian(u, dr, dim)
             - mu * au ** (q - 2.0) * u - au ** (p - 2.0) * u)
        # remove the multiplier component before preconditioning and
        # re-project after: (alpha - Lap)^-1 amplifies the normal
        # direction by 1/alpha, and the mass rescale would cancel it
        # only to first order
        g_t = g - (float(w @ (g * u)) / (a * a)) * u
        z = solve_banded((1, 1), bands, g_t)
        z -= (float(w @ (z * u)) / (a * a)) * u
        accepted = False
        for _ in range(80):
            v = u - tau * z
            _, mass2v, grad2v, mqv, mpv = split(v)
            scale = a / math.sqrt(mass2v)
            grad2v *= scale * scale
            mqv *= scale ** q
            mpv *= scale ** p
            E_try = en(grad2v, mqv, mpv)
            if E_try <= E:
                u = v * scale
                accepted = True
                break
            tau *= 0.5
            if tau < 1e-20:
                break
        if not accepted:
            # no direction of decrease left at float resolution; accept
            # as converged only if the last real step had already
            # flattened out, otherwise the seed or metric is bad
            if (dE_last <= 1e3 * flow.energy_tol * (1.0 + abs(E))
                    and dlam_last <= 1e3 * flow.lam_tol * abs(lam)):
                converged = True
                break
            raise FlowError(f"descent stalled at iteration {it} with the "
                            "energy still moving")
        dE_last = E - E_try
        E, grad2, mq, mp = E_try, grad2v, mqv, mpv
        lam_prev = lam
        lam = (grad2 - mu * mq - mp) / (a * a)
        dlam_last = abs(lam - lam_prev)
        if math.sqrt(grad2) >= r0:
            raise FlowError(f"iterate left the gradient well at iteration "
                            f"{it}: |grad u|_2 = {math.sqrt(grad2):.6g} "
                            f">= r0 = {r0:.6g}")
        tau = min(tau * 1.25, flow.step_max)
        if abs(abs(lam) - alpha) > 0.2 * abs(lam):
            alpha = max(abs(lam), 1e-300)
            bands = _precond_bands(alpha, dr, dim, n)
        if (it >= 5 and dE_last < flow.energy_tol * (1.0 + abs(E))
                and dlam_last <= flow.lam_tol * abs(lam)):
            converged = True
            break
    if not converged:
        raise FlowError(f"no convergence within {flow.max_iter} iterations "
                        f"(last energy decrement {dE_last:.3g})")

    # Energy comparisons saturate once the profile error reaches about
    # sqrt(eps): E is quadratically flat at the minimizer, so decrements
    # fall below the ULP of E while the Pohozaev combination, linear in
    # the error, can still sit near 1e-8.  Polish with the same
    # preconditioned step, accepted on the stationarity residual, which
    # stays measurable down to rounding level.
    def tangent_residual(v: np.ndarray) -> tuple[np.ndarray, float]:
        av = np.abs(v)
        gv = (-_radial_laplacian(v, dr, dim)
              - mu * av ** (q - 2.0) * v - av ** (p - 2.0) * v)
        gv -= (float(w @ (gv * v)) / (a * a)) * v
        return gv, math.sqrt(max(float(w @ (gv * gv)), 0.0))

    g_t, res = tangent_residual(u)
    tau = max(tau, flow.step0)
    for _ in range(300):
        z = solve_banded((1, 1), bands, g_t)
        z -= (float(w @ (z * u)) / (a * a)) * u
        improved = False
        for _ in range(40):
            v = u - tau * z
            _, mass2v, grad2v, mqv, mpv = split(v)
            s = a / math.sqrt(mass2v)
            v = v * s
            g_v, res_v = tangent_residual(v)
            if res_v < res:
                u, g_t, res = v, g_v, res_v
                grad2 = grad2v * s * s
                mq = mqv * s ** q
                mp = mpv * s ** p
                lam = (grad2 - mu * mq - mp) / (a * a)
                tau = min(tau * 1.25, flow.step_max)
                improved = True
                break
            tau *= 0.5
            if tau < 1e-20:
                break
        if not improved:
            break
    field = RadialField(grid=grid, values=u, dim=dim,
                        deriv=_radial_d1(u, dr))
    return _package(field, params, lam, BranchTag.LOCAL_MIN)


# ---------------------------------------------------------------------------
# asymptotics


def h1_distance(f1: RadialField, f2: RadialField) -> float:
    """H1 norm of the difference after resampling to a common grid."""
    if f1.dim != f2.dim:
        raise ValidationError("fields live in different dimensions")
    radius = max(float(f1.grid[-1]), float(f2.grid[-1]))
    dr = min(float(f1.grid[1] - f1.grid[0]), float(f2.grid[1] - f2.grid[0]))
    points = min(int(radius / dr) + 1, 1 << 21)
    grid = uniform_grid(radius, points)
    a1 = f1.resample(grid)
    a2 = f2.resample(grid)
    diff = RadialField(grid=grid, values=a1.values - a2.values, dim=f1.dim)
    return math.sqrt(diff.mass2() + diff.grad2())


def asymptotic_sweep(params: ModelParams, vary: str = "mu_to_zero",
                     steps: int | None = None,
                     grid: GridSpec | None = None) -> list[SweepRow]:
    """Levels and gradients along a vanishing-parameter sequence.

    vary = "mu_to_zero" walks mu down one decade per row from its base
    value, reporting both branch levels, the local gradient, and the H1
    distance of the mountain-pass state to the mu = 0 reference state.
    vary = "q_to_pbar" walks q up to the critical exponent through gaps
    of one decade, where the shrinking well radius r0 pins the local
    gradient; the reference-distance column is not defined there.
    Solver failures are recorded per row, not raised.
    """
    tag = classify(params).tag
    if tag is not RegimeTag.MIXED_FOCUSING or params.cmp_q_pbar() >= 0:
        raise RegimeError("asymptotic sweeps need a MixedFocusing base "
                          f"point with subcritical q; regime is {tag.value}")
    if vary == "mu_to_zero":
        if steps is None:
            steps = 4
        values = [params.mu * 10.0 ** (-k) for k in range(steps)]
        ref = solve_prescribed_mass(params.a, BranchTag.UNIQUE,
                                    params.replace(mu=0.0), grid)
    elif vary == "q_to_pbar":
        if steps is None:
            steps = 3
        pbar = derive(params).pbar
        values = [pbar - 10.0 ** (-(k + 1)) for k in range(steps)]
        ref = None
    else:
        raise ValidationError(f"vary must be 'mu_to_zero' or 'q_to_pbar', "
                              f"got {vary!r}")
    rows: list[SweepRow] = []
    for v in values:
        pe = params.replace(mu=v) if vary == "mu_to_zero" \
            else params.replace(q=v)
        # the well radius comes from the threshold geometry alone, so it
        # stays observable on rows whose solve fails (unless the window
        # itself is numerically degenerate)
        r0 = math.nan
        try:
            geo = h_roots(pe, constants_pair(pe))
            if geo is not None:
                r0 = geo.r0
        except NlsLabError:
            pass
        try:
            local = solve_prescribed_mass(pe.a, BranchTag.LOCAL_MIN, pe, grid)
            mpass = solve_prescribed_mass(pe.a, BranchTag.MOUNTAIN_PASS, pe,
                                          grid)
            h1 = h1_distance(mpass.profile, ref.profile) if ref is not None \
                else math.nan
            rows.append(SweepRow(
                value=float(v),
                m_level=local.energy_level,
                grad_local=math.sqrt(local.profile.grad2()),
                sigma_level=mpass.energy_level,
                h1_dist=h1,
                r0=r0,
            ))
        except NlsLabError as exc:
            rows.append(SweepRow(value=float(v), m_level=math.nan,
                                 grad_local=math.nan, sigma_level=math.nan,
                                 h1_dist=math.nan, r0=r0,
                                 error=f"{type(exc).__name__}: {exc}"))
    return rows
