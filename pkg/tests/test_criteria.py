"""Threshold inequalities against closed-form 1D anchors and dense scans.

The 1D solitons are sech powers, so every constant entering the
inequalities has a Beta-integral closed form:

    w(x) = (p/2)^(1/(p-2)) sech^(2/(p-2))((p-2) x / 2),
    int sech^s = sqrt(pi) Gamma(s/2) / Gamma((s+1)/2).

Those forms are recomputed here (independently of the package) and used
to validate h, the mixed/critical/defocusing reports, the window roots,
the blow-up bound, and the stability window.  Scale-coupled quantities
are cross-checked by brute-force log-grid scans.
"""

import math

import numpy as np
import pytest
from scipy.special import gamma as _gammafn

from nlslab.errors import RegimeError, StructureError, ValidationError
from nlslab.gn import constants_pair, gn_constant
from nlslab.params import ModelParams, RegimeTag, classify
from nlslab import criteria

# Frozen values of the independent oracles below, pinned so that a drift
# in the oracle code itself cannot go unnoticed.
H_AT_2_QUINTIC = 1.6960436973065895     # h(2; N=1, q=3, p=5, a=1, mu=0.1)
RHS_MIXED_Q3P7 = 14.527023489793192     # mixed rhs at N=1, q=3, p=7
TOWNES_MASS2 = 11.7008965246            # |w|_2^2 at N=2, p=4


# -- independent closed forms -------------------------------------------------

def sech_integral(s: float) -> float:
    return math.sqrt(math.pi) * _gammafn(s / 2.0) / _gammafn((s + 1.0) / 2.0)


def sech_soliton(p: float) -> tuple[float, float, float]:
    """(mass2, grad2, |w|_p^p) of the 1D soliton of -w'' + w = w^(p-1)."""
    amp2 = (p / 2.0) ** (2.0 / (p - 2.0))
    scale = 2.0 / (p - 2.0)
    s0 = 4.0 / (p - 2.0)
    mass2 = amp2 * scale * sech_integral(s0)
    grad2 = amp2 * scale * (sech_integral(s0) - sech_integral(s0 + 2.0))
    mp = (p / 2.0) ** (p / (p - 2.0)) * scale * sech_integral(2.0 * p / (p - 2.0))
    return mass2, grad2, mp


def c1p_closed(p: float) -> float:
    mass2, grad2, mp = sech_soliton(p)
    gam = (p - 2.0) / (2.0 * p)
    return mp ** (1.0 / p) / (grad2 ** (0.5 * gam) * mass2 ** (0.5 * (1.0 - gam)))


def h_ref(t, N, q, p, a, mu, cq, cp):
    """h recomputed from scratch (separate gamma arithmetic)."""
    gq = N * (q - 2.0) / 2.0
    gp = N * (p - 2.0) / 2.0
    return (0.5 * t * t
            - mu * cq ** q / q * a ** (q - gq) * t ** gq
            - cp ** p / p * a ** (p - gp) * t ** gp)


def g_ref(t, N, q, p, a, mu, cq, cp):
    gq = N * (q - 2.0) / 2.0
    gp = N * (p - 2.0) / 2.0
    return (t * t
            - mu * (gq / q) * cq ** q * a ** (q - gq) * t ** gq
            - (gp / p) * cp ** p * a ** (p - gp) * t ** gp)


MIXED3 = ModelParams(N=3, q=3, p=5, a=1.0, mu=0.1)     # canonical mixed point
MIXED1 = ModelParams(N=1, q=3, p=7, a=1.0, mu=0.02)    # 1D mixed point, pbar=6


# -- h itself -----------------------------------------------------------------

def test_h_matches_closed_form_constants():
    params = ModelParams(N=1, q=3, p=5, a=1.0, mu=0.1)
    value = criteria.h_eval(2.0, params, gn_constant(1, 3.0), gn_constant(1, 5.0))
    oracle = h_ref(2.0, 1, 3.0, 5.0, 1.0, 0.1, c1p_closed(3.0), c1p_closed(5.0))
    assert oracle == pytest.approx(H_AT_2_QUINTIC, rel=1e-12)
    assert value == pytest.approx(oracle, rel=1e-11)


def test_h_negative_and_vanishing_at_origin():
    pair = constants_pair(MIXED3)
    ts = np.array([1e-5, 1e-7, 1e-9])   # below the lower window root
    vals = criteria.h_eval(ts, MIXED3, pair.at_q, pair.at_p)
    assert np.all(vals < 0.0)
    assert np.all(np.diff(np.abs(vals)) < 0.0)   # |h| decreases toward 0


def test_h_two_term_cancellation_without_coupling():
    params = ModelParams(N=3, q=3, p=5, a=1.3, mu=0.0)
    pair = constants_pair(params)
    gp = 4.5  # gamma_p * p at N=3, p=5
    cp = pair.at_p.c_np ** 5.0 * 1.3 ** (5.0 - gp)
    tstar = (5.0 / (2.0 * cp)) ** (1.0 / (gp - 2.0))
    val = criteria.h_eval(tstar, params, pair.at_q, pair.at_p)
    assert abs(val) < 1e-12 * tstar ** 2


# -- mixed condition ----------------------------------------------------------

def test_mixed_report_against_closed_forms():
    rep = criteria.cond_mixed(MIXED1, constants_pair(MIXED1))
    # a = 1 kills every mass power, so lhs = mu^(gamma_p p - 2) = sqrt(0.02)
    assert rep.lhs == pytest.approx(math.sqrt(0.02), rel=1e-13)
    c13, c17 = c1p_closed(3.0), c1p_closed(7.0)
    gq, gp = 0.5, 2.5
    rhs = ((7.0 * (2.0 - gq) / (2.0 * c17 ** 7 * (gp - gq))) ** (2.0 - gq)
           * (3.0 * (gp - 2.0) / (2.0 * c13 ** 3 * (gp - gq))) ** (gp - 2.0))
    assert rhs == pytest.approx(RHS_MIXED_Q3P7, rel=1e-12)
    assert rep.rhs == pytest.approx(rhs, rel=1e-9)
    assert rep.condition_holds and rep.margin == pytest.approx(rep.rhs - rep.lhs)
    assert rep.regime.tag is RegimeTag.MIXED_FOCUSING


def test_mixed_holds_iff_lhs_below_rhs():
    pair = constants_pair(MIXED3)
    for mu in (1e-6, 1e-2, 1.0, 50.0, 1e3, 1e6):
        rep = criteria.cond_mixed(MIXED3.replace(mu=mu), pair)
        assert rep.condition_holds == (rep.lhs < rep.rhs)
    assert criteria.cond_mixed(MIXED3.replace(mu=1e-6), pair).condition_holds
    assert not criteria.cond_mixed(MIXED3.replace(mu=1e6), pair).condition_holds


def test_mixed_rejects_other_regimes():
    pair = constants_pair(MIXED3)
    # the quintic pair is mass-subcritical in 1D: pbar = 6 sits above p = 5
    with pytest.raises(RegimeError):
        criteria.cond_mixed(ModelParams(N=1, q=3, p=5, a=1.0, mu=0.01), pair)
    with pytest.raises(RegimeError):
        criteria.cond_mixed(MIXED3.replace(mu=0.0), pair)
    with pytest.raises(RegimeError):
        criteria.cond_mixed(MIXED3.replace(mu=-0.1), pair)


# -- window roots -------------------------------------------------------------

def test_window_against_dense_scan():
    pair = constants_pair(MIXED3)
    geo = criteria.h_roots(MIXED3, pair)
    cq = pair.at_q.c_np
    cp = pair.at_p.c_np
    ts = np.geomspace(1e-8, 1e8, 200001)
    vals = h_ref(ts, 3, 3.0, 5.0, 1.0, 0.1, cq, cp)
    flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    assert flips.size == 2
    assert ts[flips[0]] <= geo.r0 <= ts[flips[0] + 1]
    assert ts[flips[1]] <= geo.r1 <= ts[flips[1] + 1]


def test_window_landmarks_and_root_quality():
    for params in (MIXED3, MIXED1):
        pair = constants_pair(params)
        geo = criteria.h_roots(params, pair)
        assert 0.0 < geo.r0 < geo.tbar < geo.r1
        for root in (geo.r0, geo.r1):
            val = criteria.h_eval(root, params, pair.at_q, pair.at_p)
            assert abs(val) < 1e-10 * (1.0 + root * root)
        # positive across the interior of the window
        s = np.linspace(1e-3, 1.0 - 1e-3, 199)
        interior = geo.r0 ** (1.0 - s) * geo.r1 ** s
        inner = criteria.h_eval(interior, params, pair.at_q, pair.at_p)
        assert np.all(inner > 0.0)
        peak = criteria.h_eval(geo.tbar, params, pair.at_q, pair.at_p)
        assert 0.0 < peak <= geo.hmax * (1.0 + 1e-12)
        assert geo.local_min_level < 0.0


def test_window_extrema_match_scans():
    pair = constants_pair(MIXED1)
    geo = criteria.h_roots(MIXED1, pair)
    cq, cp = pair.at_q.c_np, pair.at_p.c_np
    inner = np.geomspace(geo.r0, geo.r1, 100001)
    assert geo.hmax == pytest.approx(
        h_ref(inner, 1, 3.0, 7.0, 1.0, 0.02, cq, cp).max(), rel=1e-7)
    below = np.geomspace(geo.r0 * 1e-8, geo.r0, 100001)
    assert geo.local_min_level == pytest.approx(
        h_ref(below, 1, 3.0, 7.0, 1.0, 0.02, cq, cp).min(), rel=1e-6)


def test_window_absent_exactly_when_condition_fails():
    pair = constants_pair(MIXED3)
    for mu in (1e-4, 1e-2, 1.0, 30.0, 1e2, 1e4):
        params = MIXED3.replace(mu=mu)
        present = criteria.h_roots(params, pair) is not None
        assert present == criteria.cond_mixed(params, pair).condition_holds


def test_small_coupling_limit_of_the_window():
    # r0 collapses to 0 and r1 tends to the positive root of the reduced
    # two-term function, which is closed-form
    pair = constants_pair(MIXED3)
    cp = pair.at_p.c_np
    tphi = (5.0 / (2.0 * cp ** 5)) ** (1.0 / 2.5)
    geo8 = criteria.h_roots(MIXED3.replace(mu=1e-8), pair)
    geo4 = criteria.h_roots(MIXED3.replace(mu=1e-4), pair)
    assert geo8.r0 < geo4.r0 and geo8.r1 > geo4.r1
    assert geo8.r0 < 1e-4 * geo8.r1
    assert geo8.r1 == pytest.approx(tphi, rel=1e-6)
    assert abs(geo8.r1 - tphi) < abs(geo4.r1 - tphi)


def test_mu_star_three_ways():
    pair = constants_pair(MIXED1)
    star = criteria.mu_star(MIXED1, pair)
    lo, hi = 1e-6, 1e6
    for _ in range(220):
        mid = math.sqrt(lo * hi)
        if criteria.cond_mixed(MIXED1.replace(mu=mid), pair).condition_holds:
            lo = mid
        else:
            hi = mid
    assert star == pytest.approx(lo, rel=1e-7)
    thin = criteria.h_roots(MIXED1.replace(mu=star * (1.0 - 1e-7)), pair)
    assert thin is not None
    assert (thin.r1 - thin.r0) / thin.tbar < 5e-3   # window closing at the cap
    assert criteria.h_roots(MIXED1.replace(mu=star * (1.0 + 1e-7)), pair) is None


# -- critical condition -------------------------------------------------------

def test_critical_trivial_and_strict_cases():
    params = ModelParams(N=1, q=6, p=8, a=1.0, mu=0.0)
    pair = constants_pair(params)
    rep = criteria.cond_critical(params, pair)
    assert rep.condition_holds and rep.lhs == 0.0
    rep2 = criteria.cond_critical(params.replace(mu=2.0), pair)
    assert rep2.lhs == pytest.approx(2.0)
    assert rep2.rhs == pytest.approx(3.0 * math.pi ** 2 / 4.0, rel=1e-9)
    assert rep2.condition_holds
    assert rep2.regime.tag is RegimeTag.CRITICAL_PERTURBATION


def test_critical_boundary_mass_is_exact():
    # at a = abar and mu = 1 the two sides agree by the sharp-constant
    # identity; the report declares a boundary with zero margin
    abar = gn_constant(1, 6.0).abar_n
    params = ModelParams(N=1, q=6, p=8, a=abar, mu=1.0)
    rep = criteria.cond_critical(params, constants_pair(params))
    assert rep.margin == 0.0
    assert not rep.condition_holds
    assert abs(rep.lhs - rep.rhs) <= 1e-9 * (1.0 + rep.lhs + rep.rhs)


def test_critical_townes_threshold():
    params = ModelParams(N=2, q=4, p=5, a=1.0, mu=1.0)
    rep = criteria.cond_critical(params, constants_pair(params))
    assert rep.rhs == pytest.approx(TOWNES_MASS2, rel=1e-8)


def test_critical_gates():
    pair = constants_pair(ModelParams(N=1, q=6, p=8, a=1.0, mu=1.0))
    with pytest.raises(RegimeError):
        criteria.cond_critical(ModelParams(N=1, q=5, p=8, a=1.0, mu=1.0), pair)
    with pytest.raises(RegimeError):
        criteria.cond_critical(ModelParams(N=1, q=6, p=8, a=1.0, mu=-1.0), pair)


# -- defocusing condition -----------------------------------------------------

def test_defocusing_against_independent_formula():
    params = ModelParams(N=3, q=3, p=4, a=1.0, mu=-0.05)
    pair = constants_pair(params)
    rep = criteria.cond_defocusing(params, pair)
    gam_q, gam_p = 0.5, 0.75    # N (r-2) / (2r) at r = 3, 4
    cq, cp = pair.at_q.c_np, pair.at_p.c_np
    lhs = (0.05 * 1.0) ** (4.0 * gam_p - 2.0)
    rhs = ((1.0 - gam_p) / (cq ** 3 * (gam_p - gam_q))) ** (4.0 * gam_p - 2.0) \
        * (1.0 / (gam_p * cp ** 4)) ** (2.0 - 3.0 * gam_q)
    assert rep.lhs == pytest.approx(lhs, rel=1e-12)
    assert rep.rhs == pytest.approx(rhs, rel=1e-12)
    assert rep.condition_holds
    assert rep.regime.tag is RegimeTag.SUPERCRITICAL_DEFOCUSING


def test_defocusing_limits_and_gates():
    base = ModelParams(N=3, q=3, p=4, a=1.0, mu=-1.0)
    pair = constants_pair(base)
    margins = [criteria.cond_defocusing(base.replace(mu=mu), pair).margin
               for mu in (-1.0, -0.1, -0.01)]
    assert margins[0] < margins[1] < margins[2]
    assert not criteria.cond_defocusing(base.replace(mu=-1e6), pair).condition_holds
    # the critical-exponent edge q = pbar is part of this regime
    edge = ModelParams(N=1, q=6, p=8, a=1.0, mu=-0.1)
    assert criteria.cond_defocusing(edge, constants_pair(edge)).condition_holds
    with pytest.raises(RegimeError):
        criteria.cond_defocusing(base.replace(mu=0.1), pair)
    with pytest.raises(RegimeError):
        criteria.cond_defocusing(ModelParams(N=1, q=6.5, p=8, a=1.0, mu=-0.1), pair)


# -- blow-up bound ------------------------------------------------------------

def test_blowup_bound_roots_and_dip():
    pair = constants_pair(MIXED3)
    bb = criteria.blowup_bound_M(MIXED3, pair)
    assert 0.0 < bb.r2 < bb.r3
    cq, cp = pair.at_q.c_np, pair.at_p.c_np
    for root in (bb.r2, bb.r3):
        val = g_ref(root, 3, 3.0, 5.0, 1.0, 0.1, cq, cp)
        assert abs(val) < 1e-10 * (1.0 + root * root)
    s = np.linspace(1e-3, 1.0 - 1e-3, 99)
    interior = bb.r2 ** (1.0 - s) * bb.r3 ** s
    assert np.all(g_ref(interior, 3, 3.0, 5.0, 1.0, 0.1, cq, cp) > 0.0)
    scan = np.linspace(bb.r2 * 1e-6, bb.r2, 400001)
    dip = g_ref(scan, 3, 3.0, 5.0, 1.0, 0.1, cq, cp).min()
    assert bb.m_bound == pytest.approx(-dip, rel=1e-6)


def test_blowup_bound_vanishes_with_the_coupling():
    pair = constants_pair(MIXED3)
    r2s, ms = [], []
    for mu in (1e-1, 1e-3, 1e-5):
        bb = criteria.blowup_bound_M(MIXED3.replace(mu=mu), pair)
        r2s.append(bb.r2)
        ms.append(bb.m_bound)
    assert r2s[0] > r2s[1] > r2s[2] > 0.0
    assert ms[0] > ms[1] > ms[2] >= 0.0


def test_blowup_bound_requires_the_window():
    pair = constants_pair(MIXED3)
    with pytest.raises(StructureError):
        criteria.blowup_bound_M(MIXED3.replace(mu=1e6), pair)
    with pytest.raises(RegimeError):
        criteria.blowup_bound_M(MIXED3.replace(mu=-1.0), pair)


# -- stability window ---------------------------------------------------------

def test_stability_window_brackets_the_inequality():
    pair = constants_pair(MIXED3)
    mu_tilde = criteria.stability_window(1.0, 0.01, MIXED3, pair)
    assert 0.0 < mu_tilde <= criteria.mu_star(MIXED3.replace(a=1.01), pair)

    def window_ok(mu):
        plus = criteria.h_roots(MIXED3.replace(a=1.01, mu=mu), pair)
        tilde = criteria.h_roots(MIXED3.replace(a=1.0, mu=mu), pair)
        if plus is None or tilde is None:
            return False
        return 2.0 * plus.r0 ** 2 < tilde.r1 ** 2

    assert window_ok(0.5 * mu_tilde)
    assert window_ok(mu_tilde * (1.0 - 1e-9))
    assert not window_ok(mu_tilde * 1.001)
    assert not window_ok(2.0 * mu_tilde)


def test_window_roots_move_monotonically_in_mass():
    pair = constants_pair(MIXED3)
    mu_tilde = criteria.stability_window(1.0, 0.01, MIXED3, pair)
    lo = criteria.h_roots(MIXED3.replace(a=1.0, mu=0.5 * mu_tilde), pair)
    hi = criteria.h_roots(MIXED3.replace(a=1.01, mu=0.5 * mu_tilde), pair)
    assert hi.r0 > lo.r0
    assert hi.r1 < lo.r1


def test_stability_window_validation():
    pair = constants_pair(MIXED3)
    with pytest.raises(ValidationError):
        criteria.stability_window(-1.0, 0.01, MIXED3, pair)
    with pytest.raises(ValidationError):
        criteria.stability_window(1.0, 0.0, MIXED3, pair)
    with pytest.raises(RegimeError):
        criteria.stability_window(1.0, 0.01, MIXED3.replace(mu=-0.1), pair)


# -- limit toward the critical threshold --------------------------------------

def test_mixed_rhs_tends_to_critical_rhs():
    # at N = 3, p = 4 the mixed rhs has unit outer exponent, so it
    # converges to the critical rhs directly; the rate carries an
    # eps*log(1/eps) factor, which keeps the observed order below one
    rhs17 = criteria.cond_critical(
        ModelParams(N=3, q="10/3", p=4, a=1.0, mu=1.0),
        constants_pair(ModelParams(N=3, q="10/3", p=4, a=1.0, mu=1.0))).rhs
    errs = []
    eps_list = (1e-1, 1e-2, 1e-3)
    for eps in eps_list:
        params = ModelParams(N=3, q=10.0 / 3.0 - eps, p=4, a=1.0, mu=1.0)
        rep = criteria.cond_mixed(params, constants_pair(params))
        errs.append(abs(rep.rhs - rhs17))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.01 * rhs17
    slope = np.polyfit(np.log(eps_list), np.log(errs), 1)[0]
    assert 0.0 < slope < 1.0
