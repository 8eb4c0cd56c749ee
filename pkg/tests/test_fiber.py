"""Fiber-map structure against closed forms and dense dilation scans.

Soliton triples have sech-integral closed forms in 1D, two-term fiber
maps have logarithmic closed-form critical points, and everything else
is cross-checked by sampling the fiber map densely in the dilation
variable.
"""

import math

import numpy as np
import pytest

from nlslab.errors import RegimeError, StructureError, ValidationError
from nlslab.fiber import (FiberClass, FiberTriple, energy, fiber_critical_points,
                          gn_violation, pohozaev, scale, triple_of)
from nlslab.fields import RadialField, uniform_grid
from nlslab.gn import gn_constant
from nlslab.params import ModelParams
from nlslab.shooting import normalized_profile

MIXED = ModelParams(N=1, q=3, p=7, a=1.0, mu=0.02)
DEFOC = ModelParams(N=3, q=3, p=4, a=1.0, mu=-0.05)
ONES = FiberTriple(1.0, 1.0, 1.0, 1.0)


def psi(tr, params, s):
    return energy(scale(tr, params, s), params)


def dpsi(tr, params, s):
    return pohozaev(scale(tr, params, s), params)


# -- the triple of a field ----------------------------------------------------

def test_triple_of_soliton_closed_forms():
    # w(x) = sqrt(2) sech(x): mass2 = 4, grad2 = 4/3, |w|_3^3 = sqrt(2) pi,
    # |w|_4^4 = 16/3
    shot = normalized_profile(0.0, 3.0, 4.0, 1)
    params = ModelParams(N=1, q=3, p=4, a=1.0, mu=0.5)
    tr = triple_of(shot.field, params)
    assert tr.grad2 == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert tr.mq == pytest.approx(math.sqrt(2.0) * math.pi, rel=1e-12)
    assert tr.mp == pytest.approx(16.0 / 3.0, rel=1e-12)
    assert tr.mass2 == pytest.approx(4.0, rel=1e-12)


def test_triple_of_gaussian():
    grid = uniform_grid(40.0, 16384)
    field = RadialField(grid, np.exp(-grid**2 / 2.0), 1,
                        deriv=-grid * np.exp(-grid**2 / 2.0))
    tr = triple_of(field, ModelParams(N=1, q=3, p=4, a=1.0, mu=1.0))
    assert tr.mass2 == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert tr.grad2 == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-12)


def test_zero_field_triple_is_rejected_downstream():
    grid = uniform_grid(10.0, 256)
    tr = triple_of(RadialField(grid, np.zeros_like(grid), 1), MIXED)
    assert (tr.grad2, tr.mq, tr.mp, tr.mass2) == (0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        fiber_critical_points(tr, MIXED)


def test_triple_rejects_negative_entries():
    with pytest.raises(ValidationError):
        FiberTriple(1.0, -1.0, 1.0, 1.0)


# -- dilation action ----------------------------------------------------------

def test_scale_identity_and_mass_invariance():
    assert scale(ONES, MIXED, 0.0) == ONES
    rng = np.random.default_rng(7)
    for s in rng.uniform(-20.0, 20.0, 8):
        assert scale(ONES, MIXED, s).mass2 == ONES.mass2


def test_scale_critical_power_factor():
    # at N = 1, p = 6 the p-term scales with weight exactly 2
    params = ModelParams(N=1, q=3, p=6, a=1.0, mu=0.1)
    out = scale(ONES, params, math.log(2.0))
    assert out.mp == pytest.approx(4.0, rel=1e-15)
    assert out.grad2 == pytest.approx(4.0, rel=1e-15)


def test_energy_pohozaev_trivial_triple():
    tr = FiberTriple(1.0, 0.0, 0.0, 1.0)
    assert energy(tr, MIXED) == 0.5
    assert pohozaev(tr, MIXED) == 1.0


def test_derivative_identity_by_finite_difference():
    h = 1e-5
    for s0 in (-2.0, 0.3, 1.7):
        fd = (psi(ONES, MIXED, s0 + h) - psi(ONES, MIXED, s0 - h)) / (2.0 * h)
        assert fd == pytest.approx(dpsi(ONES, MIXED, s0), abs=1e-8)


# -- critical points ----------------------------------------------------------

def test_single_power_closed_form():
    params = ModelParams(N=3, q=3, p=4, a=1.0, mu=0.0)
    cp = fiber_critical_points(FiberTriple(1.0, 0.0, 1.0, 1.0), params)
    assert cp.t_u == pytest.approx(math.log(4.0 / 3.0), rel=1e-14)
    assert cp.s_u is None and cp.c_u is None and cp.d_u is None
    assert cp.class_at_zero is FiberClass.NOT_ON_P


def test_two_point_structure_against_dense_scan():
    cp = fiber_critical_points(ONES, MIXED)
    assert cp.s_u < cp.c_u < cp.t_u < cp.d_u
    scale_pp = 1.0 + ONES.grad2 * math.exp(2.0 * cp.t_u)
    assert abs(dpsi(ONES, MIXED, cp.s_u)) < 1e-12 * scale_pp
    assert abs(dpsi(ONES, MIXED, cp.t_u)) < 1e-12 * scale_pp
    assert psi(ONES, MIXED, cp.s_u) < 0.0 < psi(ONES, MIXED, cp.t_u)
    # dense sampling of the map locates the same landmarks
    ss = np.linspace(-30.0, 30.0, 200001)
    vals = np.array([psi(ONES, MIXED, s) for s in ss])
    step = ss[1] - ss[0]
    assert abs(ss[np.argmax(vals)] - cp.t_u) <= step
    flips = ss[np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]]
    assert flips.size == 2
    assert abs(flips[0] - cp.c_u) <= step and abs(flips[1] - cp.d_u) <= step
    level = 1.0 + abs(psi(ONES, MIXED, cp.t_u))
    assert abs(psi(ONES, MIXED, cp.c_u)) < 1e-12 * level
    assert abs(psi(ONES, MIXED, cp.d_u)) < 1e-12 * level


def test_scaled_triples_land_on_the_manifold():
    cp = fiber_critical_points(ONES, MIXED)
    at_min = fiber_critical_points(scale(ONES, MIXED, cp.s_u), MIXED)
    at_max = fiber_critical_points(scale(ONES, MIXED, cp.t_u), MIXED)
    assert at_min.class_at_zero is FiberClass.PPLUS
    assert at_max.class_at_zero is FiberClass.PMINUS
    assert abs(at_max.t_u) < 1e-12          # already at its own maximum
    assert abs(at_min.s_u) < 1e-12


def test_defocusing_unique_maximum_decreasing_concave():
    cp = fiber_critical_points(ONES, DEFOC)
    assert cp.s_u is None and cp.c_u is None and cp.d_u is None
    ss = cp.t_u + np.linspace(0.1, 10.0, 200)
    vals = np.array([psi(ONES, DEFOC, s) for s in ss])
    assert np.all(np.diff(vals) < 0.0)
    assert np.all(np.diff(vals, 2) < 0.0)
    assert psi(ONES, DEFOC, cp.t_u) > 0.0   # strict maximum at positive level


def test_maximum_sign_matches_pohozaev_sign():
    # in the unique-maximum regime: t_u < 0 iff P < 0
    for mp in (0.5, 1.0, 1.3, 1.4, 2.0, 5.0):
        tr = FiberTriple(1.0, 1.0, mp, 1.0)
        cp = fiber_critical_points(tr, DEFOC)
        assert (cp.t_u < 0.0) == (pohozaev(tr, DEFOC) < 0.0)
    # in the two-point regime only one direction holds; dilating past the
    # maximum shifts t_u below zero without touching the level geometry
    base = fiber_critical_points(ONES, MIXED)
    tr = scale(ONES, MIXED, base.t_u + 1.0)
    cp = fiber_critical_points(tr, MIXED)
    assert cp.t_u < 0.0 and pohozaev(tr, MIXED) < 0.0


def test_critical_perturbation_closed_form():
    params = ModelParams(N=1, q=6, p=8, a=1.0, mu=1.0)
    tr = FiberTriple(1.0, 0.1, 1.0, 1.0)
    cp = fiber_critical_points(tr, params)
    b = 1.0 / 30.0   # mu * gamma_q * mq at gamma_q = 1/3
    assert cp.t_u == pytest.approx(math.log((1.0 - b) / 0.375), rel=1e-12)
    assert cp.s_u is None
    at_max = fiber_critical_points(scale(tr, params, cp.t_u), params)
    assert at_max.class_at_zero is FiberClass.PMINUS
    with pytest.raises(StructureError):
        # critical term at least as large as the gradient term
        fiber_critical_points(FiberTriple(1.0, 10.0, 1.0, 1.0), params)


def test_critical_leading_defocusing_closed_form():
    params = ModelParams(N=3, q=3, p="10/3", a=1.0, mu=-1.0)
    tr = FiberTriple(1.0, 1.0, 10.0, 1.0)
    cp = fiber_critical_points(tr, params)
    # gamma_q q = 3/2, gamma_p p = 2: solve (C - A) e^2s = |B| e^(3s/2)
    b = 0.5
    c = 0.6 * 10.0
    assert cp.t_u == pytest.approx(math.log(b / (c - 1.0)) / 0.5, rel=1e-12)
    assert abs(dpsi(tr, params, cp.t_u)) < 1e-12
    with pytest.raises(StructureError):
        fiber_critical_points(FiberTriple(1.0, 1.0, 0.1, 1.0), params)


def test_absent_top_power_closed_form():
    params = ModelParams(N=2, q=6, p=8, a=1.0, mu=1.0)
    cp = fiber_critical_points(FiberTriple(1.0, 1.0, 0.0, 1.0), params)
    # gamma_q q = 4: A e^2s = B e^4s at s = ln(A/B)/2 with B = 2/3
    assert cp.t_u == pytest.approx(math.log(1.5) / 2.0, rel=1e-12)


def test_regime_gates():
    for params in (
        ModelParams(N=1, q=3, p=5, a=1.0, mu=0.01),      # both powers subcritical
        ModelParams(N=3, q=3, p="10/3", a=1.0, mu=1.0),  # critical leading, focusing
        ModelParams(N=1, q=3, p=4, a=1.0, mu=0.0),       # single subcritical power
    ):
        with pytest.raises(RegimeError):
            fiber_critical_points(ONES, params)


def test_structure_failures():
    with pytest.raises(StructureError):
        # coupling far beyond the two-point threshold for this triple
        fiber_critical_points(FiberTriple(1.0, 1e6, 1.0, 1.0), MIXED)
    with pytest.raises(StructureError):
        # defocusing with no top power: derivative is positive everywhere
        fiber_critical_points(FiberTriple(1.0, 1.0, 0.0, 1.0), DEFOC)
    with pytest.raises(StructureError):
        # two critical points exist but the maximum sits at negative level,
        # so the map has no zeros
        fiber_critical_points(FiberTriple(1.0, 1.0, 100.0, 1.0), MIXED)


# -- interpolation-bound sanity -----------------------------------------------

def test_gn_violation_soliton_saturates():
    shot = normalized_profile(0.0, 3.0, 4.0, 1)
    params = ModelParams(N=1, q=3, p=4, a=1.0, mu=0.5)
    tr = triple_of(shot.field, params)
    v = gn_violation(tr, params, gn_constant(1, 4.0))
    assert abs(v) < 1e-6


def test_gn_violation_generic_field_strict():
    grid = uniform_grid(40.0, 16384)
    field = RadialField(grid, np.exp(-grid**2 / 2.0), 1,
                        deriv=-grid * np.exp(-grid**2 / 2.0))
    params = ModelParams(N=1, q=3, p=4, a=1.0, mu=0.5)
    v = gn_violation(triple_of(field, params), params, gn_constant(1, 4.0))
    assert v < -1e-3
