"""Best constants of the interpolation inequality

    |u|_p  <=  C_{N,p} |grad u|_2^(gamma_p) |u|_2^(1 - gamma_p),
    gamma_p = N (p - 2) / (2 p),

valid for 2 < p < 2N/(N-2).  Equality holds exactly at the unit-frequency
radial ground state w of  -Delta w + w = w^(p-1), so the constant is
computed directly from a shot profile of w rather than from any closed
form: C_{N,p} = |w|_p / (|grad w|_2^gamma_p |w|_2^(1-gamma_p)).

At the mass-critical power pbar = 2 + 4/N the mass |w|_2 itself is the
critical threshold abar_N separating existence regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import cache
from .errors import ValidationError
from .fields import RadialField
from .params import ModelParams
from .shooting import GridSpec, ShotResult, normalized_profile

_PBAR_TOL = 1e-12
_DUMMY_Q = 2.5  # inert: the q-term has zero coefficient in soliton shots
_memory: dict[tuple, "GNConstants"] = {}


@dataclass(frozen=True)
class GNConstants:
    """Sharp constant data for one (N, p).

    abar_n is only set at the mass-critical power, where it equals mass_w.
    residual is the ODE residual of the underlying soliton profile.
    """

    c_np: float
    mass_w: float
    abar_n: float | None
    residual: float


def _check_exponent(dim: int, p: float) -> None:
    if dim not in (1, 2, 3):
        raise ValidationError(f"dim must be 1, 2, or 3, got {dim}")
    if not (p > 2.0):
        raise ValidationError(f"exponent p must exceed 2, got {p}")
    if dim == 3 and p >= 6.0:
        raise ValidationError(
            f"exponent p must be Sobolev-subcritical (p < 6 for N = 3), got {p}")
    if not math.isfinite(p):
        raise ValidationError("exponent p must be finite")


def soliton_shot(dim: int, p: float, grid: GridSpec | None = None) -> ShotResult:
    """Full shooting result for -Delta w + w = w^(p-1), radial, positive."""
    _check_exponent(dim, p)
    return normalized_profile(0.0, _DUMMY_Q, p, dim, grid)


def shoot_soliton(dim: int, p: float, grid: GridSpec | None = None) -> RadialField:
    """Radial profile of the unit-frequency soliton of -Delta w + w = w^(p-1)."""
    return soliton_shot(dim, p, grid).field


def gamma_exponent(dim: int, p: float) -> float:
    return dim * (p - 2.0) / (2.0 * p)


def gn_constant(dim: int, p: float, grid: GridSpec | None = None,
                use_cache: bool = True) -> GNConstants:
    """Sharp interpolation constant computed from the extremal profile."""
    _check_exponent(dim, p)
    gspec = grid if grid is not None else GridSpec()
    memkey = (dim, p, gspec.radius, gspec.points)
    if use_cache and memkey in _memory:
        return _memory[memkey]

    from . import __version__
    diskkey = {"kind": "gn", "dim": dim, "p": p, "radius": gspec.radius,
               "points": gspec.points, "version": __version__}
    if use_cache:
        stored = cache.load(diskkey)
        if stored is not None:
            out = GNConstants(**stored)
            _memory[memkey] = out
            return out

    shot = soliton_shot(dim, p, gspec)
    w = shot.field
    mass2 = w.mass2()
    grad2 = w.grad2()
    norm_p = w.norm_power(p) ** (1.0 / p)
    gam = gamma_exponent(dim, p)
    c_np = norm_p / (grad2 ** (0.5 * gam) * mass2 ** (0.5 * (1.0 - gam)))
    mass_w = math.sqrt(mass2)
    pbar = 2.0 + 4.0 / dim
    abar = mass_w if abs(p - pbar) <= _PBAR_TOL * pbar else None
    out = GNConstants(c_np=c_np, mass_w=mass_w, abar_n=abar,
                      residual=shot.residual)
    if use_cache:
        _memory[memkey] = out
        cache.store(diskkey, {"c_np": out.c_np, "mass_w": out.mass_w,
                              "abar_n": out.abar_n, "residual": out.residual})
    return out


@dataclass(frozen=True)
class ConstantsPair:
    """Constants at both powers of a combined nonlinearity."""

    at_q: GNConstants
    at_p: GNConstants


def constants_pair(params: ModelParams, grid: GridSpec | None = None,
                   use_cache: bool = True) -> ConstantsPair:
    return ConstantsPair(
        at_q=gn_constant(params.N, params.q, grid, use_cache),
        at_p=gn_constant(params.N, params.p, grid, use_cache))
