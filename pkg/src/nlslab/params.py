"""Model parameters, derived exponents, and regime classification.

The stationary problem is

    -Delta u = lam*u + mu*|u|**(q-2)*u + |u|**(p-2)*u  on R^N,
    int |u|^2 dx = a**2,

with 2 < q < p < 2*.  The mass-critical exponent pbar = 2 + 4/N splits
the admissible exponent range: a power r < pbar contributes a scaling-
subcritical term, r = pbar a critical one, r > pbar a supercritical one.
Where (q, p) sit relative to pbar, together with the sign of mu, selects
the variational structure of the energy on the mass sphere, and therefore
which existence thresholds and solver branches apply downstream.

The regime boundary p = pbar (and q = pbar) is structurally meaningful,
so equality is decided by exact rational arithmetic whenever the exponent
was supplied as a rational (fractions.Fraction or a string like "10/3"),
and by a 1e-12 tolerance otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import isfinite

from .errors import ValidationError

# Tolerance for exponent-vs-pbar comparison when no exact rational is known.
PBAR_TOL = 1e-12


def _coerce_exponent(value, name: str) -> tuple[float, Fraction | None]:
    """Return (float value, exact Fraction or None) for an exponent input."""
    if isinstance(value, Fraction):
        return float(value), value
    if isinstance(value, str):
        try:
            frac = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse exponent {name}={value!r}") from exc
        return float(frac), frac
    if isinstance(value, int):
        return float(value), Fraction(value)
    if isinstance(value, float):
        return value, None
    raise ValidationError(f"unsupported type for exponent {name}: {type(value).__name__}")


class RegimeTag(str, Enum):
    CRITICAL_LEADING = "CriticalLeading"          # q < p = pbar
    MIXED_FOCUSING = "MixedFocusing"              # q < pbar < p, mu > 0
    CRITICAL_PERTURBATION = "CriticalPerturbation"  # q = pbar < p, mu > 0
    SUPERCRITICAL_DEFOCUSING = "SupercriticalDefocusing"  # q <= pbar < p, mu < 0
    PURE_SUBCRITICAL = "PureSubcritical"          # q < p < pbar
    PURE_SUPERCRITICAL = "PureSupercritical"      # pbar < q < p
    HOMOGENEOUS = "Homogeneous"                   # mu = 0

    def __str__(self) -> str:  # json/CLI friendliness
        return self.value


class Ordering(str, Enum):
    """Position of (q, p) relative to the mass-critical exponent."""

    SUB_SUB = "q<p<pbar"
    SUB_CRITICAL = "q<p=pbar"
    SUB_SUPER = "q<pbar<p"
    CRITICAL_SUPER = "q=pbar<p"
    SUPER_SUPER = "pbar<q<p"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ModelParams:
    """Immutable problem data (N, p, q, a, mu).

    p and q may be given as float, int, Fraction, or a rational string;
    rational inputs keep their exact value for boundary classification.
    """

    N: int
    p: float
    q: float
    a: float
    mu: float
    p_exact: Fraction | None = None
    q_exact: Fraction | None = None

    def __init__(self, N, p, q, a, mu, p_exact=None, q_exact=None):
        p_val, p_frac = _coerce_exponent(p, "p")
        q_val, q_frac = _coerce_exponent(q, "q")
        if p_exact is not None:
            p_frac = Fraction(p_exact)
        if q_exact is not None:
            q_frac = Fraction(q_exact)
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "p", p_val)
        object.__setattr__(self, "q", q_val)
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "mu", float(mu))
        object.__setattr__(self, "p_exact", p_frac)
        object.__setattr__(self, "q_exact", q_frac)
        self._validate()

    def _validate(self) -> None:
        if self.N not in (1, 2, 3):
            raise ValidationError(f"N={self.N} unsupported; N must be one of 1, 2, 3")
        for name in ("p", "q", "a", "mu"):
            v = getattr(self, name)
            if not isfinite(v):
                raise ValidationError(f"{name}={v} is not finite")
        if not self.q > 2:
            raise ValidationError(f"need q > 2, got q={self.q}")
        if not self.p > self.q:
            raise ValidationError(f"need q < p, got q={self.q}, p={self.p}")
        two_star = _two_star(self.N)
        if not self.p < two_star:
            raise ValidationError(
                f"need p < 2* = {two_star} for N={self.N}, got p={self.p}"
            )
        if not self.a > 0:
            raise ValidationError(f"need a > 0, got a={self.a}")

    # -- comparisons against the critical exponent --------------------------

    def _cmp_pbar(self, value: float, exact: Fraction | None) -> int:
        """Sign of (value - pbar), with exact arithmetic when available."""
        pbar_frac = Fraction(2 * self.N + 4, self.N)
        if exact is not None:
            diff = exact - pbar_frac
            return (diff > 0) - (diff < 0)
        diff = value - float(pbar_frac)
        if abs(diff) <= PBAR_TOL:
            return 0
        return 1 if diff > 0 else -1

    def cmp_p_pbar(self) -> int:
        return self._cmp_pbar(self.p, self.p_exact)

    def cmp_q_pbar(self) -> int:
        return self._cmp_pbar(self.q, self.q_exact)

    # -- (de)serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        def enc(val: float, exact: Fraction | None):
            if exact is not None and exact.denominator != 1:
                return str(exact)
            return val

        return {
            "N": self.N,
            "p": enc(self.p, self.p_exact),
            "q": enc(self.q, self.q_exact),
            "a": self.a,
            "mu": self.mu,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        try:
            return cls(N=data["N"], p=data["p"], q=data["q"], a=data["a"], mu=data["mu"])
        except KeyError as exc:
            raise ValidationError(f"missing parameter key {exc.args[0]!r}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))

    def replace(self, **kwargs) -> "ModelParams":
        base = {"N": self.N, "p": self.p_exact or self.p, "q": self.q_exact or self.q,
                "a": self.a, "mu": self.mu}
        base.update(kwargs)
        return ModelParams(**base)


@dataclass(frozen=True)
class DerivedExponents:
    pbar: float
    gamma_p: float
    gamma_q: float
    two_star: float


@dataclass(frozen=True)
class Regime:
    """Regime tag plus the underlying (q, p) ordering and focusing flag.

    The tag is the single label downstream modules dispatch on.  The
    ordering records the mu-independent exponent geometry; flipping the
    sign of mu changes the tag (and the flag) but never the ordering.
    ``focusing`` is None for mu = 0.
    """

    tag: RegimeTag
    ordering: Ordering
    focusing: bool | None


def _two_star(N: int) -> float:
    return 2.0 * N / (N - 2) if N >= 3 else float("inf")


def derive(params: ModelParams) -> DerivedExponents:
    """Derived exponents (pbar, gamma_p, gamma_q, 2*)."""
    N, p, q = params.N, params.p, params.q
    return DerivedExponents(
        pbar=2.0 + 4.0 / N,
        gamma_p=N * (p - 2.0) / (2.0 * p),
        gamma_q=N * (q - 2.0) / (2.0 * q),
        two_star=_two_star(N),
    )


def classify(params: ModelParams) -> Regime:
    """Unique regime tag for valid parameters.

    mu = 0 is Homogeneous regardless of ordering.  For mu != 0 the tag is
    determined by where (q, p) sit relative to pbar, with the mixed and
    critical-perturbation labels reserved for mu > 0 and their common
    defocusing counterpart for mu < 0.
    """
    cq = params.cmp_q_pbar()
    cp = params.cmp_p_pbar()

    if cp < 0:
        ordering = Ordering.SUB_SUB
    elif cp == 0:
        ordering = Ordering.SUB_CRITICAL
    elif cq < 0:
        ordering = Ordering.SUB_SUPER
    elif cq == 0:
        ordering = Ordering.CRITICAL_SUPER
    else:
        ordering = Ordering.SUPER_SUPER

    if params.mu == 0.0:
        return Regime(RegimeTag.HOMOGENEOUS, ordering, None)

    focusing = params.mu > 0
    if ordering is Ordering.SUB_SUB:
        tag = RegimeTag.PURE_SUBCRITICAL
    elif ordering is Ordering.SUB_CRITICAL:
        tag = RegimeTag.CRITICAL_LEADING
    elif ordering is Ordering.SUPER_SUPER:
        tag = RegimeTag.PURE_SUPERCRITICAL
    elif focusing:
        tag = (RegimeTag.MIXED_FOCUSING if ordering is Ordering.SUB_SUPER
               else RegimeTag.CRITICAL_PERTURBATION)
    else:
        tag = RegimeTag.SUPERCRITICAL_DEFOCUSING
    return Regime(tag, ordering, focusing)
