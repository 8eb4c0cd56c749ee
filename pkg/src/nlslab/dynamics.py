"""Direct time evolution and the global-existence vs blow-up dichotomy.

The flow under study is

    i psi_t + Delta psi + |psi|**(p-2)*psi + mu*|psi|**(q-2)*psi = 0,

integrated by Strang splitting: a half step of the pointwise phase
rotation psi -> psi * exp(i*(dt/2)*(|psi|**(p-2) + mu*|psi|**(q-2))),
a full linear step, and a second half rotation.  The linear step is the
exact discrete Fourier propagator on a periodic 1D box audit grid, and an
unconditionally stable Crank-Nicolson step on a radial grid (N = 2, 3)
whose Laplacian is discretized in conservative (flux) form.  Both linear
steps are isometries of the grid's L2 form, and the phase rotation is a
pointwise isometry, so the discrete mass is conserved to rounding on
every step.

Measured quantities along a run: mass, energy, |grad psi|_2^2, the
second moment f(t) = int |x|^2 |psi|^2, and the Pohozaev functional P.
For data with finite second moment the flow obeys f''(t) = 8 P(psi(t)),
which is checked a posteriori by virial_check and used as one of the
blow-up signals.

A run is certified BlowUp only when at least two of three independent
signals agree: the gradient norm passed its threshold (GRAD_BLOWUP_FACTOR
times the initial value, capped at the grid saturation ceiling described
at SATURATION_FRACTION), the adaptive step underflowed DT_FLOOR, and a
concave quadratic fitted to the tail of f(t) predicts collapse.
Anything less ends Undecided, with the fired signals in the outcome
detail.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from .errors import EvolutionError, StructureError, ValidationError
from .fields import SPHERE_FACTOR, RadialField
from .fiber import energy, fiber_critical_points, pohozaev, triple_of
from .gn import ConstantsPair, constants_pair
from .criteria import cond_critical, cond_defocusing, cond_mixed
from .params import ModelParams, RegimeTag, classify

__all__ = [
    "WaveField", "EvolutionTrace", "Outcome", "OutcomeKind",
    "Prediction", "ClassifyReport", "PredictionReport", "VirialReport",
    "evolve", "virial_check", "classify_datum", "prediction_experiment",
    "stability_experiment", "from_radial_profile", "scale_datum",
    "PERIODIC_BOX", "PERIODIC_POINTS", "RADIAL_BOX", "RADIAL_POINTS",
]

# default grids: a 1D box [-40, 40) with 4096 modes resolves every datum
# used here to spectral accuracy; the radial box keeps the same radius at
# second order, so it needs the finer 8192-point grid
PERIODIC_BOX = 40.0
PERIODIC_POINTS = 4096
RADIAL_BOX = 40.0
RADIAL_POINTS = 8192

GRAD_BLOWUP_FACTOR = 1e6
# the gradient signal also fires when the mean wavenumber passes a
# quarter of the grid Nyquist: past that point the discrete solution no
# longer approximates the equation, so a resolved crossing of the
# idealized factor above is impossible and saturation is its measurable
# proxy; certification still needs a second signal to concur
SATURATION_FRACTION = 1.0 / 16.0
DT_FLOOR = 1e-12
# per-step gradient growth that triggers a halving of dt; smooth runs
# move by fractions of a percent per step, genuine collapse accelerates
GROWTH_FACTOR = 1.2
# after this many consecutive calm steps (growth below CALM_FACTOR) the
# step doubles back toward the caller's dt, so one transient burst does
# not condemn the rest of the run to a crawl
CALM_FACTOR = 1.02
CALM_STEPS = 50
# concavity of the virial tail counts as a collapse signal only when it
# is visible against the size of f itself
CONCAVITY_RTOL = 1e-6
# |t_u| below this band is the open boundary case of the dichotomy
T_ZERO_BAND = 1e-9
MASS_MATCH_RTOL = 1e-6
BOUNDARY_DECAY_RTOL = 1e-3
MAX_STEPS = 2_000_000
# a run that keeps halving has hit structure the grid cannot follow;
# spending the budget ends it as resolution exhaustion, not as a verdict
HALVING_BUDGET = 64


# ----------------------------------------------------------------------
# sampled complex fields


@dataclass
class WaveField:
    """Complex samples of psi on one of the two evolution geometries.

    kind "periodic" is a 1D box [-L, L) with 2^k equispaced points
    (extent = L); kind "radial" holds a radial profile for N = 2 or 3 on
    midpoint nodes r_j = (j + 1/2) * dr with a Dirichlet boundary at
    r = R (extent = R).  Midpoint nodes keep the conservative Laplacian
    free of any origin division and make the plain product quadrature
    exactly the norm the Crank-Nicolson step conserves.
    """

    values: np.ndarray
    kind: str
    extent: float
    dim: int

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=complex)
        self.extent = float(self.extent)
        if self.values.ndim != 1 or self.values.size < 8:
            raise ValidationError("field needs a 1D array of at least 8 samples")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("field samples must be finite")
        if not math.isfinite(self.extent) or self.extent <= 0.0:
            raise ValidationError(f"extent must be positive, got {self.extent}")
        n = self.values.size
        if self.kind == "periodic":
            if self.dim != 1:
                raise ValidationError("periodic geometry is one-dimensional")
            if n & (n - 1):
                raise ValidationError(f"periodic point count must be a power of two, got {n}")
        elif self.kind == "radial":
            if self.dim not in (2, 3):
                raise ValidationError("radial evolution geometry needs dim 2 or 3")
        else:
            raise ValidationError(f"unknown geometry {self.kind!r}")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> float:
        if self.kind == "periodic":
            return 2.0 * self.extent / self.n
        return self.extent / self.n

    @property
    def coords(self) -> np.ndarray:
        h = self.spacing
        if self.kind == "periodic":
            return -self.extent + h * np.arange(self.n)
        return h * (np.arange(self.n) + 0.5)

    def quad_weights(self) -> np.ndarray:
        h = self.spacing
        if self.kind == "periodic":
            return np.full(self.n, h)
        return SPHERE_FACTOR[self.dim] * self.coords ** (self.dim - 1) * h

    # -- integral functionals (the forms conserved by the stepper) ------

    def mass2(self) -> float:
        """|psi|_2^2."""
        return float(np.sum(self.quad_weights() * np.abs(self.values) ** 2))

    def norm_power(self, s: float) -> float:
        """|psi|_s^s."""
        return float(np.sum(self.quad_weights() * np.abs(self.values) ** s))

    def grad2(self) -> float:
        """|grad psi|_2^2: spectral on the box, flux form on the radial grid."""
        if self.kind == "periodic":
            k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
            hat = np.fft.fft(self.values)
            return float(self.spacing / self.n * np.sum(k * k * np.abs(hat) ** 2))
        h = self.spacing
        r_up = self.coords + 0.5 * h
        diff = np.empty(self.n, dtype=complex)
        diff[:-1] = self.values[1:] - self.values[:-1]
        diff[-1] = -self.values[-1]  # Dirichlet ghost at r = R
        return float(SPHERE_FACTOR[self.dim] / h
                     * np.sum(r_up ** (self.dim - 1) * np.abs(diff) ** 2))

    def second_moment(self) -> float:
        """int |x|^2 |psi|^2."""
        return float(np.sum(self.quad_weights() * self.coords ** 2
                            * np.abs(self.values) ** 2))

    def boundary_fraction(self) -> float:
        """Largest |psi| on the outer 2 percent of nodes, relative to the peak."""
        peak = float(np.max(np.abs(self.values)))
        if peak == 0.0:
            return 0.0
        edge = max(1, self.n // 50)
        if self.kind == "periodic":
            tail = np.concatenate([self.values[:edge], self.values[-edge:]])
        else:
            tail = self.values[-edge:]
        return float(np.max(np.abs(tail))) / peak

    def replace_values(self, values: np.ndarray) -> "WaveField":
        return WaveField(values, self.kind, self.extent, self.dim)


def from_radial_profile(profile: RadialField, extent: float | None = None,
                        points: int | None = None) -> WaveField:
    """Embed a stationary radial profile into an evolution geometry.

    dim 1 profiles are reflected evenly onto the periodic box; dim 2 and
    3 profiles are resampled onto the midpoint radial grid.  The target
    geometry must contain the profile: values at the new boundary above
    BOUNDARY_DECAY_RTOL times the peak are rejected rather than silently
    truncated.
    """
    if profile.dim == 1:
        L = PERIODIC_BOX if extent is None else float(extent)
        n = PERIODIC_POINTS if points is None else int(points)
        w = WaveField(np.zeros(n), "periodic", L, 1)
        x = np.abs(w.coords)
    else:
        R = RADIAL_BOX if extent is None else float(extent)
        n = RADIAL_POINTS if points is None else int(points)
        w = WaveField(np.zeros(n), "radial", R, profile.dim)
        x = w.coords
    vals = np.interp(x, profile.grid, profile.values, right=0.0)
    out = w.replace_values(vals.astype(complex))
    if out.boundary_fraction() > BOUNDARY_DECAY_RTOL:
        raise ValidationError(
            f"evolution box of extent {out.extent:.3g} does not contain the "
            f"profile: boundary amplitude is {out.boundary_fraction():.3g} "
            "of the peak")
    return out


def scale_datum(w: WaveField, s: float) -> WaveField:
    """Mass-preserving dilation (s * psi)(x) = e^(N s / 2) psi(e^s x).

    The stretched samples are linearly interpolated on the original grid
    and zero-filled beyond it (decaying data only), then renormalized so
    the discrete mass is exactly invariant.
    """
    s = float(s)
    if not math.isfinite(s):
        raise ValidationError(f"dilation parameter must be finite, got {s}")
    x = w.coords
    xs = math.exp(s) * x
    amp = math.exp(0.5 * w.dim * s)
    re = np.interp(xs, x, w.values.real, left=0.0, right=0.0)
    im = np.interp(xs, x, w.values.imag, left=0.0, right=0.0)
    out = w.replace_values(amp * (re + 1j * im))
    m_old, m_new = w.mass2(), out.mass2()
    if m_new <= 0.0:
        raise ValidationError("dilation pushed the datum off the grid")
    return out.replace_values(out.values * math.sqrt(m_old / m_new))


# ----------------------------------------------------------------------
# outcome and trace types


class OutcomeKind(str, Enum):
    GLOBAL = "Global"
    BLOW_UP = "BlowUp"
    UNDECIDED = "Undecided"

    def __str__(self) -> str:
        return self.value


class Outcome(NamedTuple):
    """Verdict of one run: time is T, the blow-up time, or the reach."""

    kind: OutcomeKind
    time: float
    detail: str = ""


@dataclass(frozen=True)
class EvolutionTrace:
    """Monitor samples of one run plus its verdict and final state."""

    times: np.ndarray
    mass2: np.ndarray
    energy: np.ndarray
    grad2: np.ndarray
    virial: np.ndarray
    pohozaev: np.ndarray
    outcome: Outcome
    final_state: WaveField


# ----------------------------------------------------------------------
# geometry steppers


class _PeriodicStepper:
    """Exact Fourier linear step on the box; phase rotation in place."""

    def __init__(self, w: WaveField, params: ModelParams):
        self.dx = w.spacing
        self.n = w.n
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        self.k2 = k * k
        self.q = params.q
        self.p = params.p
        self.mu = params.mu

    def _phase(self, psi: np.ndarray, half_dt: float) -> np.ndarray:
        a = np.abs(psi)
        return psi * np.exp(1j * half_dt * (a ** (self.p - 2.0)
                                            + self.mu * a ** (self.q - 2.0)))

    def step(self, psi: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        """One Strang step; returns (new state, mid-step gradient monitor)."""
        out = self._phase(psi, 0.5 * dt)
        hat = np.fft.fft(out)
        hat *= np.exp(-1j * dt * self.k2)
        monitor = float(self.dx / self.n * np.sum(self.k2 * np.abs(hat) ** 2))
        out = np.fft.ifft(hat)
        return self._phase(out, 0.5 * dt), monitor

    def grad2(self, psi: np.ndarray) -> float:
        hat = np.fft.fft(psi)
        return float(self.dx / self.n * np.sum(self.k2 * np.abs(hat) ** 2))


class _RadialStepper:
    """Crank-Nicolson on the flux-form radial Laplacian (N = 2, 3).

    The operator L psi_j = (r_(j+1/2)^(N-1) (psi_(j+1) - psi_j)
    - r_(j-1/2)^(N-1) (psi_j - psi_(j-1))) / (r_j^(N-1) dr^2) is
    self-adjoint in the midpoint measure r^(N-1) dr, the inner flux
    coefficient vanishes identically at the origin node, and the ghost
    value beyond r = R is zero.  (1 - i dt/2 L)^(-1)(1 + i dt/2 L) is
    then an exact isometry of the measured norm.
    """

    def __init__(self, w: WaveField, params: ModelParams):
        self.dr = w.spacing
        self.n = w.n
        self.dim = w.dim
        r = w.coords
        m = r ** (self.dim - 1)
        r_up = (r + 0.5 * self.dr) ** (self.dim - 1)
        r_dn = (r - 0.5 * self.dr) ** (self.dim - 1)
        inv = 1.0 / (m * self.dr * self.dr)
        self.lo = r_dn * inv          # coefficient of psi_(j-1); lo[0] pairs with nothing
        self.up = r_up * inv          # coefficient of psi_(j+1); up[-1] pairs with the ghost
        self.di = -(r_up + r_dn) * inv
        self.r_up_raw = r_up
        self.q = params.q
        self.p = params.p
        self.mu = params.mu
        self._dt_cached = None
        self._ab = None

    def _apply_l(self, psi: np.ndarray) -> np.ndarray:
        out = self.di * psi
        out[:-1] += self.up[:-1] * psi[1:]
        out[1:] += self.lo[1:] * psi[:-1]
        return out

    def _factor(self, dt: float) -> np.ndarray:
        if dt != self._dt_cached:
            z = 0.5j * dt
            ab = np.zeros((3, self.n), dtype=complex)
            ab[0, 1:] = -z * self.up[:-1]
            ab[1, :] = 1.0 - z * self.di
            ab[2, :-1] = -z * self.lo[1:]
            self._ab = ab
            self._dt_cached = dt
        return self._ab

    def _phase(self, psi: np.ndarray, half_dt: float) -> np.ndarray:
        a = np.abs(psi)
        return psi * np.exp(1j * half_dt * (a ** (self.p - 2.0)
                                            + self.mu * a ** (self.q - 2.0)))

    def grad2(self, psi: np.ndarray) -> float:
        diff = np.empty(self.n, dtype=complex)
        diff[:-1] = psi[1:] - psi[:-1]
        diff[-1] = -psi[-1]
        return float(SPHERE_FACTOR[self.dim] / self.dr
                     * np.sum(self.r_up_raw * np.abs(diff) ** 2))

    def step(self, psi: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        out = self._phase(psi, 0.5 * dt)
        rhs = out + 0.5j * dt * self._apply_l(out)
        out = solve_banded((1, 1), self._factor(dt), rhs)
        out = self._phase(out, 0.5 * dt)
        return out, self.grad2(out)


def _make_stepper(w: WaveField, params: ModelParams):
    if w.kind == "periodic":
        return _PeriodicStepper(w, params)
    return _RadialStepper(w, params)


# ----------------------------------------------------------------------
# evolution driver


def _concave_collapse(times: np.ndarray, virial: np.ndarray) -> bool:
    """Quadratic fit to the tail of f(t): concave, decreasing, and visibly so."""
    n = times.size
    if n < 5:
        return False
    k = max(5, n // 4)
    t0 = times[-k:] - times[-k]
    f0 = virial[-k:]
    span = float(t0[-1])
    if span <= 0.0:
        return False
    c2, c1, _ = np.polyfit(t0, f0, 2)
    fscale = float(np.max(np.abs(virial)))
    if fscale <= 0.0:
        return False
    concave = c2 * span * span < -CONCAVITY_RTOL * fscale
    decreasing = 2.0 * c2 * span + c1 < 0.0
    return bool(concave and decreasing)


def evolve(initial: WaveField, params: ModelParams, dt: float, T: float,
           monitors: int = 256,
           observer: Callable[[float, WaveField], None] | None = None,
           ) -> EvolutionTrace:
    """Integrate the flow from a datum, watching for collapse.

    The step shrinks by halving whenever the gradient monitor grows by
    more than GROWTH_FACTOR across one step (the rejected step is
    recomputed at the smaller dt) and doubles back toward the caller's
    dt after CALM_STEPS consecutive quiet steps.  The run stops
    early when the gradient passes its threshold (GRAD_BLOWUP_FACTOR
    times the initial value, capped at the saturation ceiling of the
    grid), when the step underflows DT_FLOOR, or when samples stop being
    finite; the verdict is then decided by the two-of-three signal rule.
    monitors is the number of evenly spaced sample times recorded in the
    trace, and observer (if given) sees the state at each sample.
    """
    if params.N != initial.dim:
        raise ValidationError(
            f"datum dimension {initial.dim} does not match params.N {params.N}")
    dt = float(dt)
    T = float(T)
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValidationError(f"dt must be positive and finite, got {dt}")
    if not (math.isfinite(T) and T > 0.0):
        raise ValidationError(f"T must be positive and finite, got {T}")
    monitors = int(monitors)
    if monitors < 2:
        raise ValidationError("need at least two monitor samples")

    stepper = _make_stepper(initial, params)
    psi = initial.values.copy()
    t = 0.0
    dt_user = dt
    calm = 0
    g0 = stepper.grad2(psi)
    k_nyq = math.pi / initial.spacing
    ceiling = SATURATION_FRACTION * k_nyq * k_nyq * initial.mass2()
    g_limit = min(GRAD_BLOWUP_FACTOR * g0, ceiling) if g0 > 0.0 else math.inf
    g_prev = g0

    targets = np.linspace(0.0, T, monitors)
    rows: list[tuple[float, float, float, float, float, float]] = []

    # per-step second-moment history; monitor samples are far too sparse
    # for the concavity fit when a collapse crosses within a few steps
    x2w = initial.quad_weights() * initial.coords ** 2
    recent: deque[tuple[float, float]] = deque(maxlen=512)
    recent.append((0.0, float(np.sum(x2w * np.abs(psi) ** 2))))

    def record(t_now: float, state: np.ndarray) -> None:
        w = initial.replace_values(state) if np.all(np.isfinite(state)) else None
        if w is None:
            return
        tr = triple_of(w, params)
        rows.append((t_now, tr.mass2, energy(tr, params), tr.grad2,
                     w.second_moment(), pohozaev(tr, params)))
        if observer is not None:
            observer(t_now, w)

    record(0.0, psi)
    next_idx = 1
    s_grad = s_dt = False
    detail = ""
    steps = 0
    halvings = 0

    while t < T * (1.0 - 1e-15):
        dt_step = min(dt, T - t)
        cand, g_mon = stepper.step(psi, dt_step)
        while (math.isfinite(g_mon) and g_mon > GROWTH_FACTOR * g_prev
               and g_mon <= g_limit and dt > DT_FLOOR):
            dt = 0.5 * dt
            halvings += 1
            if dt <= DT_FLOOR:
                s_dt = True
                break
            dt_step = min(dt, T - t)
            cand, g_mon = stepper.step(psi, dt_step)
        psi = cand
        t += dt_step
        steps += 1

        if not math.isfinite(g_mon) or not np.all(np.isfinite(psi)):
            detail = "non-finite samples"
            record(t, cand)
            break
        recent.append((t, float(np.sum(x2w * np.abs(psi) ** 2))))
        if dt < dt_user:
            calm = calm + 1 if g_mon <= CALM_FACTOR * g_prev else 0
            if calm >= CALM_STEPS:
                dt = min(2.0 * dt, dt_user)
                calm = 0
        g_prev = g_mon

        if next_idx < monitors and t >= targets[next_idx] - 1e-12 * T:
            record(t, psi)
            while next_idx < monitors and t >= targets[next_idx] - 1e-12 * T:
                next_idx += 1

        if g_mon > g_limit:
            s_grad = True
        if s_grad or s_dt:
            break
        if halvings >= HALVING_BUDGET:
            detail = "resolution exhausted: step-control budget spent"
            break
        if steps >= MAX_STEPS:
            detail = "step budget exhausted"
            break

    if rows[-1][0] < t:
        record(t, psi)

    arr = np.asarray(rows, dtype=float)
    times, mass2_t, energy_t, grad2_t, virial_t, poho_t = arr.T

    finished = t >= T * (1.0 - 1e-12)
    if finished and not (s_grad or s_dt):
        outcome = Outcome(OutcomeKind.GLOBAL, T, "bounded gradient through T")
    else:
        if s_grad and ceiling < GRAD_BLOWUP_FACTOR * g0 and not detail:
            detail = "gradient reached the grid saturation ceiling"
        dense = np.asarray(recent, dtype=float)
        s_fit = (_concave_collapse(times, virial_t)
                 or _concave_collapse(dense[:, 0], dense[:, 1]))
        fired = [name for name, flag in
                 (("grad2-threshold", s_grad), ("dt-underflow", s_dt),
                  ("virial-fit", s_fit)) if flag]
        note = "signals: " + (", ".join(fired) if fired else "none")
        if detail:
            note += "; " + detail
        if len(fired) >= 2:
            outcome = Outcome(OutcomeKind.BLOW_UP, t, note)
        else:
            outcome = Outcome(OutcomeKind.UNDECIDED, t, note)

    final = initial.replace_values(np.where(np.isfinite(psi), psi, 0.0))
    return EvolutionTrace(times=times, mass2=mass2_t, energy=energy_t,
                          grad2=grad2_t, virial=virial_t, pohozaev=poho_t,
                          outcome=outcome, final_state=final)


# ----------------------------------------------------------------------
# virial identity check


class VirialReport(NamedTuple):
    """Agreement of the second difference of f(t) with 8 P(psi(t))."""

    max_rel: float
    mean_rel: float
    n_compared: int
    ok: bool


VIRIAL_RTOL = 1e-3


def virial_check(trace: EvolutionTrace) -> VirialReport:
    """Check f''(t) = 8 P(psi(t)) on the interior monitor samples.

    Second differences handle the nonuniform sample spacing an adaptive
    run produces.  On a blow-up run the last tenth of the samples before
    the stop is excluded; the identity is only claimed away from the
    collapse.  Relative error is measured against 1 + |8P|.
    """
    times, f, P = trace.times, trace.virial, trace.pohozaev
    n = times.size
    if trace.outcome.kind is OutcomeKind.BLOW_UP:
        keep = times <= 0.9 * trace.outcome.time
        times, f, P = times[keep], f[keep], P[keep]
        n = times.size
    if n < 3:
        raise ValidationError("virial check needs at least three usable samples")
    rels = np.empty(n - 2)
    for i in range(1, n - 1):
        h0 = times[i] - times[i - 1]
        h1 = times[i + 1] - times[i]
        if h0 <= 0.0 or h1 <= 0.0:
            rels[i - 1] = np.nan
            continue
        fpp = 2.0 * (f[i - 1] / (h0 * (h0 + h1))
                     - f[i] / (h0 * h1)
                     + f[i + 1] / (h1 * (h0 + h1)))
        rhs = 8.0 * P[i]
        rels[i - 1] = abs(fpp - rhs) / (1.0 + abs(rhs))
    rels = rels[np.isfinite(rels)]
    if rels.size == 0:
        raise ValidationError("virial check found no usable sample triples")
    max_rel = float(np.max(rels))
    return VirialReport(max_rel=max_rel, mean_rel=float(np.mean(rels)),
                        n_compared=int(rels.size), ok=max_rel < VIRIAL_RTOL)


# ----------------------------------------------------------------------
# dichotomy classification


class Prediction(str, Enum):
    GLOBAL = "Global"
    BLOW_UP = "BlowUp"
    NO_PREDICTION = "NoPrediction"

    def __str__(self) -> str:
        return self.value


class ClassifyReport(NamedTuple):
    """Dichotomy verdict for one datum with the quantities behind it."""

    prediction: Prediction
    t_u: float | None
    energy: float
    level: float | None
    detail: str = ""


_LEVEL_CACHE: dict[ModelParams, float] = {}


def _dichotomy_level(params: ModelParams, gn: ConstantsPair) -> tuple[float | None, str]:
    """inf of E over the P_minus piece, from the stationary solvers.

    The level is the mountain-pass energy on the folded curve and the
    unique-branch energy elsewhere; it is solved once per parameter
    point and cached.  Regimes outside the classified trichotomy get
    (None, reason).
    """
    from .solvers import BranchTag, solve_prescribed_mass

    tag = classify(params).tag
    if tag is RegimeTag.MIXED_FOCUSING:
        rep, branch = cond_mixed(params, gn), BranchTag.MOUNTAIN_PASS
    elif tag is RegimeTag.CRITICAL_PERTURBATION:
        rep, branch = cond_critical(params, gn), BranchTag.UNIQUE
    elif tag is RegimeTag.SUPERCRITICAL_DEFOCUSING:
        rep, branch = cond_defocusing(params, gn), BranchTag.UNIQUE
    else:
        return None, f"regime {tag} has no established dichotomy classifier"
    if not rep.condition_holds:
        return None, (f"threshold inequality fails at this (a, mu): "
                      f"lhs {rep.lhs:.6g} !< rhs {rep.rhs:.6g}")
    if params in _LEVEL_CACHE:
        return _LEVEL_CACHE[params], ""
    level = solve_prescribed_mass(params.a, branch, params).energy_level
    _LEVEL_CACHE[params] = level
    return level, ""


def classify_datum(u: WaveField | RadialField, params: ModelParams,
                   gn: ConstantsPair | None = None) -> ClassifyReport:
    """Predict Global or BlowUp for one datum from its fiber maximum.

    Below the P_minus energy level the fiber map of u has a unique
    global maximum t_u; the flow from u is global when t_u > 0 and
    collapses in finite time when t_u < 0 and u has finite second
    moment.  Everything else (energy at or above the level, t_u inside
    T_ZERO_BAND, a regime without the classified trichotomy, or a datum
    whose tail is too fat to vouch for the second moment) returns
    NoPrediction with the reason in the detail.
    """
    tr = triple_of(u, params)
    a_u = math.sqrt(tr.mass2)
    if abs(a_u - params.a) > MASS_MATCH_RTOL * params.a:
        raise ValidationError(
            f"datum mass {a_u:.9g} does not lie on the sphere of radius "
            f"{params.a:.9g}")
    e_u = energy(tr, params)
    if gn is None:
        gn = constants_pair(params)
    level, why = _dichotomy_level(params, gn)
    if level is None:
        return ClassifyReport(Prediction.NO_PREDICTION, None, e_u, None, why)
    if not e_u < level:
        return ClassifyReport(
            Prediction.NO_PREDICTION, None, e_u, level,
            f"energy precondition fails: E = {e_u:.9g} is not below the "
            f"dividing level {level:.9g}")
    try:
        t_u = fiber_critical_points(tr, params).t_u
    except StructureError as exc:
        return ClassifyReport(Prediction.NO_PREDICTION, None, e_u, level,
                              f"fiber maximum not located: {exc}")
    if abs(t_u) <= T_ZERO_BAND:
        return ClassifyReport(Prediction.NO_PREDICTION, t_u, e_u, level,
                              "t_u vanishes within tolerance; boundary case")
    if t_u > 0.0:
        return ClassifyReport(Prediction.GLOBAL, t_u, e_u, level)
    if isinstance(u, WaveField) and u.boundary_fraction() > BOUNDARY_DECAY_RTOL:
        return ClassifyReport(
            Prediction.NO_PREDICTION, t_u, e_u, level,
            "finite second moment not verifiable: the datum does not decay "
            "at the grid boundary")
    return ClassifyReport(Prediction.BLOW_UP, t_u, e_u, level)


class PredictionReport(NamedTuple):
    """A dichotomy prediction side by side with the observed run."""

    classification: ClassifyReport
    outcome: Outcome
    agree: bool
    trace: EvolutionTrace


def prediction_experiment(u: WaveField, params: ModelParams, dt: float,
                          T: float, monitors: int = 256) -> PredictionReport:
    """Classify a datum, evolve it, and compare verdicts.

    agree means a BlowUp prediction was certified before T, or a Global
    prediction ran bounded through T.  An Undecided run never agrees.
    The datum must be classifiable; use classify_datum directly to probe
    NoPrediction cases.
    """
    rep = classify_datum(u, params)
    if rep.prediction is Prediction.NO_PREDICTION:
        raise ValidationError(f"datum admits no prediction: {rep.detail}")
    trace = evolve(u, params, dt, T, monitors)
    kind = trace.outcome.kind
    agree = ((rep.prediction is Prediction.GLOBAL and kind is OutcomeKind.GLOBAL)
             or (rep.prediction is Prediction.BLOW_UP
                 and kind is OutcomeKind.BLOW_UP))
    return PredictionReport(rep, trace.outcome, agree, trace)


# ----------------------------------------------------------------------
# orbital stability experiment


def _h1_pair(w: WaveField, values: np.ndarray, other: np.ndarray) -> complex:
    """Complex H^1 pairing <f, g> = int f conj(g) + int f' conj(g')."""
    if w.kind == "periodic":
        k = 2.0 * np.pi * np.fft.fftfreq(w.n, d=w.spacing)
        fh = np.fft.fft(values)
        gh = np.fft.fft(other)
        return complex(w.spacing / w.n * np.sum((1.0 + k * k) * fh * np.conj(gh)))
    qw = w.quad_weights()
    l2 = np.sum(qw * values * np.conj(other))
    h = w.spacing
    r_up = SPHERE_FACTOR[w.dim] / h * (w.coords + 0.5 * h) ** (w.dim - 1)
    df = np.empty(w.n, dtype=complex)
    dg = np.empty(w.n, dtype=complex)
    df[:-1] = values[1:] - values[:-1]
    df[-1] = -values[-1]
    dg[:-1] = other[1:] - other[:-1]
    dg[-1] = -other[-1]
    return complex(l2 + np.sum(r_up * df * np.conj(dg)))


def _orbital_distance(w: WaveField, base: WaveField) -> float:
    """min over global phase (and grid shifts on the box) of the H^1 distance."""
    cands = [base.values]
    if w.kind == "periodic":
        # cross-correlation picks the translation; neighbors guard the
        # difference between the L2 peak and the H1 minimum
        cc = np.fft.ifft(np.fft.fft(w.values) * np.conj(np.fft.fft(base.values)))
        m = int(np.argmax(np.abs(cc)))
        cands = [np.roll(base.values, m + d) for d in (-1, 0, 1)]
    norm_w = _h1_pair(w, w.values, w.values).real
    best = math.inf
    for cand in cands:
        norm_c = _h1_pair(w, cand, cand).real
        cross = abs(_h1_pair(w, w.values, cand))
        d2 = norm_w + norm_c - 2.0 * cross
        best = min(best, math.sqrt(max(d2, 0.0)))
    return best


def _smooth_noise(w: WaveField, rng: np.random.Generator, modes: int = 12) -> np.ndarray:
    """Random low-mode complex field, smooth and boundary-compatible."""
    x = w.coords
    out = np.zeros(w.n, dtype=complex)
    if w.kind == "periodic":
        for m in range(-modes, modes + 1):
            c = (rng.standard_normal() + 1j * rng.standard_normal()) / (1.0 + abs(m))
            out += c * np.exp(1j * math.pi * m * x / w.extent)
    else:
        # half-integer cosines: flat at the origin, zero at r = R
        for m in range(modes):
            c = (rng.standard_normal() + 1j * rng.standard_normal()) / (1.0 + m)
            out += c * np.cos(math.pi * (m + 0.5) * x / w.extent)
    return out


def stability_experiment(gs, params: ModelParams, eps: float, T: float,
                         trials: int = 5, dt: float = 1e-3, seed: int = 0,
                         monitors: int = 128, perturbation: str = "noise",
                         extent: float | None = None,
                         points: int | None = None) -> float:
    """Largest orbital H^1 distance reached by perturbed runs.

    With perturbation="noise" each trial perturbs the stationary profile
    by a random smooth field of relative H^1 size eps, rescales the sum
    back to the prescribed mass, evolves it to T, and records the
    supremum over sample times of the distance to the orbit of the
    profile (optimal global phase always; optimal grid translation on
    the periodic box).  perturbation="scale" replaces the noise by the
    deterministic mass-preserving dilation of parameter s = eps (one run;
    positive eps squeezes inward), the probe that detonates unstable
    states.  extent and points override the default evolution box;
    concentrated states need a box whose spacing resolves their core.  A
    run that collapses or ends undecided raises EvolutionError with the
    trace attached: that is evidence against stability, not a number.
    """
    profile = gs.profile if hasattr(gs, "profile") else gs
    if params.N != profile.dim:
        raise ValidationError(
            f"profile dimension {profile.dim} does not match params.N {params.N}")
    eps = float(eps)
    if not math.isfinite(eps):
        raise ValidationError(f"perturbation size must be finite, got {eps}")
    if perturbation not in ("noise", "scale"):
        raise ValidationError(
            f"perturbation must be 'noise' or 'scale', got {perturbation!r}")
    if perturbation == "noise" and eps < 0.0:
        raise ValidationError(f"noise size must be >= 0, got {eps}")
    if trials < 1:
        raise ValidationError("need at least one trial")

    base = from_radial_profile(profile, extent=extent, points=points)
    vals = base.values * (params.a / math.sqrt(base.mass2()))
    base = base.replace_values(vals)
    h1_base = math.sqrt(_h1_pair(base, base.values, base.values).real)

    rng = np.random.default_rng(seed)
    worst = 0.0
    n_runs = 1 if (eps == 0.0 or perturbation == "scale") else trials
    for _ in range(n_runs):
        if eps == 0.0:
            start = base
        elif perturbation == "scale":
            start = scale_datum(base, eps)
        else:
            noise = _smooth_noise(base, rng)
            h1_noise = math.sqrt(_h1_pair(base, noise, noise).real)
            perturbed = base.values + noise * (eps * h1_base / h1_noise)
            start = base.replace_values(perturbed)
            start = start.replace_values(
                start.values * (params.a / math.sqrt(start.mass2())))

        seen = 0.0

        def watch(_t: float, w: WaveField) -> None:
            nonlocal seen
            seen = max(seen, _orbital_distance(w, base))

        trace = evolve(start, params, dt, T, monitors, observer=watch)
        if trace.outcome.kind is not OutcomeKind.GLOBAL:
            raise EvolutionError(
                f"perturbed run did not stay global: {trace.outcome.kind} at "
                f"t = {trace.outcome.time:.6g} ({trace.outcome.detail})",
                trace=trace)
        worst = max(worst, seen)
    return worst
