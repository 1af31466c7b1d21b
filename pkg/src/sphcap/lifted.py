"""Exponentially lifted lower bound on the sphere min-max objective.

For margin kappa and pattern ratio alpha, the scaled optimal value
xi_n / sqrt(n) of

    min_{|x|=1} max_{lambda >= 0, |lambda|=1}  kappa * sum(lambda) - lambda' H x

is bounded below (asymptotically, in expectation) by

    L(c3) = -( -c3/2 + I_sph(c3) + I_per(c3, alpha, kappa) ),

for every c3 >= 0.  L(c3) > 0 for some c3 therefore certifies that random
instances are infeasible with overwhelming probability.  The two
log-moment terms are

    I_sph(c3) = gh - log(1 - c3 / (2*gh)) / (2*c3),
        gh = gamma_hat(c3) = (2*c3 + sqrt(4*c3^2 + 16)) / 8,

    I_per(c3, alpha, kappa)
        = max_{g > 0} [ -g + (alpha/c3) * log E exp(-c3 * max(G+kappa,0)^2 / (4g)) ],

with G standard normal.  The inner expectation has the closed form
implemented in :func:`i_per1_closed`; :func:`i_per1_mc` is an independent
Monte Carlo oracle for it.  As c3 -> 0 the bound degenerates to the
unlifted sqrt(alpha * f_gar(kappa)) - 1, which is positive exactly when
alpha exceeds 1/f_gar(kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .scalars import SQRT_2, SQRT_2PI, clamp_kappa, f_gar_closed

# Below this c3 the exact I_sph expression loses precision to cancellation;
# the three-term series is used instead.
_I_SPH_SERIES_THRESHOLD = 1e-6

# Inner gamma maximization (expanding bracket + golden section).
_GAMMA_BRACKET_LO = 1e-4
_GAMMA_BRACKET_HI = 4.0
_GAMMA_BRACKET_MAX = 1e6
_GAMMA_TOL = 1e-10
_GAMMA_GUARD_POINTS = 64

# Outer c3 maximization grid: {0} plus a log-spaced grid on [1e-4, 16].
_C3_GRID = np.concatenate([[0.0], np.geomspace(1e-4, 16.0, 95)])

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class OptimizationError(RuntimeError):
    """A scalar maximization failed to bracket or refine its optimum."""


@dataclass(frozen=True)
class Iper1Intermediates:
    """Helper quantities of the closed-form Gaussian integral."""

    p: float
    q: float
    r: float
    s: float
    big_c: float


@dataclass(frozen=True)
class BoundEvaluation:
    """One evaluation of the lifted bound L at fixed (c3, alpha, kappa)."""

    c3: float
    gamma_per: float
    gamma_hat: float
    i_sph: float
    i_per: float
    lower_bound: float


def gamma_hat(c3: float) -> float:
    """Sphere-side saddle point (2*c3 + sqrt(4*c3^2 + 16)) / 8.

    Equals 1/2 at c3 = 0 and is strictly increasing; it always satisfies
    1 - c3 / (2 * gamma_hat) > 0, so the logarithm in I_sph is defined.
    """
    if c3 < 0:
        raise ValueError(f"c3 must be nonnegative, got {c3}")
    return (2.0 * c3 + math.sqrt(4.0 * c3 * c3 + 16.0)) / 8.0


def i_sph(c3: float) -> float:
    """Sphere-side log-moment term I_sph(c3); tends to 1 as c3 -> 0.

    For c3 below 1e-6 the series 1 + c3/4 + c3^2/24 is used (the exact
    expression divides log(1-x) ~ -c3 by c3, which cancels catastrophically
    in double precision); both branches agree to 1e-10 at the switch.
    """
    if c3 < 0:
        raise ValueError(f"c3 must be nonnegative, got {c3}")
    if c3 < _I_SPH_SERIES_THRESHOLD:
        return 1.0 + c3 / 4.0 + c3 * c3 / 24.0
    gh = gamma_hat(c3)
    return gh - math.log1p(-c3 / (2.0 * gh)) / (2.0 * c3)


def i_per1_closed(
    c3: float, gamma_per: float, kappa: float
) -> tuple[float, Iper1Intermediates]:
    """Closed form of E exp(-c3 * max(G + kappa, 0)^2 / (4 * gamma_per)).

    Completing the square in the Gaussian integral over the event
    G > -kappa gives, with

        p = 1 + c3 / (2*gamma_per),
        q = c3 * kappa / (2*gamma_per),
        r = c3 * kappa^2 / (4*gamma_per),
        s = -kappa*sqrt(p) + q/sqrt(p),
        C = exp(q^2/(2p) - r) / sqrt(p),

    the value  erfc(kappa/sqrt(2))/2 + (C/2) * erfc(s/sqrt(2)).

    The exponent q^2/(2p) - r simplifies to -kappa^2 (p-1) / (2p), which
    lies in (-kappa^2/2, 0], and s = -kappa/sqrt(p); no overflow is
    possible for any c3, gamma_per > 0.
    """
    if c3 <= 0:
        raise ValueError(f"c3 must be positive, got {c3}")
    if gamma_per <= 0:
        raise ValueError(f"gamma_per must be positive, got {gamma_per}")
    p = 1.0 + c3 / (2.0 * gamma_per)
    q = c3 * kappa / (2.0 * gamma_per)
    r = c3 * kappa * kappa / (4.0 * gamma_per)
    sqrt_p = math.sqrt(p)
    s = -kappa * sqrt_p + q / sqrt_p
    big_c = math.exp(q * q / (2.0 * p) - r) / sqrt_p
    value = 0.5 * float(special.erfc(kappa / SQRT_2)) + 0.5 * big_c * float(
        special.erfc(s / SQRT_2)
    )
    return value, Iper1Intermediates(p=p, q=q, r=r, s=s, big_c=big_c)


def _i_per1_values(c3: float, gammas: np.ndarray, kappa: float) -> np.ndarray:
    """Vectorized i_per1_closed values over an array of gamma_per."""
    p = 1.0 + c3 / (2.0 * gammas)
    sqrt_p = np.sqrt(p)
    s = -kappa / sqrt_p
    big_c = np.exp(-kappa * kappa * (p - 1.0) / (2.0 * p)) / sqrt_p
    return 0.5 * special.erfc(kappa / SQRT_2) + 0.5 * big_c * special.erfc(s / SQRT_2)


def i_per1_mc(
    c3: float,
    gamma_per: float,
    kappa: float,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo oracle for i_per1_closed: sample mean and standard error.

    Deterministic for a fixed seed; samples are drawn in fixed-size chunks
    so memory stays bounded for large n_samples.
    """
    if c3 <= 0 or gamma_per <= 0:
        raise ValueError("c3 and gamma_per must be positive")
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    rng = np.random.default_rng(seed)
    scale = c3 / (4.0 * gamma_per)
    total = 0.0
    total_sq = 0.0
    remaining = int(n_samples)
    chunk = 2_000_000
    while remaining > 0:
        k = min(chunk, remaining)
        g = rng.standard_normal(k)
        np.add(g, kappa, out=g)
        np.maximum(g, 0.0, out=g)
        vals = np.exp(-scale * g * g)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        remaining -= k
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    std_error = math.sqrt(var / n_samples)
    return mean, std_error


def _golden_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> tuple[float, float]:
    """Golden-section maximization of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def i_per(c3: float, alpha: float, kappa: float) -> tuple[float, float]:
    """Optimized perceptron-side term and its maximizer gamma_star.

    Maximizes  -g + (alpha/c3) * log(i_per1_closed(c3, g, kappa))  over
    g > 0 by expanding the bracket [1e-4, 4] until the objective decays at
    the upper end, scanning a 64-point coarse grid as a unimodality guard,
    then refining with golden section to 1e-10.  The value is <= 0.

    Raises OptimizationError if no enclosing bracket is found below
    gamma_per = 1e6 or the coarse-grid argmax escapes the refined bracket.
    """
    if c3 <= 0:
        raise ValueError(f"c3 must be positive, got {c3}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    kappa = clamp_kappa(kappa)
    ratio = alpha / c3

    def objective(g: float) -> float:
        return -g + ratio * math.log(_i_per1_values(c3, np.asarray(g), kappa))

    lo = _GAMMA_BRACKET_LO
    hi = _GAMMA_BRACKET_HI
    while objective(hi) >= objective(hi / 2.0):
        hi *= 2.0
        if hi > _GAMMA_BRACKET_MAX:
            raise OptimizationError(
                f"gamma bracket expansion exceeded {_GAMMA_BRACKET_MAX} at "
                f"(c3={c3}, alpha={alpha}, kappa={kappa})"
            )
    # The objective tends to (alpha/c3)*log(Phi(-kappa)) < -gamma* as g -> 0+,
    # so expand the lower end too if the coarse scan peaks at the left edge.
    grid = np.geomspace(lo, hi, _GAMMA_GUARD_POINTS)
    vals = -grid + ratio * np.log(_i_per1_values(c3, grid, kappa))
    while int(np.argmax(vals)) == 0 and lo > 1e-14:
        lo /= 16.0
        grid = np.geomspace(lo, hi, _GAMMA_GUARD_POINTS)
        vals = -grid + ratio * np.log(_i_per1_values(c3, grid, kappa))
    idx = int(np.argmax(vals))
    if idx == 0 or idx == len(grid) - 1:
        raise OptimizationError(
            f"coarse gamma scan peaked at the bracket edge for "
            f"(c3={c3}, alpha={alpha}, kappa={kappa})"
        )
    gamma_star, value = _golden_max(objective, grid[idx - 1], grid[idx + 1], _GAMMA_TOL)
    return value, gamma_star


def lower_bound_L(c3: float, alpha: float, kappa: float) -> BoundEvaluation:
    """Evaluate the lifted bound L(c3) = -(-c3/2 + I_sph + I_per).

    At c3 = 0 the analytic limit applies: L = sqrt(alpha*f_gar(kappa)) - 1
    with gamma_per -> sqrt(alpha*f_gar(kappa))/2 and gamma_hat = 1/2.
    A positive L certifies infeasibility with overwhelming probability.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    kappa = clamp_kappa(kappa)
    if c3 == 0.0:
        root = math.sqrt(alpha * f_gar_closed(kappa))
        return BoundEvaluation(
            c3=0.0,
            gamma_per=root / 2.0,
            gamma_hat=0.5,
            i_sph=1.0,
            i_per=-root,
            lower_bound=root - 1.0,
        )
    value_per, gamma_star = i_per(c3, alpha, kappa)
    sph = i_sph(c3)
    return BoundEvaluation(
        c3=c3,
        gamma_per=gamma_star,
        gamma_hat=gamma_hat(c3),
        i_sph=sph,
        i_per=value_per,
        lower_bound=-(-c3 / 2.0 + sph + value_per),
    )


def infeasibility_condition(alpha: float, kappa: float) -> tuple[bool, BoundEvaluation]:
    """Maximize L over c3 >= 0 and report whether the bound certifies
    infeasibility (max L > 0).

    The c3 = 0 analytic limit is always a candidate, so the verdict is
    never weaker than the unlifted alpha > 1/f_gar(kappa) criterion.
    """
    evals = [lower_bound_L(0.0, alpha, kappa)]
    positive = _C3_GRID[1:]
    grid_vals = [lower_bound_L(c, alpha, kappa) for c in positive]
    evals.extend(grid_vals)
    best = max(evals, key=lambda ev: ev.lower_bound)
    if best.c3 > 0.0:
        i = int(np.argmax([ev.lower_bound for ev in grid_vals]))
        lo = positive[i - 1] if i > 0 else positive[0] / 2.0
        hi = positive[i + 1] if i + 1 < len(positive) else positive[-1] * 2.0
        c3_ref, _ = _golden_max(
            lambda c: lower_bound_L(c, alpha, kappa).lower_bound, lo, hi, 1e-9
        )
        refined = lower_bound_L(c3_ref, alpha, kappa)
        if refined.lower_bound > best.lower_bound:
            best = refined
    return best.lower_bound > 0.0, best
