"""Gaussian scalar kernels and the classical storage-capacity curve.

The central quantity is the Gaussian second-moment functional

    f_gar(kappa) = (1/sqrt(2*pi)) * int_{-kappa}^{inf} (z + kappa)^2 exp(-z^2/2) dz,

whose reciprocal is the storage capacity of the spherical perceptron at
margin ``kappa`` (exact for kappa >= 0, an upper bound for kappa < 0).

Two independent routes to f_gar are provided: adaptive Gauss-Kronrod
quadrature on a truncated interval, and the closed form obtained by
integration by parts,

    f_gar(kappa) = (1 + kappa^2) * Phi(kappa) + kappa * phi(kappa).

The quadrature route is the oracle against which the closed form is
validated; the closed form is the fast path used by the solvers.
"""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

from scipy import integrate, special

SQRT_2 = math.sqrt(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)

# Margins outside this range are clamped (with a warning); the transition
# region of interest is |kappa| <~ 1.5, the wider range exists for testing.
KAPPA_MIN = -10.0
KAPPA_MAX = 10.0


class KappaRangeWarning(UserWarning):
    """Issued when a margin outside [KAPPA_MIN, KAPPA_MAX] is clamped."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class NormalScalars(NamedTuple):
    pdf: float
    cdf: float
    erfc: float


def std_normal(z: float) -> NormalScalars:
    """Standard normal density, CDF and erfc at ``z``.

    All three values are accurate to well below 1e-13 absolute error.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z}")
    pdf = math.exp(-0.5 * z * z) / SQRT_2PI
    cdf = float(special.ndtr(z))
    return NormalScalars(pdf=pdf, cdf=cdf, erfc=float(special.erfc(z)))


def clamp_kappa(kappa: float) -> float:
    """Clamp the margin to the supported range, warning if it was outside."""
    kappa = float(kappa)
    if not math.isfinite(kappa):
        raise ValueError(f"kappa must be finite, got {kappa}")
    if kappa < KAPPA_MIN or kappa > KAPPA_MAX:
        clamped = min(max(kappa, KAPPA_MIN), KAPPA_MAX)
        warnings.warn(
            f"kappa={kappa} outside supported range [{KAPPA_MIN}, {KAPPA_MAX}]; "
            f"clamped to {clamped}",
            KappaRangeWarning,
            stacklevel=3,
        )
        return clamped
    return kappa


def f_gar_quadrature(kappa: float, abs_tol: float = 1e-12) -> float:
    """f_gar(kappa) by adaptive quadrature (the slow, oracle route).

    Integrates (z + kappa)^2 * phi(z) over [-kappa, U] with
    U = |kappa| + 12 and bounds the dropped tail analytically: for
    z >= U >= |kappa| one has (z + kappa)^2 <= 4 z^2, so the tail is at
    most 4 * phi(U) * (U + 1/U) < 1e-14 for U >= 12.

    Raises QuadratureError if the quadrature error estimate exceeds the
    1e-10 budget.
    """
    kappa = clamp_kappa(kappa)
    lo = -kappa
    hi = abs(kappa) + 12.0

    def integrand(z: float) -> float:
        d = z + kappa
        return d * d * math.exp(-0.5 * z * z) / SQRT_2PI

    value, err = integrate.quad(integrand, lo, hi, epsabs=abs_tol, epsrel=0.0, limit=200)
    tail = 4.0 * math.exp(-0.5 * hi * hi) / SQRT_2PI * (hi + 1.0 / hi)
    if err + tail > 1e-10:
        raise QuadratureError(
            f"f_gar quadrature at kappa={kappa}: error estimate {err:.3e} "
            f"+ tail bound {tail:.3e} exceeds 1e-10"
        )
    return float(value)


def f_gar_closed(kappa: float) -> float:
    """f_gar(kappa) = (1 + kappa^2) * Phi(kappa) + kappa * phi(kappa).

    Closed form obtained by integration by parts; validated against
    f_gar_quadrature to 1e-10 over kappa in [-3, 3] (see tests).
    """
    kappa = clamp_kappa(kappa)
    pdf = math.exp(-0.5 * kappa * kappa) / SQRT_2PI
    return float((1.0 + kappa * kappa) * special.ndtr(kappa) + kappa * pdf)


def alpha_c_upper(kappa: float) -> float:
    """Storage-capacity bound 1/f_gar(kappa).

    Exact capacity for kappa >= 0; an upper bound on the capacity for
    kappa < 0. Strictly decreasing in kappa, equal to 2 at kappa = 0.
    """
    return 1.0 / f_gar_closed(kappa)
