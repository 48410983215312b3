"""Threshold estimation and the covariance map of a thresholded Gaussian field.

For x a zero-mean unit-variance Gaussian field and y = 1{x > τ}, the
covariance of y at a lag with Gaussian correlation c_x is

    c_y = ∫_0^{c_x} exp(−τ²/(1+s)) / (2π√(1−s²)) ds.

The substitution s = sin u removes the endpoint singularity, so the
integral is evaluated as (1/2π)∫_0^{arcsin c_x} exp(−τ²/(1+sin u)) du.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.special

logger = logging.getLogger(__name__)

_EDGE = 1e-12


def estimate_threshold(y: np.ndarray) -> float:
    """τ = Φ⁻¹(1 − mean(y)) with Φ the standard normal CDF.

    Raises:
        ValueError: If the field is constant (mean 0 or 1).
    """
    m = float(np.mean(np.asarray(y, dtype=float)))
    if not 0.0 < m < 1.0:
        raise ValueError(f"Binary field mean must lie strictly in (0, 1), got {m}")
    return float(scipy.special.ndtri(1.0 - m))


def _integrand(u: float, tau2: float) -> float:
    den = 1.0 + np.sin(u)
    if den <= 0.0:
        return 0.0 if tau2 > 0.0 else 1.0
    return float(np.exp(-tau2 / den))


def price_forward(cx: float, tau: float) -> float:
    """Covariance of the binary field for Gaussian correlation ``cx``.

    Raises:
        ValueError: If |cx| > 1.
    """
    if abs(cx) > 1.0 + _EDGE:
        raise ValueError(f"Gaussian correlation must lie in [-1, 1], got {cx}")
    cx = float(np.clip(cx, -1.0, 1.0))
    if cx == 0.0:
        return 0.0
    upper = float(np.arcsin(cx))
    value, _ = scipy.integrate.quad(_integrand, 0.0, upper, args=(tau * tau,), epsabs=1e-13, epsrel=1e-12, limit=200)
    return value / (2.0 * np.pi)


def price_range(tau: float) -> tuple[float, float]:
    return price_forward(-1.0, tau), price_forward(1.0, tau)


def price_inverse(cy: float, tau: float) -> float:
    """Gaussian correlation c_x with ``price_forward(c_x, tau) == cy``.

    The forward map is strictly increasing, so the root is bracketed by
    [-1, 1] and found with Brent's method.

    Raises:
        ValueError: If ``cy`` is outside the range of the forward map.
    """
    if cy == 0.0:
        return 0.0
    lo, hi = price_range(tau)
    if not lo - _EDGE <= cy <= hi + _EDGE:
        raise ValueError(f"Binary covariance {cy} outside the attainable range [{lo:.6g}, {hi:.6g}] for tau={tau}")
    if cy >= hi:
        return 1.0
    if cy <= lo:
        return -1.0
    return float(
        scipy.optimize.brentq(lambda x: price_forward(x, tau) - cy, -1.0, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    )
