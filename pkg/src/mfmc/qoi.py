"""Scalar quantities of interest with delta-method uncertainty.

Built-in quantities target the Gumbel high-fidelity family with
theta1 = (mu, sigma): the log10 exceedance probability of a fixed
threshold and an extreme quantile.  Custom quantities wrap a user
function with an optional analytic gradient (finite differences
otherwise).  Point estimates map a fitted parameter vector through the
quantity; the variance propagates the estimator's n-scaled covariance
through the gradient.
"""

import math

import numpy as np
import warnings as _warnings

from scipy import special

from ._optim import fd_gradient
from .errors import MFMCError, ParameterDomainError

LOG10_E = math.log10(math.e)


class QoISpec:
    """A scalar function of theta1 together with its gradient.

    Attributes
    ----------
    kind : str
        "log10-exceedance", "quantile" or "custom".
    params : dict
        Defining constants (threshold a1 or level p1).
    """

    def __init__(self, kind, value, gradient, params):
        self.kind = kind
        self._value = value
        self._gradient = gradient
        self.params = dict(params)

    def value(self, theta1):
        return float(self._value(np.asarray(theta1, dtype=float)))

    def gradient(self, theta1):
        return np.asarray(self._gradient(np.asarray(theta1, dtype=float)), dtype=float)

    def __repr__(self):
        inner = ", ".join(f"{k}={v:.6g}" for k, v in self.params.items())
        return f"QoISpec({self.kind}, {inner})"


def log10_exceedance(a1):
    """log10 P(X > a1) under a Gumbel(mu, sigma) high-fidelity law.

    Evaluated through expm1 so that thresholds deep in the tail do not
    underflow; if 1 - F(a1) underflows to zero at machine precision the
    value is -inf and an overflow warning is emitted.
    """
    a1 = float(a1)

    def tail(theta):
        mu, sigma = theta
        if sigma <= 0.0:
            raise ParameterDomainError("sigma must be positive")
        z = (a1 - mu) / sigma
        w = math.exp(-z)  # -log F(a1)
        return z, w, -math.expm1(-w)

    def value(theta):
        _z, w, surv = tail(theta)
        if surv == 0.0:  # happens exactly when exp(-z) underflows
            _warnings.warn("exceedance probability underflowed to zero; returning -inf",
                           RuntimeWarning, stacklevel=2)
            return -math.inf
        return math.log10(surv)

    def gradient(theta):
        z, w, surv = tail(theta)
        mu, sigma = theta
        if surv == 0.0 or w == 0.0:
            scale = LOG10_E / sigma
            return np.array([scale, z * scale])
        dens = w * math.exp(-w)  # d(1-F)/dz
        scale = dens / (surv * math.log(10.0) * sigma)
        return np.array([scale, z * scale])

    return QoISpec("log10-exceedance", value, gradient, {"a1": a1})


def quantile(p1):
    """Gumbel quantile mu - sigma log(-log p1) as a function of (mu, sigma)."""
    p1 = float(p1)
    if not (0.0 < p1 < 1.0):
        raise ParameterDomainError(f"quantile level must lie in (0, 1), got {p1!r}")
    pull = -math.log(-math.log(p1))

    def value(theta):
        return theta[0] + theta[1] * pull

    def gradient(theta):
        return np.array([1.0, pull])

    return QoISpec("quantile", value, gradient, {"p1": p1})


def custom(func, gradient=None, name="custom", **params):
    """Wrap a user-supplied scalar quantity of theta1.

    Without an analytic gradient, central finite differences with step
    1e-6 (1 + |theta|) are used.
    """
    if gradient is None:
        def gradient(theta):  # noqa: ANN001
            return fd_gradient(lambda t: float(func(t)), theta)

    return QoISpec(name, func, gradient, params)


def qoi_value(spec, theta1):
    """Evaluate a quantity of interest at a parameter vector."""
    return spec.value(theta1)


def qoi_gradient(spec, theta1):
    """Gradient of the quantity in theta1."""
    return spec.gradient(theta1)


class QoIEstimate:
    """Plug-in quantity estimate with delta-method uncertainty."""

    def __init__(self, point, variance, interval, confidence, side, method):
        self.point = point
        self.variance = variance
        self.interval = interval
        self.confidence = confidence
        self.side = side
        self.method = method

    def __repr__(self):
        lo, hi = self.interval
        return (f"QoIEstimate({self.point:.6g}, {self.side} "
                f"{100 * self.confidence:.0f}% [{lo:.6g}, {hi:.6g}])")


def qoi_estimate(spec, estimate, confidence=0.95, side="two-sided"):
    """Plug-in point, delta-method variance and normal-theory interval.

    Parameters
    ----------
    spec : QoISpec
    estimate : Estimate
        Must carry an n-scaled covariance.
    confidence : float
        Coverage level of the interval.
    side : {"two-sided", "lower", "upper"}
        One-sided intervals keep the matching finite endpoint.

    Notes
    -----
    The variance is grad' Sigma grad / n; a zero covariance degenerates
    the interval to the point.
    """
    if estimate.cov is None:
        raise MFMCError("estimate carries no covariance; cannot build an interval")
    if not (0.0 < confidence < 1.0):
        raise ParameterDomainError("confidence must lie in (0, 1)")
    theta = estimate.theta1
    point = spec.value(theta)
    grad = spec.gradient(theta)
    if grad.shape[0] != theta.shape[0]:
        raise MFMCError("gradient dimension does not match the estimate")
    variance = float(grad @ estimate.cov @ grad) / estimate.n
    se = math.sqrt(max(variance, 0.0))
    if side == "two-sided":
        z = float(special.ndtri(0.5 + confidence / 2.0))
        interval = (point - z * se, point + z * se)
    elif side == "lower":
        z = float(special.ndtri(confidence))
        interval = (point - z * se, math.inf)
    elif side == "upper":
        z = float(special.ndtri(confidence))
        interval = (-math.inf, point + z * se)
    else:
        raise ParameterDomainError(f"unknown interval side {side!r}")
    return QoIEstimate(point, variance, interval, confidence, side, estimate.method)
