"""Bivariate copulas: Gaussian, Gumbel-Hougaard (logistic) and independence.

The Gumbel-Hougaard copula is the extreme-value copula of the logistic
Pickands function A(t) = (t**(1/r) + (1-t)**(1/r))**r with r in (0, 1];
r = 1 is independence and r -> 0 approaches perfect positive dependence.
Sampling uses the Marshall-Olkin mixture representation with a
Chambers-Mallows-Stuck positive-stable generator, which is exact and
rejection-free.
"""

import math

import numpy as np
from scipy import special

from ..errors import ParameterDomainError

# independent sampling is numerically indistinguishable beyond this point
R_INDEPENDENT = 0.999


def pickands_logistic(t, r):
    """Logistic Pickands dependence function A(t) on [0, 1].

    Satisfies max(t, 1-t) <= A(t) <= 1, A(0) = A(1) = 1, and is convex.
    """
    if not (0.0 < r <= 1.0):
        raise ParameterDomainError(f"logistic parameter r must lie in (0, 1], got {r!r}")
    t = np.asarray(t, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)):
        raise ParameterDomainError("Pickands argument must lie in [0, 1]")
    if r == 1.0:
        return np.ones_like(t)
    with np.errstate(divide="ignore"):
        # stable via logsumexp of (1/r) log t and (1/r) log (1-t)
        a = np.log(t) / r
        b = np.log1p(-t) / r
        out = np.exp(r * np.logaddexp(a, b))
    return np.where((t <= 0.0) | (t >= 1.0), 1.0, out)


def bvn_cdf(a, b, rho):
    """Standard bivariate normal cdf P(Z1 <= a, Z2 <= b) with correlation rho.

    Computed as the Gauss-Legendre integral of phi(z) * Phi((b - rho z)/s)
    over z <= a, accurate to roughly 1e-13; exact reductions at |rho| = 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (-1.0 <= rho <= 1.0):
        raise ParameterDomainError(f"correlation must lie in [-1, 1], got {rho!r}")
    if rho == 1.0:
        return special.ndtr(np.minimum(a, b))
    if rho == -1.0:
        return np.maximum(special.ndtr(a) + special.ndtr(b) - 1.0, 0.0)
    s = math.sqrt(1.0 - rho * rho)
    lo = -9.0
    hi = np.clip(a, lo, 9.0)
    shape = np.broadcast_shapes(a.shape, b.shape)
    a_b = np.broadcast_to(hi, shape).ravel()
    b_b = np.broadcast_to(b, shape).ravel()
    out = np.empty(a_b.size)
    z, w = np.polynomial.legendre.leggauss(96)
    for i in range(a_b.size):
        if a_b[i] <= lo:
            out[i] = 0.0
            continue
        zz = 0.5 * (a_b[i] - lo) * z + 0.5 * (a_b[i] + lo)
        ww = 0.5 * (a_b[i] - lo) * w
        phi = np.exp(-0.5 * zz * zz) / math.sqrt(2.0 * math.pi)
        out[i] = float(np.sum(ww * phi * special.ndtr((b_b[i] - rho * zz) / s)))
    out = out.reshape(shape)
    if out.ndim == 0:
        return float(out)
    return out


def sample_positive_stable(alpha, size, rng):
    """Positive alpha-stable draws with Laplace transform exp(-t**alpha).

    Chambers-Mallows-Stuck construction for the totally skewed case:
    with T uniform on (0, pi) and W unit exponential,

        V = sin(alpha T) * sin(T)**(-1/alpha)
            * (sin((1 - alpha) T) / W)**((1 - alpha)/alpha).
    """
    if not (0.0 < alpha < 1.0):
        raise ParameterDomainError(f"stable index must lie in (0, 1), got {alpha!r}")
    theta = rng.uniform(0.0, math.pi, size=size)
    w = rng.standard_exponential(size=size)
    log_v = (np.log(np.sin(alpha * theta))
             - np.log(np.sin(theta)) / alpha
             + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * theta)) - np.log(w)))
    return np.exp(log_v)


class Copula:
    """Base class; subclasses implement cdf, the u1-partial and sampling."""

    copula_id = "base"

    @property
    def theta(self):
        raise NotImplementedError

    def cdf(self, u1, u2):
        raise NotImplementedError

    def partial_u1(self, u1, u2):
        """dC/du1, the conditional cdf of U2 given U1 = u1."""
        raise NotImplementedError

    def sample(self, size, rng):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.theta!r})"


def _clip_units(u):
    return np.clip(np.asarray(u, dtype=float), 0.0, 1.0)


class IndependenceCopula(Copula):
    copula_id = "independence"

    @property
    def theta(self):
        return None

    def cdf(self, u1, u2):
        return _clip_units(u1) * _clip_units(u2)

    def partial_u1(self, u1, u2):
        del u1
        return _clip_units(u2)

    def sample(self, size, rng):
        return rng.uniform(size=size), rng.uniform(size=size)


class GaussianCopula(Copula):
    """Gaussian copula with correlation rho in (-1, 1)."""

    copula_id = "gaussian"

    def __init__(self, rho):
        rho = float(rho)
        if not (-1.0 < rho < 1.0):
            raise ParameterDomainError(f"rho must lie in (-1, 1), got {rho!r}")
        self.rho = rho

    @property
    def theta(self):
        return self.rho

    def cdf(self, u1, u2):
        u1 = _clip_units(u1)
        u2 = _clip_units(u2)
        # boundary identities hold exactly
        interior = bvn_cdf(special.ndtri(np.clip(u1, 1e-300, 1.0 - 1e-16)),
                           special.ndtri(np.clip(u2, 1e-300, 1.0 - 1e-16)),
                           self.rho)
        out = np.where((u1 == 0.0) | (u2 == 0.0), 0.0, interior)
        out = np.where(u1 == 1.0, u2, out)
        out = np.where(u2 == 1.0, np.where(u1 == 1.0, 1.0, u1), out)
        if np.ndim(out) == 0:
            return float(out)
        return out

    def partial_u1(self, u1, u2):
        z1 = special.ndtri(_clip_units(u1))
        z2 = special.ndtri(_clip_units(u2))
        s = math.sqrt(1.0 - self.rho**2)
        return special.ndtr((z2 - self.rho * z1) / s)

    def sample(self, size, rng):
        z1 = rng.standard_normal(size)
        z2 = rng.standard_normal(size)
        zc = self.rho * z1 + math.sqrt(1.0 - self.rho**2) * z2
        return special.ndtr(z1), special.ndtr(zc)


class GumbelHougaardCopula(Copula):
    """Gumbel-Hougaard (logistic extreme-value) copula with r in (0, 1]."""

    copula_id = "gumbel-hougaard"

    def __init__(self, r):
        r = float(r)
        if not (0.0 < r <= 1.0):
            raise ParameterDomainError(f"r must lie in (0, 1], got {r!r}")
        self.r = r

    @property
    def theta(self):
        return self.r

    def cdf(self, u1, u2):
        u1 = _clip_units(u1)
        u2 = _clip_units(u2)
        with np.errstate(divide="ignore", invalid="ignore"):
            v1 = -np.log(u1)
            v2 = -np.log(u2)
            s = np.exp(self.r * np.logaddexp(np.log(v1) / self.r, np.log(v2) / self.r))
            interior = np.exp(-s)
        out = np.where((u1 == 0.0) | (u2 == 0.0), 0.0, interior)
        out = np.where(u1 == 1.0, u2, out)
        out = np.where(u2 == 1.0, np.where(u1 == 1.0, 1.0, u1), out)
        if np.ndim(out) == 0:
            return float(out)
        return out

    def partial_u1(self, u1, u2):
        u1 = _clip_units(u1)
        u2 = _clip_units(u2)
        v1 = -np.log(u1)
        v2 = -np.log(u2)
        if self.r == 1.0:
            return u2 * np.ones_like(u1)
        log_s = self.r * np.logaddexp(np.log(v1) / self.r, np.log(v2) / self.r)
        s = np.exp(log_s)
        # dC/du1 = C * s**(1/r - 1)... chain rule through v1 = -log u1
        return np.exp(-s + (1.0 - self.r) / self.r * (np.log(v1) - log_s)) * v1 / (u1 * v1)

    def sample(self, size, rng):
        if self.r > R_INDEPENDENT:
            return rng.uniform(size=size), rng.uniform(size=size)
        v = sample_positive_stable(self.r, size, rng)
        e1 = rng.standard_exponential(size)
        e2 = rng.standard_exponential(size)
        u1 = np.exp(-((e1 / v) ** self.r))
        u2 = np.exp(-((e2 / v) ** self.r))
        return u1, u2

    def log_minus_log_sample(self, size, rng):
        """Draws of (log(-log U1), log(-log U2)), stable deep in both tails."""
        if self.r > R_INDEPENDENT:
            e1 = rng.standard_exponential(size)
            e2 = rng.standard_exponential(size)
            return np.log(e1), np.log(e2)
        v = sample_positive_stable(self.r, size, rng)
        e1 = rng.standard_exponential(size)
        e2 = rng.standard_exponential(size)
        log_v = np.log(v)
        return self.r * (np.log(e1) - log_v), self.r * (np.log(e2) - log_v)


_COPULA_IDS = {
    "gaussian": GaussianCopula,
    "gumbel-hougaard": GumbelHougaardCopula,
    "independence": IndependenceCopula,
}


def copula_from_id(copula_id, *theta):
    try:
        cls = _COPULA_IDS[copula_id]
    except KeyError:
        raise ParameterDomainError(f"unknown copula id {copula_id!r}") from None
    return cls(*theta)


def copula_eval(copula, u1, u2):
    """Value C(u1, u2) of a copula; boundary identities hold exactly."""
    return copula.cdf(u1, u2)
