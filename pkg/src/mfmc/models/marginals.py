"""Univariate parametric families: Gaussian, Gumbel and Bernoulli.

Each family bundles the cdf, quantile, log-density (or log-mass), the
analytic score and Hessian in the parameters, the Fisher information, a
moment formulation (feature map h, inverse map g and its Jacobian G) and an
inverse-cdf sampler.  Family objects are immutable; fitted or perturbed
variants are produced with :meth:`MarginalFamily.with_theta`.
"""

import math

import numpy as np
from scipy import special

from ..errors import DegenerateMomentsError, ParameterDomainError

# Euler-Mascheroni constant, shared by every Gumbel moment formula
EULER_GAMMA = float(np.euler_gamma)

SQRT_6_OVER_PI = math.sqrt(6.0) / math.pi


class MarginalFamily:
    """Base class for univariate parametric families.

    Subclasses define ``family_id``, the parameter vector ``theta`` (length
    ``d``), and the probability functions below.  All array arguments are
    vectorized.
    """

    family_id = "base"
    d = 0
    is_discrete = False

    @property
    def theta(self):
        raise NotImplementedError

    def with_theta(self, theta):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, p):
        """Quantile function; inverse of :meth:`cdf` on the support."""
        raise NotImplementedError

    def logpdf(self, x):
        """Log-density, or log-mass for discrete families."""
        raise NotImplementedError

    def score(self, x):
        """Gradient of the log-density in theta, shape (..., d)."""
        raise NotImplementedError

    def hessian(self, x):
        """Hessian of the log-density in theta, shape (..., d, d)."""
        raise NotImplementedError

    def fisher_information(self):
        """Expected information matrix at the family's own parameters."""
        raise NotImplementedError

    def sample(self, size, rng):
        """Inverse-cdf draws; identical rng state gives identical output."""
        return self.ppf(rng.uniform(size=size))

    def moment_spec(self):
        """Moment formulation (h, g, G) of this family's parameters."""
        raise NotImplementedError

    def fit_ml(self, x, weights=None):
        """Weighted maximum likelihood estimate of theta; closed form where known."""
        raise NotImplementedError

    def support_box(self):
        """Interval holding essentially all probability mass (for grids)."""
        return self.ppf(1e-12), self.ppf(1.0 - 1e-12)

    def __repr__(self):
        vals = ", ".join(f"{v:.6g}" for v in np.atleast_1d(self.theta))
        return f"{type(self).__name__}({vals})"


def _check_positive(value, name):
    if not np.isfinite(value) or value <= 0.0:
        raise ParameterDomainError(f"{name} must be positive, got {value!r}")
    return float(value)


class Gaussian(MarginalFamily):
    """Gaussian family parameterized by (mu, var)."""

    family_id = "gaussian"
    d = 2

    def __init__(self, mu, var):
        self.mu = float(mu)
        self.var = _check_positive(var, "var")
        self.sigma = math.sqrt(self.var)

    @property
    def theta(self):
        return np.array([self.mu, self.var])

    def with_theta(self, theta):
        return Gaussian(theta[0], theta[1])

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma)

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise ParameterDomainError("quantile level must lie in (0, 1)")
        return self.mu + self.sigma * special.ndtri(p)

    def logpdf(self, x):
        z2 = (np.asarray(x, dtype=float) - self.mu) ** 2 / self.var
        return -0.5 * (math.log(2.0 * math.pi * self.var) + z2)

    def score(self, x):
        x = np.asarray(x, dtype=float)
        dmu = (x - self.mu) / self.var
        dvar = 0.5 * ((x - self.mu) ** 2 / self.var - 1.0) / self.var
        return np.stack([dmu, dvar], axis=-1)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        r = x - self.mu
        h = np.empty(x.shape + (2, 2))
        h[..., 0, 0] = -1.0 / self.var
        h[..., 0, 1] = h[..., 1, 0] = -r / self.var**2
        h[..., 1, 1] = 0.5 / self.var**2 - r**2 / self.var**3
        return h

    def fisher_information(self):
        return np.diag([1.0 / self.var, 0.5 / self.var**2])

    def moment_spec(self):
        return gaussian_moment_spec()

    def fit_ml(self, x, weights=None):
        x = np.asarray(x, dtype=float)
        w = _uniform_weights(x.size) if weights is None else np.asarray(weights, dtype=float)
        mu = float(np.sum(w * x))
        var = float(np.sum(w * (x - mu) ** 2))
        return np.array([mu, var])


class Gumbel(MarginalFamily):
    """Gumbel (type-I extreme value) family parameterized by (mu, sigma).

    cdf F(x) = exp(-exp(-(x - mu)/sigma)), the classical block-maximum law.
    """

    family_id = "gumbel"
    d = 2

    def __init__(self, mu, sigma):
        self.mu = float(mu)
        self.sigma = _check_positive(sigma, "sigma")

    @property
    def theta(self):
        return np.array([self.mu, self.sigma])

    def with_theta(self, theta):
        return Gumbel(theta[0], theta[1])

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.mu) / self.sigma

    def cdf(self, x):
        return np.exp(-np.exp(-self._z(x)))

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise ParameterDomainError("quantile level must lie in (0, 1)")
        return self.mu - self.sigma * np.log(-np.log(p))

    def logpdf(self, x):
        z = self._z(x)
        return -np.log(self.sigma) - z - np.exp(-z)

    def score(self, x):
        z = self._z(x)
        e = np.exp(-z)
        dmu = (1.0 - e) / self.sigma
        dsig = -(1.0 - z + z * e) / self.sigma
        return np.stack([dmu, dsig], axis=-1)

    def hessian(self, x):
        z = self._z(x)
        e = np.exp(-z)
        h = np.empty(np.shape(z) + (2, 2))
        h[..., 0, 0] = -e / self.sigma**2
        h[..., 0, 1] = h[..., 1, 0] = -(1.0 - e + z * e) / self.sigma**2
        h[..., 1, 1] = (1.0 - 2.0 * z * (1.0 - e) - z**2 * e) / self.sigma**2
        return h

    def fisher_information(self):
        g1 = EULER_GAMMA - 1.0
        return (np.array([[1.0, g1], [g1, g1**2 + math.pi**2 / 6.0]])
                / self.sigma**2)

    def moment_spec(self):
        return gumbel_moment_spec()

    def fit_ml(self, x, weights=None):
        # moment warm start, then bounded quasi-Newton on (mu, log sigma)
        from .. import _optim

        x = np.asarray(x, dtype=float)
        w = _uniform_weights(x.size) if weights is None else np.asarray(weights, dtype=float)
        start = gumbel_moment_spec().g(np.array([np.sum(w * x), np.sum(w * x**2)]))

        def nll(u):
            fam = Gumbel(u[0], math.exp(u[1]))
            return -float(np.sum(w * fam.logpdf(x)))

        def grad(u):
            fam = Gumbel(u[0], math.exp(u[1]))
            s = fam.score(x)
            g_mu = -float(np.sum(w * s[..., 0]))
            g_logsig = -float(np.sum(w * s[..., 1])) * fam.sigma
            return np.array([g_mu, g_logsig])

        u = _optim.minimize(nll, np.array([start[0], math.log(start[1])]),
                            grad=grad, simplex=False)
        return np.array([u[0], math.exp(u[1])])


class GumbelLocation(MarginalFamily):
    """Gumbel family with known scale; theta is the location alone."""

    family_id = "gumbel-location"
    d = 1

    def __init__(self, mu, sigma):
        self.mu = float(mu)
        self.sigma = _check_positive(sigma, "sigma")
        self._full = Gumbel(self.mu, self.sigma)

    @property
    def theta(self):
        return np.array([self.mu])

    def with_theta(self, theta):
        return GumbelLocation(np.atleast_1d(theta)[0], self.sigma)

    def cdf(self, x):
        return self._full.cdf(x)

    def ppf(self, p):
        return self._full.ppf(p)

    def logpdf(self, x):
        return self._full.logpdf(x)

    def score(self, x):
        return self._full.score(x)[..., :1]

    def hessian(self, x):
        return self._full.hessian(x)[..., :1, :1]

    def fisher_information(self):
        return np.array([[1.0 / self.sigma**2]])

    def moment_spec(self):
        return gumbel_location_moment_spec(self.sigma)

    def fit_ml(self, x, weights=None):
        # stationarity in mu alone has the closed form
        # mu = sigma * log(n / sum exp(-x_i/sigma)) for uniform weights
        x = np.asarray(x, dtype=float)
        w = _uniform_weights(x.size) if weights is None else np.asarray(weights, dtype=float)
        lse = special.logsumexp(-x / self.sigma, b=w)
        return np.array([-self.sigma * lse])


class Bernoulli(MarginalFamily):
    """Bernoulli family on {0, 1} with success probability p."""

    family_id = "bernoulli"
    d = 1
    is_discrete = True

    def __init__(self, p):
        p = float(p)
        if not (0.0 < p < 1.0) or not np.isfinite(p):
            raise ParameterDomainError(f"p must lie in (0, 1), got {p!r}")
        self.p = p

    @property
    def theta(self):
        return np.array([self.p])

    def with_theta(self, theta):
        return Bernoulli(np.atleast_1d(theta)[0])

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0.0, 0.0, np.where(x < 1.0, 1.0 - self.p, 1.0))

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise ParameterDomainError("quantile level must lie in (0, 1)")
        return np.where(p <= 1.0 - self.p, 0.0, 1.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x != 0.0) & (x != 1.0)):
            raise ParameterDomainError("Bernoulli observations must be 0 or 1")
        return x * math.log(self.p) + (1.0 - x) * math.log1p(-self.p)

    def score(self, x):
        x = np.asarray(x, dtype=float)
        return ((x - self.p) / (self.p * (1.0 - self.p)))[..., None]

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        h = -x / self.p**2 - (1.0 - x) / (1.0 - self.p) ** 2
        return h[..., None, None]

    def fisher_information(self):
        return np.array([[1.0 / (self.p * (1.0 - self.p))]])

    def support_box(self):
        return 0.0, 1.0

    def moment_spec(self):
        return bernoulli_moment_spec()

    def fit_ml(self, x, weights=None):
        x = np.asarray(x, dtype=float)
        w = _uniform_weights(x.size) if weights is None else np.asarray(weights, dtype=float)
        return np.array([float(np.sum(w * x))])


def _uniform_weights(n):
    return np.full(n, 1.0 / n)


class MomentSpec:
    """Moment formulation theta = g(E h(X)) of a parameter vector.

    Attributes
    ----------
    d1 : int
        Number of moment features (and parameters).
    h : callable
        Feature map; maps (n,) observations to an (n, d1) feature array.
    g : callable
        Maps a d1-vector of population feature means to theta.
    jacobian : callable
        G = dg/dy evaluated at a d1-vector of feature means.
    """

    def __init__(self, d1, h, g, jacobian, name):
        self.d1 = d1
        self.h = h
        self.g = g
        self.jacobian = jacobian
        self.name = name

    def __repr__(self):
        return f"MomentSpec({self.name}, d1={self.d1})"


def _variance_feature(mu_y):
    v = mu_y[1] - mu_y[0] ** 2
    if v <= 0.0:
        raise DegenerateMomentsError(
            f"second moment minus squared mean is not positive ({v!r})")
    return v


def gaussian_moment_spec():
    def h(x):
        x = np.asarray(x, dtype=float)
        return np.stack([x, x**2], axis=-1)

    def g(mu_y):
        return np.array([mu_y[0], _variance_feature(mu_y)])

    def jacobian(mu_y):
        return np.array([[1.0, 0.0], [-2.0 * mu_y[0], 1.0]])

    return MomentSpec(2, h, g, jacobian, "gaussian")


def gumbel_moment_spec():
    def h(x):
        x = np.asarray(x, dtype=float)
        return np.stack([x, x**2], axis=-1)

    def g(mu_y):
        sigma = SQRT_6_OVER_PI * math.sqrt(_variance_feature(mu_y))
        return np.array([mu_y[0] - EULER_GAMMA * sigma, sigma])

    def jacobian(mu_y):
        root = math.sqrt(_variance_feature(mu_y))
        ds_dy1 = -SQRT_6_OVER_PI * mu_y[0] / root
        ds_dy2 = SQRT_6_OVER_PI / (2.0 * root)
        return np.array([[1.0 - EULER_GAMMA * ds_dy1, -EULER_GAMMA * ds_dy2],
                         [ds_dy1, ds_dy2]])

    return MomentSpec(2, h, g, jacobian, "gumbel")


def gumbel_location_moment_spec(sigma):
    sigma = _check_positive(sigma, "sigma")

    def h(x):
        return np.asarray(x, dtype=float)[..., None]

    def g(mu_y):
        return np.array([mu_y[0] - EULER_GAMMA * sigma])

    def jacobian(mu_y):
        return np.array([[1.0]])

    return MomentSpec(1, h, g, jacobian, "gumbel-location")


def bernoulli_moment_spec():
    def h(x):
        return np.asarray(x, dtype=float)[..., None]

    def g(mu_y):
        return np.array([mu_y[0]])

    def jacobian(mu_y):
        return np.array([[1.0]])

    return MomentSpec(1, h, g, jacobian, "bernoulli")


_FAMILY_IDS = {
    "gaussian": Gaussian,
    "gumbel": Gumbel,
    "gumbel-location": GumbelLocation,
    "bernoulli": Bernoulli,
}


def family_from_id(family_id, *params):
    """Instantiate a family from its string id and raw parameter values."""
    try:
        cls = _FAMILY_IDS[family_id]
    except KeyError:
        raise ParameterDomainError(f"unknown family id {family_id!r}") from None
    return cls(*params)


def moment_map(family):
    """Moment formulation of a family given as an instance or a family id.

    String ids resolve to the family's default spec; ``gumbel-location``
    needs a fixed scale and therefore requires an instance.
    """
    if isinstance(family, MarginalFamily):
        return family.moment_spec()
    if family == "gaussian":
        return gaussian_moment_spec()
    if family == "gumbel":
        return gumbel_moment_spec()
    if family == "bernoulli":
        return bernoulli_moment_spec()
    raise ParameterDomainError(
        f"no default moment formulation for {family!r}; pass a family instance")


def marginal_eval(family, x):
    """Evaluate (cdf, log-density, score, hessian) of a family at x."""
    return family.cdf(x), family.logpdf(x), family.score(x), family.hessian(x)


def marginal_quantile(family, p):
    """Quantile of a marginal family at probability p."""
    return family.ppf(p)
