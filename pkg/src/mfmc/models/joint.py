"""Bivariate parametric models coupling a high- and a low-fidelity margin.

Four models are provided:

* ``BivariateGaussian`` with correlation ``rho``;
* ``BivariateGumbelLogistic`` with the logistic dependence parameter ``r``
  (cdf exp{-(z1 + z2) A(z1/(z1+z2))} with z_j = exp{-(x_j-mu_j)/sigma_j});
* ``BernoulliCopula``: indicator margins coupled through a copula on the
  driving uniforms;
* ``BernoulliMixture``: X1 = Ber(p Y), X2 = Ber(Y) conditionally independent
  given a mixing variable Y on (0, 1).

All models are immutable; ``replace`` builds modified copies.  Parameter
scores and Hessians default to central finite differences of the log-density
(relative step 1e-6 for first, 1e-4 for second differences).
"""

import math

import numpy as np

from .. import _optim
from ..errors import MFMCError, ParameterDomainError
from ..quadrature import adaptive_01
from .copulas import (GaussianCopula, GumbelHougaardCopula, IndependenceCopula,
                      pickands_logistic)
from .marginals import Bernoulli, Gaussian, Gumbel


class JointModel:
    """Base class; subclasses define parameters, log-density and sampler."""

    model_id = "base"
    theta1_names = ()
    theta2_names = ()
    dep_names = ()
    is_discrete = False

    def get_param(self, name):
        return getattr(self, name)

    def replace(self, **kwargs):
        params = {n: getattr(self, n) for n in self.param_names()}
        params.update(kwargs)
        return type(self)(**params)

    @classmethod
    def param_names(cls):
        return cls.theta1_names + cls.theta2_names + cls.dep_names

    @property
    def theta1(self):
        return np.array([getattr(self, n) for n in self.theta1_names])

    @property
    def theta2(self):
        return np.array([getattr(self, n) for n in self.theta2_names])

    @property
    def theta12(self):
        if not self.dep_names:
            return None
        return float(getattr(self, self.dep_names[0]))

    @property
    def marginal1(self):
        raise NotImplementedError

    @property
    def marginal2(self):
        raise NotImplementedError

    def logpdf(self, x1, x2):
        raise NotImplementedError

    def sample(self, size, rng):
        raise NotImplementedError

    def transform(self, name):
        """Unconstrained reparameterization used by likelihood optimizers."""
        return _optim.Unbounded()

    def score_params(self, names, x1, x2):
        """Pointwise score in the named parameters; finite differences by
        default, with analytic overrides on the continuous models."""
        return joint_score_fd(self, x1, x2, names)

    def __repr__(self):
        vals = ", ".join(f"{n}={getattr(self, n):.6g}" for n in self.param_names())
        return f"{type(self).__name__}({vals})"


def joint_log_density(model, x1, x2, wrt=None):
    """Log-density with finite-difference score and Hessian in parameters.

    Parameters
    ----------
    model : JointModel
    x1, x2 : array_like
        Evaluation points.
    wrt : sequence of str, optional
        Parameter names to differentiate; defaults to theta1 plus the
        dependence parameter.

    Returns
    -------
    (logpdf, score, hessian)
        Arrays of shapes (n,), (n, k) and (n, k, k).
    """
    names = tuple(wrt) if wrt is not None else model.theta1_names + model.dep_names
    value = model.logpdf(x1, x2)
    return value, joint_score_fd(model, x1, x2, names), joint_hessian_fd(model, x1, x2, names)


def joint_score_fd(model, x1, x2, names, rel_step=_optim.FD_STEP):
    """Central finite-difference score of log f in the named parameters."""
    cols = []
    for name in names:
        v = float(getattr(model, name))
        h = rel_step * (1.0 + abs(v))
        up = model.replace(**{name: v + h}).logpdf(x1, x2)
        dn = model.replace(**{name: v - h}).logpdf(x1, x2)
        cols.append((up - dn) / (2.0 * h))
    return np.stack(cols, axis=-1)


def joint_hessian_fd(model, x1, x2, names, rel_step=_optim.FD_STEP2):
    """Central finite-difference Hessian of log f in the named parameters."""
    k = len(names)
    base = np.asarray(model.logpdf(x1, x2))
    out = np.empty(base.shape + (k, k))
    steps = [rel_step * (1.0 + abs(float(getattr(model, n)))) for n in names]

    def shifted(deltas):
        kwargs = {n: float(getattr(model, n)) + d for n, d in zip(names, deltas) if d}
        return np.asarray(model.replace(**kwargs).logpdf(x1, x2))

    for i in range(k):
        di = np.zeros(k)
        di[i] = steps[i]
        out[..., i, i] = (shifted(di) - 2.0 * base + shifted(-di)) / steps[i] ** 2
        for j in range(i):
            dj = np.zeros(k)
            dj[j] = steps[j]
            mixed = (shifted(di + dj) - shifted(di - dj)
                     - shifted(-di + dj) + shifted(-di - dj)) / (4.0 * steps[i] * steps[j])
            out[..., i, j] = out[..., j, i] = mixed
    return out


class BivariateGaussian(JointModel):
    """Bivariate Gaussian with margins (mu_j, var_j) and correlation rho."""

    model_id = "bivariate-gaussian"
    theta1_names = ("mu1", "var1")
    theta2_names = ("mu2", "var2")
    dep_names = ("rho",)

    RHO_BOUND = 1.0 - 1e-6

    def __init__(self, mu1, var1, mu2, var2, rho):
        self.mu1 = float(mu1)
        self.var1 = float(var1)
        self.mu2 = float(mu2)
        self.var2 = float(var2)
        rho = float(rho)
        if not (-1.0 < rho < 1.0):
            raise ParameterDomainError(f"rho must lie in (-1, 1), got {rho!r}")
        if var1 <= 0.0 or var2 <= 0.0:
            raise ParameterDomainError("variances must be positive")
        self.rho = rho

    @property
    def marginal1(self):
        return Gaussian(self.mu1, self.var1)

    @property
    def marginal2(self):
        return Gaussian(self.mu2, self.var2)

    def transform(self, name):
        if name in ("var1", "var2"):
            return _optim.LogPositive()
        if name == "rho":
            return _optim.Interval(-self.RHO_BOUND, self.RHO_BOUND)
        return _optim.Unbounded()

    def logpdf(self, x1, x2):
        s1 = math.sqrt(self.var1)
        s2 = math.sqrt(self.var2)
        a = (np.asarray(x1, dtype=float) - self.mu1) / s1
        b = (np.asarray(x2, dtype=float) - self.mu2) / s2
        om = 1.0 - self.rho**2
        quad = (a * a - 2.0 * self.rho * a * b + b * b) / om
        return -math.log(2.0 * math.pi * s1 * s2) - 0.5 * math.log(om) - 0.5 * quad

    def sample(self, size, rng):
        z1 = rng.standard_normal(size)
        z2 = rng.standard_normal(size)
        x1 = self.mu1 + math.sqrt(self.var1) * z1
        x2 = self.mu2 + math.sqrt(self.var2) * (self.rho * z1
                                                + math.sqrt(1.0 - self.rho**2) * z2)
        return x1, x2

    def score_params(self, names, x1, x2):
        s1 = math.sqrt(self.var1)
        s2 = math.sqrt(self.var2)
        rho = self.rho
        om = 1.0 - rho**2
        a = (np.asarray(x1, dtype=float) - self.mu1) / s1
        b = (np.asarray(x2, dtype=float) - self.mu2) / s2
        cols = {
            "mu1": (a - rho * b) / (s1 * om),
            "mu2": (b - rho * a) / (s2 * om),
            "var1": (-1.0 + a * (a - rho * b) / om) / (2.0 * self.var1),
            "var2": (-1.0 + b * (b - rho * a) / om) / (2.0 * self.var2),
            "rho": (rho / om
                    + (a * b * (1.0 + rho**2) - rho * (a**2 + b**2)) / om**2),
        }
        return np.stack([np.broadcast_to(cols[n], a.shape) for n in names], axis=-1)


class BivariateGumbelLogistic(JointModel):
    """Bivariate Gumbel distribution with the logistic Pickands function.

    The joint cdf is exp{-(z1 + z2) A(z1/(z1 + z2))} with
    z_j = exp{-(x_j - mu_j)/sigma_j}; for the logistic family this collapses
    to exp{-S**r} with S = z1**(1/r) + z2**(1/r).  The log-density below is
    the analytic mixed partial of the cdf:

        f = exp(-S^r) (z1 z2)^{1/r} S^{r-2} (S^r + (1-r)/r) / (sigma1 sigma2),

    which at r = 1 factorizes into the two Gumbel marginal densities.
    """

    model_id = "bivariate-gumbel-logistic"
    theta1_names = ("mu1", "sigma1")
    theta2_names = ("mu2", "sigma2")
    dep_names = ("r",)

    R_MIN = 1e-3

    def __init__(self, mu1, sigma1, mu2, sigma2, r):
        self.mu1 = float(mu1)
        self.sigma1 = float(sigma1)
        self.mu2 = float(mu2)
        self.sigma2 = float(sigma2)
        r = float(r)
        if sigma1 <= 0.0 or sigma2 <= 0.0:
            raise ParameterDomainError("scales must be positive")
        if not (0.0 < r <= 1.0):
            raise ParameterDomainError(f"r must lie in (0, 1], got {r!r}")
        self.r = r

    @property
    def marginal1(self):
        return Gumbel(self.mu1, self.sigma1)

    @property
    def marginal2(self):
        return Gumbel(self.mu2, self.sigma2)

    @property
    def copula(self):
        return GumbelHougaardCopula(self.r)

    def transform(self, name):
        if name in ("sigma1", "sigma2"):
            return _optim.LogPositive()
        if name == "r":
            return _optim.Interval(self.R_MIN, 1.0)
        return _optim.Unbounded()

    def cdf(self, x1, x2):
        z1 = np.exp(-(np.asarray(x1, dtype=float) - self.mu1) / self.sigma1)
        z2 = np.exp(-(np.asarray(x2, dtype=float) - self.mu2) / self.sigma2)
        t = z1 / (z1 + z2)
        return np.exp(-(z1 + z2) * pickands_logistic(t, self.r))

    def logpdf(self, x1, x2):
        r = self.r
        u1 = (np.asarray(x1, dtype=float) - self.mu1) / self.sigma1
        u2 = (np.asarray(x2, dtype=float) - self.mu2) / self.sigma2
        log_s = np.logaddexp(-u1 / r, -u2 / r)       # log(z1^{1/r} + z2^{1/r})
        a = r * log_s                                 # log S^r
        v = np.exp(a)
        if r < 1.0:
            tail = np.logaddexp(a, math.log((1.0 - r) / r))
        else:
            tail = a
        return (-v - (u1 + u2) / r + (r - 2.0) * log_s + tail
                - math.log(self.sigma1 * self.sigma2))

    def sample(self, size, rng):
        l1, l2 = self.copula.log_minus_log_sample(size, rng)
        return self.mu1 - self.sigma1 * l1, self.mu2 - self.sigma2 * l2

    def score_params(self, names, x1, x2):
        r = self.r
        u1 = (np.asarray(x1, dtype=float) - self.mu1) / self.sigma1
        u2 = (np.asarray(x2, dtype=float) - self.mu2) / self.sigma2
        log_s = np.logaddexp(-u1 / r, -u2 / r)
        v = np.exp(r * log_s)
        c = (1.0 - r) / r
        d = v + c
        w1 = np.exp(-u1 / r - log_s)
        w2 = np.exp(-u2 / r - log_s)
        # d log f / d u_j, with the Jacobians of u_j applied per parameter
        g1 = v * w1 - 1.0 / r - (r - 2.0) * w1 / r - v * w1 / d
        g2 = v * w2 - 1.0 / r - (r - 2.0) * w2 / r - v * w2 / d
        cols = {}
        if "mu1" in names or "sigma1" in names:
            cols["mu1"] = -g1 / self.sigma1
            cols["sigma1"] = -g1 * u1 / self.sigma1 - 1.0 / self.sigma1
        if "mu2" in names or "sigma2" in names:
            cols["mu2"] = -g2 / self.sigma2
            cols["sigma2"] = -g2 * u2 / self.sigma2 - 1.0 / self.sigma2
        if "r" in names:
            p = u1 * w1 + u2 * w2
            dv = v * (log_s + p / r)
            cols["r"] = (-dv + (u1 + u2) / r**2 + log_s
                         + (r - 2.0) * p / r**2 + (dv - 1.0 / r**2) / d)
        return np.stack([np.broadcast_to(cols[n], u1.shape) for n in names],
                        axis=-1)


class BernoulliCopula(JointModel):
    """Indicator margins X_j = 1{U_j <= p_j} with copula-coupled uniforms.

    The four-cell mass function is determined by C(p1, p2):
    P(1,1) = C, P(1,0) = p1 - C, P(0,1) = p2 - C, P(0,0) = 1 - p1 - p2 + C.
    """

    model_id = "bernoulli-copula"
    theta1_names = ("p1",)
    theta2_names = ("p2",)
    dep_names = ("dep",)
    is_discrete = True

    def __init__(self, p1, p2, copula_id="independence", dep=None):
        p1 = float(p1)
        p2 = float(p2)
        if not (0.0 < p1 < 1.0 and 0.0 < p2 < 1.0):
            raise ParameterDomainError("cell probabilities require p1, p2 in (0, 1)")
        self.p1 = p1
        self.p2 = p2
        self.copula_id = copula_id
        if copula_id == "independence":
            self.dep = None
            self.copula = IndependenceCopula()
        elif copula_id == "gaussian":
            self.dep = float(dep)
            self.copula = GaussianCopula(self.dep)
        elif copula_id == "gumbel-hougaard":
            self.dep = float(dep)
            self.copula = GumbelHougaardCopula(self.dep)
        else:
            raise ParameterDomainError(f"unknown copula id {copula_id!r}")

    def replace(self, **kwargs):
        params = {"p1": self.p1, "p2": self.p2,
                  "copula_id": self.copula_id, "dep": self.dep}
        params.update(kwargs)
        return BernoulliCopula(**params)

    @classmethod
    def param_names(cls):
        return ("p1", "p2", "dep")

    @property
    def theta12(self):
        return self.dep

    @property
    def marginal1(self):
        return Bernoulli(self.p1)

    @property
    def marginal2(self):
        return Bernoulli(self.p2)

    def transform(self, name):
        if name in ("p1", "p2"):
            return _optim.Interval(1e-9, 1.0 - 1e-9)
        if name == "dep" and self.copula_id == "gaussian":
            return _optim.Interval(-1.0 + 1e-6, 1.0 - 1e-6)
        if name == "dep" and self.copula_id == "gumbel-hougaard":
            return _optim.Interval(1e-3, 1.0)
        return _optim.Unbounded()

    def cell_probabilities(self):
        """Joint mass over (x1, x2) cells as a 2x2 array indexed [x1, x2]."""
        c = float(self.copula.cdf(self.p1, self.p2))
        cells = np.array([[1.0 - self.p1 - self.p2 + c, self.p2 - c],
                          [self.p1 - c, c]])
        if np.any(cells < -1e-12):
            raise ParameterDomainError("copula induced a negative cell probability")
        return np.clip(cells, 0.0, 1.0)

    def cell_dp1(self):
        """Derivative of each cell probability in p1, indexed like the cells."""
        c1 = float(self.copula.partial_u1(self.p1, self.p2))
        return np.array([[c1 - 1.0, -c1], [1.0 - c1, c1]])

    def logpdf(self, x1, x2):
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        cells = self.cell_probabilities()
        with np.errstate(divide="ignore"):
            logcells = np.log(cells)
        return logcells[x1.astype(int), x2.astype(int)]

    def sample(self, size, rng):
        u1, u2 = self.copula.sample(size, rng)
        return (u1 <= self.p1).astype(float), (u2 <= self.p2).astype(float)


class BernoulliMixture(JointModel):
    """Conditionally independent indicators driven by a mixing variable.

    Given Y on (0, 1) with density f_Y and mean p2, X1 = Ber(p Y) and
    X2 = Ber(Y) independently given Y.  The estimand is the scalar p; the
    X1 margin is Bernoulli(p * p2).  Cell probabilities integrate the
    conditional product mass against f_Y (closed form for uniform Y).
    """

    model_id = "bernoulli-mixture"
    theta1_names = ("p",)
    theta2_names = ()
    dep_names = ()
    is_discrete = True

    def __init__(self, p, density=None, p2=None, y_sampler=None):
        p = float(p)
        if not (0.0 < p < 1.0):
            raise ParameterDomainError(f"p must lie in (0, 1), got {p!r}")
        self.p = p
        self.density = density
        self.y_sampler = y_sampler
        if density is None:
            self.p2 = 0.5
            # E[Y^(1+x2) (1-Y)^(1-x2)] for x2 = 0, 1 under uniform Y
            self._m = np.array([1.0 / 6.0, 1.0 / 3.0])
        else:
            self.p2 = float(p2) if p2 is not None else adaptive_01(
                lambda y: y * np.asarray(density(y), dtype=float))
            self._m = np.array([
                adaptive_01(lambda y: y * (1.0 - y) * np.asarray(density(y), dtype=float)),
                adaptive_01(lambda y: y * y * np.asarray(density(y), dtype=float)),
            ])
        if not (0.0 < self.p2 < 1.0):
            raise ParameterDomainError("mixing density must have mean in (0, 1)")

    def replace(self, **kwargs):
        params = {"p": self.p, "density": self.density,
                  "p2": None if self.density is None else self.p2,
                  "y_sampler": self.y_sampler}
        params.update(kwargs)
        return BernoulliMixture(**params)

    @classmethod
    def param_names(cls):
        return ("p",)

    @property
    def marginal1(self):
        return Bernoulli(self.p * self.p2)

    @property
    def marginal2(self):
        return Bernoulli(self.p2)

    def transform(self, name):
        return _optim.Interval(1e-9, 1.0 - 1e-9)

    def cell_probabilities(self):
        """Joint mass over (x1, x2) cells as a 2x2 array indexed [x1, x2]."""
        if self.density is None:
            p = self.p
            cells = np.array([[0.5 - p / 6.0, 0.5 - p / 3.0],
                              [p / 6.0, p / 3.0]])
        else:
            f = self.density

            def cell(x1, x2):
                def integrand(y):
                    y = np.asarray(y, dtype=float)
                    c1 = np.where(x1 == 1, self.p * y, 1.0 - self.p * y)
                    c2 = np.where(x2 == 1, y, 1.0 - y)
                    return c1 * c2 * np.asarray(f(y), dtype=float)

                return adaptive_01(integrand)

            cells = np.array([[cell(0, 0), cell(0, 1)],
                              [cell(1, 0), cell(1, 1)]])
        if np.any(cells <= 0.0):
            raise ParameterDomainError("mixture cell probabilities must be positive")
        return cells

    def cell_dp(self):
        """Derivative of the cells in p; independent of p itself."""
        m = self._m
        return np.array([[-m[0], -m[1]], [m[0], m[1]]])

    def conditional_covariance_mean(self):
        """E[cov(X1, X2 | Y)]; zero by conditional independence."""
        return 0.0

    def covariance(self):
        """cov(X1, X2) from the cells: P(1,1) - (p p2) p2 = p var(Y)."""
        cells = self.cell_probabilities()
        return float(cells[1, 1] - (self.p * self.p2) * self.p2)

    def logpdf(self, x1, x2):
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        logcells = np.log(self.cell_probabilities())
        return logcells[x1.astype(int), x2.astype(int)]

    def sample(self, size, rng):
        if self.y_sampler is not None:
            y = np.asarray(self.y_sampler(rng, size), dtype=float)
        elif self.density is None:
            y = rng.uniform(size=size)
        else:
            raise MFMCError("custom mixing density requires a y_sampler")
        x1 = (rng.uniform(size=size) <= self.p * y).astype(float)
        x2 = (rng.uniform(size=size) <= y).astype(float)
        return x1, x2


_MODEL_IDS = {
    "bivariate-gaussian": BivariateGaussian,
    "bivariate-gumbel-logistic": BivariateGumbelLogistic,
    "bernoulli-copula": BernoulliCopula,
    "bernoulli-mixture": BernoulliMixture,
}


def model_from_id(model_id, **params):
    try:
        cls = _MODEL_IDS[model_id]
    except KeyError:
        raise ParameterDomainError(f"unknown model id {model_id!r}") from None
    return cls(**params)


def sample_joint(model, size, rng):
    """Draw i.i.d. pairs from a joint model.

    ``rng`` may be an integer seed or a numpy Generator; an integer always
    reproduces the same sample bit for bit.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return model.sample(size, rng)
