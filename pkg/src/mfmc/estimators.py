"""Baseline and multi-fidelity point estimators of the high-fidelity parameters.

Every estimator is a pure function of (dataset, model/family, mode) and
returns an :class:`Estimate` carrying the point value, an n-scaled
asymptotic covariance, the sample sizes and (for the combined estimators)
the coefficient record.  Weighted variants take normalized importance
weights; uniform weights travel down the same code path as an unweighted
call.

Modes for the combined estimators:

* ``"plugin"`` - coefficients from paired-block sample moments (one sample
  keeps the ratio estimates stable and the variance records PSD);
* ``"true"`` - coefficients from population moments of a supplied model;
* an explicit array - fixed coefficients.

``m_infinity=True`` replaces the n+m low-fidelity statistics by their
known population values (requires a model), which is the estimator used
when the low-fidelity parameters are treated as known.
"""

import math

import numpy as np
from scipy import stats

from . import _optim, asymptotics
from ._coeffs import MomentMatrices, mf_sigma, optimal_alpha
from .errors import (DataError, DegenerateDataError, MFMCError,
                     ParameterDomainError)
from .models.joint import BivariateGaussian, JointModel
from .models.marginals import (Bernoulli, Gaussian, Gumbel, MarginalFamily,
                               moment_map)

MF_METHODS = frozenset({"mfmc-mean", "moment-mf", "marginal-ml-mf"})
KNOWN_METHODS = frozenset({"baseline-ml", "baseline-moment", "joint-ml",
                           "joint-ml-closed", "regression-ml"}) | MF_METHODS


class Estimate:
    """Point estimate plus n-scaled asymptotic covariance.

    Attributes
    ----------
    method : str
        Method tag, e.g. ``"moment-mf"``.
    theta1 : ndarray
        Estimated high-fidelity parameters.
    cov : ndarray or None
        Symmetric PSD matrix such that cov / n estimates var(theta1).
    n, m : int
        Paired and extra low-fidelity sample sizes.
    theta2, theta12 : optional
        Low-fidelity and dependence estimates where the method produces them.
    coefficients : dict or None
        Combination coefficients; present exactly for the combined methods.
    warnings : tuple of str
    """

    def __init__(self, method, theta1, cov, n, m, theta2=None, theta12=None,
                 coefficients=None, warnings=()):
        if method not in KNOWN_METHODS:
            raise ParameterDomainError(f"unknown method tag {method!r}")
        if (coefficients is not None) != (method in MF_METHODS):
            raise MFMCError(
                f"coefficient record must be present exactly for combined methods; "
                f"method={method!r}")
        self.method = method
        self.theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
        self.cov = None if cov is None else self._check_cov(np.asarray(cov, dtype=float))
        self.n = int(n)
        self.m = int(m)
        self.theta2 = None if theta2 is None else np.atleast_1d(np.asarray(theta2, dtype=float))
        self.theta12 = None if theta12 is None else float(theta12)
        self.coefficients = coefficients
        self.warnings = tuple(warnings)

    def _check_cov(self, cov):
        cov = np.atleast_2d(cov)
        scale = 1.0 + float(np.max(np.abs(cov)))
        if np.max(np.abs(cov - cov.T)) > 1e-8 * scale:
            raise MFMCError("asymptotic covariance must be symmetric")
        eigs = np.linalg.eigvalsh(cov)
        if np.min(eigs) < -1e-8 * scale:
            raise MFMCError(f"asymptotic covariance must be PSD; eigenvalues {eigs}")
        return cov

    def standard_errors(self):
        """Per-component standard errors sqrt(diag(cov) / n)."""
        if self.cov is None:
            raise MFMCError("no covariance was computed for this estimate")
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None) / self.n)

    def __repr__(self):
        return (f"Estimate({self.method}, theta1={np.array2string(self.theta1, precision=6)}, "
                f"n={self.n}, m={self.m})")


# ---------------------------------------------------------------------------
# weighted-moment helpers (all means use explicit weight vectors so a
# uniform-weight call is bitwise identical to an unweighted one)

def _wmean(x, w):
    return float(np.sum(w * x))

def _wcov(x, y, w):
    mx = _wmean(x, w)
    my = _wmean(y, w)
    return float(np.sum(w * (x - mx) * (y - my)))


def _wcov_matrix(a, b, wa):
    """Weighted cross-covariance of feature matrices a (n,da) and b (n,db)."""
    ma = wa @ a
    mb = wa @ b
    return (a - ma).T @ ((b - mb) * wa[:, None])


def _family_template(family):
    if isinstance(family, MarginalFamily):
        return family
    if family == "gaussian":
        return Gaussian(0.0, 1.0)
    if family == "gumbel":
        return Gumbel(0.0, 1.0)
    if family == "bernoulli":
        return Bernoulli(0.5)
    raise ParameterDomainError(
        f"unknown family {family!r} (a location-only family needs an instance)")


def _require_variation(x, what):
    if float(np.max(x) - np.min(x)) == 0.0:
        raise DegenerateDataError(f"{what} are constant; estimation is degenerate")


# ---------------------------------------------------------------------------
# combined mean

def mfmc_mean(dataset, alpha="optimal", mu2_known=None):
    """Combined mean estimator x1_bar + alpha (x2_bar_all - x2_bar_paired).

    Parameters
    ----------
    dataset : MFDataset
    alpha : "optimal" or float
        "optimal" plugs sample covariance over variance from the data.
    mu2_known : float, optional
        Known low-fidelity mean; replaces the n+m block average (the
        known-parameter limit of the estimator).

    Notes
    -----
    The variance record is var(X1) - (m/(n+m)) (2 a c - a^2 v) with plug-in
    moments; with ``mu2_known`` the factor is 1.
    """
    ds = dataset
    w = ds.paired_weights()
    x1bar = _wmean(ds.x1, w)
    x2bar_n = _wmean(ds.x2, w)
    v1 = _wcov(ds.x1, ds.x1, w)
    c12 = _wcov(ds.x1, ds.x2, w)
    v2_paired = _wcov(ds.x2, ds.x2, w)
    if alpha == "optimal":
        if v2_paired <= 0.0:
            raise DegenerateDataError(
                "low-fidelity paired values are constant; optimal alpha undefined")
        a = c12 / v2_paired
    else:
        a = float(alpha)
    if mu2_known is not None:
        target = float(mu2_known)
        factor = 1.0
        v2 = v2_paired
    else:
        w_all = ds.all_low_weights()
        target = _wmean(ds.x2_all, w_all)
        factor = ds.m / (ds.n + ds.m) if ds.m else 0.0
        v2 = _wcov(ds.x2_all, ds.x2_all, w_all) if ds.m else v2_paired
    point = x1bar + a * (target - x2bar_n)
    var = v1 - factor * (2.0 * a * c12 - a**2 * v2)
    return Estimate("mfmc-mean", [point], [[max(var, 0.0)]], ds.n, ds.m,
                    coefficients={"alpha": a})


# ---------------------------------------------------------------------------
# baselines

def baseline_ml(x, family, weights=None):
    """Maximum likelihood on high-fidelity values alone.

    The covariance record is the inverse expected information at the fit.
    """
    template = _family_template(family)
    x = np.asarray(x, dtype=float)
    if x.size < max(2, template.d):
        raise DataError(f"need at least {max(2, template.d)} observations, got {x.size}")
    if not template.is_discrete:
        _require_variation(x, "high-fidelity values")
    w = np.full(x.size, 1.0 / x.size) if weights is None else np.asarray(weights, dtype=float)
    theta = template.fit_ml(x, w)
    fitted = template.with_theta(theta)
    cov = np.linalg.inv(fitted.fisher_information())
    return Estimate("baseline-ml", theta, cov, x.size, 0)


def baseline_moment(x, spec, weights=None):
    """Moment estimator g(weighted feature means) with delta-method variance."""
    x = np.asarray(x, dtype=float)
    w = np.full(x.size, 1.0 / x.size) if weights is None else np.asarray(weights, dtype=float)
    feats = np.atleast_2d(spec.h(x))
    mu_y = w @ feats
    theta = spec.g(mu_y)
    jac = spec.jacobian(mu_y)
    c_hh = _wcov_matrix(feats, feats, w)
    cov = jac @ c_hh @ jac.T
    return Estimate("baseline-moment", theta, cov, x.size, 0)


# ---------------------------------------------------------------------------
# joint maximum likelihood

def _pack(model, names):
    return np.array([model.transform(n).to_real(float(getattr(model, n)))
                     for n in names])


def _unpack(model, names, vec):
    return {n: float(model.transform(n).to_natural(v)) for n, v in zip(names, vec)}


def _joint_warm_start(model, ds):
    """Cheap consistent values to seed the likelihood search."""
    updates = {}
    w = ds.paired_weights()
    if isinstance(model, BivariateGaussian):
        spec = moment_map("gaussian")
        t1 = spec.g(w @ np.atleast_2d(spec.h(ds.x1)))
        w_all = ds.all_low_weights()
        t2 = spec.g(w_all @ np.atleast_2d(spec.h(ds.x2_all)))
        r = _wcov(ds.x1, ds.x2, w) / math.sqrt(
            _wcov(ds.x1, ds.x1, w) * _wcov(ds.x2, ds.x2, w))
        updates = {"mu1": t1[0], "var1": t1[1], "mu2": t2[0], "var2": t2[1],
                   "rho": float(np.clip(r, -0.99, 0.99))}
    elif model.model_id == "bivariate-gumbel-logistic":
        spec = moment_map("gumbel")
        t1 = spec.g(w @ np.atleast_2d(spec.h(ds.x1)))
        w_all = ds.all_low_weights()
        t2 = spec.g(w_all @ np.atleast_2d(spec.h(ds.x2_all)))
        tau = stats.kendalltau(ds.x1, ds.x2).statistic
        r0 = float(np.clip(1.0 - (tau if np.isfinite(tau) else 0.4), 5e-3, 0.999))
        updates = {"mu1": t1[0], "sigma1": t1[1], "mu2": t2[0], "sigma2": t2[1],
                   "r": r0}
    elif model.model_id == "bernoulli-copula":
        updates = {"p1": float(np.clip(_wmean(ds.x1, w), 1e-3, 1 - 1e-3)),
                   "p2": float(np.clip(_wmean(ds.x2_all, ds.all_low_weights()),
                                       1e-3, 1 - 1e-3))}
    elif model.model_id == "bernoulli-mixture":
        p0 = _wmean(ds.x1, w) / model.p2
        updates = {"p": float(np.clip(p0, 1e-3, 1 - 1e-3))}
    return model.replace(**updates)


def _boundary_warnings(model, names):
    out = []
    for n in names:
        tr = model.transform(n)
        if isinstance(tr, _optim.Interval):
            v = float(getattr(model, n))
            span = tr.hi - tr.lo
            if v - tr.lo < 1e-4 * span or tr.hi - v < 1e-4 * span:
                out.append(f"parameter {n} pinned near its domain boundary "
                           f"({v:.6g} in [{tr.lo:.6g}, {tr.hi:.6g}])")
    return out


def joint_ml(dataset, model, theta2_mode="free", compute_cov=True,
             cov_dependence="estimated"):
    """Joint maximum likelihood over the bivariate model.

    Parameters
    ----------
    dataset : MFDataset
    model : JointModel
        Template carrying the family structure; its parameter values seed
        nothing (a moment warm start is derived from the data) except in
        ``known`` mode, where theta2 is fixed at the model's values.
    theta2_mode : {"free", "known"}
        ``free`` maximizes over (theta1, theta2, dependence) using both
        blocks; ``known`` fixes theta2 and maximizes (theta1, dependence)
        over the paired block.
    compute_cov : bool
        Covariance needs an expected-information pass; skip it in
        replication studies.
    cov_dependence : {"estimated", "known"}
        Parameters entering the reported information matrix.

    Notes
    -----
    The covariance record treats the low-fidelity parameters as known (the
    limit of very large m) and is flagged accordingly in free mode.
    """
    if not isinstance(model, JointModel):
        raise ParameterDomainError("model must be a JointModel")
    ds = dataset
    start = _joint_warm_start(model, ds)
    dep_names = model.dep_names
    if theta2_mode == "known":
        free_names = model.theta1_names + dep_names
        start = start.replace(**{n: getattr(model, n) for n in model.theta2_names})
    elif theta2_mode == "free":
        free_names = model.theta1_names + model.theta2_names + dep_names
    else:
        raise ParameterDomainError(f"unknown theta2 mode {theta2_mode!r}")

    w = ds.paired_weights()
    n, m = ds.n, ds.m
    use_extra = theta2_mode == "free" and m > 0
    if use_extra:
        w_extra = (np.full(m, 1.0 / m) if ds.weights_extra is None
                   else ds.weights_extra)

    def neg_mean_loglik(vec):
        trial = start.replace(**_unpack(start, free_names, vec))
        total = n * float(np.sum(w * trial.logpdf(ds.x1, ds.x2)))
        if use_extra:
            total += m * float(np.sum(w_extra * trial.marginal2.logpdf(ds.x2_extra)))
        if not np.isfinite(total):
            return 1e12
        return -total / (n + m)

    theta2_idx = {name: i for i, name in enumerate(model.theta2_names)}

    def neg_mean_loglik_grad(vec):
        trial = start.replace(**_unpack(start, free_names, vec))
        scores = trial.score_params(free_names, ds.x1, ds.x2)
        g = -n * (w @ scores)
        if use_extra:
            s2 = np.atleast_2d(trial.marginal2.score(ds.x2_extra))
            for k, name in enumerate(free_names):
                if name in theta2_idx:
                    g[k] -= m * float(np.sum(w_extra * s2[:, theta2_idx[name]]))
        g /= (n + m)
        # chain rule through the unconstrained reparameterizations
        for k, name in enumerate(free_names):
            g[k] *= trial.transform(name).scale_at(float(getattr(trial, name)))
        if not np.all(np.isfinite(g)):
            return np.zeros_like(g)
        return g

    x_opt = _optim.minimize(neg_mean_loglik, _pack(start, free_names),
                            grad=neg_mean_loglik_grad)
    fitted = start.replace(**_unpack(start, free_names, x_opt))
    warnings = _boundary_warnings(fitted, dep_names)
    if theta2_mode == "free":
        warnings.append("covariance assumes known low-fidelity parameters")

    cov = None
    if compute_cov:
        try:
            cov = asymptotics.asym_cov("joint-ml", fitted, dependence=cov_dependence)
        except MFMCError as exc:
            warnings.append(f"covariance unavailable: {exc}")
    return Estimate("joint-ml", fitted.theta1, cov, n, m,
                    theta2=fitted.theta2 if model.theta2_names else None,
                    theta12=fitted.theta12, warnings=warnings)


def gaussian_joint_ml_closed(dataset, compute_cov=True):
    """Closed-form joint Gaussian maximum likelihood with extra low-fi data.

    The location update is x1_bar + b (x2_bar_all - x2_bar_paired) with b
    the paired-sample regression slope; scale and correlation updates reuse
    the same slope.  Requires non-constant paired low-fidelity values.
    """
    ds = dataset
    w = ds.paired_weights()
    w_all = ds.all_low_weights()
    s2n = _wcov(ds.x2, ds.x2, w)
    if s2n <= 0.0:
        raise DegenerateDataError("paired low-fidelity values are constant")
    beta = _wcov(ds.x1, ds.x2, w) / s2n
    mu2 = _wmean(ds.x2_all, w_all)
    var2 = _wcov(ds.x2_all, ds.x2_all, w_all)
    mu1 = _wmean(ds.x1, w) + beta * (mu2 - _wmean(ds.x2, w))
    var1 = _wcov(ds.x1, ds.x1, w) + beta**2 * (var2 - s2n)
    if var1 <= 0.0 or var2 <= 0.0:
        raise DegenerateDataError("degenerate fitted variances")
    rho = beta * math.sqrt(var2) / math.sqrt(var1)
    fitted = BivariateGaussian(mu1, var1, mu2, var2,
                               float(np.clip(rho, -1 + 1e-12, 1 - 1e-12)))
    cov = None
    if compute_cov:
        cov = asymptotics.asym_cov("joint-ml", fitted)
    return Estimate("joint-ml-closed", [mu1, var1], cov, ds.n, ds.m,
                    theta2=[mu2, var2], theta12=rho,
                    warnings=("covariance assumes known low-fidelity parameters",))


def regression_route_gaussian(dataset, compute_cov=False):
    """Gaussian fit through the conditional-regression factorization.

    Fits x1 = a + b x2 + eps on the paired block and the x2 margin on all
    n + m values, then recombines mu1 = a + b mu2 and
    var1 = b^2 var2 + var(eps).  Serves as an independent route to the
    closed-form joint fit.
    """
    ds = dataset
    w = ds.paired_weights()
    s2n = _wcov(ds.x2, ds.x2, w)
    if s2n <= 0.0:
        raise DegenerateDataError("paired low-fidelity values are constant")
    b = _wcov(ds.x1, ds.x2, w) / s2n
    a = _wmean(ds.x1, w) - b * _wmean(ds.x2, w)
    sig_eps = _wcov(ds.x1, ds.x1, w) - b**2 * s2n
    w_all = ds.all_low_weights()
    mu2 = _wmean(ds.x2_all, w_all)
    var2 = _wcov(ds.x2_all, ds.x2_all, w_all)
    mu1 = a + b * mu2
    var1 = b**2 * var2 + sig_eps
    if var1 <= 0.0 or var2 <= 0.0:
        raise DegenerateDataError("degenerate fitted variances")
    rho = b * math.sqrt(var2) / math.sqrt(var1)
    fitted = BivariateGaussian(mu1, var1, mu2, var2,
                               float(np.clip(rho, -1 + 1e-12, 1 - 1e-12)))
    cov = None
    if compute_cov:
        cov = asymptotics.asym_cov("joint-ml", fitted)
    return Estimate("regression-ml", [mu1, var1], cov, ds.n, ds.m,
                    theta2=[mu2, var2], theta12=rho,
                    warnings=("covariance assumes known low-fidelity parameters",))


# ---------------------------------------------------------------------------
# combined moment estimation

def _plugin_moment_matrices(ds, spec):
    """Paired-sample feature moment matrices.

    All blocks come from the one paired sample: the coefficient solve then
    benefits from the error cancellation of same-sample ratio estimators
    (an all-block low-fidelity variance would be individually more precise
    but destabilizes the solve badly at small n), and any combination
    assembled from one sample covariance stays positive semidefinite.
    """
    w = ds.paired_weights()
    h1 = np.atleast_2d(spec.h(ds.x1))
    h2 = np.atleast_2d(spec.h(ds.x2))
    h2_all = np.atleast_2d(spec.h(ds.x2_all))
    c_hh = _wcov_matrix(h1, h1, w)
    c_hl = _wcov_matrix(h1, h2, w)
    c_ll = _wcov_matrix(h2, h2, w)
    return MomentMatrices(c_hh, c_hl, c_ll), h1, h2, h2_all


def _resolve_alpha_rows(alpha, d1):
    arr = np.asarray(alpha, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 1:
        if arr.size != d1:
            raise ParameterDomainError("fixed alpha must have one entry per feature")
        return np.tile(arr, (d1, 1))
    if arr.shape != (d1, d1):
        raise ParameterDomainError("fixed alpha matrix must be d1 x d1 (rows per component)")
    return arr


def moment_mf(dataset, spec, alpha="plugin", model=None, m_infinity=False,
              compute_cov=True):
    """Combined moment estimator with per-component coefficient vectors.

    For each component l the feature means are combined with the vector
    alpha(l) minimizing that component's delta-method variance, the map
    Jacobian being evaluated at the baseline (coefficient-free) feature
    means and held constant.

    Parameters
    ----------
    dataset : MFDataset
    spec : MomentSpec
    alpha : {"plugin", "true"} or array
    model : JointModel, required for ``alpha="true"`` or ``m_infinity``
    m_infinity : bool
        Use the model's population low-fidelity feature means in place of
        the n+m block average (known-parameter limit).
    """
    ds = dataset
    w = ds.paired_weights()
    mm_plug, h1, h2, h2_all = _plugin_moment_matrices(ds, spec)
    mu_hat_baseline = w @ h1
    mode = alpha if isinstance(alpha, str) else "fixed"
    if (mode == "true" or m_infinity) and model is None:
        raise ParameterDomainError("alpha='true' and m_infinity need a model")
    if mode == "true":
        mm = asymptotics.moment_matrices(model, spec)
        jac = spec.jacobian(asymptotics.true_feature_means(model, spec))
        rows = np.array([optimal_alpha(mm, jac, l) for l in range(spec.d1)])
    elif mode == "plugin":
        mm = mm_plug
        jac = spec.jacobian(mu_hat_baseline)
        rows = np.array([optimal_alpha(mm, jac, l) for l in range(spec.d1)])
    elif mode == "fixed":
        mm = mm_plug
        jac = spec.jacobian(mu_hat_baseline)
        rows = _resolve_alpha_rows(alpha, spec.d1)
    else:
        raise ParameterDomainError(f"unexpected coefficient mode {alpha!r}")

    if m_infinity:
        target = asymptotics.true_feature_means(model, spec, low_fidelity=True)
        factor = 1.0
    else:
        target = ds.all_low_weights() @ h2_all
        factor = ds.m / (ds.n + ds.m) if ds.m else 0.0
    mean2_paired = w @ h2

    theta = np.empty(spec.d1)
    for l in range(spec.d1):
        mu_l = mu_hat_baseline + rows[l] * (target - mean2_paired)
        theta[l] = spec.g(mu_l)[l]

    cov = None
    if compute_cov:
        cov = mf_sigma(mm, jac, rows, factor)
    return Estimate("moment-mf", theta, cov, ds.n, ds.m,
                    coefficients={"alpha": rows})


# ---------------------------------------------------------------------------
# combined marginal maximum likelihood

def marginal_ml_mf(dataset, family, beta="plugin", model=None,
                   m_infinity=False, theta2_known=None, family2=None,
                   compute_cov=True):
    """Elementwise combination of marginal maximum likelihood fits.

    Fits theta1 on the paired high-fidelity values and theta2 on both the
    paired and the full low-fidelity block (same parametric family), then
    combines elementwise:

        theta1_hat + beta * (theta2_hat_all - theta2_hat_paired).

    The optimal beta is the coefficient of the information-scaled score
    features; ``"plugin"`` evaluates them at the fitted parameters.

    Parameters
    ----------
    family : str or MarginalFamily
        Parametric family of the high-fidelity margin.
    family2 : str or MarginalFamily, optional
        Low-fidelity template when it carries different fixed structure
        (e.g. a location-only family with another known scale); defaults
        to ``family``.
    beta : {"plugin", "true"} or array
    model : JointModel, required for ``beta="true"``.
    m_infinity : bool
        Combine against known theta2 (``theta2_known`` or the model's) in
        place of the n+m fit.
    """
    ds = dataset
    template = _family_template(family)
    template2 = template if family2 is None else _family_template(family2)
    if template2.d != template.d:
        raise ParameterDomainError("margins must share one parametric family")
    w = ds.paired_weights()
    theta1 = template.fit_ml(ds.x1, w)
    theta2_n = template2.fit_ml(ds.x2, w)
    if m_infinity:
        if theta2_known is None:
            if model is None or not model.theta2_names:
                raise ParameterDomainError("m_infinity needs theta2_known or a model")
            theta2_known = model.theta2[:template.d]
        theta2_ref = np.asarray(theta2_known, dtype=float)
        factor = 1.0
    else:
        theta2_ref = template2.fit_ml(ds.x2_all, ds.all_low_weights())
        factor = ds.m / (ds.n + ds.m) if ds.m else 0.0

    fam1 = template.with_theta(theta1)
    fam2 = template2.with_theta(theta2_ref)
    inv1 = np.linalg.inv(fam1.fisher_information())
    inv2 = np.linalg.inv(fam2.fisher_information())
    feat1 = np.atleast_2d(fam1.score(ds.x1)) @ inv1.T
    feat2 = np.atleast_2d(fam2.score(ds.x2)) @ inv2.T
    c_hl = _wcov_matrix(feat1, feat2, w)
    # paired-block moments throughout: the coefficient ratio then benefits
    # from same-sample error cancellation, which an all-block variance in
    # the denominator would forfeit
    c_ll = _wcov_matrix(feat2, feat2, w)

    mode = beta if isinstance(beta, str) else "fixed"
    if mode == "plugin":
        vl = np.diag(c_ll)
        if np.any(vl <= 0.0):
            raise DegenerateDataError("low-fidelity score features are constant")
        beta_vec = np.diag(c_hl) / vl
    elif mode == "true":
        if model is None:
            raise ParameterDomainError("beta='true' needs a model")
        _sig, beta_vec = asymptotics.marginal_ml_mf_sigma(
            model, family1=template.with_theta(model.theta1[:template.d]),
            family2=template2.with_theta(model.theta2[:template.d]))
    elif mode == "fixed":
        beta_vec = np.asarray(beta, dtype=float)
        if beta_vec.shape != (template.d,):
            raise ParameterDomainError("fixed beta must have one entry per parameter")
    else:
        raise ParameterDomainError(f"unexpected coefficient mode {beta!r}")

    theta = theta1 + beta_vec * (theta2_ref - theta2_n)
    cov = None
    if compute_cov:
        if mode == "true":
            cov, _ = asymptotics.marginal_ml_mf_sigma(
                model, family1=template.with_theta(model.theta1[:template.d]),
                family2=template2.with_theta(model.theta2[:template.d]),
                factor=factor)
        else:
            d = template.d
            cov = np.empty((d, d))
            for l in range(d):
                for k in range(d):
                    cov[l, k] = (inv1[l, k]
                                 - factor * (beta_vec[k] * c_hl[l, k]
                                             + beta_vec[l] * c_hl[k, l]
                                             - beta_vec[l] * beta_vec[k] * c_ll[l, k]))
            cov = 0.5 * (cov + cov.T)
            if np.min(np.linalg.eigvalsh(cov)) < 0.0:
                # sampling noise can push the reduction past PSD; project back
                evals, evecs = np.linalg.eigh(cov)
                cov = (evecs * np.clip(evals, 0.0, None)) @ evecs.T
    return Estimate("marginal-ml-mf", theta, cov, ds.n, ds.m,
                    coefficients={"beta": beta_vec})


def fit(dataset, method, *, family=None, spec=None, model=None, mode=None,
        coefficients=None, compute_cov=True):
    """Dispatch a named estimator on a dataset (the CLI entry point).

    ``mode`` selects the coefficient source ("plugin", "true") for the
    combined methods or the theta2 mode ("free", "known") for joint ML;
    ``coefficients`` passes fixed coefficient values.
    """
    if method == "mfmc-mean":
        alpha = "optimal" if coefficients is None else coefficients
        return mfmc_mean(dataset, alpha=alpha)
    if method == "baseline-ml":
        return baseline_ml(dataset.x1, family, weights=dataset.weights)
    if method == "baseline-moment":
        the_spec = spec if spec is not None else moment_map(family)
        return baseline_moment(dataset.x1, the_spec, weights=dataset.weights)
    if method == "joint-ml":
        return joint_ml(dataset, model, theta2_mode=mode or "free",
                        compute_cov=compute_cov)
    if method == "joint-ml-closed":
        return gaussian_joint_ml_closed(dataset, compute_cov=compute_cov)
    if method == "regression-ml":
        return regression_route_gaussian(dataset, compute_cov=compute_cov)
    if method == "moment-mf":
        the_spec = spec if spec is not None else moment_map(family)
        alpha = coefficients if coefficients is not None else (mode or "plugin")
        return moment_mf(dataset, the_spec, alpha=alpha, model=model,
                         compute_cov=compute_cov)
    if method == "marginal-ml-mf":
        beta = coefficients if coefficients is not None else (mode or "plugin")
        return marginal_ml_mf(dataset, family, beta=beta, model=model,
                              compute_cov=compute_cov)
    raise ParameterDomainError(f"unknown method {method!r}")
