"""Population (model-level) asymptotic covariances of every estimator.

All quantities here are n-scaled limits in the regime where the
low-fidelity parameters are known (the practical reading of "m much larger
than n"), which is what makes the methods comparable on one scale.
Expectations under continuous models use tensor Gauss-Legendre quadrature
with one refinement doubling; discrete models are summed exactly over their
four outcome cells.  A Monte Carlo route is available as a cross-check.
"""

import numpy as np

from . import _optim
from ._coeffs import MomentMatrices, mf_sigma, optimal_alpha
from .errors import IntegrationError, ParameterDomainError, SingularityError
from .models.joint import BernoulliMixture, JointModel, sample_joint
from .models.marginals import MarginalFamily, MomentSpec, moment_map
from .quadrature import central_box, expect_1d, expect_2d, gauss_legendre

METHODS = ("baseline-ml", "baseline-moment", "joint-ml", "moment-mf",
           "marginal-ml-mf", "mfmc-mean")


# ---------------------------------------------------------------------------
# expectation helpers

def _model_boxes(model):
    return central_box(model.marginal1), central_box(model.marginal2)


def _base_nodes(model):
    """Tensor-rule resolution; strong dependence narrows the density ridge."""
    width = 1.0
    if getattr(model, "model_id", "") == "bivariate-gumbel-logistic":
        width = model.r
    elif getattr(model, "model_id", "") == "bivariate-gaussian":
        width = np.sqrt(1.0 - model.rho**2)
    if width >= 0.22:
        return 200
    if width >= 0.12:
        return 400
    if width >= 0.05:
        return 800
    return 1200


def _expected_loglik(model, names, method, mc_draws, seed):
    """theta -> E[log f_theta(X)] with X fixed at the base model's law.

    Under quadrature a pair (coarse, fine) of estimates is returned per
    call so refinement agreement can be checked after differentiation.
    """
    if model.is_discrete:
        cells = model.cell_probabilities()

        def mean_loglik(values):
            shifted = model.replace(**dict(zip(names, values)))
            logcells = np.log(shifted.cell_probabilities())
            return float(np.sum(cells * logcells))

        return mean_loglik, False

    if method == "quadrature":
        box1, box2 = _model_boxes(model)
        base = _base_nodes(model)
        grids = []
        for nodes in (base, 2 * base):
            x1, w1 = gauss_legendre(box1[0], box1[1], nodes)
            x2, w2 = gauss_legendre(box2[0], box2[1], nodes)
            g1, g2 = np.meshgrid(x1, x2, indexing="ij")
            g1 = g1.ravel()
            g2 = g2.ravel()
            wgt = (w1[:, None] * w2[None, :]).ravel() * np.exp(model.logpdf(g1, g2))
            grids.append((g1, g2, wgt))

        def mean_loglik(values):
            shifted = model.replace(**dict(zip(names, values)))
            return [float(np.sum(wgt * shifted.logpdf(g1, g2)))
                    for g1, g2, wgt in grids]

        return mean_loglik, True

    if method == "monte-carlo":
        x1, x2 = sample_joint(model, mc_draws, np.random.default_rng(seed))

        def mean_loglik(values):
            shifted = model.replace(**dict(zip(names, values)))
            return float(np.mean(shifted.logpdf(x1, x2)))

        return mean_loglik, False

    raise ParameterDomainError(f"unknown integration method {method!r}")


def _invert_information(info):
    info = np.atleast_2d(info)
    cond = np.linalg.cond(info)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularityError(
            f"singular information matrix (condition number {cond:.3e})",
            condition_number=cond)
    return np.linalg.inv(info)


def fisher_information(model_or_family, wrt=None, method="closed",
                       mc_draws=10**6, seed=0):
    """Expected information matrix at the object's own parameters.

    Parameters
    ----------
    model_or_family : MarginalFamily or JointModel
        Marginal families default to their closed forms; joint models are
        differentiated numerically under quadrature or Monte Carlo
        expectations (exact cell sums for the discrete models).
    wrt : sequence of str, optional
        Joint-model parameter names; defaults to theta1 plus dependence.
    method : {"closed", "quadrature", "monte-carlo"}
    """
    obj = model_or_family
    if isinstance(obj, MarginalFamily):
        if method == "closed":
            return obj.fisher_information()
        if method == "quadrature":
            if obj.is_discrete:
                xs = np.array([0.0, 1.0])
                probs = np.exp(obj.logpdf(xs))
                return -np.tensordot(probs, obj.hessian(xs), axes=(0, 0))
            return -expect_1d(obj.hessian, lambda x: np.exp(obj.logpdf(x)),
                              central_box(obj), what="marginal information")
        if method == "monte-carlo":
            xs = obj.sample(mc_draws, np.random.default_rng(seed))
            return -np.mean(obj.hessian(xs), axis=0)
        raise ParameterDomainError(f"unknown integration method {method!r}")

    if not isinstance(obj, JointModel):
        raise ParameterDomainError("expected a marginal family or a joint model")
    names = tuple(wrt) if wrt is not None else obj.theta1_names + obj.dep_names
    if method == "closed":
        method = "quadrature"
    # expectations are very smooth in theta; a coarser second-difference
    # step trades negligible truncation for much less roundoff
    step = 1e-3
    for name in names:
        tr = obj.transform(name)
        if isinstance(tr, _optim.Interval):
            v = float(getattr(obj, name))
            margin = step * (1.0 + abs(v)) * 1.5
            if v - tr.lo < margin or tr.hi - v < margin:
                raise ParameterDomainError(
                    f"information is not defined with {name}={v:.6g} at its domain "
                    f"boundary; treat the parameter as known instead")
    mean_loglik, two_level = _expected_loglik(obj, names, method, mc_draws, seed)
    values = np.array([float(getattr(obj, n)) for n in names])
    if not two_level:
        return -_optim.fd_hessian(mean_loglik, values, rel_step=step)

    info_c = -_optim.fd_hessian(lambda v: mean_loglik(v)[0], values, rel_step=step)
    info_f = -_optim.fd_hessian(lambda v: mean_loglik(v)[1], values, rel_step=step)
    scale = 1.0 + np.max(np.abs(info_f))
    if np.max(np.abs(info_f - info_c)) > 1e-6 * scale:
        raise IntegrationError("information quadrature levels disagree")
    return info_f


def moment_matrices(model, spec=None, method="quadrature", mc_draws=10**6, seed=0):
    """Population covariance structure of (h(X1), h(X2)) under a joint model."""
    if spec is None:
        spec = _default_spec(model)
    h = spec.h
    d = spec.d1

    if model.is_discrete:
        cells = model.cell_probabilities()
        xs = np.array([0.0, 1.0])
        hx = np.atleast_2d(h(xs))  # (2, d)
        px1 = cells.sum(axis=1)
        px2 = cells.sum(axis=0)
        mu1 = hx.T @ px1
        mu2 = hx.T @ px2
        c_hh = (hx.T * px1) @ hx - np.outer(mu1, mu1)
        c_ll = (hx.T * px2) @ hx - np.outer(mu2, mu2)
        e_cross = np.einsum("ab,ai,bj->ij", cells, hx, hx)
        return MomentMatrices(c_hh, e_cross - np.outer(mu1, mu2), c_ll)

    if method == "monte-carlo":
        x1, x2 = sample_joint(model, mc_draws, np.random.default_rng(seed))
        h1 = np.atleast_2d(h(x1))
        h2 = np.atleast_2d(h(x2))
        c_hh = np.cov(h1.T, ddof=0).reshape(d, d)
        c_ll = np.cov(h2.T, ddof=0).reshape(d, d)
        hc1 = h1 - h1.mean(axis=0)
        hc2 = h2 - h2.mean(axis=0)
        c_hl = hc1.T @ hc2 / x1.size
        return MomentMatrices(c_hh, c_hl, c_ll)

    box1, box2 = _model_boxes(model)
    fam1, fam2 = model.marginal1, model.marginal2

    def marginal_moments(fam, box):
        def feats(x):
            hx = np.atleast_2d(h(x))
            return np.concatenate([hx, _pairwise_products(hx)], axis=1)

        vals = expect_1d(feats, lambda x: np.exp(fam.logpdf(x)), box,
                         what="marginal feature moments")
        mu = vals[:d]
        second = _unpack_products(vals[d:], d)
        return mu, second - np.outer(mu, mu)

    mu1, c_hh = marginal_moments(fam1, box1)
    mu2, c_ll = marginal_moments(fam2, box2)

    def cross(x1, x2):
        h1 = np.atleast_2d(h(x1))
        h2 = np.atleast_2d(h(x2))
        return (h1[:, :, None] * h2[:, None, :]).reshape(x1.size, d * d)

    e_cross = expect_2d(cross, model.logpdf, box1, box2, nodes=_base_nodes(model),
                        what="cross feature moments").reshape(d, d)
    return MomentMatrices(c_hh, e_cross - np.outer(mu1, mu2), c_ll)


def _pairwise_products(hx):
    d = hx.shape[1]
    cols = [hx[:, i] * hx[:, j] for i in range(d) for j in range(i, d)]
    return np.stack(cols, axis=1)


def _unpack_products(flat, d):
    out = np.empty((d, d))
    k = 0
    for i in range(d):
        for j in range(i, d):
            out[i, j] = out[j, i] = flat[k]
            k += 1
    return out


def _default_spec(model):
    if isinstance(model, BernoulliMixture):
        return mixture_moment_spec(model)
    return moment_map(model.marginal1)


def mixture_moment_spec(model):
    """Moment formulation of the mixture estimand p: p = E[X1] / p2."""
    p2 = model.p2

    def h(x):
        return np.asarray(x, dtype=float)[..., None]

    def g(mu_y):
        return np.array([mu_y[0] / p2])

    def jacobian(mu_y):
        return np.array([[1.0 / p2]])

    return MomentSpec(1, h, g, jacobian, "bernoulli-mixture")


def score_feature_moments(model, family1=None, family2=None, method="quadrature",
                          mc_draws=10**6, seed=0):
    """Cross-covariance of the information-scaled score features.

    Returns (inv_info1, inv_info2, c_hl) where c_hl[l, k] is the covariance
    between component l of inv(I1) score1(X1) and component k of
    inv(I2) score2(X2) under the joint law.  The marginal feature
    covariances equal the inverse informations by the information identity.
    """
    fam1 = family1 if family1 is not None else model.marginal1
    fam2 = family2 if family2 is not None else model.marginal2
    inv1 = _invert_information(fam1.fisher_information())
    inv2 = _invert_information(fam2.fisher_information())
    d1 = fam1.d
    d2 = fam2.d

    def cross(x1, x2):
        s1 = np.atleast_2d(fam1.score(x1))
        s2 = np.atleast_2d(fam2.score(x2))
        return (s1[:, :, None] * s2[:, None, :]).reshape(np.size(x1), d1 * d2)

    if model.is_discrete:
        cells = model.cell_probabilities()
        xs = np.array([0.0, 1.0])
        s1 = np.atleast_2d(fam1.score(xs))
        s2 = np.atleast_2d(fam2.score(xs))
        e_cross = np.einsum("ab,ai,bj->ij", cells, s1, s2)
    elif method == "monte-carlo":
        x1, x2 = sample_joint(model, mc_draws, np.random.default_rng(seed))
        e_cross = np.mean(cross(x1, x2), axis=0).reshape(d1, d2)
    else:
        box1, box2 = _model_boxes(model)
        e_cross = expect_2d(cross, model.logpdf, box1, box2, nodes=_base_nodes(model),
                            what="score cross moments").reshape(d1, d2)
    return inv1, inv2, inv1 @ e_cross @ inv2


def marginal_ml_mf_sigma(model, family1=None, family2=None, factor=1.0,
                         method="quadrature", mc_draws=10**6, seed=0):
    """Limiting covariance of the marginal-likelihood combination estimator.

    Also returns the elementwise optimal coefficients.  ``factor`` is
    m/(n+m); 1 recovers the known-low-fidelity-parameter limit.
    """
    inv1, inv2, c_hl = score_feature_moments(model, family1, family2,
                                             method, mc_draws, seed)
    d = inv1.shape[0]
    beta = np.array([c_hl[l, l] / inv2[l, l] for l in range(d)])
    sigma = np.empty((d, d))
    for l in range(d):
        for k in range(d):
            sigma[l, k] = (inv1[l, k]
                           - factor * (beta[k] * c_hl[l, k] + beta[l] * c_hl[k, l]
                                       - beta[l] * beta[k] * inv2[l, k]))
    return 0.5 * (sigma + sigma.T), beta


def mean_variance_corr(model, method="quadrature", mc_draws=10**6, seed=0):
    """(var X1, var X2, corr(X1, X2)) under the joint law."""
    spec = MomentSpec(1, lambda x: np.asarray(x, dtype=float)[..., None],
                      lambda mu: mu, lambda mu: np.array([[1.0]]), "mean")
    mm = moment_matrices(model, spec, method=method, mc_draws=mc_draws, seed=seed)
    v1 = mm.c_hh[0, 0]
    v2 = mm.c_ll[0, 0]
    return v1, v2, mm.c_hl[0, 0] / np.sqrt(v1 * v2)


def _theta1_wrt_names(model, family):
    """Joint-model parameter names matching the estimand family view."""
    names = model.theta1_names
    if family is not None and family.d < len(names):
        names = names[:family.d]
    return names


def _matching_view(full_family, view):
    """Reduce one margin to the structural view used on the other margin.

    A location-only view of a Gumbel margin keeps the margin's own scale
    fixed; full views pass through unchanged.
    """
    if view is None or view.d == full_family.d:
        return full_family
    from .models.marginals import Gumbel, GumbelLocation

    if isinstance(view, GumbelLocation) and isinstance(full_family, Gumbel):
        return GumbelLocation(full_family.mu, full_family.sigma)
    raise ParameterDomainError(
        f"cannot reduce {type(full_family).__name__} to the view "
        f"{type(view).__name__}")


def asym_cov(method, model, family=None, spec=None, dependence="estimated",
             integration="quadrature", mc_draws=10**6, seed=0):
    """n-scaled limiting covariance of a named estimator of theta1.

    Parameters
    ----------
    method : str
        One of ``baseline-ml``, ``baseline-moment``, ``joint-ml``,
        ``moment-mf``, ``marginal-ml-mf``, ``mfmc-mean``.
    model : JointModel
        Carries the true parameters and the dependence structure.
    family : MarginalFamily, optional
        Estimand view of the high-fidelity margin (for instance a
        location-only family); defaults to the model's full margin.
    spec : MomentSpec, optional
        Moment formulation for the moment methods.
    dependence : {"estimated", "known"}
        Whether the joint-likelihood information includes the dependence
        parameter (figure sweeps treat it as known).
    """
    if method not in METHODS:
        raise ParameterDomainError(f"unknown method {method!r}")
    fam1 = family if family is not None else model.marginal1
    if spec is None:
        spec = (mixture_moment_spec(model) if isinstance(model, BernoulliMixture)
                else fam1.moment_spec())

    if method == "baseline-ml":
        if isinstance(model, BernoulliMixture):
            # scalar estimand p observed through X1 ~ Ber(p p2)
            p1 = model.p * model.p2
            return np.array([[p1 * (1.0 - p1) / model.p2**2]])
        return _invert_information(fam1.fisher_information())

    if method == "baseline-moment":
        mm = moment_matrices(model, spec, method=integration,
                             mc_draws=mc_draws, seed=seed)
        jac = spec.jacobian(_true_feature_means(model, spec, integration,
                                                mc_draws, seed))
        return jac @ mm.c_hh @ jac.T

    if method == "joint-ml":
        names = _theta1_wrt_names(model, fam1)
        d1 = len(names)
        if dependence == "estimated":
            names = names + model.dep_names
        info = fisher_information(model, wrt=names, method=integration,
                                  mc_draws=mc_draws, seed=seed)
        return _invert_information(info)[:d1, :d1]

    if method == "moment-mf":
        mm = moment_matrices(model, spec, method=integration,
                             mc_draws=mc_draws, seed=seed)
        jac = spec.jacobian(_true_feature_means(model, spec, integration,
                                                mc_draws, seed))
        rows = [optimal_alpha(mm, jac, l) for l in range(spec.d1)]
        return mf_sigma(mm, jac, np.array(rows), factor=1.0)

    if method == "marginal-ml-mf":
        if isinstance(model, BernoulliMixture):
            # score features reduce to centered indicators, scaled by 1/p2
            v1, _v2, corr = mean_variance_corr(model)
            return np.array([[v1 * (1.0 - corr**2) / model.p2**2]])
        fam2 = _matching_view(model.marginal2, family)
        sigma, _beta = marginal_ml_mf_sigma(model, fam1, fam2, factor=1.0,
                                            method=integration,
                                            mc_draws=mc_draws, seed=seed)
        return sigma

    # mfmc-mean: optimal-coefficient combined mean of X1
    v1, _v2, corr = mean_variance_corr(model, method=integration,
                                       mc_draws=mc_draws, seed=seed)
    return np.array([[v1 * (1.0 - corr**2)]])


def _true_feature_means(model, spec, integration="quadrature",
                        mc_draws=10**6, seed=0):
    fam1 = model.marginal1
    if model.is_discrete:
        xs = np.array([0.0, 1.0])
        probs = np.exp(fam1.logpdf(xs))
        return np.atleast_2d(spec.h(xs)).T @ probs
    if integration == "monte-carlo":
        xs = fam1.sample(mc_draws, np.random.default_rng(seed))
        return np.mean(np.atleast_2d(spec.h(xs)), axis=0)
    return expect_1d(lambda x: np.atleast_2d(spec.h(x)),
                     lambda x: np.exp(fam1.logpdf(x)), central_box(fam1),
                     what="feature means")


def true_feature_means(model, spec=None, low_fidelity=False,
                       integration="quadrature", mc_draws=10**6, seed=0):
    """Population feature means E[h(X)] under one margin of a joint model."""
    if spec is None:
        spec = _default_spec(model)
    if not low_fidelity:
        return _true_feature_means(model, spec, integration, mc_draws, seed)
    fam2 = model.marginal2
    if model.is_discrete:
        xs = np.array([0.0, 1.0])
        probs = np.exp(fam2.logpdf(xs))
        return np.atleast_2d(spec.h(xs)).T @ probs
    if integration == "monte-carlo":
        xs = fam2.sample(mc_draws, np.random.default_rng(seed))
        return np.mean(np.atleast_2d(spec.h(xs)), axis=0)
    return expect_1d(lambda x: np.atleast_2d(spec.h(x)),
                     lambda x: np.exp(fam2.logpdf(x)), central_box(fam2),
                     what="low-fidelity feature means")


def component_names(model, family=None):
    """Labels of the estimated theta1 components for reporting."""
    if isinstance(model, BernoulliMixture):
        return ("p",)
    return _theta1_wrt_names(model, family)


def variance_curve(model, sweep_name, sweep_values, methods=METHODS,
                   family=None, spec=None, dependence="known",
                   integration="quadrature", mc_draws=10**6, seed=0):
    """Asymptotic-variance table over a dependence (or parameter) sweep.

    Returns (rows, warnings): one row dict per (grid value, method,
    component); grid points where a method fails are recorded as warnings
    and skipped rather than aborting the sweep.
    """
    rows = []
    warnings = []
    for value in np.asarray(sweep_values, dtype=float):
        swept = model.replace(**{sweep_name: float(value)})
        names = component_names(swept, family)
        for method in methods:
            try:
                sigma = asym_cov(method, swept, family=family, spec=spec,
                                 dependence=dependence, integration=integration,
                                 mc_draws=mc_draws, seed=seed)
            except Exception as exc:  # noqa: BLE001 - recorded, not fatal
                warnings.append(f"{method} failed at {sweep_name}={value}: {exc}")
                continue
            diag = np.diag(np.atleast_2d(sigma))
            labels = names if len(names) == diag.size else tuple(
                f"theta1[{i}]" for i in range(diag.size))
            for comp, var in zip(labels, diag):
                rows.append({sweep_name: float(value), "method": method,
                             "component": comp, "variance": float(var)})
    return rows, warnings
