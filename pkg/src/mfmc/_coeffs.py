"""Variance-optimal combination coefficients for moment-type estimators.

The multi-fidelity moment estimator combines high- and low-fidelity feature
means through a coefficient vector per estimated component.  With the map
Jacobian held fixed, the delta-method variance of one component is a convex
quadratic in the coefficient vector, minimized by a small linear system; the
d1 = 2 case has an explicit closed form.
"""

import numpy as np

from .errors import SingularityError


class MomentMatrices:
    """Second-moment structure of the feature pairs (h(X1), h(X2)).

    Attributes
    ----------
    c_hh, c_ll : ndarray
        Covariance matrices of the high- and low-fidelity feature vectors.
    c_hl : ndarray
        Cross-covariances, entry (i, j) = cov(h_i(X1), h_j(X2)).
    """

    def __init__(self, c_hh, c_hl, c_ll, validate=True):
        c_hh = np.atleast_2d(np.asarray(c_hh, dtype=float))
        c_hl = np.atleast_2d(np.asarray(c_hl, dtype=float))
        c_ll = np.atleast_2d(np.asarray(c_ll, dtype=float))
        d = c_hh.shape[0]
        if c_hh.shape != (d, d) or c_ll.shape != (d, d) or c_hl.shape != (d, d):
            raise ValueError("moment matrices must share one square shape")
        for name, mat in (("c_hh", c_hh), ("c_ll", c_ll)):
            if np.max(np.abs(mat - mat.T)) > 1e-10 * (1.0 + np.max(np.abs(mat))):
                raise ValueError(f"{name} must be symmetric")
            if np.min(np.linalg.eigvalsh(mat)) < -1e-10 * (1.0 + np.max(np.abs(mat))):
                raise ValueError(f"{name} must be positive semidefinite")
        if validate:
            # blocks estimated from one sample obey this exactly; blocks mixed
            # from different subsamples may not and pass validate=False
            bound = np.sqrt(np.outer(np.diag(c_hh), np.diag(c_ll)))
            if np.any(np.abs(c_hl) > bound * (1.0 + 1e-8) + 1e-12):
                raise ValueError("cross-covariances exceed the Cauchy-Schwarz bound")
        self.c_hh = c_hh
        self.c_hl = c_hl
        self.c_ll = c_ll
        self.d1 = d

    @property
    def v_h(self):
        return np.diag(self.c_hh).copy()

    @property
    def v_l(self):
        return np.diag(self.c_ll).copy()

    def __repr__(self):
        return f"MomentMatrices(d1={self.d1})"


def _closed_form_d2(mm, g_row):
    """Explicit optimal coefficients for d1 = 2 (with zero-entry reductions)."""
    g1, g2 = g_row
    chl = mm.c_hl
    vl1, vl2 = mm.v_l
    cll12 = mm.c_ll[0, 1]
    if g1 == 0.0 and g2 == 0.0:
        raise SingularityError("both Jacobian entries vanish; coefficients undefined")
    if g1 == 0.0:
        if vl2 <= 0.0:
            raise SingularityError("zero low-fidelity feature variance")
        return np.array([0.0, chl[1, 1] / vl2])
    if g2 == 0.0:
        if vl1 <= 0.0:
            raise SingularityError("zero low-fidelity feature variance")
        return np.array([chl[0, 0] / vl1, 0.0])
    det = vl1 * vl2 - cll12**2
    if det <= 0.0:
        raise SingularityError(
            "low-fidelity features are perfectly correlated",
            condition_number=np.inf)
    b1 = g1 * chl[0, 0] + g2 * chl[1, 0]
    b2 = g2 * chl[1, 1] + g1 * chl[0, 1]
    a1 = (vl2 * b1 - cll12 * b2) / (g1 * det)
    a2 = (vl1 * b2 - cll12 * b1) / (g2 * det)
    return np.array([a1, a2])


def _general_solve(mm, g_row):
    """Linear normal equations for any d1; zero Jacobian entries drop out."""
    g_row = np.asarray(g_row, dtype=float)
    active = np.flatnonzero(g_row != 0.0)
    if active.size == 0:
        raise SingularityError("all Jacobian entries vanish; coefficients undefined")
    alpha = np.zeros(g_row.size)
    # rows: stationarity in alpha_t for active t; unknowns alpha_s (active s)
    a_mat = (mm.c_ll[np.ix_(active, active)] * g_row[active][None, :])
    rhs = np.array([float(np.sum(g_row[active] * mm.c_hl[active, t])) for t in active])
    cond = np.linalg.cond(a_mat)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularityError("singular coefficient system", condition_number=cond)
    alpha[active] = np.linalg.solve(a_mat, rhs)
    return alpha


def optimal_alpha(mm, jac, component, n=None, m=None):
    """Variance-minimizing coefficient vector for one estimated component.

    Parameters
    ----------
    mm : MomentMatrices
    jac : ndarray
        Map Jacobian G, treated as constant.
    component : int
        Component index l (0-based).
    n, m : int, optional
        Accepted for interface symmetry; the minimizer does not depend on
        the block sizes (they only scale the quadratic term).

    Returns
    -------
    ndarray
        Optimal coefficient vector alpha(l) of length d1.
    """
    del n, m
    g_row = np.atleast_2d(np.asarray(jac, dtype=float))[component]
    if mm.d1 == 1:
        if g_row[0] == 0.0:
            raise SingularityError("Jacobian entry vanishes; coefficient undefined")
        if mm.v_l[0] <= 0.0:
            raise SingularityError("zero low-fidelity feature variance")
        return np.array([mm.c_hl[0, 0] / mm.v_l[0]])
    if mm.d1 == 2:
        return _closed_form_d2(mm, g_row)
    return _general_solve(mm, g_row)


def combined_mean_cov(mm, factor):
    """n-scaled covariances of combined feature means as a closure.

    The returned function maps (a, b, r, s) to the covariance between the
    r-th combined mean built with coefficient vector ``a`` and the s-th
    built with ``b``; ``factor`` is m/(n+m), equal to 1 in the
    known-parameter limit.
    """

    def entry(a, b, r, s):
        return (mm.c_hh[r, s]
                - factor * (b[s] * mm.c_hl[r, s] + a[r] * mm.c_hl[s, r]
                            - a[r] * b[s] * mm.c_ll[r, s]))

    return entry


def mf_sigma(mm, jac, alpha_rows, factor):
    """Full d1 x d1 limiting covariance of the combined moment estimator.

    ``alpha_rows[l]`` is the coefficient vector used for component l; the
    (l, k) entry propagates the combined-mean covariances through rows l and
    k of the Jacobian.
    """
    jac = np.atleast_2d(np.asarray(jac, dtype=float))
    alpha_rows = np.atleast_2d(np.asarray(alpha_rows, dtype=float))
    d = mm.d1
    entry = combined_mean_cov(mm, factor)
    sigma = np.empty((d, d))
    for l in range(d):
        for k in range(d):
            a = alpha_rows[l]
            b = alpha_rows[k]
            total = 0.0
            for r in range(d):
                for s in range(d):
                    total += jac[l, r] * jac[k, s] * entry(a, b, r, s)
            sigma[l, k] = total
    return 0.5 * (sigma + sigma.T)


def component_objective(mm, jac, component, factor=1.0):
    """The quadratic alpha -> variance of component l, for oracle checks."""
    jac = np.atleast_2d(np.asarray(jac, dtype=float))

    def objective(alpha):
        alpha = np.asarray(alpha, dtype=float)
        rows = np.tile(alpha, (mm.d1, 1))
        return float(mf_sigma(mm, jac, rows, factor)[component, component])

    return objective
