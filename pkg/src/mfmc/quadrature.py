"""Gauss-Legendre quadrature for model expectations.

Expectations of smooth functions under the continuous models are computed by
tensor Gauss-Legendre rules over a central probability box of each margin
(the box keeps all but ``tail_mass`` of the probability).  Every integral is
evaluated at a base resolution and once more with the node count doubled;
the refined value is accepted only when the two levels agree to a mixed
absolute/relative tolerance, otherwise an :class:`IntegrationError` is
raised.
"""

import numpy as np

from .errors import IntegrationError

DEFAULT_NODES = 200
# kept small enough that fourth-moment integrands keep sub-1e-6 relative
# truncation error under every family in scope
DEFAULT_TAIL_MASS = 1e-12
DEFAULT_RTOL = 1e-6


def gauss_legendre(a, b, n):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (b - a) * x + 0.5 * (b + a)
    w = 0.5 * (b - a) * w
    return x, w


def _check_levels(coarse, fine, rtol, what):
    err = np.abs(fine - coarse)
    tol = rtol * (1.0 + np.abs(fine))
    if np.any(err > tol):
        raise IntegrationError(
            f"quadrature did not converge for {what}: "
            f"max level disagreement {float(np.max(err)):.3e} exceeds tolerance"
        )
    return fine


def integrate_1d(func, a, b, nodes=DEFAULT_NODES, rtol=DEFAULT_RTOL, what="integral"):
    """Integrate ``func`` (vectorized, may return (n, k) stacks) over [a, b]."""
    results = []
    for n in (nodes, 2 * nodes):
        x, w = gauss_legendre(a, b, n)
        vals = np.asarray(func(x))
        results.append(np.tensordot(w, vals, axes=(0, 0)))
    return _check_levels(results[0], results[1], rtol, what)


def expect_1d(funcs, pdf, box, nodes=DEFAULT_NODES, rtol=DEFAULT_RTOL, what="expectation"):
    """Expectations E[f(X)] for each f in ``funcs`` under a density on ``box``.

    ``funcs`` maps an array of points to an array whose leading axis matches
    the points; trailing axes index the integrands.
    """
    results = []
    a, b = box
    for n in (nodes, 2 * nodes):
        x, w = gauss_legendre(a, b, n)
        f = np.asarray(funcs(x))
        p = pdf(x)
        wf = (w * p).reshape((-1,) + (1,) * (f.ndim - 1))
        results.append(np.sum(wf * f, axis=0))
    return _check_levels(results[0], results[1], rtol, what)


def expect_2d(funcs, logpdf, box1, box2, nodes=DEFAULT_NODES, rtol=DEFAULT_RTOL,
              what="expectation"):
    """Expectations E[f(X1, X2)] under a bivariate density.

    Parameters
    ----------
    funcs : callable
        Maps flat arrays (x1, x2) of equal length to an array with that
        leading axis; trailing axes index multiple integrands.
    logpdf : callable
        Vectorized joint log-density.
    box1, box2 : (float, float)
        Integration rectangle, normally central probability boxes.
    """
    results = []
    for n in (nodes, 2 * nodes):
        x1, w1 = gauss_legendre(box1[0], box1[1], n)
        x2, w2 = gauss_legendre(box2[0], box2[1], n)
        g1, g2 = np.meshgrid(x1, x2, indexing="ij")
        g1 = g1.ravel()
        g2 = g2.ravel()
        dens = np.exp(logpdf(g1, g2))
        wgt = (w1[:, None] * w2[None, :]).ravel() * dens
        f = np.asarray(funcs(g1, g2))
        wf = wgt.reshape((-1,) + (1,) * (f.ndim - 1))
        results.append(np.sum(wf * f, axis=0))
    return _check_levels(results[0], results[1], rtol, what)


def central_box(family, tail_mass=DEFAULT_TAIL_MASS):
    """Probability box of a marginal family keeping 1 - tail_mass of mass."""
    eps = tail_mass / 2.0
    return family.ppf(eps), family.ppf(1.0 - eps)


def adaptive_01(func, tol=1e-10, max_depth=48):
    """Adaptive Gauss-Legendre integral of a vectorized func over (0, 1).

    Interval bisection with a 15-point rule per panel, absolute tolerance
    ``tol``; used for mixing integrals whose integrand may be non-smooth at
    panel scale.
    """
    base_x, base_w = np.polynomial.legendre.leggauss(15)

    def panel(a, b):
        x = 0.5 * (b - a) * base_x + 0.5 * (b + a)
        return 0.5 * (b - a) * float(np.sum(base_w * func(x)))

    stack = [(0.0, 1.0, panel(0.0, 1.0), 0)]
    total = 0.0
    while stack:
        a, b, whole, depth = stack.pop()
        mid = 0.5 * (a + b)
        left = panel(a, mid)
        right = panel(mid, b)
        if abs(left + right - whole) < tol or depth >= max_depth:
            if depth >= max_depth and abs(left + right - whole) >= tol:
                raise IntegrationError("adaptive quadrature on (0,1) did not converge")
            total += left + right
        else:
            stack.append((a, mid, left, depth + 1))
            stack.append((mid, b, right, depth + 1))
    return total
