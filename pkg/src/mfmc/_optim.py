"""Shared numerical optimization helpers.

Likelihood fits use a derivative-free simplex stage to locate the basin,
a quasi-Newton stage, and a final Newton polish on finite-difference
derivatives.  Objectives are average (not summed) negative log-likelihoods,
which keeps gradients O(1) and makes finite-difference steps scale-free.
"""

import numpy as np
from scipy import optimize, special

from .errors import EstimationError

FD_STEP = 1e-6    # first differences
FD_STEP2 = 1e-4   # second differences, coarser to beat roundoff


def fd_gradient(f, x, rel_step=FD_STEP):
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def fd_hessian(f, x, rel_step=FD_STEP2):
    x = np.asarray(x, dtype=float)
    n = x.size
    h = rel_step * (1.0 + np.abs(x))
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        H[i, i] = (f(xp) - 2.0 * f0 + f(xm)) / h[i] ** 2
        for j in range(i):
            xpp = x.copy()
            xpm = x.copy()
            xmp = x.copy()
            xmm = x.copy()
            xpp[[i, j]] += [h[i], h[j]]
            xpm[[i, j]] += [h[i], -h[j]]
            xmp[[i, j]] += [-h[i], h[j]]
            xmm[[i, j]] += [-h[i], -h[j]]
            H[i, j] = H[j, i] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h[i] * h[j])
    return H


def _newton_polish(f, x, grad, max_iter=4):
    """Drive the gradient to roundoff level from a near-optimal point.

    Curvature is frozen after the first iteration; close to the optimum the
    refreshed gradient is what carries the convergence.
    """
    fx = f(x)
    H = None
    for _ in range(max_iter):
        g = grad(x)
        if np.max(np.abs(g)) < 1e-12:
            break
        if H is None:
            H = fd_hessian(f, x)
        ridge = 0.0
        for _attempt in range(6):
            try:
                step = np.linalg.solve(H + ridge * np.eye(x.size), -g)
                break
            except np.linalg.LinAlgError:
                ridge = 10.0 * ridge if ridge else 1e-8
        else:
            return x, fx
        # backtracking keeps the polish monotone
        t = 1.0
        for _bt in range(30):
            x_new = x + t * step
            f_new = f(x_new)
            if f_new <= fx + 1e-14 * (1.0 + abs(fx)):
                break
            t *= 0.5
        else:
            return x, fx
        moved = np.max(np.abs(t * step) / (1.0 + np.abs(x)))
        x, fx = x_new, f_new
        if moved < 1e-12:
            break
    return x, fx


def minimize(f, x0, grad=None, restarts=3, gtol=1e-5, simplex=True):
    """Minimize a smooth unconstrained objective to high accuracy.

    Parameters
    ----------
    f : callable
        Objective; average negative log-likelihood in practice.
    x0 : array_like
        Starting point (warm start from a cheap consistent estimate).
    grad : callable, optional
        Analytic gradient; central finite differences otherwise.
    restarts : int
        Deterministic perturbed restarts before giving up.
    gtol : float
        Scaled infinity-norm gradient target for declaring convergence.

    Returns
    -------
    x : ndarray
        Minimizer.

    Raises
    ------
    EstimationError
        If no start converges.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    g = grad if grad is not None else (lambda x: fd_gradient(f, x))
    rng = np.random.default_rng(1729)  # restart jitter only; fixed for determinism
    best = None
    # attempt 0: quasi-Newton straight from the warm start; the simplex
    # stage only runs when that fails to locate the basin
    for attempt in range(restarts + 2):
        start = (x0 if attempt <= 1
                 else x0 + rng.normal(0.0, 0.5, size=x0.size) * (1.0 + np.abs(x0)))
        use_simplex = simplex and attempt >= 1
        try:
            x = start
            if use_simplex:
                res = optimize.minimize(f, x, method="Nelder-Mead",
                                        options={"xatol": 1e-8, "fatol": 1e-12,
                                                 "maxiter": 2000, "maxfev": 4000})
                x = res.x
            res = optimize.minimize(f, x, jac=g, method="BFGS",
                                    options={"gtol": 1e-9, "maxiter": 500})
            x = res.x
            x, fx = _newton_polish(f, x, g)
        except (FloatingPointError, np.linalg.LinAlgError, ValueError):
            continue
        if not np.all(np.isfinite(x)) or not np.isfinite(fx):
            continue
        gnorm = np.max(np.abs(g(x)))
        if best is None or fx < best[1]:
            best = (x, fx, gnorm)
        if gnorm <= gtol * (1.0 + abs(fx)):
            return x
    if best is not None and best[2] <= 1e-3 * (1.0 + abs(best[1])):
        # flat tail (e.g. a dependence parameter saturating its domain edge)
        return best[0]
    raise EstimationError(
        f"optimizer failed to converge after {restarts} restarts"
        + (f" (best scaled gradient {best[2]:.2e})" if best else "")
    )


# logit-style maps between a bounded natural domain and the real line

class Interval:
    """Bounded parameter mapped to the real line through a logistic warp."""

    def __init__(self, lo, hi):
        self.lo = float(lo)
        self.hi = float(hi)

    def to_real(self, v):
        v = np.clip(v, self.lo + 1e-15, self.hi - 1e-15)
        return special.logit((v - self.lo) / (self.hi - self.lo))

    def to_natural(self, s):
        return self.lo + (self.hi - self.lo) * special.expit(s)

    def scale_at(self, v):
        """d(natural)/d(real) expressed through the natural value."""
        return (v - self.lo) * (self.hi - v) / (self.hi - self.lo)


class LogPositive:
    """Positive parameter handled on the log scale."""

    def to_real(self, v):
        return np.log(v)

    def to_natural(self, s):
        return np.exp(s)

    def scale_at(self, v):
        return v


class Unbounded:
    def to_real(self, v):
        return v

    def to_natural(self, s):
        return s

    def scale_at(self, v):
        return 1.0
