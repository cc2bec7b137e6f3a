"""Central finite differences and gradient checks."""

import numpy as np

from .errors import NumericDomainError

EPS = np.finfo(float).eps


def fd_step(x):
    """Per-component central-difference step, balancing truncation and rounding."""
    return np.cbrt(EPS) * (1.0 + np.abs(np.asarray(x, dtype=float)))


def as_vector(x):
    """Return a finite 1-d float copy of ``x``."""
    arr = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if arr.ndim != 1:
        raise ValueError("expected a vector, got shape %s" % (arr.shape,))
    return arr


def _finite(value, what):
    if not np.all(np.isfinite(value)):
        raise NumericDomainError("non-finite value in %s" % what)
    return value


def gradient(f, x):
    """Fourth-order central-difference gradient of a scalar function.

    The five-point stencil keeps the noise floor near 1e-13 for O(1)
    values, below the default Newton tolerance, so systems without analytic
    derivatives still solve to tolerance.
    """
    x = as_vector(x)
    steps = EPS ** 0.2 * (1.0 + np.abs(x))
    g = np.empty_like(x)
    for i in range(x.size):
        t = steps[i]
        vals = []
        for c in (t, -t, 2 * t, -2 * t):
            xc = x.copy()
            xc[i] += c
            vals.append(float(f(xc)))
        g[i] = (8.0 * (vals[0] - vals[1]) - (vals[2] - vals[3])) / (12.0 * t)
    return _finite(g, "finite-difference gradient")


def jacobian(F, x, step=None):
    """Central-difference Jacobian, ``J[i, j] = dF_i/dx_j``.

    ``step`` overrides the default relative step with a fixed absolute one,
    for functions that are themselves only accurate to a noise floor.
    """
    x = as_vector(x)
    steps = fd_step(x) if step is None else np.full(x.size, float(step))
    cols = []
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += steps[j]
        xm[j] -= steps[j]
        diff = np.atleast_1d(F(xp)) - np.atleast_1d(F(xm))
        cols.append(diff / (xp[j] - xm[j]))
    return _finite(np.column_stack(cols), "finite-difference Jacobian")


def directional_derivative(f, x, d):
    """Fourth-order central difference of ``f`` at ``x`` along ``d``.

    Used where a derivative has to be compared against an analytic identity at
    tolerances near 1e-10, beyond what the second-order rule delivers.
    """
    x = as_vector(x)
    d = as_vector(d)
    scale = np.max(np.abs(d))
    if scale == 0.0:
        return 0.0
    t = EPS ** 0.2 * (1.0 + np.max(np.abs(x))) / scale
    fp1, fm1 = float(f(x + t * d)), float(f(x - t * d))
    fp2, fm2 = float(f(x + 2 * t * d)), float(f(x - 2 * t * d))
    return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * t)


def max_relative_error(a, b):
    """``max|a-b| / max(1, max|b|)``, the comparison rule of the gradient suite."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def check_gradient(f, grad, points):
    """Largest relative disagreement between ``grad`` and FD gradients of ``f``."""
    worst = 0.0
    for x in points:
        worst = max(worst, max_relative_error(grad(x), gradient(f, x)))
    return worst


def check_jacobian(F, jac, points):
    """Largest relative disagreement between ``jac`` and FD Jacobians of ``F``."""
    worst = 0.0
    for x in points:
        worst = max(worst, max_relative_error(jac(x), jacobian(F, x)))
    return worst
