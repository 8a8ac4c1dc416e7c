"""Bounded Levenberg-Marquardt least squares with central-difference Jacobians."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, UndefinedStatistic

log = logging.getLogger(__name__)

MAX_DAMPING = 1e16


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    residuals: np.ndarray
    jacobian: np.ndarray
    n_iterations: int
    converged: bool
    message: str
    cost_history: list = field(default_factory=list)


def central_jacobian(fun, x, lower, upper, x_scale, rel_step=1e-6, f0=None):
    """Central-difference Jacobian with step ``rel_step * max(|x_j|, x_scale_j)``.

    Steps are clipped to the bounds; a clipped side falls back to the
    available half-interval so every evaluation stays feasible.
    """
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = fun(x)
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), x_scale[j])
        hi = min(x[j] + h, upper[j])
        lo = max(x[j] - h, lower[j])
        xp = x.copy()
        xm = x.copy()
        xp[j] = hi
        xm[j] = lo
        fp = fun(xp) if hi != x[j] else f0
        fm = fun(xm) if lo != x[j] else f0
        jac[:, j] = (fp - fm) / (hi - lo)
    return jac


def _projected_gradient(g, x, lower, upper):
    g = g.copy()
    # a descent step -g that points out of the box is blocked by the bound
    g[(x <= lower) & (g > 0)] = 0.0
    g[(x >= upper) & (g < 0)] = 0.0
    return g


def _bounded_step(M, g, x, lower, upper):
    """Solve ``M step = -g`` with bound-pinned variables frozen.

    A variable sitting on a bound is frozen when descent (``-g``) or the solved
    step points out of the box.
    """
    n = x.size
    free = ~(((x <= lower) & (g > 0)) | ((x >= upper) & (g < 0)))
    if not free.any():
        return np.zeros(n)
    step = np.zeros(n)
    for _ in range(n + 1):
        step[:] = 0.0
        step[free] = np.linalg.solve(M[np.ix_(free, free)], -g[free])
        blocked = free & (((x <= lower) & (step < 0)) | ((x >= upper) & (step > 0)))
        if not blocked.any():
            break
        free &= ~blocked
        if not free.any():
            step[:] = 0.0
            break
    return step


def levenberg_marquardt(fun, x0, lower=None, upper=None, x_scale=None, *, max_iter=500,
                        ftol=1e-10, gtol=1e-10, rel_step=1e-6, damping0=1e-3) -> LMResult:
    """Minimize ``sum(fun(x)**2)`` inside the box ``[lower, upper]``.

    Marquardt's diagonal scaling makes the iteration invariant to rescaling
    individual parameters. Stops when an accepted step lowers the cost by less
    than ``ftol`` relative, when the largest cosine between the residual and a
    Jacobian column drops under ``gtol``, or after ``max_iter`` iterations.
    If no step can be accepted even at maximal damping the result is returned
    with ``converged=False`` unless the predicted reduction is already
    negligible.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    x_scale = np.ones(n) if x_scale is None else np.asarray(x_scale, dtype=float)
    if np.any(lower >= upper):
        raise InvalidArgument("every lower bound must be below its upper bound")
    if np.any(x < lower) or np.any(x > upper):
        raise InvalidArgument("initial point lies outside the bounds")

    r = np.asarray(fun(x), dtype=float)
    cost = float(r @ r)
    history = [cost]
    lam = damping0
    message = "maximum iterations reached"
    converged = False
    jac = central_jacobian(fun, x, lower, upper, x_scale, rel_step, r)

    it = 0
    while it < max_iter:
        it += 1
        if cost == 0.0:
            converged, message = True, "zero residual"
            break
        A = jac.T @ jac
        g_full = jac.T @ r
        g = _projected_gradient(g_full, x, lower, upper)
        diag = np.diag(A).copy()
        col_norm = np.sqrt(diag)
        with np.errstate(divide="ignore", invalid="ignore"):
            cosines = np.where(col_norm > 0, np.abs(g) / (col_norm * np.sqrt(cost)), 0.0)
        if cosines.max() < gtol:
            converged, message = True, "gradient below tolerance"
            break
        diag = np.maximum(diag, 1e-30 * max(diag.max(), 1e-300))

        accepted = False
        step = np.zeros(n)
        while lam <= MAX_DAMPING:
            try:
                step = _bounded_step(A + lam * np.diag(diag), g_full, x, lower, upper)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = np.clip(x + step, lower, upper)
            if np.array_equal(x_new, x):
                lam = MAX_DAMPING * 10.0
                break
            r_new = np.asarray(fun(x_new), dtype=float)
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                accepted = True
                break
            lam *= 10.0

        if not accepted:
            lin = r + jac @ (np.clip(x + step, lower, upper) - x)
            predicted = cost - float(lin @ lin)
            if predicted <= ftol * cost:
                converged, message = True, "no further reduction possible"
            else:
                message = "step rejected at maximum damping"
            break

        rel_change = (cost - cost_new) / cost
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        lam = max(lam / 10.0, 1e-12)
        jac = central_jacobian(fun, x, lower, upper, x_scale, rel_step, r)
        log.debug("iter %d cost %.6g damping %.1e", it, cost, lam)
        if rel_change < ftol:
            converged, message = True, "relative cost change below tolerance"
            break

    return LMResult(x, cost, r, jac, it, converged, message, history)


def param_uncertainties(jacobian, residuals, rcond=1e-12) -> np.ndarray:
    """1-sigma errors ``sqrt(s^2 diag((J^T J)^+))`` with ``s^2 = SSR / (n - p)``."""
    jac = np.atleast_2d(np.asarray(jacobian, dtype=float))
    r = np.asarray(residuals, dtype=float)
    n, p = jac.shape
    if n <= p:
        raise UndefinedStatistic(f"need more points ({n}) than free parameters ({p})")
    s2 = float(r @ r) / (n - p)
    # equilibrate columns so the rcond cut is independent of parameter units
    norms = np.linalg.norm(jac, axis=0)
    norms[norms == 0] = 1.0
    scaled = jac / norms
    cov = np.linalg.pinv(scaled.T @ scaled, rcond=rcond, hermitian=True) / np.outer(norms, norms) * s2
    return np.sqrt(np.clip(np.diag(cov), 0.0, None))
