"""Damped Gauss-Newton (Levenberg-Marquardt) least squares.

Minimises ``0.5 * sum(residual_fn(x)**2)`` with Marquardt's diagonal scaling:
each iteration solves ``(J^T J + mu diag(J^T J)) dx = -J^T r`` and adapts
``mu`` (x10 after a step that raises the cost, /10 after one that lowers it).
Box bounds are enforced by projecting trial points onto the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

EPS = np.finfo(float).eps


class SingularNormalEquationsError(np.linalg.LinAlgError):
    """The Jacobian is rank deficient in a way damping cannot repair."""


@dataclass(frozen=True)
class FitReport:
    """Result of a least-squares fit.

    ``gradient_norm`` is max_j |J_j . r| / (|J_j| |r_initial|) at the
    solution, ignoring directions blocked by an active bound.
    """

    parameters: dict[str, float]
    sigmas: dict[str, float]
    reduced_chi2: float
    iterations: int
    converged: bool
    cost: float = float("nan")
    gradient_norm: float = float("nan")
    message: str = ""
    cost_history: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "parameters": dict(self.parameters),
            "sigmas": dict(self.sigmas),
            "reduced_chi2": self.reduced_chi2,
            "iterations": self.iterations,
            "converged": self.converged,
            "cost": self.cost,
            "gradient_norm": self.gradient_norm,
            "message": self.message,
        }


def _bounds_arrays(bounds, n):
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    if bounds is None:
        return lo, hi
    for i, pair in enumerate(bounds):
        a, b = pair
        if a is not None:
            lo[i] = a
        if b is not None:
            hi[i] = b
    return lo, hi


def numeric_jacobian(fun, x, lo, hi, r0=None):
    """Central differences, one-sided next to a bound."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        h = 1e-6 * max(abs(x[j]), 1e-3)
        up, down = x.copy(), x.copy()
        up[j] += h
        down[j] -= h
        if up[j] > hi[j]:
            if r0 is None:
                r0 = fun(x)
            cols.append((r0 - fun(down)) / h)
        elif down[j] < lo[j]:
            if r0 is None:
                r0 = fun(x)
            cols.append((fun(up) - r0) / h)
        else:
            cols.append((fun(up) - fun(down)) / (2 * h))
    return np.column_stack(cols)


def _projected_gradient_norm(J, r, x, lo, hi, r_norm):
    """max_j |J_j . r| / (|J_j| r_norm) over directions not blocked by a bound.

    With ``r_norm`` the initial residual norm this measures how much of the
    starting misfit the gradient still points at, and it stays small at
    solutions whose residual is pure rounding noise.
    """
    if r_norm == 0:
        return 0.0
    g = J.T @ r
    col = np.linalg.norm(J, axis=0)
    # descent direction is -g; a bound blocks it when it points out of the box
    blocked = ((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0))
    cos = np.where(blocked | (col == 0), 0.0, np.abs(g) / np.maximum(col, EPS) / r_norm)
    return float(np.max(cos)) if cos.size else 0.0


def minimize(residual_fn: Callable[[np.ndarray], np.ndarray], initial: Sequence[float],
             bounds: Sequence[tuple[float | None, float | None]] | None = None, *,
             names: Sequence[str] | None = None,
             jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
             ftol: float = 1e-10, gtol: float = 1e-10, max_iter: int = 200,
             initial_damping: float = 1e-8, accept_gtol: float = 1e-4) -> FitReport:
    """Least-squares fit of ``residual_fn`` starting from ``initial``.

    Stops when an accepted step lowers the cost by a relative amount below
    ``ftol``, when the scaled gradient (see ``FitReport.gradient_norm``)
    drops below ``gtol``, when the residual vanishes
    to rounding, or after ``max_iter`` iterations.  Non-convergence is
    reported in the result, not raised.  A run only counts as converged if,
    in addition, the scaled gradient at the solution is at most
    ``accept_gtol``; components pushing against an active bound are ignored
    there, since the box stops them.

    Uncertainties are sqrt(diag((J^T J)^-1) * reduced chi^2) at the solution.

    Raises
    ------
    SingularNormalEquationsError
        If some parameter has no influence on the residuals at all.
    """
    x = np.array(initial, dtype=float)
    n_par = x.size
    names = list(names) if names is not None else [f"p{i}" for i in range(n_par)]
    lo, hi = _bounds_arrays(bounds, n_par)
    if np.any(x < lo) or np.any(x > hi):
        raise ValueError("initial point lies outside the bounds")

    def fun(p):
        return np.asarray(residual_fn(p), dtype=float)

    def jac(p, r):
        if jacobian is not None:
            return np.asarray(jacobian(p), dtype=float)
        return numeric_jacobian(fun, p, lo, hi, r)

    r = fun(x)
    if r.size < n_par:
        raise ValueError(f"{r.size} residuals cannot determine {n_par} parameters")
    if not np.all(np.isfinite(r)):
        raise ValueError("residuals are not finite at the initial point")
    cost = 0.5 * float(r @ r)
    cost0 = cost
    r0_norm = math.sqrt(2 * cost0)
    history = [cost]
    mu = initial_damping
    converged = False
    message = "maximum number of iterations reached"
    iterations = 0

    while iterations < max_iter:
        J = jac(x, r)
        g = J.T @ r
        A = J.T @ J
        d = np.diag(A).copy()
        if np.any(d <= 0):
            dead = [names[i] for i in np.flatnonzero(d <= 0)]
            raise SingularNormalEquationsError(f"residuals do not depend on {dead}")
        if _projected_gradient_norm(J, r, x, lo, hi, r0_norm) <= gtol:
            converged, message = True, "gradient below tolerance"
            break

        accepted = False
        while mu < 1e20:
            try:
                step = np.linalg.solve(A + mu * np.diag(d), -g)
            except np.linalg.LinAlgError:
                mu *= 10
                continue
            x_new = np.clip(x + step, lo, hi)
            r_new = fun(x_new)
            cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
            if cost_new < cost:
                accepted = True
                break
            mu *= 10
        iterations += 1
        if not accepted:
            converged, message = True, "no further decrease possible"
            break
        rel = (cost - cost_new) / cost
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        mu = max(mu / 10, 1e-15)
        if cost <= (16 * EPS) ** 2 * cost0:
            converged, message = True, "residual vanished"
            break
        if rel <= ftol:
            converged, message = True, "relative cost change below tolerance"
            break

    J = jac(x, r)
    dof = r.size - n_par
    red_chi2 = 2 * cost / dof if dof > 0 else float("nan")
    grad_norm = _projected_gradient_norm(J, r, x, lo, hi, r0_norm)
    if converged and grad_norm > accept_gtol:
        converged = False
        message += f"; scaled gradient {grad_norm:.3g} above {accept_gtol:g}"
    try:
        cov = np.linalg.inv(J.T @ J)
        scale = red_chi2 if np.isfinite(red_chi2) else 0.0
        sig = np.sqrt(np.clip(np.diag(cov), 0, None) * scale)
    except np.linalg.LinAlgError:
        sig = np.full(n_par, np.inf)
    return FitReport(
        parameters={k: float(v) for k, v in zip(names, x)},
        sigmas={k: float(v) for k, v in zip(names, sig)},
        reduced_chi2=float(red_chi2),
        iterations=iterations,
        converged=converged,
        cost=cost,
        gradient_norm=grad_norm,
        message=message,
        cost_history=tuple(history),
    )
