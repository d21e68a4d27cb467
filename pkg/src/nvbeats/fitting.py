"""Damped least-squares fitting core.

A compact Levenberg-Marquardt loop with column scaling, used by the
spectral peak fit and the multi-temperature fringe fit.  Jacobians are
supplied analytically by the callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["FitError", "FitResult", "levenberg_marquardt", "scaled_condition_number"]


class FitError(RuntimeError):
    """Raised when a fit fails to converge or the problem is degenerate."""


@dataclass
class FitResult:
    params: np.ndarray
    cost: float
    n_iter: int
    converged: bool
    jacobian: np.ndarray

    @property
    def residual_rms(self) -> float:
        # cost is 0.5*sum(r^2) over n residuals
        n = self.jacobian.shape[0]
        return float(np.sqrt(2.0 * self.cost / n))


def scaled_condition_number(jac: np.ndarray) -> float:
    """Condition number of the column-normalized Jacobian.

    Column normalization removes the arbitrary parameter units (Hz vs
    dimensionless amplitudes) so the number reflects genuine degeneracy.
    """
    norms = np.linalg.norm(jac, axis=0)
    if np.any(norms == 0):
        return np.inf
    return float(np.linalg.cond(jac / norms))


def levenberg_marquardt(
    residuals: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    p0: np.ndarray,
    max_iter: int = 500,
    rel_step_tol: float = 1e-10,
    lam0: float = 1e-3,
) -> FitResult:
    """Minimize 0.5*||r(p)||^2 by damped Gauss-Newton steps.

    The damping parameter multiplies diag(J^T J) (Marquardt scaling), is
    reduced tenfold on accepted steps and raised tenfold on rejected ones.
    Convergence is declared when the relative step drops below
    ``rel_step_tol``; hitting ``max_iter`` leaves ``converged`` False.
    """
    p = np.asarray(p0, dtype=float).copy()
    r = residuals(p)
    cost = 0.5 * float(r @ r)
    lam = lam0
    jac = jacobian(p)

    n_iter = 0
    converged = False
    for n_iter in range(1, max_iter + 1):
        jtj = jac.T @ jac
        jtr = jac.T @ r
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0

        accepted = False
        for _ in range(30):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_try = p + step
            r_try = residuals(p_try)
            cost_try = 0.5 * float(r_try @ r_try)
            if np.isfinite(cost_try) and cost_try <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break

        rel = np.max(np.abs(step) / np.maximum(np.abs(p_try), 1e-300))
        p, r, cost = p_try, r_try, cost_try
        jac = jacobian(p)
        lam = max(lam / 10.0, 1e-14)
        if rel < rel_step_tol:
            converged = True
            break

    return FitResult(params=p, cost=cost, n_iter=n_iter, converged=converged, jacobian=jac)
