"""Least-squares solvers for donor weights.

``active_set_lsq`` is a primal active-set method in the Lawson-Hanson style.
It minimises ``||A @ x - y||^2`` subject to ``x >= 0`` and, optionally,
``sum(x) == 1``.

Simplex scheme: the equality constraint is eliminated on the current free
set ``F`` by choosing a pivot column ``p`` in ``F`` and substituting
``x_p = 1 - sum(x_F\\p)``.  The equality-constrained subproblem then becomes
an unconstrained least-squares fit of the residual ``y - A[:, p]`` on the
differenced columns ``A[:, j] - A[:, p]``, solved with an orthogonal
(SVD-based) routine.  Every iterate stays in the simplex.  When finished the
weights are rescaled by their sum to remove rounding drift.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError


def _subproblem(A: np.ndarray, y: np.ndarray, free: list[int], simplex: bool) -> np.ndarray:
    if not simplex:
        return np.linalg.lstsq(A[:, free], y, rcond=None)[0]
    p, rest = free[0], free[1:]
    if not rest:
        return np.ones(1)
    B = A[:, rest] - A[:, [p]]
    v = np.linalg.lstsq(B, y - A[:, p], rcond=None)[0]
    return np.concatenate(([1.0 - v.sum()], v))


def active_set_lsq(
    A: np.ndarray,
    y: np.ndarray,
    *,
    simplex: bool = False,
    maxiter: int | None = None,
    tol: float | None = None,
) -> tuple[np.ndarray, int]:
    """Non-negative (optionally simplex-constrained) least squares.

    Parameters
    ----------
    A : ndarray, shape (m, n)
    y : ndarray, shape (m,)
    simplex : bool
        Also require the coefficients to sum to one.
    maxiter : int, optional
        Cap on subproblem solves; defaults to ``10 * n``.
    tol : float, optional
        Tolerance on the KKT multipliers.

    Returns
    -------
    x : ndarray, shape (n,)
    iterations : int

    Raises
    ------
    ConvergenceError
        If the iteration cap is reached before the KKT conditions hold.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    if n == 0:
        return np.zeros(0), 0
    if maxiter is None:
        maxiter = 10 * n
    if tol is None:
        eps = np.finfo(float).eps
        tol = 10 * eps * max(m, n) * max(np.linalg.norm(A), 1.0) * max(np.linalg.norm(y), 1.0)

    x = np.zeros(n)
    free: list[int] = []
    if simplex:
        start = int(np.argmin(((A - y[:, None]) ** 2).sum(axis=0)))
        x[start] = 1.0
        free = [start]

    iterations = 0
    while True:
        grad = A.T @ (A @ x - y)
        bound = np.ones(n, dtype=bool)
        bound[free] = False
        if not bound.any():
            break
        lam = grad.copy()
        if simplex:
            lam -= grad[free].mean()
        lam[~bound] = np.inf
        j = int(np.argmin(lam))
        if lam[j] >= -tol:
            break
        free.append(j)
        first = True
        while True:
            iterations += 1
            if iterations > maxiter:
                raise ConvergenceError(f"active-set solver hit its iteration cap ({maxiter}) before convergence")
            z = _subproblem(A, y, free, simplex)
            if np.all(z > 0):
                x[:] = 0.0
                x[free] = z
                break
            if first and z[free.index(j)] <= 0:
                # Entering variable cannot move: the multiplier test was at round-off level.
                free.remove(j)
                return _finish(x, simplex), iterations
            first = False
            xf = x[free]
            neg = z <= 0
            alpha = np.min(xf[neg] / (xf[neg] - z[neg]))
            x[free] = xf + alpha * (z - xf)
            floor = 1e-15 * max(1.0, np.abs(x).max())
            keep = [k for k in free if x[k] > floor]
            if not keep:
                keep = [free[int(np.argmax(x[free]))]]
            for k in free:
                if k not in keep:
                    x[k] = 0.0
            free = keep
    return _finish(x, simplex), iterations


def _finish(x: np.ndarray, simplex: bool) -> np.ndarray:
    x = np.where(x > 0, x, 0.0)
    if simplex:
        x = x / x.sum()
    return x
