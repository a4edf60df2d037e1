"""Dense tableau simplex for small LPs whose origin is feasible.

Solves

    maximize    c^T x
    subject to  A x <= b,  x >= 0,

with ``b >= 0`` so that the slack basis is a valid starting point and no
phase-one is needed. Bland's rule guards against cycling, which matters here
because the separation LP is highly degenerate at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LPResult:
    status: str  # "optimal", "unbounded" or "iteration_limit"
    x: np.ndarray
    objective: float
    iterations: int


def simplex_max(c, A, b, max_iter=5000, tol=1e-11):
    """Maximize ``c @ x`` over ``{x >= 0 : A @ x <= b}`` with ``b >= 0``.

    Parameters
    ----------
    c : (N,) array_like
    A : (m, N) array_like
    b : (m,) array_like
        Must be non-negative.
    max_iter : int
        Pivot budget; exceeding it returns status ``"iteration_limit"``
        together with the current (feasible) vertex.
    tol : float
        Pivoting tolerance relative to the problem scale.

    Returns
    -------
    LPResult
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, N = A.shape
    if np.any(b < 0):
        raise ValueError("simplex_max requires b >= 0 (origin feasible)")

    scale = max(1.0, np.abs(A).max(initial=0.0), np.abs(c).max(initial=0.0))
    eps = tol * scale
    # Tableau rows: constraints then reduced-cost row; last column is rhs.
    T = np.zeros((m + 1, N + m + 1))
    T[:m, :N] = A
    T[:m, N : N + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :N] = -c
    basis = np.arange(N, N + m)

    it = 0
    status = "optimal"
    while True:
        reduced = T[m, :-1]
        entering = np.flatnonzero(reduced < -eps)
        if entering.size == 0:
            break
        if it >= max_iter:
            status = "iteration_limit"
            break
        j = entering[0]  # Bland: lowest index
        col = T[:m, j]
        pos = col > eps
        if not pos.any():
            status = "unbounded"
            break
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        rmin = ratios.min()
        # Bland tie-break on the leaving variable: smallest basic index.
        ties = np.flatnonzero(ratios <= rmin + eps * max(1.0, abs(rmin)))
        r = ties[np.argmin(basis[ties])]
        T[r] /= T[r, j]
        f = T[:, j].copy()
        f[r] = 0.0
        T -= np.outer(f, T[r])
        basis[r] = j
        it += 1

    x_full = np.zeros(N + m)
    x_full[basis] = T[:m, -1]
    x = np.maximum(x_full[:N], 0.0)
    return LPResult(status=status, x=x, objective=float(c @ x), iterations=it)
