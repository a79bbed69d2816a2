"""Cyclic Jacobi eigensolver for dense real symmetric matrices.

Rotations are applied in round-robin (tournament) order: each round pairs
every index with exactly one partner, so the n/2 rotations of a round act on
disjoint rows and columns and can be applied together as array operations.
Every off-diagonal pair is visited once per sweep.
"""
from __future__ import annotations

import numpy as np

from .errors import OracleError


def _round_robin(n):
    """Rounds of disjoint (p, q) index pairs covering all pairs of range(n)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        p = np.array([a for a, _ in pairs], dtype=int)
        q = np.array([b for _, b in pairs], dtype=int)
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, tol=1e-12, max_sweeps=60):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric `a`.

    Iterates full sweeps until the off-diagonal Frobenius norm is at most
    ``tol * ||a||_F``. Raises OracleError when `max_sweeps` is exhausted.
    """
    A = np.array(a, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=0):
        raise ValueError("matrix must be exactly symmetric")
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0:
        return np.diag(A).copy(), V
    rounds = _round_robin(n)
    diag_idx = np.arange(n)
    off_mask = ~np.eye(n, dtype=bool)

    def off_norm():
        return float(np.linalg.norm(A[off_mask]))

    for sweep in range(max_sweeps):
        if off_norm() <= tol * scale:
            break
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            with np.errstate(over="ignore"):
                theta = (aqq - app) / (2.0 * apq)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(1.0, theta))
            c = 1.0 / np.hypot(1.0, t)
            s = t * c

            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq

            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
    else:
        if off_norm() > tol * scale:
            raise OracleError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off_norm():.3e}, target {tol * scale:.3e})")

    w = A[diag_idx, diag_idx].copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]
