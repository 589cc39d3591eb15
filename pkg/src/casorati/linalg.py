"""Small dense linear algebra used by the curvature code."""
from __future__ import annotations

import numpy as np


def jacobi_eigh(S, tol=1e-13, max_sweeps=64):
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Rotations sweep the upper triangle row by row in a fixed order, so the
    result is deterministic.  Iteration stops once the off-diagonal
    Frobenius norm drops below ``tol`` times the Frobenius norm of ``S``.

    Returns
    -------
    values : ndarray, shape (k,)
        Eigenvalues in descending order.
    vectors : ndarray, shape (k, k)
        Orthonormal eigenvectors as columns, matching ``values``.
    """
    A = np.array(S, dtype=float)
    k = A.shape[0]
    if A.shape != (k, k):
        raise ValueError("matrix must be square")
    A = 0.5 * (A + A.T)
    V = np.eye(k)
    scale = np.linalg.norm(A)
    if k > 1 and scale > 0:
        for _ in range(max_sweeps):
            off = np.sqrt(np.sum(np.triu(A, 1) ** 2) * 2.0)
            if off <= tol * scale:
                break
            for p in range(k - 1):
                for q in range(p + 1, k):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    # Rutishauser's formulas, rotating by the smaller angle
                    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    R = np.eye(k)
                    R[p, p] = R[q, q] = c
                    R[p, q] = s
                    R[q, p] = -s
                    A = R.T @ A @ R
                    A[p, q] = A[q, p] = 0.0
                    V = V @ R
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], V[:, order]


def eigenspace_blocks(values, vectors, rtol=1e-8):
    """Group (descending) eigenpairs whose eigenvalues agree to ``rtol``.

    Returns a list of ``(mean eigenvalue, basis)`` with orthonormal basis
    columns spanning each eigenspace.
    """
    values = np.asarray(values)
    if values.size == 0:
        return []
    scale = max(float(np.max(np.abs(values))), 1e-300)
    blocks = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or abs(values[i] - values[start]) > rtol * scale + 1e-14:
            blocks.append((float(np.mean(values[start:i])), vectors[:, start:i]))
            start = i
    return blocks


def projector(basis):
    basis = np.asarray(basis)
    return basis @ basis.T


def gram_schmidt(M):
    """Orthonormalize the columns of ``M`` in index order.

    Modified Gram-Schmidt with one reorthogonalization pass.  Returns ``Q``
    and upper-triangular ``R`` with positive diagonal and ``M = Q R``.
    """
    M = np.asarray(M, dtype=float)
    N, k = M.shape
    Q = np.zeros((N, k))
    R = np.zeros((k, k))
    for j in range(k):
        v = M[:, j].copy()
        for _ in range(2):
            for i in range(j):
                c = Q[:, i] @ v
                R[i, j] += c
                v -= c * Q[:, i]
        R[j, j] = np.linalg.norm(v)
        Q[:, j] = v / R[j, j]
    return Q, R


def orthonormal_complement(E):
    """Orthonormal basis of the orthogonal complement of the columns of ``E``.

    Ambient coordinate axes are orthogonalized against the running basis;
    at each step the axis with the largest residual is taken (lowest index
    on ties), which keeps the construction well conditioned and
    reproducible.
    """
    E = np.asarray(E, dtype=float)
    N, k = E.shape
    basis = [E[:, j] for j in range(k)]
    out = []
    candidates = list(range(N))
    for _ in range(N - k):
        B = np.column_stack(basis)
        best, best_norm, best_vec = None, -1.0, None
        for c in candidates:
            v = np.zeros(N)
            v[c] = 1.0
            v -= B @ (B.T @ v)
            v -= B @ (B.T @ v)
            nv = np.linalg.norm(v)
            if nv > best_norm * (1 + 1e-12):
                best, best_norm, best_vec = c, nv, v
        candidates.remove(best)
        vec = best_vec / best_norm
        basis.append(vec)
        out.append(vec)
    if not out:
        return np.zeros((N, 0))
    return np.column_stack(out)
