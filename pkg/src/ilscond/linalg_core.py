"""Dense linear algebra primitives: vec/mat reshaping, Kronecker products,
spectral norms and SPD solves.

Matrices are plain 2-D float numpy arrays. ``vec`` stacks columns (column j
outer, row i inner), so Kronecker identities such as
``vec(K X H^t) = (H kron K) vec(X)`` hold verbatim.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

SPD_TOL = 1e-13
POWER_TOL = 1e-12
POWER_MAXITER = 100_000
# above this many entries the spectral norm switches to power iteration
DENSE_SVD_LIMIT = 250_000


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    M = np.array(A, dtype=float)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def as_vector(v, name: str = "vector") -> np.ndarray:
    x = np.array(v, dtype=float)
    if x.ndim != 1:
        x = x.reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def vec_of_matrix(A) -> np.ndarray:
    """Stack the columns of ``A`` into one vector."""
    return np.asarray(A, dtype=float).reshape(-1, order="F")


def mat_of_vec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec_of_matrix`."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != rows * cols:
        raise DimensionMismatch(
            f"cannot reshape vector of length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def kron(H, K) -> np.ndarray:
    H = np.atleast_2d(np.asarray(H, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    rH, cH = H.shape
    rK, cK = K.shape
    out = np.empty((rH * rK, cH * cK))
    for i in range(rH):
        for j in range(cH):
            out[i * rK:(i + 1) * rK, j * cK:(j + 1) * cK] = H[i, j] * K
    return out


def top_singular_triplet(M, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER,
                         method: str = "auto"):
    """Largest singular value with its left and right singular vectors.

    The right vector is sign-normalized so its first nonzero entry is positive.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0 or not np.any(M):
        v = np.zeros(M.shape[1])
        if v.size:
            v[0] = 1.0
        u = np.zeros(M.shape[0])
        if u.size:
            u[0] = 1.0
        return 0.0, u, v
    if method == "auto":
        method = "svd" if M.size <= DENSE_SVD_LIMIT else "power"
    if method == "svd":
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        sigma, u, v = float(s[0]), U[:, 0], Vt[0]
    elif method == "power":
        sigma, u, v = _power_iteration(M, tol, maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    nz = np.flatnonzero(np.abs(v) > 1e-14 * np.max(np.abs(v)))
    if nz.size and v[nz[0]] < 0:
        u, v = -u, -v
    return sigma, u, v


def _power_iteration(M, tol, maxiter):
    # iterate on M^t M; deterministic start so results are reproducible
    n = M.shape[1]
    v = np.ones(n) / np.sqrt(n) + np.linspace(0.0, 1e-3, n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(maxiter):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v_new = w / nw
        sigma_new = np.sqrt(nw)
        done = abs(sigma_new - sigma) <= tol * sigma_new
        v, sigma = v_new, sigma_new
        if done:
            break
    Mv = M @ v
    sigma = float(np.linalg.norm(Mv))
    u = Mv / sigma if sigma > 0 else Mv
    return sigma, u, v


def spectral_norm(M, method: str = "auto") -> float:
    """Largest singular value of ``M`` (0 for the zero matrix)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    if method == "auto":
        method = "svd" if M.size <= DENSE_SVD_LIMIT else "power"
    if method == "svd":
        return float(np.linalg.svd(M, compute_uv=False)[0])
    return top_singular_triplet(M, method="power")[0]


def cholesky(S, tol: float = SPD_TOL, scale: float | None = None) -> np.ndarray:
    """Lower Cholesky factor of a symmetric matrix.

    Raises NotPositiveDefinite when a pivot drops to ``tol * scale`` or
    below; ``scale`` defaults to ``max(diag(S))``.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {S.shape}")
    n = S.shape[0]
    if not np.allclose(S, S.T, rtol=1e-12, atol=1e-14 * max(1.0, np.max(np.abs(S), initial=0.0))):
        raise ValueError("matrix is not symmetric")
    if scale is None:
        scale = np.max(np.diag(S), initial=0.0)
    if scale <= 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    L = np.zeros_like(S)
    for j in range(n):
        pivot = S[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= tol * scale:
            raise NotPositiveDefinite(
                f"pivot {j} = {pivot:.3e} is not above {tol:g} x scale {scale:.3e}")
        L[j, j] = np.sqrt(pivot)
        L[j + 1:, j] = (S[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def cholesky_solve(L: np.ndarray, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    z = solve_triangular(L, y, lower=True)
    return solve_triangular(L.T, z, lower=False)


def spd_solve(S, y, tol: float = SPD_TOL) -> np.ndarray:
    """Solve ``S z = y`` for symmetric positive definite ``S``.

    ``y`` may be a vector or a matrix of right-hand sides.
    """
    S = np.asarray(S, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape[0] != S.shape[0]:
        raise DimensionMismatch(f"rhs has {y.shape[0]} rows, matrix is {S.shape}")
    return cholesky_solve(cholesky(S, tol), y)
