"""Indefinite least squares problems: definition, validation, solution,
GSVD construction, perturbation, and the JSON problem format.

An ILS problem minimizes ``(b - A u)^t J (b - A u)`` where ``J`` is a
signature matrix. The signature is always stored in block form, ``+1`` rows
first and ``-1`` rows last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (AngleOutOfRange, DimensionMismatch, NotOrthogonal,
                     NotPositiveDefinite, PerturbationLeftDomain, SingularX,
                     ZeroNormalizer)
from .linalg_core import as_matrix, as_vector, cholesky, cholesky_solve

ORTHO_TOL = 1e-12
SINGULAR_X_TOL = 1e-13


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Signature:
    m_plus: int
    m_minus: int

    def __post_init__(self):
        if self.m_plus < 1 or self.m_minus < 0:
            raise ValueError(
                f"invalid signature: m_plus={self.m_plus}, m_minus={self.m_minus}")

    @property
    def m(self) -> int:
        return self.m_plus + self.m_minus

    @property
    def signs(self) -> np.ndarray:
        return np.concatenate([np.ones(self.m_plus), -np.ones(self.m_minus)])

    def matrix(self) -> np.ndarray:
        return np.diag(self.signs)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Compute ``J v`` (rows of a matrix are scaled)."""
        v = np.asarray(v, dtype=float)
        s = self.signs
        return s * v if v.ndim == 1 else s[:, None] * v


@dataclass(frozen=True)
class IlsProblem:
    A: np.ndarray
    b: np.ndarray
    J: Signature
    norm_a: float
    norm_b: float

    @classmethod
    def create(cls, A, b, m_plus: int, m_minus: int,
               norm_a: Optional[float] = None,
               norm_b: Optional[float] = None) -> "IlsProblem":
        """Build a problem; normalizers default to ``||A||_F`` and ``||b||_2``."""
        A = as_matrix(A, "A")
        b = as_vector(b, "b")
        sig = Signature(int(m_plus), int(m_minus))
        m, n = A.shape
        if b.size != m:
            raise DimensionMismatch(f"b has length {b.size}, A has {m} rows")
        if sig.m != m:
            raise DimensionMismatch(
                f"signature covers {sig.m} rows, A has {m} rows")
        if not m > n >= 1:
            raise DimensionMismatch(f"need m > n >= 1, got m={m}, n={n}")
        if sig.m_plus < n:
            raise DimensionMismatch(
                f"m_plus={sig.m_plus} < n={n}: A^t J A cannot be positive definite")
        norm_a = float(np.linalg.norm(A)) if norm_a is None else float(norm_a)
        norm_b = float(np.linalg.norm(b)) if norm_b is None else float(norm_b)
        if not norm_a > 0.0:
            raise ZeroNormalizer("norm_a must be positive")
        if norm_b < 0.0:
            raise ValueError("norm_b must be nonnegative")
        return cls(_frozen(A), _frozen(b), sig, norm_a, norm_b)

    @classmethod
    def from_signs(cls, A, b, signs: Sequence[float], **kw) -> "IlsProblem":
        """Build a problem from an arbitrary +-1 sign vector by moving the
        +1 rows ahead of the -1 rows (relative order kept)."""
        signs = np.asarray(signs, dtype=float)
        if not np.all(np.abs(signs) == 1.0):
            raise ValueError("signature entries must be +1 or -1")
        order = np.concatenate([np.flatnonzero(signs > 0), np.flatnonzero(signs < 0)])
        A = as_matrix(A, "A")
        b = as_vector(b, "b")
        if A.shape[0] != signs.size or b.size != signs.size:
            raise DimensionMismatch("signs, A and b disagree in length")
        return cls.create(A[order], b[order], int(np.sum(signs > 0)),
                          int(np.sum(signs < 0)), **kw)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def gram_scale(self) -> float:
        """Largest diagonal entry of ``A^t A``: the reference size for
        deciding whether ``A^t J A`` is numerically positive definite."""
        return float(np.max(np.sum(self.A * self.A, axis=0)))

    def gram(self) -> np.ndarray:
        G = self.A.T @ self.J.apply(self.A)
        return 0.5 * (G + G.T)

    def with_normalizers(self, norm_a: Optional[float] = None,
                         norm_b: Optional[float] = None) -> "IlsProblem":
        return IlsProblem.create(
            self.A, self.b, self.J.m_plus, self.J.m_minus,
            self.norm_a if norm_a is None else norm_a,
            self.norm_b if norm_b is None else norm_b)


@dataclass(frozen=True)
class IlsSolution:
    x: np.ndarray
    r: np.ndarray
    gram: np.ndarray
    chol: np.ndarray = field(repr=False)

    def gram_solve(self, y) -> np.ndarray:
        """Apply ``(A^t J A)^{-1}`` using the cached factor."""
        return cholesky_solve(self.chol, y)


def validate(p: IlsProblem) -> np.ndarray:
    """Return the Cholesky factor of ``A^t J A`` or raise NotPositiveDefinite."""
    return cholesky(p.gram(), scale=p.gram_scale())


def solve(p: IlsProblem) -> IlsSolution:
    """Solve the optimality condition ``A^t J A x = A^t J b``."""
    G = p.gram()
    L = cholesky(G, scale=p.gram_scale())
    x = cholesky_solve(L, p.A.T @ p.J.apply(p.b))
    r = p.b - p.A @ x
    return IlsSolution(_frozen(x), _frozen(r), _frozen(G), _frozen(L))


def optimality_residual(p: IlsProblem, s: IlsSolution) -> float:
    return float(np.linalg.norm(p.A.T @ p.J.apply(s.r)))


def epsilon_of(p: IlsProblem, dA, db) -> float:
    """Relative size ``max(||dA||_F / norm_a, ||db||_2 / norm_b)``.

    With ``norm_b == 0`` only ``db = 0`` is admissible and the b term drops out.
    """
    ea = float(np.linalg.norm(dA)) / p.norm_a
    nb = float(np.linalg.norm(db))
    if p.norm_b == 0.0:
        if nb != 0.0:
            raise ZeroNormalizer("norm_b is zero but db is nonzero")
        return ea
    return max(ea, nb / p.norm_b)


def perturb(p: IlsProblem, dA, db) -> IlsProblem:
    """Problem with data ``A + dA``, ``b + db`` and the base normalizers."""
    dA = as_matrix(dA, "dA")
    db = as_vector(db, "db")
    if dA.shape != p.A.shape or db.shape != p.b.shape:
        raise DimensionMismatch("perturbation shape does not match the problem")
    q = IlsProblem.create(p.A + dA, p.b + db, p.J.m_plus, p.J.m_minus,
                          p.norm_a, p.norm_b)
    try:
        validate(q)
    except NotPositiveDefinite as exc:
        raise PerturbationLeftDomain(f"perturbed problem is not admissible: {exc}") from exc
    return q


def solution_change(p: IlsProblem, s: IlsSolution, dA, db) -> np.ndarray:
    """Exact change ``x(A + dA, b + db) - x(A, b)``.

    Uses ``G' dx = dA^t J r + A'^t J (db - dA x)`` with ``A' = A + dA`` and
    ``G' = A'^t J A'``, which follows from the base optimality condition and
    avoids subtracting two nearly equal solutions.
    """
    dA = np.asarray(dA, dtype=float)
    db = np.asarray(db, dtype=float)
    Ap = p.A + dA
    Gp = Ap.T @ p.J.apply(Ap)
    Gp = 0.5 * (Gp + Gp.T)
    try:
        L = cholesky(Gp, scale=float(np.max(np.sum(Ap * Ap, axis=0))))
    except NotPositiveDefinite as exc:
        raise PerturbationLeftDomain(f"perturbed problem is not admissible: {exc}") from exc
    rhs = dA.T @ p.J.apply(s.r) + Ap.T @ p.J.apply(db - dA @ s.x)
    return cholesky_solve(L, rhs)


# -- GSVD canonical form ----------------------------------------------------

@dataclass(frozen=True)
class GsvdSpec:
    thetas: tuple
    X: np.ndarray
    m_plus: int
    m_minus: int
    Q_plus: Optional[np.ndarray] = None
    Q_minus: Optional[np.ndarray] = None


def _check_orthogonal(Q, order, name):
    if Q is None:
        return np.eye(order)
    Q = as_matrix(Q, name)
    if Q.shape != (order, order):
        raise DimensionMismatch(f"{name} must be {order}x{order}, got {Q.shape}")
    if np.max(np.abs(Q.T @ Q - np.eye(order)), initial=0.0) > ORTHO_TOL:
        raise NotOrthogonal(f"{name} is not orthogonal to {ORTHO_TOL:g}")
    return Q


def from_gsvd(spec: GsvdSpec) -> np.ndarray:
    """Matrix ``A = blockdiag(Q+, Q-) [C; S] X`` of a GSVD specification."""
    thetas = np.asarray(spec.thetas, dtype=float).reshape(-1)
    n = thetas.size
    X = as_matrix(spec.X, "X")
    if n < 1 or X.shape != (n, n):
        raise DimensionMismatch(f"X must be {n}x{n}, got {X.shape}")
    if spec.m_plus < n:
        raise DimensionMismatch(f"m_plus={spec.m_plus} must be at least n={n}")
    if np.any(thetas >= math.pi / 4) or np.any(thetas < 0):
        raise AngleOutOfRange("angles must lie in [0, pi/4)")
    if np.any(np.diff(thetas) > 0):
        raise AngleOutOfRange("angles must be nonincreasing")
    if np.any(thetas[spec.m_minus:] != 0):
        raise AngleOutOfRange(f"angles beyond index m_minus={spec.m_minus} must be zero")
    sv = np.linalg.svd(X, compute_uv=False)
    if sv[-1] <= SINGULAR_X_TOL * sv[0]:
        raise SingularX("X is numerically singular")
    Qp = _check_orthogonal(spec.Q_plus, spec.m_plus, "Q_plus")
    Qm = _check_orthogonal(spec.Q_minus, spec.m_minus, "Q_minus")

    C = np.zeros((spec.m_plus, n))
    C[np.arange(n), np.arange(n)] = np.cos(thetas)
    S = np.zeros((spec.m_minus, n))
    k = min(spec.m_minus, n)
    S[np.arange(k), np.arange(k)] = np.sin(thetas[:k])
    return np.vstack([Qp @ C @ X, Qm @ S @ X])


def gsvd_gram(spec: GsvdSpec) -> np.ndarray:
    """``X^t (C^t C - S^t S) X`` computed from the angles directly."""
    thetas = np.asarray(spec.thetas, dtype=float)
    X = np.asarray(spec.X, dtype=float)
    return X.T @ np.diag(np.cos(2.0 * thetas)) @ X


def problem_from_gsvd(spec: GsvdSpec, b, norm_a=None, norm_b=None) -> IlsProblem:
    return IlsProblem.create(from_gsvd(spec), b, spec.m_plus, spec.m_minus,
                             norm_a, norm_b)


# -- JSON problem format ----------------------------------------------------

def problem_to_dict(p: IlsProblem) -> dict:
    return {
        "m_plus": p.J.m_plus,
        "m_minus": p.J.m_minus,
        "A": p.A.tolist(),
        "b": p.b.tolist(),
        "norm_a": p.norm_a,
        "norm_b": p.norm_b,
    }


def problem_from_dict(d: dict) -> IlsProblem:
    """Parse the JSON problem format (``A`` given row-major).

    A ``gsvd`` block (``thetas``, ``X``, optional ``Q_plus``/``Q_minus``) may
    replace ``A``; if both are present they must agree.
    """
    if "problem" in d and isinstance(d["problem"], dict):
        d = d["problem"]
    try:
        m_plus = int(d["m_plus"])
        m_minus = int(d["m_minus"])
        b = d["b"]
    except KeyError as exc:
        raise ValueError(f"problem is missing field {exc.args[0]!r}") from None
    A = d.get("A")
    g = d.get("gsvd")
    if g is not None:
        spec = GsvdSpec(thetas=tuple(g["thetas"]), X=as_matrix(g["X"], "X"),
                        m_plus=m_plus, m_minus=m_minus,
                        Q_plus=g.get("Q_plus"), Q_minus=g.get("Q_minus"))
        A_g = from_gsvd(spec)
        if A is None:
            A = A_g
        else:
            A = as_matrix(A, "A")
            if A.shape != A_g.shape or not np.allclose(A, A_g, rtol=1e-10, atol=1e-12):
                raise ValueError("A and gsvd block describe different matrices")
    if A is None:
        raise ValueError("problem needs either 'A' or a 'gsvd' block")
    return IlsProblem.create(A, b, m_plus, m_minus, d.get("norm_a"), d.get("norm_b"))
