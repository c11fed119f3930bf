"""Jacobians of the ILS solution map and the condition numbers built on them.

The solution ``x = (A^t J A)^{-1} A^t J b`` has Jacobians

    J_x(A) = M1 - M2,   M1 = (A^t J A)^{-1} kron (J r)^t,
                        M2 = x^t kron (A^t J A)^{-1} A^t J,
    J_x(b) = (A^t J A)^{-1} A^t J,

with respect to ``vec(A)`` (column-major) and ``b``. ``J_x(A)`` is n x mn.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ZeroNormalizer, ZeroSolution
from .linalg_core import kron, spectral_norm
from .problem import IlsProblem, IlsSolution, solve

JOINT_RESTARTS = 64
JOINT_TOL = 1e-12
JOINT_MAXITER = 20_000
JOINT_SEED = 20030914


@dataclass(frozen=True)
class JacobianParts:
    M1: np.ndarray
    M2: np.ndarray
    JxA: np.ndarray
    Jxb: np.ndarray
    norm_M1: float
    norm_M2: float
    norm_JxA: float
    norm_Jxb: float
    norm_gram_inv: float
    norm_gram_inv_At: float


@dataclass(frozen=True)
class JointNorm:
    """Induced norm of ``[norm_a J_x(A), norm_b J_x(b)]`` under the max norm."""
    value: float
    w: np.ndarray
    restarts: int
    iterations: int


@dataclass(frozen=True)
class ConditioningReport:
    chi_A: float
    chi_b: float
    chi_Ab: float
    B: float
    bound_ii: float
    bound_iii: float
    bound_iv: float
    norm_M1: float
    norm_M2: float
    norm_JxA: float
    norm_Jxb: float
    norm_A_fro: float
    norm_b_2: float
    norm_x: float
    norm_r: float
    norm_gram_inv: float
    norm_gram_inv_At: float
    norm_a: float
    norm_b: float
    joint_w: np.ndarray = field(default=None, repr=False)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "joint_w"}
        d["joint_w"] = None if self.joint_w is None else self.joint_w.tolist()
        return d


def _norm_x(s: IlsSolution) -> float:
    nx = float(np.linalg.norm(s.x))
    if nx == 0.0:
        raise ZeroSolution("||x||_2 = 0: relative conditioning is undefined")
    return nx


def jacobian_parts(p: IlsProblem, s: IlsSolution) -> JacobianParts:
    n, m = p.n, p.m
    Ginv = s.gram_solve(np.eye(n))
    Ginv = 0.5 * (Ginv + Ginv.T)
    GinvAt = Ginv @ p.A.T
    Jxb = GinvAt * p.J.signs[None, :]
    Jr = p.J.apply(s.r)
    M1 = kron(Ginv, Jr.reshape(1, m))
    M2 = kron(s.x.reshape(1, n), Jxb)
    JxA = M1 - M2
    return JacobianParts(
        M1=M1, M2=M2, JxA=JxA, Jxb=Jxb,
        norm_M1=spectral_norm(M1), norm_M2=spectral_norm(M2),
        norm_JxA=spectral_norm(JxA), norm_Jxb=spectral_norm(Jxb),
        norm_gram_inv=spectral_norm(Ginv), norm_gram_inv_At=spectral_norm(GinvAt))


jacobian_wrt_A = jacobian_parts


def jacobian_wrt_b(p: IlsProblem, s: IlsSolution) -> np.ndarray:
    return s.gram_solve(p.A.T * p.J.signs[None, :])


def chi_A(p: IlsProblem, s: IlsSolution, parts: JacobianParts) -> float:
    return p.norm_a / _norm_x(s) * parts.norm_JxA


def chi_b(p: IlsProblem, s: IlsSolution, parts: JacobianParts | None = None) -> float:
    nx = _norm_x(s)
    if p.norm_b == 0.0:
        raise ZeroNormalizer("chi_b needs a positive norm_b")
    norm_jxb = parts.norm_Jxb if parts is not None else spectral_norm(jacobian_wrt_b(p, s))
    return p.norm_b / nx * norm_jxb


def bhp_coefficient(p: IlsProblem, s: IlsSolution, parts: JacobianParts) -> float:
    """Coefficient B of the standard first-order bound: the triangle-inequality split of ||M1 - M2||."""
    return p.norm_a / _norm_x(s) * (parts.norm_M1 + parts.norm_M2)


def joint_norm(GA: np.ndarray, Gb: np.ndarray, restarts: int = JOINT_RESTARTS,
               tol: float = JOINT_TOL, maxiter: int = JOINT_MAXITER,
               seed: int = JOINT_SEED) -> JointNorm:
    """Maximize ``||GA^t w|| + ||Gb^t w||`` over unit vectors ``w``.

    The objective is convex, so the normalized-gradient iteration is an
    ascent method; restarts guard against non-global fixed points. The first
    two starts are the top left singular vectors of ``GA`` and ``Gb``; the rest
    come from a fixed seed. All restarts are iterated together.
    """
    GA = np.atleast_2d(GA)
    Gb = np.atleast_2d(Gb)
    n = GA.shape[0]
    if Gb.shape[0] != n:
        raise DimensionMismatch("blocks must have the same number of rows")

    def objective(W):
        return np.linalg.norm(GA.T @ W, axis=0) + np.linalg.norm(Gb.T @ W, axis=0)

    if n == 1:
        w = np.ones(1)
        return JointNorm(float(objective(w[:, None])[0]), w, 1, 0)

    starts = [np.linalg.svd(G, full_matrices=False)[0][:, 0] for G in (GA, Gb)]
    rng = np.random.default_rng(seed)
    W = np.column_stack(starts + [rng.standard_normal(n) for _ in range(max(restarts - 2, 0))])
    W /= np.linalg.norm(W, axis=0)
    it = 0
    for it in range(1, maxiter + 1):
        a = GA.T @ W
        c = Gb.T @ W
        na = np.linalg.norm(a, axis=0)
        nc = np.linalg.norm(c, axis=0)
        grad = GA @ (a / np.where(na > 0, na, 1.0)) + Gb @ (c / np.where(nc > 0, nc, 1.0))
        W_new = grad / np.linalg.norm(grad, axis=0)
        # fixed points are defined up to sign
        W_new *= np.where(np.sum(W_new * W, axis=0) < 0, -1.0, 1.0)
        step = np.max(np.linalg.norm(W_new - W, axis=0))
        W = W_new
        if step <= tol:
            break
    f = objective(W)
    k = int(np.argmax(f))
    w = W[:, k]
    nz = np.flatnonzero(np.abs(w) > 1e-14)
    if nz.size and w[nz[0]] < 0:
        w = -w
    return JointNorm(float(f[k]), w, W.shape[1], it)


def chi_Ab_with_maximizer(p: IlsProblem, s: IlsSolution, parts: JacobianParts):
    nx = _norm_x(s)
    if p.norm_b == 0.0:
        raise ZeroNormalizer("chi_Ab needs a positive norm_b")
    jn = joint_norm(p.norm_a * parts.JxA, p.norm_b * parts.Jxb)
    return jn.value / nx, jn


def chi_Ab(p: IlsProblem, s: IlsSolution, parts: JacobianParts) -> float:
    return chi_Ab_with_maximizer(p, s, parts)[0]


def bound_coefficients(p: IlsProblem, s: IlsSolution | None = None,
                       parts: JacobianParts | None = None,
                       joint: bool = True) -> ConditioningReport:
    """Assemble all condition numbers and bound coefficients for a problem.

    With ``norm_b == 0`` the b-perturbation is switched off: ``chi_b`` is
    reported as 0 and ``chi_Ab`` equals ``chi_A``. With ``joint=False`` the
    joint maximization is skipped and ``chi_Ab`` is NaN.
    """
    if s is None:
        s = solve(p)
    if parts is None:
        parts = jacobian_parts(p, s)
    nx = _norm_x(s)
    cA = chi_A(p, s, parts)
    B = bhp_coefficient(p, s, parts)
    w = None
    if p.norm_b == 0.0:
        cb = 0.0
        cAb = cA
    else:
        cb = chi_b(p, s, parts)
        if joint:
            cAb, jn = chi_Ab_with_maximizer(p, s, parts)
            w = jn.w
        else:
            cAb = float("nan")
    return ConditioningReport(
        chi_A=cA, chi_b=cb, chi_Ab=cAb, B=B,
        bound_ii=cAb, bound_iii=cA + cb, bound_iv=B + cb,
        norm_M1=parts.norm_M1, norm_M2=parts.norm_M2,
        norm_JxA=parts.norm_JxA, norm_Jxb=parts.norm_Jxb,
        norm_A_fro=float(np.linalg.norm(p.A)), norm_b_2=float(np.linalg.norm(p.b)),
        norm_x=nx, norm_r=float(np.linalg.norm(s.r)),
        norm_gram_inv=parts.norm_gram_inv, norm_gram_inv_At=parts.norm_gram_inv_At,
        norm_a=p.norm_a, norm_b=p.norm_b, joint_w=w)


def analyze(p: IlsProblem, joint: bool = True) -> ConditioningReport:
    return bound_coefficients(p, joint=joint)


def eval_bound_i(report: ConditioningReport, dA, db) -> float:
    """First-order bound ``chi_A ||dA||_F / norm_a + chi_b ||db|| / norm_b``."""
    nda = float(np.linalg.norm(dA))
    ndb = float(np.linalg.norm(db))
    if report.norm_a <= 0.0:
        raise ZeroNormalizer("norm_a must be positive")
    val = report.chi_A * nda / report.norm_a
    if report.norm_b == 0.0:
        if ndb != 0.0:
            raise ZeroNormalizer("norm_b is zero but db is nonzero")
        return val
    return val + report.chi_b * ndb / report.norm_b
