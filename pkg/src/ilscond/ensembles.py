"""Seeded random ILS problems and the property suites run over them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .conditioning import bound_coefficients
from .diagnostics import lemma_m_bounds, lemma_uvw_check, theorem_diagnostics
from .errors import IlsError, VanishingTerm
from .problem import GsvdSpec, IlsProblem, from_gsvd


def random_orthogonal(rng: np.random.Generator, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((0, 0))
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


def random_gsvd_spec(rng: np.random.Generator, m_max: int = 6, n_max: int = 3,
                     angle_gap: float = 0.05, log_x_spread: float = 1.0) -> GsvdSpec:
    """Random admissible GSVD data with ``m <= m_max`` and ``n <= n_max``.

    Angles stay ``angle_gap`` below pi/4 and the singular values of X lie in
    ``[e^-spread, e^spread]``, which keeps the gram matrix well conditioned.
    """
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(n + 1, m_max + 1))
    m_plus = int(rng.integers(n, m + 1))
    m_minus = m - m_plus
    thetas = np.sort(rng.uniform(0.0, math.pi / 4 - angle_gap, n))[::-1]
    thetas[m_minus:] = 0.0
    sv = np.exp(rng.uniform(-log_x_spread, log_x_spread, n))
    X = random_orthogonal(rng, n) @ np.diag(sv) @ random_orthogonal(rng, n)
    return GsvdSpec(thetas=tuple(thetas), X=X, m_plus=m_plus, m_minus=m_minus,
                    Q_plus=random_orthogonal(rng, m_plus),
                    Q_minus=random_orthogonal(rng, m_minus))


def random_problem(rng: np.random.Generator, **kw) -> IlsProblem:
    spec = random_gsvd_spec(rng, **kw)
    A = from_gsvd(spec)
    b = rng.standard_normal(A.shape[0])
    return IlsProblem.create(A, b, spec.m_plus, spec.m_minus)


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    skipped: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.checked > 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.checked} checked, {self.skipped} skipped, "
                f"{len(self.failures)} failed")


def _log_uniform(rng, size, lo=-6.0, hi=6.0):
    return 10.0 ** rng.uniform(lo, hi, size)


def lemma_m_suite(seed: int, count: int) -> SuiteResult:
    rng = np.random.default_rng([seed, 1])
    res = SuiteResult("lemma m-inequalities")
    m1s, m2s = _log_uniform(rng, count), _log_uniform(rng, count)
    for m1, m2 in zip(m1s, m2s):
        res.checked += 1
        if not lemma_m_bounds(float(m1), float(m2)).holds:
            res.failures.append(f"m1={m1!r}, m2={m2!r}")
    return res


def lemma_uvw_suite(seed: int, count: int) -> SuiteResult:
    rng = np.random.default_rng([seed, 2])
    res = SuiteResult("lemma uvw-inequalities")
    u, v = _log_uniform(rng, count), _log_uniform(rng, count)
    # rho >= 1 exactly when w >= v
    w = v * (1.0 + _log_uniform(rng, count, -6.0, 3.0))
    for ui, vi, wi in zip(u, v, w):
        res.checked += 1
        try:
            lemma_uvw_check(float(ui), float(vi), float(wi))
        except AssertionError as exc:
            res.failures.append(str(exc))
    return res


def theorem_suite(seed: int, count: int) -> SuiteResult:
    """Check the guaranteed inequality system on ``count`` random problems."""
    rng = np.random.default_rng([seed, 3])
    res = SuiteResult("theorem inequality system")
    while res.checked < count:
        p = random_problem(rng)
        try:
            d = theorem_diagnostics(bound_coefficients(p, joint=False))
        except VanishingTerm:
            res.skipped += 1
            continue
        except IlsError as exc:
            res.failures.append(f"problem construction failed: {exc}")
            res.checked += 1
            continue
        res.checked += 1
        if not d.guaranteed_hold:
            res.failures.append(
                f"rho={d.rho!r} lambda1={d.lambda1!r} lambda2={d.lambda2!r}")
    return res


def run_all(seed: int, count: int) -> List[SuiteResult]:
    return [lemma_m_suite(seed, count), lemma_uvw_suite(seed, count),
            theorem_suite(seed, count)]
