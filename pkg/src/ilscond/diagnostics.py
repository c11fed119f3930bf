"""Overestimation diagnostics for the coefficient ``B`` of the standard bound.

Three scalars decide whether ``B + chi_b`` uniformly overestimates the
attainable ``chi_A + chi_b``:

    rho     = (B + chi_b) / (chi_A + chi_b)
    lambda1 = (||M1|| + ||M2||) / ||M1 - M2||     (cancellation factor)
    lambda2 = norm_a ||x|| / norm_b               (scale factor)

They always satisfy ``lambda1 >= rho`` and ``lambda2 >= rho/2 - 1``, and at
least one of ``2 rho >= lambda1`` and ``rho + 1/2 >= lambda2``. Overestimation
is large for every perturbation exactly when both lambdas are large.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .conditioning import ConditioningReport
from .errors import NonPositiveInput, PreconditionViolated, VanishingTerm

DEFAULT_TAU = 10.0
# relative slack on the inequality checks; absorbs rounding only
CHECK_RTOL = 1e-12


def _ge(a: float, b: float, rtol: float = CHECK_RTOL) -> bool:
    return a >= b - rtol * max(abs(a), abs(b))


@dataclass(frozen=True)
class MBounds:
    lower: float
    value: float
    upper: float
    mu: float

    @property
    def holds(self) -> bool:
        return _ge(self.value, self.lower) and _ge(self.upper, self.value)


def lemma_m_bounds(m1: float, m2: float) -> MBounds:
    """``2/(1+mu) <= (m1+m2)/m2 <= 2/(1-mu)`` with ``mu = |m1-m2|/(m1+m2)``."""
    if not (m1 > 0 and m2 > 0):
        raise NonPositiveInput(f"m1 and m2 must be positive, got {m1}, {m2}")
    total = m1 + m2
    mu = abs(m1 - m2) / total
    # 1 -+ mu = 2 min / total and 2 max / total, without cancellation
    lower = total / max(m1, m2)
    upper = total / min(m1, m2)
    return MBounds(lower, total / m2, upper, mu)


@dataclass(frozen=True)
class UvwReport:
    rho: float
    a: bool  # w/u + 1 >= rho
    b: bool  # rho >= (w/u + 1)/2
    c: bool  # w/v >= rho
    d: bool  # rho >= (w/v)/2

    @property
    def holds(self) -> bool:
        return self.a and self.c and (self.b or self.d)


def lemma_uvw_check(u: float, v: float, w: float) -> UvwReport:
    if not (u > 0 and v > 0 and w > 0):
        raise NonPositiveInput(f"u, v, w must be positive, got {u}, {v}, {w}")
    rho = (w + u) / (v + u)
    if rho < 1.0:
        raise PreconditionViolated(f"rho = {rho} < 1")
    rep = UvwReport(
        rho=rho,
        a=_ge(w / u + 1.0, rho),
        b=_ge(rho, 0.5 * (w / u + 1.0)),
        c=_ge(w / v, rho),
        d=_ge(rho, 0.5 * w / v),
    )
    if not rep.holds:
        raise AssertionError(f"lemma violated for u={u}, v={v}, w={w}: {rep}")
    return rep


@dataclass(frozen=True)
class TheoremDiagnostics:
    rho: float
    lambda1: float
    lambda2: float
    star_b_holds: bool
    star_d_holds: bool
    lower1: float
    lower2: float
    overestimation_floor: float
    provisionally_forward_stable: bool
    tau: float

    @property
    def guaranteed_hold(self) -> bool:
        """The unconditional part: both lower bounds and at least one (*)."""
        return (_ge(self.lambda1, self.lower1) and _ge(self.lambda2, self.lower2)
                and (self.star_b_holds or self.star_d_holds))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["guaranteed_hold"] = self.guaranteed_hold
        return d


def theorem_diagnostics(report: ConditioningReport, tau: float = DEFAULT_TAU) -> TheoremDiagnostics:
    """Evaluate rho, lambda1, lambda2 and the inequality system for a report.

    ``||M1|| = 0`` (zero residual) is allowed: then lambda1 = rho = 1.
    Quantities that appear as divisors or as normalizers must be positive.
    """
    checks = {
        "norm_a": report.norm_a,
        "norm_b": report.norm_b,
        "norm_x": report.norm_x,
        "norm_M1 - M2": report.norm_JxA,
        "norm_M2": report.norm_M2,
        "chi_A": report.chi_A,
        "chi_b": report.chi_b,
    }
    for name, val in checks.items():
        if not val > 0.0 or not np.isfinite(val):
            raise VanishingTerm(name)
    rho = (report.B + report.chi_b) / (report.chi_A + report.chi_b)
    lam1 = (report.norm_M1 + report.norm_M2) / report.norm_JxA
    lam2 = report.norm_a * report.norm_x / report.norm_b
    star_b = _ge(2.0 * rho, lam1)
    star_d = _ge(rho + 0.5, lam2)
    # each starred inequality that holds gives its own lower bound on rho
    floors = [f for f, ok in ((0.5 * lam1, star_b), (lam2 - 0.5, star_d)) if ok]
    return TheoremDiagnostics(
        rho=rho, lambda1=lam1, lambda2=lam2,
        star_b_holds=star_b, star_d_holds=star_d,
        lower1=rho, lower2=0.5 * rho - 1.0,
        overestimation_floor=max(floors) if floors else float("nan"),
        provisionally_forward_stable=bool(lam1 <= tau or lam2 <= tau),
        tau=tau,
    )
