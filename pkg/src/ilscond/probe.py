"""Perturbation experiments: directed probes that approach the condition
numbers, seeded random ensembles measured against the four bounds, and a
check that the first-order remainder is second order.

Every perturbed problem is solved exactly (see ``solution_change``); the
linearization is used only as the thing being compared against.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .conditioning import (ConditioningReport, JacobianParts, bound_coefficients,
                           chi_Ab_with_maximizer, eval_bound_i, jacobian_parts)
from .errors import InvalidEpsilon, PerturbationLeftDomain, ZeroNormalizer
from .linalg_core import mat_of_vec, top_singular_triplet, vec_of_matrix
from .problem import IlsProblem, IlsSolution, solution_change, solve

MODES = ("directed-A", "directed-joint", "random-A", "random-b", "random-joint")
SOUNDNESS_SLACK = 10.0
BOUND_NAMES = ("i", "ii", "iii", "iv")


@dataclass(frozen=True)
class ProbeConfig:
    epsilon: float
    samples: int = 1
    seed: int = 0
    mode: str = "random-joint"
    workers: int = 1

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidEpsilon(f"epsilon must be positive and finite, got {self.epsilon}")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class SampleRecord:
    index: int
    epsilon: float
    norm_dA: float
    norm_db: float
    ratio: float
    bound_i: float
    accepted: bool

    def margins(self, report: ConditioningReport) -> List[float]:
        if not self.accepted or self.ratio == 0.0:
            return [math.nan] * 4
        return [self.bound_i / self.ratio, report.bound_ii / self.ratio,
                report.bound_iii / self.ratio, report.bound_iv / self.ratio]


@dataclass(frozen=True)
class ProbeResult:
    mode: str
    epsilon: float
    samples: int
    seed: int
    max_ratio: float
    margins: dict
    attained_fraction: float
    reference: float
    rejected: int
    max_ratio_over_bound_i: float
    slack: float = SOUNDNESS_SLACK
    remainder_constant: Optional[float] = None
    records: List[SampleRecord] = field(default_factory=list, repr=False)
    report: Optional[ConditioningReport] = field(default=None, repr=False)

    @property
    def accepted(self) -> int:
        return self.samples - self.rejected

    @property
    def sound(self) -> bool:
        """Every accepted sample stays under its own bound (i) up to slack."""
        return self.max_ratio_over_bound_i <= 1.0 + self.slack * self.epsilon

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "samples": self.samples,
            "seed": self.seed,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "max_ratio": self.max_ratio,
            "reference_condition_number": self.reference,
            "attained_fraction": self.attained_fraction,
            "margins": dict(self.margins),
            "max_ratio_over_bound_i": self.max_ratio_over_bound_i,
            "sound": self.sound,
            "slack": self.slack,
            "remainder_constant": self.remainder_constant,
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample", "epsilon", "norm_dA", "norm_db", "ratio",
                    "margin_i", "margin_ii", "margin_iii", "margin_iv"])
        for rec in self.records:
            vals = [rec.epsilon, rec.norm_dA, rec.norm_db,
                    rec.ratio if rec.accepted else math.nan, *rec.margins(self.report)]
            w.writerow([rec.index] + [format_float(v) for v in vals])
        return buf.getvalue()


def format_float(v: float) -> str:
    return f"{v:.17g}"


def worst_direction_A(parts: JacobianParts, m: int, n: int) -> np.ndarray:
    """Unit-Frobenius ``U`` with ``||J_x(A) vec(U)|| = ||J_x(A)||``."""
    _, _, v = top_singular_triplet(parts.JxA)
    return mat_of_vec(v, m, n)


def _context(p: IlsProblem, s=None, parts=None, report=None, joint=True):
    s = solve(p) if s is None else s
    parts = jacobian_parts(p, s) if parts is None else parts
    if report is None:
        report = bound_coefficients(p, s, parts, joint=joint)
    return s, parts, report


@dataclass(frozen=True)
class RemainderReport:
    t: np.ndarray
    remainder: np.ndarray
    scaled: np.ndarray  # ||R(t)|| / t^2
    max_step_factor: float
    variation: float  # max(scaled) / min(scaled) - 1
    bounded: bool


def remainder_order_check(p: IlsProblem, t_sequence: Sequence[float], dA_dir=None,
                          db_dir=None, s: Optional[IlsSolution] = None,
                          parts: Optional[JacobianParts] = None,
                          max_factor: float = 4.0) -> RemainderReport:
    """Remainder ``R(t) = x(A + t U, b + t v) - x - J vec(tU, tv)`` along a line.

    ``bounded`` means ``||R(t)||/t^2`` changes by at most ``max_factor``
    between successive ``t``; for a line along ``b`` alone R vanishes up to
    rounding.
    """
    s = solve(p) if s is None else s
    parts = jacobian_parts(p, s) if parts is None else parts
    t = np.asarray(t_sequence, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValueError("t_sequence must be positive and strictly decreasing")
    U = np.zeros_like(p.A) if dA_dir is None else np.asarray(dA_dir, dtype=float)
    v = np.zeros_like(p.b) if db_dir is None else np.asarray(db_dir, dtype=float)
    lin = parts.JxA @ vec_of_matrix(U) + parts.Jxb @ v
    rem = np.empty(t.size)
    for k, tk in enumerate(t):
        dx = solution_change(p, s, tk * U, tk * v)
        rem[k] = np.linalg.norm(dx - tk * lin)
    scaled = rem / t ** 2
    if np.all(scaled > 0):
        steps = np.maximum(scaled[1:] / scaled[:-1], scaled[:-1] / scaled[1:])
        max_step = float(np.max(steps))
        variation = float(np.max(scaled) / np.min(scaled) - 1.0)
    else:
        max_step = 1.0 if np.all(scaled == 0) else math.inf
        variation = 0.0 if np.all(scaled == 0) else math.inf
    return RemainderReport(t, rem, scaled, max_step, variation, max_step <= max_factor)


def _remainder_constant(p, s, parts, U, v, reference, t_max):
    # C such that |ratio/reference - 1| <= C eps for eps up to t_max/norm_a
    # (up to rounding), from ||R(t)|| <= kappa t^2 along the probe line
    nx = float(np.linalg.norm(s.x))
    for t0 in (t_max * 10.0 ** -k for k in range(0, 8)):
        try:
            rep = remainder_order_check(p, [t0, t0 / 2, t0 / 4], U, v, s, parts)
        except PerturbationLeftDomain:
            continue
        if rep.bounded:
            kappa = float(np.max(rep.scaled))
            return 2.0 * kappa * p.norm_a ** 2 / (nx * reference)
    return math.inf


def directed_probe(p: IlsProblem, cfg: ProbeConfig, s=None, parts=None,
                   report=None) -> ProbeResult:
    """Perturb along the maximizing direction and re-solve.

    ``directed-A`` uses ``dA = eps norm_a U`` with U from
    :func:`worst_direction_A`. ``directed-joint`` uses the maximizing pair
    from the joint condition number, each block at its full radius.
    """
    if cfg.mode not in ("directed-A", "directed-joint"):
        raise ValueError(f"directed_probe needs a directed mode, got {cfg.mode!r}")
    s, parts, report = _context(p, s, parts, report)
    eps = cfg.epsilon
    nx = float(np.linalg.norm(s.x))
    if cfg.mode == "directed-A":
        U = worst_direction_A(parts, p.m, p.n)
        v = np.zeros(p.m)
        reference = report.chi_A
    else:
        if p.norm_b == 0.0:
            raise ZeroNormalizer("directed-joint needs a positive norm_b")
        reference, jn = chi_Ab_with_maximizer(p, s, parts)
        a = parts.JxA.T @ jn.w
        c = parts.Jxb.T @ jn.w
        U = mat_of_vec(a / np.linalg.norm(a), p.m, p.n)
        v = c / np.linalg.norm(c) * (p.norm_b / p.norm_a)
    # direction scaled so that t = eps * norm_a gives relative size eps
    dA, db = eps * p.norm_a * U, eps * p.norm_a * v
    dx = solution_change(p, s, dA, db)
    ratio = float(np.linalg.norm(dx)) / nx / eps
    bound_i = eval_bound_i(report, dA, db) / eps
    C = _remainder_constant(p, s, parts, U, v, reference, t_max=1e-2 * p.norm_a)
    rec = SampleRecord(0, eps, float(np.linalg.norm(dA)), float(np.linalg.norm(db)),
                       ratio, bound_i, True)
    return _reduce(p, cfg, report, [rec], reference, remainder_constant=C)


def _sample_direction(p: IlsProblem, cfg: ProbeConfig, index: int):
    rng = np.random.default_rng([cfg.seed, index])
    dA = np.zeros_like(p.A)
    db = np.zeros_like(p.b)
    if cfg.mode in ("random-A", "random-joint"):
        G = rng.standard_normal(p.A.shape)
        dA = G * (cfg.epsilon * p.norm_a / np.linalg.norm(G))
    if cfg.mode in ("random-b", "random-joint"):
        g = rng.standard_normal(p.b.shape)
        db = g * (cfg.epsilon * p.norm_b / np.linalg.norm(g))
    return dA, db


def _run_sample(p, s, report, cfg, index) -> SampleRecord:
    dA, db = _sample_direction(p, cfg, index)
    nx = float(np.linalg.norm(s.x))
    nda, ndb = float(np.linalg.norm(dA)), float(np.linalg.norm(db))
    try:
        dx = solution_change(p, s, dA, db)
    except PerturbationLeftDomain:
        return SampleRecord(index, cfg.epsilon, nda, ndb, math.nan, math.nan, False)
    ratio = float(np.linalg.norm(dx)) / nx / cfg.epsilon
    bound_i = eval_bound_i(report, dA, db) / cfg.epsilon
    return SampleRecord(index, cfg.epsilon, nda, ndb, ratio, bound_i, True)


def random_probe(p: IlsProblem, cfg: ProbeConfig, s=None, parts=None,
                 report=None) -> ProbeResult:
    """Seeded Gaussian directions scaled to the exact radius, re-solved exactly.

    Sample ``i`` draws from ``default_rng([seed, i])``, so the result does not
    depend on ``workers``.
    """
    if cfg.mode not in ("random-A", "random-b", "random-joint"):
        raise ValueError(f"random_probe needs a random mode, got {cfg.mode!r}")
    if cfg.mode in ("random-b", "random-joint") and p.norm_b == 0.0:
        raise ZeroNormalizer(f"{cfg.mode} perturbs b but norm_b is zero")
    s, parts, report = _context(p, s, parts, report)
    idx = range(cfg.samples)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            records = list(ex.map(lambda i: _run_sample(p, s, report, cfg, i), idx))
    else:
        records = [_run_sample(p, s, report, cfg, i) for i in idx]
    reference = {"random-A": report.chi_A, "random-b": report.chi_b,
                 "random-joint": report.chi_Ab}[cfg.mode]
    return _reduce(p, cfg, report, records, reference)


def _reduce(p, cfg, report, records, reference, remainder_constant=None) -> ProbeResult:
    ok = [r for r in records if r.accepted]
    rejected = len(records) - len(ok)
    if ok:
        max_ratio = max(r.ratio for r in ok)
        worst_i = max((r.ratio / r.bound_i if r.bound_i > 0 else
                       (0.0 if r.ratio == 0 else math.inf)) for r in ok)
        margin_i = min((r.bound_i / r.ratio if r.ratio > 0 else math.inf) for r in ok)
    else:
        max_ratio = worst_i = margin_i = math.nan

    def over(bound):
        return bound / max_ratio if max_ratio > 0 else math.inf

    margins = {"i": margin_i, "ii": over(report.bound_ii),
               "iii": over(report.bound_iii), "iv": over(report.bound_iv)}
    attained = max_ratio / reference if reference > 0 else math.nan
    slack = SOUNDNESS_SLACK
    if remainder_constant is not None:
        # a directed probe sits on the first-order bound; its excess is second order
        slack = max(slack, remainder_constant)
    return ProbeResult(
        mode=cfg.mode, epsilon=cfg.epsilon, samples=len(records), seed=cfg.seed,
        max_ratio=max_ratio, margins=margins, attained_fraction=attained,
        reference=reference, rejected=rejected, max_ratio_over_bound_i=worst_i,
        slack=slack, remainder_constant=remainder_constant, records=list(records), report=report)


def run_probe(p: IlsProblem, cfg: ProbeConfig) -> ProbeResult:
    if cfg.mode.startswith("directed"):
        return directed_probe(p, cfg)
    return random_probe(p, cfg)
