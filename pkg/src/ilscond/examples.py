"""The two one-parameter problem families on which the bound coefficient B
overestimates the condition number, with their closed-form values.

``example1(alpha)``: m=2, n=1, A = (cos t, sin t)^t with t = pi/4 - alpha,
b = (1, 1), J = diag(1, -1), and b held fixed (norm_b = 0). Here
chi_A = sec(alpha) while B = 2 csc(2 alpha).

``example2(alpha)``: m=3, n=2, the first problem with a second, decoupled
column scaled by 1/alpha, and both A and b perturbed. Only asymptotic
(alpha -> 0) forms are known for it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .errors import AlphaOutOfRange
from .problem import GsvdSpec, IlsProblem, from_gsvd

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)


@dataclass(frozen=True)
class Expected:
    value: float
    exact: bool


@dataclass(frozen=True)
class ExampleExpectation:
    alpha: float
    closed_forms: Dict[str, Expected] = field(default_factory=dict)

    def __getitem__(self, key: str) -> float:
        return self.closed_forms[key].value

    def exact(self) -> Dict[str, float]:
        return {k: e.value for k, e in self.closed_forms.items() if e.exact}

    def asymptotic(self) -> Dict[str, float]:
        return {k: e.value for k, e in self.closed_forms.items() if not e.exact}


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= math.pi / 4:
        raise AlphaOutOfRange(f"alpha must lie in (0, pi/4], got {alpha}")
    return alpha


def example1(alpha: float):
    alpha = _check_alpha(alpha)
    theta = math.pi / 4 - alpha
    A = from_gsvd(GsvdSpec(thetas=(theta,), X=np.eye(1), m_plus=1, m_minus=1))
    p = IlsProblem.create(A, [1.0, 1.0], 1, 1, norm_b=0.0)
    sec = 1.0 / math.cos(alpha)
    csc2 = 1.0 / math.sin(2 * alpha)
    exact = {
        "x1": 1.0 / (math.cos(theta) + math.sin(theta)),
        "chi_A": sec,
        "B": 2.0 * csc2,
        "bound_iv": 2.0 * csc2,
        "norm_JxA": sec ** 2 / SQRT2,
        "norm_M1": csc2 * sec / SQRT2,
        "norm_M2": csc2 * sec / SQRT2,
        "norm_Jxb": csc2,
        # chi_b if b is also perturbed with the default norm_b = ||b||_2
        "chi_b_default_scale": 1.0 / math.sin(alpha),
    }
    return p, ExampleExpectation(alpha, {k: Expected(v, True) for k, v in exact.items()})


def example2(alpha: float):
    alpha = _check_alpha(alpha)
    theta = math.pi / 4 - alpha
    spec = GsvdSpec(thetas=(theta, 0.0), X=np.diag([1.0, 1.0 / alpha]), m_plus=2, m_minus=1)
    p = IlsProblem.create(from_gsvd(spec), [1.0, 1.0, 1.0], 2, 1)
    a = alpha
    asym = {
        "norm_A_fro": 1.0 / a,
        "norm_b_2": SQRT3,
        "norm_r": 1.0 / SQRT2,
        "norm_x": 1.0 / SQRT2,
        "norm_gram_inv": 1.0 / (2 * a),
        "norm_gram_inv_At": 1.0 / (2 * a),
        "norm_JxA": SQRT3 / 2,
        "norm_M1": 2 ** -1.5 / a,
        "norm_M2": 2 ** -1.5 / a,
        "chi_A": SQRT3 / SQRT2 / a,
        "chi_b": SQRT3 / SQRT2 / a,
        "chi_ab_sum": SQRT6 / a,
        "B": a ** -2,
        "bound_iv": a ** -2,
        "rho": 1.0 / (SQRT6 * a),
        "lambda1": SQRT2 / SQRT3 / a,
        "lambda2": 1.0 / (SQRT6 * a),
    }
    return p, ExampleExpectation(alpha, {k: Expected(v, False) for k, v in asym.items()})


def get_example(which: int, alpha: float):
    if which == 1:
        return example1(alpha)
    if which == 2:
        return example2(alpha)
    raise ValueError(f"unknown example {which!r}; choose 1 or 2")
