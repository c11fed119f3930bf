import math

import numpy as np
import pytest

from ilscond.conditioning import bound_coefficients
from ilscond.diagnostics import theorem_diagnostics
from ilscond.errors import AlphaOutOfRange
from ilscond.examples import example1, example2, get_example
from ilscond.problem import solve


def pipeline_values(p, joint=True):
    """Every quantity an expectation may name, computed by the library."""
    rep = bound_coefficients(p, joint=joint)
    out = dict(rep.as_dict())
    out["x1"] = float(solve(p).x[0])
    out["chi_ab_sum"] = rep.chi_A + rep.chi_b
    if p.norm_b > 0:
        d = theorem_diagnostics(rep)
        out.update(rho=d.rho, lambda1=d.lambda1, lambda2=d.lambda2)
    return out


@pytest.mark.parametrize("alpha", [0.3, 0.1, 0.01, 0.001])
def test_first_example_exact_forms(alpha):
    p, e = example1(alpha)
    got = pipeline_values(p)
    got["chi_b_default_scale"] = bound_coefficients(
        p.with_normalizers(norm_b=float(np.linalg.norm(p.b)))).chi_b
    assert e.exact() and not e.asymptotic()
    for key, want in e.exact().items():
        assert got[key] == pytest.approx(want, rel=1e-9), key


def test_first_example_problem_data():
    p, _ = example1(0.2)
    t = math.pi / 4 - 0.2
    np.testing.assert_allclose(p.A, [[math.cos(t)], [math.sin(t)]], rtol=1e-15)
    assert p.b.tolist() == [1.0, 1.0]
    assert p.J.signs.tolist() == [1.0, -1.0]
    assert p.norm_b == 0.0


def test_first_example_moderate_alpha_values():
    _, e = example1(0.3)
    assert e["chi_A"] == pytest.approx(1.04675, abs=5e-6)
    # 2 / sin(0.6), evaluated independently
    assert e["B"] == pytest.approx(3.542064, abs=5e-7)


def test_first_example_at_range_edge():
    p, e = example1(math.pi / 4)
    np.testing.assert_allclose(p.A[:, 0], [1.0, 0.0], atol=1e-16)
    rep = bound_coefficients(p)
    assert rep.chi_A == pytest.approx(math.sqrt(2), rel=1e-12)
    assert e["chi_A"] == pytest.approx(math.sqrt(2), rel=1e-12)


def test_second_example_problem_data():
    a = 0.05
    p, _ = example2(a)
    t = math.pi / 4 - a
    expected = np.array([[math.cos(t), 0.0], [0.0, 1 / a], [math.sin(t), 0.0]])
    np.testing.assert_allclose(p.A, expected, rtol=1e-15)
    assert p.J.signs.tolist() == [1.0, 1.0, -1.0]
    assert p.norm_a == pytest.approx(np.linalg.norm(expected))
    assert p.norm_b == pytest.approx(math.sqrt(3))


def test_second_example_entries_are_asymptotic():
    _, e = example2(0.1)
    assert not e.exact()
    assert {"chi_A", "B", "chi_b", "chi_ab_sum", "bound_iv", "rho", "lambda1",
            "lambda2", "norm_JxA", "norm_M1", "norm_M2"} <= set(e.asymptotic())


def test_second_example_asymptotes_within_fifteen_percent():
    p, e = example2(0.1)
    got = pipeline_values(p)
    for key, want in e.asymptotic().items():
        assert abs(got[key] / want - 1) <= 0.15, (key, got[key], want)


def test_second_example_converges_monotonically():
    alphas = [0.1, 0.05, 0.02, 0.01, 0.005]
    devs = {}
    for a in alphas:
        p, e = example2(a)
        got = pipeline_values(p, joint=False)
        for key, want in e.asymptotic().items():
            devs.setdefault(key, []).append(abs(got[key] / want - 1))
    for key, seq in devs.items():
        assert all(later <= earlier + 1e-12 for earlier, later in zip(seq, seq[1:])), (key, seq)
        assert seq[-1] <= 0.01 + 1e-12, key


@pytest.mark.parametrize("alpha", [0.02, 0.01, 0.005, 0.001])
def test_overestimate_factor(alpha):
    rep = bound_coefficients(example2(alpha)[0], joint=False)
    factor = (rep.B + rep.chi_b) / (rep.chi_A + rep.chi_b)
    assert factor * math.sqrt(6) * alpha == pytest.approx(1.0, rel=0.1)


@pytest.mark.parametrize("alpha", [0.0, -0.1, math.pi / 4 + 1e-9, 2.0])
def test_alpha_out_of_range(alpha):
    for make in (example1, example2):
        with pytest.raises(AlphaOutOfRange):
            make(alpha)


def test_get_example():
    assert get_example(1, 0.1)[0].n == 1
    assert get_example(2, 0.1)[0].n == 2
    with pytest.raises(ValueError):
        get_example(3, 0.1)
