import math

import numpy as np
import pytest

from ilscond.conditioning import jacobian_parts
from ilscond.ensembles import random_gsvd_spec, random_problem
from ilscond.errors import (AngleOutOfRange, DimensionMismatch, NotPositiveDefinite,
                            PerturbationLeftDomain, SingularX, ZeroNormalizer)
from ilscond.examples import example1
from ilscond.linalg_core import vec_of_matrix
from ilscond.problem import (GsvdSpec, IlsProblem, epsilon_of, from_gsvd, gsvd_gram,
                             optimality_residual, perturb, problem_from_dict,
                             problem_to_dict, solution_change, solve, validate)


def col(*v):
    return np.array(v, dtype=float).reshape(-1, 1)


def test_validate_accepts_positive_gram():
    validate(IlsProblem.create(col(1, 0), [1, 1], 1, 1))


@pytest.mark.parametrize("A", [col(0, 1), col(math.cos(math.pi / 4), math.sin(math.pi / 4))])
def test_validate_rejects(A):
    with pytest.raises(NotPositiveDefinite):
        validate(IlsProblem.create(A, [1, 1], 1, 1))


def test_create_checks_shapes():
    with pytest.raises(DimensionMismatch):
        IlsProblem.create(col(1, 2), [1, 2, 3], 2, 1)
    with pytest.raises(DimensionMismatch):
        IlsProblem.create(np.eye(2), [1, 2], 2, 0)  # m == n
    with pytest.raises(DimensionMismatch):
        IlsProblem.create(np.ones((3, 2)), [1, 2, 3], 1, 2)  # m_plus < n


def test_default_normalizers():
    p = IlsProblem.create([[3.0], [4.0]], [1.0, 2.0], 2, 0)
    assert p.norm_a == pytest.approx(5.0)
    assert p.norm_b == pytest.approx(math.sqrt(5.0))


def test_solve_consistent_system():
    s = solve(IlsProblem.create(col(1, 1), [1, 1], 2, 0))
    np.testing.assert_allclose(s.x, [1.0], rtol=1e-15)
    np.testing.assert_allclose(s.r, [0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4 - 0.3, math.pi / 4 - 0.01])
def test_solve_first_example_closed_form(theta):
    A = col(math.cos(theta), math.sin(theta))
    s = solve(IlsProblem.create(A, [1, 1], 1, 1))
    assert s.x[0] == pytest.approx(1.0 / (A[0, 0] + A[1, 0]), rel=1e-13)


def test_solve_first_example_near_boundary_value():
    theta = math.pi / 4 - 0.01
    s = solve(IlsProblem.create(col(math.cos(theta), math.sin(theta)), [1, 1], 1, 1))
    assert s.x[0] == pytest.approx(1 / (math.sqrt(2) * math.cos(0.01)), rel=1e-12)
    assert round(s.x[0], 6) == 0.707142


def test_optimality_on_random_problems():
    rng = np.random.default_rng(21)
    for _ in range(200):
        p = random_problem(rng)
        s = solve(p)
        na = np.linalg.norm(p.A)
        scale = np.linalg.norm(p.b) + na * np.linalg.norm(s.x)
        assert optimality_residual(p, s) <= 1e-10 * na * scale


def test_all_plus_signature_matches_ordinary_least_squares():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((6, 3))
    b = rng.standard_normal(6)
    s = solve(IlsProblem.create(A, b, 6, 0))
    x_ls = np.linalg.lstsq(A, b, rcond=None)[0]
    np.testing.assert_allclose(s.x, x_ls, rtol=1e-10)


def test_from_signs_normalizes_row_order():
    A = np.array([[0.5, 0.0], [1.0, 0.0], [0.0, 1.0]])
    b = np.array([3.0, 1.0, 2.0])
    p = IlsProblem.from_signs(A, b, [-1, 1, 1])
    np.testing.assert_array_equal(p.A, A[[1, 2, 0]])
    np.testing.assert_array_equal(p.b, b[[1, 2, 0]])
    assert (p.J.m_plus, p.J.m_minus) == (2, 1)
    # objective is invariant under the permutation
    x = solve(p).x
    J = np.diag([-1.0, 1.0, 1.0])
    grad = A.T @ J @ (b - A @ x)
    np.testing.assert_allclose(grad, 0.0, atol=1e-13)


# -- GSVD ---------------------------------------------------------------------

def test_from_gsvd_first_example():
    alpha = 0.2
    A = from_gsvd(GsvdSpec(thetas=(math.pi / 4 - alpha,), X=np.eye(1), m_plus=1, m_minus=1))
    np.testing.assert_allclose(A, col(math.cos(math.pi / 4 - alpha), math.sin(math.pi / 4 - alpha)))


def test_from_gsvd_second_example():
    alpha = 0.05
    t = math.pi / 4 - alpha
    A = from_gsvd(GsvdSpec(thetas=(t, 0.0), X=np.diag([1, 1 / alpha]), m_plus=2, m_minus=1))
    expected = np.array([[math.cos(t), 0], [0, 1], [math.sin(t), 0]]) @ np.diag([1, 1 / alpha])
    np.testing.assert_allclose(A, expected, rtol=1e-15)


def test_from_gsvd_zero_angles_gives_orthonormal_columns():
    A = from_gsvd(GsvdSpec(thetas=(0.0, 0.0), X=np.eye(2), m_plus=3, m_minus=1))
    np.testing.assert_array_equal(A, np.vstack([np.eye(2), np.zeros((2, 2))]))


@pytest.mark.parametrize("thetas, m_minus, exc", [
    ((math.pi / 4,), 1, AngleOutOfRange),
    ((0.1, 0.2), 2, AngleOutOfRange),
    ((0.2, 0.1), 1, AngleOutOfRange),  # theta_2 must vanish when m_minus = 1
    ((-0.1,), 1, AngleOutOfRange),
])
def test_from_gsvd_angle_checks(thetas, m_minus, exc):
    n = len(thetas)
    with pytest.raises(exc):
        from_gsvd(GsvdSpec(thetas=thetas, X=np.eye(n), m_plus=n, m_minus=m_minus))


def test_from_gsvd_singular_x():
    with pytest.raises(SingularX):
        from_gsvd(GsvdSpec(thetas=(0.1, 0.0), X=np.ones((2, 2)), m_plus=2, m_minus=1))


def test_gsvd_gram_consistency():
    rng = np.random.default_rng(9)
    for _ in range(100):
        spec = random_gsvd_spec(rng)
        A = from_gsvd(spec)
        signs = np.r_[np.ones(spec.m_plus), -np.ones(spec.m_minus)]
        G = A.T @ (signs[:, None] * A)
        G0 = gsvd_gram(spec)
        assert np.linalg.norm(G - G0) <= 1e-10 * np.linalg.norm(G0)


def test_smallest_gram_eigenvalue_decreases_toward_boundary():
    mins = []
    for theta in [0.5, 0.7, 0.75, 0.78, 0.785]:
        A = from_gsvd(GsvdSpec(thetas=(theta, 0.0), X=np.eye(2), m_plus=2, m_minus=1))
        G = A.T @ np.diag([1.0, 1.0, -1.0]) @ A
        mins.append(np.linalg.eigvalsh(G)[0])
    assert all(a > b for a, b in zip(mins, mins[1:]))
    assert mins[-1] < 1e-3


# -- perturbations -------------------------------------------------------------

def test_perturb_zero_is_identity():
    p, _ = example1(0.2)
    q = perturb(p, np.zeros_like(p.A), np.zeros_like(p.b))
    np.testing.assert_array_equal(solve(q).x, solve(p).x)
    assert (q.norm_a, q.norm_b) == (p.norm_a, p.norm_b)


def test_perturb_keeps_base_normalizers():
    p = IlsProblem.create([[2.0], [0.0], [1.0]], [1.0, 1.0, 1.0], 2, 1)
    q = perturb(p, 0.1 * np.ones((3, 1)), 0.2 * np.ones(3))
    assert (q.norm_a, q.norm_b) == (p.norm_a, p.norm_b)


def test_perturb_first_order_matches_jacobian():
    p, _ = example1(0.3)
    s = solve(p)
    parts = jacobian_parts(p, s)
    for h in (1e-2, 1e-3):
        dA = col(h, 0.0)
        dx = solve(perturb(p, dA, np.zeros(2))).x - s.x
        lin = parts.JxA @ vec_of_matrix(dA)
        # remainder is second order
        assert np.linalg.norm(dx - lin) <= 5.0 * h ** 2


def test_perturb_to_boundary_fails():
    theta = math.pi / 4 - 0.2
    p = IlsProblem.create(col(math.cos(theta), math.sin(theta)), [1, 1], 1, 1)
    # move onto the line a11 = a21 where the gram vanishes
    dA = col(0.0, math.cos(theta) - math.sin(theta))
    with pytest.raises(PerturbationLeftDomain):
        perturb(p, dA, np.zeros(2))
    with pytest.raises(NotPositiveDefinite):
        solution_change(p, solve(p), dA, np.zeros(2))


def test_solution_change_matches_resolve():
    rng = np.random.default_rng(14)
    for _ in range(50):
        p = random_problem(rng)
        s = solve(p)
        dA = 1e-3 * rng.standard_normal(p.A.shape)
        db = 1e-3 * rng.standard_normal(p.m)
        direct = solve(perturb(p, dA, db)).x - s.x
        np.testing.assert_allclose(solution_change(p, s, dA, db), direct,
                                   rtol=1e-7, atol=1e-12 * np.linalg.norm(s.x))


def test_epsilon_of():
    p = IlsProblem.create([[3.0], [4.0]], [0.0, 2.0], 2, 0)
    dA = np.array([[0.06], [0.08]])  # ||dA||_F = 0.1 = 0.02 * 5
    assert epsilon_of(p, dA, np.zeros(2)) == pytest.approx(0.02)
    dA = np.array([[0.05], [0.0]])  # 0.01
    db = np.array([0.06, 0.0])  # 0.03 * 2
    assert epsilon_of(p, dA, db) == pytest.approx(0.03)
    assert epsilon_of(p, np.zeros((2, 1)), np.zeros(2)) == 0.0


def test_epsilon_of_zero_normalizer():
    p, _ = example1(0.1)
    assert epsilon_of(p, 0.01 * np.ones((2, 1)), np.zeros(2)) == pytest.approx(
        0.01 * math.sqrt(2) / p.norm_a)
    with pytest.raises(ZeroNormalizer):
        epsilon_of(p, np.zeros((2, 1)), np.ones(2))


# -- JSON format ----------------------------------------------------------------

def test_json_round_trip():
    p = random_problem(np.random.default_rng(1))
    q = problem_from_dict(problem_to_dict(p))
    np.testing.assert_array_equal(q.A, p.A)
    np.testing.assert_array_equal(q.b, p.b)
    assert (q.J, q.norm_a, q.norm_b) == (p.J, p.norm_a, p.norm_b)


def test_json_row_major_and_gsvd_block():
    d = {"m_plus": 2, "m_minus": 1, "b": [1, 1, 1],
         "gsvd": {"thetas": [0.5, 0.0], "X": [[1, 0], [0, 2]]}}
    p = problem_from_dict(d)
    np.testing.assert_allclose(p.A, [[math.cos(0.5), 0], [0, 2], [math.sin(0.5), 0]])
    d["A"] = p.A.tolist()
    problem_from_dict(d)
    d["A"] = [[1, 0], [0, 1], [0, 0]]
    with pytest.raises(ValueError):
        problem_from_dict(d)


def test_json_optional_normalizers():
    p = problem_from_dict({"m_plus": 1, "m_minus": 1, "A": [[1], [0]], "b": [1, 1],
                           "norm_a": 2.5, "norm_b": 0})
    assert (p.norm_a, p.norm_b) == (2.5, 0.0)


def test_json_missing_field():
    with pytest.raises(ValueError, match="b"):
        problem_from_dict({"m_plus": 1, "m_minus": 1, "A": [[1], [0]]})
