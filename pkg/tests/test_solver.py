import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strongsplit.operators import (AffineSubspace, Halfspace, LinearMonotoneOperator,
                                   normal_cone, zero_operator)
from strongsplit.solver import (ConfigurationError, NumericalFailure,
                                SolverState, StepSchedule, StopReason, aamr_step, dr_step,
                                find_fixed_point, init_state, lyapunov, next_r, r_cap, recover,
                                schedule_values, solve, solve_aamr, solve_dr, step,
                                witness_from_fixed_point, witness_from_solution)
from strongsplit.strengthening import StrengthenedOperator, reflector

from conftest import linear_pair

ZERO = zero_operator()


def test_next_r_examples():
    s1 = next_r(StepSchedule.start(0.5, 1.0))
    assert s1.current_r == pytest.approx(1 / math.sqrt(3), abs=1e-7)
    assert s1.current_r == pytest.approx(0.5773503, abs=1e-7)
    s2 = next_r(s1)
    assert s2.current_r == pytest.approx(0.3933199, abs=1e-7)
    assert (s1.k, s2.k) == (1, 2)


@given(st.floats(0.01, 0.99), st.floats(0.001, 0.999))
@settings(max_examples=50)
def test_schedule_strictly_decreasing_positive(beta, frac):
    r = schedule_values(beta, frac * r_cap(beta), 200)
    assert np.all(r > 0)
    assert np.all(np.diff(r) < 0)


@pytest.mark.parametrize("beta,r0", [(0.0, 0.5), (1.0, 0.5), (0.5, 2.0), (0.5, -1.0), (0.5, 3.0)])
def test_schedule_rejects_bad_parameters(beta, r0):
    with pytest.raises(ConfigurationError):
        StepSchedule.start(beta, r0)


def test_init_state_examples():
    s = init_state(ZERO, 0.5, 1.0, [0.0], [0.0])
    assert s.x == pytest.approx([0.0]) and s.y == pytest.approx([0.0])
    s = init_state(ZERO, 0.5, 1.0, [0.0], [2.0])
    assert s.x == pytest.approx([1.0]) and s.y == pytest.approx([1.0])
    s = init_state(LinearMonotoneOperator(np.eye(1)), 0.5, 1.0, [0.0], [8.0])
    assert s.x == pytest.approx([2.0]) and s.y == pytest.approx([6.0])


def test_init_state_rejects_bad_parameters():
    with pytest.raises(ConfigurationError):
        init_state(ZERO, 1.2, 0.1, [0.0])
    with pytest.raises(ConfigurationError, match="r0 violates"):
        init_state(ZERO, 0.5, 3.0, [0.0])


def test_step_zero_fixed():
    s = init_state(ZERO, 0.5, 1.0, [0.0], [0.0])
    for _ in range(5):
        s = step(s, ZERO, ZERO, [0.0])
        assert s.x == pytest.approx([0.0]) and s.y == pytest.approx([0.0])
        assert s.zv == pytest.approx([0.0])


def test_step_zero_operators_converge():
    s = init_state(ZERO, 0.5, 1.0, [0.0], [2.0])
    for _ in range(200):
        s = step(s, ZERO, ZERO, [0.0])
    assert abs(recover(s, [0.0])[0]) < 1e-2
    assert s.k == 200


def base_resolvent_reference(A_mat, B_mat, beta, z, r0, z0, n_steps):
    """Direct transcription of the base-resolvent recursion for linear operators."""
    n = len(z)

    def J(M, s, x):
        return np.linalg.solve(np.eye(n) + s * M, x)

    def s_of(r):
        return 2 * r * (1 - beta) / (beta + r * (1 - beta)), beta + r * (1 - beta)

    r = r0
    s, d = s_of(r)
    x = beta * J(A_mat, s, z0 / d + z) - beta * z
    y = (z0 - x) / r
    zk = beta * J(B_mat, s, (x - r * y) / d + z) - beta * z
    xs = [x]
    for _ in range(n_steps):
        s, d = s_of(r)
        x = beta * J(A_mat, s, (zk + r * y) / d + z) - beta * z
        y = (zk + r * y - x) / r
        r = r / math.sqrt(1 + 2 * r * (1 - beta) / beta)
        s, d = s_of(r)
        zk = beta * J(B_mat, s, (x - r * y) / d + z) - beta * z
        xs.append(x)
    return np.array(xs)


@pytest.mark.parametrize("seed", range(5))
def test_matches_base_resolvent_transcription(seed):
    A, B, z, _ = linear_pair(seed, n=5, skew=0.4)
    beta = [0.3, 0.5, 0.7, 0.4, 0.6][seed]
    r0 = 0.8 * r_cap(beta)
    z0 = np.random.default_rng(seed + 100).standard_normal(5)
    ref = base_resolvent_reference(A.matrix, B.matrix, beta, z, r0, z0, 60)
    s = init_state(A, beta, r0, z, z0)
    got = [s.x]
    for _ in range(60):
        s = step(s, A, B, z)
        got.append(s.x)
    assert np.max(np.abs(np.array(got) - ref)) <= 1e-12 * max(1.0, np.abs(ref).max())


def test_update_identities_hold():
    A, B, z, _ = linear_pair(3, n=4)
    s = init_state(A, 0.5, 1.5, z)
    s = step(s, A, B, z)
    for _ in range(10):
        prev = s
        s = step(prev, A, B, z)
        w = prev.zv + prev.r * prev.y
        assert np.allclose(s.y, (w - s.x) / prev.r, atol=1e-14)


def test_recover_examples():
    sched = StepSchedule.start(0.5, 1.0)
    s = SolverState(np.array([0.0]), np.zeros(1), None, sched)
    assert recover(s, [7.0]) == pytest.approx([7.0])
    s = SolverState(np.array([1.0]), np.zeros(1), None, sched)
    assert recover(s, [0.0]) == pytest.approx([2.0])


def test_solve_zero_operators():
    rep = solve(ZERO, ZERO, [5.0], z0=[0.0])
    assert rep.solution == pytest.approx([5.0])
    assert rep.iterations == 1
    assert rep.converged


def test_solve_orthogonal_lines():
    C = AffineSubspace(np.array([[1.0], [0.0]]))
    D = AffineSubspace(np.array([[0.0], [1.0]]))
    rep = solve(normal_cone(C), normal_cone(D), [3.0, 1.0], tol=1e-12)
    assert np.allclose(rep.solution, [0.0, 0.0], atol=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_solve_linear_pair(seed):
    A, B, z, u = linear_pair(seed, n=8)
    rep = solve(A, B, z, tol=1e-13, max_iter=10_000, known_solution=u)
    assert np.allclose(rep.solution, u, atol=1e-6)
    n = rep.iterations + 1
    assert len(rep.residual_trace) == len(rep.r_trace) == len(rep.error_trace) == n
    assert rep.error_trace[-1] == pytest.approx(np.linalg.norm(rep.solution - u), abs=1e-12)


def test_solve_rejects_non_finite_iterate():
    bad = LinearMonotoneOperator(np.eye(1))
    bad_op = type(ZERO)(lambda r, x: np.array([np.nan]), "nan")
    with pytest.raises(NumericalFailure, match="non-finite"):
        solve(ZERO, bad_op, [1.0])
    with pytest.raises(ConfigurationError):
        solve(bad, bad, [1.0], beta=0.5, r0=5.0)


def test_solve_infeasible_does_not_report_convergence():
    C, D = Halfspace([1.0], -1.0), Halfspace([-1.0], -1.0)
    rep = solve(normal_cone(C), normal_cone(D), [0.0], max_iter=500)
    assert rep.stop_reason is StopReason.MAX_ITER


def test_lyapunov_zero_at_witness():
    A, B, z, u = linear_pair(0)
    w = witness_from_solution(A, 0.5, z, u)
    s = SolverState(w.v, w.v_A, None, StepSchedule.start(0.5, 1.0))
    assert lyapunov(s, w) == pytest.approx(0.0, abs=1e-20)


def _witnessed_run(seed, beta=0.5, k=2000):
    A, B, z, u = linear_pair(seed, n=6, skew=0.5)
    w = witness_from_solution(A, beta, z, u)
    rep = solve(A, B, z, beta=beta, tol=0.0, max_iter=k, witness=w, known_solution=u)
    return rep, w, u, z


@pytest.mark.parametrize("seed", range(20))
def test_lyapunov_nonincreasing(seed):
    rep, *_ = _witnessed_run(seed, beta=[0.3, 0.5, 0.7][seed % 3])
    V = np.array(rep.lyapunov_trace)
    assert np.all(np.diff(V) <= 1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_a_priori_bound(seed):
    beta = [0.3, 0.5, 0.7][seed % 3]
    rep, w, u, z = _witnessed_run(seed, beta=beta)
    dist = beta * np.array(rep.error_trace)  # |x_k - v|
    assert np.all(dist <= np.array(rep.bound_trace) + 1e-12)


def test_rate_bound_on_witnessed_run():
    beta = 0.5
    rep, w, u, z = _witnessed_run(4, beta=beta, k=3000)
    k = np.arange(rep.iterations + 1)
    r = np.array(rep.r_trace)
    V0 = rep.lyapunov_trace[0]
    lhs = k * np.array(rep.error_trace)
    assert np.all(lhs <= (k * r) * math.sqrt(V0) / beta + 1e-12)


def test_schedule_asymptotics():
    for beta in (0.3, 0.5, 0.7):
        r = schedule_values(beta, 0.99 * r_cap(beta), 100_000)
        assert abs(100_000 * r[-1] * (1 - beta) / beta - 1) <= 1e-2


def test_witness_from_fixed_point_matches_solution():
    A, B, z, u = linear_pair(2, n=4)
    T = reflector(A, B, 0.5, z, 1.0)
    w = witness_from_fixed_point(T, find_fixed_point(T, np.zeros(4)))
    ref = witness_from_solution(A, 0.5, z, u)
    assert np.allclose(w.v, ref.v, atol=1e-9)
    assert np.allclose(w.v_A, ref.v_A, atol=1e-9)
    assert np.allclose(w.v_B, -ref.v_A, atol=1e-9)


def test_find_fixed_point_unsolvable():
    C, D = Halfspace([1.0], -1.0), Halfspace([-1.0], -1.0)
    T = reflector(normal_cone(C), normal_cone(D), 0.5, [0.0], 1.0)
    with pytest.raises(NumericalFailure):
        find_fixed_point(T, [0.0], max_iter=1000)


def test_dr_and_aamr_zero_operators_contract():
    S = StrengthenedOperator(ZERO, 0.5, [0.0])
    w = np.array([3.0])
    for _ in range(200):
        w = dr_step(S, S, 1.0, 1.0, w)
    assert abs(w[0]) < 1e-10
    v = np.array([3.0])
    for _ in range(200):
        v = aamr_step(S, S, 1.0, 0.5, v)
    assert abs(v[0]) < 1e-10


def test_dr_and_aamr_fixed_points_stationary():
    C, D = Halfspace([1.0, 1.0], 1.0), Halfspace([1.0, -1.0], 0.5)
    A, B = normal_cone(C), normal_cone(D)
    z = np.array([3.0, 0.5])
    As, Bs = StrengthenedOperator(A, 0.5, z), StrengthenedOperator(B, 0.5, z)
    w = np.zeros(2)
    for _ in range(5000):
        w = dr_step(As, Bs, 1.0, 1.0, w)
    assert np.allclose(dr_step(As, Bs, 1.0, 1.0, w), w, atol=1e-12)
    v = np.zeros(2)
    for _ in range(5000):
        v = aamr_step(As, Bs, 1.0, 0.5, v)
    assert np.allclose(aamr_step(As, Bs, 1.0, 0.5, v), v, atol=1e-12)


def test_baseline_parameter_validation():
    S = StrengthenedOperator(ZERO, 0.5, [0.0])
    with pytest.raises(ConfigurationError):
        dr_step(S, S, 0.0, 1.0, np.zeros(1))
    with pytest.raises(ConfigurationError):
        dr_step(S, S, 1.0, 2.5, np.zeros(1))
    with pytest.raises(ConfigurationError):
        aamr_step(S, S, 1.0, 1.5, np.zeros(1))


def test_two_halfspaces_cross_method():
    C, D = Halfspace([1.0, 1.0], 1.0), Halfspace([1.0, -1.0], 0.5)
    A, B = normal_cone(C), normal_cone(D)
    z = np.array([3.0, 0.5])
    u = np.array([0.75, 0.25])  # the corner; z - u lies in both normal cones
    reps = [solve(A, B, z, tol=1e-12),
            solve_dr(A, B, z, tol=1e-12),
            solve_aamr(A, B, z, tol=1e-12)]
    for rep in reps:
        assert rep.converged, rep.method
        assert np.allclose(rep.solution, u, atol=1e-6), rep.method


@pytest.mark.parametrize("seed", range(3))
def test_linear_cross_method(seed):
    A, B, z, u = linear_pair(seed, n=5, skew=0.3)
    for rep in (solve(A, B, z, tol=1e-13, max_iter=20_000),
                solve_dr(A, B, z, tol=1e-13),
                solve_aamr(A, B, z, tol=1e-13)):
        assert np.allclose(rep.solution, u, atol=1e-6), rep.method


def test_aamr_general_gamma_limit():
    # the limit is J_{c(A+B)}(z) with c = gamma / (2(1 - beta))
    A, B, z, _ = linear_pair(7, n=4)
    beta, gamma = 0.5, 0.5
    c = gamma / (2 * (1 - beta))
    want = np.linalg.solve(np.eye(4) + c * (A.matrix + B.matrix), z)
    rep = solve_aamr(A, B, z, beta=beta, gamma=gamma, tol=1e-14)
    assert np.allclose(rep.solution, want, atol=1e-8)


@pytest.mark.parametrize("seed", range(3))
def test_solve_agrees_with_repeated_step(seed):
    A, B, z, _ = linear_pair(seed, n=5, skew=0.6)
    beta, r0 = 0.4, 1.7
    z0 = np.ones(5)
    rep = solve(A, B, z, beta=beta, r0=r0, z0=z0, tol=0.0, max_iter=40)
    s = init_state(A, beta, r0, z, z0)
    rs = [s.r]
    for _ in range(40):
        s = step(s, A, B, z)
        rs.append(s.r)
    assert np.allclose(rep.solution, recover(s, z), rtol=0, atol=1e-13)
    assert np.allclose(rep.r_trace, rs, rtol=1e-15, atol=0)
