import math

import numpy as np
import pytest
from pydantic import ValidationError

from hfnewton.problems.base import FunctionProblem
from hfnewton.problems.logistic import make_logistic
from hfnewton.problems.logsumexp import make_logsumexp
from hfnewton.problems.quadratic import QuadraticProblem, make_quadratic
from hfnewton.solvers.adn import (
    SolverConfig,
    estimate_h0,
    initial_trial_index,
    inner_trial,
    lambda_value,
    reference_point,
    run,
    sigma1_init,
    sigma_hat_1,
    sigma_hat_2,
    sigma_max_bound,
)
from hfnewton.solvers.invariants import (
    acceptance_violations,
    complexity_ledger,
    global_rate_slope,
    local_rate_constant,
    local_rate_violations,
    recompute_acceptance,
    sigma_violations,
)

VARIANTS = [
    {"hessian_mode": "finite_difference", "subproblem_mode": "direct", "theta": 0.0},
    {"hessian_mode": "finite_difference", "subproblem_mode": "cg"},
    {"hessian_mode": "analytic", "subproblem_mode": "direct", "theta": 0.0, "kappa_b": 0.0},
    {"hessian_mode": "analytic", "subproblem_mode": "cg", "kappa_b": 0.0},
]


def half_square():
    return FunctionProblem(
        1,
        value=lambda x: 0.5 * x[0] ** 2,
        gradient=lambda x: np.array([x[0]]),
        hessian=lambda x: np.array([[1.0]]),
        name="half_square",
    )


def quartic():
    return FunctionProblem(
        1,
        value=lambda x: 0.5 * x[0] ** 4,
        gradient=lambda x: np.array([2 * x[0] ** 3]),
        hessian=lambda x: np.array([[6 * x[0] ** 2]]),
        name="quartic",
    )


def test_lambda_value_examples():
    assert lambda_value(2.0, 2.0, 1.0, 0.0, 3.0) == pytest.approx(2 * math.sqrt(2))
    assert lambda_value(1.0, 1e-20, 1.0, 0.5, 3.0) == pytest.approx(1.5)
    assert lambda_value(1.0, 0.0, 1.0, 0.0, 3.0, mu_floor=0.7) == pytest.approx(1.4)


def test_initial_trial_index_examples():
    assert initial_trial_index(1.0, 1.0) == 1
    assert initial_trial_index(2.0, 1.0) == 0
    assert initial_trial_index(3.0, 1.0) == 0
    assert initial_trial_index(0.3, 1.0) == 3


def test_sigma1_init_example():
    assert sigma_hat_1(1.0, 1.0, 1e-4, 3.0, 1.0) == pytest.approx(1.5001, rel=1e-4)
    assert sigma_hat_2(1.0, 1.0, 1e-4, 3.0, 1.0) == pytest.approx(2.0008, rel=1e-4)
    assert sigma1_init(1.0, 1.0, 1e-4, 3.0, 1.0) == pytest.approx(2.0008, rel=1e-4)


def test_sigma1_init_floor_and_alpha_one_independence():
    assert sigma1_init(0.0, 5.0, 0.0, 3.0, 1.0) == 1e-8
    assert sigma1_init(2.0, 0.1, 1e-4, 3.0, 1.0) == sigma1_init(2.0, 100.0, 1e-4, 3.0, 1.0)


def test_sigma1_init_rejects_small_zeta():
    with pytest.raises(ValueError):
        sigma1_init(1.0, 1.0, 1e-4, 2.0, 1.0)


def test_sigma_max_bound_exceeds_sigma1():
    bound = sigma_max_bound(3.0, 1.0, 1.0, 1e-4, 3.0, 1.0)
    assert bound == pytest.approx(2 * 2.0008 + 3.0, rel=1e-4)


def test_config_validation():
    with pytest.raises(ValidationError):
        SolverConfig(hessian_mode="finite_difference", kappa_b=0.0)
    with pytest.raises(ValidationError):
        SolverConfig(zeta=2.0)
    with pytest.raises(ValidationError):
        SolverConfig(theta=1.0)
    assert SolverConfig(hessian_mode="analytic", kappa_b=0.0).variant_name == "adn-h"
    assert SolverConfig(subproblem_mode="cg").variant_name == "adn-fd-inex"


def test_estimate_h0_examples():
    problem = make_quadratic(4)
    rng = np.random.default_rng(0)
    assert estimate_h0(problem, rng.standard_normal(4), rng.standard_normal(4), "analytic") == 1e-12
    cube = FunctionProblem(
        1,
        value=lambda x: x[0] ** 3,
        gradient=lambda x: 3 * x**2,
        hessian=lambda x: np.array([[6 * x[0]]]),
    )
    assert estimate_h0(cube, np.array([1.0]), np.array([1.1]), "analytic") == pytest.approx(3.0)


def test_estimate_h0_is_deterministic():
    problem = make_logsumexp(10, 50, 0.2, seed=3)
    rng = np.random.default_rng(3)
    x0, x1 = rng.standard_normal(10), rng.standard_normal(10)
    first = estimate_h0(problem, x0, x1)
    assert np.isfinite(first) and first > 0
    assert estimate_h0(problem, x0, x1) == first


def test_inner_trial_accepts_hand_computed_step():
    config = SolverConfig(hessian_mode="analytic", theta=0.0, kappa_b=0.0, sigma1=0.25)
    # 2^0 * 0.5 with |g| = 1 gives lambda = sqrt(2) * sqrt(0.5) = 1
    outcome = inner_trial(np.array([1.0]), np.array([1.0]), 0.5, 0, config, half_square())
    assert outcome.lam == pytest.approx(1.0)
    assert outcome.accepted
    np.testing.assert_allclose(outcome.x_plus, [0.5])
    assert outcome.f_plus == pytest.approx(0.125)


def test_inner_trial_rejects_tiny_regularization():
    config = SolverConfig(hessian_mode="analytic", theta=0.0, kappa_b=0.0, sigma1=1e-12)
    outcome = inner_trial(np.array([1.0]), np.array([2.0]), 1e-12, 0, config, quartic())
    assert not outcome.accepted
    assert outcome.reason


def test_inner_trial_rejects_indefinite_model():
    concave = FunctionProblem(
        1,
        value=lambda x: -(x[0] ** 2),
        gradient=lambda x: np.array([-2 * x[0]]),
        hessian=lambda x: np.array([[-2.0]]),
    )
    config = SolverConfig(hessian_mode="analytic", theta=0.0, kappa_b=0.0, sigma1=1e-6)
    outcome = inner_trial(np.array([1.0]), np.array([-2.0]), 1e-6, 0, config, concave)
    assert not outcome.accepted


def test_run_on_diagonal_quadratic():
    problem = QuadraticProblem(np.diag([1.0, 10.0]))
    config = SolverConfig(hessian_mode="analytic", theta=0.0, kappa_b=0.0, eps=1e-10)
    result = run(problem, np.array([1.0, 1.0]), config)
    assert result.status == "converged"
    assert result.final_gnorm < 1e-10
    assert acceptance_violations(result.trace) == []
    assert recompute_acceptance(problem, result) == []
    assert sigma_violations(result.trace, result.sigma1) == []


def test_stationary_start_converges_without_steps():
    problem = QuadraticProblem(np.eye(3))
    result = run(problem, np.zeros(3), SolverConfig(sigma1=1.0))
    assert result.status == "converged"
    assert result.iterations == 0
    assert len(result.trace) == 1
    assert result.trace[0].k == 1 and result.trace[0].Nk == 0


def test_trace_bookkeeping():
    problem = make_logsumexp(10, 50, 0.2, seed=1)
    x1 = np.random.default_rng(1).standard_normal(10)
    result = run(problem, x1, SolverConfig(subproblem_mode="cg", eps=1e-8))
    steps = [r for r in result.trace if r.has_step]
    assert result.trace[-1].i_k is None and result.trace[-1].lambda_ is None
    assert [r.k for r in result.trace] == list(range(1, len(result.trace) + 1))
    assert all(b.Nk >= a.Nk + 1 for a, b in zip(steps, steps[1:]))
    assert result.total_trials >= result.iterations
    assert all(r.f_evals > 0 and r.g_evals > 0 for r in result.trace)
    for a, b in zip(steps, result.trace[1:]):
        assert b.sigma_k == pytest.approx(2.0 ** (a.i_k - 1) * a.sigma_k)
    assert len(result.iterates) == result.iterations + 1
    summary = result.summary()
    assert summary.total_trials == result.trace[-1].Nk
    assert summary.solver == "adn-fd-inex"


def test_outer_cap_reported():
    problem = make_logsumexp(10, 50, 0.05, seed=2)
    x1 = np.random.default_rng(2).standard_normal(10)
    result = run(problem, x1, SolverConfig(eps=1e-14, max_outer=2))
    assert result.status == "max_outer"
    assert result.iterations == 2


def test_trial_cap_reports_stall():
    problem = make_logsumexp(10, 50, 0.1, seed=4)
    x1 = np.random.default_rng(4).standard_normal(10)
    config = SolverConfig(hessian_mode="analytic", kappa_b=0.0, sigma1=1e-12, max_trials=1)
    result = run(problem, x1, config)
    assert result.status == "stalled"
    assert "trials" in result.message


def test_fd_and_analytic_variants_agree_on_quadratics():
    problem = make_quadratic(6, seed=5, condition=5.0)
    x1 = np.random.default_rng(5).standard_normal(6)
    common = {"theta": 0.0, "sigma1": 1.0, "eps": 1e-10, "max_outer": 5}
    fd = run(problem, x1, SolverConfig(hessian_mode="finite_difference", **common))
    exact = run(problem, x1, SolverConfig(hessian_mode="analytic", kappa_b=0.0, **common))
    for a, b in zip(fd.iterates[:6], exact.iterates[:6]):
        assert np.linalg.norm(a - b) <= 1e-3


def test_hessian_error_tracked_on_accepted_steps():
    problem = make_logsumexp(8, 40, 0.3, seed=6)
    x1 = np.random.default_rng(6).standard_normal(8)
    result = run(problem, x1, SolverConfig(track_hessian_error=True, eps=1e-8))
    steps = [r for r in result.trace if r.has_step]
    assert steps and all(r.hessian_error is not None for r in steps)
    assert all(r.h >= 1e-10 for r in steps)
    # away from the solution rounding in the differences stays far below κ_B√‖g‖^α
    early = [r for r in steps if r.gnorm >= 1e-2]
    assert early
    assert all(r.hessian_error <= r.assumption_d_bound for r in early)


def battery():
    quadratics = ((4, 0, 5.0), (8, 1, 50.0), (10, 2, 10.0))
    problems = [make_quadratic(n, seed=s, condition=c) for n, s, c in quadratics]
    for j, beta in enumerate((0.05, 0.1, 0.3)):
        problems.append(make_logsumexp(10, 50, beta, seed=10 + j))
    problems.append(make_logsumexp(20, 100, 0.2, seed=20))
    for n, ell in ((5, 1e-2), (10, 1e-3), (8, 1e-4)):
        problems.append(make_logistic(n, 200, ell, seed=30 + n))
    return problems


def variant_id(variant):
    return f"{variant['hessian_mode']}-{variant['subproblem_mode']}"


@pytest.mark.parametrize("variant", VARIANTS, ids=variant_id)
def test_acceptance_and_sigma_invariants_on_battery(variant):
    for index, problem in enumerate(battery()):
        x1 = np.random.default_rng(100 + index).standard_normal(problem.n)
        config = SolverConfig(eps=1e-8, max_outer=200, seed=index, **variant)
        result = run(problem, x1, config)
        label = f"{problem.describe()} {config.variant_name}"
        assert result.iterations > 0, label
        assert acceptance_violations(result.trace, slack=1e-12) == [], label
        assert sigma_violations(result.trace, result.sigma1, result.sigma_bound) == [], label
        assert "sigma_upper_bound_exceeded" not in result.flags, label
        assert all(r.i_k <= config.max_trials for r in result.trace if r.has_step), label
        assert complexity_ledger(result.trace).holds, label
        if problem.kind == "quadratic":
            assert result.status == "converged", label


def test_global_rate_slope_on_logsumexp():
    alpha = 0.95
    problem = make_logsumexp(50, 500, 0.05, seed=7)
    x1 = np.random.default_rng(7).standard_normal(50)
    config = SolverConfig(
        hessian_mode="analytic", kappa_b=0.0, alpha=alpha, eps=1e-12, max_outer=200, seed=7
    )
    result = run(problem, x1, config)
    f_values = [r.f for r in result.trace]
    f_star = min(f_values)
    slope = global_rate_slope(f_values, f_star)
    assert slope <= -2.0 / (2.0 - alpha) + 0.5, f"slope {slope:.3f} too flat"


def test_local_superlinear_rate_on_logistic():
    problem = make_logistic(10, 200, 1e-2, seed=8)
    x1 = np.random.default_rng(8).standard_normal(10)
    config = SolverConfig(hessian_mode="analytic", kappa_b=0.0, theta=0.0, eps=1e-9, seed=8)
    result = run(problem, x1, config)
    assert result.status == "converged"
    mu = float(np.linalg.eigvalsh(problem.hessian(result.x_star)).min())
    sigma_max = max(r.sigma_k for r in result.trace)
    C = local_rate_constant(sigma_max, mu)
    gnorms = [r.gnorm for r in result.trace]
    assert local_rate_violations(gnorms, C, config.alpha, last=5) == []


@pytest.mark.parametrize("variant", VARIANTS, ids=variant_id)
def test_start_point_from_same_seed_gets_distinct_reference(variant):
    problem = make_logsumexp(6, 30, 0.2, seed=12)
    x1 = np.random.default_rng(12).standard_normal(6)
    result = run(problem, x1, SolverConfig(seed=12, eps=1e-8, **variant))
    assert result.h0 is not None and np.isfinite(result.h0) and result.h0 > 0
    assert result.iterations > 0


def test_reference_point_is_seeded_and_distinct():
    x1 = np.random.default_rng(3).standard_normal(4)
    first = reference_point(x1, 3)
    assert not np.array_equal(first, x1)
    np.testing.assert_array_equal(first, reference_point(x1, 3))
    # a caller-supplied copy of x1 is replaced, any other point is kept
    np.testing.assert_array_equal(reference_point(x1, 3, x0=x1.copy()), first)
    np.testing.assert_array_equal(reference_point(x1, 3, x0=np.ones(4)), np.ones(4))


def test_run_with_reference_equal_to_start():
    problem = make_quadratic(3, seed=2)
    x1 = np.array([1.0, -1.0, 0.5])
    result = run(problem, x1, SolverConfig(hessian_mode="analytic", kappa_b=0.0), x0=x1.copy())
    assert result.status == "converged"


@pytest.mark.parametrize(
    "config, expected",
    [
        (SolverConfig(hessian_mode="analytic", kappa_b=0.0), 2),
        (SolverConfig(hessian_mode="finite_difference"), 2 + 3),
    ],
    ids=["analytic", "finite_difference"],
)
def test_h0_estimate_reuses_start_gradient(config, expected):
    result = run(QuadraticProblem(np.eye(3)), np.zeros(3), config)
    assert result.status == "converged" and result.h0 is not None
    # ∇f(x1) once, ∇f(x0) once, plus n difference columns in FD mode
    assert result.trace[-1].g_evals == expected
    assert result.trace[-1].f_evals == 1


def test_trial_index_capped_absolutely():
    config = SolverConfig(
        hessian_mode="analytic", kappa_b=0.0, theta=0.0, sigma1=1e-12, max_trials=3
    )
    result = run(quartic(), np.array([1.0]), config)
    assert result.status == "stalled"
    assert "i <= 3" in result.message
    # σ_1 gives i₀ = 1, so only i = 1, 2, 3 are tried
    assert result.trace[-1].Nk == 3


def test_sigma_bound_reported_in_summary():
    problem = make_logsumexp(8, 40, 0.1, seed=9)
    x1 = np.random.default_rng(9).standard_normal(8)
    result = run(problem, x1, SolverConfig(hessian_mode="analytic", kappa_b=0.0, eps=1e-8))
    summary = result.summary()
    assert summary.sigma_max_bound == result.sigma_bound
    assert summary.sigma_max_observed <= summary.sigma_max_bound
    assert summary.sigma_max_bound >= result.sigma1


def test_sigma_above_bound_fails_run(monkeypatch):
    monkeypatch.setattr("hfnewton.solvers.adn.sigma_max_bound", lambda *args: 1e-300)
    problem = make_logsumexp(8, 40, 0.1, seed=9)
    x1 = np.random.default_rng(9).standard_normal(8)
    result = run(problem, x1, SolverConfig(hessian_mode="analytic", kappa_b=0.0, eps=1e-8))
    assert result.status == "stalled"
    assert result.flags == ["sigma_upper_bound_exceeded"]
    assert result.iterations == 1
