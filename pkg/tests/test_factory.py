import numpy as np
import pytest
from pydantic import ValidationError

from hfnewton.factory import BenchParams, ProblemFactory, SolverFactory
from hfnewton.problems.libsvm import dump_libsvm
from hfnewton.schemas import ProblemSpec
from hfnewton.solvers.adn import SolverConfig
from hfnewton.solvers.baselines import AdaNConfig, CnmFdConfig


@pytest.mark.parametrize(
    "name, hessian_mode, subproblem_mode, theta, kappa_b",
    [
        ("adn-fd", "finite_difference", "direct", 0.0, 1e-3),
        ("adn-fd-inex", "finite_difference", "cg", 1e-6, 1e-3),
        ("adn-h", "analytic", "direct", 0.0, 0.0),
        ("adn-h-inex", "analytic", "cg", 1e-6, 0.0),
    ],
)
def test_adn_variants_are_wired(name, hessian_mode, subproblem_mode, theta, kappa_b):
    params = BenchParams(alpha=0.95, zeta=2.01, theta=1e-6, kappa_b=1e-3)
    config = SolverFactory.config_for(name, params)
    assert isinstance(config, SolverConfig)
    assert config.hessian_mode == hessian_mode
    assert config.subproblem_mode == subproblem_mode
    assert config.variant_name == name
    assert (config.alpha, config.zeta) == (0.95, 2.01)
    # exact Hessians carry no κ_B term and direct solves no θ term
    assert (config.theta, config.kappa_b) == (theta, kappa_b)


def test_cnm_keeps_positive_kappa():
    cnm = SolverFactory.config_for("cnm-fd", BenchParams(kappa_b=1e-3))
    assert cnm.kappa_b == 1e-3


def test_baseline_configs():
    params = BenchParams(gamma=4.5, theta_bar=2.7, sigma_divisor=1e4, eps=1e-11)
    adan = SolverFactory.config_for("adan", params)
    assert isinstance(adan, AdaNConfig) and adan.eps == 1e-11
    cnm = SolverFactory.config_for("cnm-fd", params)
    assert isinstance(cnm, CnmFdConfig)
    assert (cnm.gamma, cnm.theta_bar, cnm.sigma_divisor) == (4.5, 2.7, 1e4)


def test_overrides_win_and_are_validated():
    config = SolverFactory.config_for("adn-h", BenchParams(), {"max_trials": 3, "sigma1": 2.0})
    assert config.max_trials == 3 and config.sigma1 == 2.0
    with pytest.raises(ValidationError):
        SolverFactory.config_for("adn-h", BenchParams(), {"no_such_field": 1})
    with pytest.raises(ValueError):
        SolverFactory.create("newton", BenchParams())


def test_runner_names_its_results():
    runner = SolverFactory.create("adn-h", BenchParams(eps=1e-8))
    problem = ProblemFactory.from_spec(ProblemSpec(kind="quadratic", n=3, seed=1))
    x0, x1 = ProblemFactory.initial_points(3, 1)
    result = runner(problem, x1, x0=x0)
    assert result.solver == "adn-h"
    assert result.status == "converged"


def test_problem_factory_kinds(tmp_path):
    lse = ProblemFactory.from_spec(ProblemSpec(kind="logsumexp", n=4, m=10, beta=0.1, seed=3))
    assert (lse.n, lse.m, lse.beta) == (4, 10, 0.1)
    synthetic = ProblemFactory.from_spec(ProblemSpec(kind="logistic", n=3, m=8, ell=1e-2))
    assert synthetic.n == 3

    path = tmp_path / "tiny"
    with open(path, "w") as f:
        dump_libsvm(np.array([[1.0, 0.0], [0.0, 2.0]]), np.array([1, -1]), f)
    from_file = ProblemFactory.from_spec(ProblemSpec(kind="logistic", ell=1e-3, data=path))
    assert from_file.n == 2 and from_file.m == 2


def test_spec_requires_kind_fields():
    with pytest.raises(ValidationError):
        ProblemSpec(kind="logsumexp", n=3, m=5)
    with pytest.raises(ValidationError):
        ProblemSpec(kind="logistic", n=3, m=5)


def test_initial_points_are_seeded():
    a0, a1 = ProblemFactory.initial_points(5, 11)
    b0, b1 = ProblemFactory.initial_points(5, 11)
    np.testing.assert_array_equal(a0, b0)
    np.testing.assert_array_equal(a1, b1)
    assert not np.allclose(a0, a1)
