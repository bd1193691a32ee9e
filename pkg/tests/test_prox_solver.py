import numpy as np
import pytest

from speccont.errors import ConfigError, DomainError, NumericError
from speccont.prox_solver import (
    IstaConfig,
    bp_objective,
    cd_oracle,
    default_step,
    ista_solve,
    ista_solve_batch,
    ista_step,
    soft_threshold,
    subgradient_residual,
)


def random_instance(rng, m=20, n=30, k=4, noise=1e-3):
    """Well-conditioned lasso instance with a sparse planted solution."""
    K = rng.standard_normal((m, n)) / np.sqrt(m)
    a = np.zeros(n)
    support = rng.choice(n, size=k, replace=False)
    a[support] = rng.standard_normal(k)
    g = K @ a + noise * rng.standard_normal(m)
    return K, g


def test_soft_threshold_branches():
    assert soft_threshold(1.2, 0.5) == pytest.approx(0.7)
    assert soft_threshold(-0.3, 0.5) == 0.0
    assert soft_threshold(-1.0, 0.5) == pytest.approx(-0.5)
    y = np.array([-2.0, 0.1, 3.0])
    assert np.array_equal(soft_threshold(y, 0.0), y)
    with pytest.raises(DomainError):
        soft_threshold(1.0, -0.1)


def test_soft_threshold_nonexpansive(rng):
    for _ in range(50):
        x, y = rng.standard_normal(10), rng.standard_normal(10)
        theta = rng.random()
        assert np.linalg.norm(soft_threshold(x, theta) - soft_threshold(y, theta)) \
            <= np.linalg.norm(x - y) + 1e-15


def test_bp_objective_values():
    g = np.array([1.0, 2.0])
    assert bp_objective(np.zeros(2), np.eye(2), g, 0.1) == pytest.approx(2.5)
    assert bp_objective(np.array([1.0, -1.0]), np.eye(2), np.zeros(2), 1.0) \
        == pytest.approx(3.0)


def test_bp_objective_minimum_against_random_probes(rng):
    # K = I: minimizer is the soft-threshold of g
    g = rng.standard_normal(8)
    lam = 0.3
    a_star = soft_threshold(g, lam)
    base = bp_objective(a_star, np.eye(8), g, lam)
    probes = a_star + 1e-2 * rng.standard_normal((100_000, 8))
    r = g - probes
    vals = 0.5 * np.sum(r * r, axis=1) + lam * np.sum(np.abs(probes), axis=1)
    assert np.all(vals >= base - 1e-12)


def test_ista_step_identity_kernel(rng):
    g = rng.standard_normal(5)
    cfg = IstaConfig(lam=0.2, step=1.0)
    for a in (np.zeros(5), rng.standard_normal(5)):
        assert np.allclose(ista_step(a, np.eye(5), g, cfg), soft_threshold(g, 0.2))


def test_ista_step_fixed_point(rng):
    K, g = random_instance(rng)
    cfg = IstaConfig(lam=1e-2, tol=1e-14, max_iter=200_000)
    rep = ista_solve(K, g, cfg)
    assert rep.converged
    again = ista_step(rep.solution, K, g, cfg, step=rep.step)
    assert np.max(np.abs(again - rep.solution)) <= 1e-10


def test_ista_step_from_zero(rng):
    K, g = random_instance(rng)
    cfg = IstaConfig(lam=1e-2, step=0.5)
    expect = soft_threshold(0.5 * (K.T @ g), 0.5 * 1e-2)
    assert np.allclose(ista_step(np.zeros(30), K, g, cfg), expect)


def test_ista_solve_identity_closed_form(rng):
    g = rng.standard_normal(6)
    rep = ista_solve(np.eye(6), g, IstaConfig(lam=0.2, step=1.0))
    assert rep.converged and rep.iterations <= 2
    assert np.allclose(rep.solution, soft_threshold(g, 0.2))


def test_ista_solve_monotone_objective(rng):
    K, g = random_instance(rng)
    rep = ista_solve(K, g, IstaConfig(lam=1e-2, max_iter=500))
    assert np.all(np.diff(rep.objective_trace) <= 1e-12)


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_ista_solve_diverges_with_huge_step(rng):
    K, g = random_instance(rng)
    with pytest.raises(NumericError):
        ista_solve(K, g, IstaConfig(lam=1e-3, step=1e6, max_iter=2000))


def test_ista_solve_batch_matches_single(rng):
    K, _ = random_instance(rng)
    G = rng.standard_normal((5, 20))
    cfg = IstaConfig(lam=1e-2, tol=1e-12, max_iter=100_000)
    batch = ista_solve_batch(K, G, cfg)
    for i in range(5):
        single = ista_solve(K, G[i], cfg).solution
        assert np.max(np.abs(batch[i] - single)) <= 1e-9


def test_cd_oracle_identity_and_single_column(rng):
    g = rng.standard_normal(6)
    assert np.allclose(cd_oracle(np.eye(6), g, 0.2), soft_threshold(g, 0.2))
    k = rng.standard_normal((6, 1))
    a = cd_oracle(k, g, 0.3)
    expect = soft_threshold(float(k[:, 0] @ g), 0.3) / float(k[:, 0] @ k[:, 0])
    assert a[0] == pytest.approx(expect, abs=1e-12)


def test_ista_and_cd_agree_on_random_instances():
    # two independent implementations of the same convex problem
    rng = np.random.default_rng(2024)
    lam = 1e-2
    for _ in range(50):
        K, g = random_instance(rng)
        a_cd = cd_oracle(K, g, lam)
        a_ista = ista_solve(K, g, IstaConfig(lam=lam, tol=1e-13,
                                             max_iter=200_000)).solution
        assert np.max(np.abs(a_cd - a_ista)) <= 1e-6
        assert subgradient_residual(a_cd, K, g, lam) <= 1e-8
        assert subgradient_residual(a_ista, K, g, lam) <= 1e-8


def test_ista_on_fermi_kernel_reports_nonconvergence(kernel, rng):
    # the ill-posed kernel stalls; that is reported, not raised
    a = np.zeros(64)
    a[20], a[45] = 2.0, 1.5
    a /= a @ kernel.freq_grid.weights
    g = a @ kernel.entries.T
    rep = ista_solve(kernel, g, IstaConfig(lam=1e-3, max_iter=300))
    assert not rep.converged
    assert rep.iterations == 300


def test_config_validation():
    with pytest.raises(ConfigError):
        IstaConfig(lam=0.0)
    with pytest.raises(ConfigError):
        IstaConfig(step=-1.0)
    with pytest.raises(ConfigError):
        IstaConfig(tol=0.0)


def test_default_step_matches_norm(kernel):
    from speccont.kernel import spectral_norm
    assert default_step(kernel) == pytest.approx(1.0 / spectral_norm(kernel) ** 2)
