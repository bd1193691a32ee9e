import numpy as np
import pytest

from speccont.errors import ConfigError, DomainError, ShapeError
from speccont.kernel import (
    FrequencyGrid,
    TimeGrid,
    build_grids,
    build_kernel_matrix,
    default_kernel,
    fermi_kernel,
    forward_map,
    spectral_norm,
)

EPS = np.finfo(float).eps


def test_fermi_kernel_origin():
    assert fermi_kernel(0.0, 0.0, 10.0) == 0.5


def test_fermi_kernel_endpoint_identity():
    omega = np.linspace(-8.0, 8.0, 64)
    for beta in (1.0, 10.0, 50.0):
        total = fermi_kernel(0.0, omega, beta) + fermi_kernel(beta, omega, beta)
        assert np.max(np.abs(total - 1.0)) <= 4 * EPS


def test_fermi_kernel_reflection_symmetry():
    assert fermi_kernel(2.5, 3.0, 10.0) == pytest.approx(
        fermi_kernel(7.5, -3.0, 10.0), abs=4 * EPS)
    tau = np.linspace(0.0, 10.0, 64)
    omega = np.linspace(-8.0, 8.0, 64)
    lhs = fermi_kernel(tau[:, None], omega[None, :], 10.0)
    rhs = fermi_kernel(10.0 - tau[:, None], -omega[None, :], 10.0)
    # 10 - tau itself rounds for interior grid points, so allow a few dozen ulp
    assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_fermi_kernel_no_overflow_large_arguments():
    # |beta*omega| up to 700 must stay finite and within [0, 1]
    vals = fermi_kernel(np.array([0.0, 0.5, 1.0]), np.array([[-700.0], [700.0]]), 1.0)
    assert np.all(np.isfinite(vals))
    assert np.all((vals >= 0.0) & (vals <= 1.0))


def test_fermi_kernel_monotone_in_tau_for_positive_omega():
    tau = np.linspace(0.0, 10.0, 50)
    vals = fermi_kernel(tau, 2.0, 10.0)
    assert np.all(np.diff(vals) < 0)


def test_fermi_kernel_domain_errors():
    with pytest.raises(DomainError):
        fermi_kernel(-0.1, 0.0, 10.0)
    with pytest.raises(DomainError):
        fermi_kernel(10.1, 0.0, 10.0)
    with pytest.raises(DomainError):
        fermi_kernel(0.0, 0.0, 0.0)


def test_build_grids_small():
    tg, fg = build_grids(10.0, 3, -1.0, 1.0, 3)
    assert np.array_equal(tg.points, [0.0, 5.0, 10.0])
    assert np.array_equal(fg.points, [-1.0, 0.0, 1.0])
    assert np.array_equal(fg.weights, [1.0, 1.0, 1.0])


def test_build_grids_default_spacing():
    _, fg = build_grids()
    assert fg.weights[0] == pytest.approx(16.0 / 63.0, rel=1e-15)
    assert np.all(fg.weights == fg.weights[0])


def test_build_grids_rejects_bad_bounds():
    with pytest.raises(ConfigError):
        build_grids(10.0, 2, 0.0, 0.0, 2)
    with pytest.raises(ConfigError):
        build_grids(-1.0, 2, -1.0, 1.0, 2)
    with pytest.raises(ConfigError):
        build_grids(10.0, 1, -1.0, 1.0, 2)


def test_grid_invariants_enforced():
    with pytest.raises(ConfigError):
        TimeGrid(10.0, np.array([0.0, 5.0, 9.0]))  # does not end at beta
    with pytest.raises(ConfigError):
        TimeGrid(10.0, np.array([0.0, 6.0, 5.0, 10.0]))  # not increasing
    with pytest.raises(ConfigError):
        FrequencyGrid(np.array([0.0, 1.0]), np.array([1.0, -1.0]))


def test_kernel_matrix_trivial_entry():
    tg = TimeGrid(1.0, np.array([0.0, 1.0]))
    fg = FrequencyGrid(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    km = build_kernel_matrix(tg, fg, weighted=True)
    assert km.entries[0, 0] == 0.5


def test_kernel_matrix_unweighted_row_identity():
    tg, fg = build_grids()
    km = build_kernel_matrix(tg, fg, weighted=False)
    assert np.max(np.abs(km.entries[0] + km.entries[-1] - 1.0)) <= 4 * EPS


def test_kernel_matrix_shape_validation():
    tg, fg = build_grids(10.0, 4, -1.0, 1.0, 5)
    entries = np.ones((3, 5))
    with pytest.raises(ShapeError):
        from speccont.kernel import KernelMatrix
        KernelMatrix(entries, tg, fg)


def test_forward_map_zero_and_column_selection():
    km = default_kernel()
    assert np.array_equal(forward_map(km, np.zeros(64)), np.zeros(64))
    # delta spike of mass 1/d_omega at column j picks out that kernel column
    j = 20
    a = np.zeros(64)
    a[j] = 1.0 / km.freq_grid.weights[j]
    expect = fermi_kernel(km.time_grid.points, km.freq_grid.points[j], 10.0)
    assert np.allclose(forward_map(km, a), expect, rtol=1e-14)


def test_forward_map_endpoint_sum_for_normalized_spectrum(rng):
    km = default_kernel()
    a = rng.random(64)
    a /= a @ km.freq_grid.weights
    g = forward_map(km, a)
    assert g[0] + g[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(g > 0)


def test_forward_map_linearity(rng):
    km = default_kernel()
    a, b = rng.random(64), rng.random(64)
    lhs = forward_map(km, 2.0 * a + 3.0 * b)
    rhs = 2.0 * forward_map(km, a) + 3.0 * forward_map(km, b)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_forward_map_requires_weighted_kernel():
    tg, fg = build_grids()
    km = build_kernel_matrix(tg, fg, weighted=False)
    with pytest.raises(DomainError):
        forward_map(km, np.ones(64))
    with pytest.raises(ShapeError):
        forward_map(default_kernel(), np.ones(63))


def test_spectral_norm_trivial_matrices():
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-10)
    assert spectral_norm(np.diag([3.0, 1.0, 0.5])) == pytest.approx(3.0, rel=1e-10)


def test_spectral_norm_matches_svd_oracle(kernel):
    oracle = np.linalg.svd(kernel.entries, compute_uv=False)[0]
    assert spectral_norm(kernel) == pytest.approx(oracle, rel=1e-8)
