"""Shared fixtures.

The expensive objects -- the benchmark datasets and the two trained depth-6
networks -- are session-scoped so the acceptance tests and the unit tests
train each network exactly once per pytest run.
"""

import time

import numpy as np
import pytest

from speccont import benchmark, prox_solver, unrolled_net
from speccont.kernel import default_kernel
from speccont.metrics import rse_batch


@pytest.fixture(scope="session")
def kernel():
    return default_kernel()


@pytest.fixture(scope="session")
def exp_config():
    return benchmark.ExperimentConfig()


@pytest.fixture(scope="session")
def bench_datasets(exp_config, kernel):
    """(train, single-peak test, multi-peak test) at benchmark defaults."""
    return benchmark.make_datasets(exp_config, kernel)


def _train_timed(config, kernel, variant, depth, train_ds, test_ds):
    t0 = time.perf_counter()
    params = benchmark._train_unrolled(config, kernel, variant, depth,
                                       train_ds, test_ds)
    return params, time.perf_counter() - t0


@pytest.fixture(scope="session")
def lista6(exp_config, kernel, bench_datasets):
    """(trained depth-6 plain network, training seconds)."""
    train_ds, _, multi_ds = bench_datasets
    return _train_timed(exp_config, kernel, unrolled_net.LISTA,
                        exp_config.lista_depth, train_ds, multi_ds)


@pytest.fixture(scope="session")
def rlista6(exp_config, kernel, bench_datasets):
    """(trained depth-6 relaxed network, training seconds)."""
    train_ds, _, multi_ds = bench_datasets
    return _train_timed(exp_config, kernel, unrolled_net.RLISTA,
                        exp_config.rlista_depth, train_ds, multi_ds)


@pytest.fixture(scope="session")
def ista_rse(exp_config, kernel, bench_datasets):
    """Per-sample ISTA errors {'single': ..., 'multi': ...} at the benchmark budget."""
    _, single_ds, multi_ds = bench_datasets
    cfg = prox_solver.IstaConfig(lam=exp_config.lam,
                                 max_iter=exp_config.ista_max_iter)
    out = {}
    for name, ds in (("single", single_ds), ("multi", multi_ds)):
        A_hat = prox_solver.ista_solve_batch(kernel, ds.greens_noisy(), cfg)
        out[name] = rse_batch(A_hat, ds.spectra())
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
