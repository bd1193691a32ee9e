"""Small-scale harness checks; the full-budget runs live in test_acceptance."""

import dataclasses

import numpy as np
import pytest

from speccont import benchmark, prox_solver
from speccont.metrics import rse_batch


def tiny_config(**kw):
    base = dict(train_size=60, test_single=6, test_multi=8, epochs=1,
                ista_max_iter=200, maxent_samples=2)
    base.update(kw)
    return benchmark.ExperimentConfig(**base)


def test_fcn_width_targets():
    config = benchmark.ExperimentConfig()
    lista6 = 6 * (64 * 64 + 64 * 64 + 1)
    for n_hidden, ratio in ((1, 10.0), (2, 7.0)):
        w = benchmark.fcn_width_for_ratio(config, n_hidden, ratio)

        def count(width):
            sizes = [64] + [width] * n_hidden + [64]
            return sum((a + 1) * b for a, b in zip(sizes[:-1], sizes[1:]))

        assert count(w) >= ratio * lista6
        assert count(w - 1) < ratio * lista6  # smallest such width


def test_make_datasets_strata(kernel):
    config = tiny_config()
    train, single, multi = benchmark.make_datasets(config, kernel)
    assert len(train) == 60 and len(single) == 6 and len(multi) == 8
    assert single.peak_counts().max() == 1
    assert multi.peak_counts().min() >= 2
    # disjoint seed streams
    assert train.samples[0].spectrum.tobytes() != single.samples[0].spectrum.tobytes()


def test_ista_rows_match_direct_metrics(kernel, tmp_path):
    config = tiny_config(methods=("ista",), output_dir=str(tmp_path))
    rows = benchmark.run_method_comparison(config, str(tmp_path))
    assert {r.stratum for r in rows} == {"single", "multi"}
    _, single_ds, _ = benchmark.make_datasets(config, kernel)
    cfg = prox_solver.IstaConfig(lam=config.lam, max_iter=config.ista_max_iter)
    direct = rse_batch(prox_solver.ista_solve_batch(kernel, single_ds.greens_noisy(), cfg),
                       single_ds.spectra())
    row = next(r for r in rows if r.stratum == "single")
    assert row.mean_rse == pytest.approx(float(direct.mean()))
    assert (tmp_path / "method_comparison.csv").exists()


def test_failed_method_recorded_not_raised(tmp_path):
    config = tiny_config(methods=("ista", "nonsense"))
    rows = benchmark.run_method_comparison(config)
    bad = [r for r in rows if r.note.startswith("failed")]
    assert len(bad) == 1 and bad[0].method == "nonsense"
    assert np.isnan(bad[0].mean_rse)


def test_checkpoint_cache_reused(tmp_path):
    config = tiny_config(methods=("lista",))
    rows1 = benchmark.run_method_comparison(config, str(tmp_path))
    assert (tmp_path / "lista6.ckpt").exists()
    rows2 = benchmark.run_method_comparison(config, str(tmp_path))
    assert rows1[0].mean_rse == rows2[0].mean_rse


def test_parameter_counts_in_rows(tmp_path):
    config = tiny_config(methods=("lista",))
    rows = benchmark.run_method_comparison(config, str(tmp_path))
    assert all(r.parameter_count == 6 * (64 * 64 + 64 * 64 + 1) for r in rows)


def test_neural_default_rows(tmp_path):
    config = tiny_config()
    rows = benchmark.run_neural_default(config, str(tmp_path))
    assert len(rows) == 2
    for row in rows:
        assert set(row) == {"sample", "rse_flat", "rse_rlista", "rse_rlista_plus"}
        assert row["rse_flat"] >= 0.0


def test_deterministic_flag_zeroes_runtime():
    config = tiny_config(methods=("ista",), deterministic=True)
    rows = benchmark.run_method_comparison(config)
    assert all(r.runtime_per_sample == 0.0 for r in rows)


def test_config_hash_sensitivity():
    c1, c2 = tiny_config(), tiny_config(seed=1)
    assert c1.hash() != c2.hash()
    assert c1.hash() == dataclasses.replace(c1).hash()
