"""End-to-end experiment harness.

Reproduces, at desk scale, the three headline comparisons:

  * method comparison on single-peak vs multi-peak test strata
    (classical proximal iteration vs trained unrolled networks);
  * parameter efficiency of unrolled networks against dense baselines
    whose widths are chosen for ~10x (two-layer) and ~7x (three-layer)
    the parameter count of the depth-6 unrolled network;
  * maximum entropy with a flat default model vs a neural default model
    built from a depth-6 relaxed network's output.

All learned methods share one training budget and one dataset; every table
carries the resolved config hash and dataset/checkpoint hashes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import maxent, metrics, prox_solver, synthdata, unrolled_net
from .kernel import KernelMatrix, build_grids, build_kernel_matrix
from .metrics import BenchmarkRow, rse_batch
from .tables import config_hash, write_table


@dataclass(frozen=True)
class ExperimentConfig:
    beta: float = 10.0
    n_tau: int = 64
    omega_min: float = -8.0
    omega_max: float = 8.0
    n_omega: int = 64
    train_size: int = 60_000
    test_single: int = 500
    test_multi: int = 2000
    noise_sigma: float = 1e-3
    seed: int = 0
    lam: float = 1e-3
    epochs: int = 150
    batch_size: int = 64
    learning_rate: float = 2e-3
    lr_decay: float = 0.985
    lista_depth: int = 6
    rlista_depth: int = 6
    deep_rlista_depth: int = 40
    eta: float = 0.5
    ista_max_iter: int = 10_000
    maxent_samples: int = 200
    methods: tuple = ("ista", "lista", "rlista")
    output_dir: str | None = None
    deterministic: bool = False  # zero out wall-clock columns in outputs

    def hash(self) -> str:
        return config_hash(self)


def build_kernel(config: ExperimentConfig) -> KernelMatrix:
    tg, fg = build_grids(config.beta, config.n_tau, config.omega_min,
                         config.omega_max, config.n_omega)
    return build_kernel_matrix(tg, fg, weighted=True)


def make_datasets(config: ExperimentConfig, kernel: KernelMatrix):
    """(train, test_single, test_multi) with disjoint seed streams.

    Training mixes 1-3 peaks; the single-peak test stratum is one peak near
    the origin; the multi-peak stratum has 2-3 peaks. All strata share the
    same width range so the peak count is the only thing that varies.
    """
    train_cfg = synthdata.SpectrumConfig(
        peak_count_range=(1, 3), center_range=(-4.0, 4.0), width_range=(0.2, 0.6),
        seed=config.seed, noise_sigma=config.noise_sigma)
    single_cfg = synthdata.SpectrumConfig(
        peak_count_range=(1, 1), center_range=(-2.0, 2.0), width_range=(0.2, 0.6),
        seed=config.seed + 1, noise_sigma=config.noise_sigma)
    multi_cfg = synthdata.SpectrumConfig(
        peak_count_range=(2, 3), center_range=(-4.0, 4.0), width_range=(0.2, 0.6),
        seed=config.seed + 2, noise_sigma=config.noise_sigma)
    return (
        synthdata.generate_dataset(config.train_size, train_cfg, kernel),
        synthdata.generate_dataset(config.test_single, single_cfg, kernel),
        synthdata.generate_dataset(config.test_multi, multi_cfg, kernel),
    )


def train_config(config: ExperimentConfig) -> unrolled_net.TrainConfig:
    return unrolled_net.TrainConfig(
        learning_rate=config.learning_rate, lr_decay=config.lr_decay,
        batch_size=config.batch_size, epochs=config.epochs, seed=config.seed)


def fcn_width_for_ratio(config: ExperimentConfig, n_hidden: int, ratio: float) -> int:
    """Smallest equal hidden width giving >= ratio x the depth-6 network's count."""
    nt, nw = config.n_tau, config.n_omega
    target = ratio * config.lista_depth * (nw * nw + nw * nt + 1)

    def count(w):
        sizes = [nt] + [w] * n_hidden + [nw]
        return sum((a + 1) * b for a, b in zip(sizes[:-1], sizes[1:]))

    lo, hi = 1, 1
    while count(hi) < target:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if count(mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _train_unrolled(config, kernel, variant, depth, train_ds, test_ds,
                    checkpoint: Path | None = None):
    if checkpoint is not None and checkpoint.exists():
        return unrolled_net.load_checkpoint(checkpoint, kernel)
    eta = config.eta if variant == unrolled_net.RLISTA else None
    params = unrolled_net.init_params(kernel, config.lam, variant, depth, eta)
    result = unrolled_net.train(
        params, train_ds.greens_noisy(), train_ds.spectra(), train_config(config),
        test_ds.greens_noisy(), test_ds.spectra())
    if checkpoint is not None:
        unrolled_net.save_checkpoint(
            result.params, checkpoint,
            extra_meta={"dataset_hash": train_ds.content_hash(),
                        "epochs": config.epochs, "seed": config.seed})
    return result.params


def _train_fcn(config, n_hidden, width, train_ds, test_ds,
               checkpoint: Path | None = None):
    if checkpoint is not None and checkpoint.exists():
        return unrolled_net.load_checkpoint(checkpoint)
    params = unrolled_net.init_fcn(config.n_tau, config.n_omega, width, n_hidden,
                                   seed=config.seed)
    result = unrolled_net.train(
        params, train_ds.greens_noisy(), train_ds.spectra(), train_config(config),
        test_ds.greens_noisy(), test_ds.spectra())
    if checkpoint is not None:
        unrolled_net.save_checkpoint(
            result.params, checkpoint,
            extra_meta={"dataset_hash": train_ds.content_hash(),
                        "epochs": config.epochs, "seed": config.seed})
    return result.params


def _eval_rows(method, params_or_solver, test_sets, param_count,
               deterministic=False) -> list[BenchmarkRow]:
    rows = []
    for stratum, ds in test_sets.items():
        G = ds.greens_noisy()
        A = ds.spectra()
        t0 = time.perf_counter()
        A_hat = params_or_solver(G)
        elapsed = 0.0 if deterministic else (time.perf_counter() - t0) / len(ds)
        errs = rse_batch(A_hat, A)
        rows.append(BenchmarkRow(
            method=method, parameter_count=param_count,
            mean_rse=float(errs.mean()), median_rse=float(np.median(errs)),
            runtime_per_sample=elapsed, stratum=stratum))
    return rows


def run_method_comparison(config: ExperimentConfig,
                          workdir: str | None = None) -> list[BenchmarkRow]:
    """Evaluate the configured methods on single- and multi-peak strata.

    A failing method yields a row with note='failed: ...' and NaN errors;
    the run continues.
    """
    kernel = build_kernel(config)
    train_ds, single_ds, multi_ds = make_datasets(config, kernel)
    test_sets = {"single": single_ds, "multi": multi_ds}
    workpath = Path(workdir) if workdir else None
    ista_cfg = prox_solver.IstaConfig(lam=config.lam, max_iter=config.ista_max_iter)
    rows: list[BenchmarkRow] = []

    def ckpt(name):
        return workpath / f"{name}.ckpt" if workpath else None

    for method in config.methods:
        try:
            if method == "ista":
                solver = lambda G: prox_solver.ista_solve_batch(kernel, G, ista_cfg)
                rows += _eval_rows("ista", solver, test_sets, 0,
                                   config.deterministic)
            elif method == "lista":
                params = _train_unrolled(config, kernel, unrolled_net.LISTA,
                                         config.lista_depth, train_ds, multi_ds,
                                         ckpt(f"lista{config.lista_depth}"))
                rows += _eval_rows(f"lista-{config.lista_depth}",
                                   lambda G: unrolled_net.predict(params, G),
                                   test_sets, unrolled_net.parameter_count(params),
                                   config.deterministic)
            elif method == "rlista":
                params = _train_unrolled(config, kernel, unrolled_net.RLISTA,
                                         config.rlista_depth, train_ds, multi_ds,
                                         ckpt(f"rlista{config.rlista_depth}"))
                rows += _eval_rows(f"rlista-{config.rlista_depth}",
                                   lambda G: unrolled_net.predict(params, G),
                                   test_sets, unrolled_net.parameter_count(params),
                                   config.deterministic)
            elif method in ("fcn2", "fcn3"):
                n_hidden = 1 if method == "fcn2" else 2
                ratio = 10.0 if method == "fcn2" else 7.0
                width = fcn_width_for_ratio(config, n_hidden, ratio)
                params = _train_fcn(config, n_hidden, width, train_ds, multi_ds,
                                    ckpt(f"{method}_w{width}"))
                rows += _eval_rows(f"{method}-w{width}",
                                   lambda G: unrolled_net.predict(params, G),
                                   test_sets, unrolled_net.parameter_count(params),
                                   config.deterministic)
            elif method == "maxent_flat":
                d = maxent.flat_default(kernel.freq_grid)

                def solver(G, d=d):
                    return np.stack([
                        maxent.select_alpha(g, kernel, config.noise_sigma, d)[1].spectrum
                        for g in G])
                limited = {k: _truncate(ds, config.maxent_samples)
                           for k, ds in test_sets.items()}
                rows += _eval_rows("maxent-flat", solver, limited, 0,
                                   config.deterministic)
            else:
                raise ValueError(f"unknown method {method!r}")
        except Exception as exc:  # keep the run alive; record the failure
            rows.append(BenchmarkRow(method=method, parameter_count=0,
                                     mean_rse=float("nan"), median_rse=float("nan"),
                                     runtime_per_sample=float("nan"),
                                     note=f"failed: {exc}"))
    _maybe_write(config, rows, "method_comparison.csv",
                 {"experiment": "method_comparison",
                  "dataset_hash_train": train_ds.content_hash()})
    return rows


def _truncate(ds: synthdata.Dataset, n: int) -> synthdata.Dataset:
    return synthdata.Dataset(ds.samples[:n], ds.config, ds.time_grid, ds.freq_grid)


def run_parameter_efficiency(config: ExperimentConfig,
                             workdir: str | None = None) -> list[BenchmarkRow]:
    """Parameter count vs multi-peak test RSE for all four architectures."""
    kernel = build_kernel(config)
    train_ds, _, multi_ds = make_datasets(config, kernel)
    workpath = Path(workdir) if workdir else None
    test_sets = {"multi": multi_ds}
    rows: list[BenchmarkRow] = []

    def ckpt(name):
        return workpath / f"{name}.ckpt" if workpath else None

    jobs = [
        ("lista", unrolled_net.LISTA, config.lista_depth),
        ("rlista", unrolled_net.RLISTA, config.rlista_depth),
        ("rlista", unrolled_net.RLISTA, config.deep_rlista_depth),
    ]
    for tag, variant, depth in jobs:
        try:
            params = _train_unrolled(config, kernel, variant, depth,
                                     train_ds, multi_ds, ckpt(f"{tag}{depth}"))
            rows += _eval_rows(f"{tag}-{depth}",
                               lambda G: unrolled_net.predict(params, G),
                               test_sets, unrolled_net.parameter_count(params),
                               config.deterministic)
        except Exception as exc:
            rows.append(BenchmarkRow(method=f"{tag}-{depth}", parameter_count=0,
                                     mean_rse=float("nan"), median_rse=float("nan"),
                                     runtime_per_sample=float("nan"),
                                     note=f"failed: {exc}"))
    for method, n_hidden, ratio in (("fcn2", 1, 10.0), ("fcn3", 2, 7.0)):
        try:
            width = fcn_width_for_ratio(config, n_hidden, ratio)
            params = _train_fcn(config, n_hidden, width, train_ds, multi_ds,
                                ckpt(f"{method}_w{width}"))
            rows += _eval_rows(f"{method}-w{width}",
                               lambda G: unrolled_net.predict(params, G),
                               test_sets, unrolled_net.parameter_count(params),
                               config.deterministic)
        except Exception as exc:
            rows.append(BenchmarkRow(method=method, parameter_count=0,
                                     mean_rse=float("nan"), median_rse=float("nan"),
                                     runtime_per_sample=float("nan"),
                                     note=f"failed: {exc}"))
    _maybe_write(config, rows, "parameter_efficiency.csv",
                 {"experiment": "parameter_efficiency",
                  "dataset_hash_train": train_ds.content_hash()})
    return rows


def run_neural_default(config: ExperimentConfig, workdir: str | None = None,
                       network_params=None) -> list[dict]:
    """Per-sample RSE of flat-default maxent, raw network, and neural-default
    maxent on the multi-peak stratum."""
    kernel = build_kernel(config)
    train_ds, _, multi_ds = make_datasets(config, kernel)
    workpath = Path(workdir) if workdir else None
    if network_params is None:
        ckpt = workpath / f"rlista{config.rlista_depth}.ckpt" if workpath else None
        network_params = _train_unrolled(config, kernel, unrolled_net.RLISTA,
                                         config.rlista_depth, train_ds, multi_ds, ckpt)
    d_flat = maxent.flat_default(kernel.freq_grid)
    rows = []
    n = min(config.maxent_samples, len(multi_ds))
    for i in range(n):
        s = multi_ds.samples[i]
        _, res_flat = maxent.select_alpha(s.greens_noisy, kernel,
                                          config.noise_sigma, d_flat)
        raw = unrolled_net.predict(network_params, s.greens_noisy)
        res_plus = maxent.rlista_plus(s.greens_noisy, kernel, network_params,
                                      config.noise_sigma)
        rows.append({
            "sample": i,
            "rse_flat": metrics.rse(res_flat.spectrum, s.spectrum),
            "rse_rlista": metrics.rse(raw, s.spectrum),
            "rse_rlista_plus": metrics.rse(res_plus.spectrum, s.spectrum),
        })
    _maybe_write(config, rows, "neural_default.csv",
                 {"experiment": "neural_default",
                  "dataset_hash_train": train_ds.content_hash()})
    return rows


def _maybe_write(config: ExperimentConfig, rows, filename: str, extra: dict) -> None:
    if config.output_dir is None:
        return
    meta = {"config_hash": config.hash(), **extra}
    meta.update({k: v for k, v in vars(config).items() if k != "methods"})
    meta["methods"] = " ".join(config.methods)
    out_rows = [vars(r) if isinstance(r, BenchmarkRow) else r for r in rows]
    write_table(Path(config.output_dir) / filename, out_rows, meta)


__all__ = [
    "ExperimentConfig",
    "build_kernel",
    "make_datasets",
    "fcn_width_for_ratio",
    "run_method_comparison",
    "run_parameter_efficiency",
    "run_neural_default",
]
