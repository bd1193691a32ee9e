"""Synthetic spectra and Green's functions for training and benchmarking.

Spectra are Gaussian mixtures evaluated on the frequency grid, normalized so
sum_j a_j * d_omega_j = 1. Green's functions come from the weighted forward
map, with optional i.i.d. Gaussian noise.

Reproducibility: every sample i is generated from its own Philox stream keyed
by SeedSequence(seed, spawn_key=(i,)). Philox is a counter-based generator
with fixed published constants, so datasets are bit-identical across runs and
platforms, and the first k samples of a size-n dataset equal a size-k dataset
with the same seed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .container import read_container, write_container
from .errors import ConfigError, FormatError
from .kernel import FrequencyGrid, KernelMatrix, TimeGrid, build_grids, forward_map

MAGIC = "SPECCONT"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class SpectrumConfig:
    peak_count_range: tuple[int, int] = (1, 4)
    center_range: tuple[float, float] = (-5.0, 5.0)
    width_range: tuple[float, float] = (0.1, 1.5)
    seed: int = 0
    noise_sigma: float = 1e-3

    def __post_init__(self):
        lo, hi = self.peak_count_range
        if not (1 <= lo <= hi <= 8):
            raise ConfigError(f"peak_count_range must lie within [1, 8], got {self.peak_count_range}")
        if self.width_range[0] <= 0 or self.width_range[0] > self.width_range[1]:
            raise ConfigError(f"invalid width_range {self.width_range}")
        if self.center_range[0] > self.center_range[1]:
            raise ConfigError(f"invalid center_range {self.center_range}")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")

    def validate_against(self, freq_grid: FrequencyGrid) -> None:
        # centers must stay at least 2x the max width away from the grid edges
        margin = 2.0 * self.width_range[1]
        lo, hi = freq_grid.points[0], freq_grid.points[-1]
        if self.center_range[0] < lo + margin or self.center_range[1] > hi - margin:
            raise ConfigError(
                f"center_range {self.center_range} too close to grid edges "
                f"[{lo}, {hi}] for max width {self.width_range[1]}"
            )


@dataclass(frozen=True)
class SpectrumSample:
    spectrum: np.ndarray        # ground truth a*, length N_omega
    greens_clean: np.ndarray    # K a*, length N_tau
    greens_noisy: np.ndarray
    peak_count: int


@dataclass
class Dataset:
    samples: list[SpectrumSample]
    config: SpectrumConfig
    time_grid: TimeGrid
    freq_grid: FrequencyGrid

    def __len__(self) -> int:
        return len(self.samples)

    def spectra(self) -> np.ndarray:
        return np.stack([s.spectrum for s in self.samples])

    def greens_clean(self) -> np.ndarray:
        return np.stack([s.greens_clean for s in self.samples])

    def greens_noisy(self) -> np.ndarray:
        return np.stack([s.greens_noisy for s in self.samples])

    def peak_counts(self) -> np.ndarray:
        return np.array([s.peak_count for s in self.samples], dtype=np.int64)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for arr in (self.spectra(), self.greens_clean(), self.greens_noisy(), self.peak_counts()):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Per-sample Philox stream; parallel and serial generation agree."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _draw_mixture(rng, config, freq_grid):
    # draw order (k, centers, widths, weights) is fixed; changing it would
    # silently invalidate every seeded dataset
    lo, hi = config.peak_count_range
    k = int(rng.integers(lo, hi + 1))
    centers = rng.uniform(*config.center_range, size=k)
    widths = rng.uniform(*config.width_range, size=k)
    weights = rng.uniform(0.1, 1.0, size=k)
    weights /= weights.sum()
    omega = freq_grid.points
    a = np.zeros_like(omega)
    for c, w, p in zip(centers, widths, weights):
        a += p * np.exp(-0.5 * ((omega - c) / w) ** 2) / (w * np.sqrt(2.0 * np.pi))
    a /= a @ freq_grid.weights
    return a, k


def sample_spectrum(rng: np.random.Generator, config: SpectrumConfig,
                    freq_grid: FrequencyGrid) -> np.ndarray:
    """Draw one Gaussian-mixture spectrum, nonnegative and unit-normalized."""
    config.validate_against(freq_grid)
    return _draw_mixture(rng, config, freq_grid)[0]


def make_sample(spectrum: np.ndarray, kernel: KernelMatrix, noise_sigma: float,
                rng: np.random.Generator, peak_count: int = 0) -> SpectrumSample:
    if noise_sigma < 0:
        raise ConfigError("noise_sigma must be nonnegative")
    clean = forward_map(kernel, spectrum)
    noisy = clean + noise_sigma * rng.standard_normal(clean.shape) if noise_sigma > 0 else clean.copy()
    return SpectrumSample(np.asarray(spectrum, dtype=float), clean, noisy, peak_count)


def generate_dataset(n: int, config: SpectrumConfig, kernel: KernelMatrix) -> Dataset:
    """n samples from independent per-sample streams of ``config.seed``."""
    if n < 1:
        raise ConfigError("need at least one sample")
    config.validate_against(kernel.freq_grid)
    samples = []
    for i in range(n):
        rng = sample_rng(config.seed, i)
        a, k = _draw_mixture(rng, config, kernel.freq_grid)
        samples.append(make_sample(a, kernel, config.noise_sigma, rng, peak_count=k))
    return Dataset(samples, config, kernel.time_grid, kernel.freq_grid)


def save_dataset(dataset: Dataset, path) -> None:
    cfg = dataset.config
    meta = {
        "beta": repr(float(dataset.time_grid.beta)),
        "n_tau": dataset.time_grid.count,
        "omega_min": repr(float(dataset.freq_grid.points[0])),
        "omega_max": repr(float(dataset.freq_grid.points[-1])),
        "n_omega": dataset.freq_grid.count,
        "peak_count_min": cfg.peak_count_range[0],
        "peak_count_max": cfg.peak_count_range[1],
        "center_min": repr(cfg.center_range[0]),
        "center_max": repr(cfg.center_range[1]),
        "width_min": repr(cfg.width_range[0]),
        "width_max": repr(cfg.width_range[1]),
        "seed": cfg.seed,
        "noise_sigma": repr(cfg.noise_sigma),
        "n_samples": len(dataset),
    }
    arrays = {
        "spectra": dataset.spectra(),
        "greens_clean": dataset.greens_clean(),
        "greens_noisy": dataset.greens_noisy(),
        "peak_counts": dataset.peak_counts(),
    }
    write_container(path, MAGIC, FORMAT_VERSION, meta, arrays)


def load_dataset(path) -> Dataset:
    meta, arrays = read_container(path, MAGIC, FORMAT_VERSION)
    try:
        beta = float(meta["beta"])
        n_tau = int(meta["n_tau"])
        omega_min = float(meta["omega_min"])
        omega_max = float(meta["omega_max"])
        n_omega = int(meta["n_omega"])
        config = SpectrumConfig(
            peak_count_range=(int(meta["peak_count_min"]), int(meta["peak_count_max"])),
            center_range=(float(meta["center_min"]), float(meta["center_max"])),
            width_range=(float(meta["width_min"]), float(meta["width_max"])),
            seed=int(meta["seed"]),
            noise_sigma=float(meta["noise_sigma"]),
        )
        spectra = arrays["spectra"]
        clean = arrays["greens_clean"]
        noisy = arrays["greens_noisy"]
        counts = arrays["peak_counts"]
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc
    tg, fg = build_grids(beta, n_tau, omega_min, omega_max, n_omega)
    if spectra.shape != (int(meta["n_samples"]), n_omega) or clean.shape[1] != n_tau:
        raise FormatError(f"{path}: array shapes disagree with grid metadata")
    samples = [
        SpectrumSample(spectra[i], clean[i], noisy[i], int(counts[i]))
        for i in range(spectra.shape[0])
    ]
    return Dataset(samples, config, tg, fg)


__all__ = [
    "SpectrumConfig",
    "SpectrumSample",
    "Dataset",
    "sample_rng",
    "sample_spectrum",
    "make_sample",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]
