import numpy as np
import pytest

from speccont.errors import ConfigError, FormatError, VersionError
from speccont.kernel import forward_map
from speccont.synthdata import (
    SpectrumConfig,
    generate_dataset,
    load_dataset,
    make_sample,
    sample_rng,
    sample_spectrum,
    save_dataset,
)


def small_config(**kw):
    base = dict(peak_count_range=(1, 3), center_range=(-4.0, 4.0),
                width_range=(0.2, 0.6), seed=0, noise_sigma=1e-3)
    base.update(kw)
    return SpectrumConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        SpectrumConfig(peak_count_range=(0, 3))
    with pytest.raises(ConfigError):
        SpectrumConfig(width_range=(0.0, 1.0))
    with pytest.raises(ConfigError):
        SpectrumConfig(center_range=(2.0, -2.0))
    with pytest.raises(ConfigError):
        SpectrumConfig(noise_sigma=-1e-3)


def test_center_range_must_clear_grid_edges(kernel):
    cfg = SpectrumConfig(center_range=(-7.9, 7.9), width_range=(0.2, 0.6))
    with pytest.raises(ConfigError):
        cfg.validate_against(kernel.freq_grid)


def test_single_peak_is_unimodal_at_center(kernel):
    cfg = small_config(peak_count_range=(1, 1), center_range=(0.0, 0.0),
                       width_range=(0.5, 0.5))
    a = sample_spectrum(sample_rng(0, 0), cfg, kernel.freq_grid)
    nearest = np.argmin(np.abs(kernel.freq_grid.points))
    assert np.argmax(a) == nearest


def test_spectra_nonnegative_and_normalized(kernel):
    cfg = small_config()
    for i in range(20):
        a = sample_spectrum(sample_rng(3, i), cfg, kernel.freq_grid)
        assert np.all(a >= 0)
        assert a @ kernel.freq_grid.weights == pytest.approx(1.0, abs=1e-10)


def test_sample_spectrum_deterministic(kernel):
    cfg = small_config(seed=42)
    a1 = sample_spectrum(sample_rng(42, 0), cfg, kernel.freq_grid)
    a2 = sample_spectrum(sample_rng(42, 0), cfg, kernel.freq_grid)
    assert a1.tobytes() == a2.tobytes()


def test_make_sample_noise_free(kernel):
    cfg = small_config()
    a = sample_spectrum(sample_rng(0, 0), cfg, kernel.freq_grid)
    s = make_sample(a, kernel, 0.0, sample_rng(0, 0))
    assert np.array_equal(s.greens_noisy, s.greens_clean)
    assert np.max(np.abs(s.greens_clean - forward_map(kernel, a))) <= 1e-12


def test_make_sample_noise_statistics(kernel):
    # empirical noise std within 5% of the configured sigma
    sigma = 1e-4
    cfg = small_config(noise_sigma=sigma)
    diffs = []
    for i in range(200):
        rng = sample_rng(7, i)
        a = sample_spectrum(rng, cfg, kernel.freq_grid)
        s = make_sample(a, kernel, sigma, rng)
        diffs.append(s.greens_noisy - s.greens_clean)
    measured = np.std(np.concatenate(diffs))
    assert abs(measured - sigma) / sigma < 0.05


def test_greens_linearity_two_spikes(kernel):
    a = np.zeros(64)
    a[10], a[40] = 2.0, 3.0
    s = make_sample(a, kernel, 0.0, sample_rng(0, 0))
    expect = 2.0 * kernel.entries[:, 10] + 3.0 * kernel.entries[:, 40]
    assert np.allclose(s.greens_clean, expect, rtol=1e-14)


def test_generate_dataset_deterministic_hash(kernel):
    cfg = small_config(seed=11)
    d1 = generate_dataset(50, cfg, kernel)
    d2 = generate_dataset(50, cfg, kernel)
    assert d1.content_hash() == d2.content_hash()


def test_stream_prefix_property(kernel):
    cfg = small_config(seed=5)
    small = generate_dataset(10, cfg, kernel)
    big = generate_dataset(200, cfg, kernel)
    for i in range(10):
        assert small.samples[i].spectrum.tobytes() == big.samples[i].spectrum.tobytes()
        assert small.samples[i].greens_noisy.tobytes() == big.samples[i].greens_noisy.tobytes()


def test_peak_counts_within_range(kernel):
    ds = generate_dataset(100, small_config(peak_count_range=(2, 3)), kernel)
    counts = ds.peak_counts()
    assert counts.min() >= 2 and counts.max() <= 3


def test_dataset_round_trip_bitwise(tmp_path, kernel):
    ds = generate_dataset(3, small_config(seed=9), kernel)
    path = tmp_path / "d.spec"
    save_dataset(ds, path)
    back = load_dataset(path)
    assert back.config == ds.config
    assert back.content_hash() == ds.content_hash()
    assert np.array_equal(back.time_grid.points, ds.time_grid.points)
    assert np.array_equal(back.freq_grid.points, ds.freq_grid.points)


def test_load_rejects_truncation_and_version(tmp_path, kernel):
    ds = generate_dataset(2, small_config(), kernel)
    path = tmp_path / "d.spec"
    save_dataset(ds, path)
    data = path.read_bytes()
    path.write_bytes(data[:-32])
    with pytest.raises(FormatError):
        load_dataset(path)
    bad = data.replace(b"version=1", b"version=9", 1)
    path.write_bytes(bad)
    with pytest.raises(VersionError) as exc:
        load_dataset(path)
    assert "9" in str(exc.value) and "1" in str(exc.value)
