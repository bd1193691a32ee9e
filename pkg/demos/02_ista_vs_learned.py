"""Classical ISTA against a small trained unrolled network.

Desk-scale version of the method comparison: a few hundred training samples
and a shallow network are enough to see the learned update overtake thousands
of classical iterations on sparse multi-peak spectra.
"""

import time

from speccont.kernel import default_kernel
from speccont.metrics import rse_batch
from speccont.prox_solver import IstaConfig, ista_solve_batch
from speccont.synthdata import SpectrumConfig, generate_dataset
from speccont.unrolled_net import LISTA, TrainConfig, init_params, predict, train


def main():
    kernel = default_kernel()
    train_cfg = SpectrumConfig(peak_count_range=(1, 3), center_range=(-4.0, 4.0),
                               width_range=(0.2, 0.6), seed=0, noise_sigma=1e-3)
    test_cfg = SpectrumConfig(peak_count_range=(2, 3), center_range=(-4.0, 4.0),
                              width_range=(0.2, 0.6), seed=2, noise_sigma=1e-3)
    train_ds = generate_dataset(8000, train_cfg, kernel)
    test_ds = generate_dataset(100, test_cfg, kernel)

    t0 = time.perf_counter()
    A_ista = ista_solve_batch(kernel, test_ds.greens_noisy(),
                              IstaConfig(lam=1e-3, max_iter=10_000))
    t_ista = time.perf_counter() - t0
    rse_ista = rse_batch(A_ista, test_ds.spectra())
    print(f"ISTA (10000 iterations): mean RSE {rse_ista.mean():.3f}  "
          f"[{t_ista / len(test_ds) * 1e3:.1f} ms/sample]")

    params = init_params(kernel, 1e-3, LISTA, depth=6)
    rse_init = rse_batch(predict(params, test_ds.greens_noisy()),
                         test_ds.spectra())
    print(f"untrained depth-6 net (= 6 ISTA steps): mean RSE {rse_init.mean():.3f}")

    t0 = time.perf_counter()
    result = train(params, train_ds.greens_noisy(), train_ds.spectra(),
                   TrainConfig(learning_rate=2e-3, lr_decay=0.985, epochs=60),
                   test_ds.greens_noisy(), test_ds.spectra())
    t_train = time.perf_counter() - t0
    trained = result.params
    t0 = time.perf_counter()
    A_net = predict(trained, test_ds.greens_noisy())
    t_net = time.perf_counter() - t0
    rse_net = rse_batch(A_net, test_ds.spectra())
    print(f"trained depth-6 net: mean RSE {rse_net.mean():.3f}  "
          f"[{t_net / len(test_ds) * 1e3:.2f} ms/sample, "
          f"trained in {t_train:.0f}s]")
    print(f"\nsix learned layers vs 10000 classical iterations: "
          f"{rse_ista.mean() / rse_net.mean():.1f}x lower error, "
          f"{t_ista / max(t_net, 1e-9):.0f}x faster inference")
    print("(the benchmark subcommand runs the full-size version of this)")


if __name__ == "__main__":
    main()
