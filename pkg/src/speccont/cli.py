"""Command-line front end.

Subcommands: gen-data, train, infer, ista, maxent, benchmark, coherence,
export-weights. Every option can also be supplied from an INI config file
(``--config``) with one section per subcommand; explicit flags win over file
values. Exit codes: 0 success, 1 runtime/I-O error, 2 usage or validation
error. With a fixed ``--seed`` all outputs are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import __version__, benchmark, maxent, metrics, prox_solver, synthdata, unrolled_net
from .errors import ConfigError, DomainError, SpecContError
from .kernel import build_grids, build_kernel_matrix
from .tables import config_hash, file_hash, write_spectrum, write_table

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _kernel_from_args(args):
    tg, fg = build_grids(args.beta, args.n_tau, args.omega_min, args.omega_max,
                         args.n_omega)
    return build_kernel_matrix(tg, fg, weighted=True)


def _kernel_from_meta(meta: dict):
    tg, fg = build_grids(float(meta["beta"]), int(meta["n_tau"]),
                         float(meta["omega_min"]), float(meta["omega_max"]),
                         int(meta["n_omega"]))
    return build_kernel_matrix(tg, fg, weighted=True)


def _base_meta(args, inputs=()):
    meta = {"tool_version": __version__,
            "config_hash": config_hash({k: v for k, v in vars(args).items()
                                        if k not in ("func", "config")})}
    for p in inputs:
        meta[f"input_hash_{Path(p).name}"] = file_hash(p)
    return meta


def cmd_gen_data(args) -> int:
    cfg = synthdata.SpectrumConfig(
        peak_count_range=(args.peaks_min, args.peaks_max),
        center_range=(args.center_min, args.center_max),
        width_range=(args.width_min, args.width_max),
        seed=args.seed, noise_sigma=args.noise_sigma)
    kernel = _kernel_from_args(args)
    ds = synthdata.generate_dataset(args.n, cfg, kernel)
    synthdata.save_dataset(ds, args.out)
    manifest = _base_meta(args)
    manifest["dataset_hash"] = ds.content_hash()
    manifest["file_hash"] = file_hash(args.out)
    manifest["n_samples"] = len(ds)
    write_table(str(args.out) + ".manifest", [], manifest)
    return 0


def cmd_train(args) -> int:
    ds = synthdata.load_dataset(args.data)
    kernel = build_kernel_matrix(ds.time_grid, ds.freq_grid, weighted=True)
    tc = unrolled_net.TrainConfig(learning_rate=args.lr, lr_decay=args.lr_decay,
                                  batch_size=args.batch_size, epochs=args.epochs,
                                  seed=args.seed)
    if args.variant in (unrolled_net.LISTA, unrolled_net.RLISTA):
        eta = args.eta if args.variant == unrolled_net.RLISTA else None
        params = unrolled_net.init_params(kernel, args.lam, args.variant,
                                          args.depth, eta)
    else:
        n_hidden = 1 if args.variant == unrolled_net.FCN2 else 2
        params = unrolled_net.init_fcn(ds.time_grid.count, ds.freq_grid.count,
                                       args.width, n_hidden, seed=args.seed)
    n_test = max(1, len(ds) // 10)
    result = unrolled_net.train(
        params, ds.greens_noisy()[n_test:], ds.spectra()[n_test:], tc,
        ds.greens_noisy()[:n_test], ds.spectra()[:n_test])
    unrolled_net.save_checkpoint(result.params, args.out,
                                 extra_meta={"dataset_hash": ds.content_hash(),
                                             "epochs": args.epochs,
                                             "seed": args.seed})
    if not result.improved:
        print("warning: final test RSE did not improve on initialization",
              file=sys.stderr)
    curve_path = args.curve or str(args.out) + ".curve.csv"
    rows = [{"epoch": int(e), "train_loss": float(l), "test_rse": float(r)}
            for e, l, r in zip(result.epochs, result.train_loss, result.test_rse)]
    write_table(curve_path, rows, {**_base_meta(args, [args.data]),
                                   "init_test_rse": result.init_test_rse,
                                   "improved": result.improved})
    return 0


def cmd_infer(args) -> int:
    params = unrolled_net.load_checkpoint(args.checkpoint)
    ds = synthdata.load_dataset(args.data)
    if ds.freq_grid.count != getattr(params, "n_omega", ds.freq_grid.count):
        raise ConfigError("dataset grids do not match checkpoint")
    G = ds.greens_noisy()
    if args.index is not None:
        G = G[args.index:args.index + 1]
    A_hat = np.atleast_2d(unrolled_net.predict(params, G))
    meta = _base_meta(args, [args.checkpoint, args.data])
    rows = [{"sample": i, **{f"a_{j}": A_hat[i, j] for j in range(A_hat.shape[1])}}
            for i in range(A_hat.shape[0])]
    write_table(args.out, rows, meta)
    return 0


def cmd_ista(args) -> int:
    ds = synthdata.load_dataset(args.data)
    kernel = build_kernel_matrix(ds.time_grid, ds.freq_grid, weighted=True)
    cfg = prox_solver.IstaConfig(lam=args.lam, max_iter=args.max_iter, tol=args.tol)
    sample = ds.samples[args.index]
    report = prox_solver.ista_solve(kernel, sample.greens_noisy, cfg)
    meta = _base_meta(args, [args.data])
    meta.update(iterations=report.iterations, converged=report.converged,
                lam=report.lam, step=report.step,
                final_objective=float(report.objective_trace[-1]))
    write_spectrum(args.out, ds.freq_grid.points, report.solution, meta)
    trace_rows = [{"iteration": i, "objective": float(v)}
                  for i, v in enumerate(report.objective_trace)]
    write_table(str(args.out) + ".trace.csv", trace_rows, meta)
    return 0


def cmd_maxent(args) -> int:
    ds = synthdata.load_dataset(args.data)
    kernel = build_kernel_matrix(ds.time_grid, ds.freq_grid, weighted=True)
    sample = ds.samples[args.index]
    sigma = args.sigma if args.sigma is not None else max(ds.config.noise_sigma, 1e-8)
    inputs = [args.data]
    if args.default == "neural":
        if not args.checkpoint:
            raise ConfigError("--checkpoint is required with --default neural")
        params = unrolled_net.load_checkpoint(args.checkpoint, kernel)
        inputs.append(args.checkpoint)
        res = maxent.rlista_plus(sample.greens_noisy, kernel, params, sigma)
    else:
        d = maxent.flat_default(kernel.freq_grid)
        if args.alpha == "auto":
            _, res = maxent.select_alpha(sample.greens_noisy, kernel, sigma, d)
        else:
            problem = maxent.MaxEntProblem(sample.greens_noisy, kernel, sigma,
                                           float(args.alpha), d)
            res = maxent.maxent_solve(problem)
    meta = _base_meta(args, inputs)
    meta.update(alpha=res.alpha_used, chi2=res.chi2, entropy=res.entropy,
                converged=res.converged, sigma=sigma)
    write_spectrum(args.out, kernel.freq_grid.points, res.spectrum, meta)
    return 0


def cmd_benchmark(args) -> int:
    overrides = {}
    for key in ("train_size", "test_single", "test_multi", "epochs", "seed",
                "maxent_samples"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    config = benchmark.ExperimentConfig(output_dir=args.outdir,
                                        deterministic=args.deterministic,
                                        **overrides)
    workdir = args.workdir or args.outdir
    Path(args.outdir).mkdir(parents=True, exist_ok=True)
    if args.experiment == "methods":
        benchmark.run_method_comparison(config, workdir)
    elif args.experiment == "efficiency":
        benchmark.run_parameter_efficiency(config, workdir)
    elif args.experiment == "neural-default":
        benchmark.run_neural_default(config, workdir)
    else:
        raise ConfigError(f"unknown experiment {args.experiment!r}")
    manifest = _base_meta(args)
    manifest["experiment"] = args.experiment
    manifest["config_hash_resolved"] = config.hash()
    write_table(Path(args.outdir) / "manifest.csv", [], manifest)
    return 0


def cmd_coherence(args) -> int:
    params = unrolled_net.load_checkpoint(args.checkpoint)
    kernel = _kernel_from_meta(params.meta)
    rows = metrics.coherence_profile(params, kernel)
    write_table(args.out, rows, {**_base_meta(args, [args.checkpoint]),
                                 "coherence_input": "W_t minus identity; W_e transposed"})
    return 0


def cmd_export_weights(args) -> int:
    from .tables import write_matrix

    if args.checkpoint:
        params = unrolled_net.load_checkpoint(args.checkpoint)
        W_t, W_e = params.W_t[args.layer], params.W_e[args.layer]
        variant = params.variant
        inputs = [args.checkpoint]
    else:
        ds = synthdata.load_dataset(args.data)
        kernel = build_kernel_matrix(ds.time_grid, ds.freq_grid, weighted=True)
        W_t, W_e = metrics.ista_reference_matrices(kernel)
        variant = "ista"
        inputs = [args.data]
    export_t, export_e, meta = metrics.normalize_weight_export(W_t, W_e, variant)
    base = {**_base_meta(args, inputs), **meta, "layer": args.layer}
    write_matrix(f"{args.out_prefix}_Wt.csv", export_t, base)
    write_matrix(f"{args.out_prefix}_We.csv", export_e, base)
    return 0


def _add_grid_flags(p):
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--n-tau", type=int, default=64)
    p.add_argument("--omega-min", type=float, default=-8.0)
    p.add_argument("--omega-max", type=float, default=8.0)
    p.add_argument("--n-omega", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speccont",
        description="Analytic continuation: classical, learned, and maximum-entropy solvers")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="INI file with one section per subcommand")
    parser.add_argument("--deterministic", action="store_true",
                        help="force fully serial execution (the default; accepted for manifests)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset")
    _add_grid_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=1e-3)
    p.add_argument("--peaks-min", type=int, default=1)
    p.add_argument("--peaks-max", type=int, default=4)
    p.add_argument("--center-min", type=float, default=-5.0)
    p.add_argument("--center-max", type=float, default=5.0)
    p.add_argument("--width-min", type=float, default=0.1)
    p.add_argument("--width-max", type=float, default=1.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train an unrolled or dense network")
    p.add_argument("--data", required=True)
    p.add_argument("--variant", choices=["lista", "rlista", "fcn2", "fcn3"],
                   required=True)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--lam", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--lr-decay", type=float, default=1.0,
                   help="multiplicative per-epoch learning-rate decay")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curve", help="learning-curve CSV (default: <out>.curve.csv)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="run a trained network on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("ista", help="classical proximal-gradient solve")
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--lam", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ista)

    p = sub.add_parser("maxent", help="maximum-entropy solve")
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--default", choices=["flat", "neural"], default="flat")
    p.add_argument("--checkpoint")
    p.add_argument("--alpha", default="auto", help="positive float or 'auto'")
    p.add_argument("--sigma", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_maxent)

    p = sub.add_parser("benchmark", help="run an end-to-end experiment")
    p.add_argument("--experiment",
                   choices=["methods", "efficiency", "neural-default"],
                   default="methods")
    p.add_argument("--outdir", required=True)
    p.add_argument("--workdir", help="checkpoint cache (default: outdir)")
    p.add_argument("--train-size", type=int, dest="train_size")
    p.add_argument("--test-single", type=int, dest="test_single")
    p.add_argument("--test-multi", type=int, dest="test_multi")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--maxent-samples", type=int, dest="maxent_samples")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("coherence", help="per-layer average coherence of a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("export-weights", help="normalized first-layer weight matrices")
    p.add_argument("--checkpoint")
    p.add_argument("--data", help="dataset defining the kernel (fixed-weight export)")
    p.add_argument("--layer", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_export_weights)

    return parser


def _apply_config_file(parser, argv):
    """Use INI values as defaults; explicit flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    ini = configparser.ConfigParser()
    if not ini.read(path):
        raise ConfigError(f"cannot read config file {path}")
    command = next((a for a in argv if not a.startswith("-") and a != path), None)
    if command and ini.has_section(command):
        defaults = {k.replace("-", "_"): v for k, v in ini.items(command)}
        for action in parser._subparsers._group_actions[0].choices[command]._actions:
            if action.dest in defaults:
                raw = defaults[action.dest]
                if action.type:
                    raw = action.type(raw)
                elif isinstance(action, argparse._StoreTrueAction):
                    raw = raw.lower() in ("1", "true", "yes")
                action.default = raw
                action.required = False
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except SpecContError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
