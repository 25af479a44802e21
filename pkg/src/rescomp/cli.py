"""Command-line interface.

Subcommands cover the whole workflow: synthesize calibration data, train
a network, prune it, fit the Fourier baseline, evaluate a model against a
calibration file, correct angles (one-shot or streaming), and run the
end-to-end experiment.  Exit status is 0 on success; on failure the
process prints `ErrorName: detail` on stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import caldata, fourier, network, optim, pipeline, prune, simgen
from .errors import RescompError


def _training_config(args) -> optim.TrainingConfig:
    return optim.TrainingConfig(
        max_iterations=args.max_iterations,
        learning_rate=args.learning_rate,
        lm_lambda0=args.lm_lambda0,
        lm_factor=args.lm_factor,
        stall_window=args.stall_window,
        stall_tol=args.stall_tol,
        seed=args.seed,
    )


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hidden", type=int, default=80, help="hidden-layer width (default 80)")
    p.add_argument("--seed", type=int, default=42, help="init seed (default 42)")
    p.add_argument("--max-iterations", type=int, default=10000)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--lm-lambda0", type=float, default=1e-3)
    p.add_argument("--lm-factor", type=float, default=10.0)
    p.add_argument("--stall-window", type=int, default=200)
    p.add_argument("--stall-tol", type=float, default=1e-9)
    p.add_argument("--norm-lo", type=float, default=-6.0,
                   help="lower error bound mapped to 0.1 (arc-min)")
    p.add_argument("--norm-hi", type=float, default=6.0,
                   help="upper error bound mapped to 0.9 (arc-min)")


def _cmd_simulate(args) -> int:
    spec = simgen.spec_from_json(args.spec)
    cal = simgen.synthesize(
        spec,
        grid_step_deg=args.step,
        grid_offset_deg=args.offset,
        encoder_id=args.encoder_id,
        epoch=args.epoch,
        quantize=not args.no_quantize,
    )
    caldata.save_calibration(args.out, cal)
    print(f"wrote {len(cal)} samples to {args.out}")
    return 0


def _train_network(args):
    cal = caldata.load_calibration(args.data, encoder_id=args.encoder_id)
    profile = caldata.error_profile(cal)
    net0 = network.init_network(
        network.NetworkShape(1, args.hidden, 1), args.seed, (args.norm_lo, args.norm_hi)
    )
    data = network.dataset_from_profile(profile, net0)
    cfg = _training_config(args)
    train_fn = optim.train_lm if args.optimizer == "lm" else optim.train_backprop
    return cal, data, cfg, train_fn, net0


def _cmd_train(args) -> int:
    cal, data, cfg, train_fn, net0 = _train_network(args)
    trained, history = train_fn(net0, data, cfg)
    model = pipeline.CompensationModel(pipeline.KIND_ANN, cal.encoder_id, trained)
    pipeline.save_model(args.out, model)
    if args.history:
        pipeline.write_history_csv(args.history, history)
    print(
        f"trained 1:{args.hidden}:1 with {args.optimizer}: "
        f"{history.iterations_run} iterations ({history.stop_reason.value}), "
        f"final mse {history.mse_per_iteration[-1]:.6e}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_prune(args) -> int:
    cal, data, cfg, train_fn, _net0 = _train_network(args)
    pruned_net, report = prune.prune_and_retrain(
        data, args.hidden, cfg,
        rel_tol=args.rel_tol,
        norm_bounds=(args.norm_lo, args.norm_hi),
        train_fn=train_fn,
    )
    model = pipeline.CompensationModel(pipeline.KIND_ANN, cal.encoder_id, pruned_net)
    pipeline.save_model(args.out, model)
    if args.report:
        doc = {
            "initial_hidden": report.initial_hidden,
            "pruned_hidden": report.pruned_hidden,
            "mse_initial": report.mse_initial,
            "mse_pruned": report.mse_pruned,
            "spectrum_initial": list(report.spectrum_initial),
            "spectrum_pruned": list(report.spectrum_pruned),
        }
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    print(f"pruned hidden layer {report.initial_hidden} -> {report.pruned_hidden}")
    print(f"wrote {args.out}")
    return 0


def _cmd_fourier(args) -> int:
    cal = caldata.load_calibration(args.data, encoder_id=args.encoder_id)
    profile = caldata.error_profile(cal)
    spectrum = fourier.harmonic_spectrum(profile)
    orders = fourier.select_top(spectrum, min(args.top, len(spectrum)))
    model = fourier.fit_fourier(profile, orders)
    pipeline.save_model(
        args.out, pipeline.CompensationModel(pipeline.KIND_FOURIER, cal.encoder_id, model)
    )
    if args.spectrum:
        with open(args.spectrum, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("order,amplitude_arcmin\n")
            for e in spectrum.entries:
                fh.write(f"{e.order},{e.amplitude_arcmin!r}\n")
    print(f"fit orders {orders}")
    print(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    model = pipeline.load_model(args.model)
    cal = caldata.load_calibration(args.data)
    report = pipeline.evaluate(model, cal)
    if args.report:
        doc = {
            "model_kind": model.kind,
            "encoder_id": model.encoder_id,
            "pre": pipeline.stats_doc(report.pre_stats),
            "post": pipeline.stats_doc(report.post_stats),
            "max_abs_residual_arcmin": report.max_abs_residual_arcmin,
        }
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if args.residuals:
        pipeline.write_residuals_csv(args.residuals, report)
    pre, post = report.pre_stats, report.post_stats
    print(f"pre  compensation: MAE {pre.mae_arcmin:.4f}'  RMS {pre.rms_arcmin:.4f}'")
    print(f"post compensation: MAE {post.mae_arcmin:.4f}'  RMS {post.rms_arcmin:.4f}'  "
          f"max |residual| {report.max_abs_residual_arcmin:.4f}'")
    return 0


def _cmd_correct(args) -> int:
    model = pipeline.load_model(args.model)
    if args.angle is not None:
        print(f"{pipeline.correct(model, args.angle):.6f}")
        return 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        print(f"{pipeline.correct(model, float(line)):.6f}")
    return 0


def _cmd_run_experiment(args) -> int:
    if args.spec:
        spec = simgen.spec_from_json(args.spec)
        cal = simgen.synthesize(
            spec, grid_step_deg=args.step, grid_offset_deg=args.offset,
            encoder_id=args.encoder_id,
        )
    else:
        cal = caldata.load_calibration(args.csv, encoder_id=args.encoder_id)
    cfg = pipeline.ExperimentConfig(
        hidden=args.hidden,
        optimizer=args.optimizer,
        top_orders=args.top,
        prune=args.prune,
        prune_rel_tol=args.rel_tol,
        norm_bounds=(args.norm_lo, args.norm_hi),
        training=_training_config(args),
    )
    result = pipeline.run_experiment(cal, args.outdir, cfg)
    pre = result.pre_full_stats
    ann = result.ann_report.post_stats
    fou = result.fourier_report.post_stats
    print(f"pre compensation : MAE {pre.mae_arcmin:.4f}'  RMS {pre.rms_arcmin:.4f}'")
    print(f"post ann         : MAE {ann.mae_arcmin:.4f}'  RMS {ann.rms_arcmin:.4f}'  "
          f"max |residual| {result.ann_report.max_abs_residual_arcmin:.4f}'")
    print(f"post fourier     : MAE {fou.mae_arcmin:.4f}'  RMS {fou.rms_arcmin:.4f}'  "
          f"max |residual| {result.fourier_report.max_abs_residual_arcmin:.4f}'")
    if result.prune_report is not None:
        print(f"pruned hidden    : {result.prune_report.initial_hidden} -> "
              f"{result.prune_report.pruned_hidden}")
    print(f"wrote {len(result.files)} files to {args.outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rescomp",
        description="Encoder error-profile learning and compensation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic calibration data")
    p.add_argument("--spec", required=True, help="harmonic spec JSON file")
    p.add_argument("--step", type=float, default=2.0, help="grid step in degrees")
    p.add_argument("--offset", type=float, default=0.0, help="grid offset in degrees")
    p.add_argument("--out", required=True, help="output calibration CSV")
    p.add_argument("--encoder-id", default="synthetic")
    p.add_argument("--epoch", default="synthetic")
    p.add_argument("--no-quantize", action="store_true",
                   help="skip 16-bit quantization of encoder angles")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="train a compensation network")
    p.add_argument("--data", required=True, help="training calibration CSV")
    p.add_argument("--optimizer", choices=("lm", "backprop"), default="lm")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--history", help="optional convergence CSV (iteration,mse)")
    p.add_argument("--encoder-id", default="unknown")
    _add_training_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("prune", help="train, estimate redundancy, retrain smaller")
    p.add_argument("--data", required=True, help="training calibration CSV")
    p.add_argument("--optimizer", choices=("lm", "backprop"), default="lm")
    p.add_argument("--rel-tol", type=float, default=prune.DEFAULT_RANK_REL_TOL,
                   help="singular-value threshold relative to the largest")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--report", help="optional prune report JSON")
    p.add_argument("--encoder-id", default="unknown")
    _add_training_flags(p)
    p.set_defaults(func=_cmd_prune)

    p = sub.add_parser("fourier", help="fit the Fourier-series baseline")
    p.add_argument("--data", required=True, help="training calibration CSV")
    p.add_argument("--top", type=int, default=10, help="number of harmonics kept")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--spectrum", help="optional spectrum CSV (order,amplitude)")
    p.add_argument("--encoder-id", default="unknown")
    p.set_defaults(func=_cmd_fourier)

    p = sub.add_parser("evaluate", help="evaluate a model against calibration data")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--data", required=True, help="test calibration CSV")
    p.add_argument("--report", help="optional report JSON")
    p.add_argument("--residuals", help="optional residual table CSV")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("correct", help="apply a model to encoder angles")
    p.add_argument("--model", required=True, help="model JSON")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--angle", type=float, help="one encoder angle in degrees")
    g.add_argument("--stdin", action="store_true",
                   help="read angles line by line, write corrected angles")
    p.set_defaults(func=_cmd_correct)

    p = sub.add_parser("run-experiment", help="full pipeline incl. evaluation bundle")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="harmonic spec JSON (synthetic run)")
    src.add_argument("--csv", help="full calibration CSV on a 1-degree grid")
    p.add_argument("--step", type=float, default=1.0,
                   help="synthesis grid step (synthetic runs; default 1)")
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--outdir", required=True, help="report bundle directory")
    p.add_argument("--optimizer", choices=("lm", "backprop"), default="lm")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--prune", action="store_true", help="prune and retrain the network")
    p.add_argument("--rel-tol", type=float, default=prune.DEFAULT_RANK_REL_TOL)
    p.add_argument("--encoder-id", default="unknown")
    _add_training_flags(p)
    p.set_defaults(func=_cmd_run_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RescompError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
