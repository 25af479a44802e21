"""Model persistence, angle correction, evaluation and experiment orchestration.

A compensation model (trained network or fitted Fourier series) is stored
as a versioned JSON weight file.  At run time the model predicts the
systematic error at a measured encoder angle and the corrected angle is

    corrected = measured - predicted_error / 60    (wrapped into [0, 360))

`run_experiment` drives the whole chain on one calibration set: partition
into even/odd grids, train the network, fit the Fourier baseline, evaluate
both on the held-out grid, and write a deterministic report bundle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .caldata import (
    ARCMIN_PER_DEG,
    CalibrationSet,
    ErrorProfile,
    ProfileStats,
    error_profile,
    partition_even_odd,
    stats,
    wrap_angle_deg,
)
from .errors import CorruptFile, KindMismatch, UnsupportedVersion
from .fourier import (
    FourierModel,
    FourierTerm,
    eval_fourier,
    fit_fourier,
    harmonic_spectrum,
    select_top,
)
from .network import (
    AffineMap,
    DEFAULT_TARGET_BOUNDS_ARCMIN,
    Network,
    NetworkShape,
    dataset_from_profile,
    forward_batch,
    init_network,
)
from .optim import TrainingConfig, TrainingHistory, train_backprop, train_lm
from .prune import DEFAULT_RANK_REL_TOL, PruneReport, prune_and_retrain

FORMAT_VERSION = 1
KIND_ANN = "ann"
KIND_FOURIER = "fourier"

_ANN_KEYS = ("shape", "input_norm", "target_norm", "hidden_weights",
             "hidden_thresholds", "output_weights", "output_thresholds")
_FOURIER_KEYS = ("a0", "terms")


@dataclass(frozen=True)
class CompensationModel:
    """Tagged, versioned compensation artifact: a Network or a FourierModel."""

    kind: str
    encoder_id: str
    payload: Network | FourierModel
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        if self.format_version != FORMAT_VERSION:
            raise UnsupportedVersion(f"unsupported format version {self.format_version!r}")
        if self.kind == KIND_ANN:
            if not isinstance(self.payload, Network):
                raise KindMismatch(f"kind {self.kind!r} with payload {type(self.payload).__name__}")
        elif self.kind == KIND_FOURIER:
            if not isinstance(self.payload, FourierModel):
                raise KindMismatch(f"kind {self.kind!r} with payload {type(self.payload).__name__}")
        else:
            raise KindMismatch(f"unknown model kind {self.kind!r}")


def _affine_to_doc(m: AffineMap) -> dict:
    return {"lo": m.lo, "hi": m.hi, "out_lo": m.out_lo, "out_hi": m.out_hi}


def _affine_from_doc(doc) -> AffineMap:
    try:
        return AffineMap(float(doc["lo"]), float(doc["hi"]),
                         float(doc["out_lo"]), float(doc["out_hi"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"bad affine map entry: {doc!r}") from exc


def save_model(path, model: CompensationModel) -> None:
    """Write a model file.  Floats serialize as shortest exact decimals, so a
    save/load round trip reproduces every parameter bit for bit."""
    doc: dict = {
        "format_version": model.format_version,
        "kind": model.kind,
        "encoder_id": model.encoder_id,
    }
    if model.kind == KIND_ANN:
        net = model.payload
        doc["shape"] = {
            "n_inputs": net.shape.n_inputs,
            "n_hidden": net.shape.n_hidden,
            "n_outputs": net.shape.n_outputs,
        }
        doc["input_norm"] = _affine_to_doc(net.input_norm)
        doc["target_norm"] = _affine_to_doc(net.target_norm)
        doc["hidden_weights"] = net.w_hidden.ravel().tolist()
        doc["hidden_thresholds"] = net.theta_hidden.tolist()
        doc["output_weights"] = net.w_output.ravel().tolist()
        doc["output_thresholds"] = net.theta_output.tolist()
    else:
        fm = model.payload
        doc["a0"] = fm.a0
        doc["terms"] = [{"n": t.n, "a": t.a, "b": t.b} for t in fm.terms]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _float_list(doc, key, expected_len) -> list[float]:
    try:
        values = [float(v) for v in doc[key]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"missing or non-numeric {key!r}") from exc
    if len(values) != expected_len:
        raise CorruptFile(f"{key!r} has {len(values)} entries, expected {expected_len}")
    if not all(math.isfinite(v) for v in values):
        raise CorruptFile(f"{key!r} contains non-finite values")
    return values


def load_model(path) -> CompensationModel:
    """Read a model file, validating version, kind and payload shape."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptFile(f"not a valid model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptFile("model file must hold a JSON object")

    version = doc.get("format_version")
    if not isinstance(version, int):
        raise CorruptFile(f"missing or non-integer format_version: {version!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"unsupported format version {version}")

    kind = doc.get("kind")
    if kind not in (KIND_ANN, KIND_FOURIER):
        raise KindMismatch(f"unknown model kind {kind!r}")
    other_keys = _FOURIER_KEYS if kind == KIND_ANN else _ANN_KEYS
    own_keys = _ANN_KEYS if kind == KIND_ANN else _FOURIER_KEYS
    if any(k in doc for k in other_keys) and not all(k in doc for k in own_keys):
        raise KindMismatch(f"kind {kind!r} but payload fields of the other kind")

    encoder_id = str(doc.get("encoder_id", "unknown"))

    if kind == KIND_ANN:
        try:
            shape = NetworkShape(
                int(doc["shape"]["n_inputs"]),
                int(doc["shape"]["n_hidden"]),
                int(doc["shape"]["n_outputs"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptFile(f"bad or missing shape: {exc}") from exc
        k, j, i = shape.n_inputs, shape.n_hidden, shape.n_outputs
        net = Network(
            shape=shape,
            w_hidden=np.array(_float_list(doc, "hidden_weights", j * k)).reshape(j, k),
            theta_hidden=np.array(_float_list(doc, "hidden_thresholds", j)),
            w_output=np.array(_float_list(doc, "output_weights", i * j)).reshape(i, j),
            theta_output=np.array(_float_list(doc, "output_thresholds", i)),
            input_norm=_affine_from_doc(doc.get("input_norm")),
            target_norm=_affine_from_doc(doc.get("target_norm")),
        )
        return CompensationModel(KIND_ANN, encoder_id, net, version)

    try:
        a0 = float(doc["a0"])
        terms = tuple(
            FourierTerm(int(t["n"]), float(t["a"]), float(t["b"])) for t in doc["terms"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"bad fourier payload: {exc}") from exc
    if not math.isfinite(a0) or not all(
        math.isfinite(t.a) and math.isfinite(t.b) for t in terms
    ):
        raise CorruptFile("fourier coefficients must be finite")
    return CompensationModel(KIND_FOURIER, encoder_id, FourierModel(a0, terms), version)


def predict_error(model: CompensationModel, theta_enc_deg) -> float | np.ndarray:
    """Model-predicted systematic error (arc-min) at encoder angle(s) in degrees."""
    scalar = np.isscalar(theta_enc_deg) or np.ndim(theta_enc_deg) == 0
    theta = np.atleast_1d(np.asarray(theta_enc_deg, dtype=float))
    wrapped = np.array([wrap_angle_deg(t) for t in theta])
    if model.kind == KIND_ANN:
        net = model.payload
        x = net.input_norm.normalize(wrapped)[:, np.newaxis]
        pred = net.target_norm.denormalize(forward_batch(net, x)[:, 0])
    else:
        pred = np.atleast_1d(eval_fourier(model.payload, wrapped))
    return float(pred[0]) if scalar else pred


def correct(model: CompensationModel, theta_enc_deg: float) -> float:
    """Corrected angle: measured minus predicted error, wrapped into [0, 360)."""
    predicted = predict_error(model, theta_enc_deg)
    return wrap_angle_deg(float(theta_enc_deg) - predicted / ARCMIN_PER_DEG)


@dataclass(frozen=True)
class EvaluationReport:
    """Pre/post compensation statistics plus the per-angle residual table.

    Table rows: (encoder_angle_deg, observed_arcmin, predicted_arcmin,
    residual_arcmin) with residual = predicted - observed.
    """

    pre_stats: ProfileStats
    post_stats: ProfileStats
    max_abs_residual_arcmin: float
    rows: tuple[tuple[float, float, float, float], ...]


def evaluate(model: CompensationModel, test: CalibrationSet) -> EvaluationReport:
    """Residual error of the model against an observed calibration set."""
    profile = error_profile(test)
    angles = np.array(profile.angles_deg())
    observed = np.array(profile.errors_arcmin())
    predicted = predict_error(model, angles)
    residuals = predicted - observed
    rows = tuple(
        (float(a), float(o), float(p), float(r))
        for a, o, p, r in zip(angles, observed, predicted, residuals)
    )
    post = stats(ErrorProfile(tuple((a, r) for a, _o, _p, r in rows)))
    return EvaluationReport(
        pre_stats=stats(profile),
        post_stats=post,
        max_abs_residual_arcmin=float(np.max(np.abs(residuals))),
        rows=rows,
    )


# ---------------------------------------------------------------------------
# Experiment orchestration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    hidden: int = 80
    optimizer: str = "lm"            # "lm" | "backprop"
    top_orders: int = 10
    prune: bool = False
    prune_rel_tol: float = DEFAULT_RANK_REL_TOL
    norm_bounds: tuple[float, float] = DEFAULT_TARGET_BOUNDS_ARCMIN
    training: TrainingConfig = TrainingConfig(seed=42)

    def __post_init__(self) -> None:
        if self.optimizer not in ("lm", "backprop"):
            raise ValueError(f"optimizer must be 'lm' or 'backprop', got {self.optimizer!r}")
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")


@dataclass(frozen=True)
class ExperimentResult:
    ann_model: CompensationModel
    fourier_model: CompensationModel
    ann_report: EvaluationReport
    fourier_report: EvaluationReport
    history: TrainingHistory
    prune_report: PruneReport | None
    pre_full_stats: ProfileStats
    files: tuple[str, ...]


def stats_doc(s: ProfileStats) -> dict:
    return {
        "mae_arcmin": s.mae_arcmin,
        "rms_arcmin": s.rms_arcmin,
        "min_arcmin": s.min_arcmin,
        "max_arcmin": s.max_arcmin,
        "n_samples": s.n_samples,
    }


def write_history_csv(path, history: TrainingHistory) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,mse\n")
        for i, m in enumerate(history.mse_per_iteration, start=1):
            fh.write(f"{i},{m!r}\n")


def write_residuals_csv(path, report: EvaluationReport) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("encoder_angle_deg,observed_arcmin,predicted_arcmin,residual_arcmin\n")
        for angle, obs, pred, res in report.rows:
            fh.write(f"{angle!r},{obs!r},{pred!r},{res!r}\n")


def run_experiment(
    cal: CalibrationSet, outdir, cfg: ExperimentConfig = ExperimentConfig()
) -> ExperimentResult:
    """End-to-end run on one calibration set; writes a deterministic report
    bundle (models, history, spectrum, residual tables, comparison CSV and
    a JSON report) into `outdir`."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    train_set, test_set = partition_even_odd(cal)
    train_angles = {s.table_angle_deg for s in train_set.samples}
    test_angles = {s.table_angle_deg for s in test_set.samples}
    assert not train_angles & test_angles, "train/test grids overlap"

    train_prof = error_profile(train_set)
    full_stats = stats(error_profile(cal))

    # network branch
    prune_report = None
    net0 = init_network(NetworkShape(1, cfg.hidden, 1), cfg.training.seed, cfg.norm_bounds)
    data = dataset_from_profile(train_prof, net0)
    train_fn = train_lm if cfg.optimizer == "lm" else train_backprop
    if cfg.prune:
        trained, prune_report = prune_and_retrain(
            data, cfg.hidden, cfg.training,
            rel_tol=cfg.prune_rel_tol, norm_bounds=cfg.norm_bounds, train_fn=train_fn,
        )
        history = prune_report.history_pruned
    else:
        trained, history = train_fn(net0, data, cfg.training)

    ann_model = CompensationModel(KIND_ANN, cal.encoder_id, trained)

    # fourier branch
    spectrum = harmonic_spectrum(train_prof)
    orders = select_top(spectrum, min(cfg.top_orders, len(spectrum)))
    fourier_model = CompensationModel(
        KIND_FOURIER, cal.encoder_id, fit_fourier(train_prof, orders)
    )

    ann_report = evaluate(ann_model, test_set)
    fourier_report = evaluate(fourier_model, test_set)

    # report bundle
    files = []

    def _emit(name, writer):
        path = outdir / name
        writer(path)
        files.append(name)

    _emit("ann_model.json", lambda p: save_model(p, ann_model))
    _emit("fourier_model.json", lambda p: save_model(p, fourier_model))
    _emit("history.csv", lambda p: write_history_csv(p, history))
    _emit("residuals_ann.csv", lambda p: write_residuals_csv(p, ann_report))
    _emit("residuals_fourier.csv", lambda p: write_residuals_csv(p, fourier_report))

    def _write_spectrum(path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("order,amplitude_arcmin\n")
            for e in spectrum.entries:
                fh.write(f"{e.order},{e.amplitude_arcmin!r}\n")

    _emit("spectrum.csv", _write_spectrum)

    def _write_comparison(path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(
                "encoder_id,pre_mae_arcmin,pre_rms_arcmin,"
                "fourier_mae_arcmin,fourier_rms_arcmin,"
                "ann_mae_arcmin,ann_rms_arcmin\n"
            )
            fh.write(
                f"{cal.encoder_id},"
                f"{full_stats.mae_arcmin!r},{full_stats.rms_arcmin!r},"
                f"{fourier_report.post_stats.mae_arcmin!r},"
                f"{fourier_report.post_stats.rms_arcmin!r},"
                f"{ann_report.post_stats.mae_arcmin!r},"
                f"{ann_report.post_stats.rms_arcmin!r}\n"
            )

    _emit("comparison.csv", _write_comparison)

    def _write_report(path):
        doc = {
            "encoder_id": cal.encoder_id,
            "epoch": cal.epoch,
            "config": {
                "hidden": cfg.hidden,
                "optimizer": cfg.optimizer,
                "top_orders": cfg.top_orders,
                "prune": cfg.prune,
                "prune_rel_tol": cfg.prune_rel_tol,
                "norm_bounds": list(cfg.norm_bounds),
                "max_iterations": cfg.training.max_iterations,
                "seed": cfg.training.seed,
            },
            "n_train": len(train_set),
            "n_test": len(test_set),
            "pre_full": stats_doc(full_stats),
            "pre_test": stats_doc(ann_report.pre_stats),
            "ann": {
                "post": stats_doc(ann_report.post_stats),
                "max_abs_residual_arcmin": ann_report.max_abs_residual_arcmin,
                "iterations_run": history.iterations_run,
                "stop_reason": history.stop_reason.value,
                "final_mse": history.mse_per_iteration[-1],
            },
            "fourier": {
                "post": stats_doc(fourier_report.post_stats),
                "max_abs_residual_arcmin": fourier_report.max_abs_residual_arcmin,
                "orders": orders,
            },
        }
        if prune_report is not None:
            doc["prune"] = {
                "initial_hidden": prune_report.initial_hidden,
                "pruned_hidden": prune_report.pruned_hidden,
                "mse_initial": prune_report.mse_initial,
                "mse_pruned": prune_report.mse_pruned,
                "spectrum_initial": list(prune_report.spectrum_initial),
                "spectrum_pruned": list(prune_report.spectrum_pruned),
            }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

    _emit("report.json", _write_report)

    if prune_report is not None:
        def _write_prune(path):
            doc = {
                "initial_hidden": prune_report.initial_hidden,
                "pruned_hidden": prune_report.pruned_hidden,
                "mse_initial": prune_report.mse_initial,
                "mse_pruned": prune_report.mse_pruned,
                "spectrum_initial": list(prune_report.spectrum_initial),
                "spectrum_pruned": list(prune_report.spectrum_pruned),
            }
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")

        _emit("prune_report.json", _write_prune)

    return ExperimentResult(
        ann_model=ann_model,
        fourier_model=fourier_model,
        ann_report=ann_report,
        fourier_report=fourier_report,
        history=history,
        prune_report=prune_report,
        pre_full_stats=full_stats,
        files=tuple(files),
    )
