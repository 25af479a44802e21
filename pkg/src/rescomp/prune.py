"""SVD-based hidden-layer redundancy analysis and pruning.

If two hidden nodes produce (nearly) the same activations for every
training pattern, one of them is redundant and the network can shrink
without losing accuracy.  Stacking the hidden-node activations over the
training set into a patterns-by-nodes matrix makes that redundancy
visible as small singular values; the count of singular values above a
relative threshold estimates the non-redundant width.  Pruning retrains
a fresh network at that width rather than surgically deleting columns,
which sidesteps any weight-transfer rule.

Note on the activation matrix: it holds the hidden-node *outputs* (after
the sigmoid).  The pre-sigmoid inputs are affine in the network input, so
for a single-input network their matrix has rank at most 2 regardless of
width; only the nonlinear outputs carry per-node information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .network import (
    DEFAULT_TARGET_BOUNDS_ARCMIN,
    Dataset,
    Network,
    NetworkShape,
    init_network,
    mse,
    sigmoid,
)
from .optim import TrainingConfig, TrainingHistory, train_lm

DEFAULT_RANK_REL_TOL = 1e-3


def activation_matrix(net: Network, data: Dataset) -> np.ndarray:
    """Hidden-node outputs for every pattern: (P, J) matrix."""
    if data.inputs.shape[1] != net.shape.n_inputs:
        raise ShapeMismatch(
            f"dataset has {data.inputs.shape[1]} inputs, network expects {net.shape.n_inputs}"
        )
    return sigmoid(data.inputs @ net.w_hidden.T + net.theta_hidden)


def singular_values(matrix: np.ndarray) -> np.ndarray:
    """Singular values of the matrix, descending."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix must be finite")
    return np.linalg.svd(matrix, compute_uv=False)


def effective_rank(spectrum: np.ndarray, rel_tol: float = DEFAULT_RANK_REL_TOL) -> int:
    """Count of singular values above rel_tol * sigma_max (0 for a zero matrix)."""
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must be in (0, 1), got {rel_tol!r}")
    spectrum = np.asarray(spectrum, dtype=float)
    if len(spectrum) == 0 or spectrum[0] == 0.0:
        return 0
    return int(np.sum(spectrum > rel_tol * spectrum[0]))


@dataclass(frozen=True)
class PruneReport:
    initial_hidden: int
    pruned_hidden: int
    spectrum_initial: tuple[float, ...]
    spectrum_pruned: tuple[float, ...]
    mse_initial: float
    mse_pruned: float
    history_initial: TrainingHistory
    history_pruned: TrainingHistory


def prune_and_retrain(
    data: Dataset,
    initial_hidden: int,
    cfg: TrainingConfig,
    rel_tol: float = DEFAULT_RANK_REL_TOL,
    norm_bounds: tuple[float, float] = DEFAULT_TARGET_BOUNDS_ARCMIN,
    train_fn=train_lm,
) -> tuple[Network, PruneReport]:
    """Train at `initial_hidden`, estimate the non-redundant width from the
    activation-matrix spectrum, retrain a fresh net at that width.

    Returns the pruned network and a report carrying both spectra and both
    final MSEs.
    """
    if initial_hidden < 2:
        raise ValueError(f"initial_hidden must be >= 2, got {initial_hidden}")
    k = data.inputs.shape[1]
    i = data.targets.shape[1]

    net_full = init_network(NetworkShape(k, initial_hidden, i), cfg.seed, norm_bounds)
    trained_full, hist_full = train_fn(net_full, data, cfg)
    spectrum_full = singular_values(activation_matrix(trained_full, data))
    rank = max(effective_rank(spectrum_full, rel_tol), 1)

    net_small = init_network(NetworkShape(k, rank, i), cfg.seed, norm_bounds)
    trained_small, hist_small = train_fn(net_small, data, cfg)
    spectrum_small = singular_values(activation_matrix(trained_small, data))

    report = PruneReport(
        initial_hidden=initial_hidden,
        pruned_hidden=rank,
        spectrum_initial=tuple(float(s) for s in spectrum_full),
        spectrum_pruned=tuple(float(s) for s in spectrum_small),
        mse_initial=mse(trained_full, data),
        mse_pruned=mse(trained_small, data),
        history_initial=hist_full,
        history_pruned=hist_small,
    )
    return trained_small, report
