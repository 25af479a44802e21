"""Single-hidden-layer sigmoid feed-forward network.

The net maps one normalized encoder angle to one normalized error value:

    F_i = g( sum_j w_ij * g( sum_k w_jk x_k + theta_j ) + theta_i )

with g the logistic sigmoid.  Because g at the output layer confines
predictions to (0, 1), raw arc-minute errors are unreachable as targets;
an affine map sends a configurable error range onto [0.1, 0.9] (margins
keep targets away from sigmoid saturation), and the inverse map converts
predictions back to arc-minutes.  Inputs use degrees / 360.

All operations are pure; a Network is immutable and optimizers build new
instances via `with_params`.  Double precision throughout: the damped
normal equations used in training are ill-conditioned in single precision.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .caldata import ErrorProfile
from .errors import DegenerateBounds, EmptyDataset, ShapeMismatch

# expit saturates to exactly 0.0 / 1.0 in float64 for |z| beyond ~745 / ~37;
# clamping one ulp inside keeps outputs in the open interval (0, 1) for
# every parameter configuration.
_SIGMOID_LO = np.nextafter(0.0, 1.0)
_SIGMOID_HI = np.nextafter(1.0, 0.0)


def sigmoid(z):
    return np.clip(expit(z), _SIGMOID_LO, _SIGMOID_HI)


@dataclass(frozen=True)
class AffineMap:
    """Invertible affine map [lo, hi] -> [out_lo, out_hi]."""

    lo: float
    hi: float
    out_lo: float
    out_hi: float

    def __post_init__(self) -> None:
        if not (self.hi > self.lo):
            raise DegenerateBounds(f"need hi > lo, got [{self.lo!r}, {self.hi!r}]")
        if self.out_hi == self.out_lo:
            raise DegenerateBounds("output range is degenerate")

    def normalize(self, x):
        return self.out_lo + (np.asarray(x, dtype=float) - self.lo) * (
            (self.out_hi - self.out_lo) / (self.hi - self.lo)
        )

    def denormalize(self, y):
        return self.lo + (np.asarray(y, dtype=float) - self.out_lo) * (
            (self.hi - self.lo) / (self.out_hi - self.out_lo)
        )


INPUT_NORM = AffineMap(0.0, 360.0, 0.0, 1.0)
TARGET_OUT_RANGE = (0.1, 0.9)
DEFAULT_TARGET_BOUNDS_ARCMIN = (-6.0, 6.0)  # manufacturer tolerance band


@dataclass(frozen=True)
class NetworkShape:
    n_inputs: int
    n_hidden: int
    n_outputs: int

    def __post_init__(self) -> None:
        if min(self.n_inputs, self.n_hidden, self.n_outputs) < 1:
            raise ValueError(f"all layer sizes must be >= 1, got {self}")

    @property
    def n_params(self) -> int:
        k, j, i = self.n_inputs, self.n_hidden, self.n_outputs
        return j * k + j + i * j + i


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Network:
    """Weights, thresholds and normalization metadata of a K:J:I sigmoid net."""

    shape: NetworkShape
    w_hidden: np.ndarray    # (J, K)
    theta_hidden: np.ndarray  # (J,)
    w_output: np.ndarray    # (I, J)
    theta_output: np.ndarray  # (I,)
    input_norm: AffineMap
    target_norm: AffineMap

    def __post_init__(self) -> None:
        k, j, i = self.shape.n_inputs, self.shape.n_hidden, self.shape.n_outputs
        object.__setattr__(self, "w_hidden", _readonly(self.w_hidden).reshape(j, k))
        object.__setattr__(self, "theta_hidden", _readonly(self.theta_hidden).reshape(j))
        object.__setattr__(self, "w_output", _readonly(self.w_output).reshape(i, j))
        object.__setattr__(self, "theta_output", _readonly(self.theta_output).reshape(i))
        for arr in (self.w_hidden, self.theta_hidden, self.w_output, self.theta_output):
            if not np.all(np.isfinite(arr)):
                raise ValueError("network parameters must be finite")

    @property
    def n_params(self) -> int:
        return self.shape.n_params

    def to_vector(self) -> np.ndarray:
        """Flatten parameters in the canonical order: hidden weights
        (row-major), hidden thresholds, output weights (row-major),
        output thresholds."""
        return np.concatenate([
            self.w_hidden.ravel(),
            self.theta_hidden,
            self.w_output.ravel(),
            self.theta_output,
        ])

    def with_params(self, vector: np.ndarray) -> "Network":
        """New network with the same shape/normalization, parameters from
        a flat vector in canonical order."""
        k, j, i = self.shape.n_inputs, self.shape.n_hidden, self.shape.n_outputs
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.n_params,):
            raise ShapeMismatch(
                f"expected parameter vector of length {self.n_params}, got {vector.shape}"
            )
        a = j * k
        b = a + j
        c = b + i * j
        return replace(
            self,
            w_hidden=vector[:a].reshape(j, k),
            theta_hidden=vector[a:b],
            w_output=vector[b:c].reshape(i, j),
            theta_output=vector[c:],
        )


@dataclass(frozen=True)
class Gradient:
    """d(MSE)/d(parameter), arrays shaped like the Network's."""

    w_hidden: np.ndarray
    theta_hidden: np.ndarray
    w_output: np.ndarray
    theta_output: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([
            self.w_hidden.ravel(),
            self.theta_hidden,
            self.w_output.ravel(),
            self.theta_output,
        ])


@dataclass(frozen=True)
class Dataset:
    """Normalized training patterns: inputs (P, K), targets (P, I) in [0, 1]."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if inputs.shape[0] == 0:
            raise EmptyDataset("dataset needs at least one pattern")
        if targets.shape[0] != inputs.shape[0]:
            raise ShapeMismatch(
                f"inputs have {inputs.shape[0]} patterns, targets {targets.shape[0]}"
            )
        for name, arr in (("inputs", inputs), ("targets", targets)):
            if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        object.__setattr__(self, "inputs", _readonly(inputs))
        object.__setattr__(self, "targets", _readonly(targets))

    @property
    def n_patterns(self) -> int:
        return self.inputs.shape[0]


def init_network(
    shape: NetworkShape,
    seed: int,
    norm_bounds: tuple[float, float] = DEFAULT_TARGET_BOUNDS_ARCMIN,
) -> Network:
    """Fresh network: weights uniform in [-0.5, 0.5] from `seed`, thresholds zero."""
    lo, hi = norm_bounds
    if not hi > lo:
        raise DegenerateBounds(f"need hi > lo arc-min bounds, got ({lo!r}, {hi!r})")
    k, j, i = shape.n_inputs, shape.n_hidden, shape.n_outputs
    rng = np.random.default_rng(seed)
    return Network(
        shape=shape,
        w_hidden=rng.uniform(-0.5, 0.5, size=(j, k)),
        theta_hidden=np.zeros(j),
        w_output=rng.uniform(-0.5, 0.5, size=(i, j)),
        theta_output=np.zeros(i),
        input_norm=INPUT_NORM,
        target_norm=AffineMap(lo, hi, *TARGET_OUT_RANGE),
    )


def _check_compat(net: Network, data: Dataset) -> None:
    if data.inputs.shape[1] != net.shape.n_inputs:
        raise ShapeMismatch(
            f"dataset has {data.inputs.shape[1]} inputs, network expects {net.shape.n_inputs}"
        )
    if data.targets.shape[1] != net.shape.n_outputs:
        raise ShapeMismatch(
            f"dataset has {data.targets.shape[1]} targets, network expects {net.shape.n_outputs}"
        )


def forward_batch(net: Network, x: np.ndarray) -> np.ndarray:
    """Outputs for a (P, K) batch of normalized inputs; returns (P, I) in (0, 1)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    hidden = sigmoid(x @ net.w_hidden.T + net.theta_hidden)
    return sigmoid(hidden @ net.w_output.T + net.theta_output)


def forward(net: Network, x) -> np.ndarray:
    """Output I-vector for one normalized input K-vector."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return forward_batch(net, x[np.newaxis, :])[0]


def mse(net: Network, data: Dataset) -> float:
    """Mean-squared error over all patterns and outputs, in normalized units."""
    _check_compat(net, data)
    out = forward_batch(net, data.inputs)
    diff = data.targets - out
    return float(np.mean(diff * diff))


def gradient(net: Network, data: Dataset) -> Gradient:
    """Analytic d(MSE)/d(parameter) by reverse accumulation."""
    _check_compat(net, data)
    x = data.inputs                      # (P, K)
    pre_hidden = x @ net.w_hidden.T + net.theta_hidden
    hidden = sigmoid(pre_hidden)         # (P, J)
    out = sigmoid(hidden @ net.w_output.T + net.theta_output)  # (P, I)

    p, i = data.targets.shape
    # d(MSE)/d(pre_output), shape (P, I)
    delta_out = (2.0 / (p * i)) * (out - data.targets) * out * (1.0 - out)
    g_w_output = delta_out.T @ hidden    # (I, J)
    g_theta_output = delta_out.sum(axis=0)
    # back through the hidden sigmoid
    delta_hidden = (delta_out @ net.w_output) * hidden * (1.0 - hidden)  # (P, J)
    g_w_hidden = delta_hidden.T @ x      # (J, K)
    g_theta_hidden = delta_hidden.sum(axis=0)
    return Gradient(g_w_hidden, g_theta_hidden, g_w_output, g_theta_output)


def residual_jacobian(net: Network, data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Residuals r = D - O flattened to (P*I,) and their Jacobian.

    J[m, q] = d r_m / d param_q with parameters in canonical vector order,
    so grad(MSE) = (2 / (P*I)) * J^T r holds against `gradient`.
    """
    _check_compat(net, data)
    x = data.inputs
    pre_hidden = x @ net.w_hidden.T + net.theta_hidden
    hidden = sigmoid(pre_hidden)                     # (P, J)
    out = sigmoid(hidden @ net.w_output.T + net.theta_output)  # (P, I)

    p, k = x.shape
    j = net.shape.n_hidden
    i = net.shape.n_outputs

    residuals = (data.targets - out).ravel()         # row-major: m = p*I + i

    s_out = out * (1.0 - out)                        # (P, I)
    s_hidden = hidden * (1.0 - hidden)               # (P, J)

    # d r_{pi} / d w_out[i', j]  = -delta_{ii'} s_out[p,i] hidden[p,j]
    jac_w_output = np.zeros((p, i, i, j))
    for ii in range(i):
        jac_w_output[:, ii, ii, :] = -s_out[:, ii, np.newaxis] * hidden
    # d r_{pi} / d theta_out[i'] = -delta_{ii'} s_out[p,i]
    jac_theta_output = np.zeros((p, i, i))
    for ii in range(i):
        jac_theta_output[:, ii, ii] = -s_out[:, ii]
    # chain to the hidden layer: common factor (P, I, J)
    chain = -np.einsum("pi,ij,pj->pij", s_out, net.w_output, s_hidden)
    jac_w_hidden = np.einsum("pij,pk->pijk", chain, x)   # (P, I, J, K)
    jac_theta_hidden = chain                             # (P, I, J)

    m = p * i
    jacobian = np.concatenate(
        [
            jac_w_hidden.reshape(m, j * k),
            jac_theta_hidden.reshape(m, j),
            jac_w_output.reshape(m, i * j),
            jac_theta_output.reshape(m, i),
        ],
        axis=1,
    )
    return residuals, jacobian


def dataset_from_profile(profile: ErrorProfile, net_or_maps) -> Dataset:
    """Build a normalized 1-input/1-output Dataset from an error profile.

    `net_or_maps` is either a Network or an (input_norm, target_norm) pair.
    """
    if isinstance(net_or_maps, Network):
        input_norm, target_norm = net_or_maps.input_norm, net_or_maps.target_norm
    else:
        input_norm, target_norm = net_or_maps
    angles = np.array(profile.angles_deg(), dtype=float)
    errors = np.array(profile.errors_arcmin(), dtype=float)
    return Dataset(
        inputs=input_norm.normalize(angles)[:, np.newaxis],
        targets=target_norm.normalize(errors)[:, np.newaxis],
    )
