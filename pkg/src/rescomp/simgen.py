"""Synthetic encoder calibration data with known ground truth.

Systematic encoder error is modelled as a sum of harmonics of the shaft
angle (amplitude imbalance, quadrature error and inductive harmonics all
manifest as low-order cyclic errors, plus a constant offset), optional
Gaussian scatter between calibration epochs, and 16-bit quantization of
the reported angle.  Because the ground truth is analytic, end-to-end
tests can check any compensation model against the closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .caldata import ARCMIN_PER_DEG, CalibrationSample, CalibrationSet, wrap_angle_deg
from .errors import BadGrid

# One least-significant bit of a 16-bit single-turn encoder, in degrees.
LSB_DEG = 360.0 / 65536.0
LSB_ARCMIN = LSB_DEG * ARCMIN_PER_DEG  # ~0.33 arc-min


@dataclass(frozen=True)
class HarmonicTerm:
    """One cyclic error component: amp * cos(n * theta + phase)."""

    n: int
    amp_arcmin: float
    phase_rad: float

    def __post_init__(self) -> None:
        if self.n < 0 or self.n != int(self.n):
            raise ValueError(f"harmonic order must be a non-negative integer, got {self.n!r}")
        if not math.isfinite(self.amp_arcmin):
            raise ValueError(f"amplitude must be finite, got {self.amp_arcmin!r}")


@dataclass(frozen=True)
class HarmonicSpec:
    """Ground-truth error model: harmonic terms + epoch noise + rng seed."""

    terms: tuple[HarmonicTerm, ...]
    noise_sigma_arcmin: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        orders = [t.n for t in self.terms]
        if len(set(orders)) != len(orders):
            raise ValueError(f"harmonic orders must be distinct, got {orders}")
        if self.noise_sigma_arcmin < 0:
            raise ValueError("noise sigma must be >= 0")


def harmonic_error_arcmin(terms, theta_deg: float) -> float:
    """Closed-form systematic error at one angle, in arc-minutes.

    The harmonic order counts cycles per full mechanical revolution, so the
    angle enters the trig functions in radians.
    """
    theta_rad = math.radians(theta_deg)
    return sum(t.amp_arcmin * math.cos(t.n * theta_rad + t.phase_rad) for t in terms)


def quantize16(angle_deg: float) -> float:
    """Snap an angle to the 16-bit grid (round half away from zero), wrap to [0, 360)."""
    steps = angle_deg / LSB_DEG
    rounded = math.floor(abs(steps) + 0.5) * (1.0 if steps >= 0 else -1.0)
    return wrap_angle_deg(rounded * LSB_DEG)


def synthesize(
    spec: HarmonicSpec,
    grid_step_deg: float = 2.0,
    grid_offset_deg: float = 0.0,
    encoder_id: str = "synthetic",
    epoch: str = "synthetic",
    quantize: bool = True,
) -> CalibrationSet:
    """Generate a calibration set on a uniform table-angle grid.

    For each grid angle the encoder reading is the angle displaced by the
    ground-truth error (plus noise), optionally quantized to the 16-bit
    grid.  Deterministic for a fixed spec.
    """
    if not (grid_step_deg > 0 and math.isfinite(grid_step_deg)):
        raise BadGrid(f"grid step must be positive, got {grid_step_deg!r}")
    n_points = 360.0 / grid_step_deg
    if abs(n_points - round(n_points)) > 1e-9:
        raise BadGrid(f"grid step {grid_step_deg!r} does not divide 360")
    if not (0.0 <= grid_offset_deg < grid_step_deg):
        raise BadGrid(f"offset {grid_offset_deg!r} not in [0, step)")
    n_points = int(round(n_points))

    rng = np.random.default_rng(spec.seed)
    samples = []
    for i in range(n_points):
        theta = grid_offset_deg + i * grid_step_deg
        err_arcmin = harmonic_error_arcmin(spec.terms, theta)
        if spec.noise_sigma_arcmin > 0:
            err_arcmin += spec.noise_sigma_arcmin * rng.standard_normal()
        encoder_angle = theta + err_arcmin / ARCMIN_PER_DEG
        if quantize:
            encoder_angle = quantize16(encoder_angle)
        else:
            encoder_angle = wrap_angle_deg(encoder_angle)
        samples.append(CalibrationSample(theta, encoder_angle))
    return CalibrationSet(tuple(samples), encoder_id=encoder_id, epoch=epoch)


def spec_to_json(spec: HarmonicSpec, path) -> None:
    """Write a HarmonicSpec as a JSON file."""
    doc = {
        "terms": [
            {"n": t.n, "amp_arcmin": t.amp_arcmin, "phase_rad": t.phase_rad}
            for t in spec.terms
        ],
        "noise_sigma_arcmin": spec.noise_sigma_arcmin,
        "seed": spec.seed,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def spec_from_json(path) -> HarmonicSpec:
    """Read a HarmonicSpec from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    terms = tuple(
        HarmonicTerm(int(t["n"]), float(t["amp_arcmin"]), float(t["phase_rad"]))
        for t in doc.get("terms", [])
    )
    return HarmonicSpec(
        terms=terms,
        noise_sigma_arcmin=float(doc.get("noise_sigma_arcmin", 0.0)),
        seed=int(doc.get("seed", 0)),
    )


# ---------------------------------------------------------------------------
# Reference archetypes
#
# Four synthetic encoders spanning the error-profile range typical of
# low-cost 16-bit resolver encoders (pre-compensation MAE between ~0.5'
# and ~1.8').  Each mixes a constant offset, dominant low-order harmonics
# and a 16-cycle ripple; amplitudes are scaled so the noiseless profile on
# a 1-degree grid has the target MAE listed below.  Phases are arbitrary
# fixed values exercising both cosine and sine components.
# ---------------------------------------------------------------------------

ARCHETYPE_MAE_TARGETS = (1.33, 0.55, 1.09, 1.78)

# (order, relative amplitude, phase) per archetype; scale factors frozen
# from the grid MAE of the noiseless closed form (see tests).
_ARCHETYPE_SHAPES = (
    ((1, 1.00, 0.70), (2, 0.50, 2.10), (16, 0.25, -1.30), (0, 0.20, 0.40)),
    ((0, 1.00, 0.00), (1, 0.80, -2.30), (2, 0.45, 1.10), (16, 0.20, 2.60)),
    ((1, 1.00, 1.90), (16, 0.50, -0.60), (2, 0.35, -2.80), (0, 0.15, 0.00)),
    ((0, 1.00, 0.00), (1, 0.85, 0.30), (16, 0.30, 1.70), (2, 0.25, -1.00)),
)

_ARCHETYPE_SCALES = (2.017921, 0.550000, 1.592717, 1.747773)

DEFAULT_NOISE_SIGMA_ARCMIN = 0.1
ARCHETYPE_BASE_SEED = 42


def archetype_spec(index: int) -> HarmonicSpec:
    """Reference spec for archetype 1..4 (seed 42 + index - 1)."""
    if not 1 <= index <= 4:
        raise ValueError(f"archetype index must be 1..4, got {index}")
    shape = _ARCHETYPE_SHAPES[index - 1]
    scale = _ARCHETYPE_SCALES[index - 1]
    terms = tuple(HarmonicTerm(n, rel * scale, phase) for n, rel, phase in shape)
    return HarmonicSpec(
        terms=terms,
        noise_sigma_arcmin=DEFAULT_NOISE_SIGMA_ARCMIN,
        seed=ARCHETYPE_BASE_SEED + index - 1,
    )
