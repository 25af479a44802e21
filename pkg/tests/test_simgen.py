import pytest
from hypothesis import given
from hypothesis import strategies as st

from rescomp.caldata import error_profile, stats
from rescomp.errors import BadGrid
from rescomp.simgen import (
    ARCHETYPE_MAE_TARGETS,
    LSB_ARCMIN,
    LSB_DEG,
    HarmonicSpec,
    HarmonicTerm,
    archetype_spec,
    harmonic_error_arcmin,
    quantize16,
    spec_from_json,
    spec_to_json,
    synthesize,
)


# --- quantization ---

def test_quantize_zero():
    assert quantize16(0.0) == 0.0


def test_quantize_rounding_boundary():
    assert quantize16(LSB_DEG * 0.4) == 0.0
    assert quantize16(LSB_DEG * 0.6) == pytest.approx(LSB_DEG, abs=0.0)


def test_lsb_is_about_a_third_arcmin():
    assert LSB_ARCMIN == pytest.approx(360.0 * 60.0 / 65536.0)
    assert abs(LSB_ARCMIN - 0.33) < 0.005


@given(st.floats(min_value=-720.0, max_value=720.0))
def test_quantize_idempotent(angle):
    once = quantize16(angle)
    assert quantize16(once) == once
    assert 0.0 <= once < 360.0


# --- synthesis ---

def test_zero_error_spec_quantizes_table_angle():
    spec = HarmonicSpec(terms=(), noise_sigma_arcmin=0.0, seed=1)
    cal = synthesize(spec, grid_step_deg=2.0)
    for s in cal.samples:
        assert s.encoder_angle_deg == quantize16(s.table_angle_deg)


def test_single_harmonic_closed_form():
    # amp 3' at order 2: +3' at 0 degrees, zero crossing at 45 degrees
    spec = HarmonicSpec(terms=(HarmonicTerm(2, 3.0, 0.0),), noise_sigma_arcmin=0.0, seed=1)
    cal = synthesize(spec, grid_step_deg=45.0, quantize=False)
    prof = dict(error_profile(cal).points)
    assert prof[0.05] == pytest.approx(3.0, abs=1e-9)  # encoder reads 0 + 3'/60
    by_table = {s.table_angle_deg: s for s in cal.samples}
    assert by_table[45.0].encoder_angle_deg == pytest.approx(45.0, abs=1e-12)


def test_deterministic_for_fixed_seed():
    spec = archetype_spec(1)
    a = synthesize(spec, grid_step_deg=1.0)
    b = synthesize(spec, grid_step_deg=1.0)
    assert a.samples == b.samples


def test_bad_grid_step():
    with pytest.raises(BadGrid):
        synthesize(archetype_spec(1), grid_step_deg=7.0)


def test_bad_offset():
    with pytest.raises(BadGrid):
        synthesize(archetype_spec(1), grid_step_deg=2.0, grid_offset_deg=2.0)


def test_offset_grid_hits_odd_degrees():
    cal = synthesize(archetype_spec(1), grid_step_deg=2.0, grid_offset_deg=1.0)
    assert [s.table_angle_deg for s in cal.samples[:3]] == [1.0, 3.0, 5.0]
    assert len(cal) == 180


def test_noiseless_roundtrip_within_half_lsb():
    spec = archetype_spec(3)
    noiseless = HarmonicSpec(terms=spec.terms, noise_sigma_arcmin=0.0, seed=spec.seed)
    cal = synthesize(noiseless, grid_step_deg=2.0)
    for angle, err in error_profile(cal).points:
        # recover the closed form through quantized encoder readings
        table = min(
            (s.table_angle_deg for s in cal.samples),
            key=lambda t: abs(t + harmonic_error_arcmin(spec.terms, t) / 60.0 - angle),
        )
        truth = harmonic_error_arcmin(spec.terms, table)
        assert abs(err - truth) <= LSB_ARCMIN / 2.0 + 1e-9


@pytest.mark.parametrize("index", [1, 2, 3, 4])
def test_archetype_mae_matches_target(index):
    cal = synthesize(archetype_spec(index), grid_step_deg=1.0)
    s = stats(error_profile(cal))
    assert abs(s.mae_arcmin - ARCHETYPE_MAE_TARGETS[index - 1]) <= 0.1
    # profiles stay inside the +-6' tolerance band
    assert s.min_arcmin > -6.0
    assert s.max_arcmin < 6.0


def test_archetype_seeds_differ():
    assert archetype_spec(1).seed == 42
    assert len({archetype_spec(k).seed for k in range(1, 5)}) == 4


# --- spec validation and JSON ---

def test_duplicate_orders_rejected():
    with pytest.raises(ValueError):
        HarmonicSpec(terms=(HarmonicTerm(2, 1.0, 0.0), HarmonicTerm(2, 0.5, 1.0)))


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        HarmonicSpec(terms=(), noise_sigma_arcmin=-0.1)


def test_spec_json_roundtrip(tmp_path):
    spec = archetype_spec(2)
    p = tmp_path / "spec.json"
    spec_to_json(spec, p)
    again = spec_from_json(p)
    assert again == spec
