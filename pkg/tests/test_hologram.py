import json

import numpy as np
import pytest

from spdcbell.errors import DegenerateInputError, HologramConfigError
from spdcbell.hologram import (
    Hologram,
    SlmSpec,
    blank,
    encode,
    first_order_field,
    read_pgm,
    verify_first_order,
    write_pgm,
    write_sidecar,
)
from spdcbell.modes import ModeField, hg, lg, mode_field

# coarse SLM with the same 8-pixel grating and aperture as the default one
SMALL = SlmSpec(256, 256, pixel_pitch=0.032, grating_period=0.256)


class PlaneWave:
    def __call__(self, x, y):
        return np.ones(np.broadcast(x, y).shape, dtype=complex)


def test_plane_wave_gives_pure_blazed_ramp():
    holo = encode(PlaneWave(), SMALL, quantize=False)
    X, _ = SMALL.mesh()
    ramp = np.mod(2 * np.pi * X / SMALL.grating_period - 2 * np.pi * X[0, 0] / SMALL.grating_period, 2 * np.pi)
    # constant offset aside, the map is the full-depth sawtooth
    diff = np.angle(np.exp(1j * (holo.phase_map - ramp)))
    assert np.ptp(diff) < 1e-9
    assert np.allclose(holo.phase_map, holo.phase_map[0:1, :])


def test_hg11_hologram_has_pi_steps_across_axes():
    holo = encode(mode_field(hg(1, 1), 1.0), SMALL, quantize=False)
    r = first_order_field(holo)
    n = SMALL.width_px
    q = n // 4
    quads = [r[q, q], r[q, 3 * q], r[3 * q, q], r[3 * q, 3 * q]]
    # four lobes with alternating sign
    assert abs(abs(np.angle(quads[0] / quads[1])) - np.pi) < 0.05
    assert abs(abs(np.angle(quads[0] / quads[2])) - np.pi) < 0.05
    assert abs(np.angle(quads[0] / quads[3])) < 0.05


def test_zero_amplitude_is_flat_pi():
    f = ModeField(((hg(0, 0), 1.0),), 0.3)
    holo = encode(f, SMALL, quantize=False)
    assert np.allclose(holo.phase_map[0, :], np.pi, atol=1e-6)


@pytest.mark.parametrize("mode", [hg(0, 0), hg(0, 1), hg(1, 0), hg(1, 1), lg(0, 1)])
def test_fidelity_above_threshold(mode):
    f = mode_field(mode, 1.0)
    assert verify_first_order(encode(f, SMALL), f) > 0.98


def test_orthogonal_rejection_and_blank():
    holo = encode(mode_field(hg(0, 1), 1.0), SMALL)
    assert verify_first_order(holo, mode_field(hg(1, 0), 1.0)) < 0.05
    assert verify_first_order(blank(SMALL), mode_field(hg(0, 0), 1.0)) < 1e-12


def test_global_phase_invariance():
    base = ModeField(((hg(1, 1), 1.0), (hg(0, 0), 0.4j)), 1.0)
    ref = verify_first_order(encode(base, SMALL), base)
    for phi in (0.3, 1.7, -2.5):
        f = ModeField(tuple((m, c * np.exp(1j * phi)) for m, c in base.terms), 1.0)
        assert abs(verify_first_order(encode(f, SMALL), f) - ref) < 1e-6


def test_quantization_costs_little():
    f = mode_field(hg(1, 1), 1.0)
    cont = verify_first_order(encode(f, SMALL, quantize=False), f)
    quant = verify_first_order(encode(f, SMALL), f)
    assert cont - quant < 0.01


def test_slm_spec_validation():
    with pytest.raises(HologramConfigError):
        SlmSpec(pixel_pitch=0.008, grating_period=0.01)
    with pytest.raises(HologramConfigError):
        SlmSpec(width_px=0)
    with pytest.raises(HologramConfigError):
        SlmSpec(phase_levels=1)
    with pytest.raises(HologramConfigError):
        Hologram(np.zeros((3, 3)), SMALL)


def test_window_errors():
    short = SlmSpec(64, 64, pixel_pitch=0.1, grating_period=0.25)
    with pytest.raises(HologramConfigError):
        first_order_field(blank(short))
    # a tight waist overfills the spectral window
    f = mode_field(hg(0, 0), 0.05)
    with pytest.raises(HologramConfigError):
        verify_first_order(encode(f, SMALL), f)


def test_zero_field_rejected():
    with pytest.raises(DegenerateInputError):
        encode(_Zero(), SMALL)


class _Zero:
    def __call__(self, x, y):
        return np.zeros(np.broadcast(x, y).shape, dtype=complex)


def test_pgm_bytes_follow_floor_rule(tmp_path):
    spec = SlmSpec(4, 2, pixel_pitch=1.0, grating_period=2.0)
    phase = np.array([[0.0, np.pi, 2 * np.pi - 1e-12, 0.5], [1.0, 2.0, 3.0, 6.0]])
    holo = Hologram(phase, spec)
    path = write_pgm(holo, tmp_path / "h.pgm")
    data = path.read_bytes()
    header = b"P5\n4 2\n255\n"
    assert data[: len(header)] == header
    expect = np.clip(np.floor(phase / (2 * np.pi) * 256), 0, 255).astype(np.uint8)
    assert data[len(header):] == expect.tobytes()
    assert list(expect[0, :3]) == [0, 128, 255]
    assert np.array_equal(read_pgm(path), expect)


def test_read_pgm_skips_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made elsewhere\n2 1\n255\n\x07\x09")
    assert read_pgm(p).tolist() == [[7, 9]]


def test_sidecar(tmp_path):
    holo = blank(SMALL)
    path = write_sidecar(holo, tmp_path / "h.json", {"pump": "HG_1_1"})
    doc = json.loads(path.read_text())
    assert doc["slm"]["width_px"] == 256
    assert doc["provenance"] == {"pump": "HG_1_1"}
