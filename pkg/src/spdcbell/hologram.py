"""Phase-only SLM holograms with blazed-grating amplitude control.

The phase written to each pixel is a sawtooth carrier plus the field phase,
with its modulation depth scaled by the local relative amplitude ``A``::

    phase = pi + A * (wrap(2 pi x / period + arg(field)) - pi)

Centring the sawtooth on pi makes the first-order efficiency sinc(1 - A)
real, so depth scaling changes amplitude without adding a phase error.
Zero-amplitude pixels sit at a flat pi.

The sampled sawtooth's first-order response depends on where the wraps fall
between pixels, so the field's global phase is fixed before encoding (see
:func:`canonical_phase`).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, HologramConfigError
from .modes import ModeField

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SlmSpec:
    """SLM geometry; lengths share the unit of the field waist (mm by default)."""

    width_px: int = 1024
    height_px: int = 1024
    pixel_pitch: float = 0.008
    grating_period: float = 0.064
    phase_levels: int = 256

    def __post_init__(self):
        if self.width_px < 1 or self.height_px < 1:
            raise HologramConfigError("SLM dimensions must be positive")
        if not self.pixel_pitch > 0:
            raise HologramConfigError("pixel pitch must be positive")
        if self.grating_period < 2 * self.pixel_pitch:
            raise HologramConfigError("grating period is under-resolved (< 2 pixels)")
        if self.phase_levels < 2:
            raise HologramConfigError("need at least 2 phase levels")

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x = (np.arange(self.width_px) - (self.width_px - 1) / 2) * self.pixel_pitch
        y = (np.arange(self.height_px) - (self.height_px - 1) / 2) * self.pixel_pitch
        return np.meshgrid(x, y, indexing="xy")


@dataclass(frozen=True, eq=False)
class Hologram:
    phase_map: np.ndarray  # shape (height_px, width_px), values in [0, 2 pi)
    spec: SlmSpec

    def __post_init__(self):
        if self.phase_map.shape != (self.spec.height_px, self.spec.width_px):
            raise HologramConfigError("phase map shape does not match SLM spec")

    def to_gray(self) -> np.ndarray:
        """8-bit levels, floor(phase / 2 pi * 256) clamped to 255."""
        g = np.floor(self.phase_map / TWO_PI * 256.0)
        return np.clip(g, 0, 255).astype(np.uint8)


def canonical_phase(f: np.ndarray) -> float:
    """Global phase removed from a sampled field before encoding."""
    # rounding keeps the choice among near-tied peak pixels stable under a global phase
    mag = np.abs(f)
    ref = f.flat[int(np.argmax(np.round(mag / mag.max(), 9)))]
    q = np.sum(f * f)
    if abs(q) <= 1e-3 * np.sum(mag**2):
        return float(np.angle(ref))
    gauge = 0.5 * float(np.angle(q))
    # sum(f^2) fixes the phase mod pi; the peak pixel picks the sign
    if (ref * np.exp(-1j * gauge)).real < 0:
        gauge += np.pi
    return gauge


def encode(field: ModeField, spec: SlmSpec = SlmSpec(), quantize: bool = True) -> Hologram:
    X, Y = spec.mesh()
    f = field(X, Y)
    mag = np.abs(f)
    peak = mag.max()
    if not peak > 0:
        raise DegenerateInputError("field is zero over the SLM aperture")
    A = mag / peak
    f = f * np.exp(-1j * canonical_phase(f))
    carrier = np.mod(TWO_PI * X / spec.grating_period + np.angle(f), TWO_PI)
    phase = np.pi + A * (carrier - np.pi)
    if quantize:
        L = spec.phase_levels
        level = np.clip(np.floor(phase / TWO_PI * L), 0, L - 1)
        phase = level * (TWO_PI / L)
    return Hologram(np.mod(phase, TWO_PI), spec)


def blank(spec: SlmSpec = SlmSpec()) -> Hologram:
    return Hologram(np.zeros((spec.height_px, spec.width_px)), spec)


def first_order_field(holo: Hologram) -> np.ndarray:
    """Carrier-removed +1 diffraction order of a unit plane wave off the SLM.

    The order is isolated with a square spectral window of half-width
    1 / (2 period) centred on the carrier frequency.
    """
    spec = holo.spec
    if 3.0 / (2.0 * spec.grating_period) > 1.0 / (2.0 * spec.pixel_pitch):
        raise HologramConfigError("grating period too short: first-order window exceeds the sampling band")
    fx = np.fft.fftfreq(spec.width_px, spec.pixel_pitch)
    fy = np.fft.fftfreq(spec.height_px, spec.pixel_pitch)
    half = 1.0 / (2.0 * spec.grating_period)
    mask = (np.abs(fy)[:, None] < half) & (np.abs(fx - 1.0 / spec.grating_period)[None, :] < half)
    F = np.fft.fft2(np.exp(1j * holo.phase_map))
    r = np.fft.ifft2(F * mask)
    X, _ = spec.mesh()
    return r * np.exp(-1j * TWO_PI * X / spec.grating_period)


def _check_window(target: np.ndarray, spec: SlmSpec, min_fraction: float = 0.999) -> None:
    fx = np.fft.fftfreq(spec.width_px, spec.pixel_pitch)
    fy = np.fft.fftfreq(spec.height_px, spec.pixel_pitch)
    half = 1.0 / (2.0 * spec.grating_period)
    power = np.abs(np.fft.fft2(target)) ** 2
    inside = power[np.ix_(np.abs(fy) < half, np.abs(fx) < half)].sum()
    if inside < min_fraction * power.sum():
        raise HologramConfigError(
            "target spectrum does not fit between diffraction orders; use a shorter grating period"
        )


def verify_first_order(holo: Hologram, target: ModeField) -> float:
    """|<target|first order>|^2 with both fields normalized on the SLM grid."""
    X, Y = holo.spec.mesh()
    t = target(X, Y)
    _check_window(t, holo.spec)
    r = first_order_field(holo)
    pr = np.sum(np.abs(r) ** 2)
    pt = np.sum(np.abs(t) ** 2)
    if pr <= 1e-20 * r.size or pt == 0:
        return 0.0
    return float(abs(np.vdot(t, r)) ** 2 / (pr * pt))


def write_pgm(holo: Hologram, path) -> Path:
    """Binary PGM (P5), 8-bit, row-major."""
    path = Path(path)
    gray = holo.to_gray()
    header = f"P5\n{holo.spec.width_px} {holo.spec.height_px}\n255\n".encode("ascii")
    path.write_bytes(header + gray.tobytes(order="C"))
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace() or data[pos : pos + 1] == b"#":
            if data[pos : pos + 1] == b"#":
                pos = data.index(b"\n", pos)
            pos += 1
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1
    if tokens[0] != b"P5" or int(tokens[3]) != 255:
        raise ValueError("not an 8-bit binary PGM")
    w, h = int(tokens[1]), int(tokens[2])
    return np.frombuffer(data[pos : pos + w * h], dtype=np.uint8).reshape(h, w)


def write_sidecar(holo: Hologram, path, provenance: dict | None = None) -> Path:
    path = Path(path)
    doc = {"slm": asdict(holo.spec), "encoding": "blaze-depth", "provenance": provenance or {}}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
