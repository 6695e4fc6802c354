"""Run configuration: a single JSON document, parsed into typed settings.

Precedence is defaults < config file < command-line flags.  Complex weights
are written as ``[re, im]``; a bare number is accepted on input.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any

from .chsh import CANONICAL_ANGLES, NoiseSpec
from .errors import SpdcError
from .hologram import SlmSpec
from .modes import FAMILIES, HG, ModeId, hg
from .overlap import QuadratureSpec, WaistConfig
from .state import BELL_NAMES

MAX_SEED = 2**64 - 1


class ConfigError(SpdcError, ValueError):
    """Invalid configuration; ``where`` names the offending field or line."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class ChshConfig:
    angles: tuple[float, float, float, float] = CANONICAL_ANGLES
    curve_theta_a: tuple[float, ...] = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8)
    sweep_start: float = 0.0
    sweep_stop: float = 2 * math.pi
    sweep_points: int = 73


@dataclass(frozen=True)
class DesignConfig:
    target: str = "PsiPlus"
    coefficients: tuple[complex, ...] | None = None
    basis: str = HG
    pump_order: int = 2
    regularization: float = 1e-12


@dataclass(frozen=True)
class RunConfig:
    pump: tuple[tuple[ModeId, complex], ...] = ((hg(1, 1), 1 + 0j),)
    # lengths in mm; equal down-converted waist unless configured
    waists: WaistConfig = WaistConfig(0.87, 0.87)
    quadrature: QuadratureSpec = QuadratureSpec()
    basis: str = HG
    truncation_order: int = 1
    noise: NoiseSpec | None = None
    seed: int = 0
    chsh: ChshConfig = ChshConfig()
    design: DesignConfig = DesignConfig()
    slm: SlmSpec = SlmSpec()


def _complex_out(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


def _complex_in(v: Any, where: str) -> complex:
    if isinstance(v, bool):
        raise ConfigError(where, "expected a number or [re, im]")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(v[0], v[1])
    raise ConfigError(where, "expected a number or [re, im]")


def to_dict(cfg: RunConfig) -> dict:
    """JSON-ready form; ``from_dict(to_dict(c)) == c``."""
    return {
        "pump": [
            {"family": m.family, "a": m.a, "b": m.b, "weight": _complex_out(c)} for m, c in cfg.pump
        ],
        "waists": {"pump": cfg.waists.pump, "downconverted": cfg.waists.downconverted},
        "quadrature": {"scheme": cfg.quadrature.scheme, "nodes": cfg.quadrature.nodes},
        "basis": cfg.basis,
        "truncation_order": cfg.truncation_order,
        "noise": None if cfg.noise is None else asdict(cfg.noise),
        "seed": cfg.seed,
        "chsh": {
            "angles": list(cfg.chsh.angles),
            "curve_theta_a": list(cfg.chsh.curve_theta_a),
            "sweep_start": cfg.chsh.sweep_start,
            "sweep_stop": cfg.chsh.sweep_stop,
            "sweep_points": cfg.chsh.sweep_points,
        },
        "design": {
            "target": cfg.design.target,
            "coefficients": None
            if cfg.design.coefficients is None
            else [_complex_out(c) for c in cfg.design.coefficients],
            "basis": cfg.design.basis,
            "pump_order": cfg.design.pump_order,
            "regularization": cfg.design.regularization,
        },
        "slm": asdict(cfg.slm),
    }


def _section(doc: dict, key: str) -> dict:
    v = doc.get(key, {})
    if v is None:
        return {}
    if not isinstance(v, dict):
        raise ConfigError(key, "expected an object")
    return v


def _unknown(doc: dict, allowed, where: str) -> None:
    extra = set(doc) - set(allowed)
    if extra:
        raise ConfigError(where, f"unknown field(s) {sorted(extra)}")


def _build(where: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ConfigError:
        raise
    except (SpdcError, TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from exc


def _int(v, where: str, lo: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(where, "expected an integer")
    if lo is not None and v < lo:
        raise ConfigError(where, f"must be >= {lo}")
    return v


def _float(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(where, "expected a finite number")
    return float(v)


def _basis(v, where: str) -> str:
    if v not in FAMILIES:
        raise ConfigError(where, f"basis must be one of {FAMILIES}")
    return v


def from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    base = RunConfig()
    _unknown(doc, to_dict(base).keys(), "<root>")

    pump = base.pump
    if "pump" in doc:
        raw = doc["pump"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("pump", "expected a non-empty list of modes")
        terms = []
        for k, t in enumerate(raw):
            where = f"pump[{k}]"
            if not isinstance(t, dict):
                raise ConfigError(where, "expected an object with family, a, b, weight")
            _unknown(t, ("family", "a", "b", "weight"), where)
            mode = _build(
                where,
                ModeId,
                family=t.get("family", HG),
                a=_int(t.get("a"), where + ".a"),
                b=_int(t.get("b"), where + ".b"),
            )
            terms.append((mode, _complex_in(t.get("weight", 1.0), where + ".weight")))
        if all(c == 0 for _, c in terms):
            raise ConfigError("pump", "all weights are zero")
        pump = tuple(terms)

    w = _section(doc, "waists")
    _unknown(w, ("pump", "downconverted"), "waists")
    waists = _build(
        "waists",
        WaistConfig,
        pump=_float(w.get("pump", base.waists.pump), "waists.pump"),
        downconverted=_float(w.get("downconverted", base.waists.downconverted), "waists.downconverted"),
    )

    q = _section(doc, "quadrature")
    _unknown(q, ("scheme", "nodes"), "quadrature")
    quad = _build(
        "quadrature",
        QuadratureSpec,
        scheme=q.get("scheme", base.quadrature.scheme),
        nodes=_int(q.get("nodes", base.quadrature.nodes), "quadrature.nodes", 2),
    )

    noise = None
    if doc.get("noise") is not None:
        n = _section(doc, "noise")
        _unknown(n, ("mean_counts", "trials", "exposures", "background"), "noise")
        if "mean_counts" not in n:
            raise ConfigError("noise.mean_counts", "required when noise is enabled")
        noise = _build(
            "noise",
            NoiseSpec,
            mean_counts=_float(n["mean_counts"], "noise.mean_counts"),
            trials=_int(n.get("trials", 1000), "noise.trials", 1),
            exposures=_int(n.get("exposures", 3), "noise.exposures", 1),
            background=_float(n.get("background", 0.0), "noise.background"),
        )

    seed = _int(doc.get("seed", base.seed), "seed", 0)
    if seed > MAX_SEED:
        raise ConfigError("seed", "must fit in 64 bits")

    c = _section(doc, "chsh")
    _unknown(c, to_dict(base)["chsh"].keys(), "chsh")
    angles = c.get("angles", list(base.chsh.angles))
    if not isinstance(angles, list) or len(angles) != 4:
        raise ConfigError("chsh.angles", "expected four angles [a, a', b, b']")
    curve = c.get("curve_theta_a", list(base.chsh.curve_theta_a))
    if not isinstance(curve, list) or not curve:
        raise ConfigError("chsh.curve_theta_a", "expected a non-empty list")
    chsh = ChshConfig(
        tuple(_float(a, f"chsh.angles[{k}]") for k, a in enumerate(angles)),
        tuple(_float(a, f"chsh.curve_theta_a[{k}]") for k, a in enumerate(curve)),
        _float(c.get("sweep_start", base.chsh.sweep_start), "chsh.sweep_start"),
        _float(c.get("sweep_stop", base.chsh.sweep_stop), "chsh.sweep_stop"),
        _int(c.get("sweep_points", base.chsh.sweep_points), "chsh.sweep_points", 2),
    )

    d = _section(doc, "design")
    _unknown(d, to_dict(base)["design"].keys(), "design")
    target = d.get("target", base.design.target)
    if target not in BELL_NAMES + ("custom",):
        raise ConfigError("design.target", f"must be one of {BELL_NAMES + ('custom',)}")
    coeffs = d.get("coefficients")
    if coeffs is not None:
        if not isinstance(coeffs, list) or len(coeffs) != 4:
            raise ConfigError("design.coefficients", "expected four coefficients (C0101, C0110, C1001, C1010)")
        coeffs = tuple(_complex_in(v, f"design.coefficients[{k}]") for k, v in enumerate(coeffs))
        if all(v == 0 for v in coeffs):
            raise ConfigError("design.coefficients", "target vector is zero")
    if target == "custom" and coeffs is None:
        raise ConfigError("design.coefficients", "required for a custom target")
    reg = _float(d.get("regularization", base.design.regularization), "design.regularization")
    if reg < 0:
        raise ConfigError("design.regularization", "must be nonnegative")
    design = DesignConfig(
        target,
        coeffs,
        _basis(d.get("basis", base.design.basis), "design.basis"),
        _int(d.get("pump_order", base.design.pump_order), "design.pump_order", 0),
        reg,
    )

    s = _section(doc, "slm")
    _unknown(s, asdict(base.slm).keys(), "slm")
    slm_kwargs = {**asdict(base.slm), **s}
    slm = _build(
        "slm",
        SlmSpec,
        width_px=_int(slm_kwargs["width_px"], "slm.width_px", 1),
        height_px=_int(slm_kwargs["height_px"], "slm.height_px", 1),
        pixel_pitch=_float(slm_kwargs["pixel_pitch"], "slm.pixel_pitch"),
        grating_period=_float(slm_kwargs["grating_period"], "slm.grating_period"),
        phase_levels=_int(slm_kwargs["phase_levels"], "slm.phase_levels", 2),
    )

    return RunConfig(
        pump=pump,
        waists=waists,
        quadrature=quad,
        basis=_basis(doc.get("basis", base.basis), "basis"),
        truncation_order=_int(doc.get("truncation_order", base.truncation_order), "truncation_order", 1),
        noise=noise,
        seed=seed,
        chsh=chsh,
        design=design,
        slm=slm,
    )


def loads(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    return from_dict(doc)


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from exc
    return loads(text)


def dumps(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2, sort_keys=True) + "\n"


def override(cfg: RunConfig, **flags) -> RunConfig:
    """Apply command-line overrides; ``None`` values are ignored."""
    changes = {}
    if flags.get("seed") is not None:
        if not 0 <= flags["seed"] <= MAX_SEED:
            raise ConfigError("--seed", "must be a 64-bit unsigned integer")
        changes["seed"] = flags["seed"]
    if flags.get("basis") is not None:
        changes["basis"] = _basis(flags["basis"], "--basis")
    if flags.get("noise_counts") is not None:
        base = cfg.noise or NoiseSpec(1.0)
        changes["noise"] = _build(
            "--noise-counts",
            NoiseSpec,
            mean_counts=flags["noise_counts"],
            trials=base.trials,
            exposures=base.exposures,
            background=base.background,
        )
    if flags.get("target") is not None:
        if flags["target"] not in BELL_NAMES:
            raise ConfigError("--target", f"must be one of {BELL_NAMES}")
        changes["design"] = replace(cfg.design, target=flags["target"], coefficients=None)
    return replace(cfg, **changes)
