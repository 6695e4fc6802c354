"""Command-line entry point.

Subcommands write plot-ready CSV/JSON (and PGM for holograms) into
``--out-dir``.  Exit codes: 0 success, 2 configuration or input error,
3 numerical error (quadrature convergence, ill-posed design).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .chsh import chsh_curve, chsh_S
from .config import ConfigError, RunConfig, load, override, to_dict
from .design import DesignProblem, solve
from .errors import ConvergenceError, IllPosedDesignError, SpdcError
from .hologram import encode, verify_first_order, write_pgm, write_sidecar
from .modes import HG, LG, first_order_modes, hg_to_lg_first_order, modes_up_to_order, superpose
from .overlap import coefficient_tensor
from .state import (
    BiphotonState,
    DegenerateSubspaceError,
    bell_state,
    change_basis_two_photon,
    classify,
    coincidence_spectrum,
    renormalize,
    state_from_matrix,
)

log = logging.getLogger("spdcbell")

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(v: float) -> str:
    """Decimal with 12 significant digits; negative zero printed as 0."""
    v = float(v)
    if v == 0.0:
        v = 0.0
    return f"{v:.12g}"


def _cplx(c) -> list[float]:
    return [float(np.real(c)), float(np.imag(c))]


def _write_json(path: Path, doc: dict) -> Path:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", newline="\n")
    return path


def _write_csv(path: Path, rows: list[list[str]], cfg: RunConfig) -> Path:
    lines = ["# config: " + json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))]
    lines += [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def _pump(cfg: RunConfig):
    return superpose(cfg.pump, cfg.waists.pump)


def _state_json(state: BiphotonState) -> dict:
    return {
        "modes": [m.label for m in state.mode_set],
        "coefficients": [[_cplx(c) for c in row] for row in state.coefficients],
    }


def _verdict_json(state: BiphotonState, basis: str) -> dict:
    v = classify(state, basis)
    return {"nearest_bell": v.nearest_bell, "fidelity": v.fidelity, "basis": v.basis}


def first_order_state(cfg: RunConfig, basis: str = HG) -> BiphotonState:
    """Pump output renormalized over the first-order subspace of ``basis``."""
    modes = first_order_modes(basis)
    raw = coefficient_tensor(_pump(cfg), modes, cfg.waists, cfg.quadrature)
    return renormalize(raw, modes)


def cmd_spectrum(cfg: RunConfig, out_dir: Path) -> dict[str, Path]:
    modes = modes_up_to_order(cfg.truncation_order, cfg.basis)
    state = coefficient_tensor(_pump(cfg), modes, cfg.waists, cfg.quadrature)
    spec = coincidence_spectrum(state, modes)
    rows = [["A\\B"] + [m.label for m in modes]]
    rows += [[m.label] + [fmt(v) for v in spec[k]] for k, m in enumerate(modes)]
    doc = {"config": to_dict(cfg), "basis": cfg.basis, "modes": [m.label for m in modes], "total": float(spec.sum())}
    try:
        fo = renormalize(state, first_order_modes(cfg.basis))
        doc["first_order"] = {"state": _state_json(fo), "verdict": _verdict_json(fo, cfg.basis)}
    except DegenerateSubspaceError:
        doc["first_order"] = None
    return {
        "csv": _write_csv(out_dir / "spectrum.csv", rows, cfg),
        "json": _write_json(out_dir / "spectrum.json", doc),
    }


def cmd_chsh(cfg: RunConfig, out_dir: Path) -> dict[str, Path]:
    state = first_order_state(cfg, HG)
    rec = chsh_S(state, cfg.chsh.angles, cfg.noise, cfg.seed)
    tb = np.linspace(cfg.chsh.sweep_start, cfg.chsh.sweep_stop, cfg.chsh.sweep_points)
    curve = chsh_curve(state, cfg.chsh.curve_theta_a, tb, cfg.noise, cfg.seed)
    rows = [["theta_a", "theta_b", "normalized", "c_ab", "c_a'b'", "c_a'b", "c_ab'"]]
    for i, a in enumerate(curve.theta_a):
        for j, b in enumerate(curve.theta_b):
            rows.append([fmt(a), fmt(b), fmt(curve.normalized[i, j])] + [fmt(v) for v in curve.counts[i, j]])
    doc = {
        "config": to_dict(cfg),
        "seed": cfg.seed,
        "settings": list(rec.settings),
        "E": [float(e) for e in rec.e_values],
        "S": rec.s,
        "S_uncertainty": rec.s_uncertainty,
        "S_propagated": rec.s_propagated,
        "noise": cfg.noise is not None,
        "state": _state_json(state),
    }
    return {
        "csv": _write_csv(out_dir / "chsh_curve.csv", rows, cfg),
        "json": _write_json(out_dir / "chsh.json", doc),
    }


def design_target(cfg: RunConfig) -> BiphotonState:
    d = cfg.design
    if d.target == "custom":
        return state_from_matrix(first_order_modes(d.basis), np.reshape(d.coefficients, (2, 2)))
    return bell_state(d.target, d.basis)


def _hologram_files(field, cfg: RunConfig, out_dir: Path, stem: str, provenance: dict) -> dict[str, Path]:
    holo = encode(field, cfg.slm)
    fidelity = verify_first_order(holo, field)
    provenance = {**provenance, "first_order_fidelity": fidelity, "config": to_dict(cfg)}
    return {
        "pgm": write_pgm(holo, out_dir / f"{stem}.pgm"),
        "pgm_json": write_sidecar(holo, out_dir / f"{stem}.json", provenance),
    }


def cmd_design(cfg: RunConfig, out_dir: Path, hologram: bool = False) -> dict[str, Path]:
    target = design_target(cfg)
    problem = DesignProblem(
        target,
        tuple(modes_up_to_order(cfg.design.pump_order, HG)),
        cfg.waists,
        cfg.design.regularization,
        cfg.quadrature,
    )
    sol = solve(problem)
    weights = [{"mode": m.label, "weight": _cplx(c)} for m, c in sol.as_terms()]
    doc = {
        "config": to_dict(cfg),
        "target": _state_json(target),
        "pump_weights": weights,
        "achieved_fidelity": sol.achieved_fidelity,
        "residual": sol.residual,
        "conditioning": sol.conditioning,
        "rank": sol.rank,
        "leakage": sol.leakage,
        "reachable": sol.reachable,
    }
    out = {"json": _write_json(out_dir / "design.json", doc)}
    if hologram:
        if not sol.reachable:
            log.warning("target not reachable with this pump basis; no hologram written")
        else:
            field = superpose(sol.as_terms(), cfg.waists.pump)
            out.update(
                _hologram_files(field, cfg, out_dir, "design_hologram", {"pump_weights": weights, "waist": cfg.waists.pump})
            )
    return out


def cmd_hologram(cfg: RunConfig, out_dir: Path) -> dict[str, Path]:
    weights = [{"mode": m.label, "weight": _cplx(c)} for m, c in cfg.pump]
    return _hologram_files(_pump(cfg), cfg, out_dir, "hologram", {"pump_weights": weights, "waist": cfg.waists.pump})


def cmd_convert(cfg: RunConfig, out_dir: Path) -> dict[str, Path]:
    U = hg_to_lg_first_order()
    hg_state = first_order_state(cfg, HG)
    lg_state = change_basis_two_photon(hg_state, U)
    doc = {
        "config": to_dict(cfg),
        "convention": "LG(l=+1) = (HG10 + i HG01)/sqrt(2); U[k, l] = <HG_l|LG_k>; C_LG = conj(U) C_HG U^dagger",
        "U": [[_cplx(c) for c in row] for row in U],
        "hg": {"state": _state_json(hg_state), "verdict": _verdict_json(hg_state, HG)},
        "lg": {"state": _state_json(lg_state), "verdict": _verdict_json(lg_state, LG)},
    }
    return {"json": _write_json(out_dir / "convert.json", doc)}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int, help="64-bit unsigned seed (overrides config)")
    common.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    common.add_argument("--noise-counts", type=float, help="enable Poisson noise with this mean count rate")
    common.add_argument("--basis", choices=(HG, LG), help="measurement basis for spectra")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="spdcbell", description="Structured-pump SPDC Bell-state toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="coincidence spectrum of the pump's biphoton state")
    sub.add_parser("chsh", parents=[common], help="CHSH parameter and coincidence curves")
    p = sub.add_parser("design", parents=[common], help="inverse-design a pump for a target state")
    p.add_argument("--target", help="PhiPlus, PhiMinus, PsiPlus or PsiMinus (overrides config)")
    p.add_argument("--hologram", action="store_true", help="also write an SLM hologram for the design")
    sub.add_parser("hologram", parents=[common], help="SLM hologram for the configured pump")
    sub.add_parser("convert", parents=[common], help="first-order HG <-> LG report for the pump's state")
    return parser


def run(args: argparse.Namespace) -> dict[str, Path]:
    cfg = load(args.config) if args.config else RunConfig()
    cfg = override(
        cfg,
        seed=args.seed,
        basis=args.basis,
        noise_counts=args.noise_counts,
        target=getattr(args, "target", None),
    )
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.command == "spectrum":
        return cmd_spectrum(cfg, out_dir)
    if args.command == "chsh":
        return cmd_chsh(cfg, out_dir)
    if args.command == "design":
        return cmd_design(cfg, out_dir, args.hologram)
    if args.command == "hologram":
        return cmd_hologram(cfg, out_dir)
    return cmd_convert(cfg, out_dir)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        outputs = run(args)
    except (ConvergenceError, IllPosedDesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpdcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for name, path in outputs.items():
        log.info("wrote %s: %s", name, path)
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
