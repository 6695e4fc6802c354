"""SPDC mode coefficients as triple-overlap integrals.

For a thin crystal in the collinear, degenerate regime the biphoton
amplitude on signal mode s and idler mode t is

    C[s, t] = integral  pump(r) * conj(mode_s(r)) * conj(mode_t(r))  d^2 r

Every factor is a polynomial times a Gaussian, so the default Gauss-Hermite
rule absorbs the combined envelope ``exp(-(1/wp^2 + 2/ws^2) r^2)`` and is
exact once the node count exceeds half the polynomial degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DomainError
from .modes import HG, ModeField, ModeId, _hg_1d_poly, gauss_hermite_rule, mode_polynomial, mode_values
from .state import BiphotonState

GAUSS_HERMITE = "gauss-hermite"
RIEMANN = "riemann-grid"
SCHEMES = (GAUSS_HERMITE, RIEMANN)

# absolute tolerance in units of 1/downconverted_waist
CONVERGENCE_TOL = 1e-9


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = GAUSS_HERMITE
    nodes: int = 64

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if int(self.nodes) != self.nodes or self.nodes < 2:
            raise DomainError("quadrature needs at least 2 nodes per axis")


@dataclass(frozen=True)
class WaistConfig:
    """Pump and down-converted (signal = idler) waists, in one length unit."""

    pump: float = 1.0
    downconverted: float = 1.0

    def __post_init__(self):
        for name in ("pump", "downconverted"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} waist must be positive, got {v}")

    @property
    def ratio(self) -> float:
        return self.pump / self.downconverted


def _resolve_waists(pump: ModeField, waists: WaistConfig | None) -> WaistConfig:
    if waists is None:
        return WaistConfig(pump.waist, pump.waist)
    if not math.isclose(pump.waist, waists.pump, rel_tol=1e-12):
        raise DomainError(f"pump field waist {pump.waist} differs from configured pump waist {waists.pump}")
    return waists


def _all_hg(pump: ModeField, modes: Sequence[ModeId]) -> bool:
    return all(m.family == HG for m in pump.modes) and all(m.family == HG for m in modes)


def _gh_separable(pump: ModeField, modes: Sequence[ModeId], waists: WaistConfig, n: int) -> np.ndarray:
    # one 1D table I[k, i, m] = int u_k(x; wp) u_i(x; ws) u_m(x; ws) dx serves both axes
    wp, ws = waists.pump, waists.downconverted
    x, w = gauss_hermite_rule(n, 1.0 / wp**2 + 2.0 / ws**2)
    kmax = max(max(m.a, m.b) for m in pump.modes)
    nmax = max(max(m.a, m.b) for m in modes)
    P = np.array([_hg_1d_poly(k, x, wp) for k in range(kmax + 1)])
    S = np.array([_hg_1d_poly(i, x, ws) for i in range(nmax + 1)])
    table = np.einsum("n,kn,in,mn->kim", w, P, S, S)
    ix = np.array([m.a for m in modes])
    iy = np.array([m.b for m in modes])
    C = np.zeros((len(modes), len(modes)), dtype=complex)
    for mode, c in pump.terms:
        C += c * table[mode.a][np.ix_(ix, ix)] * table[mode.b][np.ix_(iy, iy)]
    return C


def _gh_2d(pump: ModeField, modes: Sequence[ModeId], waists: WaistConfig, n: int) -> np.ndarray:
    wp, ws = waists.pump, waists.downconverted
    x, w = gauss_hermite_rule(n, 1.0 / wp**2 + 2.0 / ws**2)
    X, Y = np.meshgrid(x, x, indexing="xy")
    W = np.outer(w, w).ravel()
    P = pump.polynomial(X, Y).ravel()
    A = np.array([np.conj(mode_polynomial(m, ws, X, Y)).ravel() for m in modes])
    return (A * (W * P)) @ A.T


def _riemann(pump: ModeField, modes: Sequence[ModeId], waists: WaistConfig, n: int) -> np.ndarray:
    # brute-force midpoint sum of the full fields, one mode array at a time
    L = 5.0 * max(waists.pump, waists.downconverted)
    h = 2.0 * L / n
    axis = -L + h * (np.arange(n) + 0.5)
    X, Y = np.meshgrid(axis, axis, indexing="xy")
    P = pump(X, Y) * (h * h)
    fields = [np.conj(mode_values(m, waists.downconverted, X, Y)) for m in modes]
    del X, Y
    K = len(modes)
    C = np.zeros((K, K), dtype=complex)
    for s in range(K):
        Ps = P * fields[s]
        for t in range(s, K):
            C[s, t] = np.sum(Ps * fields[t])
    return C


def _raw_tensor(pump, modes, waists, scheme, n) -> np.ndarray:
    if scheme == GAUSS_HERMITE:
        if _all_hg(pump, modes):
            C = _gh_separable(pump, modes, waists, n)
        else:
            C = _gh_2d(pump, modes, waists, n)
    else:
        C = _riemann(pump, modes, waists, n)
    # upper triangle is authoritative; mirror it so exchange symmetry is exact
    return np.triu(C) + np.triu(C, 1).T


def coefficient_tensor(
    pump: ModeField,
    mode_set: Sequence[ModeId],
    waists: WaistConfig | None = None,
    quad: QuadratureSpec = QuadratureSpec(),
    check: bool = True,
) -> BiphotonState:
    """Raw (unnormalized) biphoton coefficients over ``mode_set`` for both photons.

    With ``check`` the tensor is recomputed at half the node count and a
    :class:`ConvergenceError` names the worst entry if the two disagree.
    """
    mode_set = tuple(mode_set)
    if not mode_set:
        raise DomainError("mode set is empty")
    if len(set(mode_set)) != len(mode_set):
        raise DomainError("mode set contains duplicates")
    waists = _resolve_waists(pump, waists)
    C = _raw_tensor(pump, mode_set, waists, quad.scheme, quad.nodes)
    if check:
        coarse = _raw_tensor(pump, mode_set, waists, quad.scheme, max(quad.nodes // 2, 1))
        diff = np.abs(C - coarse)
        k = int(np.argmax(diff))
        if diff.flat[k] > CONVERGENCE_TOL / waists.downconverted:
            s, t = divmod(k, len(mode_set))
            raise ConvergenceError(
                complex(coarse.flat[k]), complex(C.flat[k]), (mode_set[s].label, mode_set[t].label)
            )
    return BiphotonState(mode_set, C, normalized=False)


def coefficient(
    pump: ModeField,
    signal: ModeId,
    idler: ModeId,
    waists: WaistConfig | None = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> complex:
    """Single coefficient C[signal, idler]."""
    modes = (signal,) if signal == idler else (signal, idler)
    state = coefficient_tensor(pump, modes, waists, quad)
    return state.amplitude(signal, idler)


def oracle_tensor(
    pump: ModeField,
    mode_set: Sequence[ModeId],
    waists: WaistConfig | None = None,
    nodes: int = 1024,
) -> np.ndarray:
    """Midpoint Riemann sum of the full fields on a ``nodes``^2 grid.

    Independent of the polynomial/Gauss-Hermite path; intended for tests.
    """
    waists = _resolve_waists(pump, waists)
    C = _riemann(pump, tuple(mode_set), waists, nodes)
    return np.triu(C) + np.triu(C, 1).T


def oracle_coefficient(
    pump: ModeField,
    signal: ModeId,
    idler: ModeId,
    waists: WaistConfig | None = None,
    nodes: int = 1024,
) -> complex:
    modes = (signal,) if signal == idler else (signal, idler)
    C = oracle_tensor(pump, modes, waists, nodes)
    return complex(C[modes.index(signal), modes.index(idler)])
