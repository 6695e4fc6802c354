"""Hermite-Gaussian and Laguerre-Gaussian transverse modes at the waist plane.

Every mode is normalized to unit L2 norm over the transverse plane.  HG modes
use the x-order ``i`` and y-order ``j``; LG modes use the radial index ``p``
and azimuthal index ``l``.  Gouy and curvature phases are not modelled.

LG phase convention: ``LG(p=0, l=+1) = (HG10 + i HG01) / sqrt(2)``, which is
what the standard closed form with ``exp(i l phi)`` gives for this HG
normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import eval_genlaguerre, eval_hermite

from .errors import BasisMismatchError, DegenerateInputError, DomainError

HG = "HG"
LG = "LG"
FAMILIES = (HG, LG)


@dataclass(frozen=True, order=True)
class ModeId:
    """Transverse mode label.

    For ``HG`` the indices are (x-order, y-order); for ``LG`` they are
    (radial p, azimuthal l).
    """

    family: str
    a: int
    b: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown mode family {self.family!r}")
        if int(self.a) != self.a or int(self.b) != self.b:
            raise DomainError(f"mode indices must be integers, got {self.a}, {self.b}")
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "b", int(self.b))
        if self.family == HG and (self.a < 0 or self.b < 0):
            raise DomainError(f"negative HG order in {self.label}")
        if self.family == LG and self.a < 0:
            raise DomainError(f"negative LG radial index in {self.label}")

    @property
    def order(self) -> int:
        if self.family == HG:
            return self.a + self.b
        return 2 * self.a + abs(self.b)

    @property
    def label(self) -> str:
        if self.family == HG:
            return f"HG_{self.a}_{self.b}"
        return f"LG_{self.a}_{self.b:+d}"

    @classmethod
    def from_label(cls, label: str) -> "ModeId":
        try:
            family, a, b = label.strip().split("_")
            return cls(family.upper(), int(a), int(b))
        except ValueError as exc:
            raise DomainError(f"cannot parse mode label {label!r}") from exc

    def __str__(self):
        return self.label


def hg(i: int, j: int) -> ModeId:
    return ModeId(HG, i, j)


def lg(p: int, l: int) -> ModeId:
    return ModeId(LG, p, l)


# qubit labelling: |0> = HG01, |1> = HG10 and |0> = LG(l=+1), |1> = LG(l=-1)
FIRST_ORDER_HG = (hg(0, 1), hg(1, 0))
FIRST_ORDER_LG = (lg(0, 1), lg(0, -1))


def first_order_modes(basis: str) -> tuple[ModeId, ModeId]:
    if basis == HG:
        return FIRST_ORDER_HG
    if basis == LG:
        return FIRST_ORDER_LG
    raise DomainError(f"unknown basis {basis!r}")


def modes_up_to_order(max_order: int, family: str = HG) -> list[ModeId]:
    """All modes of one family with total order <= ``max_order``, sorted by order."""
    out = []
    for n in range(max_order + 1):
        if family == HG:
            out.extend(hg(n - j, j) for j in range(n + 1))
        elif family == LG:
            for l in range(n, -n - 1, -2):
                out.append(lg((n - abs(l)) // 2, l))
        else:
            raise DomainError(f"unknown mode family {family!r}")
    return out


@dataclass(frozen=True)
class GridSpec:
    """Square cell-centred sampling grid on [-half_width, half_width]^2."""

    half_width: float
    samples: int = 256

    def __post_init__(self):
        if not self.half_width > 0:
            raise DomainError("grid half-width must be positive")
        if self.samples < 2:
            raise DomainError("grid needs at least 2 samples per axis")

    @classmethod
    def for_waist(cls, waist: float, samples: int = 256) -> "GridSpec":
        return cls(5.0 * waist, samples)

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.samples

    def axis(self) -> np.ndarray:
        h = self.step
        return -self.half_width + h * (np.arange(self.samples) + 0.5)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.axis()
        return np.meshgrid(x, x, indexing="xy")


def _check_waist(waist: float) -> float:
    waist = float(waist)
    if not waist > 0 or not math.isfinite(waist):
        raise DomainError(f"waist must be positive and finite, got {waist}")
    return waist


def _hg_1d_poly(n: int, u: np.ndarray, waist: float) -> np.ndarray:
    # 1D HG factor without its exp(-u^2/w^2) envelope
    norm = (2.0 / np.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n) * waist)
    return norm * eval_hermite(n, np.sqrt(2.0) * u / waist)


def mode_polynomial(mode: ModeId, waist: float, x, y) -> np.ndarray:
    """Mode amplitude divided by its Gaussian envelope ``exp(-r^2/w^2)``.

    This is a polynomial in (x, y), which is what the Gauss-Hermite
    quadratures integrate.
    """
    waist = _check_waist(waist)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if mode.family == HG:
        return _hg_1d_poly(mode.a, x, waist) * _hg_1d_poly(mode.b, y, waist)
    p, l = mode.a, mode.b
    m = abs(l)
    norm = math.sqrt(2.0 * math.factorial(p) / (np.pi * math.factorial(p + m))) / waist
    # (sqrt(2) r / w)^|l| exp(i l phi) written without phi to stay regular at r = 0
    z = (x + 1j * np.sign(l) * y) if l else np.ones_like(x, dtype=complex)
    radial = (np.sqrt(2.0) / waist) ** m * z**m
    rho = 2.0 * (x**2 + y**2) / waist**2
    return norm * radial * eval_genlaguerre(p, m, rho)


def mode_values(mode: ModeId, waist: float, x, y) -> np.ndarray:
    """Normalized mode amplitude on broadcastable coordinate arrays."""
    waist = _check_waist(waist)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return mode_polynomial(mode, waist, x, y) * np.exp(-(x**2 + y**2) / waist**2)


def evaluate_mode(mode: ModeId, waist: float, points) -> np.ndarray:
    """Evaluate a normalized mode at a list of (x, y) positions.

    Returns a complex array with one amplitude per point.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise DomainError("positions must be finite")
    return mode_values(mode, waist, pts[:, 0], pts[:, 1]).astype(complex)


@lru_cache(maxsize=64)
def _hermgauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = hermgauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_hermite_rule(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals of f(x) exp(-alpha x^2) over the real line."""
    t, w = _hermgauss(int(n))
    s = math.sqrt(alpha)
    return t / s, w / s


def mode_overlap(a: ModeId, b: ModeId, waist_a: float = 1.0, waist_b: float | None = None) -> complex:
    """Inner product <a|b> computed exactly by Gauss-Hermite quadrature."""
    waist_a = _check_waist(waist_a)
    waist_b = waist_a if waist_b is None else _check_waist(waist_b)
    alpha = 1.0 / waist_a**2 + 1.0 / waist_b**2
    n = max(8, (a.order + b.order) // 2 + 2)
    x, w = gauss_hermite_rule(n, alpha)
    X, Y = np.meshgrid(x, x, indexing="xy")
    W = np.outer(w, w)
    pa = mode_polynomial(a, waist_a, X, Y)
    pb = mode_polynomial(b, waist_b, X, Y)
    return complex(np.sum(W * np.conj(pa) * pb))


def gram_matrix(modes: Sequence[ModeId], waist: float = 1.0) -> np.ndarray:
    n = len(modes)
    G = np.empty((n, n), dtype=complex)
    for k in range(n):
        for l in range(k, n):
            G[k, l] = mode_overlap(modes[k], modes[l], waist)
            G[l, k] = np.conj(G[k, l])
    return G


def hg_to_lg_first_order() -> np.ndarray:
    """First-order change-of-basis matrix between {HG01, HG10} and {LG+1, LG-1}.

    Row k lists the HG components of LG mode k, i.e. ``U[k, l] = <HG_l|LG_k>``
    with HG order (HG01, HG10) and LG order (l=+1, l=-1).  Coefficients of a
    one-photon state therefore transform as ``c_lg = U.conj() @ c_hg``.
    """
    return np.array([[1j, 1.0], [-1j, 1.0]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class ModeField:
    """Normalized superposition of modes sharing one waist.

    ``terms`` holds the already-renormalized weights; ``norm`` is the L2 norm
    of the weighted sum before renormalization.
    """

    terms: tuple[tuple[ModeId, complex], ...]
    waist: float
    norm: float = 1.0

    def __post_init__(self):
        _check_waist(self.waist)
        if not self.terms:
            raise DegenerateInputError("field has no terms")

    @property
    def mode(self) -> ModeId:
        if len(self.terms) != 1:
            raise BasisMismatchError("field is a superposition, not a single mode")
        return self.terms[0][0]

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(m for m, _ in self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=complex)

    @property
    def family(self) -> str | None:
        fams = {m.family for m in self.modes}
        return fams.pop() if len(fams) == 1 else None

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for mode, c in self.terms:
            out += c * mode_values(mode, self.waist, x, y)
        return out

    def polynomial(self, x, y) -> np.ndarray:
        out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=complex)
        for mode, c in self.terms:
            out += c * mode_polynomial(mode, self.waist, x, y)
        return out

    def on_grid(self, grid: GridSpec) -> np.ndarray:
        X, Y = grid.mesh()
        return self(X, Y)

    def overlap(self, mode: ModeId) -> complex:
        """<mode|field> at the field's waist."""
        return complex(sum(c * mode_overlap(mode, m, self.waist) for m, c in self.terms))


def mode_field(mode: ModeId, waist: float) -> ModeField:
    return ModeField(((mode, 1.0 + 0j),), _check_waist(waist))


def superpose(terms: Iterable[tuple[ModeId, complex]], waist: float) -> ModeField:
    """Weighted sum of modes renormalized to unit L2 norm.

    Repeated or non-orthogonal constituents are handled through their Gram
    matrix, so the reported norm is exact.
    """
    waist = _check_waist(waist)
    terms = [(m, complex(c)) for m, c in terms]
    if not terms:
        raise DegenerateInputError("superposition needs at least one term")
    modes = [m for m, _ in terms]
    w = np.array([c for _, c in terms])
    scale = float(np.sum(np.abs(w) ** 2))
    norm2 = float(np.real(np.conj(w) @ gram_matrix(modes, waist) @ w))
    if scale == 0.0 or norm2 <= 1e-24 * scale:
        raise DegenerateInputError("superposition weights cancel to a zero field")
    norm = math.sqrt(norm2)
    return ModeField(tuple((m, c / norm) for m, c in terms), waist, norm)
