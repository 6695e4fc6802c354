"""CHSH test with first-order HG superposition projectors and Poisson counting noise.

Each arm projects onto ``(e^{i t}|HG01> + e^{-i t}|HG10>) / sqrt(2)``.  A
correlation value E needs the coincidences at four orientations,
(a, b), (a + pi/2, b + pi/2), (a + pi/2, b) and (a, b + pi/2); the first two
count positively.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, NoiseSpecError, UndefinedCorrelationError
from .modes import FIRST_ORDER_HG
from .state import BiphotonState

HALF_PI = 0.5 * np.pi
CANONICAL_ANGLES = (0.0, np.pi / 4, np.pi / 8, 3 * np.pi / 8)


@dataclass(frozen=True)
class MeasurementSetting:
    theta_a: float
    theta_b: float

    def __post_init__(self):
        if not (np.isfinite(self.theta_a) and np.isfinite(self.theta_b)):
            raise DomainError("measurement angles must be finite")

    def reduced(self) -> tuple[float, float]:
        return float(np.mod(self.theta_a, 2 * np.pi)), float(np.mod(self.theta_b, 2 * np.pi))

    def orientations(self) -> list["MeasurementSetting"]:
        a, b = self.theta_a, self.theta_b
        return [
            MeasurementSetting(a, b),
            MeasurementSetting(a + HALF_PI, b + HALF_PI),
            MeasurementSetting(a + HALF_PI, b),
            MeasurementSetting(a, b + HALF_PI),
        ]


@dataclass(frozen=True)
class NoiseSpec:
    """Poisson counting model.

    ``mean_counts`` is the expected count per exposure at unit coincidence
    probability; each orientation is exposed ``exposures`` times and the
    counts are summed.  ``background`` is a flat accidental rate added per
    orientation and exposure.
    """

    mean_counts: float
    trials: int = 1000
    exposures: int = 3
    background: float = 0.0

    def __post_init__(self):
        if not (self.mean_counts > 0 and np.isfinite(self.mean_counts)):
            raise NoiseSpecError("mean_counts must be positive and finite")
        if self.trials < 1 or self.exposures < 1:
            raise NoiseSpecError("trials and exposures must be at least 1")
        if self.background < 0:
            raise NoiseSpecError("background rate must be nonnegative")

    def expected(self, probabilities) -> np.ndarray:
        p = np.asarray(probabilities, dtype=float)
        return self.exposures * (self.mean_counts * p + self.background)


@dataclass
class ChshRecord:
    """Outcome of one CHSH evaluation.

    ``settings`` is (theta_a, theta_a', theta_b, theta_b'); ``e_values`` follow
    the order E(a,b), E(a,b'), E(a',b), E(a',b').  In noise mode ``s`` is the
    trial mean, ``s_uncertainty`` the sample standard deviation and
    ``raw_counts`` has shape (trials, 4, 4).
    """

    settings: tuple[float, float, float, float]
    e_values: np.ndarray
    s: float
    s_uncertainty: float = 0.0
    s_propagated: float = 0.0
    raw_counts: np.ndarray | None = None
    s_samples: np.ndarray | None = field(default=None, repr=False)


def projector_state(theta: float) -> np.ndarray:
    """Measurement vector on (HG01, HG10)."""
    return np.array([np.exp(1j * theta), np.exp(-1j * theta)]) / np.sqrt(2.0)


def _first_order_block(state: BiphotonState) -> np.ndarray:
    return state.block(FIRST_ORDER_HG)


def coincidence_probability(state: BiphotonState, setting: MeasurementSetting) -> float:
    C = _first_order_block(state)
    amp = projector_state(setting.theta_a).conj() @ C @ projector_state(setting.theta_b).conj()
    return float(abs(amp) ** 2)


def _orientation_probs(C: np.ndarray, a: float, b: float) -> np.ndarray:
    pa = np.array([projector_state(a), projector_state(a + HALF_PI)]).conj()
    pb = np.array([projector_state(b), projector_state(b + HALF_PI)]).conj()
    amps = pa @ C @ pb.T  # [[(a,b), (a,b')], [(a',b), (a',b')]] with primes = +pi/2
    P = np.abs(amps) ** 2
    return np.array([P[0, 0], P[1, 1], P[1, 0], P[0, 1]])


def correlation_E(counts) -> float:
    """E from coincidences at (a,b), (a+pi/2,b+pi/2), (a+pi/2,b), (a,b+pi/2)."""
    c = np.asarray(counts, dtype=float)
    if c.shape != (4,) or np.any(c < 0):
        raise DomainError("correlation needs four nonnegative counts")
    D = c.sum()
    if D == 0:
        raise UndefinedCorrelationError("all four coincidence counts are zero")
    return float((c[0] + c[1] - c[2] - c[3]) / D)


def _pairs(angles):
    a, a2, b, b2 = angles
    return [(a, b), (a, b2), (a2, b), (a2, b2)]


_SIGNS = np.array([1.0, -1.0, 1.0, 1.0])


def propagated_sigma(expected_counts: np.ndarray) -> float:
    """First-order Poisson error on S from expected counts of shape (4, 4)."""
    N = np.asarray(expected_counts, dtype=float)
    D = N.sum(axis=1)
    E = (N[:, 0] + N[:, 1] - N[:, 2] - N[:, 3]) / D
    return float(np.sqrt(np.sum((1.0 - E**2) / D)))


def chsh_S(
    state: BiphotonState,
    angles: Sequence[float] = CANONICAL_ANGLES,
    noise: NoiseSpec | None = None,
    seed: int = 0,
) -> ChshRecord:
    """CHSH parameter S = E(a,b) - E(a,b') + E(a',b) + E(a',b').

    ``angles`` is (theta_a, theta_a', theta_b, theta_b').  Without noise the
    result is exact.  With noise every trial draws all sixteen orientation
    counts from its own child stream of ``seed``.
    """
    angles = tuple(float(t) for t in angles)
    if len(angles) != 4 or not np.all(np.isfinite(angles)):
        raise DomainError("need four finite angles (theta_a, theta_a', theta_b, theta_b')")
    pairs = _pairs(angles)
    if len(set(pairs)) != 4:
        raise DomainError("the four settings must be distinct")
    C = _first_order_block(state)
    probs = np.array([_orientation_probs(C, a, b) for a, b in pairs])

    if noise is None:
        E = np.array([correlation_E(p) for p in probs])
        return ChshRecord(angles, E, float(_SIGNS @ E))

    lam = noise.expected(probs)
    children = np.random.SeedSequence(seed).spawn(noise.trials)
    counts = np.empty((noise.trials, 4, 4), dtype=np.int64)
    for k, child in enumerate(children):
        counts[k] = np.random.default_rng(child).poisson(lam)
    D = counts.sum(axis=2)
    if np.any(D == 0):
        raise UndefinedCorrelationError("a trial recorded zero coincidences for one correlation")
    E_trials = (counts[:, :, 0] + counts[:, :, 1] - counts[:, :, 2] - counts[:, :, 3]) / D
    S_trials = E_trials @ _SIGNS
    std = float(np.std(S_trials, ddof=1)) if noise.trials > 1 else 0.0
    return ChshRecord(
        angles,
        E_trials.mean(axis=0),
        float(S_trials.mean()),
        std,
        propagated_sigma(lam),
        counts,
        S_trials,
    )


def counts_for_sigma(
    state: BiphotonState,
    target_sigma: float,
    angles: Sequence[float] = CANONICAL_ANGLES,
    exposures: int = 3,
) -> float:
    """``mean_counts`` that gives a propagated S uncertainty of ``target_sigma``.

    Exact when there is no background, since sigma scales as 1/sqrt(counts).
    """
    if target_sigma <= 0:
        raise NoiseSpecError("target sigma must be positive")
    C = _first_order_block(state)
    probs = np.array([_orientation_probs(C, a, b) for a, b in _pairs(angles)])
    sigma_unit = propagated_sigma(NoiseSpec(1.0, exposures=exposures).expected(probs))
    return (sigma_unit / target_sigma) ** 2


@dataclass
class ChshCurve:
    """Coincidences over a theta_b sweep for each theta_a.

    ``normalized[k, n]`` is the (a, b) coincidence divided by the
    four-orientation sum D at that setting; ``counts`` holds the raw
    orientation counts (or probabilities when noiseless), shape (K, N, 4).
    """

    theta_a: np.ndarray
    theta_b: np.ndarray
    normalized: np.ndarray
    counts: np.ndarray


def sweep(start: float = 0.0, stop: float = 2 * np.pi, points: int = 73) -> np.ndarray:
    if points < 2:
        raise DomainError("a theta_b sweep needs at least 2 points")
    return np.linspace(start, stop, points)


def chsh_curve(
    state: BiphotonState,
    theta_a_values: Sequence[float],
    theta_b_values: Sequence[float] | None = None,
    noise: NoiseSpec | None = None,
    seed: int = 0,
) -> ChshCurve:
    """Coincidence curves for the Bell-test figure, normalized by D per point.

    With noise, one realization (``noise.exposures`` summed) is drawn per
    (theta_a, theta_b) point from its own child stream.
    """
    ta = np.atleast_1d(np.asarray(theta_a_values, dtype=float))
    tb = sweep() if theta_b_values is None else np.asarray(theta_b_values, dtype=float)
    if tb.size < 2:
        raise DomainError("a theta_b sweep needs at least 2 points")
    if ta.size < 1:
        raise DomainError("need at least one theta_a value")
    C = _first_order_block(state)
    probs = np.array([[_orientation_probs(C, a, b) for b in tb] for a in ta])
    if noise is None:
        counts = probs
    else:
        lam = noise.expected(probs)
        children = np.random.SeedSequence(seed).spawn(ta.size * tb.size)
        flat = [np.random.default_rng(ch).poisson(l) for ch, l in zip(children, lam.reshape(-1, 4))]
        counts = np.array(flat, dtype=np.int64).reshape(probs.shape)
    D = counts.sum(axis=2)
    if np.any(D == 0):
        raise UndefinedCorrelationError("zero coincidences at every orientation of a sweep point")
    return ChshCurve(ta, tb, counts[:, :, 0] / D, counts)
