"""Truncated biphoton states, Bell-state classification and basis changes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BasisMismatchError,
    DegenerateInputError,
    DegenerateSubspaceError,
    DomainError,
    NonUnitaryError,
)
from .modes import HG, LG, ModeId, first_order_modes, mode_overlap

BELL_NAMES = ("PhiPlus", "PhiMinus", "PsiPlus", "PsiMinus")

_S = 1.0 / np.sqrt(2.0)
# two-qubit Bell vectors as 2x2 (signal, idler) coefficient matrices over (|0>, |1>)
_BELL_MATRICES = {
    "PhiPlus": np.array([[_S, 0.0], [0.0, _S]], dtype=complex),
    "PhiMinus": np.array([[_S, 0.0], [0.0, -_S]], dtype=complex),
    "PsiPlus": np.array([[0.0, _S], [_S, 0.0]], dtype=complex),
    "PsiMinus": np.array([[0.0, _S], [-_S, 0.0]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class BiphotonState:
    """Coefficient matrix ``C[s, i]`` over an ordered mode set.

    Rows index the signal (arm A) mode and columns the idler (arm B) mode.
    The array is stored read-only.
    """

    mode_set: tuple[ModeId, ...]
    coefficients: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        modes = tuple(self.mode_set)
        if len(set(modes)) != len(modes):
            raise DomainError("mode set contains duplicates")
        C = np.array(self.coefficients, dtype=complex)
        if C.shape != (len(modes), len(modes)):
            raise DomainError(f"coefficient shape {C.shape} does not match {len(modes)} modes")
        C.setflags(write=False)
        object.__setattr__(self, "mode_set", modes)
        object.__setattr__(self, "coefficients", C)

    def __len__(self):
        return len(self.mode_set)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))

    def index(self, mode: ModeId) -> int:
        try:
            return self.mode_set.index(mode)
        except ValueError:
            raise BasisMismatchError(f"{mode} not in state mode set") from None

    def amplitude(self, signal: ModeId, idler: ModeId) -> complex:
        return complex(self.coefficients[self.index(signal), self.index(idler)])

    def block(self, modes: Sequence[ModeId]) -> np.ndarray:
        idx = [self.index(m) for m in modes]
        return self.coefficients[np.ix_(idx, idx)].copy()

    def flat(self, modes: Sequence[ModeId] | None = None) -> np.ndarray:
        """Row-major flattening, e.g. (C0101, C0110, C1001, C1010) for first-order HG."""
        if modes is None:
            return self.coefficients.ravel().copy()
        return self.block(modes).ravel()

    def with_phase(self, phase: float) -> "BiphotonState":
        return BiphotonState(self.mode_set, self.coefficients * np.exp(1j * phase), self.normalized)

    @property
    def basis(self) -> str | None:
        fams = {m.family for m in self.mode_set}
        return fams.pop() if len(fams) == 1 else None


def state_from_matrix(modes: Sequence[ModeId], C, normalize: bool = True) -> BiphotonState:
    C = np.asarray(C, dtype=complex)
    if normalize:
        n = np.sqrt(np.sum(np.abs(C) ** 2))
        if n == 0:
            raise DegenerateInputError("zero coefficient matrix")
        C = C / n
    return BiphotonState(tuple(modes), C, normalized=normalize)


def bell_state(name: str, basis: str = HG) -> BiphotonState:
    if name not in _BELL_MATRICES:
        raise DomainError(f"unknown Bell state {name!r}; choose from {BELL_NAMES}")
    return BiphotonState(first_order_modes(basis), _BELL_MATRICES[name], normalized=True)


def renormalize(state: BiphotonState, subspace: Sequence[ModeId]) -> BiphotonState:
    """Restrict to ``subspace`` (for both photons) and rescale to unit norm."""
    subspace = tuple(subspace)
    block = state.block(subspace)
    n = np.sqrt(np.sum(np.abs(block) ** 2))
    if n == 0.0 or n < 1e-14 * max(state.norm, 1e-300):
        raise DegenerateSubspaceError(
            f"state has no weight on subspace {[m.label for m in subspace]}"
        )
    return BiphotonState(subspace, block / n, normalized=True)


def bell_fidelity(state: BiphotonState, target: str, basis: str = HG) -> float:
    """|<Bell|state>|^2 with qubits |0>, |1> taken from the first-order modes of ``basis``.

    The state is not renormalized here; weight outside the first-order
    block lowers the fidelity.
    """
    if target not in _BELL_MATRICES:
        raise DomainError(f"unknown Bell state {target!r}")
    block = state.block(first_order_modes(basis))
    amp = np.vdot(_BELL_MATRICES[target], block)
    return float(min(1.0, abs(amp) ** 2))


@dataclass(frozen=True)
class BellVerdict:
    nearest_bell: str
    fidelity: float
    basis: str


def classify(state: BiphotonState, basis: str | None = None, threshold: float = 0.5) -> BellVerdict:
    """Nearest Bell state; ``"none"`` unless its fidelity exceeds ``threshold``."""
    basis = basis or state.basis or HG
    fids = {name: bell_fidelity(state, name, basis) for name in BELL_NAMES}
    best = max(BELL_NAMES, key=lambda k: fids[k])
    name = best if fids[best] > threshold else "none"
    return BellVerdict(name, fids[best], basis)


def _check_unitary(U: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise NonUnitaryError(f"expected a 2x2 matrix, got shape {U.shape}")
    if np.linalg.norm(U @ U.conj().T - np.eye(2)) > tol:
        raise NonUnitaryError("change-of-basis matrix is not unitary")
    return U


def change_basis_two_photon(
    state: BiphotonState,
    U: np.ndarray,
    target_basis: str | None = None,
) -> BiphotonState:
    """Re-express a first-order state in a new one-photon basis.

    ``U[k, l]`` holds the components of new mode k on old mode l (the
    convention of :func:`spdcbell.modes.hg_to_lg_first_order`), so
    ``C_new = U* C U^dagger``.  Old and new modes are read in qubit order
    (|0>, |1>).  ``target_basis`` labels the result and defaults to the
    other family.
    """
    U = _check_unitary(U)
    basis = state.basis
    if basis is None or len(state.mode_set) != 2 or set(state.mode_set) != set(first_order_modes(basis)):
        raise BasisMismatchError("basis change needs a state on the first-order subspace only")
    if target_basis is None:
        target_basis = LG if basis == HG else HG
    C = state.block(first_order_modes(basis))
    C_new = U.conj() @ C @ U.conj().T
    return BiphotonState(first_order_modes(target_basis), C_new, state.normalized)


def _projection_matrix(measure: Sequence[ModeId], modes: Sequence[ModeId]) -> np.ndarray:
    # P[a, s] = <measure_a | mode_s>; equal waists, so the waist drops out
    P = np.empty((len(measure), len(modes)), dtype=complex)
    for a, m in enumerate(measure):
        for s, mode in enumerate(modes):
            P[a, s] = 1.0 if m == mode else (0.0 if m.family == mode.family else mode_overlap(m, mode))
    return P


def coincidence_spectrum(state: BiphotonState, measurement_modes: Sequence[ModeId]) -> np.ndarray:
    """Joint detection probabilities over a product of projective mode measurements.

    Entry (a, b) is ``|<m_a, m_b|state>|^2``; the matrix is scaled to sum to
    one.  Measurement modes outside the state's family are projected through
    exact overlap integrals (equal signal and idler waists assumed).
    """
    measurement_modes = tuple(measurement_modes)
    if not measurement_modes:
        raise DomainError("measurement mode list is empty")
    P = _projection_matrix(measurement_modes, state.mode_set)
    amps = P @ state.coefficients @ P.T
    probs = np.abs(amps) ** 2
    total = probs.sum()
    if total == 0.0:
        raise DegenerateSubspaceError("state has no weight on the measured modes")
    return probs / total
