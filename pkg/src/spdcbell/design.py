"""Inverse design of pump superpositions for a requested biphoton state.

The coefficient tensor is linear in the pump field, so stacking the
tensors produced by each unit pump mode gives a design map ``M`` and the
search reduces to a (ridge-regularized) linear least-squares problem solved
by QR factorization.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateSubspaceError, DomainError, IllPosedDesignError
from .modes import HG, ModeId, mode_field, modes_up_to_order, superpose
from .overlap import QuadratureSpec, WaistConfig, coefficient_tensor
from .state import BiphotonState, renormalize

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class DesignProblem:
    """Target state plus the pump modes allowed to reproduce it.

    ``regularization`` is relative: the ridge weight is this value times the
    largest squared singular value of the design map.
    """

    target: BiphotonState
    pump_basis: tuple[ModeId, ...]
    waists: WaistConfig = WaistConfig()
    regularization: float = 0.0
    quad: QuadratureSpec = QuadratureSpec()
    fidelity_threshold: float = 0.99

    def __post_init__(self):
        basis = tuple(self.pump_basis)
        if not basis:
            raise DomainError("pump basis is empty")
        if len(set(basis)) != len(basis):
            raise DomainError("pump basis contains duplicates")
        if any(m.family != HG for m in basis):
            raise DomainError("pump basis must contain HG modes only")
        if self.regularization < 0:
            raise DomainError("regularization must be nonnegative")
        if not np.isclose(self.target.norm, 1.0, atol=1e-9):
            raise DomainError("target state must be normalized over its mode set")
        object.__setattr__(self, "pump_basis", basis)


@dataclass
class DesignSolution:
    pump_basis: tuple[ModeId, ...]
    pump_weights: np.ndarray
    achieved_fidelity: float
    residual: float
    conditioning: float
    rank: int
    leakage: float
    reachable: bool
    forward_state: BiphotonState | None = field(default=None, repr=False)

    def as_terms(self) -> list[tuple[ModeId, complex]]:
        return [(m, complex(c)) for m, c in zip(self.pump_basis, self.pump_weights)]


def assemble_design_map(problem: DesignProblem) -> np.ndarray:
    """Column k is the flattened raw tensor over the target's mode set for unit pump mode k."""
    wp = problem.waists.pump
    cols = [
        coefficient_tensor(mode_field(m, wp), problem.target.mode_set, problem.waists, problem.quad).flat()
        for m in problem.pump_basis
    ]
    return np.array(cols).T


def forward(
    pump_terms: Sequence[tuple[ModeId, complex]],
    mode_set: Sequence[ModeId],
    waists: WaistConfig = WaistConfig(),
    quad: QuadratureSpec = QuadratureSpec(),
) -> BiphotonState:
    """Raw coefficient tensor produced by a pump superposition."""
    pump = superpose(pump_terms, waists.pump)
    return coefficient_tensor(pump, mode_set, waists, quad)


def leakage(
    pump_terms: Sequence[tuple[ModeId, complex]],
    subspace: Sequence[ModeId],
    waists: WaistConfig = WaistConfig(),
    max_order: int | None = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Fraction of forward weight outside ``subspace``, over HG modes up to ``max_order``."""
    if max_order is None:
        max_order = max(2, max(m.order for m in subspace))
    modes = list(dict.fromkeys(list(subspace) + modes_up_to_order(max_order, HG)))
    full = forward(pump_terms, modes, waists, quad)
    total = full.norm**2
    inside = float(np.sum(np.abs(full.block(subspace)) ** 2))
    return float(max(0.0, 1.0 - inside / total)) if total > 0 else 0.0


def _least_squares(M: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    A, rhs = M, b
    if lam > 0:
        n = M.shape[1]
        A = np.vstack([M, np.sqrt(lam) * np.eye(n)])
        rhs = np.concatenate([b, np.zeros(n, dtype=complex)])
    Q, R = np.linalg.qr(A)
    return solve_triangular(R, Q.conj().T @ rhs)


def solve(problem: DesignProblem, leakage_order: int | None = None) -> DesignSolution:
    """Pump weights minimizing ||M p - s c||^2 + lam ||p||^2, normalized to unit norm.

    ``s`` rescales the target to the largest column norm of ``M``.  The
    returned weights have their largest component real and positive.  With
    zero regularization a rank-deficient map raises
    :class:`IllPosedDesignError`; any positive value selects the
    (near) minimum-norm optimum.
    """
    M = assemble_design_map(problem)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        raise IllPosedDesignError("every pump mode gives zero amplitude on the target subspace")
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    conditioning = float(sv[-1] / sv[0]) if M.shape[1] <= M.shape[0] else 0.0
    if problem.regularization == 0.0 and rank < M.shape[1]:
        raise IllPosedDesignError(
            f"design map has rank {rank} < {M.shape[1]} pump modes "
            f"(conditioning {conditioning:.3g}); set a positive regularization"
        )
    c = problem.target.flat()
    col_scale = float(np.max(np.linalg.norm(M, axis=0)))
    b = col_scale * c
    p = _least_squares(M, b, problem.regularization * sv[0] ** 2)
    residual = float(np.linalg.norm(M @ p - b) / np.linalg.norm(b))

    if np.linalg.norm(M @ p) <= 1e-10 * np.linalg.norm(b):
        # target orthogonal to everything the pump basis can produce
        return DesignSolution(problem.pump_basis, np.zeros_like(p), 0.0, residual, conditioning, rank, 0.0, False)
    p = p / np.linalg.norm(p)
    k = int(np.argmax(np.abs(p)))
    p = p * np.exp(-1j * np.angle(p[k]))

    terms = list(zip(problem.pump_basis, p))
    raw = forward(terms, problem.target.mode_set, problem.waists, problem.quad)
    try:
        out = renormalize(raw, problem.target.mode_set)
        fid = float(min(1.0, abs(np.vdot(problem.target.flat(), out.flat())) ** 2))
    except DegenerateSubspaceError:
        out, fid = None, 0.0
    leak = leakage(terms, problem.target.mode_set, problem.waists, leakage_order, problem.quad)
    return DesignSolution(
        problem.pump_basis,
        p,
        fid,
        residual,
        conditioning,
        rank,
        leak,
        fid >= problem.fidelity_threshold,
        out,
    )
