import numpy as np
import pytest

from spdcbell.design import DesignProblem, assemble_design_map, forward, leakage, solve
from spdcbell.errors import DomainError, IllPosedDesignError
from spdcbell.modes import FIRST_ORDER_HG, hg, lg, modes_up_to_order
from spdcbell.overlap import WaistConfig
from spdcbell.state import bell_state, renormalize, state_from_matrix

S = 1 / np.sqrt(2)
ORDER2 = tuple(modes_up_to_order(2))


def column(problem, mode):
    M = assemble_design_map(problem)
    return M[:, problem.pump_basis.index(mode)]


def test_design_map_columns_have_bell_structure():
    prob = DesignProblem(bell_state("PsiPlus"), (hg(0, 0), hg(1, 1), hg(1, 0)), regularization=1e-12)
    c11 = column(prob, hg(1, 1))
    c00 = column(prob, hg(0, 0))
    assert np.allclose(c11 / np.linalg.norm(c11), [0, S, S, 0], atol=1e-12)
    assert np.allclose(c00 / np.linalg.norm(c00), [S, 0, 0, S], atol=1e-12)
    # odd-parity pump gives nothing in the first-order pair subspace
    assert np.abs(column(prob, hg(1, 0))).max() < 1e-14


def test_psi_plus_picks_hg11():
    sol = solve(DesignProblem(bell_state("PsiPlus"), ORDER2, regularization=1e-12))
    w = dict(sol.as_terms())
    assert abs(w[hg(1, 1)]) > 0.999
    assert sol.achieved_fidelity > 0.999 and sol.reachable
    assert sol.pump_weights[np.argmax(np.abs(sol.pump_weights))].imag == 0


def test_phi_plus_uses_even_modes():
    sol = solve(DesignProblem(bell_state("PhiPlus"), ORDER2, regularization=1e-12))
    assert sol.achieved_fidelity > 0.999
    for m, c in sol.as_terms():
        if m.a % 2 or m.b % 2:
            assert abs(c) < 1e-9


def test_unreachable_target():
    sol = solve(DesignProblem(bell_state("PsiMinus"), ORDER2, regularization=1e-12))
    assert not sol.reachable
    assert sol.achieved_fidelity == 0.0
    assert np.all(sol.pump_weights == 0)


def test_round_trip_full_rank():
    rng = np.random.default_rng(21)
    modes = tuple(modes_up_to_order(2))
    for _ in range(5):
        p = rng.normal(size=len(ORDER2)) + 1j * rng.normal(size=len(ORDER2))
        p /= np.linalg.norm(p)
        target = renormalize(forward(list(zip(ORDER2, p)), modes), modes)
        sol = solve(DesignProblem(target, ORDER2))
        overlap = abs(np.vdot(p, sol.pump_weights))
        assert overlap == pytest.approx(1.0, abs=1e-10)
        assert sol.achieved_fidelity == pytest.approx(1.0, abs=1e-10)


def test_target_global_phase_is_irrelevant():
    target = state_from_matrix(FIRST_ORDER_HG, np.array([[0.6, 0.2j], [0.2j, 0.75]]))
    a = solve(DesignProblem(target, ORDER2, regularization=1e-9))
    b = solve(DesignProblem(target.with_phase(2.1), ORDER2, regularization=1e-9))
    assert np.allclose(a.pump_weights, b.pump_weights, atol=1e-9)
    assert a.achieved_fidelity == pytest.approx(b.achieved_fidelity, abs=1e-12)


def test_nested_bases_never_lose_fidelity():
    target = state_from_matrix(FIRST_ORDER_HG, np.array([[0.9, 0.3 + 0.1j], [0.3 + 0.1j, 0.2]]))
    fids = []
    for order in (0, 1, 2):
        basis = tuple(modes_up_to_order(order))
        fids.append(solve(DesignProblem(target, basis, regularization=1e-12)).achieved_fidelity)
    assert fids[0] <= fids[1] + 1e-9 <= fids[2] + 2e-9


def test_ill_posed_without_regularization():
    with pytest.raises(IllPosedDesignError):
        solve(DesignProblem(bell_state("PsiPlus"), ORDER2))


def test_leakage_reported():
    sol = solve(DesignProblem(bell_state("PsiPlus"), ORDER2, regularization=1e-12))
    # HG11 also feeds HG00-HG11 and higher pairs
    assert 0 < sol.leakage < 1
    assert sol.leakage == pytest.approx(leakage(sol.as_terms(), FIRST_ORDER_HG))


def test_unequal_waists_still_solve():
    sol = solve(DesignProblem(bell_state("PsiPlus"), ORDER2, WaistConfig(1.5, 1.0), regularization=1e-12))
    assert sol.achieved_fidelity > 0.999


def test_problem_validation():
    with pytest.raises(DomainError):
        DesignProblem(bell_state("PsiPlus"), ())
    with pytest.raises(DomainError):
        DesignProblem(bell_state("PsiPlus"), (lg(0, 0),))
    with pytest.raises(DomainError):
        DesignProblem(bell_state("PsiPlus"), (hg(0, 0), hg(0, 0)))
    with pytest.raises(DomainError):
        DesignProblem(bell_state("PsiPlus"), ORDER2, regularization=-1.0)
    unnorm = state_from_matrix(FIRST_ORDER_HG, np.eye(2), normalize=False)
    with pytest.raises(DomainError):
        DesignProblem(unnorm, ORDER2)
