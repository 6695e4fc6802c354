"""Structured-pump SPDC: biphoton mode coefficients, Bell-state checks,
CHSH simulation, inverse pump design and SLM holograms."""

__version__ = "0.1.0"

from .modes import FIRST_ORDER_HG, FIRST_ORDER_LG, HG, LG, GridSpec, ModeField, ModeId, evaluate_mode, hg, hg_to_lg_first_order, lg, mode_field, modes_up_to_order, superpose
from .overlap import QuadratureSpec, WaistConfig, coefficient, coefficient_tensor, oracle_coefficient
from .state import BiphotonState, bell_fidelity, bell_state, change_basis_two_photon, classify, coincidence_spectrum, renormalize
from .chsh import MeasurementSetting, NoiseSpec, chsh_curve, chsh_S, coincidence_probability, correlation_E, projector_state
from .design import DesignProblem, DesignSolution, assemble_design_map, solve
from .hologram import Hologram, SlmSpec, encode, verify_first_order
