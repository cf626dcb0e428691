"""Bell-CHSH correlators of a free scalar field, with oracles and optimizers."""

__version__ = "0.1.0"

from .bell import BipartiteState, assemble, build_dichotomic, qm_reduction, squeezed_factor
from .correlator import TSIRELSON, CorrelatorReport, chsh_closed_form, chsh_corrected, chsh_correlator
from .errors import NumericalError, ParameterError, TsirelsonViolation
from .fock import FockConfig, OperatorMatrix
from .jc import JCParams, MomentumProfile, corrected_chsh_pipeline, delta_squared, perturbation_oracle
from .modular import GramMatrix, ModularParams, build_gram, pj_pairing
from .optimize import OptimizationResult, maximize_chsh_qft, maximize_chsh_spin
from .spin import AngleSet, chsh_spin, composite_operator, correlator_closed_form

__all__ = [
    "AngleSet", "BipartiteState", "CorrelatorReport", "FockConfig", "GramMatrix", "JCParams", "ModularParams",
    "MomentumProfile", "NumericalError", "OperatorMatrix", "OptimizationResult", "ParameterError", "TSIRELSON",
    "TsirelsonViolation", "assemble", "build_dichotomic", "build_gram", "chsh_closed_form", "chsh_corrected",
    "chsh_correlator", "chsh_spin", "composite_operator", "corrected_chsh_pipeline", "correlator_closed_form",
    "delta_squared", "maximize_chsh_qft", "maximize_chsh_spin", "perturbation_oracle", "pj_pairing", "qm_reduction",
    "squeezed_factor",
]
