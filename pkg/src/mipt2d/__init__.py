"""Sign-agnostic stabilizer simulation and finite-size-scaling analysis of
monitored Clifford circuits on an L x L torus."""

__version__ = "0.1.0"

from .circuit import OperationMix, Schedule, TrajectoryConfig, run_trajectory, \
    scramble_with_ancillas, step
from .diagnostics import DiagnosticConfig, DiagnosticSample, RegionSet, \
    entanglement_profile, half_system_entropy, make_regions, s_anc, s_dumb, \
    s_top_seven
from .ensembles import CLIFFORD_COUNTS, EnsembleSpec, SymplecticClifford, \
    count_cliffords, enumerate_sspt_table, enumerate_z_preserving, load_table, \
    make_ensemble, respects_symmetry, restricted_symmetry_generators, \
    sample_clifford, sample_symmetric_clifford, store_table, symplectic_order
from .fss import DataPoint, ScalingFitResult, SurvivalFit, fit_profile, \
    fit_scaling, fit_survival, nelder_mead, objective_multilevel, \
    objective_nearest, objective_polynomial, scale_points
from .gf2 import BitMatrix, rank, symplectic_check, symplectic_product
from .lattice import LatticeGeometry
from .stabilizer import PauliString, StabilizerTableau

__all__ = [
    "BitMatrix", "CLIFFORD_COUNTS", "DataPoint", "DiagnosticConfig",
    "DiagnosticSample", "EnsembleSpec", "LatticeGeometry", "OperationMix",
    "PauliString", "RegionSet", "ScalingFitResult", "Schedule",
    "StabilizerTableau", "SurvivalFit", "SymplecticClifford",
    "TrajectoryConfig", "count_cliffords", "entanglement_profile",
    "enumerate_sspt_table", "enumerate_z_preserving", "fit_profile",
    "fit_scaling", "fit_survival", "half_system_entropy", "load_table",
    "make_ensemble", "make_regions", "nelder_mead", "objective_multilevel",
    "objective_nearest", "objective_polynomial", "rank", "respects_symmetry",
    "restricted_symmetry_generators", "run_trajectory", "s_anc", "s_dumb",
    "s_top_seven", "sample_clifford", "sample_symmetric_clifford",
    "scale_points", "scramble_with_ancillas", "step", "store_table",
    "symplectic_check", "symplectic_order", "symplectic_product",
]
