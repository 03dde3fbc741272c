"""Numerical toolkit for finite codimensional controllability diagnostics.

Spectral Galerkin truncations of the 1D controlled wave and heat systems,
their controllability Gramians with defect-count diagnostics, HUM and
endpoint-constrained LQ control synthesis, and an exact finite-dimensional
oracle for the underlying rank/observability equivalences.
"""

from .codim import (LadderVerdict, SpectrumReport, compact_perturbation_test,
                    ladder_scan, observability_subspace_test, spectrum)
from .errors import (CertificationError, CgStagnationError, DtTooCoarseError,
                     HyperbolicOverflowError, InfeasibleRelaxationError,
                     KktSingularError, NumericalError,
                     QuadratureDivergenceError, ValidationError)
from .gramian import (GramianMatrix, assemble_heat_gramian,
                      assemble_wave_gramian, gramian_quadrature_oracle)
from .oracle import (EquivalenceReport, LtiSystem, check_equivalences,
                     fd_gramian, kalman_rank, random_sweep)
from .propagators import (AdjointWaveData, ControlSignal, HeatState,
                          WaveState, heat_adjoint, heat_forward, pairing,
                          pairing_vector, wave_adjoint, wave_forward)
from .spectral import (ControlRegion, EigenMode, eigenvalue, eigenvalues,
                       overlap_matrix, project_function)
from .synthesis import (HumSolution, LqSolution, conjugate_gradient,
                        hum_heat_regularized, hum_wave, lq_cost, lq_endpoint,
                        verify_endpoint)

__version__ = "0.1.0"

__all__ = [
    "AdjointWaveData", "CertificationError", "CgStagnationError",
    "ControlRegion", "ControlSignal", "DtTooCoarseError", "EigenMode",
    "EquivalenceReport", "GramianMatrix", "HeatState", "HumSolution",
    "HyperbolicOverflowError", "InfeasibleRelaxationError", "KktSingularError",
    "LadderVerdict", "LqSolution", "LtiSystem", "NumericalError",
    "QuadratureDivergenceError", "SpectrumReport", "ValidationError",
    "WaveState", "assemble_heat_gramian", "assemble_wave_gramian",
    "check_equivalences", "compact_perturbation_test", "conjugate_gradient",
    "eigenvalue", "eigenvalues", "fd_gramian", "gramian_quadrature_oracle",
    "heat_adjoint", "heat_forward", "hum_heat_regularized", "hum_wave",
    "kalman_rank", "ladder_scan", "lq_cost", "lq_endpoint",
    "observability_subspace_test", "overlap_matrix", "pairing",
    "pairing_vector", "project_function", "random_sweep", "spectrum",
    "verify_endpoint", "wave_adjoint", "wave_forward",
]
