"""Homodyne tomography toolkit for displaced Fock states.

Quadrature convention: vacuum variance 1/2; the Wigner function integrates
to one with the coherent peak of amplitude alpha at
(X, P) = (sqrt(2) Re alpha, sqrt(2) Im alpha).
"""

from ._core import (
    AcquisitionConfig,
    AlphaFit,
    EtaFit,
    PeakReport,
    StateModel,
    assign_phases,
    beamsplitter_reduced_state,
    displaced_fock_fidelity,
    displacement_matrix,
    estimate_diagonals,
    fbp_kernel,
    fit_alpha,
    fit_eta,
    fock_wavefunction,
    marginal_pdf,
    pattern_function,
    peak_report,
    photon_statistics,
    reconstruct_wigner_abel,
    reconstruct_wigner_fbp,
    run_acquisition,
    scale_to_vacuum,
    scenario_names,
    scenario_state,
    vacuum_calibration_run,
    wigner_analytic,
)

__all__ = [
    "AcquisitionConfig",
    "AlphaFit",
    "EtaFit",
    "PeakReport",
    "StateModel",
    "assign_phases",
    "beamsplitter_reduced_state",
    "displaced_fock_fidelity",
    "displacement_matrix",
    "estimate_diagonals",
    "fbp_kernel",
    "fit_alpha",
    "fit_eta",
    "fock_wavefunction",
    "marginal_pdf",
    "pattern_function",
    "peak_report",
    "photon_statistics",
    "reconstruct_wigner_abel",
    "reconstruct_wigner_fbp",
    "run_acquisition",
    "scale_to_vacuum",
    "scenario_names",
    "scenario_state",
    "vacuum_calibration_run",
    "wigner_analytic",
]

__version__ = "0.1.0"
