"""Laakso-type graphs with prescribed volume growth and escape-time profiles,
and empirical verification of the sub-Gaussian heat-kernel behavior of the
simple random walk on them."""

from .laakso import BallSummary, CapExceededError, InducedBallGraph, LaaksoGraph
from .params import (BranchingFunction, FitResult, GluingFunction,
                     NotAdmissibleError, TargetOutOfRangeError, fit_params,
                     psi_b, v_from_counts, validate, volume_law)
from .profiles import AdmissibilityReport, DoublingProfile, check_admissible, phi
from .verify import (EnvelopeReport, ExponentFit, TransienceReport,
                     check_exit_time, check_hke, check_volume,
                     classify_transience, fit_exponent, on_diagonal_decay)
from .walk import (ExitTimeRecord, HeatKernelRecord, RandomStream,
                   exact_mean_exit_time, green_partial, green_series,
                   heat_kernel, simulate_exit_time, step_distribution)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport",
    "BallSummary",
    "BranchingFunction",
    "CapExceededError",
    "DoublingProfile",
    "EnvelopeReport",
    "ExitTimeRecord",
    "ExponentFit",
    "FitResult",
    "GluingFunction",
    "HeatKernelRecord",
    "InducedBallGraph",
    "LaaksoGraph",
    "NotAdmissibleError",
    "RandomStream",
    "TargetOutOfRangeError",
    "TransienceReport",
    "check_admissible",
    "check_exit_time",
    "check_hke",
    "check_volume",
    "classify_transience",
    "exact_mean_exit_time",
    "fit_exponent",
    "fit_params",
    "green_partial",
    "green_series",
    "heat_kernel",
    "on_diagonal_decay",
    "phi",
    "psi_b",
    "simulate_exit_time",
    "step_distribution",
    "v_from_counts",
    "validate",
    "volume_law",
]
