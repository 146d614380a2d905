"""Discrete-time entangled histories: states, monitors, channels and temporal correlations."""

__version__ = "0.1.0"

from .qcore import Basis, DimensionError, ValidationError, kron, partial_trace, eigvals_hermitian, trace_norm
from .history import (
    InstantChain,
    HistoryState,
    build_history,
    transition_amplitude,
    bridge_operator,
    temporal_marginal,
    naive_product_model,
)
from .channels import KrausChannel, ChoiChannel, choi_from_kraus, channel_history, marginal_out, validate_cptp
from .monitor import MonitorProtocol, controlled_copy, run_protocol, measure_monitors
from .tempcorr import SpinObservable, pointer_two_time, sequential_measure, lg_correlator, lg_sweep
from .uncertainty import (
    EnergyModel,
    InstantEnsemble,
    instant_marginals,
    helstrom_success,
    discrimination_success,
    energy_statistics,
    uncertainty_report,
)

__all__ = [
    "Basis", "DimensionError", "ValidationError", "kron", "partial_trace", "eigvals_hermitian",
    "trace_norm", "InstantChain", "HistoryState", "build_history", "transition_amplitude",
    "bridge_operator", "temporal_marginal", "naive_product_model", "KrausChannel", "ChoiChannel",
    "choi_from_kraus", "channel_history", "marginal_out", "validate_cptp", "MonitorProtocol",
    "controlled_copy", "run_protocol", "measure_monitors", "SpinObservable", "pointer_two_time",
    "sequential_measure", "lg_correlator", "lg_sweep", "EnergyModel", "InstantEnsemble",
    "instant_marginals", "helstrom_success", "discrimination_success", "energy_statistics",
    "uncertainty_report",
]
