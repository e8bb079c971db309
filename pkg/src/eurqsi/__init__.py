"""Entropic uncertainty relations with quantum side information, tightened
by a measurement-reversibility term, plus the recovery channels and circuit
simulations that realize them numerically."""

from .linalg import (
    HermEig,
    fidelity,
    herm_eig,
    mat_power_on_support,
    op_norm,
    partial_trace,
    tensor,
    trace_distance,
)
from .entropy import conditional, relative, von_neumann
from .states import (
    CqState,
    DensityOperator,
    InvalidStateError,
    Pvm,
    incompatibility_c,
    isometric_extension,
    measure,
    pauli_pvm,
    pinch,
    purify,
    random_pvm,
    random_state,
    theta_state,
)
from .recovery import (
    CpMap,
    Quadrature,
    apply_map,
    default_quadrature,
    eur_recovery_map,
    measurement_channel,
    petz_map,
    rotated_petz_map,
    verify_cptp,
)
from .relations import EurReport, FuzzSummary, check_bipartite, check_tripartite, fuzz
from .gallery import build as build_example
from .gallery import run_all as run_examples
from .simulate import (
    Circuit,
    ExperimentResult,
    Gate,
    Measure,
    NoiseSpec,
    Recovery,
    ShotTable,
    bloch_tomography,
    run_circuit,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "HermEig", "fidelity", "herm_eig", "mat_power_on_support", "op_norm",
    "partial_trace", "tensor", "trace_distance",
    "conditional", "relative", "von_neumann",
    "CqState", "DensityOperator", "InvalidStateError", "Pvm",
    "incompatibility_c", "isometric_extension", "measure", "pauli_pvm",
    "pinch", "purify", "random_pvm", "random_state", "theta_state",
    "CpMap", "Quadrature", "apply_map", "default_quadrature",
    "eur_recovery_map", "measurement_channel", "petz_map",
    "rotated_petz_map", "verify_cptp",
    "EurReport", "FuzzSummary", "check_bipartite", "check_tripartite", "fuzz",
    "build_example", "run_examples",
    "Circuit", "ExperimentResult", "Gate", "Measure", "NoiseSpec",
    "Recovery", "ShotTable", "bloch_tomography", "run_circuit",
    "run_experiment",
]
