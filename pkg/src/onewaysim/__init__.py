"""Simulator and analysis toolkit for one-way computing on a
two-photon four-qubit cluster state."""

from .qcore import (
    DensityMatrix,
    ImpossibleOutcomeError,
    PauliString,
    SingleQubitGate,
    StateVector,
    apply_cphase,
    apply_gate,
    entanglement_entropy,
    expectation,
    fidelity,
    hadamard,
    identity_gate,
    ket,
    measure,
    measure_mixed,
    measurement_probabilities,
    overlap,
    pauli_x,
    pauli_z,
    plus_state,
    rz,
    swap_qubits,
)
from .cluster import (
    BOX_GRAPH,
    ClusterGraph,
    HORSESHOE_GRAPH,
    box_equivalence,
    build_cluster,
    c4_state,
    horseshoe_equivalence,
    stabilizer_generators,
    to_box_frame,
    to_horseshoe_frame,
)
from .photonics import (
    COINCIDENCE_RATE_HZ,
    DETECTOR_PAIRS,
    ENCODING,
    ApparatusSetting,
    EncodingMap,
    NoiseModel,
    SourceParams,
    VisibilityScan,
    WITNESS_OBSERVABLES,
    WITNESS_SETTINGS,
    apparatus_projectors,
    apply_noise,
    beam_splitter,
    fit_noise,
    joint_distribution,
    source_state,
    visibility_fringe,
    visibility_scan,
)
from .mbqc import (
    GateOutputSpec,
    MeasurementPattern,
    OutcomeRecord,
    bell_discriminate,
    bell_probabilities,
    box_gate,
    box_pattern,
    branch_distribution,
    grover_run,
    horseshoe_gate,
    horseshoe_pattern,
    run_pattern,
)
from .analysis import (
    CountRecord,
    GroverReport,
    WitnessReport,
    gate_fidelity_report,
    grover_report,
    simulate_counts,
    simulate_witness_records,
    witness_from_counts,
    witness_value,
)

__version__ = "0.1.0"
