"""Exact Monte-Carlo simulator for multi-party private comparison over
d-level single-particle states, with pluggable eavesdropping strategies.
"""
from .adversary import (
    ATTACK_IDS,
    AttackKind,
    AttackStrategy,
    Coalition,
    SecretSupport,
    View,
    analytic_abort_probability,
    apply_tap,
    attack_id_of,
    coalition_view,
    estimate_detection_rate,
    per_decoy_detection_probability,
    secret_support,
    strategy_from_id,
    tapped_checked_decoys,
)
from .channel import (
    OUTSIDER,
    PUBLIC,
    ClassicalBus,
    QuantumLink,
    Transcript,
    TransmissionError,
    TransmissionSequence,
    broadcast,
    transmit,
)
from .harness import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    SweepCell,
    TrialRun,
    derive_cell_seed,
    derive_rng,
    run_experiment,
    run_trial,
    sweep,
)
from .protocol import (
    SOLO_TP_ROLE,
    TP1_ROLE,
    TP2_ROLE,
    CarrierRecord,
    ComparisonOutcome,
    DecoyEntry,
    DecoySpec,
    ProtocolParams,
    SecretVector,
    SharedKey,
    Variant,
    build_transmission,
    encode_secret,
    make_carrier,
    pad_sum_range,
    party_role,
    rank_descending,
    run_decoy_check,
    run_one_tp_protocol,
    run_two_tp_protocol,
    tp_compute_result,
    tp_prepare_carriers,
    two_phase_disclosure,
)
from .qudit import (
    NORM_TOL,
    Basis,
    MeasurementOutcome,
    ParameterError,
    QuditState,
    apply_shift,
    basis_state,
    fourier_matrix,
    iqft,
    measure,
    overlap,
    qft,
)

__version__ = "0.1.0"
