"""Geometric-phase gate compiler and density-matrix simulator for spin ladders."""
from .operators import (
    LevelLabel,
    SpinSystem,
    hermitian_propagator,
    ladder_operators,
    quadrupolar_hamiltonian,
    rotating_frame_hamiltonian,
    spin_operators,
    transition_frequencies,
)
from .pulses import (
    PulseEvent,
    PulseSequence,
    RfWaveform,
    hard_pulse_propagator,
    ideal_selective_propagator,
    merge_unconnected,
    refocus_duration,
    sequence_propagator,
    soft_pulse_waveform,
    subspace_generator,
    subspace_metrics,
    time_domain_propagator,
)
from .synth import (
    DiagonalGateSpec,
    GatePlan,
    PhasePair,
    enumerate_balanced_oracles,
    merge_plan,
    phase_pair_sequence,
    synth_diagonal,
    synth_dj_oracle,
    synth_single_level_phase,
    verify_plan,
)
from .experiment import (
    DensityMatrix,
    DJOutcome,
    SpectralLine,
    classify,
    dephase,
    detect_spectrum,
    equilibrium_state,
    evolve,
    pps_000,
    run_dj,
    small_angle_readout,
)

__version__ = "0.1.0"
