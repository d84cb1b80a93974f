"""Qudit-chain Floquet simulator and time-crystal analysis toolkit."""

__version__ = "0.1.0"

from .chain import (
    ChainShape,
    QuditState,
    SiteOperator,
    apply_single_site_unitary,
    basis_product_state,
    block_weights,
    expectation_site,
    prepare_product_state,
)
from .disorder import (
    DisorderRealization,
    StaticLayerParams,
    apply_exp_hz,
    derive_seed,
    hz_energy,
    sample_disorder,
)
from .engine import (
    EnsembleResult,
    FloquetProtocol,
    TimeSeries,
    evolve_record,
    floquet_step,
    run_ensemble,
)
from .kicks import (
    CompiledKick,
    EmbeddedKickSpec,
    GlobalKickSpec,
    LevelPartition,
    compile_kick,
    effective_error_generator,
    qudit_z_gate,
    spin_operator,
    two_level_rotation,
)
from .observables import (
    BlockResolved,
    ChainMagnetization,
    ChargedProbe,
    chain_magnetization,
    charged_probe,
    omega4,
)
from .spectral import PeakMetrics, Spectrum, peak_metrics, periodogram, subharmonic_weight
from .levelstats import (
    EigenphaseSet,
    build_floquet_matrix,
    eigenphases,
    gap_ratio,
    spacing_histogram,
)
from .normal_form import (
    GradedOperator,
    NeutralGenerator,
    block_field_average,
    charged_scaling_fit,
    delta_D,
    grade,
    group_average_D0,
    linear_charged_remainder,
    time_charge_project,
)
from .baselines import (
    QubitChainProtocol,
    build_plain_baseline,
    encode_d4_to_two_qubits,
    map_qutrit_doublet_to_qubit,
)
from .states import build_initial_state, parse_site_state
