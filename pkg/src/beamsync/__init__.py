"""Link-level simulator for over-the-air carrier-frequency synchronization
between distributed multi-antenna panels.

A secondary panel and a primary panel run a two-stage handshake: the
secondary broadcasts an orthonormal pilot block, the primary beamforms a
sinusoid burst back along the dominant receive direction, and the secondary
jointly estimates the carrier frequency offset and the effective channel by
maximum likelihood.  The package also provides Fisher-information /
Cramer-Rao bound evaluation, analog fixed-codebook baselines, and a
reproducible Monte Carlo harness producing RMSE-vs-SNR curves.

All frequency offsets are normalized to cycles per sample; multiply by the
sample rate to convert to Hz.
"""

from .signals import (
    PilotMatrix,
    RotationDiag,
    SyncWaveform,
    apply_rotation,
    make_orthonormal_pilots,
    make_sync_signal,
    rotation_diag,
)
from .channels import (
    ChannelMatrix,
    PanelGeometry,
    PatchAntennaParams,
    adjacent_wall_scene,
    channel_to_csv,
    los_channel,
    make_wall_panel,
    patch_element_gain,
    rayleigh_channel,
)
from .protocol import (
    SCHEMES,
    BeamVector,
    ReceivedBlock,
    SyncLinkState,
    analog_genie_select,
    analog_select_rx,
    analog_select_tx,
    collapse_rx_beam,
    dft_codebook,
    estimate_beam_direction,
    genie_beam_direction,
    stage1_receive,
    stage2_receive,
)
from .estimator import (
    EstimatorConfig,
    OffsetEstimate,
    estimate_effective_channel,
    estimate_offset,
    ml_objective,
    ml_objective_grid,
)
from .crb import (
    FisherInfo,
    IdentifiabilityError,
    crb_closed_form,
    crb_numerical,
    fim_single,
    fim_total,
)
from .montecarlo import (
    DriftTimeline,
    PanelSyncResult,
    RmseCurve,
    RmsePoint,
    TrialResult,
    circular_offset_error,
    run_multi_panel_schedule,
    run_sweep,
    run_trial,
    simulate_drift_timeline,
    trial_rng,
)
from .config import (
    ChannelSpec,
    ConfigError,
    DriftSpec,
    ExperimentConfig,
    OffsetModel,
    config_fingerprint,
    dump_config,
    parse_config,
    parse_config_text,
)

__version__ = "0.1.0"

__all__ = [
    "PilotMatrix",
    "RotationDiag",
    "SyncWaveform",
    "apply_rotation",
    "make_orthonormal_pilots",
    "make_sync_signal",
    "rotation_diag",
    "ChannelMatrix",
    "PanelGeometry",
    "PatchAntennaParams",
    "adjacent_wall_scene",
    "channel_to_csv",
    "los_channel",
    "make_wall_panel",
    "patch_element_gain",
    "rayleigh_channel",
    "SCHEMES",
    "BeamVector",
    "ReceivedBlock",
    "SyncLinkState",
    "analog_genie_select",
    "analog_select_rx",
    "analog_select_tx",
    "collapse_rx_beam",
    "dft_codebook",
    "estimate_beam_direction",
    "genie_beam_direction",
    "stage1_receive",
    "stage2_receive",
    "EstimatorConfig",
    "OffsetEstimate",
    "estimate_effective_channel",
    "estimate_offset",
    "ml_objective",
    "ml_objective_grid",
    "FisherInfo",
    "IdentifiabilityError",
    "crb_closed_form",
    "crb_numerical",
    "fim_single",
    "fim_total",
    "DriftTimeline",
    "PanelSyncResult",
    "RmseCurve",
    "RmsePoint",
    "TrialResult",
    "circular_offset_error",
    "run_multi_panel_schedule",
    "run_sweep",
    "run_trial",
    "simulate_drift_timeline",
    "trial_rng",
    "ChannelSpec",
    "ConfigError",
    "DriftSpec",
    "ExperimentConfig",
    "OffsetModel",
    "config_fingerprint",
    "dump_config",
    "parse_config",
    "parse_config_text",
    "__version__",
]
