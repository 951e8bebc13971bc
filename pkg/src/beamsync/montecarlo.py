"""Trial orchestration: SNR sweeps, RMSE curves, multi-panel schedules, drift timelines.

Reproducibility contract
------------------------
Every trial owns an independent random stream derived from
(master_seed, scheme id, SNR index, trial index), so results are identical
bit for bit whether trials run serially or on any number of workers.
Within a trial the draw order is fixed: channel, then offset, then stage-I
noise (only for schemes that use the stage-I block), then stage-II noise.

Offset errors are measured on the unit circle of normalized offsets (the
estimate and the truth are congruent modulo 1 cycle/sample), which keeps
low-SNR wrap-arounds near +-0.5 from exploding the RMSE.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import repeat

import numpy as np

from .channels import ChannelMatrix, adjacent_wall_scene, los_channel, rayleigh_channel
from .channels import PatchAntennaParams
from .config import ExperimentConfig, config_fingerprint
from .crb import crb_closed_form
from .estimator import OffsetEstimate, estimate_offset
from .protocol import (
    SCHEMES,
    BeamVector,
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
from .signals import PilotMatrix, SyncWaveform, make_orthonormal_pilots, make_sync_signal


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one protocol round."""

    scheme: str
    snr_db: float
    delta_true: float
    delta_hat: float
    squared_error: float
    beam_alignment: float
    crb: float
    objective_value: float = 0.0
    valid: bool = True


@dataclass(frozen=True)
class RmsePoint:
    """One (scheme, SNR) cell of a sweep."""

    scheme: str
    snr_db: float
    trials: int
    rmse: float
    crb_sqrt_avg: float


@dataclass(frozen=True)
class RmseCurve:
    """RMSE per (scheme, SNR) plus the averaged root-CRB reference line."""

    points: tuple[RmsePoint, ...]
    config_sha: str

    def to_csv_text(self) -> str:
        lines = ["scheme,snr_db,trials,rmse,crb_sqrt_avg"]
        for p in self.points:
            lines.append(
                f"{p.scheme},{p.snr_db!r},{p.trials},{p.rmse!r},{p.crb_sqrt_avg!r}"
            )
        return "\n".join(lines) + "\n"

    def point(self, scheme: str, snr_db: float) -> RmsePoint:
        for p in self.points:
            if p.scheme == scheme and p.snr_db == snr_db:
                return p
        raise KeyError(f"no point for ({scheme}, {snr_db} dB)")

    def scheme_points(self, scheme: str) -> list[RmsePoint]:
        return [p for p in self.points if p.scheme == scheme]


@dataclass
class OscillatorState:
    """Per-panel oscillator: frequency relative to nominal, in cycles/sample.

    The offset between two panels is the difference of their states."""

    panel_id: int | str
    frequency: float
    drift_rate: float = 0.0

    def offset_to(self, other: "OscillatorState") -> float:
        return self.frequency - other.frequency


@dataclass(frozen=True)
class PanelSyncResult:
    """Outcome of one panel's round in the sequential schedule."""

    panel: int
    delta_true: float
    estimate: OffsetEstimate
    residual: float


@dataclass(frozen=True)
class DriftTimeline:
    """Residual offset per slot with the slots where a sync round ran."""

    rows: tuple[tuple[int, float, str], ...]

    @property
    def sync_count(self) -> int:
        return sum(1 for _, _, event in self.rows if event == "sync")

    @property
    def sync_slots(self) -> list[int]:
        return [slot for slot, _, event in self.rows if event == "sync"]

    def to_csv_text(self) -> str:
        lines = ["slot,residual,event"]
        for slot, residual, event in self.rows:
            lines.append(f"{slot},{residual!r},{event}")
        return "\n".join(lines) + "\n"


def circular_offset_error(delta_hat: float, delta_true: float) -> float:
    """Signed offset error wrapped to [-0.5, 0.5) cycles/sample."""
    return float((delta_hat - delta_true + 0.5) % 1.0 - 0.5)


def trial_rng(master_seed: int, scheme: str | int, snr_index: int,
              trial_index: int) -> np.random.Generator:
    """Independent per-trial stream derived from the trial coordinates.

    The scheme enters by its fixed position in SCHEMES, so a scheme keeps
    its streams no matter which subset of schemes a config enables.
    """
    scheme_id = SCHEMES.index(scheme) if isinstance(scheme, str) else int(scheme)
    return np.random.default_rng([master_seed, scheme_id, snr_index, trial_index])


@lru_cache(maxsize=None)
def _cached_codebook(n_antennas: int) -> tuple[BeamVector, ...]:
    return tuple(dft_codebook(n_antennas))


@lru_cache(maxsize=8)
def _los_channel_for(cfg: ExperimentConfig) -> ChannelMatrix:
    spec = cfg.channel
    wavelength = spec.wavelength
    p_rows, p_cols = _grid_shape(cfg.mp)
    s_rows, s_cols = _grid_shape(cfg.ms)
    primary, secondary = adjacent_wall_scene(
        room=spec.room, rows=p_rows, cols=p_cols,
        spacing=spec.spacing_wavelengths * wavelength,
        mount_height=spec.mount_height)
    if (s_rows, s_cols) != (p_rows, p_cols):
        _, secondary = adjacent_wall_scene(
            room=spec.room, rows=s_rows, cols=s_cols,
            spacing=spec.spacing_wavelengths * wavelength,
            mount_height=spec.mount_height)
    patch = PatchAntennaParams(
        max_gain_dbi=spec.patch_max_gain_dbi,
        pattern_exponent=spec.patch_exponent,
        front_to_back_ratio_db=spec.patch_front_to_back_db)
    g = los_channel(primary, secondary, wavelength, patch)
    if spec.normalize:
        scale = np.sqrt(cfg.mp * cfg.ms) / np.linalg.norm(g.entries)
        g = ChannelMatrix(entries=g.entries * scale, carrier_wavelength=wavelength)
    return g


def _grid_shape(n_antennas: int) -> tuple[int, int]:
    """Near-square rows x cols factorization of the antenna count."""
    rows = int(np.floor(np.sqrt(n_antennas)))
    while n_antennas % rows:
        rows -= 1
    return rows, n_antennas // rows


def build_channel(cfg: ExperimentConfig, rng: np.random.Generator) -> ChannelMatrix:
    """Draw (Rayleigh) or construct (line-of-sight) the configured channel."""
    if cfg.channel.model == "rayleigh":
        return rayleigh_channel(cfg.mp, cfg.ms, rng)
    return _los_channel_for(cfg)


def _protocol_round(cfg: ExperimentConfig, scheme: str, rho: float, g: ChannelMatrix,
                    delta: float, rng: np.random.Generator, pilots: PilotMatrix,
                    waveform: SyncWaveform) -> tuple[OffsetEstimate, float, BeamVector]:
    """One full handshake; returns (offset estimate, tx-beam alignment, genie beam)."""
    link = SyncLinkState(true_offset=delta, snr=rho, channel=g, scheme=scheme)
    a_genie = genie_beam_direction(g)
    a_rx = None
    if scheme == "BeamSync":
        yp = stage1_receive(link, pilots, rng, cfg.noise_scale)
        a_tx = estimate_beam_direction(yp)
    elif scheme == "BeamSyncGenie":
        a_tx = a_genie
    elif scheme == "Analog":
        yp = stage1_receive(link, pilots, rng, cfg.noise_scale)
        a_tx = analog_select_tx(yp, list(_cached_codebook(cfg.mp)))
    elif scheme == "AnalogGenie":
        a_tx, a_rx = analog_genie_select(g, list(_cached_codebook(cfg.mp)),
                                         list(_cached_codebook(cfg.ms)))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    ys = stage2_receive(link, a_tx, waveform, rng, cfg.noise_scale)
    if scheme == "Analog":
        a_rx = analog_select_rx(ys, list(_cached_codebook(cfg.ms)))
    if a_rx is not None:
        ys = collapse_rx_beam(ys, a_rx)
    estimate = estimate_offset(ys, waveform, cfg.estimator)
    alignment = float(abs(np.vdot(a_tx.weights, a_genie.weights)))
    return estimate, alignment, a_genie


def run_trial(cfg: ExperimentConfig, scheme: str, rho: float, rng: np.random.Generator,
              pilots: PilotMatrix | None = None, waveform: SyncWaveform | None = None,
              channel: ChannelMatrix | None = None) -> TrialResult:
    """One Monte Carlo trial: draw channel and offset, run the handshake, estimate.

    pilots / waveform / channel may be passed in to share the deterministic
    objects across trials; when omitted they are built from the config.
    A degenerate round (all-zero block) is recorded with valid = False.
    """
    if pilots is None:
        pilots = make_orthonormal_pilots(cfg.tau_p, cfg.ms)
    if waveform is None:
        waveform = make_sync_signal(cfg.n, cfg.cycles, cfg.leading_one)
    if channel is None:
        channel = build_channel(cfg, rng)
    delta = cfg.offset.draw(rng)
    estimate, alignment, a_genie = _protocol_round(cfg, scheme, rho, channel, delta,
                                                   rng, pilots, waveform)
    error = circular_offset_error(estimate.delta_hat, delta)
    b_genie = channel.entries.T @ a_genie.weights
    return TrialResult(
        scheme=scheme,
        snr_db=10.0 * float(np.log10(rho)),
        delta_true=delta,
        delta_hat=estimate.delta_hat,
        squared_error=error * error,
        beam_alignment=alignment,
        crb=crb_closed_form(waveform, b_genie, rho),
        objective_value=estimate.objective_value,
        valid=estimate.valid,
    )


def _sweep_cell(cfg: ExperimentConfig, scheme_index: int, snr_index: int) -> RmsePoint:
    """All trials of one (scheme, SNR) cell, accumulated in trial order."""
    scheme = cfg.schemes[scheme_index]
    snr_db = cfg.snr_grid_db[snr_index]
    rho = 10.0 ** (snr_db / 10.0)
    pilots = make_orthonormal_pilots(cfg.tau_p, cfg.ms)
    waveform = make_sync_signal(cfg.n, cfg.cycles, cfg.leading_one)
    channel = _los_channel_for(cfg) if cfg.channel.model == "los" else None
    sq_errors = np.empty(cfg.trials)
    crbs = np.empty(cfg.trials)
    for t in range(cfg.trials):
        rng = trial_rng(cfg.master_seed, scheme, snr_index, t)
        result = run_trial(cfg, scheme, rho, rng, pilots=pilots, waveform=waveform,
                           channel=channel)
        sq_errors[t] = result.squared_error
        crbs[t] = result.crb
    return RmsePoint(
        scheme=scheme,
        snr_db=float(snr_db),
        trials=cfg.trials,
        rmse=float(np.sqrt(np.mean(sq_errors))),
        crb_sqrt_avg=float(np.mean(np.sqrt(crbs))),
    )


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> RmseCurve:
    """RMSE over the full (scheme, SNR) grid.

    Cells are independent; with workers > 1 they are distributed over a
    process pool.  Results are identical for any worker count because each
    cell is computed whole and reassembled in grid order.
    """
    cells = [(s, r) for s in range(len(cfg.schemes)) for r in range(len(cfg.snr_grid_db))]
    if workers <= 1:
        points = [_sweep_cell(cfg, s, r) for s, r in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_cell, repeat(cfg),
                                   [s for s, _ in cells], [r for _, r in cells]))
    return RmseCurve(points=tuple(points), config_sha=config_fingerprint(cfg))


def run_multi_panel_schedule(cfg: ExperimentConfig, n_panels: int,
                             rng: np.random.Generator) -> list[PanelSyncResult]:
    """Sequential sync of several secondary panels against one primary.

    Each panel gets its own channel, oscillator offset, and random stream;
    rounds run at the first SNR grid point.  Residual = true offset minus
    the estimate, wrapped to the unit offset circle.
    """
    if n_panels < 1:
        raise ValueError("n_panels must be >= 1")
    rho = 10.0 ** (cfg.snr_grid_db[0] / 10.0)
    pilots = make_orthonormal_pilots(cfg.tau_p, cfg.ms)
    waveform = make_sync_signal(cfg.n, cfg.cycles, cfg.leading_one)
    primary_osc = OscillatorState(panel_id="primary", frequency=0.0)
    results = []
    for panel, panel_rng in enumerate(rng.spawn(n_panels), start=1):
        channel = build_channel(cfg, panel_rng)
        secondary_osc = OscillatorState(panel_id=panel,
                                        frequency=-cfg.offset.draw(panel_rng))
        delta = primary_osc.offset_to(secondary_osc)
        estimate, _, _ = _protocol_round(cfg, "BeamSync", rho, channel, delta,
                                         panel_rng, pilots, waveform)
        residual = circular_offset_error(delta, estimate.delta_hat)
        results.append(PanelSyncResult(panel=panel, delta_true=delta,
                                       estimate=estimate, residual=residual))
    return results


def simulate_drift_timeline(cfg: ExperimentConfig, drift_rate: float,
                            resync_threshold: float, slots: int,
                            rng: np.random.Generator) -> DriftTimeline:
    """Oscillator drift with on-demand re-synchronization.

    The secondary oscillator random-walks by N(drift_rate, (drift_rate/4)^2)
    per slot.  Slot 0 always runs a cold-start sync round; afterwards a
    round runs only when the residual offset exceeds the threshold, and
    resets the residual to that round's estimation error.  Sync rounds run
    at the drift section's SNR.
    """
    if slots < 1:
        raise ValueError("slots must be >= 1")
    rho = 10.0 ** (cfg.drift.snr_db / 10.0)
    pilots = make_orthonormal_pilots(cfg.tau_p, cfg.ms)
    waveform = make_sync_signal(cfg.n, cfg.cycles, cfg.leading_one)
    secondary = OscillatorState(panel_id=1, frequency=-cfg.offset.draw(rng),
                                drift_rate=drift_rate)
    primary = OscillatorState(panel_id="primary", frequency=0.0)
    compensation = 0.0

    def sync_round() -> float:
        offset = primary.offset_to(secondary) - compensation
        channel = build_channel(cfg, rng)
        estimate, _, _ = _protocol_round(cfg, "BeamSync", rho, channel, offset, rng,
                                         pilots, waveform)
        return estimate.delta_hat

    rows = []
    compensation += sync_round()
    residual = primary.offset_to(secondary) - compensation
    rows.append((0, residual, "sync"))
    for slot in range(1, slots):
        if drift_rate != 0.0:
            step = rng.normal(drift_rate, 0.25 * abs(drift_rate))
            secondary.frequency -= step
        residual = primary.offset_to(secondary) - compensation
        event = ""
        if abs(residual) > resync_threshold:
            compensation += sync_round()
            residual = primary.offset_to(secondary) - compensation
            event = "sync"
        rows.append((slot, residual, event))
    return DriftTimeline(rows=tuple(rows))
