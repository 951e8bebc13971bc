"""The two-stage sync handshake and the beam-selection rules.

Stage I: the secondary transmits the orthonormal pilot block; the primary
receives Y_p = sqrt(rho) G Phi^H D + W_p and picks a transmit beam from it.
Stage II: the primary beamforms the sync burst back; the secondary receives
Y_s = sqrt(rho) G^T a x^T D* + W_s and hands it to the offset estimator.

Beam choices come in four flavors, named as they appear in result files:

* BeamSync        - dominant left singular vector of the received block.
* BeamSyncGenie   - dominant left singular vector of the true channel.
* Analog          - best beam from a fixed DFT codebook, picked by
                    received power on each side.
* AnalogGenie     - codebook pair picked from the true channel.

Noise is always unit-variance CN(0, 1) per entry; rho is the linear SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelMatrix
from .signals import PilotMatrix, SyncWaveform, apply_rotation, rotation_diag

SCHEMES = ("BeamSync", "BeamSyncGenie", "Analog", "AnalogGenie")

PRIMARY_SIDE = "primary-received"
SECONDARY_SIDE = "secondary-received"


@dataclass(frozen=True)
class BeamVector:
    """Unit-norm complex beamforming weights."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.complex128).reshape(-1)
        if w.size < 1:
            raise ValueError("beam vector is empty")
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ValueError("beam vector must have unit norm")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class ReceivedBlock:
    """Received samples, shape (antennas, time), with the SNR they were drawn at."""

    entries: np.ndarray
    snr: float
    side: str

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=np.complex128)
        if ent.ndim != 2:
            raise ValueError("received block must be 2-D (antennas x time)")
        if self.snr <= 0:
            raise ValueError("snr must be positive (linear scale)")
        if self.side not in (PRIMARY_SIDE, SECONDARY_SIDE):
            raise ValueError(f"unknown side {self.side!r}")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @property
    def n_antennas(self) -> int:
        return self.entries.shape[0]

    @property
    def n_samples(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class SyncLinkState:
    """One primary-secondary link: true offset, SNR, channel, and scheme."""

    true_offset: float
    snr: float
    channel: ChannelMatrix
    scheme: str = "BeamSync"

    def __post_init__(self):
        if self.snr <= 0:
            raise ValueError("snr must be positive (linear scale)")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")


def _complex_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) noise, real part drawn before imaginary part."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    """Rotate a vector so its largest-magnitude entry is real and positive.

    Resolves the global phase ambiguity of singular vectors; the physics is
    invariant but tests and trials become deterministic.
    """
    idx = int(np.argmax(np.abs(v)))
    pivot = v[idx]
    mag = abs(pivot)
    if mag == 0.0:
        raise ValueError("cannot phase-normalize the zero vector")
    return v * (pivot.conj() / mag)


def stage1_receive(link: SyncLinkState, pilots: PilotMatrix, rng: np.random.Generator,
                   noise_scale: float = 1.0) -> ReceivedBlock:
    """Stage-I block at the primary: sqrt(rho) G Phi^H D + W.

    Pilot row count must be at least the secondary antenna count so every
    antenna is excited.  noise_scale = 0 yields the noiseless block.
    """
    g = link.channel.entries
    n_primary, n_secondary = g.shape
    if pilots.n_antennas != n_secondary:
        raise ValueError(
            f"pilot block excites {pilots.n_antennas} antennas but channel has {n_secondary}"
        )
    rot = rotation_diag(link.true_offset, pilots.tau_p)
    clean = apply_rotation(np.sqrt(link.snr) * (g @ pilots.entries.conj().T), rot)
    noise = noise_scale * _complex_noise(rng, clean.shape)
    return ReceivedBlock(entries=clean + noise, snr=link.snr, side=PRIMARY_SIDE)


def estimate_beam_direction(yp: ReceivedBlock) -> BeamVector:
    """Transmit beam from the received pilots: conjugate dominant left singular vector.

    The leading left singular vector of the stage-I block is the direction
    in which most pilot power arrived; conjugating it steers the reply back
    along the same direction over the reciprocal channel.
    """
    if yp.side != PRIMARY_SIDE:
        raise ValueError("beam direction is estimated from the primary-side block")
    ent = yp.entries
    if not np.any(ent):
        raise ValueError("cannot estimate a beam from an all-zero block")
    u, _, _ = np.linalg.svd(ent, full_matrices=False)
    return BeamVector(weights=_phase_normalize(u[:, 0].conj()))


def genie_beam_direction(g: ChannelMatrix) -> BeamVector:
    """Optimal transmit beam from the true channel: conjugate dominant left singular vector.

    Maximizes ||G^T a||^2 over unit-norm a; the maximum equals the squared
    largest singular value of G.
    """
    ent = g.entries
    if not np.any(ent):
        raise ValueError("zero channel has no beam direction")
    u, _, _ = np.linalg.svd(ent, full_matrices=False)
    return BeamVector(weights=_phase_normalize(u[:, 0].conj()))


def stage2_receive(link: SyncLinkState, beam: BeamVector, x: SyncWaveform,
                   rng: np.random.Generator, noise_scale: float = 1.0) -> ReceivedBlock:
    """Stage-II block at the secondary: sqrt(rho) (G^T a) x^T D* + W.

    The rotation is conjugated relative to stage I: the offset enters with
    opposite sign on the return direction.
    """
    g = link.channel.entries
    if len(beam) != g.shape[0]:
        raise ValueError(
            f"beam has {len(beam)} weights but primary panel has {g.shape[0]} antennas"
        )
    b = g.T @ beam.weights
    rot = rotation_diag(link.true_offset, x.length)
    clean = apply_rotation(np.sqrt(link.snr) * np.outer(b, x.samples), rot, conjugate=True)
    noise = noise_scale * _complex_noise(rng, clean.shape)
    return ReceivedBlock(entries=clean + noise, snr=link.snr, side=SECONDARY_SIDE)


def dft_codebook(n_antennas: int) -> list[BeamVector]:
    """Fixed orthogonal beam set: columns of the unitary DFT matrix.

    Beam k has entries exp(-j 2 pi k m / M) / sqrt(M), m = 0..M-1.
    """
    if n_antennas < 1:
        raise ValueError("codebook size must be >= 1")
    m = np.arange(n_antennas)
    mat = np.exp(-2j * np.pi * np.outer(m, m) / n_antennas) / np.sqrt(n_antennas)
    return [BeamVector(weights=mat[:, k]) for k in range(n_antennas)]


def _select_max_power(block: np.ndarray, codebook: list[BeamVector]) -> int:
    """Index of the codebook beam maximizing ||f^H Y||^2; first index wins ties."""
    if not codebook:
        raise ValueError("codebook is empty")
    if any(len(f) != block.shape[0] for f in codebook):
        raise ValueError("codebook beam length does not match the block antenna count")
    metrics = np.array([np.sum(np.abs(f.weights.conj() @ block) ** 2) for f in codebook])
    return int(np.argmax(metrics))


def analog_select_tx(yp: ReceivedBlock, codebook: list[BeamVector]) -> BeamVector:
    """Analog transmit beam: power-maximizing codebook entry, conjugated.

    Returns f_k* where k = argmax ||f_k^H Y_p||^2; the conjugate steers the
    stage-II transmission back through the reciprocal channel.
    """
    k = _select_max_power(yp.entries, codebook)
    return BeamVector(weights=codebook[k].weights.conj())


def analog_select_rx(ys: ReceivedBlock, codebook: list[BeamVector]) -> BeamVector:
    """Analog receive beam at the secondary: power-maximizing codebook entry, unconjugated."""
    l = _select_max_power(ys.entries, codebook)
    return codebook[l]


def analog_genie_select(g: ChannelMatrix, tx_codebook: list[BeamVector],
                        rx_codebook: list[BeamVector]) -> tuple[BeamVector, BeamVector]:
    """Jointly optimal codebook pair from the true channel.

    Exhaustive argmax of |f_p^H G f_s|^2 over the beam grid; ties resolve
    to the lexicographically lowest (k, l).  Returns (f_p_k*, f_s_l).
    """
    if not tx_codebook or not rx_codebook:
        raise ValueError("codebooks must be non-empty")
    ent = g.entries
    if any(len(f) != ent.shape[0] for f in tx_codebook):
        raise ValueError("tx codebook does not match the primary antenna count")
    if any(len(f) != ent.shape[1] for f in rx_codebook):
        raise ValueError("rx codebook does not match the secondary antenna count")
    fp = np.column_stack([f.weights for f in tx_codebook])
    fs = np.column_stack([f.weights for f in rx_codebook])
    metric = np.abs(fp.conj().T @ ent @ fs) ** 2          # (K, L)
    k, l = np.unravel_index(int(np.argmax(metric)), metric.shape)
    return (BeamVector(weights=tx_codebook[k].weights.conj()), rx_codebook[l])


def collapse_rx_beam(ys: ReceivedBlock, a_s: BeamVector) -> ReceivedBlock:
    """Project a stage-II block onto a receive beam, giving a 1 x N block.

    With a unit-norm beam the projected noise stays unit-variance, so the
    collapsed block feeds the shared offset estimator unchanged.
    """
    if len(a_s) != ys.n_antennas:
        raise ValueError(
            f"receive beam has {len(a_s)} weights but block has {ys.n_antennas} antennas"
        )
    row = a_s.weights.conj() @ ys.entries
    return ReceivedBlock(entries=row[np.newaxis, :], snr=ys.snr, side=ys.side)
