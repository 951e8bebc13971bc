"""Deterministic signal primitives: pilot blocks, sync bursts, rotations.

Everything here is immutable after construction and free of randomness, so
objects can be built once per experiment and shared across parallel trial
workers.

Conventions
-----------
Time instants are counted 1..tau in the rotation diagonals, matching the
per-sample phase progression e^(j 2 pi n delta).  Waveform samples are
stored 0-based; sample index n-1 is transmitted at time instant n, so the
rotation applied to it carries phase 2 pi n delta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PilotMatrix:
    """Orthonormal pilot block of shape (tau_p, n_antennas).

    Rows are time instants, columns are the per-antenna pilot sequences.
    Columns satisfy entries^H entries = I to 1e-12 per entry.
    """

    entries: np.ndarray

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=np.complex128)
        if ent.ndim != 2:
            raise ValueError("pilot block must be a 2-D matrix")
        tau_p, n_ant = ent.shape
        if tau_p < n_ant:
            raise ValueError(
                f"pilot length {tau_p} cannot excite {n_ant} antennas; need tau_p >= n_antennas"
            )
        gram = ent.conj().T @ ent
        if np.max(np.abs(gram - np.eye(n_ant))) > 1e-9:
            raise ValueError("pilot columns are not orthonormal")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @property
    def tau_p(self) -> int:
        return self.entries.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class SyncWaveform:
    """Real-valued frequency-sync burst of length N.

    samples[0] is 1 by default (leading unit sample, see make_sync_signal);
    the remaining samples trace sin(2 pi f n) with f = cycles / N.
    """

    samples: np.ndarray
    cycles: float

    def __post_init__(self):
        samp = np.asarray(self.samples, dtype=np.float64)
        if samp.ndim != 1 or samp.size < 2:
            raise ValueError("sync waveform needs at least 2 real samples")
        if self.cycles <= 0:
            raise ValueError("cycles must be positive")
        samp.setflags(write=False)
        object.__setattr__(self, "samples", samp)

    @property
    def length(self) -> int:
        return self.samples.size

    @property
    def frequency(self) -> float:
        """Normalized frequency of the sinusoid, cycles per sample."""
        return self.cycles / self.samples.size

    @property
    def energy(self) -> float:
        return float(np.dot(self.samples, self.samples))


@dataclass(frozen=True)
class RotationDiag:
    """Diagonal per-sample frequency rotation over tau time instants.

    Entry n (1-based) is exp(j 2 pi n offset); all entries have unit
    modulus.  The dense diagonal is never needed by apply_rotation, but
    diagonal() materializes it for inspection and test oracles.
    """

    offset: float
    length: int
    phases: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("rotation length must be >= 1")
        n = np.arange(1, self.length + 1)
        phases = np.exp(2j * np.pi * n * self.offset)
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)

    def diagonal(self) -> np.ndarray:
        """Dense diagonal entries, index n-1 holding exp(j 2 pi n offset)."""
        return self.phases.copy()


def make_orthonormal_pilots(tau_p: int, n_antennas: int) -> PilotMatrix:
    """Build the deterministic pilot block: first columns of the unitary DFT.

    Using the tau_p-point unitary DFT gives orthonormal, constant-modulus
    pilot sequences for any tau_p >= n_antennas.

    Parameters
    ----------
    tau_p : pilot length (rows).
    n_antennas : number of secondary-panel antennas (columns).
    """
    if tau_p < 1 or n_antennas < 1:
        raise ValueError("tau_p and n_antennas must be positive")
    if tau_p < n_antennas:
        raise ValueError(
            f"pilot length {tau_p} cannot excite {n_antennas} antennas; need tau_p >= n_antennas"
        )
    n = np.arange(tau_p)
    dft = np.exp(-2j * np.pi * np.outer(n, n[:n_antennas]) / tau_p) / np.sqrt(tau_p)
    return PilotMatrix(entries=dft)


def make_sync_signal(n_samples: int, cycles: float = 4, leading_one: bool = True) -> SyncWaveform:
    """Build the sync burst x with x[0] = 1 and x[n] = sin(2 pi f n), f = cycles / N.

    The leading unit sample replaces sin(0) = 0 so the first time instant
    carries energy.  Set leading_one=False for a pure sinusoid (sensitivity
    studies).

    Parameters
    ----------
    n_samples : burst length N; at least 2 (a single sample cannot resolve a
        frequency offset).
    cycles : sinusoid cycles across the burst, default 4 full cycles.
        Fractional counts are allowed (needed for very short bursts); f =
        cycles / N must stay below 1/2 (no aliasing).
    """
    if n_samples < 2:
        raise ValueError("sync burst needs n_samples >= 2")
    if cycles <= 0:
        raise ValueError("cycles must be positive")
    f = cycles / n_samples
    if f >= 0.5:
        raise ValueError(f"cycles/n_samples = {f} aliases; need < 1/2")
    n = np.arange(n_samples)
    samples = np.sin(2.0 * np.pi * f * n)
    if leading_one:
        samples[0] = 1.0
    return SyncWaveform(samples=samples, cycles=cycles)


def rotation_diag(offset: float, length: int) -> RotationDiag:
    """Rotation diagonal with entry n = exp(j 2 pi n offset), n = 1..length."""
    return RotationDiag(offset=float(offset), length=int(length))


def apply_rotation(block: np.ndarray, rot: RotationDiag, conjugate: bool = False) -> np.ndarray:
    """Right-multiply a block by the rotation diagonal (or its conjugate).

    Column n (1-based) is scaled by exp(+-j 2 pi n offset) without forming
    the dense diagonal matrix.  The block's column count must equal the
    rotation length.
    """
    block = np.asarray(block)
    if block.ndim != 2:
        raise ValueError("block must be a 2-D matrix")
    if block.shape[1] != rot.length:
        raise ValueError(
            f"block has {block.shape[1]} columns but rotation length is {rot.length}"
        )
    phases = np.conj(rot.phases) if conjugate else rot.phases
    return block * phases[np.newaxis, :]
