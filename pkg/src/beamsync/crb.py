"""Fisher information and the Cramer-Rao bound on the offset estimate.

The unknown parameter vector is theta = [Re(b); Im(b); delta] with
dimension 2Ms + 1.  For one time instant n the information matrix is

    J_n = 2 rho x_n^2 [[ I        0        2 pi n b_I ]
                       [ 0        I       -2 pi n b_R ]
                       [ 2pi n b_I^T  -2pi n b_R^T  4 pi^2 n^2 ||b||^2 ]]

and the total information is the sum over n = 1..N (independent samples).
The bound on the offset is the lower-right corner of the inverse, which a
block-matrix inversion collapses to the closed form

    CRB = 1 / (8 pi^2 rho ||b||^2 (sum n^2 x_n^2 - (sum n x_n^2)^2 / sum x_n^2)).

crb_numerical assembles and inverts the full matrix; crb_closed_form
evaluates the formula.  Agreeing to 1e-9 relative across random cases is
the package's end-to-end check of the derivation.

The noise covariance is the constant I/2 per real/imaginary stack, so the
covariance-derivative trace term of the information is identically zero
and is omitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SyncWaveform


class IdentifiabilityError(ValueError):
    """The offset is not identifiable from the given waveform and channel."""


@dataclass(frozen=True)
class FisherInfo:
    """Real symmetric information matrix in the [b_R; b_I; delta] ordering."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("information matrix must be square")
        if mat.shape[0] % 2 != 1:
            raise ValueError("information matrix must have odd dimension 2*Ms + 1")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_antennas(self) -> int:
        return (self.matrix.shape[0] - 1) // 2


def fim_single(n: int, x_n: float, b: np.ndarray, rho: float) -> FisherInfo:
    """Information contributed by time instant n carrying sample value x_n."""
    if n < 1:
        raise ValueError("time instants are counted from 1")
    if rho <= 0:
        raise ValueError("rho must be positive")
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    ms = b.size
    br = b.real
    bi = b.imag
    dim = 2 * ms + 1
    mat = np.zeros((dim, dim))
    mat[:ms, :ms] = np.eye(ms)
    mat[ms:2 * ms, ms:2 * ms] = np.eye(ms)
    mat[:ms, -1] = 2.0 * np.pi * n * bi
    mat[ms:2 * ms, -1] = -2.0 * np.pi * n * br
    mat[-1, :ms] = mat[:ms, -1]
    mat[-1, ms:2 * ms] = mat[ms:2 * ms, -1]
    mat[-1, -1] = 4.0 * np.pi ** 2 * n ** 2 * float(np.dot(br, br) + np.dot(bi, bi))
    return FisherInfo(matrix=2.0 * rho * x_n ** 2 * mat)


def fim_total(x: SyncWaveform, b: np.ndarray, rho: float) -> FisherInfo:
    """Total information over the burst: sum of per-instant contributions.

    Sample index n-1 of the waveform is transmitted at time instant n, the
    same pairing the received blocks use.
    """
    if x.length < 2:
        raise IdentifiabilityError("offset is not identifiable from a single sample")
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    total = np.zeros((2 * b.size + 1, 2 * b.size + 1))
    for n in range(1, x.length + 1):
        total += fim_single(n, float(x.samples[n - 1]), b, rho).matrix
    return FisherInfo(matrix=total)


def _weighted_sums(x: SyncWaveform) -> tuple[float, float, float]:
    n = np.arange(1, x.length + 1, dtype=np.float64)
    x2 = x.samples ** 2
    return float(x2.sum()), float(np.dot(n, x2)), float(np.dot(n * n, x2))


def crb_closed_form(x: SyncWaveform, b: np.ndarray, rho: float) -> float:
    """Closed-form bound on the offset variance."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if x.length < 2:
        raise IdentifiabilityError("offset is not identifiable from a single sample")
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    b_energy = float(np.sum(np.abs(b) ** 2))
    if b_energy == 0.0:
        raise IdentifiabilityError("zero effective channel carries no offset information")
    s0, s1, s2 = _weighted_sums(x)
    if s0 == 0.0:
        raise IdentifiabilityError("waveform has zero energy")
    spread = s2 - s1 ** 2 / s0
    if spread <= 0.0:
        raise IdentifiabilityError(
            "waveform energy sits at a single time instant; offset unobservable"
        )
    return 1.0 / (8.0 * np.pi ** 2 * rho * b_energy * spread)


def crb_numerical(x: SyncWaveform, b: np.ndarray, rho: float) -> float:
    """Offset bound from the assembled information matrix.

    Solves for the last column of the inverse rather than inverting the
    full matrix; raises IdentifiabilityError when the information is
    singular (for example b = 0).
    """
    info = fim_total(x, b, rho)
    dim = info.matrix.shape[0]
    rhs = np.zeros(dim)
    rhs[-1] = 1.0
    try:
        col = np.linalg.solve(info.matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise IdentifiabilityError(f"singular information matrix: {exc}") from exc
    corner = float(col[-1])
    if not np.isfinite(corner) or corner <= 0.0:
        raise IdentifiabilityError("information matrix is not positive definite")
    return corner
