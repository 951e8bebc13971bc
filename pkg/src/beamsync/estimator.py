"""Joint maximum-likelihood estimation of the frequency offset and effective channel.

The secondary panel sees Y_s = sqrt(rho) b x^T D* + W with unknown b and
offset delta.  Concentrating out b reduces the joint ML problem to

    delta_hat = argmax_delta || Y_s D_delta x ||^2,
    b_hat     = Y_s D_delta_hat x / (sqrt(rho) ||x||^2),

where D_delta has diagonal exp(j 2 pi n delta), n = 1..N, and x is real so
its conjugate is itself.  The objective is evaluated as a per-antenna
matched filter (never forming the diagonal matrix), scanned on a coarse
grid dense enough to sample the main lobe, then refined by golden-section
search inside the winning grid cell, with a final guarded Newton polish on
the objective derivative to reach machine-level accuracy at clean SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .protocol import ReceivedBlock
from .signals import SyncWaveform

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_GRID_CHUNK = 4096


@dataclass(frozen=True)
class OffsetEstimate:
    """Estimated offset (cycles/sample), effective channel, and peak objective.

    valid is False when the block was degenerate (objective identically
    zero); the numeric fields are then placeholders, never silently
    meaningful.
    """

    delta_hat: float
    b_hat: np.ndarray
    objective_value: float
    valid: bool = True


@dataclass(frozen=True)
class EstimatorConfig:
    """Search controls for the offset estimator.

    coarse_grid_points = None picks 8N points, which keeps the grid spacing
    at 1/(8N), well below the 1/N main-lobe width of the objective; any
    explicit grid must keep spacing <= 1/(4N).
    """

    search_halfwidth: float = 0.5
    coarse_grid_points: int | None = None
    refine_tolerance: float = 1e-9
    refine_max_iters: int = 100

    def __post_init__(self):
        if not 0.0 < self.search_halfwidth <= 0.5:
            raise ValueError("search_halfwidth must be in (0, 0.5]")
        if self.coarse_grid_points is not None and self.coarse_grid_points < 2:
            raise ValueError("coarse_grid_points must be >= 2")
        if self.refine_tolerance <= 0:
            raise ValueError("refine_tolerance must be positive")
        if self.refine_max_iters < 1:
            raise ValueError("refine_max_iters must be >= 1")

    def grid_points(self, n_samples: int) -> int:
        points = self.coarse_grid_points
        if points is None:
            points = 8 * n_samples
        spacing = 2.0 * self.search_halfwidth / points
        if spacing > 1.0 / (4.0 * n_samples) + 1e-15:
            raise ValueError(
                f"coarse grid spacing {spacing:.3g} too wide to isolate the peak; "
                f"need <= 1/(4N) = {1.0 / (4 * n_samples):.3g}"
            )
        return points


def _matched_filter_weights(x_samples: np.ndarray, delta: float) -> np.ndarray:
    n = np.arange(1, x_samples.size + 1)
    return x_samples * np.exp(2j * np.pi * n * delta)


def _check_block(ys: ReceivedBlock, x: SyncWaveform) -> None:
    if ys.n_samples != x.length:
        raise ValueError(
            f"block spans {ys.n_samples} samples but the waveform has {x.length}"
        )


def ml_objective(ys: ReceivedBlock, x: SyncWaveform, delta: float) -> float:
    """Likelihood objective || Y_s D_delta x ||^2 at one candidate offset.

    Periodic in delta with period 1 (the rotation phases repeat)."""
    _check_block(ys, x)
    w = _matched_filter_weights(x.samples, delta)
    v = ys.entries @ w
    return float(np.sum(np.abs(v) ** 2))


def ml_objective_grid(ys: ReceivedBlock, x: SyncWaveform, deltas: np.ndarray) -> np.ndarray:
    """Vectorized objective over an array of candidate offsets.

    Evaluated in fixed-size chunks in a fixed order, so the result is
    reproducible bit-for-bit regardless of the grid size.
    """
    _check_block(ys, x)
    deltas = np.asarray(deltas, dtype=np.float64).reshape(-1)
    n = np.arange(1, x.length + 1)
    out = np.empty(deltas.size, dtype=np.float64)
    for start in range(0, deltas.size, _GRID_CHUNK):
        chunk = deltas[start:start + _GRID_CHUNK]
        weights = x.samples[np.newaxis, :] * np.exp(
            2j * np.pi * chunk[:, np.newaxis] * n[np.newaxis, :])
        v = ys.entries @ weights.T                         # (antennas, chunk)
        out[start:start + _GRID_CHUNK] = np.sum(np.abs(v) ** 2, axis=0)
    return out


def estimate_effective_channel(ys: ReceivedBlock, x: SyncWaveform, delta: float,
                               rho: float) -> np.ndarray:
    """Closed-form effective-channel estimate Y_s D_delta x / (sqrt(rho) ||x||^2)."""
    _check_block(ys, x)
    if rho <= 0:
        raise ValueError("rho must be positive")
    energy = x.energy
    if energy == 0.0:
        raise ValueError("waveform has zero energy")
    w = _matched_filter_weights(x.samples, delta)
    return (ys.entries @ w) / (np.sqrt(rho) * energy)


def _golden_section_max(f, lo: float, hi: float, tol: float, max_iters: int):
    """Golden-section maximization on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    iters = 0
    while (b - a) > tol and iters < max_iters:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        iters += 1
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _newton_polish(ys_entries: np.ndarray, x_samples: np.ndarray, delta: float,
                   value: float, lo: float, hi: float, max_steps: int = 4):
    """Guarded Newton steps on the objective derivative.

    Golden-section stops at the configured bracket width; a few Newton
    steps on the smooth peak then push the estimate to machine accuracy.
    Near the peak the objective value itself is flat to double precision,
    so progress is judged by the derivative magnitude shrinking; steps are
    rejected when the curvature has the wrong sign, the step leaves the
    bracket, or neither the derivative nor the value improves.
    """
    n = np.arange(1, x_samples.size + 1)
    jn = 2j * np.pi * n

    def derivatives(d):
        w = x_samples * np.exp(2j * np.pi * n * d)
        s0 = ys_entries @ w
        s1 = ys_entries @ (jn * w)
        s2 = ys_entries @ (jn * jn * w)
        val = float(np.sum(np.abs(s0) ** 2))
        d1 = 2.0 * float(np.real(np.vdot(s0, s1)))
        d2 = 2.0 * (float(np.sum(np.abs(s1) ** 2)) + float(np.real(np.vdot(s0, s2))))
        return val, d1, d2

    best_x, best_val = delta, value
    val, d1, d2 = derivatives(best_x)
    for _ in range(max_steps):
        if d2 >= 0.0 or d1 == 0.0:
            break
        step = -d1 / d2
        cand = best_x + step
        if not (lo <= cand <= hi):
            break
        cand_val, cand_d1, cand_d2 = derivatives(cand)
        if abs(cand_d1) >= abs(d1) and cand_val < best_val:
            break
        best_x = cand
        best_val = max(best_val, cand_val)
        val, d1, d2 = cand_val, cand_d1, cand_d2
        if abs(step) < 1e-15:
            break
    return best_x, best_val


def ml_objective_value(ys_entries: np.ndarray, x_samples: np.ndarray, delta: float) -> float:
    """Objective on raw arrays; internal fast path shared by the search loops."""
    w = _matched_filter_weights(x_samples, delta)
    return float(np.sum(np.abs(ys_entries @ w) ** 2))


def estimate_offset(ys: ReceivedBlock, x: SyncWaveform,
                    cfg: EstimatorConfig = EstimatorConfig()) -> OffsetEstimate:
    """ML offset estimate: coarse grid scan, golden-section refinement, Newton polish.

    The coarse grid spans [-search_halfwidth, +search_halfwidth) uniformly;
    the refinement bracket is one grid step to each side of the winning
    point.  An all-zero block yields a result flagged invalid instead of an
    arbitrary argmax over a flat objective.
    """
    _check_block(ys, x)
    n_samples = x.length
    points = cfg.grid_points(n_samples)
    hw = cfg.search_halfwidth
    spacing = 2.0 * hw / points
    grid = -hw + spacing * np.arange(points)
    objective = ml_objective_grid(ys, x, grid)
    best_idx = int(np.argmax(objective))
    if objective[best_idx] == 0.0:
        return OffsetEstimate(
            delta_hat=0.0,
            b_hat=np.zeros(ys.n_antennas, dtype=np.complex128),
            objective_value=0.0,
            valid=False,
        )

    full_range = hw >= 0.5
    lo = grid[best_idx] - spacing
    hi = grid[best_idx] + spacing
    if not full_range:
        lo = max(lo, -hw)
        hi = min(hi, hw)

    fast = lambda d: ml_objective_value(ys.entries, x.samples, d)
    delta, value = _golden_section_max(fast, lo, hi, cfg.refine_tolerance,
                                       cfg.refine_max_iters)
    if objective[best_idx] > value:
        delta, value = float(grid[best_idx]), float(objective[best_idx])
    delta, value = _newton_polish(ys.entries, x.samples, delta, value, lo, hi)

    if full_range:
        delta = float((delta + 0.5) % 1.0 - 0.5)
    else:
        delta = float(np.clip(delta, -hw, hw))
    b_hat = estimate_effective_channel(ys, x, delta, ys.snr)
    return OffsetEstimate(delta_hat=delta, b_hat=b_hat, objective_value=float(value))
