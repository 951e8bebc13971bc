"""Channel generation between the primary and a secondary panel.

Two models are provided:

* Rayleigh rich scattering with i.i.d. CN(0, 1) entries and omnidirectional
  elements, and
* a geometric line-of-sight model: free-space (Friis) magnitude, exact
  propagation phase, and a cos^q directional patch element pattern on both
  panels.

The same matrix serves both link directions: the channel is reciprocal, so
stage I uses G (secondary to primary) and stage II uses G^T.

The line-of-sight model is parametric.  Defaults (q = 2, 6 dBi peak gain,
20 dB front-to-back ratio, 3.5 GHz carrier, half-wavelength grids) are
plain engineering choices and should be treated as scenario knobs, not as
measured antenna data; every run records them in its output metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex gain matrix between panels, shape (primary antennas, secondary antennas)."""

    entries: np.ndarray
    carrier_wavelength: float | None = None

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=np.complex128)
        if ent.ndim != 2:
            raise ValueError("channel matrix must be 2-D")
        if not np.all(np.isfinite(ent)):
            raise ValueError("channel matrix has non-finite entries")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class PanelGeometry:
    """Antenna positions of one panel plus its boresight (wall normal).

    positions has shape (n_antennas, 3) in meters, flattened row-major over
    the element grid.
    """

    antenna_positions: np.ndarray
    boresight: np.ndarray
    rows: int
    cols: int

    def __post_init__(self):
        pos = np.asarray(self.antenna_positions, dtype=np.float64)
        bore = np.asarray(self.boresight, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("antenna_positions must have shape (n, 3)")
        if self.rows * self.cols != pos.shape[0]:
            raise ValueError("rows * cols must equal the antenna count")
        if abs(np.linalg.norm(bore) - 1.0) > 1e-12:
            raise ValueError("boresight must be unit-norm")
        # any coincident pair makes the panel degenerate
        if pos.shape[0] > 1:
            d2 = np.sum((pos[:, None, :] - pos[None, :, :]) ** 2, axis=-1)
            np.fill_diagonal(d2, np.inf)
            if np.min(d2) <= 0.0:
                raise ValueError("antenna positions must be distinct")
        pos.setflags(write=False)
        bore.setflags(write=False)
        object.__setattr__(self, "antenna_positions", pos)
        object.__setattr__(self, "boresight", bore)

    @property
    def n_antennas(self) -> int:
        return self.antenna_positions.shape[0]


@dataclass(frozen=True)
class PatchAntennaParams:
    """cos^q element pattern with a front-to-back floor.

    Gain is max_gain * cos(theta)^q in front of the panel, never below the
    front-to-back floor, and exactly the floor behind the panel plane.  An
    infinite front_to_back_ratio_dB makes the rear hemisphere perfectly
    dark.
    """

    max_gain_dbi: float = 6.0
    pattern_exponent: float = 2.0
    front_to_back_ratio_db: float = 20.0

    def __post_init__(self):
        if self.pattern_exponent < 0:
            raise ValueError("pattern_exponent must be >= 0")
        if self.front_to_back_ratio_db < 0:
            raise ValueError("front_to_back_ratio_db must be >= 0")

    @property
    def max_gain_linear(self) -> float:
        return 10.0 ** (self.max_gain_dbi / 10.0)

    @property
    def back_gain_linear(self) -> float:
        if math.isinf(self.front_to_back_ratio_db):
            return 0.0
        return self.max_gain_linear * 10.0 ** (-self.front_to_back_ratio_db / 10.0)


ISOTROPIC = PatchAntennaParams(max_gain_dbi=0.0, pattern_exponent=0.0,
                               front_to_back_ratio_db=0.0)


def rayleigh_channel(n_primary: int, n_secondary: int, rng: np.random.Generator) -> ChannelMatrix:
    """Draw an i.i.d. CN(0, 1) channel matrix of shape (n_primary, n_secondary).

    Entries are circularly symmetric with unit second moment; the draw is
    reproducible for a given generator state.
    """
    if n_primary < 1 or n_secondary < 1:
        raise ValueError("antenna counts must be positive")
    shape = (n_primary, n_secondary)
    entries = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelMatrix(entries=entries)


def _pattern_gain(cos_theta, params: PatchAntennaParams):
    """Vectorized cos^q gain with front-to-back floor; cos_theta in [-1, 1]."""
    cos_theta = np.asarray(cos_theta, dtype=np.float64)
    front = np.maximum(cos_theta, 0.0) ** params.pattern_exponent
    gain = np.where(cos_theta >= 0.0, params.max_gain_linear * front, 0.0)
    return np.maximum(gain, params.back_gain_linear)


def patch_element_gain(direction: np.ndarray, params: PatchAntennaParams,
                       boresight: np.ndarray) -> float:
    """Linear element gain toward a unit direction vector.

    Parameters
    ----------
    direction : unit 3-vector from the element toward the far end.
    params : pattern parameters.
    boresight : unit 3-vector normal to the panel face.
    """
    direction = np.asarray(direction, dtype=np.float64)
    boresight = np.asarray(boresight, dtype=np.float64)
    if direction.shape != (3,) or boresight.shape != (3,):
        raise ValueError("direction and boresight must be 3-vectors")
    if abs(np.linalg.norm(direction) - 1.0) > 1e-8:
        raise ValueError("direction must be unit-norm")
    if abs(np.linalg.norm(boresight) - 1.0) > 1e-8:
        raise ValueError("boresight must be unit-norm")
    cos_theta = float(np.clip(np.dot(direction, boresight), -1.0, 1.0))
    return float(_pattern_gain(cos_theta, params))


def los_channel(primary: PanelGeometry, secondary: PanelGeometry, wavelength: float,
                patch: PatchAntennaParams) -> ChannelMatrix:
    """Line-of-sight channel between two panels.

    Entry (m, k) couples primary antenna m with secondary antenna k:

        sqrt(g_p * g_s) * (wavelength / (4 pi d)) * exp(-j 2 pi d / wavelength)

    where d is the inter-antenna distance and g_p, g_s are the element
    gains of the two panels evaluated along the connecting ray.

    Parameters
    ----------
    primary, secondary : panel geometries; no antenna pair may coincide.
    wavelength : carrier wavelength in meters.
    patch : element pattern shared by both panels.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    p = primary.antenna_positions
    q = secondary.antenna_positions
    diff = q[np.newaxis, :, :] - p[:, np.newaxis, :]        # (Mp, Ms, 3)
    dist = np.linalg.norm(diff, axis=-1)
    if np.min(dist) <= 0.0:
        raise ValueError("co-located antennas: zero inter-panel distance")
    ray = diff / dist[..., np.newaxis]                       # primary -> secondary
    cos_p = ray @ primary.boresight
    cos_s = -(ray @ secondary.boresight)
    g_p = _pattern_gain(cos_p, patch)
    g_s = _pattern_gain(cos_s, patch)
    magnitude = np.sqrt(g_p * g_s) * wavelength / (4.0 * np.pi * dist)
    phase = np.exp(-2j * np.pi * dist / wavelength)
    return ChannelMatrix(entries=magnitude * phase, carrier_wavelength=wavelength)


def make_wall_panel(center, wall_normal, rows: int, cols: int, spacing: float) -> PanelGeometry:
    """Uniform rows-by-cols antenna grid in a wall plane.

    The grid lies in the plane orthogonal to wall_normal, centered at
    center, with `spacing` meters between neighbors.  For an upright wall
    the grid rows run vertically and the columns horizontally.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    center = np.asarray(center, dtype=np.float64)
    normal = np.asarray(wall_normal, dtype=np.float64)
    nrm = np.linalg.norm(normal)
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError("wall_normal must be unit-norm")
    up = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(normal, up)) > 0.9:                         # horizontal panel: fall back
        up = np.array([1.0, 0.0, 0.0])
    col_axis = np.cross(up, normal)
    col_axis /= np.linalg.norm(col_axis)
    row_axis = np.cross(normal, col_axis)
    row_axis /= np.linalg.norm(row_axis)
    r_off = (np.arange(rows) - (rows - 1) / 2.0) * spacing
    c_off = (np.arange(cols) - (cols - 1) / 2.0) * spacing
    grid = (center[np.newaxis, np.newaxis, :]
            + r_off[:, np.newaxis, np.newaxis] * row_axis
            + c_off[np.newaxis, :, np.newaxis] * col_axis)
    positions = grid.reshape(rows * cols, 3)
    return PanelGeometry(antenna_positions=positions, boresight=normal, rows=rows, cols=cols)


def adjacent_wall_scene(room=(100.0, 100.0, 10.0), rows: int = 4, cols: int = 4,
                        spacing: float = 0.5 * SPEED_OF_LIGHT / 3.5e9,
                        mount_height: float = 5.0) -> tuple[PanelGeometry, PanelGeometry]:
    """Default indoor scenario: two panels centered on adjacent walls.

    The primary panel sits mid-wall on the y = 0 wall facing +y; the
    secondary sits mid-wall on the x = 0 wall facing +x, so their
    boresights are orthogonal.  Returns (primary, secondary).
    """
    rx, ry, _ = room
    primary = make_wall_panel(
        center=(rx / 2.0, 0.0, mount_height), wall_normal=(0.0, 1.0, 0.0),
        rows=rows, cols=cols, spacing=spacing)
    secondary = make_wall_panel(
        center=(0.0, ry / 2.0, mount_height), wall_normal=(1.0, 0.0, 0.0),
        rows=rows, cols=cols, spacing=spacing)
    return primary, secondary


def channel_to_csv(channel: ChannelMatrix) -> str:
    """Row-major CSV dump of a channel matrix as re,im pairs (one matrix row per line)."""
    lines = []
    for row in channel.entries:
        cells = []
        for z in row:
            cells.append(repr(float(z.real)))
            cells.append(repr(float(z.imag)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
