"""Scalp-field interpolation and colorization.

Per-electrode values are spread over the projected head surface with modified
Shepard weights on great-circle distance (exact at the electrodes), then
colored: pixels geodesically nearest to a highlighted electrode use the
region colormap, everything else a luminance ramp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .montage import Montage

# Colormap stops are repo data: (position, (r, g, b)). Lookup interpolates
# linearly between stops and clamps to the ends.
DIVERGING_STOPS = (
    (-1.0, (28, 60, 212)),
    (-0.5, (108, 156, 243)),
    (0.0, (233, 233, 233)),
    (0.5, (246, 144, 84)),
    (1.0, (212, 36, 24)),
)
SEQUENTIAL_STOPS = (
    (0.0, (20, 18, 60)),
    (0.25, (70, 38, 128)),
    (0.5, (148, 54, 140)),
    (0.75, (222, 114, 84)),
    (1.0, (252, 224, 104)),
)
GRAY_STOPS = (
    (-1.0, (0, 0, 0)),
    (1.0, (255, 255, 255)),
)

# Texture-space radius of the head outline (the electrode ring sits here).
HEAD_RADIUS_UV = 0.45
_SNAP_EPS = 1e-9
_SHEPARD_EPS = 1e-12


@dataclass(frozen=True)
class ColorPolicy:
    """Gain applied before color lookup plus the two colormaps."""

    gain: float = 1.0
    highlight_stops: tuple = DIVERGING_STOPS
    gray_stops: tuple = GRAY_STOPS

    def __post_init__(self):
        if not (0.0 < self.gain <= 8.0) or not np.isfinite(self.gain):
            raise ConfigError(f"gain must be in (0, 8], got {self.gain}")


@dataclass
class ScalpField:
    """Interpolated W x H scalar grid plus the inside-head mask."""

    width: int
    height: int
    values: np.ndarray  # (H, W) float
    mask: np.ndarray    # (H, W) bool


def map_color(stops, value: float) -> tuple[int, int, int]:
    """Piecewise-linear colormap lookup, clamped to the end stops.

    Rounding is floor(x + 0.5) so independent implementations can match bytes.
    """
    if value <= stops[0][0]:
        return stops[0][1]
    if value >= stops[-1][0]:
        return stops[-1][1]
    for (p0, c0), (p1, c1) in zip(stops, stops[1:]):
        if value <= p1:
            t = (value - p0) / (p1 - p0)
            return tuple(int(np.floor(c0[i] + (c1[i] - c0[i]) * t + 0.5)) for i in range(3))
    return stops[-1][1]


def _map_colors(stops, values: np.ndarray) -> np.ndarray:
    """Vectorized map_color over an array; returns uint8 (..., 3)."""
    pos = np.array([p for p, _ in stops])
    cols = np.array([c for _, c in stops], dtype=float)
    v = np.clip(values, pos[0], pos[-1])
    idx = np.clip(np.searchsorted(pos, v, side="right") - 1, 0, len(pos) - 2)
    t = (v - pos[idx]) / (pos[idx + 1] - pos[idx])
    rgb = cols[idx] + (cols[idx + 1] - cols[idx]) * t[..., None]
    return np.floor(rgb + 0.5).astype(np.uint8)


class ScalpGrid:
    """Precomputed grid geometry for one (montage, width, height) combination.

    Holds the pixel->head-surface mapping, the Shepard weight table, the
    electrode pixel indices for exact snapping, and the geodesic Voronoi
    (nearest-electrode) partition. All methods are pure given the instance.
    """

    def __init__(self, montage: Montage, width: int = 128, height: int = 128):
        if width < 32 or height < 32:
            raise ConfigError(f"grid must be at least 32x32, got {width}x{height}")
        self.montage = montage
        self.width = int(width)
        self.height = int(height)

        u = (np.arange(width) + 0.5) / width
        v = (np.arange(height) + 0.5) / height
        uu, vv = np.meshgrid(u, v)
        du, dv = uu - 0.5, vv - 0.5
        r = np.hypot(du, dv)
        self.mask = r <= HEAD_RADIUS_UV

        # invert the azimuthal-equidistant projection: texture radius -> inclination
        theta = r * (np.pi / 2.0) / HEAD_RADIUS_UV
        az = np.arctan2(du, -dv)
        sin_t = np.sin(theta)
        pts = np.stack([sin_t * np.sin(az), sin_t * np.cos(az), np.cos(theta)], axis=-1)

        flat = pts[self.mask]                      # (P, 3)
        dots = np.clip(flat @ montage.positions.T, -1.0, 1.0)
        dists = np.arccos(dots)                    # (P, n_el)
        w = 1.0 / (dists * dists + _SHEPARD_EPS)
        self._weights = w / w.sum(axis=1, keepdims=True)
        self._nearest_flat = np.argmin(dists, axis=1).astype(np.int32)

        # electrode -> containing pixel (row, col); exact value snap target
        cols = np.clip((montage.uvs[:, 0] * width).astype(int), 0, width - 1)
        rows = np.clip((montage.uvs[:, 1] * height).astype(int), 0, height - 1)
        self.electrode_pixels = np.stack([rows, cols], axis=1)

        self.nearest = np.full((height, width), -1, dtype=np.int32)
        self.nearest[self.mask] = self._nearest_flat

    def interpolate(self, values) -> ScalpField:
        """Shepard-interpolate one value per electrode onto the grid."""
        values = np.asarray(values, dtype=float)
        if values.shape != (len(self.montage),):
            raise ValueError(
                f"expected {len(self.montage)} electrode values, got shape {values.shape}"
            )
        grid = np.zeros((self.height, self.width))
        grid[self.mask] = self._weights @ values
        # interpolant is exact at the electrodes themselves
        grid[self.electrode_pixels[:, 0], self.electrode_pixels[:, 1]] = values
        return ScalpField(self.width, self.height, grid, self.mask.copy())

    def colorize(self, fld: ScalpField, highlight, policy: ColorPolicy) -> np.ndarray:
        """RGBA uint8 image under the highlight/grayscale policy."""
        hi_idx = set(self.montage.indices(highlight))
        is_hi = np.zeros(len(self.montage), dtype=bool)
        for i in hi_idx:
            is_hi[i] = True
        scaled = fld.values * policy.gain
        rgba = np.zeros((self.height, self.width, 4), dtype=np.uint8)
        hi_pix = np.zeros((self.height, self.width), dtype=bool)
        hi_pix[fld.mask] = is_hi[self.nearest[fld.mask]]
        lo_pix = fld.mask & ~hi_pix
        if hi_pix.any():
            rgba[hi_pix, :3] = _map_colors(policy.highlight_stops, scaled[hi_pix])
        if lo_pix.any():
            rgba[lo_pix, :3] = _map_colors(policy.gray_stops, scaled[lo_pix])
        rgba[fld.mask, 3] = 255
        return rgba

    def mask_bits(self) -> bytes:
        """Mask as a row-major bitset (MSB-first within each byte)."""
        return np.packbits(self.mask.astype(np.uint8), axis=None).tobytes()


def interpolate(values, montage: Montage, width: int, height: int) -> ScalpField:
    """One-shot interpolation; prefer a cached ScalpGrid for repeated frames."""
    return ScalpGrid(montage, width, height).interpolate(values)


def colorize(fld: ScalpField, highlight, montage: Montage, policy: ColorPolicy) -> np.ndarray:
    """One-shot colorization matching :meth:`ScalpGrid.colorize`."""
    return ScalpGrid(montage, fld.width, fld.height).colorize(fld, highlight, policy)


def eye_state(blink: bool) -> str:
    """Eye-render descriptor: eyes close exactly while a blink is in progress."""
    return "closed" if blink else "open"
