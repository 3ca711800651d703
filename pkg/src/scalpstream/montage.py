"""32-channel electrode montage: geometry, neighborhoods, and named regions.

Positions follow the idealized spherical 10-10 layout: unit sphere centered in
the head, +x toward the right ear, +y toward the nasion, +z through the vertex.
The circumferential ring (Fp1/Fp2, F7/F8, T7/T8, P7/P8, O1/Oz/O2) sits on the
equator; midline and coronal chains step 22.5 degrees; in-between electrodes
are placed by equal-arc interpolation along their row circles.

Texture coordinates are an azimuthal-equidistant (top-down) projection about
the vertex, with the nose toward v=0 and the equator ring at radius 0.45 from
the texture center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# (label, inclination from vertex in degrees, azimuth from nasion in degrees;
#  positive azimuth toward the right ear). Index order is the canonical
# channel order used everywhere else.
_COORDS = [
    ("Fp1", 90.000000, -18.000000),
    ("Fp2", 90.000000, 18.000000),
    ("AFz", 67.500000, 0.000000),
    ("F7", 90.000000, -54.000000),
    ("F3", 59.676336, -38.771600),
    ("Fz", 45.000000, 0.000000),
    ("F4", 59.676336, 38.771600),
    ("F8", 90.000000, 54.000000),
    ("FC5", 69.185900, -68.844318),
    ("FC1", 31.349018, -43.542114),
    ("FC2", 31.349018, 43.542114),
    ("FC6", 69.185900, 68.844318),
    ("T7", 90.000000, -90.000000),
    ("C3", 45.000000, -90.000000),
    ("Cz", 0.000000, 0.000000),
    ("C4", 45.000000, 90.000000),
    ("T8", 90.000000, 90.000000),
    ("CP5", 69.185900, -111.155682),
    ("CP1", 31.349018, -136.457886),
    ("CP2", 31.349018, 136.457886),
    ("CP6", 69.185900, 111.155682),
    ("P7", 90.000000, -126.000000),
    ("P3", 59.676336, -141.228400),
    ("Pz", 45.000000, 180.000000),
    ("P4", 59.676336, 141.228400),
    ("P8", 90.000000, 126.000000),
    ("PO3", 73.861832, -158.288031),
    ("PO4", 73.861832, 158.288031),
    ("O1", 90.000000, -162.000000),
    ("Oz", 90.000000, 180.000000),
    ("O2", 90.000000, 162.000000),
    ("POz", 67.500000, 180.000000),
]

# Four-neighbor Laplacian surrounds for the sensorimotor centers.
LAPLACIAN_NEIGHBORS = {
    "C3": frozenset({"FC5", "FC1", "CP5", "CP1"}),
    "C4": frozenset({"FC2", "FC6", "CP2", "CP6"}),
    "Cz": frozenset({"FC1", "FC2", "CP1", "CP2"}),
}

VISION = frozenset({"P3", "Pz", "P4", "PO3", "PO4", "O1", "Oz", "O2"})
MEDITATION_PAIR = frozenset({"AFz", "Pz"})
BLINK = frozenset({"Fp1", "Fp2"})
MOTOR_CENTERS = frozenset({"C3", "Cz", "C4"})

# Equator ring maps to this radius from the texture center (0.5, 0.5).
_UV_RING_RADIUS = 0.45


@dataclass(frozen=True)
class Electrode:
    """One electrode: 10-20 label, unit-sphere position, texture coordinates."""

    name: str
    pos: tuple[float, float, float]
    uv: tuple[float, float]


def _angles_to_pos(theta_deg: float, az_deg: float) -> tuple[float, float, float]:
    t, a = math.radians(theta_deg), math.radians(az_deg)
    return (math.sin(t) * math.sin(a), math.sin(t) * math.cos(a), math.cos(t))


def _angles_to_uv(theta_deg: float, az_deg: float) -> tuple[float, float]:
    r = _UV_RING_RADIUS * theta_deg / 90.0
    a = math.radians(az_deg)
    return (0.5 + r * math.sin(a), 0.5 - r * math.cos(a))


class Montage:
    """Ordered set of electrodes plus Laplacian neighborhoods and named regions.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, electrodes, laplacian_neighbors=None, regions=None):
        electrodes = tuple(electrodes)
        names = [e.name for e in electrodes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate electrode names in montage")
        if len(electrodes) != 32:
            raise ValueError(f"montage must have exactly 32 electrodes, got {len(electrodes)}")
        for e in electrodes:
            n = math.sqrt(sum(c * c for c in e.pos))
            if abs(n - 1.0) > 1e-9:
                raise ValueError(f"electrode {e.name} position not unit-norm (|pos|={n!r})")
            if not (0.0 <= e.uv[0] <= 1.0 and 0.0 <= e.uv[1] <= 1.0):
                raise ValueError(f"electrode {e.name} uv outside [0,1]^2: {e.uv}")
        required = {"C3", "Cz", "C4", "P3", "Pz", "P4", "PO3", "PO4",
                    "O1", "Oz", "O2", "AFz", "Fp1", "Fp2"}
        missing = required - set(names)
        if missing:
            raise ValueError(f"montage missing required electrodes: {sorted(missing)}")
        self.electrodes = electrodes
        self.labels = tuple(names)
        self._index = {n: i for i, n in enumerate(names)}
        self.laplacian_neighbors = dict(
            LAPLACIAN_NEIGHBORS if laplacian_neighbors is None else laplacian_neighbors
        )
        for center, nbrs in self.laplacian_neighbors.items():
            unknown = (set(nbrs) | {center}) - set(names)
            if unknown:
                raise ValueError(f"laplacian neighborhood of {center} references unknown labels {sorted(unknown)}")
        self.regions = dict(regions) if regions is not None else {
            "VISION": VISION,
            "MEDITATION_PAIR": MEDITATION_PAIR,
            "BLINK": BLINK,
            "MOTOR_CENTERS": MOTOR_CENTERS,
        }
        for rname, labels in self.regions.items():
            unknown = set(labels) - set(names)
            if unknown:
                raise ValueError(f"region {rname} references unknown labels {sorted(unknown)}")
        self.positions = np.array([e.pos for e in electrodes], dtype=float)
        self.uvs = np.array([e.uv for e in electrodes], dtype=float)
        self.positions.setflags(write=False)
        self.uvs.setflags(write=False)

    def __len__(self):
        return len(self.electrodes)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown electrode label {label!r}") from None

    def indices(self, labels) -> list[int]:
        return [self.index(l) for l in labels]

    def position(self, label: str) -> np.ndarray:
        return self.positions[self.index(label)]

    def save(self, path) -> None:
        """Write one `label x y z u v` line per electrode, in channel order."""
        with open(path, "w", encoding="utf-8") as f:
            f.write("# label x y z u v\n")
            for e in self.electrodes:
                f.write("%s %.12f %.12f %.12f %.12f %.12f\n"
                        % (e.name, e.pos[0], e.pos[1], e.pos[2], e.uv[0], e.uv[1]))


def load_montage(path) -> Montage:
    """Load a montage written by :meth:`Montage.save` (alternate caps welcome,
    as long as they keep 32 channels and the required labels)."""
    electrodes = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 'label x y z u v', got {len(parts)} fields")
            name = parts[0]
            try:
                x, y, z, u, v = (float(p) for p in parts[1:])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric coordinate") from None
            electrodes.append(Electrode(name, (x, y, z), (u, v)))
    return Montage(electrodes)


def geodesic_distance(a, b) -> float:
    """Great-circle angle (radians) between two unit vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.arccos(np.clip(np.dot(a, b), -1.0, 1.0)))


def geodesic_distances(points, ref) -> np.ndarray:
    """Great-circle angles from each row of `points` to unit vector `ref`."""
    points = np.asarray(points, dtype=float)
    return np.arccos(np.clip(points @ np.asarray(ref, dtype=float), -1.0, 1.0))


def standard_montage() -> Montage:
    """The canonical 32-channel montage (deterministic)."""
    electrodes = [
        Electrode(name, _angles_to_pos(th, az), _angles_to_uv(th, az))
        for name, th, az in _COORDS
    ]
    return Montage(electrodes)
