"""sLORETA inverse kernel: from a lead field to standardized per-voxel source
power for the dual scalp/cortex view.

The minimum-norm operator is built on the average-referenced lead field and
standardized by the diagonal of the resolution matrix, which gives exact
argmax localization of noise-free single sources. The Gram matrix of an
average-referenced montage always has the all-ones null direction, so the
inversion is an eigenvalue pseudo-inverse with a relative floor rather than a
Cholesky solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError, ParseError, RankError
from .montage import Montage

_MAGIC = "LEADFIELD"
_EIG_FLOOR = 1e-10


@dataclass
class LeadField:
    """M x V gain matrix (uV per unit source) plus voxel positions."""

    gain: np.ndarray             # (M, V) float64
    voxel_positions: np.ndarray  # (V, 3)
    orientation: str = "fixed"

    def __post_init__(self):
        self.gain = np.asarray(self.gain, dtype=float)
        self.voxel_positions = np.asarray(self.voxel_positions, dtype=float)
        m, v = self.gain.shape
        if self.voxel_positions.shape != (v, 3):
            raise ModelError(
                f"voxel positions shape {self.voxel_positions.shape} "
                f"does not match V={v}"
            )
        if not np.all(np.isfinite(self.gain)):
            raise ModelError("lead field contains non-finite entries")
        zero = np.where(~self.gain.any(axis=0))[0]
        if zero.size:
            raise ModelError(f"lead field has all-zero column at voxel {zero[0]}")

    @property
    def n_electrodes(self) -> int:
        return self.gain.shape[0]

    @property
    def n_voxels(self) -> int:
        return self.gain.shape[1]


@dataclass
class SloretaKernel:
    """V x M inverse operator rows plus per-voxel standardization terms."""

    t: np.ndarray                # (V, M)
    resolution_diag: np.ndarray  # (V,)
    alpha: float

    @property
    def n_voxels(self) -> int:
        return self.t.shape[0]

    @property
    def n_electrodes(self) -> int:
        return self.t.shape[1]


def _center(gain: np.ndarray) -> np.ndarray:
    """Average-reference the lead field (H @ gain)."""
    return gain - gain.mean(axis=0, keepdims=True)


def auto_alpha(lead: LeadField) -> float:
    """Order-of-magnitude regularization default: trace(K Kt) / (M * 100)."""
    kc = _center(lead.gain)
    return float(np.sum(kc * kc) / (lead.n_electrodes * 100.0))


def compute_kernel(lead: LeadField, alpha: float | str = 0.0) -> SloretaKernel:
    """Standardized minimum-norm inverse operator for the given lead field.

    alpha may be a number >= 0 or "auto" for the trace heuristic.
    """
    if isinstance(alpha, str):
        if alpha != "auto":
            raise ValueError(f"alpha must be a number or 'auto', got {alpha!r}")
        alpha = auto_alpha(lead)
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")

    m = lead.n_electrodes
    kc = _center(lead.gain)
    h = np.eye(m) - np.full((m, m), 1.0 / m)
    gram = kc @ kc.T + alpha * h

    w, u = np.linalg.eigh(gram)
    floor = _EIG_FLOOR * max(w.max(), 0.0)
    keep = w > floor
    # exactly one null direction (the average-reference ones-vector) is expected
    if np.count_nonzero(~keep) > 1:
        if alpha == 0.0:
            raise RankError(
                f"gram matrix is rank deficient ({np.count_nonzero(keep)} of {m}); "
                "pass alpha > 0 to regularize"
            )
        raise RankError("regularized gram matrix is still rank deficient")
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    pinv_gram = (u * inv_w) @ u.T

    t = kc.T @ pinv_gram                       # (V, M)
    res_diag = np.einsum("vm,mv->v", t, kc)    # diag(T @ Kc)
    if np.any(res_diag <= 0):
        bad = int(np.argmin(res_diag))
        raise ModelError(
            f"non-positive resolution term at voxel {bad}; "
            "the lead-field column is degenerate"
        )
    return SloretaKernel(t=t, resolution_diag=res_diag, alpha=alpha)


def source_power(kernel: SloretaKernel, sample, baseline=None) -> np.ndarray:
    """Standardized per-voxel power for one sample vector or a (M, N) block.

    Without a baseline the raw quadratic values are returned; with one, the
    display normalization mirrors the pipelines (z-score, clamp, [-1, 1]).
    """
    x = np.asarray(sample, dtype=float)
    if x.shape[0] != kernel.n_electrodes:
        raise ValueError(
            f"sample has {x.shape[0]} channels, kernel expects {kernel.n_electrodes}"
        )
    # re-reference explicitly so common-mode offsets cancel exactly
    x = x - x.mean(axis=0, keepdims=(x.ndim > 1))
    y = kernel.t @ x
    if y.ndim == 1:
        s = y * y / kernel.resolution_diag
    else:
        s = np.mean(y * y, axis=1) / kernel.resolution_diag
    if baseline is None:
        return s
    mu, sigma = baseline
    z = (s - mu) / sigma
    return np.clip(z, -3.0, 3.0) / 3.0


def spherical_lead_field(montage: Montage, n_voxels: int = 500,
                         shell_radius: float = 0.8) -> LeadField:
    """Analytic single-shell model: radial current dipoles on an upper shell.

    Deterministic test tooling standing in for a BEM head model. Voxels are a
    Fibonacci lattice over the shell with z > -0.2; the gain is the bare
    dipole potential n.(r_e - r_v)/|r_e - r_v|^3 scaled to uV-like magnitudes.
    """
    # oversample the lattice, keep the topmost n_voxels
    k = np.arange(4 * n_voxels)
    golden = (1 + 5 ** 0.5) / 2
    z = 1 - 2 * (k + 0.5) / k.size
    az = 2 * np.pi * k / golden
    pts = np.stack([np.sqrt(1 - z * z) * np.cos(az),
                    np.sqrt(1 - z * z) * np.sin(az), z], axis=1)
    pts = pts[pts[:, 2] > -0.2]
    if pts.shape[0] < n_voxels:
        raise ValueError(f"cannot place {n_voxels} voxels on the shell")
    pts = pts[np.argsort(-pts[:, 2])[:n_voxels]] * shell_radius

    elec = montage.positions                   # (M, 3) on the unit sphere
    diff = elec[:, None, :] - pts[None, :, :]  # (M, V, 3)
    dist = np.linalg.norm(diff, axis=2)
    normals = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    gain = np.einsum("mvk,vk->mv", diff, normals) / dist ** 3
    return LeadField(gain=gain, voxel_positions=pts, orientation="fixed")


def save_lead_field(lead: LeadField, path) -> None:
    """Text header line, then float32 little-endian gain (row-major) and
    voxel positions. Exact layout documented in docs/FORMATS.md."""
    header = f"{_MAGIC} M={lead.n_electrodes} V={lead.n_voxels} orientation={lead.orientation}\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(lead.gain.astype("<f4").tobytes(order="C"))
        f.write(lead.voxel_positions.astype("<f4").tobytes(order="C"))


def save_kernel(kernel: SloretaKernel, path) -> None:
    """Kernel file: text header, then float32 LE T rows and resolution diag."""
    header = (f"SLORETA V={kernel.n_voxels} M={kernel.n_electrodes} "
              f"alpha={kernel.alpha!r}\n")
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(kernel.t.astype("<f4").tobytes(order="C"))
        f.write(kernel.resolution_diag.astype("<f4").tobytes(order="C"))


def load_kernel(path) -> SloretaKernel:
    with open(path, "rb") as f:
        header = f.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if not parts or parts[0] != "SLORETA":
            raise ParseError(f"not a kernel file (header {header!r})", path, 1)
        fields = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        try:
            v = int(fields["V"])
            m = int(fields["M"])
            alpha = float(fields.get("alpha", "0.0"))
        except (KeyError, ValueError):
            raise ParseError("kernel header must carry V=, M=, alpha=", path, 1) from None
        body = f.read()
    need = 4 * (v * m + v)
    if len(body) != need:
        raise ParseError(f"expected {need} payload bytes, got {len(body)}", path)
    t = np.frombuffer(body[: 4 * v * m], dtype="<f4").reshape(v, m).astype(float)
    res = np.frombuffer(body[4 * v * m:], dtype="<f4").astype(float)
    if np.any(res <= 0):
        raise ModelError("kernel resolution diagonal must be positive")
    return SloretaKernel(t=t, resolution_diag=res, alpha=alpha)


def load_lead_field(path, expected_electrodes: int | None = None) -> LeadField:
    """Load and validate a lead-field file written by :func:`save_lead_field`."""
    with open(path, "rb") as f:
        header = f.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if not parts or parts[0] != _MAGIC:
            raise ParseError(f"not a lead-field file (header {header!r})", path, 1)
        fields = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        try:
            m = int(fields["M"])
            v = int(fields["V"])
        except (KeyError, ValueError):
            raise ParseError("header must carry M=<int> V=<int>", path, 1) from None
        orientation = fields.get("orientation", "fixed")
        body = f.read()
    need = 4 * (m * v + v * 3)
    if len(body) != need:
        raise ParseError(
            f"expected {need} payload bytes for M={m} V={v}, got {len(body)} "
            "(truncated or oversized file)", path,
        )
    gain = np.frombuffer(body[: 4 * m * v], dtype="<f4").reshape(m, v).astype(float)
    pos = np.frombuffer(body[4 * m * v:], dtype="<f4").reshape(v, 3).astype(float)
    if expected_electrodes is not None and m != expected_electrodes:
        raise ModelError(
            f"lead field has {m} electrodes, montage has {expected_electrodes}"
        )
    return LeadField(gain=gain, voxel_positions=pos, orientation=orientation)
