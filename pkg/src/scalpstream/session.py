"""Session orchestration: recording replay, calibration state, pipeline
routing, and outbound frame/trace message assembly.

The engine is synchronous and deterministic; pacing and fan-out to WebSocket
clients live in the server module. One engine step consumes one block from
the source, applies any queued control messages first, and returns the
outbound messages it produced.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import protocol
from .errors import CalibrationError, ConfigError, ParseError
from .inverse import SloretaKernel
from .montage import Montage
from .pipelines import KINDS, BaselineAccumulator, PipelineSet
from .synth import Recording
from .topomap import (DIVERGING_STOPS, GRAY_STOPS, SEQUENTIAL_STOPS,
                      ColorPolicy, ScalpGrid)

TRACE_RATE_HZ = 20.0
TRACE_DECIMATION = 4


@dataclass
class SampleBlock:
    """Timestamped multichannel samples in uV, montage channel order."""

    t0: float
    fs: float
    data: np.ndarray  # (n_channels, n_samples), equal lengths per channel


def load_recording(path, montage: Montage):
    """Load a CSV recording (`time,<label>,...`); returns (Recording, markers).

    Channels may appear in any order and are remapped to montage order. The
    sampling rate is inferred from the median time step; lines that break
    monotonicity or jitter beyond 1e-6 s are reported with their line number.
    Markers are read from a sibling `<stem>.markers.json` when present.
    """
    path = str(path)
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
    cols = [c.strip() for c in header.split(",")]
    if not cols or cols[0] != "time":
        raise ParseError("first column must be 'time'", path, 1)
    labels = cols[1:]
    unknown = [l for l in labels if l not in montage]
    if unknown:
        raise ParseError(f"unknown channel label {unknown[0]!r}", path, 1)
    missing = [l for l in montage.labels if l not in labels]
    if missing:
        raise ParseError(f"missing channel {missing[0]!r}", path, 1)
    if len(labels) != len(set(labels)):
        raise ParseError("duplicate channel labels", path, 1)

    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise ParseError(f"malformed numeric data: {e}", path) from None
    if table.shape[1] != len(cols):
        raise ParseError(
            f"rows have {table.shape[1]} fields, header has {len(cols)}", path, 2
        )
    times = table[:, 0]
    if times.size < 2:
        raise ParseError("need at least two samples", path, 2)
    dt = np.diff(times)
    bad = np.where(dt <= 0)[0]
    if bad.size:
        raise ParseError("time not strictly increasing", path, int(bad[0]) + 3)
    med = float(np.median(dt))
    jitter = np.abs(dt - med)
    bad = np.where(jitter > 1e-6)[0]
    if bad.size:
        raise ParseError(
            f"sample-time jitter {jitter[bad[0]]:.3g} s exceeds 1e-6 s",
            path, int(bad[0]) + 3,
        )
    fs = 1.0 / med

    order = [labels.index(l) for l in montage.labels]
    data = table[:, 1:].T[order]
    rec = Recording(fs=fs, labels=montage.labels, data=np.ascontiguousarray(data),
                    t0=float(times[0]))

    markers = None
    marker_path = path.rsplit(".", 1)[0] + ".markers.json"
    try:
        with open(marker_path, "r", encoding="utf-8") as f:
            markers = json.load(f)
    except FileNotFoundError:
        pass
    return rec, markers


@dataclass
class SessionConfig:
    frame_rate: float = 10.0
    speed: float = 1.0          # 0 means run as fast as possible
    block_sec: float = 0.05     # engine step granularity; <= one frame period
    grid_width: int = 128
    grid_height: int = 128
    include_grid: bool = True

    def __post_init__(self):
        if self.speed < 0:
            raise ConfigError(f"speed must be >= 0, got {self.speed}")
        if self.block_sec <= 0 or self.block_sec > 1.0 / self.frame_rate:
            raise ConfigError("block_sec must be positive and at most one frame period")


class _SourceView:
    """Per-frame standardized source power with its own calibration stats."""

    def __init__(self, kernel: SloretaKernel, voxel_positions: np.ndarray):
        self.kernel = kernel
        self.voxel_positions = np.asarray(voxel_positions, dtype=float)
        self._sumsq = np.zeros(kernel.n_voxels)
        self._count = 0
        self._cal_sum = np.zeros(kernel.n_voxels)
        self._cal_sq = np.zeros(kernel.n_voxels)
        self._cal_n = 0
        self.baseline = None

    def push(self, data: np.ndarray) -> None:
        x = data - data.mean(axis=0, keepdims=True)
        y = self.kernel.t @ x
        self._sumsq += np.sum(y * y, axis=1)
        self._count += x.shape[1]

    def emit(self, calibrating: bool):
        if self._count == 0:
            return None
        s = self._sumsq / self._count / self.kernel.resolution_diag
        self._sumsq[:] = 0.0
        self._count = 0
        if calibrating:
            self._cal_sum += s
            self._cal_sq += s * s
            self._cal_n += 1
            return None
        if self.baseline is None:
            return None
        mu, sigma = self.baseline
        return np.clip((s - mu) / sigma, -3.0, 3.0) / 3.0

    def finalize_baseline(self) -> None:
        if self._cal_n == 0:
            return
        mu = self._cal_sum / self._cal_n
        var = np.maximum(self._cal_sq / self._cal_n - mu * mu, 0.0)
        sigma = np.maximum(np.sqrt(var), 1e-9 * np.maximum(mu, 1.0))
        self.baseline = (mu, sigma)


class SessionEngine:
    """Deterministic core: source blocks in, protocol messages out.

    Single-writer: step() and submit_control() must be called from one task;
    the emitted message dicts are immutable hand-offs.
    """

    def __init__(self, source: Recording, montage: Montage,
                 config: SessionConfig | None = None,
                 kernel: SloretaKernel | None = None,
                 voxel_positions: np.ndarray | None = None):
        self.config = config or SessionConfig()
        self.montage = montage
        self.source = source
        self.fs = float(source.fs)
        if tuple(source.labels) != tuple(montage.labels):
            raise ConfigError("source channel order does not match the montage")
        self.pipelines = PipelineSet(montage, self.fs, self.config.frame_rate)
        self.grid = ScalpGrid(montage, self.config.grid_width, self.config.grid_height)
        self.sources = None
        if kernel is not None:
            if voxel_positions is None:
                voxel_positions = np.zeros((kernel.n_voxels, 3))
            self.sources = _SourceView(kernel, voxel_positions)

        self.active_kind = "raw"
        self.gain = 1.0
        self.traces_on = True
        self.sources_on = False
        self.calibration = "idle"
        self.baseline = None
        self._acc = None
        self._controls = deque()
        self._cursor = 0
        self._block_samples = max(1, int(round(self.config.block_sec * self.fs)))
        self._ended = False
        self._sample_index = 0  # global index for trace decimation

    # -- control plane ----------------------------------------------------

    def submit_control(self, msg) -> None:
        self._controls.append(msg)

    def _apply_control(self, raw) -> dict | None:
        try:
            msg = protocol.parse_control(raw)
        except ValueError as e:
            return protocol.error_message(str(e))
        mtype = msg["type"]
        if mtype == "select_pipeline":
            kind = msg["pipeline"]
            if kind not in KINDS:
                return protocol.error_message(f"unknown pipeline {kind!r}")
            self.active_kind = kind
        elif mtype == "set_gain":
            self.gain = float(msg["gain"])
        elif mtype == "start_calibration":
            self._acc = BaselineAccumulator(self.config.frame_rate)
            self.calibration = "calibrating"
        elif mtype == "end_calibration":
            if self._acc is None:
                return protocol.error_message("calibration was never started")
            try:
                self.baseline = self._acc.finalize()
            except CalibrationError as e:
                return protocol.error_message(str(e))
            if self.sources is not None:
                self.sources.finalize_baseline()
            self.calibration = "ready"
            self._acc = None
        elif mtype == "toggle_sources":
            if msg["enabled"] and self.sources is None:
                return protocol.error_message("no lead field loaded; sources unavailable")
            self.sources_on = msg["enabled"]
        elif mtype == "toggle_traces":
            self.traces_on = msg["enabled"]
        return None

    # -- handshake ---------------------------------------------------------

    def hello(self) -> dict:
        m = self.montage
        src = {"available": False}
        if self.sources is not None:
            src = {
                "available": True,
                "nVoxels": self.sources.kernel.n_voxels,
                "positions": protocol.b64_f32(self.sources.voxel_positions),
            }
        return {
            "v": protocol.PROTOCOL_VERSION,
            "type": "hello",
            "fs": self.fs,
            "frameRate": self.config.frame_rate,
            "traceRate": TRACE_RATE_HZ,
            "traceDecimation": TRACE_DECIMATION,
            "speed": self.config.speed,
            "pipelines": list(KINDS),
            "montage": {
                "labels": list(m.labels),
                "uv": [list(uv) for uv in m.uvs.tolist()],
                "pos": [list(p) for p in m.positions.tolist()],
            },
            "regions": {name: sorted(labels) for name, labels in m.regions.items()},
            "highlights": {k: list(v) for k, v in self.pipelines.highlights.items()},
            "grid": {
                "width": self.grid.width,
                "height": self.grid.height,
                "mask": protocol.b64_bytes(self.grid.mask_bits()),
                "nearest": protocol.b64_bytes(
                    np.where(self.grid.nearest < 0, 255, self.grid.nearest)
                    .astype(np.uint8).tobytes(order="C")),
            },
            "colormaps": {
                "diverging": [[p, list(c)] for p, c in DIVERGING_STOPS],
                "gray": [[p, list(c)] for p, c in GRAY_STOPS],
                "sequential": [[p, list(c)] for p, c in SEQUENTIAL_STOPS],
            },
            "gain": {"value": self.gain, "max": protocol.GAIN_MAX},
            "sources": src,
            "calibration": self.calibration,
        }

    # -- data plane ---------------------------------------------------------

    @property
    def block_duration(self) -> float:
        return self._block_samples / self.fs

    def exhausted(self) -> bool:
        return self._cursor >= self.source.data.shape[1]

    def step(self) -> list[dict] | None:
        """Process one block; returns outbound messages, or None after the end."""
        out = []
        while self._controls:
            reply = self._apply_control(self._controls.popleft())
            if reply is not None:
                out.append(reply)

        if self.exhausted():
            if not self._ended:
                self._ended = True
                out.append(protocol.end_message())
                return out
            return None

        i0 = self._cursor
        i1 = min(i0 + self._block_samples, self.source.data.shape[1])
        self._cursor = i1
        block = SampleBlock(
            t0=self.source.t0 + i0 / self.fs,
            fs=self.fs,
            data=self.source.data[:, i0:i1],
        )

        frames = self.pipelines.push_block(block)
        if self.sources is not None:
            self.sources.push(self.pipelines.last_filtered["raw"])

        if self.traces_on:
            out.append(self._trace_message(block.t0, i0))

        calibrating = self.calibration == "calibrating"
        for fq in frames:
            if calibrating and self._acc is not None:
                self._acc.add(fq)
            out.append(self._frame_message(fq))
        return out

    def _trace_message(self, t0: float, i0: int) -> dict:
        sig = self.pipelines.last_filtered[self.active_kind]
        idx = np.arange(sig.shape[1])
        take = (i0 + idx) % TRACE_DECIMATION == 0
        dec = sig[:, take]
        return {
            "v": protocol.PROTOCOL_VERSION,
            "type": "trace",
            "t": t0,
            "pipeline": self.active_kind,
            "channels": np.round(dec, 4).tolist(),
        }

    def _frame_message(self, fq) -> dict:
        ready = self.calibration == "ready"
        src_display = None
        if self.sources is not None:
            src_display = self.sources.emit(self.calibration == "calibrating")
        if ready:
            output = self.pipelines.output(self.active_kind, fq, self.baseline)
            values = output.values
            out_ready = output.ready
        else:
            values = np.zeros(len(self.montage))
            out_ready = False
        msg = {
            "v": protocol.PROTOCOL_VERSION,
            "type": "frame",
            "t": fq.t,
            "pipeline": self.active_kind,
            "calibration": self.calibration,
            "ready": out_ready,
            "electrodeValues": [float(x) for x in values],
            "highlight": list(self.pipelines.highlights[self.active_kind]),
            "blink": bool(fq.blink),
            "gain": self.gain,
        }
        if self.config.include_grid and out_ready:
            fld = self.grid.interpolate(values)
            msg["grid"] = {
                "width": fld.width,
                "height": fld.height,
                "values": protocol.b64_f32(fld.values),
            }
        if self.sources_on and src_display is not None and ready:
            msg["sources"] = {"values": protocol.b64_f32(src_display)}
        return msg


def policy_for(kind: str, gain: float) -> ColorPolicy:
    """Color policy matching the pipeline kind (sequential map for the
    synchronization view, diverging elsewhere)."""
    stops = SEQUENTIAL_STOPS if kind == "meditation" else DIVERGING_STOPS
    return ColorPolicy(gain=gain, highlight_stops=stops)
