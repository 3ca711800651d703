"""The four user-facing pipelines (raw, motor, vision, meditation), the
calibration baseline, the vision display delay, and blink detection.

All four pipelines run continuously on every block (they share the stream and
are cheap), so switching the published pipeline is instant and calibration can
collect statistics for every view in one pass. Display values are z-scores
against the calibration baseline clamped to +-3 sigma and rescaled to [-1, 1];
the meditation synchronization value is shown raw in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dsp import (BandpassSpec, PhaseWindow, RunningPower, StreamingBandpass,
                  analytic_phase, plv)
from .errors import CalibrationError, ConfigError
from .montage import Montage

KINDS = ("raw", "motor", "vision", "meditation")

PIPELINE_BANDS = {
    "raw": (3.0, 26.0),
    "motor": (16.0, 24.0),
    "vision": (8.0, 12.0),
    "meditation": (7.0, 28.0),
}
WIDE_BAND = PIPELINE_BANDS["raw"]
VISION_DELAY_SEC = 0.5
POWER_WINDOW_SEC = 1.0
PHASE_WINDOW_SEC = 1.0

BLINK_BAND = (1.0, 10.0)
BLINK_THRESHOLD_SIGMA = 4.0
BLINK_REFRACTORY_SEC = 0.2
BLINK_HOLD_SEC = 0.25
BLINK_RMS_WINDOW_SEC = 10.0
BLINK_WARMUP_SEC = 2.0

# minimum calibration span, in seconds of baseline frames
MIN_BASELINE_SEC = 3.0
Z_CLAMP = 3.0


@dataclass(frozen=True)
class PipelineConfig:
    kind: str
    band: BandpassSpec
    display_delay_sec: float
    frame_rate_hz: float = 10.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown pipeline kind {self.kind!r}")
        if (self.band.low_hz, self.band.high_hz) != PIPELINE_BANDS[self.kind]:
            raise ConfigError(
                f"{self.kind} pipeline band must be {PIPELINE_BANDS[self.kind]}, "
                f"got ({self.band.low_hz}, {self.band.high_hz})"
            )
        expected_delay = VISION_DELAY_SEC if self.kind == "vision" else 0.0
        if self.display_delay_sec != expected_delay:
            raise ConfigError(
                f"{self.kind} pipeline display delay must be {expected_delay}"
            )

    @classmethod
    def for_kind(cls, kind: str, fs: float = 256.0, frame_rate_hz: float = 10.0):
        lo, hi = PIPELINE_BANDS[kind]
        return cls(kind, BandpassSpec(lo, hi, fs=fs),
                   VISION_DELAY_SEC if kind == "vision" else 0.0, frame_rate_hz)


@dataclass
class QuantityVec:
    """Pre-normalization per-electrode quantity for one pipeline at one frame."""

    values: np.ndarray
    data_t: float
    ready: bool = True


@dataclass
class FrameQuantities:
    """Everything the display layer needs for one frame instant."""

    t: float
    blink: bool
    q: dict  # kind -> QuantityVec


@dataclass
class Baseline:
    """Calibration statistics per pipeline and electrode (uV^2 for powers,
    dimensionless for the synchronization value)."""

    frame_rate: float
    counts: dict
    mu: dict     # kind -> (n_electrodes,) means
    sigma: dict  # kind -> (n_electrodes,) floored stds

    @property
    def sample_count(self) -> int:
        return min(self.counts.values()) if self.counts else 0

    def valid(self) -> bool:
        return self.sample_count >= math.ceil(MIN_BASELINE_SEC * self.frame_rate)


class BaselineAccumulator:
    """Collects quantity frames during the instructed-baseline phase."""

    def __init__(self, frame_rate: float):
        self.frame_rate = frame_rate
        self._sums = {}
        self._sq = {}
        self._counts = {k: 0 for k in KINDS}

    def add(self, fq: FrameQuantities) -> None:
        for kind, qv in fq.q.items():
            if not qv.ready:
                continue
            if kind not in self._sums:
                self._sums[kind] = np.zeros_like(qv.values)
                self._sq[kind] = np.zeros_like(qv.values)
            self._sums[kind] += qv.values
            self._sq[kind] += qv.values * qv.values
            self._counts[kind] += 1

    def finalize(self) -> Baseline:
        need = math.ceil(MIN_BASELINE_SEC * self.frame_rate)
        short = {k: c for k, c in self._counts.items() if c < need}
        if short:
            raise CalibrationError(
                f"calibration span too short: need >= {need} frames "
                f"({MIN_BASELINE_SEC:.0f} s at {self.frame_rate:g} Hz) per pipeline, got {short}"
            )
        mu, sigma = {}, {}
        for kind in KINDS:
            n = self._counts[kind]
            m = self._sums[kind] / n
            var = np.maximum(self._sq[kind] / n - m * m, 0.0)
            floor = 1e-9 * np.maximum(m, 1.0)
            mu[kind] = m
            sigma[kind] = np.maximum(np.sqrt(var), floor)
        return Baseline(self.frame_rate, dict(self._counts), mu, sigma)


def calibrate(frames, frame_rate: float) -> Baseline:
    """Baseline statistics over an iterable of FrameQuantities."""
    acc = BaselineAccumulator(frame_rate)
    for fq in frames:
        acc.add(fq)
    return acc.finalize()


@dataclass
class PipelineOutput:
    """One display frame: values in [-1, 1] ([0, 1] at the synchronization
    pair), the highlighted region, and the blink flag."""

    t: float
    data_t: float
    kind: str
    values: np.ndarray
    highlight: tuple
    blink: bool
    ready: bool = True


class BlinkDetector:
    """Threshold detector on 1-10 Hz filtered mean(Fp1, Fp2).

    An event fires when the filtered amplitude exceeds BLINK_THRESHOLD_SIGMA
    times the rolling RMS (10 s window); onsets within the refractory period
    collapse into one event. The blink flag stays up for BLINK_HOLD_SEC.
    """

    def __init__(self, montage: Montage, fs: float):
        self.fs = fs
        self._fp = montage.indices(["Fp1", "Fp2"])
        lo, hi = BLINK_BAND
        self._filter = StreamingBandpass(BandpassSpec(lo, hi, fs=fs), 1)
        self._rms = RunningPower(BLINK_RMS_WINDOW_SEC, fs, 1)
        self._n = 0
        self._last_onset = -math.inf
        self._last_supra = -math.inf
        self.onsets = []

    def push_block(self, data: np.ndarray, t0: float) -> list[float]:
        """Consume a raw (n_channels, n) block; returns onset times in it."""
        fp = data[self._fp].mean(axis=0, keepdims=True)
        y = self._filter.process(fp)[0]
        new = []
        warm = int(BLINK_WARMUP_SEC * self.fs)
        thr_floor = 0.1
        for i in range(y.size):
            self._rms.push(y[None, i: i + 1])
            self._n += 1
            if self._n < warm:
                continue
            rms = max(math.sqrt(self._rms.value[0]), thr_floor)
            if abs(y[i]) > BLINK_THRESHOLD_SIGMA * rms:
                t = t0 + i / self.fs
                # refractory runs from the last suprathreshold sample, so the
                # trailing lobe of one blink cannot retrigger a second event
                if t - self._last_supra >= BLINK_REFRACTORY_SEC:
                    self._last_onset = t
                    new.append(t)
                self._last_supra = t
        self.onsets.extend(new)
        return new

    def active(self, t: float) -> bool:
        return (t - self._last_onset) < BLINK_HOLD_SEC


class PipelineSet:
    """All four pipelines plus blink detection over one sample stream.

    Single-writer: push blocks from one task. Emits FrameQuantities at the
    frame rate; `output` turns those into display frames for one kind.
    """

    def __init__(self, montage: Montage, fs: float, frame_rate: float = 10.0):
        if frame_rate <= 0 or frame_rate > fs:
            raise ConfigError(f"frame rate must be in (0, fs], got {frame_rate}")
        self.montage = montage
        self.fs = float(fs)
        self.frame_rate = float(frame_rate)
        n = len(montage)

        def bank(kind):
            lo, hi = PIPELINE_BANDS[kind]
            return StreamingBandpass(BandpassSpec(lo, hi, fs=fs), n)

        self._wide = bank("raw")
        self._beta = bank("motor")
        self._alpha = bank("vision")
        self._medit = bank("meditation")
        self._wide_pow = RunningPower(POWER_WINDOW_SEC, fs, n)
        self._alpha_pow = RunningPower(POWER_WINDOW_SEC, fs, n)
        self._motor_centers = ("C3", "Cz", "C4")
        self._lap_pow = RunningPower(POWER_WINDOW_SEC, fs, len(self._motor_centers))
        self._lap_idx = [
            (montage.index(c), montage.indices(sorted(montage.laplacian_neighbors[c])))
            for c in self._motor_centers
        ]
        win = 1 << max(6, math.ceil(math.log2(PHASE_WINDOW_SEC * fs)))
        self._phase = PhaseWindow(win, 2)
        self._pair = montage.indices(["AFz", "Pz"])
        self.blink = BlinkDetector(montage, fs)

        self._vision_idx = np.array(sorted(montage.indices(montage.regions["VISION"])))
        self._delay_frames = int(round(VISION_DELAY_SEC * frame_rate))
        self._vision_queue = []

        self._n_samples = 0
        self._frame_no = 0
        self._t0 = None
        # per-push tap of band-filtered signals, for traces and the source view
        self.last_filtered = {k: np.zeros((n, 0)) for k in KINDS}

        self.highlights = {
            "raw": tuple(montage.labels),
            "motor": tuple(l for l in montage.labels if l in montage.regions["MOTOR_CENTERS"]),
            "vision": tuple(l for l in montage.labels if l in montage.regions["VISION"]),
            "meditation": tuple(l for l in montage.labels if l in montage.regions["MEDITATION_PAIR"]),
        }

    def _next_frame_boundary(self) -> int:
        return math.ceil((self._frame_no + 1) * self.fs / self.frame_rate)

    def push_block(self, block) -> list[FrameQuantities]:
        """Process one SampleBlock-like object (t0, fs, data); emit due frames."""
        data = np.asarray(block.data, dtype=float)
        if data.shape[0] != len(self.montage):
            raise ValueError(
                f"block has {data.shape[0]} channels, montage has {len(self.montage)}"
            )
        if block.fs != self.fs:
            raise ValueError(f"block fs {block.fs} != pipeline fs {self.fs}")
        if self._t0 is None:
            self._t0 = float(block.t0)

        frames = []
        tap = {k: [] for k in KINDS}
        pos = 0
        n = data.shape[1]
        while pos < n:
            boundary = self._next_frame_boundary()
            take = min(n - pos, boundary - self._n_samples)
            seg = data[:, pos: pos + take]
            t_seg = self._t0 + self._n_samples / self.fs
            self._feed(seg, t_seg, tap)
            self._n_samples += take
            pos += take
            if self._n_samples >= boundary:
                self._frame_no += 1
                frames.append(self._emit(self._t0 + self._frame_no / self.frame_rate))
        self.last_filtered = {
            k: np.concatenate(v, axis=1) if v else np.zeros((data.shape[0], 0))
            for k, v in tap.items()
        }
        return frames

    def _feed(self, seg: np.ndarray, t0: float, tap: dict) -> None:
        wide = self._wide.process(seg)
        self._wide_pow.push(wide)
        beta = self._beta.process(seg)
        lap = np.stack([
            beta[ci] - beta[nbr].mean(axis=0) for ci, nbr in self._lap_idx
        ])
        self._lap_pow.push(lap)
        alpha = self._alpha.process(seg)
        self._alpha_pow.push(alpha)
        med = self._medit.process(seg)
        self._phase.push(med[self._pair])
        self.blink.push_block(seg, t0)
        tap["raw"].append(wide)
        tap["motor"].append(beta)
        tap["vision"].append(alpha)
        tap["meditation"].append(med)

    def _emit(self, t: float) -> FrameQuantities:
        wide = self._wide_pow.value.copy()
        q = {"raw": QuantityVec(wide, t)}

        motor = wide.copy()
        for (ci, _), p in zip(self._lap_idx, self._lap_pow.value):
            motor[ci] = p
        q["motor"] = QuantityVec(motor, t)

        vision_now = wide.copy()
        vision_now[self._vision_idx] = self._alpha_pow.value[self._vision_idx]
        self._vision_queue.append((t, vision_now))
        if len(self._vision_queue) > self._delay_frames:
            data_t, vals = self._vision_queue.pop(0)
            q["vision"] = QuantityVec(vals, data_t)
        else:
            q["vision"] = QuantityVec(np.zeros_like(wide), t, ready=False)

        medit = wide.copy()
        phases = analytic_phase(self._phase)
        if phases is None:
            q["meditation"] = QuantityVec(medit, t, ready=False)
        else:
            # read phases from the central half of the window to dodge edge bias
            lo = phases.shape[1] // 4
            hi = 3 * phases.shape[1] // 4
            sync = plv(phases[0, lo:hi], phases[1, lo:hi])
            medit[self._pair[0]] = sync
            medit[self._pair[1]] = sync
            q["meditation"] = QuantityVec(medit, t)

        return FrameQuantities(t=t, blink=self.blink.active(t), q=q)

    def output(self, kind: str, fq: FrameQuantities, baseline: Baseline) -> PipelineOutput:
        """Display frame for one pipeline; raises until calibration is done."""
        if kind not in KINDS:
            raise ConfigError(f"unknown pipeline kind {kind!r}")
        if baseline is None or not baseline.valid():
            raise CalibrationError(
                "pipeline is not calibrated; run the calibration phase first"
            )
        qv = fq.q[kind]
        if not qv.ready:
            return PipelineOutput(fq.t, qv.data_t, kind,
                                  np.zeros(len(self.montage)),
                                  self.highlights[kind], fq.blink, ready=False)
        z = (qv.values - baseline.mu[kind]) / baseline.sigma[kind]
        values = np.clip(z, -Z_CLAMP, Z_CLAMP) / Z_CLAMP
        if kind == "meditation":
            sync = float(np.clip(qv.values[self._pair[0]], 0.0, 1.0))
            values[self._pair[0]] = sync
            values[self._pair[1]] = sync
        return PipelineOutput(fq.t, qv.data_t, kind, values,
                              self.highlights[kind], fq.blink)
