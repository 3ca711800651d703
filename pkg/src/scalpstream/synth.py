"""Seeded synthetic-EEG generator with scripted events and ground-truth markers.

Background is pink noise (~10 uV RMS per channel). Scripted events add the
signatures the pipelines are built to surface: occipital alpha bursts while
the eyes are closed, beta drop/rebound around movements, frontal blink
transients, and phase-locked or independent oscillations on AFz/Pz.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .montage import Montage, geodesic_distances

EVENT_KINDS = (
    "EyesClosed", "MoveLeftHand", "MoveRightHand", "MoveFeet",
    "Blink", "MeditationLock", "MeditationUnlock",
)

# movement kind -> electrode whose beta rhythm reacts (contralateral hand, feet at vertex)
MOVEMENT_CENTER = {"MoveRightHand": "C3", "MoveLeftHand": "C4", "MoveFeet": "Cz"}

DEFAULT_AMPLITUDE = {
    "EyesClosed": 15.0,       # alpha burst peak, uV
    "MoveLeftHand": 10.0,     # idle beta rhythm amplitude at the center, uV
    "MoveRightHand": 10.0,
    "MoveFeet": 10.0,
    "Blink": 80.0,            # biphasic peak, uV
    "MeditationLock": 15.0,
    "MeditationUnlock": 15.0,
}

ERD_FACTOR = 0.5      # beta amplitude multiplier during movement
ERS_FACTOR = 1.3      # beta amplitude multiplier for 1 s after movement
ERS_SECONDS = 1.0
BLINK_SECONDS = 0.3
_RAMP_SEC = 0.2


@dataclass(frozen=True)
class Event:
    kind: str
    t_start: float
    t_end: float
    amplitude: float | None = None  # uV; kind-specific default when None

    def amp(self) -> float:
        return DEFAULT_AMPLITUDE[self.kind] if self.amplitude is None else self.amplitude


@dataclass
class Scenario:
    duration_sec: float
    fs: float = 256.0
    seed: int = 0
    events: list[Event] = field(default_factory=list)
    noise_rms: float = 10.0
    motor_idle_uv: float = 10.0

    def __post_init__(self):
        if self.fs < 128:
            raise ConfigError(f"sampling rate must be >= 128 Hz, got {self.fs}")
        if self.duration_sec <= 0:
            raise ConfigError("duration must be positive")
        for ev in self.events:
            if ev.kind not in EVENT_KINDS:
                raise ConfigError(f"unknown event kind {ev.kind!r}")
            if not (0.0 <= ev.t_start < ev.t_end <= self.duration_sec):
                raise ConfigError(
                    f"event {ev.kind} [{ev.t_start}, {ev.t_end}] outside scenario bounds"
                )

    @classmethod
    def from_json(cls, doc: str | dict) -> "Scenario":
        if isinstance(doc, str):
            doc = json.loads(doc)
        events = [Event(e["kind"], float(e["t_start"]), float(e["t_end"]),
                        e.get("amplitude")) for e in doc.get("events", [])]
        return cls(
            duration_sec=float(doc["duration_sec"]),
            fs=float(doc.get("fs", 256.0)),
            seed=int(doc.get("seed", 0)),
            events=events,
            noise_rms=float(doc.get("noise_rms", 10.0)),
            motor_idle_uv=float(doc.get("motor_idle_uv", 10.0)),
        )

    def to_json(self) -> str:
        return json.dumps({
            "duration_sec": self.duration_sec,
            "fs": self.fs,
            "seed": self.seed,
            "noise_rms": self.noise_rms,
            "motor_idle_uv": self.motor_idle_uv,
            "events": [
                {"kind": e.kind, "t_start": e.t_start, "t_end": e.t_end,
                 **({"amplitude": e.amplitude} if e.amplitude is not None else {})}
                for e in self.events
            ],
        }, indent=2)


@dataclass
class GroundTruth:
    """Scenario events echoed with exact sample indices."""

    fs: float
    events: list[dict]

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "GroundTruth":
        events = []
        for ev in scenario.events:
            events.append({
                "kind": ev.kind,
                "t_start": ev.t_start,
                "t_end": ev.t_end,
                "amplitude": ev.amp(),
                "sample_start": int(round(ev.t_start * scenario.fs)),
                "sample_end": int(round(ev.t_end * scenario.fs)),
            })
        return cls(scenario.fs, events)


@dataclass
class Recording:
    """Multichannel samples in uV, montage channel order."""

    fs: float
    labels: tuple
    data: np.ndarray  # (n_channels, n_samples)
    t0: float = 0.0


def _pink_noise(rng: np.random.Generator, n_channels: int, n: int, fs: float) -> np.ndarray:
    """1/f-power noise per channel, flattened below 0.5 Hz to bound drift."""
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    shape = np.zeros_like(freqs)
    nz = freqs > 0
    shape[nz] = 1.0 / np.sqrt(np.maximum(freqs[nz], 0.5))
    spec = (rng.standard_normal((n_channels, freqs.size))
            + 1j * rng.standard_normal((n_channels, freqs.size))) * shape
    spec[:, 0] = 0.0
    x = np.fft.irfft(spec, n=n, axis=1)
    rms = np.sqrt(np.mean(x * x, axis=1, keepdims=True))
    return x / rms


def _ramped_gate(t: np.ndarray, t0: float, t1: float, ramp: float = _RAMP_SEC) -> np.ndarray:
    """1 inside [t0, t1] with raised-cosine ramps; 0 elsewhere."""
    g = np.zeros_like(t)
    up = (t >= t0) & (t < t0 + ramp)
    g[up] = 0.5 - 0.5 * np.cos(np.pi * (t[up] - t0) / ramp)
    g[(t >= t0 + ramp) & (t <= t1 - ramp)] = 1.0
    down = (t > t1 - ramp) & (t <= t1)
    g[down] = 0.5 - 0.5 * np.cos(np.pi * (t1 - t[down]) / ramp)
    if t1 - t0 < 2 * ramp:  # short event: just a single cosine bump
        g[:] = 0.0
        inside = (t >= t0) & (t <= t1)
        g[inside] = np.sin(np.pi * (t[inside] - t0) / (t1 - t0)) ** 2
    return g


def _blink_template(fs: float, peak_uv: float) -> np.ndarray:
    n = int(round(BLINK_SECONDS * fs))
    u = np.arange(n) / n
    f = np.sin(2 * np.pi * u) * np.sin(np.pi * u) ** 2
    return peak_uv * f / np.max(np.abs(f))


def generate(scenario: Scenario, montage: Montage) -> tuple[Recording, GroundTruth]:
    """Deterministic (per seed) synthetic stream plus ground-truth markers."""
    fs = scenario.fs
    n = int(round(scenario.duration_sec * fs))
    t = np.arange(n) / fs
    rng = np.random.default_rng(scenario.seed)
    data = scenario.noise_rms * _pink_noise(rng, len(montage), n, fs)

    # spatial falloff per focus electrode
    def proximity(focus: str, sigma: float) -> np.ndarray:
        d = geodesic_distances(montage.positions, montage.position(focus))
        return np.exp(-((d / sigma) ** 2))

    # idle sensorimotor beta rhythms, modulated by movement events
    for center in ("C3", "Cz", "C4"):
        mod = np.ones(n)
        explicit = [ev.amplitude for ev in scenario.events
                    if MOVEMENT_CENTER.get(ev.kind) == center and ev.amplitude is not None]
        idle_amp = explicit[0] if explicit else scenario.motor_idle_uv
        for ev in scenario.events:
            if MOVEMENT_CENTER.get(ev.kind) != center:
                continue
            mod += (ERD_FACTOR - 1.0) * _ramped_gate(t, ev.t_start, ev.t_end)
            mod += (ERS_FACTOR - 1.0) * _ramped_gate(t, ev.t_end, ev.t_end + ERS_SECONDS)
        osc = np.sin(2 * np.pi * 20.0 * t + rng.uniform(0, 2 * np.pi))
        w = proximity(center, 0.45)
        w[w < 0.01] = 0.0
        data += np.outer(w, idle_amp * mod * osc)

    for ev in scenario.events:
        if ev.kind == "EyesClosed":
            gate = _ramped_gate(t, ev.t_start, ev.t_end)
            am = 0.8 + 0.2 * np.sin(2 * np.pi * 0.55 * t + rng.uniform(0, 2 * np.pi))
            osc = np.sin(2 * np.pi * 10.0 * t + rng.uniform(0, 2 * np.pi))
            w = proximity("Oz", 0.7)
            keep = np.zeros(len(montage))
            vis = montage.indices(montage.regions["VISION"])
            keep[vis] = w[vis]
            data += np.outer(keep, ev.amp() * gate * am * osc)
        elif ev.kind == "Blink":
            tpl = _blink_template(fs, ev.amp())
            i0 = int(round(ev.t_start * fs))
            i1 = min(i0 + tpl.size, n)
            for label in ("Fp1", "Fp2"):
                data[montage.index(label), i0:i1] += tpl[: i1 - i0]
        elif ev.kind == "MeditationLock":
            gate = _ramped_gate(t, ev.t_start, ev.t_end)
            phase = 2 * np.pi * 10.0 * t + rng.uniform(0, 2 * np.pi)
            data[montage.index("AFz")] += ev.amp() * gate * np.sin(phase)
            data[montage.index("Pz")] += ev.amp() * gate * np.sin(phase + np.pi / 6)
        elif ev.kind == "MeditationUnlock":
            gate = _ramped_gate(t, ev.t_start, ev.t_end)
            for label, f0 in (("AFz", 9.0), ("Pz", 11.0)):
                drift = np.cumsum(rng.standard_normal(n)) * 0.05
                phase = 2 * np.pi * f0 * t + rng.uniform(0, 2 * np.pi) + drift
                data[montage.index(label)] += ev.amp() * gate * np.sin(phase)

    rec = Recording(fs=fs, labels=montage.labels, data=data)
    return rec, GroundTruth.from_scenario(scenario)


def write_recording(rec: Recording, ground_truth: GroundTruth, csv_path, markers_path=None):
    """CSV recording (time plus one column per channel) and JSON marker sidecar."""
    csv_path = str(csv_path)
    if markers_path is None:
        markers_path = csv_path.rsplit(".", 1)[0] + ".markers.json"
    n = rec.data.shape[1]
    times = rec.t0 + np.arange(n) / rec.fs
    # quantize channel values to float32 so 9 significant digits round-trip
    # exactly; the time column keeps float64 accuracy for the jitter check
    quantized = rec.data.astype(np.float32).astype(np.float64)
    table = np.column_stack([times, quantized.T])
    header = "time," + ",".join(rec.labels)
    np.savetxt(csv_path, table, fmt="%.9g", delimiter=",", header=header, comments="")
    with open(markers_path, "w", encoding="utf-8") as f:
        json.dump({"fs": ground_truth.fs, "events": ground_truth.events}, f, indent=2)
    return csv_path, str(markers_path)
