"""Regenerate the UI test fixtures from the engine and its color oracle.

Run from the repo root after any protocol or colormap change:

    python frontend/scripts/gen_fixtures.py
"""

import base64
import json
from pathlib import Path

import numpy as np

from scalpstream.montage import standard_montage
from scalpstream.session import SessionConfig, SessionEngine, policy_for
from scalpstream.synth import Event, Scenario, generate
from scalpstream.topomap import (DIVERGING_STOPS, GRAY_STOPS, SEQUENTIAL_STOPS,
                                 ScalpGrid, map_color)

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

STOP_SETS = {
    "diverging": DIVERGING_STOPS,
    "gray": GRAY_STOPS,
    "sequential": SEQUENTIAL_STOPS,
}


def gen_colorize_cases():
    cases = []
    values = sorted(
        {round(v, 4) for v in np.linspace(-1.3, 1.3, 53)}
        | {p for stops in STOP_SETS.values() for p, _ in stops}
        | {-0.125, 0.333, 0.625, 0.9999}
    )
    for name, stops in STOP_SETS.items():
        for v in values:
            cases.append({
                "stops": name,
                "value": v,
                "expected": list(map_color(stops, v)),
            })
    return {
        "stops": {k: [[p, list(c)] for p, c in v] for k, v in STOP_SETS.items()},
        "cases": cases,
    }


def gen_transcript():
    montage = standard_montage()
    scn = Scenario(duration_sec=40.0, fs=256.0, seed=77, events=[
        Event("EyesClosed", 4.0, 8.0),
        Event("MoveRightHand", 10.0, 13.0),
        Event("EyesClosed", 22.0, 28.0),
        Event("Blink", 30.0, 30.3),
        Event("MeditationLock", 32.0, 38.0),
    ])
    rec, _ = generate(scn, montage)
    engine = SessionEngine(rec, montage, SessionConfig(speed=0.0))
    controls = sorted([
        (1.0, {"type": "start_calibration"}),
        (15.0, {"type": "end_calibration"}),
        (16.0, {"type": "select_pipeline", "pipeline": "vision"}),
        (24.0, {"type": "set_gain", "gain": 2.0}),
        (29.0, {"type": "select_pipeline", "pipeline": "motor"}),
        (31.5, {"type": "select_pipeline", "pipeline": "meditation"}),
        (38.5, {"type": "select_pipeline", "pipeline": "raw"}),
    ], key=lambda x: x[0])

    hello = engine.hello()
    frames = []
    t = 0.0
    while True:
        while controls and controls[0][0] <= t:
            engine.submit_control(controls.pop(0)[1])
        msgs = engine.step()
        if msgs is None:
            break
        frames.extend(m for m in msgs if m["type"] == "frame")
        t += engine.block_duration

    ready = [f for f in frames if f["ready"]]
    # 24 sampled frames spanning all four pipelines and both gains
    sampled = ready[:: max(1, len(ready) // 24)][:24]
    assert len({f["pipeline"] for f in sampled}) == 4, "want all pipelines sampled"

    labels = hello["montage"]["labels"]
    decals = []
    for f in sampled:
        expected = []
        for i, label in enumerate(labels):
            highlighted = label in f["highlight"]
            stops = (STOP_SETS["sequential"] if f["pipeline"] == "meditation"
                     else STOP_SETS["diverging"]) if highlighted else STOP_SETS["gray"]
            expected.append(list(map_color(stops, f["gain"] * f["electrodeValues"][i])))
        decals.append(expected)

    # full-texture oracle for one frame, straight from the server-side renderer
    grid_frame = next(f for f in sampled if "grid" in f and f["gain"] == 2.0)
    grid = ScalpGrid(montage, 128, 128)
    import numpy as _np
    field_vals = _np.frombuffer(
        base64.b64decode(grid_frame["grid"]["values"]), dtype="<f4"
    ).astype(float).reshape(128, 128)
    from scalpstream.topomap import ScalpField
    fld = ScalpField(128, 128, field_vals, grid.mask.copy())
    rgba = grid.colorize(fld, grid_frame["highlight"],
                         policy_for(grid_frame["pipeline"], grid_frame["gain"]))
    slim_frames = []
    for f in sampled:
        slim = {k: v for k, v in f.items() if k != "grid"}
        if f is grid_frame:
            slim["grid"] = f["grid"]
        slim_frames.append(slim)

    return {
        "hello": hello,
        "frames": slim_frames,
        "expectedDecals": decals,
        "gridFrameIndex": slim_frames.index(
            next(s for s in slim_frames if "grid" in s)),
        "expectedGridRgba": base64.b64encode(rgba.tobytes(order="C")).decode(),
    }


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "colorize_cases.json").write_text(
        json.dumps(gen_colorize_cases()) + "\n")
    transcript = gen_transcript()
    (FIXTURES / "transcript.json").write_text(json.dumps(transcript) + "\n")
    print(f"wrote fixtures to {FIXTURES} "
          f"({len(transcript['frames'])} frames sampled)")


if __name__ == "__main__":
    main()
