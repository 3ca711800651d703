"""Command-line entry points: serve, synth, render, kernel.

Logging verbosity comes from the SCALPSTREAM_LOG environment variable
(debug/info/warning/error); everything else is flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .errors import CalibrationError, ConfigError
from .inverse import compute_kernel, load_lead_field, save_kernel
from .montage import standard_montage
from .pipelines import KINDS, BaselineAccumulator
from .session import SampleBlock, SessionConfig, SessionEngine, load_recording, policy_for
from .synth import Scenario, generate, write_recording

log = logging.getLogger("scalpstream")


def _configure_logging() -> None:
    level = os.environ.get("SCALPSTREAM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        return Scenario.from_json(f.read())


def _source_from_args(args, montage):
    if getattr(args, "input", None):
        rec, _ = load_recording(args.input, montage)
        return rec
    scenario = _load_scenario(args.scenario)
    rec, _ = generate(scenario, montage)
    return rec


def cmd_synth(args) -> int:
    montage = standard_montage()
    scenario = _load_scenario(args.scenario)
    rec, gt = generate(scenario, montage)
    out = Path(args.out)
    if out.suffix == ".csv":
        csv_path = out
        out.parent.mkdir(parents=True, exist_ok=True)
    else:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "recording.csv"
    csv_path, markers_path = write_recording(rec, gt, csv_path)
    print(f"wrote {csv_path} and {markers_path}")
    return 0


def cmd_kernel(args) -> int:
    lead = load_lead_field(args.leadfield)
    alpha = args.alpha if args.alpha == "auto" else float(args.alpha)
    kernel = compute_kernel(lead, alpha)
    save_kernel(kernel, args.out)
    print(f"wrote kernel for V={kernel.n_voxels} M={kernel.n_electrodes} "
          f"alpha={kernel.alpha:.6g} to {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    montage = standard_montage()
    rec = _source_from_args(args, montage)
    kernel = None
    voxel_positions = None
    if args.leadfield:
        lead = load_lead_field(args.leadfield, expected_electrodes=len(montage))
        kernel = compute_kernel(lead, "auto")
        voxel_positions = lead.voxel_positions
    config = SessionConfig(frame_rate=args.frame_rate, speed=args.speed)
    engine = SessionEngine(rec, montage, config, kernel=kernel,
                           voxel_positions=voxel_positions)
    ui_dir = args.ui if args.ui else None
    serve(engine, host=args.host, port=args.port, ui_dir=ui_dir)
    return 0


def _render_frame(args):
    from .pipelines import PipelineSet

    montage = standard_montage()
    rec, _ = load_recording(args.input, montage)
    if args.pipeline not in KINDS:
        raise ConfigError(f"unknown pipeline {args.pipeline!r}; pick one of {KINDS}")
    try:
        cal_lo, cal_hi = (float(x) for x in args.calibrate.split(":"))
    except ValueError:
        raise ConfigError("--calibrate must look like '0:5'") from None
    if not (rec.t0 <= cal_lo < cal_hi <= args.at):
        raise ConfigError("calibration span must precede --at and lie in the recording")

    pipelines = PipelineSet(montage, rec.fs, args.frame_rate)
    acc = BaselineAccumulator(args.frame_rate)
    chosen = None
    fs = rec.fs
    n = rec.data.shape[1]
    bs = max(1, int(round(0.05 * fs)))
    for i0 in range(0, n, bs):
        block = SampleBlock(rec.t0 + i0 / fs, fs, rec.data[:, i0:i0 + bs])
        for fq in pipelines.push_block(block):
            if cal_lo <= fq.t < cal_hi:
                acc.add(fq)
            if fq.t <= args.at:
                chosen = fq
        if rec.t0 + i0 / fs > args.at + 1.0:
            break
    if chosen is None:
        raise ConfigError(f"no frame at or before t={args.at}")
    baseline = acc.finalize()
    output = pipelines.output(args.pipeline, chosen, baseline)
    if not output.ready:
        raise CalibrationError(
            f"pipeline {args.pipeline} not ready at t={chosen.t:.2f} (warmup/delay)"
        )
    return montage, output


def cmd_render(args) -> int:
    from PIL import Image

    from .topomap import ScalpGrid

    montage, output = _render_frame(args)
    grid = ScalpGrid(montage, args.grid, args.grid)
    fld = grid.interpolate(output.values)
    rgba = grid.colorize(fld, output.highlight, policy_for(output.kind, args.gain))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    grid_path = out.with_suffix(".grid.f32")
    png_path = out.with_suffix(".png")
    json_path = out.with_suffix(".json")
    grid_path.write_bytes(fld.values.astype("<f4").tobytes(order="C"))
    Image.fromarray(rgba, mode="RGBA").save(png_path)
    meta = {
        "pipeline": output.kind,
        "t": output.t,
        "dataT": output.data_t,
        "gain": args.gain,
        "blink": bool(output.blink),
        "highlight": list(output.highlight),
        "electrodeValues": [float(v) for v in output.values],
        "grid": {"width": fld.width, "height": fld.height,
                 "file": grid_path.name, "png": png_path.name},
    }
    json_path.write_text(json.dumps(meta, indent=2, allow_nan=False) + "\n",
                         encoding="utf-8")
    print(f"wrote {json_path}, {grid_path}, {png_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scalpstream",
                                description="Real-time EEG pipelines with a head-view protocol")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("serve", help="stream a recording or scenario to WebSocket clients")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV recording to replay")
    src.add_argument("--scenario", help="scenario JSON to synthesize live")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8799, help="0 picks a free port")
    s.add_argument("--frame-rate", type=float, default=10.0)
    s.add_argument("--speed", type=float, default=1.0,
                   help="replay speed multiplier; 0 = as fast as possible")
    s.add_argument("--leadfield", help="lead-field file enabling the source view")
    s.add_argument("--ui", help="directory of built UI assets to serve at /")
    s.set_defaults(func=cmd_serve)

    s = sub.add_parser("synth", help="write a synthetic recording and markers")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True, help="output directory or .csv path")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("render", help="headless snapshot of one frame")
    s.add_argument("--input", required=True)
    s.add_argument("--pipeline", required=True)
    s.add_argument("--at", type=float, required=True, help="frame time, seconds")
    s.add_argument("--out", required=True, help="output path prefix")
    s.add_argument("--calibrate", default="0:5", help="baseline span 'start:end' seconds")
    s.add_argument("--gain", type=float, default=1.0)
    s.add_argument("--grid", type=int, default=128)
    s.add_argument("--frame-rate", type=float, default=10.0)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("kernel", help="compute an inverse kernel from a lead field")
    s.add_argument("--leadfield", required=True)
    s.add_argument("--alpha", default="auto")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_kernel)
    return p


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as e:  # one-line diagnostic, nonzero exit
        print(f"error: {e}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
