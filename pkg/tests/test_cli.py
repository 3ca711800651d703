import json
import re
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from scalpstream.cli import main
from scalpstream.inverse import load_kernel, save_lead_field, spherical_lead_field
from scalpstream.montage import standard_montage
from scalpstream.protocol import decode_f32

SCENARIO = {
    "duration_sec": 20.0,
    "fs": 256.0,
    "seed": 5,
    "events": [
        {"kind": "EyesClosed", "t_start": 1.0, "t_end": 3.5},
        {"kind": "MoveRightHand", "t_start": 6.0, "t_end": 9.0},
        {"kind": "EyesClosed", "t_start": 12.0, "t_end": 16.0},
    ],
}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "scenario.json").write_text(json.dumps(SCENARIO))
    assert main(["synth", "--scenario", str(d / "scenario.json"),
                 "--out", str(d / "rec")]) == 0
    return d


def test_synth_writes_recording_and_markers(workdir):
    csv = workdir / "rec" / "recording.csv"
    markers = workdir / "rec" / "recording.markers.json"
    assert csv.exists() and markers.exists()
    events = json.loads(markers.read_text())["events"]
    assert len(events) == 3
    header = csv.read_text().splitlines()[0]
    assert header.split(",")[0] == "time"
    assert len(header.split(",")) == 33


def test_render_vision_snapshot_matches_pipeline_oracle(workdir, montage):
    out = workdir / "snap" / "v"
    rc = main(["render", "--input", str(workdir / "rec" / "recording.csv"),
               "--pipeline", "vision", "--at", "14.0", "--calibrate", "0:6",
               "--out", str(out)])
    assert rc == 0
    meta = json.loads(out.with_suffix(".json").read_text())
    assert set(meta["highlight"]) == {"P3", "Pz", "P4", "PO3", "PO4", "O1", "Oz", "O2"}
    assert meta["t"] == pytest.approx(14.0, abs=0.11)
    assert meta["dataT"] == pytest.approx(meta["t"] - 0.5, abs=1e-9)

    # oracle: recompute the displayed frame straight from the pipeline layer
    from conftest import frame_at, run_calibrated
    from scalpstream.session import load_recording
    rec, _ = load_recording(workdir / "rec" / "recording.csv", montage)
    ps, baseline, frames = run_calibrated(rec, montage, cal_end=5.95,
                                          block_samples=int(0.05 * 256))
    want = ps.output("vision", frame_at(frames, meta["t"]), baseline).values
    assert np.allclose(meta["electrodeValues"], want, atol=1e-9)

    grid = np.fromfile(out.with_suffix(".grid.f32"), dtype="<f4")
    assert grid.shape == (128 * 128,)
    # occipital region should be hot during the eyes-closed event
    occ = [montage.index(l) for l in ("O1", "Oz", "O2")]
    assert np.mean(np.array(meta["electrodeValues"])[occ]) >= 0.3


def test_render_is_deterministic(workdir):
    args = ["render", "--input", str(workdir / "rec" / "recording.csv"),
            "--pipeline", "motor", "--at", "8.0", "--calibrate", "0:5"]
    a, b = workdir / "det_a" / "s", workdir / "det_b" / "s"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    for suffix in (".json", ".grid.f32", ".png"):
        assert a.with_suffix(suffix).read_bytes() == b.with_suffix(suffix).read_bytes()


def test_render_rejects_bad_pipeline(workdir, capsys):
    rc = main(["render", "--input", str(workdir / "rec" / "recording.csv"),
               "--pipeline", "gamma", "--at", "8.0",
               "--out", str(workdir / "x")])
    assert rc == 1
    assert "unknown pipeline" in capsys.readouterr().err


def test_kernel_subcommand(workdir):
    lead_path = workdir / "lead.bin"
    save_lead_field(spherical_lead_field(standard_montage(), 200), lead_path)
    out = workdir / "kern.bin"
    assert main(["kernel", "--leadfield", str(lead_path), "--alpha", "auto",
                 "--out", str(out)]) == 0
    kernel = load_kernel(out)
    assert kernel.n_voxels == 200
    assert kernel.alpha > 0


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--nope"])
    assert exc.value.code == 2


def test_error_path_returns_1(tmp_path, capsys):
    rc = main(["synth", "--scenario", str(tmp_path / "absent.json"),
               "--out", str(tmp_path)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_serve_smoke_real_socket(workdir):
    """serve binds, prints its port, accepts one client, streams frames."""
    with subprocess.Popen(
            [sys.executable, "-m", "scalpstream.cli", "serve",
             "--scenario", str(workdir / "scenario.json"), "--port", "0"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True) as proc:
        try:
            line = proc.stdout.readline()
            m = re.search(r"ws://[\d.]+:(\d+)/ws", line)
            assert m, f"no endpoint line: {line!r}"
            url = m.group(0)

            from websockets.sync.client import connect
            deadline = time.time() + 20
            ws = None
            while time.time() < deadline:
                try:
                    ws = connect(url, open_timeout=5)
                    break
                except OSError:
                    time.sleep(0.2)
            assert ws is not None, "could not connect to serve endpoint"
            with ws:
                hello = json.loads(ws.recv(timeout=10))
                assert hello["type"] == "hello"
                n = 0
                while n < 5 and time.time() < deadline:
                    msg = json.loads(ws.recv(timeout=10))
                    if msg["type"] == "frame":
                        n += 1
                assert n >= 5
        finally:
            proc.terminate()
            proc.wait(timeout=10)
