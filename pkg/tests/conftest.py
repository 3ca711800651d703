import numpy as np
import pytest

from scalpstream.montage import standard_montage
from scalpstream.pipelines import BaselineAccumulator, PipelineSet
from scalpstream.session import SampleBlock


@pytest.fixture(scope="session")
def montage():
    return standard_montage()


def blocks_of(rec, block_samples=26):
    """Chop a Recording into SampleBlocks."""
    n = rec.data.shape[1]
    for i in range(0, n, block_samples):
        yield SampleBlock(rec.t0 + i / rec.fs, rec.fs, rec.data[:, i:i + block_samples])


def run_calibrated(rec, montage, cal_end, frame_rate=10.0, block_samples=26):
    """Drive a PipelineSet over a recording, calibrating on [t0, cal_end).

    Returns (pipeline_set, baseline, frames_after_calibration).
    """
    ps = PipelineSet(montage, rec.fs, frame_rate)
    acc = BaselineAccumulator(frame_rate)
    baseline = None
    frames = []
    for blk in blocks_of(rec, block_samples):
        for fq in ps.push_block(blk):
            if fq.t <= cal_end:
                acc.add(fq)
            else:
                if baseline is None:
                    baseline = acc.finalize()
                frames.append(fq)
    if baseline is None:
        baseline = acc.finalize()
    return ps, baseline, frames


def frame_at(frames, t, tol=1e-6):
    for fq in frames:
        if abs(fq.t - t) < tol:
            return fq
    raise AssertionError(f"no frame at t={t}")


def displays(ps, kind, frames, baseline, t_lo=-np.inf, t_hi=np.inf, ready_only=True):
    """Stack display values for frames in [t_lo, t_hi]."""
    rows = []
    for fq in frames:
        if not (t_lo <= fq.t <= t_hi):
            continue
        if ready_only and not fq.q[kind].ready:
            continue
        rows.append(ps.output(kind, fq, baseline).values)
    return np.array(rows)
