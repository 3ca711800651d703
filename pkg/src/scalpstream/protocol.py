"""Wire-protocol message building and validation.

Every message is one JSON text frame carrying `v` (protocol version) and
`type`. Field names and encodings are frozen in docs/PROTOCOL.md; binary
payloads (grid values, masks, voxel positions) ride base64-encoded.
"""

from __future__ import annotations

import base64
import json

import numpy as np

PROTOCOL_VERSION = 1

CONTROL_TYPES = (
    "select_pipeline", "set_gain", "start_calibration", "end_calibration",
    "toggle_sources", "toggle_traces",
)

GAIN_MAX = 8.0


def b64_f32(values: np.ndarray) -> str:
    """Row-major little-endian float32, base64."""
    return base64.b64encode(np.asarray(values).astype("<f4").tobytes(order="C")).decode("ascii")


def b64_bytes(raw: bytes) -> str:
    return base64.b64encode(raw).decode("ascii")


def decode_f32(payload: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(payload), dtype="<f4")


def error_message(text: str) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "error", "message": text}


def end_message(reason: str = "end-of-source") -> dict:
    return {"v": PROTOCOL_VERSION, "type": "end", "reason": reason}


def parse_control(msg) -> dict:
    """Validate a client control message; raises ValueError on junk."""
    if isinstance(msg, (str, bytes)):
        try:
            msg = json.loads(msg)
        except json.JSONDecodeError as e:
            raise ValueError(f"control message is not valid JSON: {e}") from None
    if not isinstance(msg, dict):
        raise ValueError("control message must be a JSON object")
    mtype = msg.get("type")
    if mtype not in CONTROL_TYPES:
        raise ValueError(f"unknown control type {mtype!r}")
    if mtype == "select_pipeline":
        if not isinstance(msg.get("pipeline"), str):
            raise ValueError("select_pipeline needs a 'pipeline' string")
    elif mtype == "set_gain":
        gain = msg.get("gain")
        if not isinstance(gain, (int, float)) or not (0.0 < float(gain) <= GAIN_MAX):
            raise ValueError(f"set_gain needs 0 < gain <= {GAIN_MAX}, got {gain!r}")
    elif mtype in ("toggle_sources", "toggle_traces"):
        if not isinstance(msg.get("enabled"), bool):
            raise ValueError(f"{mtype} needs a boolean 'enabled'")
    return msg


def dumps(msg: dict) -> str:
    """Canonical serialization (compact separators, insertion key order)."""
    return json.dumps(msg, separators=(",", ":"), allow_nan=False)
