// Wire-protocol types and decoding. Field names and encodings mirror
// docs/PROTOCOL.md; the UI renders nothing it did not receive.

export const PROTOCOL_VERSION = 1;

export type ColorStop = [number, [number, number, number]];

export interface Colormaps {
  diverging: ColorStop[];
  gray: ColorStop[];
  sequential: ColorStop[];
}

export type CalibrationState = "idle" | "calibrating" | "ready";

export interface HelloMessage {
  v: number;
  type: "hello";
  fs: number;
  frameRate: number;
  traceRate: number;
  traceDecimation: number;
  speed: number;
  pipelines: string[];
  montage: {
    labels: string[];
    uv: [number, number][];
    pos: [number, number, number][];
  };
  regions: Record<string, string[]>;
  highlights: Record<string, string[]>;
  grid: { width: number; height: number; mask: string; nearest: string };
  colormaps: Colormaps;
  gain: { value: number; max: number };
  sources:
    | { available: false }
    | { available: true; nVoxels: number; positions: string };
  calibration: CalibrationState;
}

export interface FrameMessage {
  v: number;
  type: "frame";
  t: number;
  pipeline: string;
  calibration: CalibrationState;
  ready: boolean;
  electrodeValues: number[];
  highlight: string[];
  blink: boolean;
  gain: number;
  grid?: { width: number; height: number; values: string };
  sources?: { values: string };
}

export interface TraceMessage {
  v: number;
  type: "trace";
  t: number;
  pipeline: string;
  channels: number[][];
}

export interface ErrorMessage {
  v: number;
  type: "error";
  message: string;
}

export interface EndMessage {
  v: number;
  type: "end";
  reason: string;
}

export type ServerMessage =
  | HelloMessage
  | FrameMessage
  | TraceMessage
  | ErrorMessage
  | EndMessage;

export type ControlMessage =
  | { type: "select_pipeline"; pipeline: string }
  | { type: "set_gain"; gain: number }
  | { type: "start_calibration" }
  | { type: "end_calibration" }
  | { type: "toggle_sources"; enabled: boolean }
  | { type: "toggle_traces"; enabled: boolean };

const SERVER_TYPES = new Set(["hello", "frame", "trace", "error", "end"]);

export class ProtocolError extends Error {}

export class VersionMismatchError extends ProtocolError {
  constructor(
    public serverVersion: unknown,
    public clientVersion: number,
  ) {
    super(`protocol version mismatch: server ${serverVersion}, client ${clientVersion}`);
  }
}

export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    throw new ProtocolError(`message is not JSON: ${e}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("message is not an object");
  }
  const msg = raw as Record<string, unknown>;
  if (msg.v !== PROTOCOL_VERSION) {
    throw new VersionMismatchError(msg.v, PROTOCOL_VERSION);
  }
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
    throw new ProtocolError(`unknown message type ${String(msg.type)}`);
  }
  return msg as unknown as ServerMessage;
}

function base64Bytes(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  // node (vitest) fallback
  return new Uint8Array(Buffer.from(b64, "base64"));
}

export function decodeF32(b64: string): Float32Array {
  const bytes = base64Bytes(b64);
  return new Float32Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 4);
}

export function decodeU8(b64: string): Uint8Array {
  return base64Bytes(b64);
}

/** Unpack the row-major MSB-first mask bitset into one byte per pixel. */
export function decodeMask(b64: string, count: number): Uint8Array {
  const packed = base64Bytes(b64);
  const out = new Uint8Array(count);
  for (let i = 0; i < count; i++) {
    out[i] = (packed[i >> 3] >> (7 - (i & 7))) & 1;
  }
  return out;
}

export function encodeControl(msg: ControlMessage): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, ...msg });
}
