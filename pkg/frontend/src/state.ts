// Session view state: a small store fed by server messages and user intent.
// The store never invents display data; it only reflects messages.

import type {
  CalibrationState,
  FrameMessage,
  HelloMessage,
  ServerMessage,
} from "./protocol";

export type ConnectionState =
  | "connecting"
  | "open"
  | "lost"
  | "ended"
  | "version-mismatch";

export interface ViewState {
  connection: ConnectionState;
  versionBanner: string | null;
  errorBanner: string | null;
  hello: HelloMessage | null;
  pipeline: string;
  gain: number;
  calibration: CalibrationState;
  sourcesOn: boolean;
  tracesOn: boolean;
  blink: boolean;
  highlight: string[];
  lastFrame: FrameMessage | null;
}

export type Listener = (state: ViewState) => void;

export class SessionStore {
  state: ViewState = {
    connection: "connecting",
    versionBanner: null,
    errorBanner: null,
    hello: null,
    pipeline: "raw",
    gain: 1.0,
    calibration: "idle",
    sourcesOn: false,
    tracesOn: true,
    blink: false,
    highlight: [],
    lastFrame: null,
  };

  private listeners: Listener[] = [];

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  setConnection(c: ConnectionState, banner: string | null = null): void {
    this.state.connection = c;
    if (c === "version-mismatch") this.state.versionBanner = banner;
    this.emit();
  }

  applyServerMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case "hello":
        this.state.hello = msg;
        this.state.gain = msg.gain.value;
        this.state.calibration = msg.calibration;
        this.state.connection = "open";
        break;
      case "frame":
        this.state.lastFrame = msg;
        this.state.pipeline = msg.pipeline;
        this.state.calibration = msg.calibration;
        this.state.highlight = msg.highlight;
        this.state.blink = msg.blink;
        this.state.gain = msg.gain;
        break;
      case "error":
        this.state.errorBanner = msg.message;
        break;
      case "end":
        this.state.connection = "ended";
        break;
      case "trace":
        break; // handled by the trace strip directly
    }
    this.emit();
  }
}
