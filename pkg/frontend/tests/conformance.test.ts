// Protocol conformance: a scripted interaction must put exactly the expected
// control messages on the wire, and a replayed transcript must drive the
// view-state highlights frame for frame.

import { beforeEach, describe, expect, it, vi } from "vitest";

import { SessionClient, SocketLike } from "../src/client";
import { ControlSurface, GAIN_DEBOUNCE_MS } from "../src/controls";
import transcript from "./fixtures/transcript.json";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  serve(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }
}

function connected(): { client: SessionClient; socket: FakeSocket } {
  const socket = new FakeSocket();
  const client = new SessionClient("ws://test/ws", undefined, {
    socketFactory: () => socket,
    reconnect: false,
  });
  client.connect();
  socket.onopen?.();
  socket.serve(transcript.hello);
  return { client, socket };
}

beforeEach(() => {
  vi.useFakeTimers();
});

describe("scripted interaction", () => {
  it("emits the exact control sequence", () => {
    const { client, socket } = connected();
    const surface = new ControlSurface((m) => client.sendControl(m));

    for (const kind of ["raw", "motor", "vision", "meditation"]) {
      surface.selectPipeline(kind);
    }
    // a slider drag: several quick values, one debounced message
    surface.setGain(1.3);
    surface.setGain(1.7);
    surface.setGain(2.0);
    vi.advanceTimersByTime(GAIN_DEBOUNCE_MS + 10);
    surface.startCalibration();
    surface.endCalibration();

    const got = socket.sent.map((s) => JSON.parse(s));
    expect(got).toEqual([
      { v: 1, type: "select_pipeline", pipeline: "raw" },
      { v: 1, type: "select_pipeline", pipeline: "motor" },
      { v: 1, type: "select_pipeline", pipeline: "vision" },
      { v: 1, type: "select_pipeline", pipeline: "meditation" },
      { v: 1, type: "set_gain", gain: 2.0 },
      { v: 1, type: "start_calibration" },
      { v: 1, type: "end_calibration" },
    ]);
  });

  it("debounce emits the final value once per pause", () => {
    const { client, socket } = connected();
    const surface = new ControlSurface((m) => client.sendControl(m));
    surface.setGain(3.0);
    vi.advanceTimersByTime(GAIN_DEBOUNCE_MS + 10);
    surface.setGain(4.0);
    vi.advanceTimersByTime(GAIN_DEBOUNCE_MS + 10);
    const gains = socket.sent.map((s) => JSON.parse(s));
    expect(gains).toEqual([
      { v: 1, type: "set_gain", gain: 3.0 },
      { v: 1, type: "set_gain", gain: 4.0 },
    ]);
  });

  it("toggles map 1:1", () => {
    const { client, socket } = connected();
    const surface = new ControlSurface((m) => client.sendControl(m));
    surface.toggleTraces(false);
    surface.toggleSources(true);
    expect(socket.sent.map((s) => JSON.parse(s))).toEqual([
      { v: 1, type: "toggle_traces", enabled: false },
      { v: 1, type: "toggle_sources", enabled: true },
    ]);
  });

  it("sends nothing while disconnected", () => {
    const socket = new FakeSocket();
    const client = new SessionClient("ws://test/ws", undefined, {
      socketFactory: () => socket,
      reconnect: false,
    });
    const surface = new ControlSurface((m) => client.sendControl(m));
    surface.selectPipeline("vision"); // no hello yet -> not open
    expect(socket.sent).toEqual([]);
  });
});

describe("transcript replay", () => {
  it("reflects every frame's pipeline, highlight, gain, and blink", () => {
    const { client, socket } = connected();
    for (const frame of transcript.frames) {
      socket.serve(frame);
      const st = client.store.state;
      expect(st.pipeline).toBe(frame.pipeline);
      expect(st.highlight).toEqual(frame.highlight);
      expect(st.gain).toBe(frame.gain);
      expect(st.blink).toBe(frame.blink);
    }
  });

  it("reflects calibration state transitions from server flags", () => {
    const { client, socket } = connected();
    const seen: string[] = [];
    for (const frame of transcript.frames) {
      socket.serve(frame);
      const c = client.store.state.calibration;
      if (seen[seen.length - 1] !== c) seen.push(c);
    }
    expect(seen).toEqual(["ready"]); // sampled frames are all post-calibration
    socket.serve({ ...transcript.frames[0], calibration: "calibrating", ready: false });
    expect(client.store.state.calibration).toBe("calibrating");
  });
});
