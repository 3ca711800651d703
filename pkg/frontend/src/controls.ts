// User actions -> control messages, 1:1 with the protocol. The gain slider
// is debounced so a drag emits one message.

import type { ControlMessage } from "./protocol";

export type Send = (msg: ControlMessage) => void;

export const GAIN_DEBOUNCE_MS = 100;

export class GainDebouncer {
  private pending: number | null = null;
  private handle: unknown = null;

  constructor(
    private send: Send,
    private setTimer: (fn: () => void, ms: number) => unknown = (fn, ms) =>
      setTimeout(fn, ms),
    private clearTimer: (h: unknown) => void = (h) => clearTimeout(h as number),
    private delayMs: number = GAIN_DEBOUNCE_MS,
  ) {}

  set(gain: number): void {
    this.pending = gain;
    if (this.handle !== null) this.clearTimer(this.handle);
    this.handle = this.setTimer(() => this.flush(), this.delayMs);
  }

  flush(): void {
    if (this.handle !== null) {
      this.clearTimer(this.handle);
      this.handle = null;
    }
    if (this.pending !== null) {
      this.send({ type: "set_gain", gain: this.pending });
      this.pending = null;
    }
  }
}

/** The clickable surface: every method emits exactly one control message
 * (gain excepted, which debounces). */
export class ControlSurface {
  readonly gain: GainDebouncer;

  constructor(
    private send: Send,
    timers?: {
      setTimer: (fn: () => void, ms: number) => unknown;
      clearTimer: (h: unknown) => void;
    },
  ) {
    this.gain = new GainDebouncer(
      send,
      timers?.setTimer,
      timers?.clearTimer,
    );
  }

  selectPipeline(kind: string): void {
    this.send({ type: "select_pipeline", pipeline: kind });
  }

  setGain(gain: number): void {
    this.gain.set(gain);
  }

  startCalibration(): void {
    this.send({ type: "start_calibration" });
  }

  endCalibration(): void {
    this.send({ type: "end_calibration" });
  }

  toggleTraces(enabled: boolean): void {
    this.send({ type: "toggle_traces", enabled });
  }

  toggleSources(enabled: boolean): void {
    this.send({ type: "toggle_sources", enabled });
  }
}
