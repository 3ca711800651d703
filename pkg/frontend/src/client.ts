// WebSocket session client: connect, version-check the hello, dispatch
// messages, reconnect with backoff, and flag a dead link within the liveness
// budget. The socket and clock are injectable so tests can drive it.

import {
  ControlMessage,
  PROTOCOL_VERSION,
  ServerMessage,
  VersionMismatchError,
  encodeControl,
  parseServerMessage,
} from "./protocol";
import { SessionStore } from "./state";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface ClientOptions {
  socketFactory?: (url: string) => SocketLike;
  now?: () => number;
  setTimer?: (fn: () => void, ms: number) => unknown;
  clearTimer?: (handle: unknown) => void;
  /** banner must show within this long after the link goes quiet */
  staleAfterMs?: number;
  reconnect?: boolean;
}

// the banner must be up within 2 s of the link going quiet; threshold plus
// one watchdog tick stays inside that budget
export const DEFAULT_STALE_MS = 1500;
const WATCHDOG_INTERVAL_MS = 250;
const BACKOFF_MS = [500, 1000, 2000, 4000, 5000];

export class SessionClient {
  readonly store: SessionStore;
  onMessage: ((msg: ServerMessage) => void) | null = null;

  private socket: SocketLike | null = null;
  private lastHeardAt = 0;
  private attempts = 0;
  private closed = false;
  private watchdogHandle: unknown = null;
  private readonly opts: Required<ClientOptions>;

  constructor(
    private url: string,
    store?: SessionStore,
    opts: ClientOptions = {},
  ) {
    this.store = store ?? new SessionStore();
    this.opts = {
      socketFactory: opts.socketFactory
        ?? ((u: string) => new WebSocket(u) as unknown as SocketLike),
      now: opts.now ?? (() => Date.now()),
      setTimer: opts.setTimer ?? ((fn, ms) => setTimeout(fn, ms)),
      clearTimer: opts.clearTimer ?? ((h) => clearTimeout(h as number)),
      staleAfterMs: opts.staleAfterMs ?? DEFAULT_STALE_MS,
      reconnect: opts.reconnect ?? true,
    };
  }

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const sock = this.opts.socketFactory(this.url);
    this.socket = sock;
    this.lastHeardAt = this.opts.now();
    sock.onopen = () => {
      this.attempts = 0;
      this.lastHeardAt = this.opts.now();
    };
    sock.onmessage = (ev) => this.handleText(ev.data);
    sock.onclose = () => this.handleDrop();
    sock.onerror = () => this.handleDrop();
    this.armWatchdog();
  }

  private handleText(text: string): void {
    this.lastHeardAt = this.opts.now();
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(text);
    } catch (e) {
      if (e instanceof VersionMismatchError) {
        // no partial render on a version we do not speak
        this.store.setConnection(
          "version-mismatch",
          `server speaks protocol v${e.serverVersion}, this UI speaks v${e.clientVersion}`,
        );
        this.closed = true;
        this.socket?.close();
        return;
      }
      console.warn("dropped malformed message:", e);
      return;
    }
    this.store.applyServerMessage(msg);
    this.onMessage?.(msg);
  }

  private handleDrop(): void {
    if (this.closed || this.store.state.connection === "ended") return;
    this.store.setConnection("lost");
    if (this.opts.reconnect) {
      const delay = BACKOFF_MS[Math.min(this.attempts, BACKOFF_MS.length - 1)];
      this.attempts += 1;
      this.opts.setTimer(() => {
        if (!this.closed && this.store.state.connection === "lost") this.open();
      }, delay);
    }
  }

  private armWatchdog(): void {
    if (this.watchdogHandle !== null) this.opts.clearTimer(this.watchdogHandle);
    const tick = () => {
      if (this.closed) return;
      const quiet = this.opts.now() - this.lastHeardAt;
      const st = this.store.state.connection;
      if (quiet > this.opts.staleAfterMs && st === "open") {
        this.store.setConnection("lost");
      }
      this.watchdogHandle = this.opts.setTimer(tick, WATCHDOG_INTERVAL_MS);
    };
    this.watchdogHandle = this.opts.setTimer(tick, WATCHDOG_INTERVAL_MS);
  }

  sendControl(msg: ControlMessage): void {
    if (!this.socket || this.store.state.connection !== "open") return;
    this.socket.send(encodeControl(msg));
  }

  close(): void {
    this.closed = true;
    if (this.watchdogHandle !== null) this.opts.clearTimer(this.watchdogHandle);
    this.socket?.close();
  }
}

export function protocolVersion(): number {
  return PROTOCOL_VERSION;
}
