import {
  MetaMessage,
  ServerMessage,
  StateMessage,
  parseServerMessage,
  resetCommand,
  targetCommand,
} from './protocol.js';

// Minimal structural view of a WebSocket, so tests can inject a fake.
export interface SocketLike {
  send(data: string): void;
  close(code?: number): void;
  readonly readyState: number;
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: { data: any }) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface TeleopClientOptions {
  socketFactory?: SocketFactory;
  /** First reconnect delay in ms; doubles per failed attempt. */
  reconnectDelayMs?: number;
  maxReconnectDelayMs?: number;
}

/**
 * Connection to the teleop service.
 *
 * Incoming frames update `meta` / `lastState` and fire the `on*`
 * callbacks. Outgoing targets are latest-wins: `sendTarget` only parks
 * the coordinates, and the newest pending target is written right when
 * the next state frame arrives. The state stream is the tick clock, so
 * this caps the outbound rate at the server's tick rate with no timer
 * of its own. A dropped connection is retried with exponential backoff.
 */
export class TeleopClient {
  meta: MetaMessage | null = null;
  lastState: StateMessage | null = null;
  connected = false;
  /** Most recent target actually written to the socket. */
  lastSentTarget: number[] | null = null;

  onMeta: ((meta: MetaMessage) => void) | null = null;
  onState: ((state: StateMessage) => void) | null = null;
  onServerError: ((msg: string) => void) | null = null;
  onConnectionChange: ((connected: boolean) => void) | null = null;

  private readonly factory: SocketFactory;
  private readonly baseDelay: number;
  private readonly maxDelay: number;
  private socket: SocketLike | null = null;
  private pendingTarget: number[] | null = null;
  private attempts = 0;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = true;

  constructor(readonly url: string, options: TeleopClientOptions = {}) {
    this.factory = options.socketFactory ?? ((u) => new WebSocket(u) as SocketLike);
    this.baseDelay = options.reconnectDelayMs ?? 500;
    this.maxDelay = options.maxReconnectDelayMs ?? 8000;
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
    this.connected = false;
  }

  /** Park the desired tool position; it goes out on the next tick. */
  sendTarget(coords: number[]): void {
    this.pendingTarget = coords.slice();
  }

  /** Ask the server to restore its initial pose. */
  reset(): void {
    this.pendingTarget = null;
    this.lastSentTarget = null;
    if (this.socket && this.connected) {
      this.socket.send(resetCommand());
    }
  }

  private connect(): void {
    const ws = this.factory(this.url);
    this.socket = ws;
    ws.onopen = () => {
      this.attempts = 0;
      this.connected = true;
      this.lastSentTarget = null;
      this.onConnectionChange?.(true);
    };
    ws.onmessage = (ev) => this.handleFrame(String(ev.data));
    ws.onerror = () => {
      // The close event follows; reconnect is handled there.
    };
    ws.onclose = () => {
      const wasConnected = this.connected;
      this.connected = false;
      this.meta = null;
      if (wasConnected) this.onConnectionChange?.(false);
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.reconnectTimer !== null) return;
    const delay = Math.min(this.baseDelay * 2 ** this.attempts, this.maxDelay);
    this.attempts += 1;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      if (!this.stopped) this.connect();
    }, delay);
  }

  private handleFrame(raw: string): void {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(raw);
    } catch (err) {
      this.onServerError?.(err instanceof Error ? err.message : String(err));
      return;
    }
    if (msg.type === 'meta') {
      this.meta = msg;
      this.onMeta?.(msg);
    } else if (msg.type === 'state') {
      this.lastState = msg;
      this.flushTarget();
      this.onState?.(msg);
    } else {
      this.onServerError?.(msg.msg);
    }
  }

  private flushTarget(): void {
    if (!this.socket || !this.connected || this.pendingTarget === null) return;
    const p = this.pendingTarget;
    this.pendingTarget = null;
    if (this.lastSentTarget !== null &&
        p.length === this.lastSentTarget.length &&
        p.every((v, i) => v === this.lastSentTarget![i])) {
      return;
    }
    this.socket.send(targetCommand(p));
    this.lastSentTarget = p;
  }
}
