/**
 * Engine sources: where frame records come from.
 *
 * The UI contains no DSP. A source either replays an engine-produced
 * protocol stream (fixture playback) or forwards captured PCM to an
 * external engine process over a WebSocket and relays the lines it sends
 * back. Records always arrive with their original serialized line so
 * exports can re-emit engine output byte for byte.
 */

import {
  FrameRecord,
  ParsedStream,
  SessionHeader,
  parseLine,
  readStream,
} from "./protocol.js";

export type RecordListener = (record: FrameRecord, line: string) => void;
export type EndListener = (reason: string) => void;

export interface EngineSession {
  readonly header: SessionHeader;
  readonly headerLine: string;
  onRecord(listener: RecordListener): () => void;
  onEnd(listener: EndListener): () => void;
  /** Start the record flow. Idempotent. */
  begin(): void;
  stop(): void;
  /** Resolves when the source has no more records (or after stop()). */
  readonly done: Promise<void>;
  /**
   * Apply a new mapping config (the CLI's plain-text document). Sources
   * that analyze live audio restart their engine and emit a fresh header;
   * pre-analyzed sources cannot honor this and reject.
   */
  reconfigure(configDoc: string): Promise<SessionHeader>;
}

export interface EngineSource {
  readonly kind: string;
  start(): Promise<EngineSession>;
}

/** Sessions backed by a live engine accept captured PCM. */
export interface PcmSink {
  pushChunk(chunk: Float32Array): void;
}

export function acceptsPcm(session: EngineSession): session is EngineSession & PcmSink {
  return typeof (session as Partial<PcmSink>).pushChunk === "function";
}

class Listeners<T extends (...args: never[]) => void> {
  private items: T[] = [];
  add(listener: T): () => void {
    this.items.push(listener);
    return () => {
      this.items = this.items.filter((l) => l !== listener);
    };
  }
  emit(...args: Parameters<T>): void {
    for (const listener of [...this.items]) listener(...args);
  }
}

export interface FixtureOptions {
  /** Pace records by their timestamps; off, everything flushes at begin(). */
  realtime?: boolean;
  /** Playback rate multiplier when realtime (1 = natural speed). */
  speed?: number;
}

/**
 * Replays a bundled, pre-analyzed session stream. This is the path that
 * works with no microphone and no engine process, and the one the
 * fidelity tests drive.
 */
export class FixturePlaybackSource implements EngineSource {
  readonly kind = "fixture";

  constructor(
    private readonly streamText: string,
    private readonly options: FixtureOptions = {},
  ) {}

  start(): Promise<EngineSession> {
    const parsed = readStream(this.streamText);
    return Promise.resolve(new FixtureSession(parsed, this.options));
  }
}

class FixtureSession implements EngineSession {
  readonly header: SessionHeader;
  readonly headerLine: string;
  readonly done: Promise<void>;

  private records: Listeners<RecordListener> = new Listeners();
  private ends: Listeners<EndListener> = new Listeners();
  private resolveDone!: () => void;
  private cursor = 0;
  private started = false;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly stream: ParsedStream,
    private readonly options: FixtureOptions,
  ) {
    this.header = stream.header;
    this.headerLine = stream.headerLine;
    this.done = new Promise((resolve) => {
      this.resolveDone = resolve;
    });
  }

  onRecord(listener: RecordListener): () => void {
    return this.records.add(listener);
  }

  onEnd(listener: EndListener): () => void {
    return this.ends.add(listener);
  }

  begin(): void {
    if (this.started || this.stopped) return;
    this.started = true;
    if (this.options.realtime) {
      this.scheduleNext(performance.now());
    } else {
      while (this.cursor < this.stream.records.length && !this.stopped) {
        this.emitNext();
      }
      this.finish("end-of-stream");
    }
  }

  private emitNext(): void {
    const i = this.cursor++;
    this.records.emit(this.stream.records[i], this.stream.recordLines[i]);
  }

  private scheduleNext(startedAt: number): void {
    if (this.stopped || this.cursor >= this.stream.records.length) {
      this.finish("end-of-stream");
      return;
    }
    const speed = this.options.speed ?? 1;
    const target = startedAt + (this.stream.records[this.cursor].timestamp * 1000) / speed;
    const delay = Math.max(0, target - performance.now());
    this.timer = setTimeout(() => {
      this.emitNext();
      this.scheduleNext(startedAt);
    }, delay);
  }

  stop(): void {
    if (this.stopped) return;
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.finish("stopped");
  }

  private finish(reason: string): void {
    if (!this.stopped) this.stopped = true;
    this.ends.emit(reason);
    this.resolveDone();
  }

  reconfigure(): Promise<SessionHeader> {
    return Promise.reject(
      new Error("fixture playback is pre-analyzed; reconfigure needs a live engine source"),
    );
  }
}

/**
 * Live source: forwards Float32 PCM chunks to a musicviz engine bridge
 * over a WebSocket and relays the protocol lines it answers with. The
 * bridge speaks exactly the frame-stream protocol, header line first.
 */
export class BridgeEngineSource implements EngineSource {
  readonly kind = "bridge";

  constructor(
    private readonly url: string,
    private readonly sampleRate: number,
    private readonly makeSocket: (url: string) => WebSocket = (u) => new WebSocket(u),
  ) {}

  start(): Promise<EngineSession> {
    const socket = this.makeSocket(this.url);
    socket.binaryType = "arraybuffer";
    return new Promise((resolve, reject) => {
      const session = new BridgeSession(socket, this.sampleRate, resolve, reject);
      void session;
    });
  }
}

class BridgeSession implements EngineSession, PcmSink {
  header!: SessionHeader;
  headerLine = "";
  readonly done: Promise<void>;

  private records: Listeners<RecordListener> = new Listeners();
  private ends: Listeners<EndListener> = new Listeners();
  private resolveDone!: () => void;
  private opened = false;
  private stopped = false;
  private pendingHeader: ((header: SessionHeader) => void) | null = null;

  constructor(
    private readonly socket: WebSocket,
    sampleRate: number,
    resolveStart: (session: BridgeSession) => void,
    rejectStart: (err: Error) => void,
  ) {
    this.done = new Promise((resolve) => {
      this.resolveDone = resolve;
    });
    socket.onopen = () => {
      socket.send(JSON.stringify({ type: "hello", sampleRate }));
    };
    socket.onmessage = (event) => {
      if (typeof event.data !== "string") return;
      for (const line of event.data.split("\n")) {
        if (!line.trim()) continue;
        const obj = parseLine(line);
        if ("protocolVersion" in obj) {
          this.header = obj;
          this.headerLine = line;
          if (!this.opened) {
            this.opened = true;
            resolveStart(this);
          }
          if (this.pendingHeader) {
            this.pendingHeader(obj);
            this.pendingHeader = null;
          }
        } else {
          this.records.emit(obj, line);
        }
      }
    };
    socket.onerror = () => {
      if (!this.opened) rejectStart(new Error(`engine bridge unreachable at ${socket.url}`));
    };
    socket.onclose = () => {
      if (!this.opened) {
        rejectStart(new Error(`engine bridge closed the connection`));
      } else if (!this.stopped) {
        this.stopped = true;
        this.ends.emit("bridge-closed");
        this.resolveDone();
      }
    };
  }

  onRecord(listener: RecordListener): () => void {
    return this.records.add(listener);
  }

  onEnd(listener: EndListener): () => void {
    return this.ends.add(listener);
  }

  begin(): void {
    // records flow as soon as audio is pushed
  }

  /** Forward one captured PCM chunk to the engine. */
  pushChunk(chunk: Float32Array): void {
    if (this.socket.readyState === WebSocket.OPEN) {
      this.socket.send(chunk.buffer as ArrayBuffer);
    }
  }

  stop(): void {
    if (this.stopped) return;
    this.stopped = true;
    this.socket.close();
    this.ends.emit("stopped");
    this.resolveDone();
  }

  reconfigure(configDoc: string): Promise<SessionHeader> {
    return new Promise((resolve, reject) => {
      if (this.socket.readyState !== WebSocket.OPEN) {
        reject(new Error("bridge connection is not open"));
        return;
      }
      this.pendingHeader = resolve;
      this.socket.send(JSON.stringify({ type: "configure", config: configDoc }));
    });
  }
}
