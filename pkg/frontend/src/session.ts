/**
 * UI session state: the lifecycle around one engine session, the rolling
 * history the HUD reads, and session export.
 *
 * Rendered parameters always equal the most recent engine output; user
 * overrides go through EngineSession.reconfigure (a new mapping config for
 * the engine), never through post-hoc mutation of received frames.
 */

import { EngineSession, EngineSource } from "./engineSource.js";
import { FrameRecord, SessionHeader } from "./protocol.js";

export const HISTORY_SECONDS = 10;

export type SessionEvent =
  | { kind: "started"; header: SessionHeader }
  | { kind: "record"; record: FrameRecord }
  | { kind: "stopped"; reason: string }
  | { kind: "error"; message: string };

export class UiSession {
  running = false;
  sourceKind: string | null = null;
  header: SessionHeader | null = null;
  current: FrameRecord | null = null;
  /** Last HISTORY_SECONDS of records, oldest first. */
  history: FrameRecord[] = [];
  lastError: string | null = null;

  private session: EngineSession | null = null;
  private exportLines: string[] = [];
  private listeners: ((event: SessionEvent) => void)[] = [];
  private unsubscribe: (() => void)[] = [];

  subscribe(listener: (event: SessionEvent) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(event: SessionEvent): void {
    for (const listener of [...this.listeners]) listener(event);
  }

  async start(source: EngineSource): Promise<EngineSession> {
    if (this.running) this.stop();
    this.lastError = null;
    let session: EngineSession;
    try {
      session = await source.start();
    } catch (err) {
      this.lastError = (err as Error).message;
      this.emit({ kind: "error", message: this.lastError });
      throw err;
    }
    this.session = session;
    this.sourceKind = source.kind;
    this.header = session.header;
    this.current = null;
    this.history = [];
    this.exportLines = [session.headerLine];
    this.running = true;
    this.unsubscribe = [
      session.onRecord((record, line) => this.takeRecord(record, line)),
      session.onEnd((reason) => this.takeEnd(reason)),
    ];
    this.emit({ kind: "started", header: session.header });
    session.begin();
    return session;
  }

  private takeRecord(record: FrameRecord, line: string): void {
    this.current = record;
    this.history.push(record);
    const horizon = record.timestamp - HISTORY_SECONDS;
    while (this.history.length && this.history[0].timestamp < horizon) {
      this.history.shift();
    }
    this.exportLines.push(line);
    this.emit({ kind: "record", record });
  }

  private takeEnd(reason: string): void {
    if (!this.running) return;
    this.running = false;
    this.emit({ kind: "stopped", reason });
  }

  stop(): void {
    const session = this.session;
    if (session) {
      this.unsubscribe.forEach((u) => u());
      this.unsubscribe = [];
      this.session = null;
      this.running = false;
      session.stop();
      this.emit({ kind: "stopped", reason: "stopped" });
    }
  }

  async reconfigure(configDoc: string): Promise<void> {
    if (!this.session) throw new Error("no active session");
    const header = await this.session.reconfigure(configDoc);
    this.header = header;
  }

  /**
   * The session as an exact protocol-v1 stream: the header line plus every
   * record line as the engine emitted them, byte for byte.
   */
  exportSession(): string {
    if (!this.exportLines.length) throw new Error("no session to export");
    return this.exportLines.join("\n") + "\n";
  }

  get hasSession(): boolean {
    return this.exportLines.length > 0;
  }
}
