/**
 * App wiring: source selection, live controls, HUD, and export.
 *
 * Controls reconfigure the engine with a new mapping config document (the
 * same format the CLI reads); they never rewrite frames after the fact.
 */

import {
  BridgeEngineSource,
  EngineSource,
  FixturePlaybackSource,
  acceptsPcm,
} from "./engineSource.js";
import { startMicrophoneCapture, Capture, CaptureError } from "./capture.js";
import { hudInfo, sceneParams } from "./renderParams.js";
import { SphereRenderer } from "./renderer.js";
import { UiSession } from "./session.js";
import { MappingConfig, dumpMappingConfigDoc } from "./protocol.js";

const FIXTURE_URL = "./fixtures/a440.jsonl";
const DEFAULT_BRIDGE_URL = "ws://localhost:8765";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const session = new UiSession();
let renderer: SphereRenderer | null = null;
let capture: Capture | null = null;

function showError(message: string | null): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

function setRunning(running: boolean): void {
  el<HTMLButtonElement>("start").disabled = running;
  el<HTMLButtonElement>("stop").disabled = !running;
}

function currentOverrides(base: MappingConfig): MappingConfig {
  return {
    ...base,
    alphaColor: Number(el<HTMLInputElement>("alpha-color").value),
    alphaScale: Number(el<HTMLInputElement>("alpha-scale").value),
    alphaTexture: Number(el<HTMLInputElement>("alpha-texture").value),
    invertRoughness: el<HTMLInputElement>("invert-roughness").checked,
    palette:
      el<HTMLSelectElement>("palette").value === "cool"
        ? Array.from({ length: 12 }, (_, i) => (180 + i * 30) % 360)
        : Array.from({ length: 12 }, (_, i) => i * 30),
  };
}

async function applyOverrides(): Promise<void> {
  if (!session.running || !session.header) return;
  try {
    await session.reconfigure(dumpMappingConfigDoc(currentOverrides(session.header.mapping)));
    showError(null);
  } catch (err) {
    showError((err as Error).message);
  }
}

async function makeSource(): Promise<EngineSource> {
  const choice = el<HTMLSelectElement>("source").value;
  if (choice === "fixture") {
    const response = await fetch(FIXTURE_URL);
    if (!response.ok) throw new Error(`fixture not found at ${FIXTURE_URL}`);
    return new FixturePlaybackSource(await response.text(), { realtime: true });
  }
  // microphone: capture first (permission prompt), then bridge the PCM
  capture = await startMicrophoneCapture();
  const url = el<HTMLInputElement>("bridge-url").value || DEFAULT_BRIDGE_URL;
  return new BridgeEngineSource(url, capture.sampleRate);
}

async function start(): Promise<void> {
  showError(null);
  let source: EngineSource;
  try {
    source = await makeSource();
  } catch (err) {
    if (err instanceof CaptureError) {
      showError(`${err.message} (retry after granting access)`);
    } else {
      showError((err as Error).message);
    }
    capture?.stop();
    capture = null;
    return;
  }
  let engineSession;
  try {
    engineSession = await session.start(source);
  } catch (err) {
    showError((err as Error).message);
    capture?.stop();
    capture = null;
    return;
  }
  setRunning(true);
  if (capture && acceptsPcm(engineSession)) {
    const sink = engineSession;
    capture.onChunk((chunk) => sink.pushChunk(chunk));
    capture.onLost(() => {
      stop();
      showError("audio device lost; capture stopped");
    });
  }
}

function stop(): void {
  session.stop();
  capture?.stop();
  capture = null;
  setRunning(false);
}

function exportSession(): void {
  try {
    const text = session.exportSession();
    const blob = new Blob([text], { type: "application/x-ndjson" });
    const anchor = document.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = "musicviz-session.jsonl";
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  } catch (err) {
    showError((err as Error).message);
  }
}

function boot(): void {
  renderer = new SphereRenderer(el<HTMLCanvasElement>("scene"));
  renderer.startLoop();
  window.addEventListener("resize", () => renderer?.resize());

  session.subscribe((event) => {
    if (event.kind === "record") {
      renderer?.submit(sceneParams(event.record.visual));
      const hud = hudInfo(event.record);
      el<HTMLDivElement>("hud-note").textContent = `${hud.note}  ${hud.clarity}`;
      el<HTMLDivElement>("hud-features").textContent = hud.features;
    } else if (event.kind === "stopped") {
      setRunning(false);
    } else if (event.kind === "error") {
      showError(event.message);
    }
  });

  el<HTMLButtonElement>("start").addEventListener("click", () => void start());
  el<HTMLButtonElement>("stop").addEventListener("click", stop);
  el<HTMLButtonElement>("export").addEventListener("click", exportSession);
  for (const id of ["alpha-color", "alpha-scale", "alpha-texture", "invert-roughness", "palette"]) {
    el<HTMLElement>(id).addEventListener("change", () => void applyOverrides());
  }
  setRunning(false);
}

boot();
