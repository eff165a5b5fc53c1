/**
 * Pure mapping from a VisualParams block to concrete scene values.
 * Kept free of three.js so every number the renderer uses is testable.
 */

import { NOTE_NAMES, FrameRecord, VisualParams } from "./protocol.js";

export interface SceneParams {
  /** Base color as linear-ish RGB in [0, 1]. */
  color: [number, number, number];
  emissiveIntensity: number;
  scale: number;
  roughness: number;
  /** Vertex noise amplitude relative to the sphere radius. */
  displacementAmplitude: number;
  /** Spatial frequency of the surface noise. */
  noiseFrequency: number;
}

export const DISPLACEMENT_GAIN = 0.35;
export const NOISE_FREQ_MIN = 1.5;
export const NOISE_FREQ_MAX = 12.0;

/** Standard HSL to RGB, hue in degrees, s/l in [0, 1]. */
export function hslToRgb(hue: number, s: number, l: number): [number, number, number] {
  const h = (((hue % 360) + 360) % 360) / 360;
  if (s === 0) return [l, l, l];
  const q = l < 0.5 ? l * (1 + s) : l + s - l * s;
  const p = 2 * l - q;
  const channel = (t0: number): number => {
    let t = t0;
    if (t < 0) t += 1;
    if (t > 1) t -= 1;
    if (t < 1 / 6) return p + (q - p) * 6 * t;
    if (t < 1 / 2) return q;
    if (t < 2 / 3) return p + (q - p) * (2 / 3 - t) * 6;
    return p;
  };
  return [channel(h + 1 / 3), channel(h), channel(h - 1 / 3)];
}

export function sceneParams(v: VisualParams): SceneParams {
  return {
    color: hslToRgb(v.hue, v.saturation, v.lightness),
    emissiveIntensity: v.sharpnessGlow,
    scale: v.scale,
    roughness: v.roughness,
    displacementAmplitude: v.displacement * DISPLACEMENT_GAIN,
    noiseFrequency: NOISE_FREQ_MIN + (NOISE_FREQ_MAX - NOISE_FREQ_MIN) * v.granularity,
  };
}

export interface HudInfo {
  note: string;
  clarity: string;
  features: string;
}

export function hudInfo(record: FrameRecord): HudInfo {
  const p = record.pitch;
  let note = "unvoiced";
  let clarity = "";
  if (p) {
    clarity = `clarity ${p.clarity.toFixed(2)}`;
    if (p.voiced) {
      note = `${NOTE_NAMES[p.noteClass]}${p.octave} (${p.frequency.toFixed(1)} Hz, ${p.cents >= 0 ? "+" : ""}${p.cents.toFixed(1)}c)`;
    }
  } else if (record.visual.voiced) {
    note = "voiced";
  }
  const f = record.features;
  const features = f
    ? `energy ${f.energy.toFixed(1)}  flatness ${f.spectralFlatness.toFixed(3)}  ` +
      `centroid ${f.spectralCentroid.toFixed(0)} Hz  spread ${f.perceptualSpread.toFixed(3)}  ` +
      `sharpness ${f.perceptualSharpness.toFixed(2)}  kurtosis ${f.spectralKurtosis.toFixed(1)}`
    : "";
  return { note, clarity, features };
}
