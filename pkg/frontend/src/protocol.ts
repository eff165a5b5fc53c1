/**
 * Reader for the musicviz frame-stream protocol (v1).
 *
 * One JSON object per line: a header first, then frame records with
 * strictly increasing frameIndex. The UI only ever parses engine output;
 * exports re-emit the original lines verbatim, so there is no serializer
 * here and no chance of format drift.
 */

export const PROTOCOL_VERSION = 1;

export class ProtocolError extends Error {}
export class VersionError extends ProtocolError {}
export class SchemaError extends ProtocolError {}
export class ParseError extends ProtocolError {}

export interface MappingConfig {
  palette: number[];
  saturationLow: number;
  saturationHigh: number;
  scaleMin: number;
  scaleMax: number;
  energyFloorRms: number;
  hueShiftRange: number;
  alphaColor: number;
  alphaScale: number;
  alphaTexture: number;
  roughnessGamma: number;
  invertRoughness: boolean;
  peakDecay: number;
}

export interface SessionHeader {
  protocolVersion: number;
  sampleRate: number;
  frameSize: number;
  hopSize: number;
  createdUtc: string;
  mapping: MappingConfig;
}

export interface VisualParams {
  hue: number;
  saturation: number;
  lightness: number;
  scale: number;
  roughness: number;
  sharpnessGlow: number;
  granularity: number;
  displacement: number;
  voiced: boolean;
}

export interface FeatureBlock {
  energy: number;
  rms: number;
  spectralCentroid: number;
  spectralFlatness: number;
  spectralKurtosis: number;
  specificLoudness: number[];
  loudnessTotal: number;
  perceptualSpread: number;
  perceptualSharpness: number;
}

export type PitchBlock =
  | {
      voiced: true;
      clarity: number;
      frequency: number;
      midiFloat: number;
      midiNote: number;
      noteClass: number;
      octave: number;
      cents: number;
    }
  | { voiced: false; clarity: number };

export interface FrameRecord {
  frameIndex: number;
  timestamp: number;
  visual: VisualParams;
  features?: FeatureBlock;
  pitch?: PitchBlock;
}

export const NOTE_NAMES = [
  "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
] as const;

function parseObject(line: string): Record<string, unknown> {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch (err) {
    throw new ParseError(`invalid JSON: ${(err as Error).message}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ParseError("expected a JSON object");
  }
  return obj as Record<string, unknown>;
}

function requireKey(obj: Record<string, unknown>, key: string, where: string): unknown {
  if (!(key in obj)) {
    throw new SchemaError(`missing required key '${key}' in ${where}`);
  }
  return obj[key];
}

function requireNumber(obj: Record<string, unknown>, key: string, where: string): number {
  const value = requireKey(obj, key, where);
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new SchemaError(`key '${key}' in ${where} must be a finite number`);
  }
  return value;
}

function requireBoolean(obj: Record<string, unknown>, key: string, where: string): boolean {
  const value = requireKey(obj, key, where);
  if (typeof value !== "boolean") {
    throw new SchemaError(`key '${key}' in ${where} must be a boolean`);
  }
  return value;
}

function requireObject(
  obj: Record<string, unknown>, key: string, where: string,
): Record<string, unknown> {
  const value = requireKey(obj, key, where);
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new SchemaError(`key '${key}' in ${where} must be an object`);
  }
  return value as Record<string, unknown>;
}

export function parseHeader(line: string): SessionHeader {
  const obj = parseObject(line);
  if (obj.type !== "header") {
    throw new SchemaError("expected a header object (type 'header')");
  }
  const version = requireKey(obj, "protocolVersion", "header");
  if (version !== PROTOCOL_VERSION) {
    throw new VersionError(
      `unknown protocolVersion ${JSON.stringify(version)} (expected ${PROTOCOL_VERSION})`,
    );
  }
  const m = requireObject(obj, "mapping", "header");
  const palette = requireKey(m, "palette", "header.mapping");
  if (!Array.isArray(palette) || palette.length !== 12) {
    throw new SchemaError("key 'palette' in header.mapping must be a list of 12 hues");
  }
  return {
    protocolVersion: PROTOCOL_VERSION,
    sampleRate: requireNumber(obj, "sampleRate", "header"),
    frameSize: requireNumber(obj, "frameSize", "header"),
    hopSize: requireNumber(obj, "hopSize", "header"),
    createdUtc: String(requireKey(obj, "createdUtc", "header")),
    mapping: {
      palette: palette.map(Number),
      saturationLow: requireNumber(m, "saturationLow", "header.mapping"),
      saturationHigh: requireNumber(m, "saturationHigh", "header.mapping"),
      scaleMin: requireNumber(m, "scaleMin", "header.mapping"),
      scaleMax: requireNumber(m, "scaleMax", "header.mapping"),
      energyFloorRms: requireNumber(m, "energyFloorRms", "header.mapping"),
      hueShiftRange: requireNumber(m, "hueShiftRange", "header.mapping"),
      alphaColor: requireNumber(m, "alphaColor", "header.mapping"),
      alphaScale: requireNumber(m, "alphaScale", "header.mapping"),
      alphaTexture: requireNumber(m, "alphaTexture", "header.mapping"),
      roughnessGamma: requireNumber(m, "roughnessGamma", "header.mapping"),
      invertRoughness: requireBoolean(m, "invertRoughness", "header.mapping"),
      peakDecay: requireNumber(m, "peakDecay", "header.mapping"),
    },
  };
}

export function parseRecord(line: string): FrameRecord {
  const obj = parseObject(line);
  if (obj.type !== "frame") {
    throw new SchemaError("expected a frame object (type 'frame')");
  }
  const frameIndex = requireNumber(obj, "frameIndex", "frame");
  const timestamp = requireNumber(obj, "timestamp", "frame");
  const v = requireObject(obj, "visual", "frame");
  const record: FrameRecord = {
    frameIndex,
    timestamp,
    visual: {
      hue: requireNumber(v, "hue", "frame.visual"),
      saturation: requireNumber(v, "saturation", "frame.visual"),
      lightness: requireNumber(v, "lightness", "frame.visual"),
      scale: requireNumber(v, "scale", "frame.visual"),
      roughness: requireNumber(v, "roughness", "frame.visual"),
      sharpnessGlow: requireNumber(v, "sharpnessGlow", "frame.visual"),
      granularity: requireNumber(v, "granularity", "frame.visual"),
      displacement: requireNumber(v, "displacement", "frame.visual"),
      voiced: requireBoolean(v, "voiced", "frame.visual"),
    },
  };
  if ("features" in obj) {
    const f = requireObject(obj, "features", "frame");
    const loudness = requireKey(f, "specificLoudness", "frame.features");
    if (!Array.isArray(loudness) || loudness.length !== 24) {
      throw new SchemaError(
        "key 'specificLoudness' in frame.features must be a list of 24",
      );
    }
    record.features = {
      energy: requireNumber(f, "energy", "frame.features"),
      rms: requireNumber(f, "rms", "frame.features"),
      spectralCentroid: requireNumber(f, "spectralCentroid", "frame.features"),
      spectralFlatness: requireNumber(f, "spectralFlatness", "frame.features"),
      spectralKurtosis: requireNumber(f, "spectralKurtosis", "frame.features"),
      specificLoudness: loudness.map(Number),
      loudnessTotal: requireNumber(f, "loudnessTotal", "frame.features"),
      perceptualSpread: requireNumber(f, "perceptualSpread", "frame.features"),
      perceptualSharpness: requireNumber(f, "perceptualSharpness", "frame.features"),
    };
  }
  if ("pitch" in obj) {
    const p = requireObject(obj, "pitch", "frame");
    const voiced = requireBoolean(p, "voiced", "frame.pitch");
    const clarity = requireNumber(p, "clarity", "frame.pitch");
    record.pitch = voiced
      ? {
          voiced: true,
          clarity,
          frequency: requireNumber(p, "frequency", "frame.pitch"),
          midiFloat: requireNumber(p, "midiFloat", "frame.pitch"),
          midiNote: requireNumber(p, "midiNote", "frame.pitch"),
          noteClass: requireNumber(p, "noteClass", "frame.pitch"),
          octave: requireNumber(p, "octave", "frame.pitch"),
          cents: requireNumber(p, "cents", "frame.pitch"),
        }
      : { voiced: false, clarity };
  }
  return record;
}

export function parseLine(line: string): SessionHeader | FrameRecord {
  const obj = parseObject(line);
  const kind = requireKey(obj, "type", "stream object");
  if (kind === "header") return parseHeader(line);
  if (kind === "frame") return parseRecord(line);
  throw new SchemaError(`unknown object type ${JSON.stringify(kind)}`);
}

export interface ParsedStream {
  header: SessionHeader;
  headerLine: string;
  records: FrameRecord[];
  recordLines: string[];
}

/** Parse a whole stream document, enforcing header-first and monotone indices. */
export function readStream(text: string): ParsedStream {
  let header: SessionHeader | null = null;
  let headerLine = "";
  const records: FrameRecord[] = [];
  const recordLines: string[] = [];
  let lastIndex: number | null = null;
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim()) continue;
    let obj: SessionHeader | FrameRecord;
    try {
      obj = parseLine(line);
    } catch (err) {
      const e = err as ProtocolError;
      const wrapped = new (e.constructor as typeof ProtocolError)(
        `line ${i + 1}: ${e.message}`,
      );
      throw wrapped;
    }
    if ("protocolVersion" in obj) {
      if (header !== null) throw new ParseError(`line ${i + 1}: duplicate header`);
      header = obj;
      headerLine = line;
    } else {
      if (header === null) {
        throw new ParseError(`line ${i + 1}: frame record before header`);
      }
      if (lastIndex !== null && obj.frameIndex <= lastIndex) {
        throw new ParseError(
          `line ${i + 1}: frameIndex ${obj.frameIndex} does not increase (last was ${lastIndex})`,
        );
      }
      lastIndex = obj.frameIndex;
      records.push(obj);
      recordLines.push(line);
    }
  }
  if (header === null) throw new ParseError("stream has no header");
  return { header, headerLine, records, recordLines };
}

/**
 * The plain-text `key = value` mapping config document the CLI reads.
 * Keys are the snake_case MappingConfig field names.
 */
export function dumpMappingConfigDoc(cfg: MappingConfig): string {
  const lines = [
    `palette = ${cfg.palette.join(",")}`,
    `saturation_low = ${cfg.saturationLow}`,
    `saturation_high = ${cfg.saturationHigh}`,
    `scale_min = ${cfg.scaleMin}`,
    `scale_max = ${cfg.scaleMax}`,
    `energy_floor_rms = ${cfg.energyFloorRms}`,
    `hue_shift_range = ${cfg.hueShiftRange}`,
    `alpha_color = ${cfg.alphaColor}`,
    `alpha_scale = ${cfg.alphaScale}`,
    `alpha_texture = ${cfg.alphaTexture}`,
    `roughness_gamma = ${cfg.roughnessGamma}`,
    `invert_roughness = ${cfg.invertRoughness}`,
    `peak_decay = ${cfg.peakDecay}`,
  ];
  return lines.join("\n") + "\n";
}

const CONFIG_DOC_KEYS: Record<string, keyof MappingConfig> = {
  palette: "palette",
  saturation_low: "saturationLow",
  saturation_high: "saturationHigh",
  scale_min: "scaleMin",
  scale_max: "scaleMax",
  energy_floor_rms: "energyFloorRms",
  hue_shift_range: "hueShiftRange",
  alpha_color: "alphaColor",
  alpha_scale: "alphaScale",
  alpha_texture: "alphaTexture",
  roughness_gamma: "roughnessGamma",
  invert_roughness: "invertRoughness",
  peak_decay: "peakDecay",
};

/** Parse the same plain-text config document the CLI accepts. */
export function parseMappingConfigDoc(text: string): Partial<MappingConfig> {
  const out: Partial<MappingConfig> = {};
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const stripped = lines[i].split("#", 1)[0].trim();
    if (!stripped) continue;
    const eq = stripped.indexOf("=");
    if (eq < 0) throw new Error(`config line ${i + 1}: expected 'key = value'`);
    const key = stripped.slice(0, eq).trim();
    const rawValue = stripped.slice(eq + 1).trim();
    const field = CONFIG_DOC_KEYS[key];
    if (!field) throw new Error(`config line ${i + 1}: unknown key '${key}'`);
    if (field === "palette") {
      const hues = rawValue.split(",").map((h) => Number(h.trim()));
      if (hues.length !== 12 || hues.some((h) => !Number.isFinite(h))) {
        throw new Error(`config line ${i + 1}: palette must be 12 hues`);
      }
      out.palette = hues;
    } else if (field === "invertRoughness") {
      const lowered = rawValue.toLowerCase();
      if (lowered !== "true" && lowered !== "false") {
        throw new Error(`config line ${i + 1}: expected true or false`);
      }
      out.invertRoughness = lowered === "true";
    } else {
      const num = Number(rawValue);
      if (!Number.isFinite(num)) {
        throw new Error(`config line ${i + 1}: ${key} must be a number`);
      }
      out[field] = num;
    }
  }
  return out;
}
