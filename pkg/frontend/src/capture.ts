/**
 * Microphone capture: getUserMedia plus an AudioWorklet that posts raw
 * Float32 chunks. Capture never blocks on the consumer; chunks are handed
 * straight to the engine source.
 */

export class CaptureError extends Error {
  constructor(
    message: string,
    readonly reason: "permission-denied" | "no-device" | "unavailable",
  ) {
    super(message);
  }
}

export interface Capture {
  readonly sampleRate: number;
  onChunk(listener: (chunk: Float32Array) => void): void;
  onLost(listener: () => void): void;
  stop(): void;
}

export async function startMicrophoneCapture(
  workletUrl = "./dist/capture-worklet.js",
): Promise<Capture> {
  if (!navigator.mediaDevices?.getUserMedia) {
    throw new CaptureError("audio capture is not available in this browser", "unavailable");
  }
  let stream: MediaStream;
  try {
    stream = await navigator.mediaDevices.getUserMedia({ audio: true, video: false });
  } catch (err) {
    const name = (err as DOMException).name;
    if (name === "NotAllowedError" || name === "SecurityError") {
      throw new CaptureError("microphone permission denied", "permission-denied");
    }
    if (name === "NotFoundError") {
      throw new CaptureError("no audio input device found", "no-device");
    }
    throw new CaptureError(`capture failed: ${(err as Error).message}`, "unavailable");
  }

  const context = new AudioContext();
  await context.audioWorklet.addModule(workletUrl);
  const source = context.createMediaStreamSource(stream);
  const node = new AudioWorkletNode(context, "pcm-capture");
  source.connect(node);

  let chunkListener: ((chunk: Float32Array) => void) | null = null;
  let lostListener: (() => void) | null = null;
  node.port.onmessage = (event: MessageEvent<Float32Array>) => {
    chunkListener?.(event.data);
  };
  for (const track of stream.getAudioTracks()) {
    track.addEventListener("ended", () => lostListener?.());
  }

  return {
    sampleRate: context.sampleRate,
    onChunk(listener) {
      chunkListener = listener;
    },
    onLost(listener) {
      lostListener = listener;
    },
    stop() {
      node.disconnect();
      source.disconnect();
      stream.getTracks().forEach((t) => t.stop());
      void context.close();
    },
  };
}
