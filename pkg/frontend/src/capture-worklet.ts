/**
 * AudioWorklet processor: copies each render quantum of the first input
 * channel to the main thread. Compiled standalone; loaded with
 * audioWorklet.addModule().
 */

declare const AudioWorkletProcessor: {
  prototype: { port: MessagePort };
  new (): { port: MessagePort };
};
declare function registerProcessor(name: string, ctor: unknown): void;

class PcmCaptureProcessor extends AudioWorkletProcessor {
  process(inputs: Float32Array[][]): boolean {
    const channel = inputs[0]?.[0];
    if (channel && channel.length) {
      const copy = new Float32Array(channel.length);
      copy.set(channel);
      this.port.postMessage(copy, [copy.buffer]);
    }
    return true;
  }
}

registerProcessor("pcm-capture", PcmCaptureProcessor);

export {};
