#!/usr/bin/env python3
"""WebSocket bridge between the browser UI and the musicviz engine.

The browser cannot run the Python engine in-process, so live capture
forwards PCM here and this process calls Engine.push, answering with
frame-stream protocol lines (header first, then one line per frame).

Wire contract per connection:
  client -> text  {"type": "hello", "sampleRate": 48000}
  client -> text  {"type": "configure", "config": "<key = value doc>"}
  client -> binary little-endian float32 PCM chunk
  server -> text  protocol v1 lines (a fresh header after hello/configure)

Run: python3 engine_bridge.py [--port 8765]
"""

import argparse
import asyncio
import json
import logging

import numpy as np
import websockets

from musicviz import Engine, EngineConfig, load_mapping_config
from musicviz.protocol import serialize_header, serialize_record

log = logging.getLogger("engine_bridge")


async def handle(ws):
    engine = None
    log.info("client connected")
    async for message in ws:
        if isinstance(message, bytes):
            if engine is None:
                continue  # PCM before hello; nothing to feed yet
            chunk = np.frombuffer(message, dtype="<f4").astype(np.float64)
            try:
                records = engine.push(chunk)
            except ValueError as exc:
                log.warning("rejected chunk: %s", exc)
                continue
            if records:
                await ws.send("\n".join(serialize_record(r) for r in records))
            continue

        request = json.loads(message)
        if request.get("type") == "hello":
            engine = Engine(int(request["sampleRate"]), EngineConfig())
            await ws.send(serialize_header(engine.header))
        elif request.get("type") == "configure":
            if engine is None:
                continue
            config = EngineConfig(
                frame_size=engine.config.frame_size,
                hop_size=engine.config.hop_size,
                mapping=load_mapping_config(request["config"]),
            )
            engine = Engine(engine.sample_rate, config)
            await ws.send(serialize_header(engine.header))
        else:
            log.warning("unknown message type: %r", request.get("type"))
    log.info("client disconnected")


async def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--host", default="localhost")
    parser.add_argument("--port", type=int, default=8765)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    async with websockets.serve(handle, args.host, args.port):
        log.info("listening on ws://%s:%d", args.host, args.port)
        await asyncio.Future()


if __name__ == "__main__":
    asyncio.run(main())
