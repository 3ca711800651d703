"""WebSocket binding for the session engine.

One pump task owns the engine and fans immutable messages out to per-client
queues; each WebSocket connection gets a hello on accept, then frames/traces
as they are produced, and feeds control messages back to the engine queue.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from . import protocol
from .session import SessionEngine

log = logging.getLogger("scalpstream.server")

CLIENT_QUEUE_SIZE = 256


class Broadcaster:
    """Fan-out of engine messages to connected clients (drop-oldest on lag)."""

    def __init__(self):
        self.clients: set[asyncio.Queue] = set()

    def register(self) -> asyncio.Queue:
        q = asyncio.Queue(maxsize=CLIENT_QUEUE_SIZE)
        self.clients.add(q)
        return q

    def unregister(self, q: asyncio.Queue) -> None:
        self.clients.discard(q)

    def publish(self, text: str) -> None:
        for q in list(self.clients):
            if q.full():
                with contextlib.suppress(asyncio.QueueEmpty):
                    q.get_nowait()
            q.put_nowait(text)


async def run_engine(engine: SessionEngine, broadcaster: Broadcaster) -> None:
    """Pace the engine against a monotonic clock (speed 0 = flat out)."""
    speed = engine.config.speed
    start = time.monotonic()
    block_no = 0
    while True:
        msgs = engine.step()
        if msgs is None:
            break
        for m in msgs:
            broadcaster.publish(protocol.dumps(m))
        block_no += 1
        if speed > 0:
            target = start + block_no * engine.block_duration / speed
            delay = target - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)
        else:
            await asyncio.sleep(0)
    log.info("session source exhausted after %d blocks", block_no)


def create_app(engine: SessionEngine, ui_dir: str | Path | None = None) -> FastAPI:
    broadcaster = Broadcaster()

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        pump = asyncio.create_task(run_engine(engine, broadcaster))
        yield
        pump.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await pump

    app = FastAPI(lifespan=lifespan)
    app.state.engine = engine
    app.state.broadcaster = broadcaster

    @app.get("/health")
    async def health():
        return {"status": "ok", "calibration": engine.calibration,
                "pipeline": engine.active_kind}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        await ws.send_text(protocol.dumps(engine.hello()))
        q = broadcaster.register()

        async def sender():
            while True:
                await ws.send_text(await q.get())

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await ws.receive_text()
                engine.submit_control(raw)
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await send_task
            broadcaster.unregister(q)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def serve(engine: SessionEngine, host: str = "127.0.0.1", port: int = 8799,
          ui_dir=None) -> None:
    """Bind, print the actual endpoint, and serve until interrupted."""
    import socket

    import uvicorn

    app = create_app(engine, ui_dir=ui_dir)
    sock = socket.create_server((host, port))
    actual = sock.getsockname()[1]
    print(f"listening on ws://{host}:{actual}/ws", flush=True)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    asyncio.run(server.serve(sockets=[sock]))
