"""A line-delimited JSON session server.

Each client connection gets its own engine.  The client sends one
JSON command per line; the server answers with `{"ok": ...}` or
`{"error": ...}` and streams every session event as it happens as
`{"event": {...}}`.  Commands:

    {"command": "submit", "text": "..."}
    {"command": "set-mode", "mode": "performance" | "daydreaming"}
    {"command": "run", "cycles": 3}            # or "until-quiescent"
    {"command": "interrupt"}
    {"command": "snapshot"}

The protocol is synchronous per connection: events caused by a
command are written before that command's reply.
"""

from __future__ import annotations

import json
import socketserver
import threading
from typing import Callable, Optional

from .domain import Domain, Persona
from .engine import Engine
from .episodes import EpisodicMemory

DEFAULT_PORT = 4557


class SessionServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(
        self,
        address: tuple[str, int],
        make_engine: Callable[[], Engine],
    ) -> None:
        super().__init__(address, _SessionHandler)
        self.make_engine = make_engine


class _SessionHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: SessionServer = self.server  # type: ignore[assignment]
        engine = server.make_engine()
        lock = threading.Lock()

        def sink(event) -> None:
            payload = json.dumps({"event": event.to_json()}) + "\n"
            self.wfile.write(payload.encode("utf-8"))

        engine.sinks.append(sink)
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError as exc:
                self._reply({"error": f"bad json: {exc}"})
                continue
            with lock:
                reply = self._dispatch(engine, message)
            self._reply(reply)

    def _dispatch(self, engine: Engine, message: dict) -> dict:
        command = message.get("command")
        try:
            if command == "submit":
                engine.submit(str(message["text"]))
                return {"ok": "queued"}
            if command == "set-mode":
                engine.set_mode(str(message["mode"]))
                return {"ok": engine.mode}
            if command == "run":
                cycles = message.get("cycles", 1)
                if cycles != "until-quiescent":
                    cycles = int(cycles)
                ran = engine.run(cycles)
                return {"ok": ran}
            if command == "interrupt":
                engine.interrupt()
                return {"ok": "interrupted"}
            if command == "snapshot":
                return {"ok": engine.snapshot()}
            return {"error": f"unknown command {command!r}"}
        except Exception as exc:  # surface engine errors to the client
            return {"error": str(exc)}

    def _reply(self, payload: dict) -> None:
        self.wfile.write((json.dumps(payload) + "\n").encode("utf-8"))


def serve(
    domain: Domain,
    persona: Persona,
    memory_path: Optional[str] = None,
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
    seed: Optional[int] = None,
) -> SessionServer:
    """Build a server; call serve_forever() on the result to run it."""

    def make_engine() -> Engine:
        memory = EpisodicMemory.load(memory_path) if memory_path else None
        return Engine(domain, persona, memory=memory, seed=seed)

    return SessionServer((host, port), make_engine)
