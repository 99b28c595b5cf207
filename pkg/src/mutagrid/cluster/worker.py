"""Worker daemon: executes subtasks assigned by a master over the wire.

One master connection is served at a time.  Broadcast artifacts are cached
on disk by content hash, so repeat jobs against the same program skip the
transfer.  A background thread emits heartbeats while a master is
connected, including during long subtask execution.
"""

import hashlib
import logging
import os
import socket
import threading
import time

from .. import partitioning
from ..costmodel import CostModel, DEFAULT_COST_MODEL
from ..minilang.errors import MiniLangError
from ..minilang.interp import DEFAULT_STEP_LIMIT, default_backend
from ..minilang.program import SourceProgram
from . import protocol

log = logging.getLogger("mutagrid.worker")


class WorkerServer:
    def __init__(self, host: str, port: int, cache_dir: str,
                 heartbeat_interval: float = 1.0):
        self.host = host
        self.port = port
        self.cache_dir = cache_dir
        self.heartbeat_interval = heartbeat_interval
        self.programs = {}  # content hash -> SourceProgram
        self._sock = None
        self._send_lock = threading.Lock()
        os.makedirs(cache_dir, exist_ok=True)
        self._load_cache()

    def _load_cache(self):
        for name in sorted(os.listdir(self.cache_dir)):
            if not name.endswith(".mini"):
                continue
            path = os.path.join(self.cache_dir, name)
            try:
                with open(path, encoding="utf-8") as fh:
                    program = SourceProgram.from_text(fh.read())
                self.programs[program.content_hash] = program
            except (OSError, MiniLangError) as exc:
                log.warning("ignoring unreadable cache entry %s: %s", path, exc)

    def bind(self) -> tuple:
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((self.host, self.port))
        self._sock.listen(2)
        self.host, self.port = self._sock.getsockname()[:2]
        return self.host, self.port

    def serve_forever(self) -> int:
        """Accept masters until one sends SHUTDOWN; returns the exit code."""
        if self._sock is None:
            self.bind()
        log.info("worker listening on %s:%d", self.host, self.port)
        print(f"mutagrid-worker listening on {self.host}:{self.port}",
              flush=True)
        while True:
            conn, peer = self._sock.accept()
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            log.info("master connected from %s", peer)
            try:
                if self._serve_connection(conn):
                    self._sock.close()
                    return 0
            except protocol.ProtocolError as exc:
                log.warning("protocol error, dropping master: %s", exc)
            except OSError as exc:
                # masters may vanish abruptly (reset); keep serving
                log.info("master connection lost: %s", exc)
            finally:
                conn.close()

    def _serve_connection(self, conn) -> bool:
        """Handle one master; True when a SHUTDOWN was received."""
        stop = threading.Event()
        beater = threading.Thread(target=self._heartbeat_loop,
                                  args=(conn, stop), daemon=True)
        beater.start()
        try:
            while True:
                message = protocol.recv_message(conn)
                if message is None:
                    return False
                msg_type, payload = message
                if msg_type == protocol.SHUTDOWN:
                    self._reply(conn, protocol.SHUTDOWN, {"status": "ok"})
                    return True
                handler = {
                    protocol.HELLO: self._on_hello,
                    protocol.BROADCAST_ARTIFACT: self._on_broadcast,
                    protocol.ASSIGN_SUBTASK: self._on_assign,
                    protocol.HEARTBEAT: lambda c, p: None,
                    protocol.PARTIAL_RESULT: lambda c, p: None,
                }[msg_type]
                handler(conn, payload)
        finally:
            stop.set()

    def _heartbeat_loop(self, conn, stop):
        while not stop.wait(self.heartbeat_interval):
            try:
                protocol.send_message(conn, protocol.HEARTBEAT,
                                      {"time": time.time()},
                                      lock=self._send_lock)
            except OSError:
                return

    def _reply(self, conn, msg_type, payload):
        protocol.send_message(conn, msg_type, payload, lock=self._send_lock)

    def _on_hello(self, conn, payload):
        self._reply(conn, protocol.HELLO, {
            "status": "ok", "worker": f"{self.host}:{self.port}",
            "backend": default_backend(),
            "cached_artifacts": sorted(self.programs)})

    def _on_broadcast(self, conn, payload):
        text = payload["text"]
        declared = payload["hash"]
        if declared in self.programs:
            self._reply(conn, protocol.BROADCAST_ARTIFACT,
                        {"status": "ok", "hash": declared, "cached": True})
            return
        if hashlib.sha256(text.encode("utf-8")).hexdigest() != declared:
            self._reply(conn, protocol.BROADCAST_ARTIFACT,
                        {"status": "error",
                         "error": "artifact hash mismatch"})
            return
        try:
            program = SourceProgram.from_text(text)
        except MiniLangError as exc:
            self._reply(conn, protocol.BROADCAST_ARTIFACT,
                        {"status": "error", "error": f"unparseable artifact: {exc}"})
            return
        self.programs[program.content_hash] = program
        path = os.path.join(self.cache_dir, f"{program.content_hash}.mini")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        self._reply(conn, protocol.BROADCAST_ARTIFACT,
                    {"status": "ok", "hash": program.content_hash,
                     "cached": False})

    def _on_assign(self, conn, payload):
        artifact_hash = payload.get("artifact_hash")
        program = self.programs.get(artifact_hash)
        partition_id = payload.get("partition", {}).get("partition_id")
        if program is None:
            self._reply(conn, protocol.PARTIAL_RESULT,
                        {"status": "error", "partition_id": partition_id,
                         "error": "artifact missing"})
            return
        try:
            partition = partitioning.Partition.from_json(payload["partition"],
                                                         program)
            cost_model = CostModel.from_json(payload.get("cost_model") or
                                             DEFAULT_COST_MODEL.to_json())
            partial = partitioning.run_subtask(
                partition, program,
                step_limit=payload.get("step_limit", DEFAULT_STEP_LIMIT),
                cost_model=cost_model,
                skip_redundant_phases=payload.get("skip_redundant_phases", False),
                worker_id=payload.get("worker_id", -1))
        except (MiniLangError, ValueError, KeyError) as exc:
            self._reply(conn, protocol.PARTIAL_RESULT,
                        {"status": "error", "partition_id": partition_id,
                         "error": str(exc)})
            return
        self._reply(conn, protocol.PARTIAL_RESULT,
                    {"status": "ok", "partial": partial.to_json()})


def worker_serve(listen: str, cache_dir: str,
                 heartbeat_interval: float = 1.0) -> int:
    """Run a worker until SHUTDOWN; `listen` is "host:port" (port 0 = any)."""
    host, _, port = listen.rpartition(":")
    server = WorkerServer(host or "127.0.0.1", int(port), cache_dir,
                          heartbeat_interval)
    return server.serve_forever()
