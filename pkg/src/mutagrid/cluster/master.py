"""Master side of the real runtime: broadcast, assignment, fault handling.

One coordinator thread owns the assignment table; a reader thread per
worker feeds it messages.  Workers pull one partition at a time.  When a
worker dies (socket EOF, error reply, or heartbeat silence) its in-flight
partitions go back to the queue head; late duplicate partials are dropped
first-result-wins.
"""

import logging
import queue
import socket
import subprocess
import sys
import threading
import time
from collections import deque
from contextlib import contextmanager

from .. import partitioning
from ..costmodel import CostModel, DEFAULT_COST_MODEL
from ..minilang.program import SourceProgram
from ..mutation import mutant_catalog
from . import protocol
from .sim import ClusterSpec

log = logging.getLogger("mutagrid.master")


class RealClusterError(Exception):
    pass


class AssignmentTable:
    """Pending/in-flight/done bookkeeping for one job's partitions."""

    def __init__(self, partition_ids):
        self.pending = deque(partition_ids)
        self.in_flight = {}   # worker_id -> set of partition ids
        self.done = {}        # partition_id -> PartialResult

    def next_for(self, worker_id) -> int | None:
        if not self.pending:
            return None
        partition_id = self.pending.popleft()
        self.in_flight.setdefault(worker_id, set()).add(partition_id)
        return partition_id

    def complete(self, partition_id, partial) -> bool:
        """Record a partial; False for a late duplicate (first result wins)."""
        if partition_id in self.done:
            return False
        self.done[partition_id] = partial
        for assigned in self.in_flight.values():
            assigned.discard(partition_id)
        return True

    def reassign_on_failure(self, worker_id) -> list:
        """Return the failed worker's in-flight partitions to the queue head."""
        lost = sorted(self.in_flight.pop(worker_id, set()))
        for partition_id in reversed(lost):
            self.pending.appendleft(partition_id)
        return lost

    def unfinished(self) -> list:
        in_flight = set().union(*self.in_flight.values()) if self.in_flight else set()
        return sorted(set(self.pending) | in_flight)

    def all_done(self, total: int) -> bool:
        return len(self.done) == total


def reassign_on_failure(table: AssignmentTable, failed_worker) -> AssignmentTable:
    """Spec-named wrapper; mutates and returns the table."""
    table.reassign_on_failure(failed_worker)
    return table


class _WorkerConn:
    def __init__(self, worker_id, endpoint, timeout):
        self.worker_id = worker_id
        self.endpoint = endpoint
        self.sock = socket.create_connection(endpoint, timeout=timeout)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.sock.settimeout(None)
        self.alive = True
        self.last_seen = time.monotonic()

    def send(self, msg_type, payload):
        protocol.send_message(self.sock, msg_type, payload)

    def close(self):
        self.alive = False
        try:
            self.sock.close()
        except OSError:
            pass


def _reader(conn: _WorkerConn, events: queue.Queue):
    try:
        while True:
            message = protocol.recv_message(conn.sock)
            if message is None:
                events.put((conn.worker_id, "dead", "connection closed"))
                return
            events.put((conn.worker_id, "msg", message))
    except (OSError, protocol.ProtocolError) as exc:
        events.put((conn.worker_id, "dead", str(exc)))


def run_real_job(program: SourceProgram, params: partitioning.TaskParameters,
                 strategy: partitioning.DistributionStrategy, spec: ClusterSpec,
                 skip_redundant_phases: bool = False,
                 heartbeat_timeout: float = 5.0,
                 job_timeout: float | None = None,
                 connect_timeout: float = 5.0,
                 shutdown_workers: bool = False,
                 progress_callback=None) -> partitioning.CombinedResult:
    """Execute a job on already-running workers; returns the combined result.

    total_duration is wall-clock seconds.  The verdict map is identical to
    the serial and simulated engines for the same inputs.
    """
    if spec.mode != "real":
        raise ValueError("run_real_job requires a real-mode ClusterSpec")
    if not spec.worker_endpoints:
        raise RealClusterError("no worker endpoints configured")
    cost_model = spec.cost_model or DEFAULT_COST_MODEL
    partitions = partitioning.make_partitions(params, strategy, program)
    by_id = {p.partition_id: p for p in partitions}
    started = time.monotonic()
    deadline = None if job_timeout is None else started + job_timeout

    def notify(event, **info):
        if progress_callback is not None:
            progress_callback(event, info)

    events: queue.Queue = queue.Queue()
    workers = {}
    try:
        for worker_id, endpoint in enumerate(spec.worker_endpoints):
            try:
                conn = _WorkerConn(worker_id, tuple(endpoint), connect_timeout)
            except OSError as exc:
                raise RealClusterError(
                    f"cannot connect to worker {endpoint}: {exc}") from exc
            conn.send(protocol.HELLO, {"master": "mutagrid"})
            conn.send(protocol.BROADCAST_ARTIFACT, {
                "hash": program.content_hash,
                "text": program.artifact_bytes.decode("utf-8")})
            workers[worker_id] = conn
            threading.Thread(target=_reader, args=(conn, events),
                             daemon=True).start()

        table = AssignmentTable([p.partition_id for p in partitions])
        idle = set()  # workers that acked the broadcast and have no subtask

        def assign(conn):
            partition_id = table.next_for(conn.worker_id)
            if partition_id is None:
                idle.add(conn.worker_id)
                return
            idle.discard(conn.worker_id)
            partition = by_id[partition_id]
            try:
                conn.send(protocol.ASSIGN_SUBTASK, {
                    "artifact_hash": program.content_hash,
                    "partition": partition.to_json(program.content_hash),
                    "step_limit": params.step_limit,
                    "cost_model": cost_model.to_json(),
                    "skip_redundant_phases": skip_redundant_phases,
                    "worker_id": conn.worker_id})
                notify("assigned", worker=conn.worker_id, partition=partition_id)
            except OSError:
                fail(conn, "send failed")

        def fail(conn, reason):
            if not conn.alive:
                return
            log.warning("worker %d failed: %s", conn.worker_id, reason)
            conn.close()
            idle.discard(conn.worker_id)
            lost = table.reassign_on_failure(conn.worker_id)
            notify("worker-failed", worker=conn.worker_id, requeued=lost)
            if not any(c.alive for c in workers.values()):
                raise RealClusterError(
                    "all workers failed; unfinished partitions: "
                    f"{table.unfinished()}")
            for other in workers.values():
                if other.alive and other.worker_id in list(idle):
                    assign(other)

        while not table.all_done(len(partitions)):
            if deadline is not None and time.monotonic() > deadline:
                raise RealClusterError(
                    f"job timed out; unfinished partitions: {table.unfinished()}")
            now = time.monotonic()
            for conn in list(workers.values()):
                if conn.alive and now - conn.last_seen > heartbeat_timeout:
                    fail(conn, f"no heartbeat for {heartbeat_timeout:.1f}s")
            try:
                worker_id, kind, data = events.get(timeout=0.05)
            except queue.Empty:
                continue
            conn = workers[worker_id]
            if kind == "dead":
                fail(conn, data)
                continue
            conn.last_seen = time.monotonic()
            msg_type, payload = data
            if msg_type == protocol.HEARTBEAT:
                continue
            if msg_type == protocol.HELLO:
                continue
            if msg_type == protocol.BROADCAST_ARTIFACT:
                if payload.get("status") != "ok":
                    fail(conn, f"broadcast rejected: {payload.get('error')}")
                    continue
                assign(conn)
                continue
            if msg_type == protocol.PARTIAL_RESULT:
                if payload.get("status") != "ok":
                    fail(conn, f"subtask rejected: {payload.get('error')}")
                    continue
                partial = partitioning.PartialResult.from_json(payload["partial"])
                partial.worker_id = worker_id
                accepted = table.complete(partial.partition_id, partial)
                notify("partial", worker=worker_id,
                       partition=partial.partition_id, accepted=accepted)
                if conn.alive:
                    assign(conn)
                continue
            raise protocol.ProtocolError(
                f"unexpected {msg_type} from worker {worker_id}")

        combined = partitioning.reduce_partials(table.done.values(),
                                                mutant_catalog(program))
        combined.total_duration = time.monotonic() - started
        return combined
    finally:
        for conn in workers.values():
            if shutdown_workers and conn.alive:
                try:
                    conn.send(protocol.SHUTDOWN, {})
                except OSError:
                    pass
            conn.close()


@contextmanager
def spawn_local_workers(count: int, cache_root: str,
                        heartbeat_interval: float = 0.2):
    """Start `count` workers on ephemeral localhost ports; yields
    (endpoints, processes).  Workers are terminated on exit."""
    procs = []
    endpoints = []
    try:
        for i in range(count):
            proc = subprocess.Popen(
                [sys.executable, "-m", "mutagrid.cli", "worker",
                 "--listen", "127.0.0.1:0",
                 "--cache", f"{cache_root}/worker{i}",
                 "--heartbeat-interval", str(heartbeat_interval)],
                stdout=subprocess.PIPE, stderr=subprocess.DEVNULL, text=True)
            procs.append(proc)
        for proc in procs:
            line = proc.stdout.readline()
            marker = "listening on "
            if marker not in line:
                raise RealClusterError(f"worker failed to start: {line!r}")
            host, _, port = line.strip().rpartition(marker)[-1].rpartition(":")
            endpoints.append((host, int(port)))
        yield endpoints, procs
    finally:
        for proc in procs:
            if proc.poll() is None:
                proc.terminate()
        for proc in procs:
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
