"""Deterministic virtual-time cluster simulator.

Greedy list scheduling: partitions are queued in creation order and each
of the P workers pulls the next one the moment it goes idle (ties broken
by worker id).  A worker's first pull additionally pays the one-time
artifact broadcast.  Everything is integer virtual time, so identical
inputs give byte-identical traces.
"""

import csv
import heapq
import io
from dataclasses import dataclass, field

from .. import partitioning
from ..costmodel import CostModel, DEFAULT_COST_MODEL
from ..minilang.program import SourceProgram
from ..mutation import mutant_catalog


@dataclass
class ClusterSpec:
    workers: int
    mode: str = "simulated"  # "simulated" | "real"
    cost_model: CostModel | None = None
    worker_endpoints: list | None = None  # [(host, port)], real mode

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("cluster needs at least one worker")
        if self.mode not in ("simulated", "real"):
            raise ValueError(f"unknown cluster mode {self.mode!r}")
        if self.mode == "simulated" and self.cost_model is None:
            self.cost_model = DEFAULT_COST_MODEL


@dataclass
class ScheduleTrace:
    """Per-worker timelines of (partition_id, start, end) in virtual time."""

    workers: list
    makespan: int

    def busy_time(self, worker: int) -> int:
        return sum(end - start for _, start, end in self.workers[worker])

    def to_json(self) -> dict:
        return {"makespan": self.makespan,
                "workers": [[list(entry) for entry in timeline]
                            for timeline in self.workers]}

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["worker", "partition", "start", "end"])
        for worker, timeline in enumerate(self.workers):
            for partition_id, start, end in timeline:
                writer.writerow([worker, partition_id, start, end])
        return out.getvalue()


def schedule(costs: list, workers: int, broadcast: int) -> ScheduleTrace:
    """List-schedule partition costs over `workers` identical workers.

    ``costs[i]`` is the full cost of partition i (startup + phases); the
    broadcast charge is added once per worker, on its first pull.
    """
    heap = [(0, w) for w in range(workers)]
    heapq.heapify(heap)
    timelines = [[] for _ in range(workers)]
    seen = [False] * workers
    for partition_id, cost in enumerate(costs):
        free_at, worker = heapq.heappop(heap)
        start = free_at
        total = cost + (0 if seen[worker] else broadcast)
        seen[worker] = True
        end = start + total
        timelines[worker].append((partition_id, start, end))
        heapq.heappush(heap, (end, worker))
    makespan = max((t[-1][2] for t in timelines if t), default=0)
    return ScheduleTrace(workers=timelines, makespan=makespan)


def simulate_job(program: SourceProgram, params: partitioning.TaskParameters,
                 strategy: partitioning.DistributionStrategy, spec: ClusterSpec,
                 skip_redundant_phases: bool = False,
                 execution_cache: dict | None = None, backend=None):
    """Run a partitioned job under the virtual clock.

    Returns (CombinedResult, ScheduleTrace); the combined result's
    total_duration is the makespan.  A shared ``execution_cache`` lets a
    benchmark sweep strategies and worker counts while executing each
    mutant once; verdicts are identical either way.
    """
    if spec.mode != "simulated":
        raise ValueError("simulate_job requires a simulated ClusterSpec")
    cost_model = spec.cost_model or DEFAULT_COST_MODEL
    partitions = partitioning.make_partitions(params, strategy, program)
    if execution_cache is None:
        execution_cache = {}

    partials = []
    costs = []
    for partition in partitions:
        partial = partitioning.run_subtask(
            partition, program, step_limit=params.step_limit,
            cost_model=cost_model, skip_redundant_phases=skip_redundant_phases,
            execution_cache=execution_cache, backend=backend)
        partials.append(partial)
        costs.append(partitioning.subtask_cost(partial, cost_model))

    trace = schedule(costs, spec.workers, cost_model.broadcast_per_worker)
    for timeline_worker, timeline in enumerate(trace.workers):
        for partition_id, _, _ in timeline:
            partials[partition_id].worker_id = timeline_worker

    combined = partitioning.reduce_partials(partials, mutant_catalog(program))
    combined.total_duration = trace.makespan
    return combined, trace


def run_serial(program: SourceProgram, params: partitioning.TaskParameters,
               backend=None) -> dict:
    """Serial oracle: execute the whole task unpartitioned; verdict map."""
    from .. import mutation

    statuses = {}
    for mutant in mutation.generate_mutants(program, params.classes,
                                            params.operators):
        status = mutation.execute_mutant(program, mutant, params.tests,
                                         params.step_limit, backend=backend)
        statuses[mutant.mutant_id] = status.verdict
    return statuses
