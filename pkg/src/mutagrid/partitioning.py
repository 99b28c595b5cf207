"""Work partitioning and result aggregation (the map and reduce halves).

A task (C, T, O) is split into partitions by a distribution strategy; each
partition is executed as a subtask through the four phases (identifier
scan, dependency analysis, mutant generation, mutant execution) and yields
a partial result; partials reduce into one combined result independent of
arrival order.
"""

from dataclasses import dataclass, field

from . import mutation
from .costmodel import CostModel, DEFAULT_COST_MODEL
from .minilang.interp import DEFAULT_STEP_LIMIT
from .minilang.program import SourceProgram

BY_OPERATOR = "by-operator"
BY_CLASS = "by-class"
BY_MUTANT_EQUAL = "by-mutant-equal"
STRATEGY_KINDS = (BY_OPERATOR, BY_CLASS, BY_MUTANT_EQUAL)

PHASE_SCAN = "scan"
PHASE_DEPENDENCY = "dependency-analysis"
PHASE_GENERATION = "generation"
PHASE_EXECUTION = "execution"
PHASES = (PHASE_SCAN, PHASE_DEPENDENCY, PHASE_GENERATION, PHASE_EXECUTION)


@dataclass
class TaskParameters:
    """The (C, T, O) triple plus the execution step limit."""

    classes: list
    tests: list
    operators: list = field(default_factory=lambda: list(mutation.OPERATOR_IDS))
    step_limit: int = DEFAULT_STEP_LIMIT

    def validate(self):
        for label, values in (("classes", self.classes), ("tests", self.tests),
                              ("operators", self.operators)):
            if not values:
                raise ValueError(f"task parameter {label} must be non-empty")
            if len(set(values)) != len(values):
                raise ValueError(f"duplicate entries in task parameter {label}")
        unknown = set(self.operators) - set(mutation.OPERATOR_IDS)
        if unknown:
            raise ValueError(f"unknown operators: {sorted(unknown)}")
        if self.step_limit < 1:
            raise ValueError("step_limit must be >= 1")
        return self

    @classmethod
    def for_program(cls, program: SourceProgram, classes=None, tests=None,
                    operators=None, step_limit=DEFAULT_STEP_LIMIT):
        return cls(
            classes=list(classes) if classes is not None
            else [c.name for c in program.classes],
            tests=list(tests) if tests is not None
            else [program.test_name_by_id[t] for t in range(len(program.tests))],
            operators=list(operators) if operators is not None
            else list(mutation.OPERATOR_IDS),
            step_limit=step_limit).validate()

    def to_json(self) -> dict:
        return {"classes": self.classes, "tests": self.tests,
                "operators": self.operators, "step_limit": self.step_limit}


@dataclass
class DistributionStrategy:
    kind: str
    target_partitions: int | None = None  # by-mutant-equal only

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.kind == BY_MUTANT_EQUAL:
            if self.target_partitions is None or self.target_partitions < 1:
                raise ValueError("by-mutant-equal needs target_partitions >= 1")

    def to_json(self) -> dict:
        return {"kind": self.kind, "target_partitions": self.target_partitions}


@dataclass
class Partition:
    partition_id: int
    classes: list
    tests: list
    operators: list
    explicit_mutants: list | None = None  # Mutant objects, by-mutant-equal only

    def to_json(self, program_hash: str | None = None) -> dict:
        explicit = None
        if self.explicit_mutants is not None:
            explicit = mutation.encode_mutant_list(self.explicit_mutants,
                                                   program_hash or "")
        return {"partition_id": self.partition_id, "classes": self.classes,
                "tests": self.tests, "operators": self.operators,
                "explicit_mutants": explicit}

    @classmethod
    def from_json(cls, data: dict, program: SourceProgram) -> "Partition":
        explicit = data.get("explicit_mutants")
        mutants = None
        if explicit is not None:
            mutants = mutation.decode_mutant_list(explicit, program)
        return cls(partition_id=data["partition_id"], classes=data["classes"],
                   tests=data["tests"], operators=data["operators"],
                   explicit_mutants=mutants)


@dataclass
class PartialResult:
    partition_id: int
    statuses: list
    phase_durations: dict
    worker_id: int = -1

    def to_json(self) -> dict:
        return {"partition_id": self.partition_id,
                "statuses": [s.to_json() for s in self.statuses],
                "phase_durations": dict(self.phase_durations),
                "worker_id": self.worker_id}

    @classmethod
    def from_json(cls, data: dict) -> "PartialResult":
        return cls(partition_id=data["partition_id"],
                   statuses=[mutation.MutantStatus.from_json(s)
                             for s in data["statuses"]],
                   phase_durations=dict(data["phase_durations"]),
                   worker_id=data.get("worker_id", -1))


@dataclass
class CombinedResult:
    statuses: list
    score: mutation.ScorePair
    per_operator_counts: dict
    per_class_counts: dict
    total_duration: float | None
    partials: list

    def verdict_map(self) -> dict:
        return {s.mutant_id: s.verdict for s in self.statuses}

    def to_json(self) -> dict:
        return {"score": self.score.to_json(),
                "statuses": [s.to_json() for s in self.statuses],
                "per_operator_counts": dict(self.per_operator_counts),
                "per_class_counts": dict(self.per_class_counts),
                "total_duration": self.total_duration,
                "partials": [p.to_json() for p in self.partials]}


def make_partitions(params: TaskParameters, strategy: DistributionStrategy,
                    program: SourceProgram) -> list:
    """Split one task into partitions, in deterministic creation order.

    by-operator: one partition per operator (all classes, all tests).
    by-class: one partition per class (all operators, all tests).
    by-mutant-equal: generate up front, slice the ordered mutant list into
    contiguous chunks whose sizes differ by at most one.
    """
    params.validate()
    kind = strategy.kind
    if kind == BY_OPERATOR:
        return [Partition(partition_id=i, classes=list(params.classes),
                          tests=list(params.tests), operators=[op])
                for i, op in enumerate(params.operators)]
    if kind == BY_CLASS:
        return [Partition(partition_id=i, classes=[cls],
                          tests=list(params.tests),
                          operators=list(params.operators))
                for i, cls in enumerate(params.classes)]
    mutants = mutation.generate_mutants(program, params.classes, params.operators)
    if not mutants:
        raise ValueError("by-mutant-equal: the task generates no mutants")
    k = min(strategy.target_partitions, len(mutants))
    base, remainder = divmod(len(mutants), k)
    partitions = []
    cursor = 0
    for i in range(k):
        size = base + (1 if i < remainder else 0)
        partitions.append(Partition(
            partition_id=i, classes=list(params.classes),
            tests=list(params.tests), operators=list(params.operators),
            explicit_mutants=mutants[cursor:cursor + size]))
        cursor += size
    return partitions


def run_subtask(partition: Partition, program: SourceProgram,
                step_limit: int = DEFAULT_STEP_LIMIT,
                cost_model: CostModel = DEFAULT_COST_MODEL,
                skip_redundant_phases: bool = False, worker_id: int = -1,
                execution_cache: dict | None = None,
                backend=None, parallelism: int = 1) -> PartialResult:
    """Execute one partition through the four phases.

    Scan and dependency analysis are repeated per subtask (modeling the
    prototype's constant overhead) unless ``skip_redundant_phases``.  When
    the partition carries explicit mutants, generation is replaced by
    rehydration and charged per mutant only.  ``execution_cache`` maps
    mutant_id -> MutantStatus and may be shared across subtasks of one job.

    ``parallelism`` > 1 executes the partition's mutants in a thread pool;
    results (and virtual-time accounting, which is per mutant) are
    identical to the default sequential degree of 1.
    """
    n_classes = len(program.classes)
    durations = dict.fromkeys(PHASES, 0)

    mutation.resolve_identifiers(program, partition.classes, partition.tests)
    if not skip_redundant_phases:
        durations[PHASE_SCAN] = cost_model.scan_cost * n_classes
        mutation.dependency_distance(program)  # computed and discarded, as modeled
        durations[PHASE_DEPENDENCY] = cost_model.depanalysis_cost * n_classes * n_classes

    if partition.explicit_mutants is not None:
        mutants = partition.explicit_mutants
        durations[PHASE_GENERATION] = cost_model.generation_cost * len(mutants)
    else:
        mutants = mutation.generate_mutants(program, partition.classes,
                                            partition.operators)
        durations[PHASE_GENERATION] = (
            cost_model.generation_scan_cost * len(program.nodes)
            + cost_model.generation_cost * len(mutants))

    def execute(mutant):
        if execution_cache is not None:
            cached = execution_cache.get(mutant.mutant_id)
            if cached is not None:
                return cached
        status = mutation.execute_mutant(program, mutant, partition.tests,
                                         step_limit, backend=backend)
        if execution_cache is not None:
            execution_cache[mutant.mutant_id] = status
        return status

    if parallelism > 1 and len(mutants) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            statuses = list(pool.map(execute, mutants))
    else:
        statuses = [execute(mutant) for mutant in mutants]
    durations[PHASE_EXECUTION] = sum(s.execution_steps for s in statuses)

    return PartialResult(partition_id=partition.partition_id,
                         statuses=statuses, phase_durations=durations,
                         worker_id=worker_id)


def subtask_cost(partial: PartialResult, cost_model: CostModel) -> int:
    """Virtual-time cost of a subtask excluding broadcast (charged per worker)."""
    return cost_model.subtask_startup + sum(partial.phase_durations.values())


def reduce_partials(partials, catalog) -> CombinedResult:
    """Combine partial results; any permutation of partials reduces equally.

    ``catalog`` is the program's full mutant catalog, used to attribute
    statuses to operators and classes.  total_duration is left unset; the
    cluster layer owns it (makespan or wall clock).
    """
    partials = sorted(partials, key=lambda p: p.partition_id)
    seen_partitions = set()
    for partial in partials:
        if partial.partition_id in seen_partitions:
            raise ValueError(f"duplicate partition {partial.partition_id}")
        seen_partitions.add(partial.partition_id)
    if seen_partitions and seen_partitions != set(range(len(seen_partitions))):
        missing = sorted(set(range(max(seen_partitions) + 1)) - seen_partitions)
        raise ValueError(f"missing partitions: {missing}")

    by_mutant = {}
    for partial in partials:
        for status in partial.statuses:
            if status.mutant_id in by_mutant:
                raise ValueError(
                    f"mutant {status.mutant_id} reported by two partitions")
            by_mutant[status.mutant_id] = status
    statuses = [by_mutant[mid] for mid in sorted(by_mutant)]

    per_operator = {op: 0 for op in mutation.OPERATOR_IDS}
    per_class = {}
    for status in statuses:
        mutant = catalog[status.mutant_id]
        per_operator[mutant.operator] += 1
        per_class[mutant.class_name] = per_class.get(mutant.class_name, 0) + 1

    score = (mutation.mutation_score(statuses) if statuses
             else mutation.ScorePair(0, 0))
    return CombinedResult(statuses=statuses, score=score,
                          per_operator_counts=per_operator,
                          per_class_counts=per_class,
                          total_duration=None, partials=partials)
