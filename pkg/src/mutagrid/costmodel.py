"""Virtual-time cost model for simulated subtask phases.

Execution is measured in interpreter steps; the other phases are charged
with constants against whole-program size, reproducing the flat per-subtask
overhead profile of the prototype being modeled (classpath scanning and
dependency analysis look at the entire program regardless of partition
size, and mutant generation is dominated by the applicability walk over
the full node table).
"""

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class CostModel:
    subtask_startup: int = 50_000
    broadcast_per_worker: int = 10_000
    scan_cost: int = 100            # per program class
    depanalysis_cost: int = 5       # per directed class pair (n^2)
    generation_cost: int = 20       # per mutant generated or rehydrated
    generation_scan_cost: int = 2   # per program node (applicability walk)

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value < 0:
                raise ValueError(f"cost model constant {f.name} must be >= 0")

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json(cls, data: dict) -> "CostModel":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown cost model keys: {sorted(unknown)}")
        return cls(**data)


DEFAULT_COST_MODEL = CostModel()

ZERO_OVERHEAD = CostModel(subtask_startup=0, broadcast_per_worker=0,
                          scan_cost=0, depanalysis_cost=0, generation_cost=0,
                          generation_scan_cost=0)
