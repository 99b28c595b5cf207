import random

import pytest

from mutagrid import mutation as mu
from mutagrid import partitioning as pt
from mutagrid.costmodel import DEFAULT_COST_MODEL
from mutagrid.minilang import parse_program
from mutagrid.mutation import mutant_catalog


def params_for(program, **kw):
    return pt.TaskParameters.for_program(program, **kw)


def test_task_parameters_validation(small_corpus):
    program, _ = small_corpus
    params = params_for(program)
    assert params.validate() is params
    with pytest.raises(ValueError, match="non-empty"):
        pt.TaskParameters(classes=[], tests=["C0.t0"]).validate()
    with pytest.raises(ValueError, match="duplicate"):
        pt.TaskParameters(classes=["C0", "C0"], tests=["C0.t0"]).validate()
    with pytest.raises(ValueError, match="unknown operators"):
        pt.TaskParameters(classes=["C0"], tests=["C0.t0"],
                          operators=["NOPE"]).validate()


def test_by_operator_partition_count(small_corpus):
    program, _ = small_corpus
    params = params_for(program)
    partitions = pt.make_partitions(params,
                                    pt.DistributionStrategy(pt.BY_OPERATOR),
                                    program)
    assert len(partitions) == 7  # one per default operator
    for partition, op in zip(partitions, mu.OPERATOR_IDS):
        assert partition.operators == [op]
        assert partition.classes == params.classes
        assert partition.tests == params.tests


def test_by_class_partition_count(small_corpus):
    program, _ = small_corpus
    params = params_for(program)
    partitions = pt.make_partitions(params,
                                    pt.DistributionStrategy(pt.BY_CLASS),
                                    program)
    assert len(partitions) == len(params.classes)
    assert [p.classes for p in partitions] == [[c] for c in params.classes]


def test_by_mutant_equal_chunk_sizes():
    # five identical one-liner functions yield exactly 10 mutants
    text = "class A {\n" + "\n".join(
        f"fn f{i}(a: int, b: int) -> int {{ return a + b; }}"
        for i in range(5)) + "\ntest fn t() { assert A.f0(1, 1) == 2; }\n}"
    program = parse_program(text)
    assert len(mutant_catalog(program)) == 10
    params = params_for(program)
    partitions = pt.make_partitions(
        params, pt.DistributionStrategy(pt.BY_MUTANT_EQUAL,
                                        target_partitions=4), program)
    sizes = [len(p.explicit_mutants) for p in partitions]
    assert sizes == [3, 3, 2, 2]  # sizes differ by at most one
    # contiguous chunks preserve canonical order
    flat = [m.mutant_id for p in partitions for m in p.explicit_mutants]
    assert flat == list(range(10))


def test_by_mutant_equal_rejects_empty():
    program = parse_program(
        "class A { fn f(y: int) { let x = y; } test fn t() { assert true; } }")
    with pytest.raises(ValueError, match="no mutants"):
        pt.make_partitions(
            pt.TaskParameters(classes=["A"], tests=["A.t"]).validate(),
            pt.DistributionStrategy(pt.BY_MUTANT_EQUAL, target_partitions=2),
            program)


def test_strategy_validation():
    with pytest.raises(ValueError, match="target_partitions"):
        pt.DistributionStrategy(pt.BY_MUTANT_EQUAL)
    with pytest.raises(ValueError, match="unknown strategy"):
        pt.DistributionStrategy("by-magic")


@pytest.mark.parametrize("kind", pt.STRATEGY_KINDS)
def test_partition_completeness_and_disjointness(small_corpus, kind):
    program, _ = small_corpus
    rng = random.Random(11)
    classes = [c.name for c in program.classes]
    for trial in range(8):
        sub_classes = sorted(rng.sample(classes, rng.randint(1, len(classes))),
                             key=classes.index)
        sub_ops = sorted(rng.sample(mu.OPERATOR_IDS, rng.randint(1, 7)),
                         key=mu.OPERATOR_IDS.index)
        params = params_for(program, classes=sub_classes, operators=sub_ops)
        full = {m.mutant_id
                for m in mu.generate_mutants(program, sub_classes, sub_ops)}
        if not full and kind == pt.BY_MUTANT_EQUAL:
            continue
        strategy = pt.DistributionStrategy(
            kind, target_partitions=4 if kind == pt.BY_MUTANT_EQUAL else None)
        partitions = pt.make_partitions(params, strategy, program)
        seen = []
        for partition in partitions:
            if partition.explicit_mutants is not None:
                seen.extend(m.mutant_id for m in partition.explicit_mutants)
            else:
                seen.extend(m.mutant_id for m in mu.generate_mutants(
                    program, partition.classes, partition.operators))
        assert len(seen) == len(set(seen)), "a mutant appears twice"
        assert set(seen) == full


def test_run_subtask_phases(small_corpus):
    program, _ = small_corpus
    params = params_for(program, step_limit=20000)
    partition = pt.make_partitions(params,
                                   pt.DistributionStrategy(pt.BY_CLASS),
                                   program)[0]
    partial = pt.run_subtask(partition, program, step_limit=20000,
                             cost_model=DEFAULT_COST_MODEL, worker_id=3)
    assert set(partial.phase_durations) == set(pt.PHASES)
    n = len(program.classes)
    assert partial.phase_durations["scan"] == DEFAULT_COST_MODEL.scan_cost * n
    assert (partial.phase_durations["dependency-analysis"]
            == DEFAULT_COST_MODEL.depanalysis_cost * n * n)
    expected_gen = (DEFAULT_COST_MODEL.generation_scan_cost * len(program.nodes)
                    + DEFAULT_COST_MODEL.generation_cost * len(partial.statuses))
    assert partial.phase_durations["generation"] == expected_gen
    assert partial.phase_durations["execution"] == sum(
        s.execution_steps for s in partial.statuses)
    assert partial.worker_id == 3


def test_run_subtask_skip_redundant_phases(small_corpus):
    program, _ = small_corpus
    params = params_for(program, step_limit=20000)
    partition = pt.make_partitions(params,
                                   pt.DistributionStrategy(pt.BY_CLASS),
                                   program)[0]
    partial = pt.run_subtask(partition, program, step_limit=20000,
                             skip_redundant_phases=True)
    assert partial.phase_durations["scan"] == 0
    assert partial.phase_durations["dependency-analysis"] == 0
    assert partial.phase_durations["execution"] > 0


def test_rehydrated_subtask_charges_generation_per_mutant_only(small_corpus):
    program, _ = small_corpus
    params = params_for(program, step_limit=20000)
    explicit = pt.make_partitions(
        params, pt.DistributionStrategy(pt.BY_MUTANT_EQUAL,
                                        target_partitions=5), program)[0]
    assert explicit.explicit_mutants is not None
    rehydrated = pt.run_subtask(explicit, program, step_limit=20000)
    generated = pt.run_subtask(
        pt.Partition(partition_id=0, classes=params.classes,
                     tests=params.tests, operators=params.operators),
        program, step_limit=20000)
    m = len(explicit.explicit_mutants)
    assert (rehydrated.phase_durations["generation"]
            == DEFAULT_COST_MODEL.generation_cost * m)
    assert (rehydrated.phase_durations["generation"]
            < generated.phase_durations["generation"])
    assert len(rehydrated.statuses) == m


def test_partition_json_roundtrip_with_explicit_mutants(small_corpus):
    program, _ = small_corpus
    params = params_for(program)
    partition = pt.make_partitions(
        params, pt.DistributionStrategy(pt.BY_MUTANT_EQUAL,
                                        target_partitions=3), program)[1]
    data = partition.to_json(program.content_hash)
    back = pt.Partition.from_json(data, program)
    assert back.partition_id == partition.partition_id
    assert ([m.mutant_id for m in back.explicit_mutants]
            == [m.mutant_id for m in partition.explicit_mutants])


def test_reduce_identity_and_additivity(small_corpus):
    program, _ = small_corpus
    params = params_for(program, step_limit=20000)
    partitions = pt.make_partitions(params,
                                    pt.DistributionStrategy(pt.BY_OPERATOR),
                                    program)
    cache = {}
    partials = [pt.run_subtask(p, program, step_limit=20000,
                               execution_cache=cache) for p in partitions]
    catalog = mutant_catalog(program)

    single = pt.reduce_partials([partials[0]], catalog)
    assert len(single.statuses) == len(partials[0].statuses)
    assert single.score.killed + single.score.live == len(single.statuses)

    combined = pt.reduce_partials(partials, catalog)
    assert len(combined.statuses) == len(catalog)
    assert sum(combined.per_operator_counts.values()) == len(catalog)
    assert sum(combined.per_class_counts.values()) == len(catalog)
    assert combined.score.killed == sum(
        1 for s in combined.statuses if s.verdict == mu.KILLED)


def test_reduce_is_order_independent(small_corpus):
    program, _ = small_corpus
    params = params_for(program, step_limit=20000)
    partitions = pt.make_partitions(params,
                                    pt.DistributionStrategy(pt.BY_CLASS),
                                    program)
    cache = {}
    partials = [pt.run_subtask(p, program, step_limit=20000,
                               execution_cache=cache) for p in partitions]
    catalog = mutant_catalog(program)
    reference = pt.reduce_partials(partials, catalog).to_json()
    rng = random.Random(5)
    for _ in range(4):
        shuffled = partials[:]
        rng.shuffle(shuffled)
        assert pt.reduce_partials(shuffled, catalog).to_json() == reference


def test_reduce_additive_score_example():
    # two partials with k=2,l=1 and k=1,l=1 combine to k=3,l=2 -> 0.6
    def status(mid, verdict):
        return mu.MutantStatus(mid, verdict, 0 if verdict == mu.KILLED else None,
                               1, 5)
    a = pt.PartialResult(0, [status(0, mu.KILLED), status(1, mu.KILLED),
                             status(2, mu.SURVIVED)],
                         dict.fromkeys(pt.PHASES, 0))
    b = pt.PartialResult(1, [status(3, mu.KILLED), status(4, mu.SURVIVED)],
                         dict.fromkeys(pt.PHASES, 0))
    catalog = [mu.Mutant(i, "A", "f", i, 0, mu.MATH, "", "") for i in range(5)]
    combined = pt.reduce_partials([a, b], catalog)
    assert combined.score.killed == 3
    assert combined.score.live == 2
    assert combined.score.ratio_killed_to_total == 0.6


def test_reduce_rejects_duplicates_and_gaps():
    empty = dict.fromkeys(pt.PHASES, 0)
    a = pt.PartialResult(0, [], empty)
    dup = pt.PartialResult(0, [], empty)
    with pytest.raises(ValueError, match="duplicate partition"):
        pt.reduce_partials([a, dup], [])
    gap = pt.PartialResult(2, [], empty)
    with pytest.raises(ValueError, match="missing partitions"):
        pt.reduce_partials([a, gap], [])
    status = mu.MutantStatus(7, mu.KILLED, 0, 1, 5)
    twice_a = pt.PartialResult(0, [status], empty)
    twice_b = pt.PartialResult(1, [status], empty)
    catalog = [mu.Mutant(i, "A", "f", i, 0, mu.MATH, "", "") for i in range(8)]
    with pytest.raises(ValueError, match="two partitions"):
        pt.reduce_partials([twice_a, twice_b], catalog)


def test_parallel_subtask_execution_matches_sequential(small_corpus):
    program, _ = small_corpus
    params = params_for(program, step_limit=20000)
    partition = pt.make_partitions(params,
                                   pt.DistributionStrategy(pt.BY_OPERATOR),
                                   program)[0]
    sequential = pt.run_subtask(partition, program, step_limit=20000)
    parallel = pt.run_subtask(partition, program, step_limit=20000,
                              parallelism=4)
    assert parallel.to_json() == sequential.to_json()
