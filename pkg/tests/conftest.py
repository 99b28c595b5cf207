import pytest

from mutagrid.corpus import (DEFAULT_JOB_STEP_LIMIT, CorpusSpec,
                             default_corpus_spec, generate_corpus)
from mutagrid.partitioning import TaskParameters


def small_spec(seed, classes=6, tests_per_class=3):
    return CorpusSpec(seed=seed, class_count=classes,
                      tests_per_class=tests_per_class,
                      mean_mutable_lines=32.0, stddev_mutable_lines=10.0,
                      min_mutable_lines=14, max_mutable_lines=70)


@pytest.fixture(scope="session")
def small_corpus():
    """A 6-class corpus shared by unit tests."""
    return generate_corpus(small_spec(seed=42))


@pytest.fixture(scope="session")
def default_corpus():
    """The frozen 44-class / 943-test corpus (the gson-scale subject)."""
    return generate_corpus(default_corpus_spec())


@pytest.fixture(scope="session")
def default_corpus_run(default_corpus):
    """One shared execution pass over the default corpus.

    Returns (program, manifest, params, execution_cache); the cache maps
    mutant_id -> MutantStatus and is reused by every simulation that
    sweeps strategies and worker counts.
    """
    program, manifest = default_corpus
    params = TaskParameters.for_program(program,
                                        step_limit=DEFAULT_JOB_STEP_LIMIT)
    return program, manifest, params, {}
