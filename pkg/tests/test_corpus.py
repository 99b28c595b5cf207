import pytest

from mutagrid import mutation as mu
from mutagrid.corpus import CorpusSpec, generate_corpus, uniform_fixture
from mutagrid.minilang import PASSED, run_all_tests

from conftest import small_spec


def test_same_seed_is_byte_identical():
    one, m1 = generate_corpus(small_spec(seed=123))
    two, m2 = generate_corpus(small_spec(seed=123))
    assert one.source_text == two.source_text
    assert m1 == m2


def test_different_seeds_differ():
    one, _ = generate_corpus(small_spec(seed=1))
    two, _ = generate_corpus(small_spec(seed=2))
    assert one.source_text != two.source_text


def test_requested_shape_is_honored():
    program, manifest = generate_corpus(
        CorpusSpec(seed=5, class_count=9, tests_per_class=4,
                   mean_mutable_lines=40, stddev_mutable_lines=10,
                   min_mutable_lines=20, max_mutable_lines=90))
    assert len(program.classes) == 9
    assert len(program.tests) == 9 * 4
    for entry in manifest["classes"]:
        assert 20 <= entry["mutable_lines"] <= 90 + 15  # last template may overshoot


def test_total_tests_allocation_is_exact():
    program, manifest = generate_corpus(
        CorpusSpec(seed=5, class_count=7, total_tests=23,
                   mean_mutable_lines=30, stddev_mutable_lines=5,
                   min_mutable_lines=15, max_mutable_lines=60))
    assert len(program.tests) == 23
    assert sum(e["tests"] for e in manifest["classes"]) == 23


def test_corpus_passes_its_own_tests(small_corpus):
    program, _ = small_corpus
    assert all(o.status == PASSED for _, o in run_all_tests(program))


def test_untestable_specs_rejected():
    with pytest.raises(ValueError, match="tests_per_class"):
        CorpusSpec(seed=1, tests_per_class=0).validate()
    with pytest.raises(ValueError, match="total_tests"):
        CorpusSpec(seed=1, total_tests=0).validate()
    with pytest.raises(ValueError, match="unknown corpus spec keys"):
        CorpusSpec.from_json({"seed": 1, "flavor": "lemon"})


def test_manifest_matches_mutation_engine(small_corpus):
    """Emission-time bookkeeping equals the engine's applicability scan."""
    program, manifest = small_corpus
    for entry in manifest["classes"]:
        per_operator = {}
        for mutant in mu.generate_mutants(program, [entry["name"]]):
            per_operator[mutant.operator] = per_operator.get(mutant.operator, 0) + 1
        expected = {op: n for op, n in entry["operator_sites"].items() if n}
        assert per_operator == expected, entry["name"]
        assert mu.mutable_lines(program, entry["name"]) == entry["mutable_lines"]
    assert manifest["totals"]["mutants"] == len(mu.mutant_catalog(program))


def test_cross_class_dependencies_exist(small_corpus):
    program, _ = small_corpus
    matrix = mu.dependency_distance(program)
    finite = [d for row in matrix.distance for d in row if 0 < d != float("inf")]
    assert finite, "corpus has no cross-class calls"


def test_uniform_fixture_mutants_cost_the_same():
    program = uniform_fixture(12)
    statuses = [mu.execute_mutant(program, m)
                for m in mu.mutant_catalog(program)]
    assert all(s.verdict == mu.KILLED for s in statuses)
    assert all(s.killing_test == 0 for s in statuses)
    costs = sorted(s.execution_steps for s in statuses)
    assert costs[-1] - costs[0] <= 2  # RETURN_VALS adds two evaluated nodes


def test_gson_like_fixture_parses_and_runs(default_corpus, tmp_path):
    """The 44-class corpus written out as a .mini file round-trips."""
    program, manifest = default_corpus
    path = tmp_path / "gson_like.mini"
    path.write_text(program.canonical.text)
    reloaded = __import__("mutagrid.minilang", fromlist=["parse_program"]) \
        .parse_program(path.read_text())
    assert len(reloaded.classes) == 44
    assert [c.name for c in reloaded.classes] == [f"C{i}" for i in range(44)]
    assert reloaded.content_hash == program.content_hash
    outcomes = run_all_tests(reloaded)
    assert len(outcomes) == 943  # one outcome per synthetic test case
    assert all(o.status == PASSED for _, o in outcomes)
