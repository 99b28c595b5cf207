import random

import pytest

from mutagrid import mutation as mu
from mutagrid.minilang import parse_program
from mutagrid.minilang.interp import run_many_flat


def catalog(text):
    return mu.mutant_catalog(parse_program(text))


def test_operator_registry_is_stable():
    assert len(mu.ALL_OPERATORS) == 7
    assert mu.OPERATOR_IDS == (
        "MATH", "INVERT_NEGS", "RETURN_VALS", "CONDITIONALS_BOUNDARY",
        "NEGATE_CONDITIONALS", "INCREMENTS", "VOID_METHOD_CALLS")


def test_invert_negs_worked_example():
    # -i  ->  i
    program = parse_program("class A { fn f(i: int) -> int { return -i; } }")
    mutants = mu.generate_mutants(program, operators=[mu.INVERT_NEGS])
    assert len(mutants) == 1
    assert mutants[0].original_snippet == "-i"
    assert mutants[0].mutated_snippet == "i"


def test_math_worked_example():
    # a + b  ->  a - b
    program = parse_program(
        "class A { fn f(a: int, b: int) -> int { return a + b; } }")
    mutants = mu.generate_mutants(program, operators=[mu.MATH])
    assert len(mutants) == 1
    assert mutants[0].original_snippet == "a + b"
    assert mutants[0].mutated_snippet == "a - b"


def test_return_vals_worked_example():
    # return true  ->  return false
    program = parse_program("class A { fn f() -> bool { return true; } }")
    mutants = mu.generate_mutants(program, operators=[mu.RETURN_VALS])
    assert len(mutants) == 1
    assert mutants[0].original_snippet == "return true"
    assert mutants[0].mutated_snippet == "return false"


def test_applicability_over_small_statement():
    # if (x < y) { x += 1; } has 4 mutation-relevant nodes (if, <, +=, 1);
    # by hand: `<` gives CONDITIONALS_BOUNDARY (<=) and NEGATE_CONDITIONALS
    # (>=); `+=` gives INCREMENTS; nothing else applies -> exactly 3.
    program = parse_program(
        "class A { fn f(x: int, y: int) { if (x < y) { x += 1; } } }")
    mutants = mu.generate_mutants(program)
    got = [(m.operator, m.mutated_snippet) for m in mutants]
    assert got == [("CONDITIONALS_BOUNDARY", "x <= y"),
                   ("NEGATE_CONDITIONALS", "x >= y"),
                   ("INCREMENTS", "x -= 1")]


def test_tests_are_never_mutated():
    program = parse_program("""
class A
{
  fn f(a: int) -> int { return a + 1; }
  test fn t() { assert A.f(1) == 2; }
}
""")
    for mutant in mu.mutant_catalog(program):
        assert mutant.function_name == "f"


def test_generation_order_and_ids_are_canonical():
    program = parse_program("""
class A
{
  fn f(a: int, b: int) -> int { return a + b * 2; }
}

class B
{
  fn g(x: int) -> int { return -x; }
}
""")
    mutants = mu.mutant_catalog(program)
    assert [m.mutant_id for m in mutants] == list(range(len(mutants)))
    keys = [(m.node_id, m.operator) for m in mutants]
    assert keys == sorted(keys, key=lambda k: (k[0],
                                               mu.OPERATOR_IDS.index(k[1])))
    classes = [m.class_name for m in mutants]
    assert classes == sorted(classes, key=["A", "B"].index)


def test_generation_compositionality(small_corpus):
    program, _ = small_corpus
    rng = random.Random(7)
    classes = [c.name for c in program.classes]
    ops = list(mu.OPERATOR_IDS)
    for _ in range(10):
        c_split = rng.randint(1, len(classes) - 1)
        o_split = rng.randint(1, len(ops) - 1)
        rng.shuffle(classes)
        rng.shuffle(ops)
        c1, c2 = classes[:c_split], classes[c_split:]
        o1, o2 = ops[:o_split], ops[o_split:]
        whole = {m.mutant_id for m in mu.generate_mutants(program, classes, ops)}
        by_class = ({m.mutant_id for m in mu.generate_mutants(program, c1, ops)}
                    | {m.mutant_id for m in mu.generate_mutants(program, c2, ops)})
        by_op = ({m.mutant_id for m in mu.generate_mutants(program, classes, o1)}
                 | {m.mutant_id for m in mu.generate_mutants(program, classes, o2)})
        assert by_class == whole
        assert by_op == whole


def test_apply_mutant_preserves_byte_offset():
    program = parse_program(
        "class A { fn f(a: int, b: int) -> int { return a + b; } }")
    for mutant in mu.mutant_catalog(program):
        mutated = mu.apply_mutant(program, mutant)
        assert program.source_text != mutated.source_text
        if mutant.operator != mu.VOID_METHOD_CALLS:
            starts = {n.start for n in mutated.nodes}
            assert mutant.byte_offset in starts


def test_apply_mutant_leaves_original_untouched():
    text = "class A { fn f(a: int) -> int { return -a; } }"
    program = parse_program(text)
    mutant = mu.mutant_catalog(program)[0]
    mu.apply_mutant(program, mutant)
    assert program.source_text == text
    assert parse_program(text).content_hash == program.content_hash


def test_stale_mutants_rejected():
    program = parse_program(
        "class A { fn f(a: int) -> int { return a + 1; } }")
    mutant = mu.mutant_catalog(program)[0]
    stale = mu.Mutant(mutant_id=99, class_name="A", function_name="f",
                      node_id=9999, byte_offset=0, operator=mu.MATH,
                      original_snippet="", mutated_snippet="")
    with pytest.raises(mu.StaleMutantError, match="out of range"):
        mu.apply_mutant(program, stale)
    other = parse_program(
        "class A { fn f(a: int) -> int { let x = a; return x - 1; } }")
    with pytest.raises(mu.StaleMutantError):
        mu.apply_mutant(other, mutant)  # offsets/applicability do not line up


def test_mutated_programs_execute_equivalently_to_flat_patch(small_corpus):
    """The text-splice route is the independent oracle for the flat patch."""
    program, _ = small_corpus
    mutants = mu.mutant_catalog(program)[::9][:40]
    fn_indices = [program.tests[t] for t in range(len(program.tests))]
    for mutant in mutants:
        slow = mu.apply_mutant(program, mutant)
        slow_fns = [slow.tests[t] for t in range(len(slow.tests))]
        expected = run_many_flat(slow.flat, slow_fns, 20000, False)
        actual = run_many_flat(mu.mutate_flat(program, mutant), fn_indices,
                               20000, False)
        assert expected == actual, mutant.to_json()


def test_execute_mutant_first_kill_short_circuit():
    program = parse_program("""
class M
{
  fn add(a: int, b: int) -> int { return a + b; }

  test fn t0() { assert M.add(2, 3) == 5; }
  test fn t1() { assert M.add(0, 0) == 0; }
}
""")
    mutant = [m for m in mu.mutant_catalog(program)
              if m.operator == mu.MATH][0]
    status = mu.execute_mutant(program, mutant)
    assert status.verdict == mu.KILLED
    assert status.killing_test == 0
    assert status.tests_executed == 1  # stopped at the first kill


def test_uncovered_mutant_survives_running_all_tests():
    program = parse_program("""
class M
{
  fn used(a: int) -> int { return a + 1; }
  fn unused(a: int) -> int { return a * 2; }

  test fn t0() { assert M.used(1) == 2; }
  test fn t1() { assert M.used(2) == 3; }
}
""")
    mutant = [m for m in mu.mutant_catalog(program)
              if m.function_name == "unused"][0]
    status = mu.execute_mutant(program, mutant)
    assert status.verdict == mu.SURVIVED
    assert status.tests_executed == 2  # |T|: nothing can fail, all run


def test_runaway_loop_mutant_killed_by_step_limit():
    # the original loop guard is never true, so the loop is skipped; negating
    # it yields a condition that stays true while the counter grows
    program = parse_program("""
class M
{
  fn f() -> int
  {
    let acc = 0;
    let i = 0;
    while (i < 0)
    {
      i += 1;
      acc += 1;
    }
    return acc;
  }

  test fn t0() { assert M.f() == 0; }
}
""")
    negate = [m for m in mu.mutant_catalog(program)
              if m.operator == mu.NEGATE_CONDITIONALS][0]
    assert negate.mutated_snippet == "i >= 0"
    status = mu.execute_mutant(program, negate, step_limit=5000)
    assert status.verdict == mu.KILLED
    assert status.execution_steps == 5000


def test_exhaustive_oracle_agrees_with_short_circuit(small_corpus):
    program, _ = small_corpus
    for mutant in mu.mutant_catalog(program)[::13][:30]:
        fast = mu.execute_mutant(program, mutant, step_limit=20000)
        slow = mu.execute_mutant(program, mutant, step_limit=20000,
                                 exhaustive=True)
        assert fast.verdict == slow.verdict
        assert fast.killing_test == slow.killing_test
        assert slow.tests_executed == len(program.tests)


def test_kill_monotonicity_under_test_addition(small_corpus):
    program, _ = small_corpus
    rng = random.Random(3)
    all_tests = list(range(len(program.tests)))
    for mutant in mu.mutant_catalog(program)[::17][:15]:
        subset = sorted(rng.sample(all_tests, len(all_tests) // 2))
        small = mu.execute_mutant(program, mutant, tests=subset,
                                  step_limit=20000)
        full = mu.execute_mutant(program, mutant, step_limit=20000)
        if small.verdict == mu.KILLED:
            assert full.verdict == mu.KILLED


def test_mutation_score():
    def statuses(killed, survived):
        out = []
        for i in range(killed):
            out.append(mu.MutantStatus(i, mu.KILLED, 0, 1, 10))
        for i in range(survived):
            out.append(mu.MutantStatus(killed + i, mu.SURVIVED, None, 1, 10))
        return out

    score = mu.mutation_score(statuses(3, 1))
    assert score.ratio_killed_to_live == 3.0
    assert score.ratio_killed_to_total == 0.75
    score = mu.mutation_score(statuses(0, 5))
    assert score.ratio_killed_to_live == 0.0
    assert score.ratio_killed_to_total == 0.0
    score = mu.mutation_score(statuses(4, 0))
    assert score.ratio_killed_to_live is None  # k/l undefined at l=0
    assert score.ratio_killed_to_total == 1.0
    with pytest.raises(ValueError):
        mu.mutation_score([])


def test_dependency_distance_chain_cycle_isolated():
    program = parse_program("""
class A { fn f() -> int { return B.g(); } }
class B { fn g() -> int { return C.h(); } }
class C { fn h() -> int { return 1; } }
class D { fn lonely() -> int { return 2; } }
class E { fn e() -> int { return F.f() + 0; } }
class F { fn f() -> int { return 3; } fn back() -> int { return E.e(); } }
""")
    matrix = mu.dependency_distance(program)
    assert matrix.get("A", "B") == 1
    assert matrix.get("A", "C") == 2
    assert matrix.get("A", "A") == 0
    assert matrix.get("B", "A") == float("inf")
    assert matrix.get("D", "A") == float("inf")
    assert matrix.get("A", "D") == float("inf")
    # two-class cycle: both directions distance 1
    assert matrix.get("E", "F") == 1
    assert matrix.get("F", "E") == 1


def test_mutable_lines_examples():
    one = parse_program("class A { fn f() -> bool { return true; } }")
    assert mu.mutable_lines(one, "A") == 1  # RETURN_VALS applies

    none = parse_program("class A { fn f(y: int) { let x = y; } }")
    assert mu.mutable_lines(none, "A") == 0  # no operator matches a bare let

    with pytest.raises(Exception, match="unknown class"):
        mu.mutable_lines(one, "Z")


def test_compact_encoding_roundtrip_and_staleness(small_corpus):
    program, _ = small_corpus
    mutants = mu.mutant_catalog(program)[:50]
    payload = mu.encode_mutant_list(mutants, program.content_hash)
    decoded = mu.decode_mutant_list(payload, program)
    assert [m.mutant_id for m in decoded] == [m.mutant_id for m in mutants]

    other = parse_program("class A { fn f() -> int { return 1 + 2; } }")
    with pytest.raises(mu.StaleMutantError, match="different program"):
        mu.decode_mutant_list(payload, other)

    broken = dict(payload, count=payload["count"] + 9)
    with pytest.raises(ValueError):
        mu.decode_mutant_list(broken, program)


def test_resolve_identifiers(small_corpus):
    program, _ = small_corpus
    classes = [c.name for c in program.classes]
    tests = [program.test_name_by_id[t] for t in range(3)]
    class_refs, test_ids = mu.resolve_identifiers(program, classes, tests)
    assert [c.name for c in class_refs] == classes
    assert test_ids == [0, 1, 2]
    with pytest.raises(Exception, match="unknown class"):
        mu.resolve_identifiers(program, ["Nope"], [])
    with pytest.raises(Exception, match="not a test"):
        non_test = f"{classes[0]}.f0"
        mu.resolve_identifiers(program, [], [non_test])
