import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mutagrid.minilang import (ASSERTION_FAILED, PASSED, RUNTIME_ERROR,
                               STEP_LIMIT_EXCEEDED, available_backends,
                               eval_call, parse_program, run_all_tests,
                               run_function)

BACKENDS = available_backends()
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


def wrap(v):
    v &= (1 << 64) - 1
    return v - (1 << 64) if v >= (1 << 63) else v


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def test_arithmetic_identity_passes(backend):
    program = parse_program("class A { test fn t() { assert 1 + 1 == 2; } }")
    outcome = run_function(program, "A.t", backend=backend)
    assert outcome.status == PASSED
    # assert, ==, +, and three literals: one step each, counted on entry
    assert outcome.steps == 6


def test_division_by_zero_is_runtime_error(backend):
    program = parse_program("class A { test fn t() { assert 1 / 0 == 0; } }")
    outcome = run_function(program, "A.t", backend=backend)
    assert outcome.status == RUNTIME_ERROR
    assert "zero" in outcome.detail


def test_step_limit_hits_exactly(backend):
    program = parse_program("class A { test fn t() { while (true) { } } }")
    outcome = run_function(program, "A.t", step_limit=1000, backend=backend)
    assert outcome.status == STEP_LIMIT_EXCEEDED
    assert outcome.steps == 1000


def test_assertion_failure_reports_span(backend):
    text = "class A { test fn t() { assert 1 == 2; } }"
    program = parse_program(text)
    outcome = run_function(program, "A.t", backend=backend)
    assert outcome.status == ASSERTION_FAILED
    start, length = outcome.failed_assertion
    assert text[start:start + length] == "assert 1 == 2"


def test_determinism(backend):
    program = parse_program("""
class A
{
  fn f(n: int) -> int
  {
    let acc = 0;
    let i = 0;
    while (i < n)
    {
      i += 1;
      acc += i * i;
    }
    return acc;
  }

  test fn t()
  {
    assert A.f(10) == 385;
  }
}
""")
    first = run_function(program, "A.t", backend=backend)
    second = run_function(program, "A.t", backend=backend)
    assert first == second
    assert first.status == PASSED


def test_prefix_body_uses_strictly_fewer_steps(backend):
    shorter = parse_program("class A { test fn t() "
                            "{ let x = 1; assert true; } }")
    longer = parse_program("class A { test fn t() "
                           "{ let x = 1; let y = 2; assert true; } }")
    a = run_function(shorter, "A.t", backend=backend)
    b = run_function(longer, "A.t", backend=backend)
    assert a.steps < b.steps


def test_short_circuit_skips_operand_steps(backend):
    left_only = parse_program("class A { test fn t() "
                              "{ assert true || (1 / 0 == 0); } }")
    outcome = run_function(left_only, "A.t", backend=backend)
    assert outcome.status == PASSED  # right side never evaluated
    both = parse_program("class A { test fn t() { assert false || true; } }")
    assert run_function(both, "A.t", backend=backend).status == PASSED


def test_run_all_tests_in_id_order_failures_are_data(backend):
    program = parse_program("""
class A
{
  test fn t0() { assert true; }
  test fn t1() { assert 1 == 2; }
  test fn t2() { assert true; }
}
""")
    outcomes = run_all_tests(program, backend=backend)
    assert [tid for tid, _ in outcomes] == [0, 1, 2]
    assert [o.status for _, o in outcomes] == [PASSED, ASSERTION_FAILED, PASSED]


def test_call_depth_capped(backend):
    program = parse_program(
        "class A { fn f(n: int) -> int { return A.f(n); } "
        "test fn t() { assert A.f(1) == 0; } }")
    outcome = run_function(program, "A.t", backend=backend)
    assert outcome.status == RUNTIME_ERROR
    assert "depth" in outcome.detail


def test_wrapping_edges(backend):
    program = parse_program("""
class A
{
  fn add(a: int, b: int) -> int { return a + b; }
  fn div(a: int, b: int) -> int { return a / b; }
  fn mod(a: int, b: int) -> int { return a % b; }
  fn neg(a: int) -> int { return -a; }
}
""")
    def call(fn, *args):
        outcome, value = eval_call(program, f"A.{fn}", args, backend=backend)
        assert outcome.status == PASSED
        return value

    assert call("add", INT64_MAX, 1) == INT64_MIN
    assert call("neg", INT64_MIN) == INT64_MIN
    assert call("div", INT64_MIN, -1) == INT64_MIN
    assert call("mod", INT64_MIN, -1) == 0
    assert call("div", -7, 2) == -3   # truncation toward zero
    assert call("mod", -7, 2) == -1   # remainder keeps the dividend's sign
    assert call("mod", 7, -2) == 1


_ARITH = parse_program("""
class A
{
  fn add(a: int, b: int) -> int { return a + b; }
  fn sub(a: int, b: int) -> int { return a - b; }
  fn mul(a: int, b: int) -> int { return a * b; }
  fn div(a: int, b: int) -> int { return a / b; }
  fn mod(a: int, b: int) -> int { return a % b; }
}
""")

int64s = st.integers(min_value=INT64_MIN, max_value=INT64_MAX)


@settings(max_examples=120, deadline=None)
@given(a=int64s, b=int64s, op=st.sampled_from(["add", "sub", "mul", "div", "mod"]))
def test_backends_agree_on_int64_arithmetic(a, b, op):
    results = {}
    for backend in BACKENDS:
        outcome, value = eval_call(_ARITH, f"A.{op}", (a, b), backend=backend)
        results[backend] = (outcome.status, outcome.steps, value)
    assert len(set(results.values())) == 1, results
    # cross-check against reference semantics
    status, _, value = results[BACKENDS[0]]
    if op in ("div", "mod") and b == 0:
        assert status == RUNTIME_ERROR
    else:
        reference = {
            "add": lambda: wrap(a + b),
            "sub": lambda: wrap(a - b),
            "mul": lambda: wrap(a * b),
            "div": lambda: wrap(-a) if b == -1 else
                   (abs(a) // abs(b)) * (-1 if (a < 0) != (b < 0) else 1),
            "mod": lambda: 0 if b == -1 else
                   a - (abs(a) // abs(b)) * (-1 if (a < 0) != (b < 0) else 1) * b,
        }[op]()
        assert value == reference


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled core not built")
def test_backends_agree_on_corpus(small_corpus):
    program, _ = small_corpus
    per_backend = {}
    for backend in BACKENDS:
        per_backend[backend] = [(tid, o.status, o.steps)
                                for tid, o in run_all_tests(program,
                                                            backend=backend)]
    assert per_backend[BACKENDS[0]] == per_backend[BACKENDS[1]]


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled core not built")
def test_backend_constants_match():
    from mutagrid.minilang import _fastcore, flat
    for name, value in _fastcore.CONSTANTS.items():
        assert getattr(flat, name) == value, name


def test_backend_env_override(monkeypatch):
    from mutagrid.minilang import interp
    monkeypatch.setenv("MUTAGRID_BACKEND", "python")
    assert interp.default_backend() == "python"
    monkeypatch.setenv("MUTAGRID_BACKEND", "warp")
    with pytest.raises(ValueError, match="MUTAGRID_BACKEND"):
        interp.default_backend()
    monkeypatch.delenv("MUTAGRID_BACKEND")
    assert interp.default_backend() in ("python", "compiled")
