"""Execution API over the flat program, with backend selection.

The compiled core (``_fastcore``, Cython) is used when importable; the
pure-Python core is the fallback.  ``MUTAGRID_BACKEND=python|compiled``
forces a choice.  Both cores implement the same contract and are tested
for exact agreement on statuses, step counts and return values.
"""

import os
from dataclasses import dataclass

from . import _pycore
from .errors import MiniLangError
from .flat import S_ASSERT, S_DIVZERO, S_OK, S_STACK, S_STEPLIMIT

try:
    from . import _fastcore
except ImportError:
    _fastcore = None

DEFAULT_STEP_LIMIT = 1_000_000

PASSED = "passed"
ASSERTION_FAILED = "assertion-failed"
RUNTIME_ERROR = "runtime-error"
STEP_LIMIT_EXCEEDED = "step-limit-exceeded"

_BACKENDS = {"python": _pycore}
if _fastcore is not None:
    _BACKENDS["compiled"] = _fastcore


def default_backend() -> str:
    forced = os.environ.get("MUTAGRID_BACKEND")
    if forced:
        if forced not in ("python", "compiled"):
            raise ValueError(f"MUTAGRID_BACKEND must be 'python' or 'compiled', "
                             f"got {forced!r}")
        if forced == "compiled" and _fastcore is None:
            raise RuntimeError("MUTAGRID_BACKEND=compiled but the compiled "
                               "core is not built")
        return forced
    return "compiled" if _fastcore is not None else "python"


def available_backends() -> tuple:
    return tuple(sorted(_BACKENDS))


def _core(backend: str | None):
    name = backend or default_backend()
    try:
        return name, _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r} "
                         f"(available: {available_backends()})") from None


@dataclass
class ExecutionOutcome:
    status: str
    steps: int
    failed_assertion: tuple | None = None  # (byte offset, length)
    detail: str | None = None

    def to_json(self) -> dict:
        return {"status": self.status, "steps": self.steps,
                "failed_assertion": self.failed_assertion,
                "detail": self.detail}


def _prepared(flat, backend: str | None):
    name, core = _core(backend)
    handle = flat._prepared.get(name)
    if handle is None:
        handle = core.prepare(flat)
        flat._prepared[name] = handle
    return core, handle


def run_flat(flat, fn_index: int, step_limit: int, args=(), backend=None):
    """Raw core call: (status_code, steps, fail_node, retval)."""
    core, handle = _prepared(flat, backend)
    return core.run(handle, fn_index, step_limit, tuple(args))


def run_many_flat(flat, fn_indices, step_limit: int, stop_on_fail: bool,
                  backend=None) -> list:
    """Batched zero-arg runs in the core: [(status_code, steps)] executed."""
    core, handle = _prepared(flat, backend)
    return core.run_many(handle, fn_indices, step_limit, stop_on_fail)


def _outcome(program, status, steps, fail_node) -> ExecutionOutcome:
    if status == S_OK:
        return ExecutionOutcome(PASSED, steps)
    if status == S_ASSERT:
        node = program.nodes[fail_node] if 0 <= fail_node < len(program.nodes) else None
        span = (node.start, node.length) if node is not None else None
        return ExecutionOutcome(ASSERTION_FAILED, steps, failed_assertion=span)
    if status == S_DIVZERO:
        return ExecutionOutcome(RUNTIME_ERROR, steps, detail="division or modulo by zero")
    if status == S_STACK:
        return ExecutionOutcome(RUNTIME_ERROR, steps, detail="call depth limit exceeded")
    if status == S_STEPLIMIT:
        return ExecutionOutcome(STEP_LIMIT_EXCEEDED, steps)
    raise AssertionError(f"unknown status {status}")


def run_function(program, fn_ref, step_limit: int = DEFAULT_STEP_LIMIT,
                 flat=None, backend=None) -> ExecutionOutcome:
    """Run one zero-argument function (typically a test) to an outcome.

    ``flat`` may be a mutated flat form of the same program; spans reported
    for failures are resolved against the original program's nodes.
    """
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    fn_index = program.function_index(fn_ref)
    if program.functions[fn_index].params:
        raise MiniLangError(
            f"{program.qualified_name(fn_index)} takes parameters; "
            "use eval_call for direct invocation")
    status, steps, fail_node, _ = run_flat(flat or program.flat, fn_index,
                                           step_limit, (), backend)
    return _outcome(program, status, steps, fail_node)


def run_all_tests(program, tests=None, step_limit: int = DEFAULT_STEP_LIMIT,
                  flat=None, backend=None) -> list:
    """Run tests in ascending test-id order; returns [(test_id, outcome)].

    ``tests`` is a list of test ids or qualified names; defaults to all
    tests.  Failures are data, not exceptions: the caller decides whether
    a non-passing baseline aborts the analysis.
    """
    ids = normalize_test_ids(program, tests)
    if not ids:
        raise MiniLangError("program has no test functions")
    results = []
    for tid in ids:
        fn_index = program.tests[tid]
        status, steps, fail_node, _ = run_flat(flat or program.flat, fn_index,
                                               step_limit, (), backend)
        results.append((tid, _outcome(program, status, steps, fail_node)))
    return results


def normalize_test_ids(program, tests=None) -> list:
    if tests is None:
        return list(range(len(program.tests)))
    ids = []
    for ref in tests:
        if isinstance(ref, int):
            if not 0 <= ref < len(program.tests):
                raise MiniLangError(f"no test with id {ref}")
            ids.append(ref)
        else:
            tid = program.test_id_by_name.get(ref)
            if tid is None:
                raise MiniLangError(f"unknown test {ref!r}")
            ids.append(tid)
    return sorted(set(ids))


def eval_call(program, fn_ref, args=(), step_limit: int = DEFAULT_STEP_LIMIT,
              flat=None, backend=None):
    """Invoke a function with int/bool arguments; returns (outcome, value).

    The value is an int (bools come back as 0/1); it is None unless the
    outcome is `passed`.
    """
    fn_index = program.function_index(fn_ref)
    fn = program.functions[fn_index]
    if len(args) != len(fn.params):
        raise MiniLangError(
            f"{program.qualified_name(fn_index)} expects {len(fn.params)} "
            f"arguments, got {len(args)}")
    status, steps, fail_node, retval = run_flat(flat or program.flat, fn_index,
                                                step_limit, args, backend)
    outcome = _outcome(program, status, steps, fail_node)
    return outcome, (retval if status == S_OK else None)
