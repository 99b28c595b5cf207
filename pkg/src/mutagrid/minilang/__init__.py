"""The embedded mini-language: parsing, printing and deterministic execution.

Programs are collections of classes holding functions and test functions.
Execution cost is measured in interpreter steps (one per evaluated node),
which is the virtual-time currency used by the rest of the toolkit.
"""

from .ast import ClassDef, FunctionDef, Node
from .errors import MiniLangError, ParseError, ResolutionError, TypeCheckError
from .interp import (ASSERTION_FAILED, DEFAULT_STEP_LIMIT, PASSED,
                     RUNTIME_ERROR, STEP_LIMIT_EXCEEDED, ExecutionOutcome,
                     available_backends, default_backend, eval_call,
                     run_all_tests, run_function)
from .printer import expr_to_text, print_program
from .program import SourceProgram


def parse_program(text: str) -> SourceProgram:
    return SourceProgram.from_text(text)


__all__ = [
    "ASSERTION_FAILED", "DEFAULT_STEP_LIMIT", "PASSED", "RUNTIME_ERROR",
    "STEP_LIMIT_EXCEEDED", "ClassDef", "ExecutionOutcome", "FunctionDef",
    "MiniLangError", "Node", "ParseError", "ResolutionError", "SourceProgram",
    "TypeCheckError", "available_backends", "default_backend", "eval_call",
    "expr_to_text", "parse_program", "print_program", "run_all_tests",
    "run_function",
]
