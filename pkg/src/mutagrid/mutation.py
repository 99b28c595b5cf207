"""Mutant generation, application, execution and scoring.

Seven operators, one mutant per (node, operator) match.  Mutant ids are
ranks in the canonical whole-program enumeration (node id order, then
operator order), so generating for any subset of classes/operators yields
a sub-sequence of the full catalog: partitions built from disjoint subsets
are disjoint and their union is exactly the full generation.

Execution patches the flattened program directly (no re-parse);
``apply_mutant`` is the slow, text-level route that splices the mutated
snippet into the source and re-parses, used as an independent oracle for
the patch path.
"""

import base64
from dataclasses import dataclass, field
from math import inf

from .minilang import ast
from .minilang.errors import MiniLangError, ResolutionError
from .minilang.flat import OP_CODE
from .minilang.interp import (DEFAULT_STEP_LIMIT, PASSED, normalize_test_ids,
                              run_many_flat)
from .minilang.printer import _PRIMARY, _prec
from .minilang.program import SourceProgram

MATH = "MATH"
INVERT_NEGS = "INVERT_NEGS"
RETURN_VALS = "RETURN_VALS"
CONDITIONALS_BOUNDARY = "CONDITIONALS_BOUNDARY"
NEGATE_CONDITIONALS = "NEGATE_CONDITIONALS"
INCREMENTS = "INCREMENTS"
VOID_METHOD_CALLS = "VOID_METHOD_CALLS"

KILLED = "killed"
SURVIVED = "survived"


@dataclass(frozen=True)
class MutationOperator:
    id: str
    description: str


ALL_OPERATORS = (
    MutationOperator(MATH, "swap an arithmetic operator (+ <-> -, * <-> /, % -> *)"),
    MutationOperator(INVERT_NEGS, "remove a unary minus"),
    MutationOperator(RETURN_VALS, "perturb a returned value"),
    MutationOperator(CONDITIONALS_BOUNDARY, "toggle strictness of an order comparison"),
    MutationOperator(NEGATE_CONDITIONALS, "negate a comparison"),
    MutationOperator(INCREMENTS, "swap += and -="),
    MutationOperator(VOID_METHOD_CALLS, "delete a void call statement"),
)

OPERATOR_IDS = tuple(op.id for op in ALL_OPERATORS)
_OPERATOR_INDEX = {op.id: i for i, op in enumerate(ALL_OPERATORS)}

_MATH_MAP = {"+": "-", "-": "+", "*": "/", "/": "*", "%": "*"}
_BOUNDARY_MAP = {"<": "<=", "<=": "<", ">": ">=", ">=": ">"}
_NEGATE_MAP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
_INCREMENTS_MAP = {"+=": "-=", "-=": "+="}


class StaleMutantError(MiniLangError):
    """The mutant does not belong to this program version."""


@dataclass
class Mutant:
    mutant_id: int
    class_name: str
    function_name: str
    node_id: int
    byte_offset: int
    operator: str
    original_snippet: str
    mutated_snippet: str

    def to_json(self) -> dict:
        return {"mutant_id": self.mutant_id, "class_name": self.class_name,
                "function_name": self.function_name, "node_id": self.node_id,
                "byte_offset": self.byte_offset, "operator": self.operator,
                "original_snippet": self.original_snippet,
                "mutated_snippet": self.mutated_snippet}


@dataclass
class MutantStatus:
    mutant_id: int
    verdict: str
    killing_test: int | None
    tests_executed: int
    execution_steps: int

    def to_json(self) -> dict:
        return {"mutant_id": self.mutant_id, "verdict": self.verdict,
                "killing_test": self.killing_test,
                "tests_executed": self.tests_executed,
                "execution_steps": self.execution_steps}

    @classmethod
    def from_json(cls, data: dict) -> "MutantStatus":
        return cls(mutant_id=data["mutant_id"], verdict=data["verdict"],
                   killing_test=data["killing_test"],
                   tests_executed=data["tests_executed"],
                   execution_steps=data["execution_steps"])


@dataclass
class ScorePair:
    killed: int
    live: int

    @property
    def ratio_killed_to_live(self) -> float | None:
        # the k/l form is unbounded and undefined at l=0; kept verbatim
        return None if self.live == 0 else self.killed / self.live

    @property
    def ratio_killed_to_total(self) -> float | None:
        total = self.killed + self.live
        if total == 0:
            return None
        return self.killed / total

    def to_json(self) -> dict:
        return {"killed": self.killed, "live": self.live,
                "ratio_killed_to_live": self.ratio_killed_to_live,
                "ratio_killed_to_total": self.ratio_killed_to_total}


# --- identifier resolution (the "scan" phase) -------------------------------


def resolve_identifiers(program: SourceProgram, class_names, test_names):
    """Map class/test name lists to (ClassDef refs, test ids), in given order."""
    class_refs = []
    for name in class_names:
        cls = program.class_index.get(name)
        if cls is None:
            raise ResolutionError(f"unknown class {name!r}")
        class_refs.append(cls)
    test_ids = []
    for name in test_names:
        entry = program.fn_table.get(name)
        if entry is None:
            raise ResolutionError(f"unknown test {name!r}")
        index, fn = entry
        if not fn.is_test:
            raise ResolutionError(f"{name} is not a test function")
        test_ids.append(program.test_id_by_name[name])
    return class_refs, test_ids


# --- generation --------------------------------------------------------------


def _return_value_kind(program, node) -> str:
    fn_index = int(program.flat.node_fn[node.node_id])
    return program.functions[fn_index].return_type


def applicable_operators(program: SourceProgram, node) -> list:
    """Operator ids applicable to one node, in operator order.

    Nodes inside test functions are never mutation targets.
    """
    fn_index = int(program.flat.node_fn[node.node_id])
    if program.functions[fn_index].is_test:
        return []
    k = node.kind
    found = []
    if k == ast.BINARY_OP:
        if node.op in _MATH_MAP:
            found.append(MATH)
        if node.op in _BOUNDARY_MAP:
            found.append(CONDITIONALS_BOUNDARY)
        if node.op in _NEGATE_MAP:
            found.append(NEGATE_CONDITIONALS)
    elif k == ast.UNARY_NEG:
        found.append(INVERT_NEGS)
    elif k == ast.RETURN:
        if node.value is not None:
            found.append(RETURN_VALS)
    elif k == ast.COMPOUND_ASSIGNMENT:
        found.append(INCREMENTS)
    elif k == ast.EXPRESSION_STATEMENT:
        # the type checker only admits void calls as statements
        found.append(VOID_METHOD_CALLS)
    found.sort(key=_OPERATOR_INDEX.__getitem__)
    return found


def _op_token_splice(program, node, replacement) -> str:
    text = program.source_text
    rel_op = node.op_start - node.start
    rel_end = rel_op + node.op_length
    original = program.snippet(node)
    return original[:rel_op] + replacement + original[rel_end:]


def _mutated_snippet(program, node, operator) -> str:
    if operator == MATH:
        return _op_token_splice(program, node, _MATH_MAP[node.op])
    if operator == CONDITIONALS_BOUNDARY:
        return _op_token_splice(program, node, _BOUNDARY_MAP[node.op])
    if operator == NEGATE_CONDITIONALS:
        return _op_token_splice(program, node, _NEGATE_MAP[node.op])
    if operator == INCREMENTS:
        return _op_token_splice(program, node, _INCREMENTS_MAP[node.op])
    if operator == INVERT_NEGS:
        return program.snippet(node.operand)
    if operator == VOID_METHOD_CALLS:
        return ""
    if operator == RETURN_VALS:
        value = node.value
        expr = program.snippet(value)
        if _return_value_kind(program, node) == ast.INT:
            return f"return {expr} + 1"
        if value.kind == ast.LITERAL:
            return "return false" if value.value else "return true"
        if _prec(value) != _PRIMARY:
            expr = f"({expr})"
        return f"return !{expr}"
    raise ValueError(f"unknown operator {operator!r}")


def mutant_catalog(program: SourceProgram) -> list:
    """Every possible mutant of the program, in canonical order."""
    if program._catalog is None:
        catalog = []
        flat = program.flat
        for node in program.nodes:
            ops = applicable_operators(program, node)
            if not ops:
                continue
            fn_index = int(flat.node_fn[node.node_id])
            class_name = program.fn_class[fn_index]
            fn_name = program.functions[fn_index].name
            for op in ops:
                catalog.append(Mutant(
                    mutant_id=len(catalog), class_name=class_name,
                    function_name=fn_name, node_id=node.node_id,
                    byte_offset=node.start, operator=op,
                    original_snippet=program.snippet(node),
                    mutated_snippet=_mutated_snippet(program, node, op)))
        program._catalog = catalog
    return program._catalog


def generate_mutants(program: SourceProgram, classes=None, operators=None) -> list:
    """Mutants for the given class/operator subsets, canonical order and ids."""
    catalog = mutant_catalog(program)
    class_set = None if classes is None else set(classes)
    op_set = None if operators is None else set(operators)
    return [m for m in catalog
            if (class_set is None or m.class_name in class_set)
            and (op_set is None or m.operator in op_set)]


# --- application -------------------------------------------------------------


def _check_mutant(program: SourceProgram, mutant: Mutant):
    if not 0 <= mutant.node_id < len(program.nodes):
        raise StaleMutantError(
            f"mutant {mutant.mutant_id}: node {mutant.node_id} out of range")
    node = program.nodes[mutant.node_id]
    if node.start != mutant.byte_offset:
        raise StaleMutantError(
            f"mutant {mutant.mutant_id}: byte offset {mutant.byte_offset} "
            f"does not match node {mutant.node_id} at {node.start}")
    if mutant.operator not in applicable_operators(program, node):
        raise StaleMutantError(
            f"mutant {mutant.mutant_id}: {mutant.operator} is not applicable "
            f"to node {mutant.node_id}")
    return node


def apply_mutant(program: SourceProgram, mutant: Mutant) -> SourceProgram:
    """Produce the mutated program by splicing text and re-parsing.

    The original program is untouched.  Because the splice only changes
    bytes from the mutation site onward, the mutated node in the new
    program starts at the recorded byte offset.
    """
    node = _check_mutant(program, mutant)
    text = program.source_text
    if mutant.operator == VOID_METHOD_CALLS:
        start, end = node.start, node.start + node.full_length
        replacement = ""
    elif mutant.operator in (MATH, CONDITIONALS_BOUNDARY, NEGATE_CONDITIONALS,
                             INCREMENTS):
        start, end = node.op_start, node.op_start + node.op_length
        replacement = {MATH: _MATH_MAP, CONDITIONALS_BOUNDARY: _BOUNDARY_MAP,
                       NEGATE_CONDITIONALS: _NEGATE_MAP,
                       INCREMENTS: _INCREMENTS_MAP}[mutant.operator][node.op]
    else:
        start, end = node.start, node.start + node.length
        replacement = mutant.mutated_snippet
    return SourceProgram.from_text(text[:start] + replacement + text[end:])


def mutate_flat(program: SourceProgram, mutant: Mutant):
    """Fast path: patch the flattened program in place of a re-parse."""
    node = _check_mutant(program, mutant)
    flat = program.flat
    op = mutant.operator
    if op in (MATH, CONDITIONALS_BOUNDARY, NEGATE_CONDITIONALS, INCREMENTS):
        table = {MATH: _MATH_MAP, CONDITIONALS_BOUNDARY: _BOUNDARY_MAP,
                 NEGATE_CONDITIONALS: _NEGATE_MAP,
                 INCREMENTS: _INCREMENTS_MAP}[op]
        return flat.patched_op(node.node_id, OP_CODE[table[node.op]])
    if op == INVERT_NEGS:
        return flat.patched_splice_out(node.node_id)
    if op == VOID_METHOD_CALLS:
        return flat.patched_nop(node.node_id)
    # RETURN_VALS
    if _return_value_kind(program, node) == ast.INT:
        return flat.patched_return_increment(node.node_id)
    if node.value.kind == ast.LITERAL:
        return flat.patched_bool_flip(node.value.node_id)
    return flat.patched_return_not(node.node_id)


# --- execution ---------------------------------------------------------------


def execute_mutant(program: SourceProgram, mutant: Mutant, tests=None,
                   step_limit: int = DEFAULT_STEP_LIMIT, exhaustive: bool = False,
                   backend=None, mutated_flat=None) -> MutantStatus:
    """Run tests against one mutant in ascending test-id order.

    Stops at the first non-passing outcome unless ``exhaustive`` (the slow
    oracle mode, which runs every test and must reach the same verdict).
    Any of assertion-failed / runtime-error / step-limit-exceeded kills.
    """
    test_ids = normalize_test_ids(program, tests)
    if mutated_flat is None:
        mutated_flat = mutate_flat(program, mutant)
    fn_indices = [program.tests[tid] for tid in test_ids]
    results = run_many_flat(mutated_flat, fn_indices, step_limit,
                            stop_on_fail=not exhaustive, backend=backend)
    killing_test = None
    total_steps = 0
    for tid, (status, steps) in zip(test_ids, results):
        total_steps += steps
        if status != 0 and killing_test is None:
            killing_test = tid
    executed = len(results)
    verdict = KILLED if killing_test is not None else SURVIVED
    return MutantStatus(mutant_id=mutant.mutant_id, verdict=verdict,
                        killing_test=killing_test, tests_executed=executed,
                        execution_steps=total_steps)


def mutation_score(statuses) -> ScorePair:
    """k = killed count, l = survivors; exposes both k/l and k/(k+l)."""
    statuses = list(statuses)
    if not statuses:
        raise ValueError("mutation_score requires at least one mutant status")
    killed = sum(1 for s in statuses if s.verdict == KILLED)
    return ScorePair(killed=killed, live=len(statuses) - killed)


# --- dependency analysis (PiT's auxiliary phase) ----------------------------


@dataclass
class DependencyMatrix:
    classes: list
    distance: list  # row-major; math.inf where unreachable

    def get(self, a: str, b: str) -> float:
        i = self.classes.index(a)
        j = self.classes.index(b)
        return self.distance[i][j]

    def to_json(self) -> dict:
        return {"classes": self.classes,
                "distance": [[None if d == inf else d for d in row]
                             for row in self.distance]}


def dependency_distance(program: SourceProgram) -> DependencyMatrix:
    """Directed class-level call graph, BFS hop counts; self distance 0."""
    cached = getattr(program, "_depmatrix", None)
    if cached is not None:
        return cached
    names = [cls.name for cls in program.classes]
    index = {name: i for i, name in enumerate(names)}
    edges = [set() for _ in names]
    for node in program.nodes:
        if node.kind != ast.CALL:
            continue
        caller = index[program.class_of_node(node.node_id)]
        callee = index[program.fn_class[node.fn_index]]
        if caller != callee:
            edges[caller].add(callee)
    matrix = []
    for start in range(len(names)):
        dist = [inf] * len(names)
        dist[start] = 0
        frontier = [start]
        hops = 0
        while frontier:
            hops += 1
            nxt = []
            for node_i in frontier:
                for dest in edges[node_i]:
                    if dist[dest] == inf:
                        dist[dest] = hops
                        nxt.append(dest)
            frontier = nxt
        matrix.append(dist)
    result = DependencyMatrix(classes=names, distance=matrix)
    program._depmatrix = result
    return result


# --- mutable lines -----------------------------------------------------------


def mutable_lines(program: SourceProgram, class_name: str) -> int:
    """Canonical-form lines of the class holding >= 1 operator-applicable node.

    Method header, brace and blank lines never contain applicable nodes, so
    the count naturally excludes them.
    """
    if class_name not in program.class_index:
        raise ResolutionError(f"unknown class {class_name!r}")
    node_line = program.canonical.node_line
    lines = set()
    flat = program.flat
    for node in program.nodes:
        if program.fn_class[int(flat.node_fn[node.node_id])] != class_name:
            continue
        if applicable_operators(program, node):
            lines.add(node_line[node.node_id])
    return len(lines)


# --- compact wire encoding ---------------------------------------------------

ENCODING_NAME = "leb128-op-v1"


def _write_varint(out: bytearray, value: int):
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _read_varint(data: bytes, pos: int) -> tuple:
    result = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise ValueError("truncated varint")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7


def encode_mutant_list(mutants, program_hash: str) -> dict:
    """Compact form: per mutant a varint node id plus one operator byte."""
    out = bytearray()
    for m in mutants:
        _write_varint(out, m.node_id)
        out.append(_OPERATOR_INDEX[m.operator])
    return {"encoding": ENCODING_NAME, "count": len(mutants),
            "program_hash": program_hash,
            "data": base64.b64encode(bytes(out)).decode("ascii")}


def decode_mutant_list(payload: dict, program: SourceProgram) -> list:
    """Rehydrate mutants against this program; rejects version skew."""
    if payload.get("encoding") != ENCODING_NAME:
        raise ValueError(f"unknown mutant encoding {payload.get('encoding')!r}")
    if payload.get("program_hash") != program.content_hash:
        raise StaleMutantError(
            "mutant list was generated from a different program version")
    data = base64.b64decode(payload["data"])
    by_key = {(m.node_id, m.operator): m for m in mutant_catalog(program)}
    mutants = []
    pos = 0
    for _ in range(payload["count"]):
        node_id, pos = _read_varint(data, pos)
        if pos >= len(data):
            raise ValueError("truncated mutant list")
        op_index = data[pos]
        pos += 1
        if op_index >= len(OPERATOR_IDS):
            raise ValueError(f"unknown operator code {op_index}")
        key = (node_id, OPERATOR_IDS[op_index])
        mutant = by_key.get(key)
        if mutant is None:
            raise StaleMutantError(
                f"no mutant at node {node_id} for {OPERATOR_IDS[op_index]}")
        mutants.append(mutant)
    if pos != len(data):
        raise ValueError("trailing bytes in mutant list")
    return mutants
