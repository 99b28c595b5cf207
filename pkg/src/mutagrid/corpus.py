"""Seeded synthetic program corpora for desk-scale experiments.

A corpus is a mini-language program whose shape is controlled by a spec:
class count, a truncated-normal distribution of per-class mutable lines,
test allocation, and mixing rates for the constructs that carry operator
sites.  Generation is deterministic byte-for-byte in the seed.

The manifest records, per class, the mutable-line count and operator-site
counts tallied *while emitting* the code; tests cross-check these against
what the mutation engine later finds, which keeps the two routes
independent.  Test expectations are computed by actually running the
generated functions, so a corpus always passes its own test suite.
"""

import random
from dataclasses import dataclass, field

from .minilang import eval_call, parse_program, run_all_tests
from .minilang.interp import PASSED
from .mutation import (CONDITIONALS_BOUNDARY, INCREMENTS, INVERT_NEGS, MATH,
                       NEGATE_CONDITIONALS, OPERATOR_IDS, RETURN_VALS,
                       VOID_METHOD_CALLS)

# frozen after verifying the scaling, linearity and plateau properties
DEFAULT_CORPUS_SEED = 1811

# step limit used by corpus jobs and benchmarks: far above any legitimate
# test run, small enough that runaway-loop mutants stay on the same cost
# scale as ordinary classes
DEFAULT_JOB_STEP_LIMIT = 20_000

_MAX_CHAIN_DEPTH = 8


@dataclass(frozen=True)
class CorpusSpec:
    seed: int
    class_count: int = 44
    mean_mutable_lines: float = 110.0
    stddev_mutable_lines: float = 40.0
    min_mutable_lines: int = 25
    max_mutable_lines: int = 300
    tests_per_class: int = 3
    total_tests: int | None = None  # overrides tests_per_class when set
    branch_rate: float = 0.35
    loop_rate: float = 0.30
    cross_class_call_rate: float = 0.25
    void_call_rate: float = 0.10

    def validate(self) -> "CorpusSpec":
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")
        if self.total_tests is None:
            if self.tests_per_class < 1:
                raise ValueError("tests_per_class must be >= 1 "
                                 "(a corpus without tests is untestable)")
        elif self.total_tests < 1:
            raise ValueError("total_tests must be >= 1")
        if not (0 < self.min_mutable_lines <= self.max_mutable_lines):
            raise ValueError("mutable-line bounds must satisfy 0 < min <= max")
        for rate in (self.branch_rate, self.loop_rate,
                     self.cross_class_call_rate, self.void_call_rate):
            if not 0 <= rate <= 1:
                raise ValueError("rates must lie in [0, 1]")
        return self

    def to_json(self) -> dict:
        return {"seed": self.seed, "class_count": self.class_count,
                "mean_mutable_lines": self.mean_mutable_lines,
                "stddev_mutable_lines": self.stddev_mutable_lines,
                "min_mutable_lines": self.min_mutable_lines,
                "max_mutable_lines": self.max_mutable_lines,
                "tests_per_class": self.tests_per_class,
                "total_tests": self.total_tests,
                "branch_rate": self.branch_rate, "loop_rate": self.loop_rate,
                "cross_class_call_rate": self.cross_class_call_rate,
                "void_call_rate": self.void_call_rate}

    @classmethod
    def from_json(cls, data: dict) -> "CorpusSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown corpus spec keys: {sorted(unknown)}")
        return cls(**data).validate()


def default_corpus_spec() -> CorpusSpec:
    """The 44-class / 943-test corpus mirroring the main benchmark subject."""
    return CorpusSpec(seed=DEFAULT_CORPUS_SEED, class_count=44,
                      total_tests=943)


@dataclass
class _FnInfo:
    class_name: str
    name: str
    params: list          # [(name, 'int')]
    returns: str          # 'int' | 'bool' | 'void'
    chain_depth: int      # longest call chain rooted here
    interesting_args: list = field(default_factory=list)

    @property
    def qualified(self) -> str:
        return f"{self.class_name}.{self.name}"


class _Emitter:
    """Collects canonical-layout lines and per-line operator sites.

    A line is mutable when it carries at least one operator site; braces,
    blanks, headers and site-free statements are not.
    """

    def __init__(self, cls_sites: dict, cls_mutable: list):
        self.lines = []
        self.indent = 1  # function header level inside a class
        self.cls_sites = cls_sites
        self.cls_mutable = cls_mutable

    def raw(self, text: str):
        self.lines.append("  " * self.indent + text if text else "")

    def stmt(self, text: str, sites: dict | None = None):
        self.raw(text)
        if sites and any(sites.values()):
            self.cls_mutable[0] += 1
            for op, n in sites.items():
                self.cls_sites[op] += n

    def open_block(self):
        self.raw("{")
        self.indent += 1

    def close_block(self):
        self.indent -= 1
        self.raw("}")


def _blank_sites() -> dict:
    return {op: 0 for op in OPERATOR_IDS}


class _ExprBuilder:
    """Random small int expressions with exact per-token site accounting."""

    def __init__(self, rng, registry, cross_call_rate):
        self.rng = rng
        self.registry = registry  # callable int-returning _FnInfo
        self.cross_call_rate = cross_call_rate
        self.called = []          # targets used since last drain

    def drain_called(self) -> list:
        called, self.called = self.called, []
        return called

    def build(self, variables, sites, allow_call=True) -> str:
        rng = self.rng
        terms = 1 if rng.random() < 0.6 else 2
        parts = []
        for i in range(terms):
            parts.append(self._term(variables, sites, allow_call and i == 0))
            if i < terms - 1:
                sites[MATH] += 1
                parts.append(rng.choice(["+", "-", "+", "*"]))
        return " ".join(parts)

    def _term(self, variables, sites, allow_call) -> str:
        rng = self.rng
        if allow_call and self.registry and rng.random() < self.cross_call_rate:
            return self._call(variables)
        roll = rng.random()
        if roll < 0.10:
            sites[INVERT_NEGS] += 1
            return f"-{rng.choice(variables)}"
        if roll < 0.55:
            return rng.choice(variables)
        op = rng.choice(["*", "+", "-", "%", "/"])
        sites[MATH] += 1
        left = rng.choice(variables)
        if op in ("%", "/"):
            return f"{left} {op} {rng.randint(2, 9)}"  # nonzero divisors only
        return f"{left} {op} {rng.randint(1, 9)}"

    def _call(self, variables) -> str:
        rng = self.rng
        target = rng.choice(self.registry)
        self.called.append(target)
        args = [rng.choice(variables) if rng.random() < 0.6
                else str(rng.randint(1, 9))
                for _ in target.params]
        return f"{target.qualified}({', '.join(args)})"


class _CorpusBuilder:
    def __init__(self, spec: CorpusSpec):
        self.spec = spec.validate()
        self.rng = random.Random(spec.seed)
        self.class_names = [f"C{i}" for i in range(spec.class_count)]
        self.int_registry = []    # callable int functions (chain depth capped)
        self.void_registry = []
        self.manifest_classes = []
        self.class_functions = []  # per class: list of (_FnInfo, lines)
        self.class_tests = []      # per class: list of line blocks

    def tests_for_class(self, index: int) -> int:
        spec = self.spec
        if spec.total_tests is None:
            return spec.tests_per_class
        base, remainder = divmod(spec.total_tests, spec.class_count)
        return base + (1 if index < remainder else 0)

    # --- classes -------------------------------------------------------

    def build_class(self, index: int):
        rng = self.rng
        spec = self.spec
        cls = self.class_names[index]
        target = max(spec.min_mutable_lines,
                     min(spec.max_mutable_lines,
                         round(rng.gauss(spec.mean_mutable_lines,
                                         spec.stddev_mutable_lines))))
        sites = _blank_sites()
        mutable = [0]
        functions = []
        fn_counter = 0
        helper_counter = 0
        while mutable[0] < target:
            if fn_counter > 0 and rng.random() < 0.12:
                info, lines = self._void_helper(cls, f"h{helper_counter}",
                                                sites, mutable)
                helper_counter += 1
            else:
                info, lines = self._function(cls, f"f{fn_counter}",
                                             sites, mutable)
                fn_counter += 1
            functions.append((info, lines))
        self.class_functions.append(functions)
        self.manifest_classes.append({
            "name": cls, "target_mutable_lines": target,
            "mutable_lines": mutable[0], "operator_sites": sites,
            "functions": len(functions), "tests": self.tests_for_class(index)})

    # --- functions -----------------------------------------------------

    def _function(self, cls, name, sites, mutable):
        rng = self.rng
        emitter = _Emitter(sites, mutable)
        exprs = _ExprBuilder(rng, list(self.int_registry),
                             self.spec.cross_class_call_rate)

        nparams = rng.randint(1, 3)
        params = [(pname, "int") for pname in ("a", "b", "c")[:nparams]]
        returns = "bool" if rng.random() < 0.15 else "int"
        info = _FnInfo(class_name=cls, name=name, params=params,
                       returns=returns, chain_depth=1)

        head = ", ".join(f"{n}: {t}" for n, t in params)
        emitter.raw(f"fn {name}({head}) -> {returns}")
        emitter.open_block()
        if returns == "bool":
            self._bool_body(emitter, exprs, info)
        else:
            self._int_body(emitter, exprs, info)
        emitter.close_block()

        depth = 1
        for target in exprs.drain_called():
            depth = max(depth, target.chain_depth + 1)
        info.chain_depth = depth
        if returns == "int" and depth < _MAX_CHAIN_DEPTH:
            self.int_registry.append(info)
        return info, emitter.lines

    def _void_helper(self, cls, name, sites, mutable):
        rng = self.rng
        emitter = _Emitter(sites, mutable)
        emitter.raw(f"fn {name}(a: int)")
        emitter.open_block()
        inner = _blank_sites()
        inner[MATH] += 1
        emitter.stmt(f"let v0 = a {rng.choice(['+', '*'])} {rng.randint(1, 9)};",
                     inner)
        emitter.close_block()
        info = _FnInfo(class_name=cls, name=name, params=[("a", "int")],
                       returns="void", chain_depth=1)
        self.void_registry.append(info)
        return info, emitter.lines

    def _int_body(self, emitter, exprs, info):
        rng = self.rng
        spec = self.spec
        variables = [p for p, _ in info.params]
        locals_count = 0

        def new_local(init, sites):
            nonlocal locals_count
            name = f"v{locals_count}"
            locals_count += 1
            emitter.stmt(f"let {name} = {init};", sites)
            variables.append(name)
            return name

        sites = _blank_sites()
        acc = new_local(exprs.build(variables, sites), sites)

        for _ in range(rng.randint(2, 4)):
            roll = rng.random()
            if roll < spec.branch_rate:
                self._branch(emitter, exprs, variables, acc, info)
            elif roll < spec.branch_rate + spec.loop_rate:
                self._loop(emitter, exprs, variables, acc, new_local)
            elif (roll < spec.branch_rate + spec.loop_rate + spec.void_call_rate
                  and self.void_registry):
                self._void_call(emitter)
            elif rng.random() < 0.5 and locals_count < 7:
                sites = _blank_sites()
                new_local(exprs.build(variables, sites), sites)
            else:
                sites = _blank_sites()
                sites[INCREMENTS] += 1
                text = exprs.build(variables, sites, allow_call=False)
                emitter.stmt(f"{acc} {rng.choice(['+=', '-='])} {text};", sites)

        sites = _blank_sites()
        sites[RETURN_VALS] += 1
        emitter.stmt(f"return {acc};", sites)

    def _bool_body(self, emitter, exprs, info):
        rng = self.rng
        variables = [p for p, _ in info.params]
        sites = _blank_sites()
        left = rng.choice(variables)
        cmp_op = rng.choice(["<", "<=", ">", ">="])
        threshold = rng.randint(2, 12)
        sites[CONDITIONALS_BOUNDARY] += 1
        sites[NEGATE_CONDITIONALS] += 1
        clause = f"{left} {cmp_op} {threshold}"
        if len(variables) > 1 and rng.random() < 0.5:
            other = rng.choice([v for v in variables if v != left])
            sites[NEGATE_CONDITIONALS] += 1
            clause = f"{clause} {rng.choice(['&&', '||'])} {other} != {rng.randint(0, 9)}"
        sites[RETURN_VALS] += 1
        emitter.stmt(f"return {clause};", sites)
        info.interesting_args.append(self._args_with(info, left, threshold))

    def _branch(self, emitter, exprs, variables, acc, info):
        rng = self.rng
        sites = _blank_sites()
        subject = rng.choice(variables)
        threshold = rng.randint(2, 12)
        sites[CONDITIONALS_BOUNDARY] += 1
        sites[NEGATE_CONDITIONALS] += 1
        emitter.stmt(f"if ({subject} {rng.choice(['<', '<=', '>', '>='])} "
                     f"{threshold})", sites)
        emitter.open_block()
        inner = _blank_sites()
        inner[INCREMENTS] += 1
        emitter.stmt(f"{acc} += {exprs.build(variables, inner, allow_call=False)};",
                     inner)
        emitter.close_block()
        if rng.random() < 0.5:
            emitter.raw("else")
            emitter.open_block()
            inner = _blank_sites()
            inner[INCREMENTS] += 1
            emitter.stmt(f"{acc} -= {exprs.build(variables, inner, allow_call=False)};",
                         inner)
            emitter.close_block()
        if subject in [p for p, _ in info.params]:
            info.interesting_args.append(
                self._args_with(info, subject, threshold))

    def _loop(self, emitter, exprs, variables, acc, new_local):
        rng = self.rng
        counter = new_local("0", None)
        bound = rng.randint(2, 5)
        sites = _blank_sites()
        sites[CONDITIONALS_BOUNDARY] += 1
        sites[NEGATE_CONDITIONALS] += 1
        emitter.stmt(f"while ({counter} < {bound})", sites)
        emitter.open_block()
        inner = _blank_sites()
        inner[INCREMENTS] += 1
        emitter.stmt(f"{counter} += 1;", inner)
        inner = _blank_sites()
        inner[INCREMENTS] += 1
        inner[MATH] += 1
        emitter.stmt(f"{acc} += {counter} * {rng.randint(1, 5)};", inner)
        emitter.close_block()

    def _void_call(self, emitter):
        rng = self.rng
        target = rng.choice(self.void_registry)
        args = ", ".join(str(rng.randint(1, 9)) for _ in target.params)
        sites = _blank_sites()
        sites[VOID_METHOD_CALLS] += 1
        emitter.stmt(f"{target.qualified}({args});", sites)

    def _args_with(self, info, param_name, value) -> tuple:
        return tuple(value if pname == param_name else self.rng.randint(1, 9)
                     for pname, _ in info.params)

    # --- tests ---------------------------------------------------------

    def build_tests(self, testless_program):
        rng = self.rng
        for index, functions in enumerate(self.class_functions):
            targets = [info for info, _ in functions if info.returns != "void"]
            blocks = []
            for t in range(self.tests_for_class(index)):
                lines = ["  " + f"test fn t{t}()", "  {"]
                n_asserts = rng.randint(2, 3)
                for a in range(n_asserts):
                    info = targets[(t * n_asserts + a) % len(targets)]
                    lines.append("    " + self._assert_for(info, testless_program))
                lines.append("  }")
                blocks.append(lines)
            self.class_tests.append(blocks)

    def _assert_for(self, info, program) -> str:
        rng = self.rng
        for _ in range(12):
            if info.interesting_args and rng.random() < 0.6:
                args = rng.choice(info.interesting_args)
            else:
                args = tuple(rng.randint(1, 9) for _ in info.params)
            outcome, value = eval_call(program, info.qualified, args,
                                       step_limit=200_000)
            if outcome.status != PASSED:
                continue
            if info.returns == "int" and abs(value) > 2**62:
                continue
            call = f"{info.qualified}({', '.join(str(a) for a in args)})"
            if info.returns == "bool":
                return f"assert {call};" if value else f"assert !{call};"
            return f"assert {call} == {value};"
        raise AssertionError(f"could not build a passing assert for "
                             f"{info.qualified}")

    # --- assembly ------------------------------------------------------

    def render(self, with_tests: bool) -> str:
        out = []
        for index, cls in enumerate(self.class_names):
            if out:
                out.append("")
            out.append(f"class {cls}")
            out.append("{")
            chunks = [lines for _, lines in self.class_functions[index]]
            if with_tests:
                chunks = chunks + self.class_tests[index]
            for i, lines in enumerate(chunks):
                if i:
                    out.append("")
                out.extend(lines)
            out.append("}")
        return "\n".join(out) + "\n"


def generate_corpus(spec: CorpusSpec):
    """Build (program, manifest) for a corpus spec; byte-deterministic."""
    builder = _CorpusBuilder(spec)
    for index in range(spec.class_count):
        builder.build_class(index)

    testless = parse_program(builder.render(with_tests=False))
    builder.build_tests(testless)
    text = builder.render(with_tests=True)
    program = parse_program(text)

    if program.canonical.text != text:
        raise AssertionError("generated corpus is not in canonical form")
    failures = [(tid, out.status) for tid, out in run_all_tests(program)
                if out.status != PASSED]
    if failures:
        raise AssertionError(f"generated corpus fails its own tests: {failures}")

    totals = _blank_sites()
    for entry in builder.manifest_classes:
        for op, n in entry["operator_sites"].items():
            totals[op] += n
    manifest = {
        "spec": spec.to_json(),
        "classes": builder.manifest_classes,
        "totals": {"mutable_lines": sum(e["mutable_lines"]
                                        for e in builder.manifest_classes),
                   "operator_sites": totals,
                   "mutants": sum(totals.values()),
                   "tests": len(program.tests),
                   "classes": spec.class_count},
    }
    return program, manifest


def uniform_fixture(functions: int = 96):
    """A program whose mutants all cost the same to execute.

    Identical straight-line functions and one test that folds every result
    into an accumulator checked by a single final assert: any mutant makes
    the final sum wrong, so every mutant is killed by that one test at
    near-identical step cost (the full sweep), which makes equal-count
    mutant chunks equal-cost.
    """
    lines = ["class Grid", "{"]
    for k in range(functions):
        if k:
            lines.append("")
        lines += [f"  fn f{k}(a: int, b: int) -> int", "  {",
                  "    return a + b;", "  }"]
    lines += ["", "  test fn probe()", "  {", "    let s = 0;"]
    for k in range(functions):
        lines.append(f"    s += Grid.f{k}(2, 3);")
    lines += [f"    assert s == {5 * functions};", "  }", "}"]
    return parse_program("\n".join(lines) + "\n")
