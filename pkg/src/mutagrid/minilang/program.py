"""SourceProgram: a parsed, checked, numbered program ready for analysis."""

import hashlib

from . import ast
from .check import check_program
from .errors import ResolutionError
from .parser import parse_classes
from .printer import CanonicalText, print_program


class SourceProgram:
    """Immutable after construction; safe to share across executions.

    ``nodes[i].node_id == i`` for all statement/expression nodes, numbered
    in pre-order over classes, functions and bodies.  Test functions get
    dense integer test ids in declaration order.
    """

    def __init__(self, classes: list, source_text: str):
        self.classes = classes
        self.source_text = source_text

        self.functions = []       # FunctionDef, global declaration order
        self.fn_class = []        # owning class name per function
        self.fn_table = {}        # "Class.fn" -> (index, FunctionDef)
        self.class_index = {}     # name -> ClassDef
        for cls in classes:
            self.class_index[cls.name] = cls
            for fn in cls.functions:
                idx = len(self.functions)
                self.functions.append(fn)
                self.fn_class.append(cls.name)
                self.fn_table.setdefault(f"{cls.name}.{fn.name}", (idx, fn))

        check_program(classes, self.fn_table)

        self.nodes = []
        for cls in classes:
            for fn in cls.functions:
                for stmt in fn.body:
                    for node in ast.walk(stmt):
                        node.node_id = len(self.nodes)
                        self.nodes.append(node)

        # test ids: dense, declaration order
        self.tests = [i for i, fn in enumerate(self.functions) if fn.is_test]
        self.test_name_by_id = {
            tid: f"{self.fn_class[fi]}.{self.functions[fi].name}"
            for tid, fi in enumerate(self.tests)
        }
        self.test_id_by_name = {v: k for k, v in self.test_name_by_id.items()}

        self._canonical = None
        self._artifact = None
        self._hash = None
        self._flat = None
        self._catalog = None  # filled by mutagrid.mutation

    @classmethod
    def from_text(cls, text: str) -> "SourceProgram":
        return cls(parse_classes(text), text)

    # --- lookups ---

    def function_index(self, ref) -> int:
        """Accepts an int index, "Class.fn", or (class, fn)."""
        if isinstance(ref, int):
            if not 0 <= ref < len(self.functions):
                raise ResolutionError(f"no function with index {ref}")
            return ref
        if isinstance(ref, tuple):
            ref = f"{ref[0]}.{ref[1]}"
        entry = self.fn_table.get(ref)
        if entry is None:
            raise ResolutionError(f"unknown function {ref!r}")
        return entry[0]

    def qualified_name(self, fn_index: int) -> str:
        return f"{self.fn_class[fn_index]}.{self.functions[fn_index].name}"

    def class_of_node(self, node_id: int) -> str:
        fn_index = self.flat.node_fn[node_id]
        return self.fn_class[fn_index]

    # --- canonical form / broadcast artifact ---

    @property
    def canonical(self) -> CanonicalText:
        if self._canonical is None:
            self._canonical = print_program(self.classes)
        return self._canonical

    @property
    def artifact_bytes(self) -> bytes:
        if self._artifact is None:
            self._artifact = self.canonical.text.encode("utf-8")
        return self._artifact

    @property
    def content_hash(self) -> str:
        if self._hash is None:
            self._hash = hashlib.sha256(self.artifact_bytes).hexdigest()
        return self._hash

    @property
    def flat(self):
        if self._flat is None:
            from .flat import flatten
            self._flat = flatten(self)
        return self._flat

    def snippet(self, node) -> str:
        return self.source_text[node.start:node.start + node.length]
