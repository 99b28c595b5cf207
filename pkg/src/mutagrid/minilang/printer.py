"""Canonical pretty-printer.

The canonical form puts one statement per line with braces on their own
lines; it is the reference layout for "source lines" in the metrics (a
class's mutable-line count is defined against this form) and the broadcast
artifact bytes.  Printing then re-parsing yields a structurally identical
program with identical node ids.
"""

from dataclasses import dataclass

from . import ast

_PRECEDENCE = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4,
               ">": 4, ">=": 4, "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_PRIMARY = 9
_UNARY = 7


def _prec(node) -> int:
    if node.kind == ast.BINARY_OP:
        return _PRECEDENCE[node.op]
    if node.kind in (ast.UNARY_NEG, ast.LOGICAL_NOT):
        return _UNARY
    return _PRIMARY


def expr_to_text(node) -> str:
    k = node.kind
    if k == ast.LITERAL:
        if node.is_bool:
            return "true" if node.value else "false"
        return str(node.value)
    if k == ast.VARIABLE:
        return node.name
    if k == ast.UNARY_NEG:
        return "-" + _wrap_unless_primary(node.operand)
    if k == ast.LOGICAL_NOT:
        return "!" + _wrap_unless_primary(node.operand)
    if k == ast.BINARY_OP:
        left = expr_to_text(node.left)
        if _prec(node.left) < _prec(node):
            left = f"({left})"
        right = expr_to_text(node.right)
        if _prec(node.right) <= _prec(node):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if k == ast.CALL:
        args = ", ".join(expr_to_text(a) for a in node.args)
        return f"{node.class_name}.{node.fn_name}({args})"
    raise AssertionError(f"not an expression: {k}")


def _wrap_unless_primary(node) -> str:
    text = expr_to_text(node)
    return text if _prec(node) == _PRIMARY else f"({text})"


@dataclass
class CanonicalText:
    text: str
    node_line: dict       # node_id -> 1-based line in `text`
    class_lines: dict     # class name -> (first, last) line
    function_lines: dict  # "Class.fn" -> (first, last) line


class _Printer:
    def __init__(self):
        self.lines = []
        self.indent = 0
        self.node_line = {}
        self.class_lines = {}
        self.function_lines = {}

    def emit(self, text: str) -> int:
        self.lines.append("  " * self.indent + text if text else "")
        return len(self.lines)

    def _map_exprs(self, node, line):
        self.node_line[node.node_id] = line
        for child in node.children():
            self._map_exprs(child, line)

    def print_program(self, classes) -> CanonicalText:
        for i, cls in enumerate(classes):
            if i:
                self.emit("")
            first = self.emit(f"class {cls.name}")
            self.emit("{")
            self.indent += 1
            for j, fn in enumerate(cls.functions):
                if j:
                    self.emit("")
                self._function(cls, fn)
            self.indent -= 1
            last = self.emit("}")
            self.class_lines[cls.name] = (first, last)
        return CanonicalText(text="\n".join(self.lines) + "\n",
                             node_line=self.node_line,
                             class_lines=self.class_lines,
                             function_lines=self.function_lines)

    def _function(self, cls, fn):
        params = ", ".join(f"{n}: {t}" for n, t in fn.params)
        head = "test fn" if fn.is_test else "fn"
        arrow = f" -> {fn.return_type}" if fn.return_type != ast.VOID else ""
        first = self.emit(f"{head} {fn.name}({params}){arrow}")
        self._block(fn.body)
        self.function_lines[f"{cls.name}.{fn.name}"] = (first, len(self.lines))

    def _block(self, body):
        self.emit("{")
        self.indent += 1
        for stmt in body:
            self._statement(stmt)
        self.indent -= 1
        self.emit("}")

    def _statement(self, stmt):
        k = stmt.kind
        if k == ast.LET:
            line = self.emit(f"let {stmt.name} = {expr_to_text(stmt.value)};")
        elif k == ast.ASSIGNMENT:
            line = self.emit(f"{stmt.name} = {expr_to_text(stmt.value)};")
        elif k == ast.COMPOUND_ASSIGNMENT:
            line = self.emit(f"{stmt.name} {stmt.op} {expr_to_text(stmt.value)};")
        elif k == ast.RETURN:
            if stmt.value is None:
                line = self.emit("return;")
            else:
                line = self.emit(f"return {expr_to_text(stmt.value)};")
        elif k == ast.ASSERT:
            line = self.emit(f"assert {expr_to_text(stmt.value)};")
        elif k == ast.EXPRESSION_STATEMENT:
            line = self.emit(f"{expr_to_text(stmt.call)};")
        elif k == ast.IF:
            self._if_chain(stmt, leader="if")
            return
        elif k == ast.WHILE:
            line = self.emit(f"while ({expr_to_text(stmt.cond)})")
            self.node_line[stmt.node_id] = line
            self._map_exprs(stmt.cond, line)
            self._block(stmt.body)
            return
        else:
            raise AssertionError(f"not a statement: {k}")
        self._map_exprs(stmt, line)

    def _if_chain(self, stmt, leader):
        line = self.emit(f"{leader} ({expr_to_text(stmt.cond)})")
        self.node_line[stmt.node_id] = line
        self._map_exprs(stmt.cond, line)
        self._block(stmt.then_body)
        if not stmt.else_body:
            return
        if len(stmt.else_body) == 1 and stmt.else_body[0].kind == ast.IF:
            self._if_chain(stmt.else_body[0], leader="else if")
        else:
            self.emit("else")
            self._block(stmt.else_body)


def print_program(classes) -> CanonicalText:
    return _Printer().print_program(classes)
