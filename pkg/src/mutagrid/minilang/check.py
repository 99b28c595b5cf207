"""Name resolution and type checking.

Annotates the AST in place: variable/let/assignment nodes get local slot
numbers, calls get a global function index, and each function records how
many local slots it needs.  All rules are total-program: call targets may
be declared later in the file.
"""

from . import ast
from .errors import ResolutionError, TypeCheckError


def check_program(classes: list, fn_table: dict) -> None:
    """``fn_table`` maps "Class.fn" -> (index, FunctionDef)."""
    seen_classes = set()
    for cls in classes:
        if cls.name in seen_classes:
            raise ResolutionError(f"duplicate class name {cls.name!r}", cls.start)
        seen_classes.add(cls.name)
        seen_fns = set()
        for fn in cls.functions:
            if fn.name in seen_fns:
                raise ResolutionError(
                    f"duplicate function name {cls.name}.{fn.name}", fn.start)
            seen_fns.add(fn.name)

    for cls in classes:
        for fn in cls.functions:
            _check_function(cls, fn, fn_table)


def _check_function(cls, fn, fn_table):
    if fn.is_test:
        if fn.params:
            raise TypeCheckError(
                f"test function {cls.name}.{fn.name} must take no parameters",
                fn.start)
        if fn.return_type != ast.VOID:
            raise TypeCheckError(
                f"test function {cls.name}.{fn.name} must return void", fn.start)
    checker = _FunctionChecker(cls, fn, fn_table)
    checker.run()


class _FunctionChecker:
    def __init__(self, cls, fn, fn_table):
        self.cls = cls
        self.fn = fn
        self.fn_table = fn_table
        self.scopes = [{}]  # name -> (slot, type)
        self.nslots = 0

    def run(self):
        for pname, ptype in self.fn.params:
            if pname in self.scopes[0]:
                raise ResolutionError(
                    f"duplicate parameter {pname!r} in {self._qual()}", self.fn.start)
            self.scopes[0][pname] = (self._new_slot(), ptype)
        returns = self._check_body(self.fn.body)
        if self.fn.return_type != ast.VOID and not returns:
            raise TypeCheckError(
                f"function {self._qual()} does not return on every path",
                self.fn.start)
        self.fn.nlocals = self.nslots

    def _qual(self):
        return f"{self.cls.name}.{self.fn.name}"

    def _new_slot(self):
        slot = self.nslots
        self.nslots += 1
        return slot

    def _lookup(self, name, offset):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise ResolutionError(f"unresolved variable {name!r}", offset)

    # returns True when the statement list definitely returns
    def _check_body(self, body) -> bool:
        self.scopes.append({})
        returns = False
        for stmt in body:
            returns = self._check_stmt(stmt) or returns
        self.scopes.pop()
        return returns

    def _check_stmt(self, stmt) -> bool:
        k = stmt.kind
        if k == ast.LET:
            vtype = self._check_expr(stmt.value)
            if stmt.declared_type is not None and stmt.declared_type != vtype:
                raise TypeCheckError(
                    f"let {stmt.name!r} declared {stmt.declared_type} but "
                    f"initialized with {vtype}", stmt.start)
            if stmt.name in self.scopes[-1]:
                raise ResolutionError(
                    f"duplicate variable {stmt.name!r} in scope", stmt.start)
            stmt.slot = self._new_slot()
            self.scopes[-1][stmt.name] = (stmt.slot, vtype)
            return False
        if k == ast.ASSIGNMENT:
            slot, vtype = self._lookup(stmt.name, stmt.start)
            rhs = self._check_expr(stmt.value)
            if rhs != vtype:
                raise TypeCheckError(
                    f"cannot assign {rhs} to {vtype} variable {stmt.name!r}",
                    stmt.start)
            stmt.slot = slot
            return False
        if k == ast.COMPOUND_ASSIGNMENT:
            slot, vtype = self._lookup(stmt.name, stmt.start)
            rhs = self._check_expr(stmt.value)
            if vtype != ast.INT or rhs != ast.INT:
                raise TypeCheckError(
                    f"{stmt.op} requires int operands", stmt.start)
            stmt.slot = slot
            return False
        if k == ast.IF:
            self._expect_type(stmt.cond, ast.BOOL, "if condition")
            then_ret = self._check_body(stmt.then_body)
            else_ret = self._check_body(stmt.else_body) if stmt.else_body else False
            return then_ret and else_ret and bool(stmt.else_body)
        if k == ast.WHILE:
            self._expect_type(stmt.cond, ast.BOOL, "while condition")
            self._check_body(stmt.body)
            return False  # the loop may not run
        if k == ast.RETURN:
            want = self.fn.return_type
            if stmt.value is None:
                if want != ast.VOID:
                    raise TypeCheckError(
                        f"{self._qual()} must return {want}", stmt.start)
            else:
                if want == ast.VOID:
                    raise TypeCheckError(
                        f"void function {self._qual()} cannot return a value",
                        stmt.start)
                got = self._check_expr(stmt.value)
                if got != want:
                    raise TypeCheckError(
                        f"{self._qual()} returns {want}, found {got}", stmt.start)
            return True
        if k == ast.ASSERT:
            if not self.fn.is_test:
                raise TypeCheckError(
                    "assert is only allowed in test functions", stmt.start)
            self._expect_type(stmt.value, ast.BOOL, "assert operand")
            return False
        if k == ast.EXPRESSION_STATEMENT:
            ret = self._check_call(stmt.call)
            if ret != ast.VOID:
                raise TypeCheckError(
                    "only void calls may be used as statements", stmt.start)
            return False
        raise AssertionError(f"unhandled statement kind {k}")

    def _expect_type(self, node, want, what):
        got = self._check_expr(node)
        if got != want:
            raise TypeCheckError(f"{what} must be {want}, found {got}", node.start)

    def _check_expr(self, node) -> str:
        k = node.kind
        if k == ast.LITERAL:
            return ast.BOOL if node.is_bool else ast.INT
        if k == ast.VARIABLE:
            slot, vtype = self._lookup(node.name, node.start)
            node.slot = slot
            node.var_type = vtype
            return vtype
        if k == ast.UNARY_NEG:
            self._expect_type(node.operand, ast.INT, "unary '-' operand")
            return ast.INT
        if k == ast.LOGICAL_NOT:
            self._expect_type(node.operand, ast.BOOL, "'!' operand")
            return ast.BOOL
        if k == ast.BINARY_OP:
            lt = self._check_expr(node.left)
            rt = self._check_expr(node.right)
            op = node.op
            if op in ast.ARITH_OPS:
                if lt != ast.INT or rt != ast.INT:
                    raise TypeCheckError(f"{op!r} requires int operands", node.op_start)
                return ast.INT
            if op in ast.ORDER_OPS:
                if lt != ast.INT or rt != ast.INT:
                    raise TypeCheckError(f"{op!r} requires int operands", node.op_start)
                return ast.BOOL
            if op in ast.EQUALITY_OPS:
                if lt != rt:
                    raise TypeCheckError(
                        f"{op!r} requires operands of the same type", node.op_start)
                return ast.BOOL
            if op in ast.LOGIC_OPS:
                if lt != ast.BOOL or rt != ast.BOOL:
                    raise TypeCheckError(f"{op!r} requires bool operands", node.op_start)
                return ast.BOOL
            raise AssertionError(f"unhandled operator {op}")
        if k == ast.CALL:
            ret = self._check_call(node)
            if ret == ast.VOID:
                raise TypeCheckError(
                    f"void call {node.target} cannot be used as a value", node.start)
            return ret
        raise AssertionError(f"unhandled expression kind {k}")

    def _check_call(self, call) -> str:
        entry = self.fn_table.get(call.target)
        if entry is None:
            raise ResolutionError(
                f"unresolved call target {call.target}", call.start)
        index, target = entry
        if target.is_test:
            raise ResolutionError(
                f"test function {call.target} cannot be called", call.start)
        if len(call.args) != len(target.params):
            raise TypeCheckError(
                f"{call.target} expects {len(target.params)} arguments, "
                f"got {len(call.args)}", call.start)
        for arg, (pname, ptype) in zip(call.args, target.params):
            got = self._check_expr(arg)
            if got != ptype:
                raise TypeCheckError(
                    f"argument {pname!r} of {call.target} must be {ptype}, "
                    f"found {got}", arg.start)
        call.fn_index = index
        call.ret_type = target.return_type
        return target.return_type
