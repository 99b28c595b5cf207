"""Flattened program representation shared by both interpreter backends.

The AST is lowered once into a set of parallel int64 arrays where the array
index of a node equals its ``node_id``.  Mutants are applied as tiny
copy-on-write patches against these arrays (an operator-code change, a
child redirection, a couple of appended nodes, or a statement turned into a
skipped NOP), so executing a mutant never re-parses the program.
"""

import numpy as np

from . import ast

# kind codes
K_LIT_INT = 0
K_LIT_BOOL = 1
K_VAR = 2
K_BINOP = 3
K_NEG = 4
K_NOT = 5
K_CALL = 6
K_LET = 7
K_ASSIGN = 8
K_CASSIGN = 9
K_IF = 10
K_WHILE = 11
K_RETURN = 12
K_EXPRSTMT = 13
K_ASSERT = 14
K_NOP = 15

_KIND_BY_AST = {
    ast.VARIABLE: K_VAR, ast.BINARY_OP: K_BINOP, ast.UNARY_NEG: K_NEG,
    ast.LOGICAL_NOT: K_NOT, ast.CALL: K_CALL, ast.LET: K_LET,
    ast.ASSIGNMENT: K_ASSIGN, ast.COMPOUND_ASSIGNMENT: K_CASSIGN,
    ast.IF: K_IF, ast.WHILE: K_WHILE, ast.RETURN: K_RETURN,
    ast.EXPRESSION_STATEMENT: K_EXPRSTMT, ast.ASSERT: K_ASSERT,
}

# operator codes
OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_MOD = 0, 1, 2, 3, 4
OP_LT, OP_LE, OP_GT, OP_GE, OP_EQ, OP_NE = 5, 6, 7, 8, 9, 10
OP_AND, OP_OR = 11, 12
OP_ADDEQ, OP_SUBEQ = 13, 14

OP_CODE = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "%": OP_MOD,
           "<": OP_LT, "<=": OP_LE, ">": OP_GT, ">=": OP_GE,
           "==": OP_EQ, "!=": OP_NE, "&&": OP_AND, "||": OP_OR,
           "+=": OP_ADDEQ, "-=": OP_SUBEQ}
OP_TEXT = {v: k for k, v in OP_CODE.items()}

# return types
RET_VOID, RET_INT, RET_BOOL = 0, 1, 2
_RET_CODE = {ast.VOID: RET_VOID, ast.INT: RET_INT, ast.BOOL: RET_BOOL}

# execution statuses
S_OK = 0
S_ASSERT = 1
S_DIVZERO = 2
S_STACK = 3
S_STEPLIMIT = 4

MAX_CALL_DEPTH = 64

# parent-reference tags (where a node is referenced from)
PARENT_A, PARENT_B, PARENT_ITEM = 0, 1, 2

_NODE_FIELDS = ("kind", "op", "a", "b", "c", "node_fn",
                "parent_tag", "parent_idx")


class FlatProgram:
    __slots__ = ("kind", "op", "a", "b", "c", "node_fn", "parent_tag",
                 "parent_idx", "block_items", "block_start", "block_len",
                 "fn_body_block", "fn_nparams", "fn_nlocals", "fn_is_test",
                 "fn_ret", "n_nodes", "n_functions", "_prepared", "_lists")

    def __init__(self, **fields):
        for name, value in fields.items():
            setattr(self, name, value)
        self._prepared = {}
        self._lists = {}

    def list_view(self, field: str) -> list:
        """Plain-list view of an array (cached; shared across patches)."""
        view = self._lists.get(field)
        if view is None:
            view = getattr(self, field).tolist()
            self._lists[field] = view
        return view

    def _with(self, **replaced) -> "FlatProgram":
        fields = {name: getattr(self, name) for name in self.__slots__
                  if name not in ("_prepared", "_lists")}
        fields.update(replaced)
        new = FlatProgram(**fields)
        # list views stay valid for arrays we did not replace
        new._lists = {k: v for k, v in self._lists.items() if k not in replaced}
        return new

    # --- mutation patches (each returns a new FlatProgram) ---

    def patched_op(self, node_id: int, new_op: int) -> "FlatProgram":
        op = self.op.copy()
        op[node_id] = new_op
        return self._with(op=op)

    def patched_splice_out(self, node_id: int) -> "FlatProgram":
        """Replace the reference to `node_id` with its single child (field a)."""
        child = int(self.a[node_id])
        tag = int(self.parent_tag[node_id])
        idx = int(self.parent_idx[node_id])
        if tag == PARENT_A:
            a = self.a.copy()
            a[idx] = child
            return self._with(a=a)
        if tag == PARENT_B:
            b = self.b.copy()
            b[idx] = child
            return self._with(b=b)
        items = self.block_items.copy()
        items[idx] = child
        return self._with(block_items=items)

    def patched_nop(self, node_id: int) -> "FlatProgram":
        kind = self.kind.copy()
        kind[node_id] = K_NOP
        return self._with(kind=kind)

    def patched_bool_flip(self, literal_id: int) -> "FlatProgram":
        a = self.a.copy()
        a[literal_id] ^= 1
        return self._with(a=a)

    def _appended(self, new_nodes: list, retarget: tuple) -> "FlatProgram":
        """new_nodes: list of dicts with kind/op/a/b/c; retarget: (node, field_a_value)."""
        n = self.n_nodes
        grown = {}
        for field in _NODE_FIELDS:
            arr = getattr(self, field)
            grown[field] = np.concatenate(
                [arr, np.zeros(len(new_nodes), dtype=np.int64)])
        for offset, spec in enumerate(new_nodes):
            for key, value in spec.items():
                grown[key][n + offset] = value
            grown["node_fn"][n + offset] = self.node_fn[retarget[0]]
        target, value = retarget
        grown["a"][target] = value
        return self._with(n_nodes=n + len(new_nodes), **grown)

    def patched_return_increment(self, return_id: int) -> "FlatProgram":
        """return e  ->  return e + 1 (wrapping)."""
        value = int(self.a[return_id])
        n = self.n_nodes
        return self._appended(
            [{"kind": K_LIT_INT, "a": 1},
             {"kind": K_BINOP, "op": OP_ADD, "a": value, "b": n}],
            retarget=(return_id, n + 1))

    def patched_return_not(self, return_id: int) -> "FlatProgram":
        """return e  ->  return !e (bool-valued returns)."""
        value = int(self.a[return_id])
        n = self.n_nodes
        return self._appended(
            [{"kind": K_NOT, "a": value}],
            retarget=(return_id, n))


def flatten(program) -> FlatProgram:
    nodes = program.nodes
    n = len(nodes)
    kind = np.zeros(n, dtype=np.int64)
    op = np.zeros(n, dtype=np.int64)
    a = np.full(n, -1, dtype=np.int64)
    b = np.full(n, -1, dtype=np.int64)
    c = np.full(n, -1, dtype=np.int64)
    node_fn = np.zeros(n, dtype=np.int64)
    parent_tag = np.zeros(n, dtype=np.int64)
    parent_idx = np.full(n, -1, dtype=np.int64)

    block_items = []
    block_start = []
    block_len = []

    def new_block(stmts) -> int:
        block_id = len(block_start)
        block_start.append(len(block_items))
        block_len.append(len(stmts))
        slots = []
        for stmt in stmts:
            slots.append(len(block_items))
            block_items.append(stmt.node_id)
        for stmt, slot in zip(stmts, slots):
            parent_tag[stmt.node_id] = PARENT_ITEM
            parent_idx[stmt.node_id] = slot
        return block_id

    def set_field(parent, field, child) -> int:
        nid = child.node_id
        parent_tag[nid] = PARENT_A if field == "a" else PARENT_B
        parent_idx[nid] = parent.node_id
        return nid

    def lower(node, fn_index):
        nid = node.node_id
        node_fn[nid] = fn_index
        k = node.kind
        if k == ast.LITERAL:
            kind[nid] = K_LIT_BOOL if node.is_bool else K_LIT_INT
            a[nid] = node.value
            return
        kind[nid] = _KIND_BY_AST[k]
        if k == ast.VARIABLE:
            a[nid] = node.slot
        elif k == ast.BINARY_OP:
            op[nid] = OP_CODE[node.op]
            a[nid] = set_field(node, "a", node.left)
            b[nid] = set_field(node, "b", node.right)
            lower(node.left, fn_index)
            lower(node.right, fn_index)
        elif k in (ast.UNARY_NEG, ast.LOGICAL_NOT):
            a[nid] = set_field(node, "a", node.operand)
            lower(node.operand, fn_index)
        elif k == ast.CALL:
            a[nid] = node.fn_index
            b[nid] = new_block(node.args)
            for arg in node.args:
                lower(arg, fn_index)
        elif k in (ast.LET, ast.ASSIGNMENT, ast.COMPOUND_ASSIGNMENT):
            if k == ast.COMPOUND_ASSIGNMENT:
                op[nid] = OP_CODE[node.op]
            a[nid] = node.slot
            b[nid] = set_field(node, "b", node.value)
            lower(node.value, fn_index)
        elif k == ast.IF:
            a[nid] = set_field(node, "a", node.cond)
            b[nid] = new_block(node.then_body)
            c[nid] = new_block(node.else_body)
            lower(node.cond, fn_index)
            for stmt in node.then_body:
                lower(stmt, fn_index)
            for stmt in node.else_body:
                lower(stmt, fn_index)
        elif k == ast.WHILE:
            a[nid] = set_field(node, "a", node.cond)
            b[nid] = new_block(node.body)
            lower(node.cond, fn_index)
            for stmt in node.body:
                lower(stmt, fn_index)
        elif k == ast.RETURN:
            if node.value is not None:
                a[nid] = set_field(node, "a", node.value)
                lower(node.value, fn_index)
        elif k in (ast.EXPRESSION_STATEMENT, ast.ASSERT):
            child = node.call if k == ast.EXPRESSION_STATEMENT else node.value
            a[nid] = set_field(node, "a", child)
            lower(child, fn_index)
        else:
            raise AssertionError(f"unhandled kind {k}")

    n_functions = len(program.functions)
    fn_body_block = np.zeros(n_functions, dtype=np.int64)
    fn_nparams = np.zeros(n_functions, dtype=np.int64)
    fn_nlocals = np.zeros(n_functions, dtype=np.int64)
    fn_is_test = np.zeros(n_functions, dtype=np.int64)
    fn_ret = np.zeros(n_functions, dtype=np.int64)

    for fn_index, fn in enumerate(program.functions):
        fn_body_block[fn_index] = new_block(fn.body)
        fn_nparams[fn_index] = len(fn.params)
        fn_nlocals[fn_index] = fn.nlocals
        fn_is_test[fn_index] = 1 if fn.is_test else 0
        fn_ret[fn_index] = _RET_CODE[fn.return_type]
        for stmt in fn.body:
            lower(stmt, fn_index)

    return FlatProgram(
        kind=kind, op=op, a=a, b=b, c=c, node_fn=node_fn,
        parent_tag=parent_tag, parent_idx=parent_idx,
        block_items=np.asarray(block_items, dtype=np.int64),
        block_start=np.asarray(block_start, dtype=np.int64),
        block_len=np.asarray(block_len, dtype=np.int64),
        fn_body_block=fn_body_block, fn_nparams=fn_nparams,
        fn_nlocals=fn_nlocals, fn_is_test=fn_is_test, fn_ret=fn_ret,
        n_nodes=n, n_functions=n_functions)
