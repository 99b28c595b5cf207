"""AST node types.

Every node records a byte span into the original source text and, once a
program has been assembled, a dense ``node_id`` assigned in pre-order over
the whole program.  The id is the stable address used by the mutation
machinery; identical text always yields identical ids.
"""

from dataclasses import dataclass, field

# value / return types
INT = "int"
BOOL = "bool"
VOID = "void"

# node kinds
BINARY_OP = "binary-op"
UNARY_NEG = "unary-neg"
LOGICAL_NOT = "logical-not"
LITERAL = "literal"
VARIABLE = "variable"
ASSIGNMENT = "assignment"
COMPOUND_ASSIGNMENT = "compound-assignment"
IF = "if"
WHILE = "while"
RETURN = "return"
CALL = "call"
EXPRESSION_STATEMENT = "expression-statement"
ASSERT = "assert"
LET = "let"

ARITH_OPS = ("+", "-", "*", "/", "%")
ORDER_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("==", "!=")
COMPARE_OPS = ORDER_OPS + EQUALITY_OPS
LOGIC_OPS = ("&&", "||")


@dataclass(eq=False)
class Node:
    start: int
    length: int

    kind = "?"

    def __post_init__(self):
        self.node_id = -1
        # statements: extent including the trailing ';' (== length otherwise)
        self.full_length = self.length

    def children(self) -> tuple["Node", ...]:
        return ()


# --- expressions -----------------------------------------------------------


@dataclass(eq=False)
class Literal(Node):
    value: int  # bools stored as 0/1
    is_bool: bool

    kind = LITERAL


@dataclass(eq=False)
class Variable(Node):
    name: str

    kind = VARIABLE

    def __post_init__(self):
        super().__post_init__()
        self.slot = -1          # filled by the checker
        self.var_type = None


@dataclass(eq=False)
class UnaryNeg(Node):
    operand: Node

    kind = UNARY_NEG

    def children(self):
        return (self.operand,)


@dataclass(eq=False)
class LogicalNot(Node):
    operand: Node

    kind = LOGICAL_NOT

    def children(self):
        return (self.operand,)


@dataclass(eq=False)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node
    op_start: int   # span of the operator token, for snippet surgery
    op_length: int

    kind = BINARY_OP

    def children(self):
        return (self.left, self.right)


@dataclass(eq=False)
class Call(Node):
    class_name: str
    fn_name: str
    args: list

    kind = CALL

    def __post_init__(self):
        super().__post_init__()
        self.fn_index = -1      # filled by the checker
        self.ret_type = None

    @property
    def target(self) -> str:
        return f"{self.class_name}.{self.fn_name}"

    def children(self):
        return tuple(self.args)


# --- statements ------------------------------------------------------------


@dataclass(eq=False)
class Let(Node):
    name: str
    declared_type: str | None
    value: Node

    kind = LET

    def __post_init__(self):
        super().__post_init__()
        self.slot = -1

    def children(self):
        return (self.value,)


@dataclass(eq=False)
class Assignment(Node):
    name: str
    value: Node

    kind = ASSIGNMENT

    def __post_init__(self):
        super().__post_init__()
        self.slot = -1

    def children(self):
        return (self.value,)


@dataclass(eq=False)
class CompoundAssignment(Node):
    name: str
    op: str  # "+=" or "-="
    value: Node
    op_start: int
    op_length: int

    kind = COMPOUND_ASSIGNMENT

    def __post_init__(self):
        super().__post_init__()
        self.slot = -1

    def children(self):
        return (self.value,)


@dataclass(eq=False)
class If(Node):
    cond: Node
    then_body: list
    else_body: list

    kind = IF

    def children(self):
        return (self.cond, *self.then_body, *self.else_body)


@dataclass(eq=False)
class While(Node):
    cond: Node
    body: list

    kind = WHILE

    def children(self):
        return (self.cond, *self.body)


@dataclass(eq=False)
class Return(Node):
    value: Node | None

    kind = RETURN

    def children(self):
        return (self.value,) if self.value is not None else ()


@dataclass(eq=False)
class ExpressionStatement(Node):
    call: Call

    kind = EXPRESSION_STATEMENT

    def children(self):
        return (self.call,)


@dataclass(eq=False)
class Assert(Node):
    value: Node

    kind = ASSERT

    def children(self):
        return (self.value,)


# --- declarations (not AST nodes: they carry no node_id) -------------------


@dataclass(eq=False)
class FunctionDef:
    name: str
    is_test: bool
    params: list  # [(name, type)]
    return_type: str
    body: list
    start: int
    length: int
    line_span: tuple = (0, 0)

    def __post_init__(self):
        self.nlocals = 0  # filled by the checker


@dataclass(eq=False)
class ClassDef:
    name: str
    functions: list
    start: int
    length: int
    line_span: tuple = (0, 0)


def walk(node: Node):
    """Pre-order traversal of an expression/statement subtree."""
    yield node
    for child in node.children():
        yield from walk(child)
