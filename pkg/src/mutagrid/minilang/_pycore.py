"""Pure-Python interpreter core.

Reference implementation of the execution contract shared with the
compiled core: one step per evaluated node, counted on node entry; 64-bit
wrapping integers with truncating division; execution aborts the moment
the step counter reaches the limit.  The compiled core must agree with
this one bit for bit (statuses, step counts, return values).
"""

import sys

from .flat import (K_ASSERT, K_ASSIGN, K_BINOP, K_CALL, K_CASSIGN, K_EXPRSTMT,
                   K_IF, K_LET, K_LIT_BOOL, K_LIT_INT, K_NEG, K_NOP, K_NOT,
                   K_RETURN, K_VAR, K_WHILE, MAX_CALL_DEPTH, OP_ADD, OP_ADDEQ,
                   OP_AND, OP_DIV, OP_EQ, OP_GE, OP_GT, OP_LE, OP_LT, OP_MOD,
                   OP_MUL, OP_NE, OP_OR, OP_SUB, OP_SUBEQ, S_ASSERT, S_DIVZERO,
                   S_OK, S_STACK, S_STEPLIMIT)

_MASK = (1 << 64) - 1
_SIGN = 1 << 63

# deep mini-language call chains recurse through this module
_MIN_RECURSION_LIMIT = 30_000
if sys.getrecursionlimit() < _MIN_RECURSION_LIMIT:
    sys.setrecursionlimit(_MIN_RECURSION_LIMIT)


def _wrap(v: int) -> int:
    v &= _MASK
    return v - (1 << 64) if v & _SIGN else v


class PreparedProgram:
    """List-of-int views over the flat arrays (faster than numpy indexing)."""

    __slots__ = ("kind", "op", "a", "b", "c", "block_items", "block_start",
                 "block_len", "fn_body_block", "fn_nparams", "fn_nlocals")

    def __init__(self, flat):
        self.kind = flat.list_view("kind")
        self.op = flat.list_view("op")
        self.a = flat.list_view("a")
        self.b = flat.list_view("b")
        self.c = flat.list_view("c")
        self.block_items = flat.list_view("block_items")
        self.block_start = flat.list_view("block_start")
        self.block_len = flat.list_view("block_len")
        self.fn_body_block = flat.list_view("fn_body_block")
        self.fn_nparams = flat.list_view("fn_nparams")
        self.fn_nlocals = flat.list_view("fn_nlocals")


def prepare(flat) -> PreparedProgram:
    return PreparedProgram(flat)


class _Abort(Exception):
    def __init__(self, status, node):
        self.status = status
        self.node = node


def run(prog: PreparedProgram, fn_index: int, step_limit: int,
        args=()) -> tuple:
    """Execute one function.  Returns (status, steps, fail_node, retval)."""
    kind = prog.kind
    op_arr = prog.op
    fa = prog.a
    fb = prog.b
    fc = prog.c
    items = prog.block_items
    bstart = prog.block_start
    blen = prog.block_len

    steps = 0
    depth = 0
    retval = 0

    def tick(node):
        nonlocal steps
        steps += 1
        if steps >= step_limit:
            raise _Abort(S_STEPLIMIT, node)

    def eval_expr(node, frame):
        tick(node)
        k = kind[node]
        if k == K_LIT_INT or k == K_LIT_BOOL:
            return fa[node]
        if k == K_VAR:
            return frame[fa[node]]
        if k == K_BINOP:
            o = op_arr[node]
            if o == OP_AND:
                if not eval_expr(fa[node], frame):
                    return 0
                return eval_expr(fb[node], frame)
            if o == OP_OR:
                if eval_expr(fa[node], frame):
                    return 1
                return eval_expr(fb[node], frame)
            left = eval_expr(fa[node], frame)
            right = eval_expr(fb[node], frame)
            if o == OP_ADD:
                return _wrap(left + right)
            if o == OP_SUB:
                return _wrap(left - right)
            if o == OP_MUL:
                return _wrap(left * right)
            if o == OP_DIV:
                if right == 0:
                    raise _Abort(S_DIVZERO, node)
                if right == -1:
                    return _wrap(-left)
                q = abs(left) // abs(right)
                return -q if (left < 0) != (right < 0) else q
            if o == OP_MOD:
                if right == 0:
                    raise _Abort(S_DIVZERO, node)
                if right == -1:
                    return 0
                q = abs(left) // abs(right)
                if (left < 0) != (right < 0):
                    q = -q
                return left - q * right
            if o == OP_LT:
                return 1 if left < right else 0
            if o == OP_LE:
                return 1 if left <= right else 0
            if o == OP_GT:
                return 1 if left > right else 0
            if o == OP_GE:
                return 1 if left >= right else 0
            if o == OP_EQ:
                return 1 if left == right else 0
            # OP_NE
            return 1 if left != right else 0
        if k == K_NEG:
            return _wrap(-eval_expr(fa[node], frame))
        if k == K_NOT:
            return 1 - eval_expr(fa[node], frame)
        # K_CALL
        return call(node, frame)

    def call(node, frame):
        nonlocal depth, retval
        target = fa[node]
        argc_block = fb[node]
        start = bstart[argc_block]
        argv = [eval_expr(items[start + i], frame)
                for i in range(blen[argc_block])]
        if depth + 1 > MAX_CALL_DEPTH:
            raise _Abort(S_STACK, node)
        depth += 1
        new_frame = argv + [0] * (prog.fn_nlocals[target] - len(argv))
        returned = exec_block(prog.fn_body_block[target], new_frame)
        depth -= 1
        return retval if returned else 0

    def exec_block(block, frame):
        start = bstart[block]
        for i in range(blen[block]):
            if exec_stmt(items[start + i], frame):
                return True
        return False

    def exec_stmt(node, frame):
        nonlocal retval
        k = kind[node]
        if k == K_NOP:
            return False
        tick(node)
        if k == K_LET or k == K_ASSIGN:
            frame[fa[node]] = eval_expr(fb[node], frame)
            return False
        if k == K_CASSIGN:
            value = eval_expr(fb[node], frame)
            slot = fa[node]
            if op_arr[node] == OP_ADDEQ:
                frame[slot] = _wrap(frame[slot] + value)
            else:
                frame[slot] = _wrap(frame[slot] - value)
            return False
        if k == K_IF:
            if eval_expr(fa[node], frame):
                return exec_block(fb[node], frame)
            return exec_block(fc[node], frame)
        if k == K_WHILE:
            while eval_expr(fa[node], frame):
                if exec_block(fb[node], frame):
                    return True
            return False
        if k == K_RETURN:
            value = fa[node]
            retval = eval_expr(value, frame) if value >= 0 else 0
            return True
        if k == K_ASSERT:
            if not eval_expr(fa[node], frame):
                raise _Abort(S_ASSERT, node)
            return False
        if k == K_EXPRSTMT:
            eval_expr(fa[node], frame)
            return False
        raise AssertionError(f"unhandled kind {k} at node {node}")

    nparams = prog.fn_nparams[fn_index]
    if len(args) != nparams:
        raise ValueError(f"function {fn_index} expects {nparams} arguments")
    frame = [_wrap(int(v)) for v in args]
    frame += [0] * (prog.fn_nlocals[fn_index] - len(frame))
    depth = 1
    try:
        exec_block(prog.fn_body_block[fn_index], frame)
    except _Abort as abort:
        return abort.status, steps, abort.node, 0
    return S_OK, steps, -1, retval


def run_many(prog: PreparedProgram, fn_indices, step_limit: int,
             stop_on_fail: bool) -> list:
    """Run zero-arg functions in order; list of (status, steps) executed.

    Mirrors the compiled core: stops after the first non-passing outcome
    when ``stop_on_fail``.
    """
    results = []
    for fn_index in fn_indices:
        status, steps, _, _ = run(prog, fn_index, step_limit)
        results.append((status, steps))
        if stop_on_fail and status != S_OK:
            break
    return results


BACKEND_NAME = "python"
