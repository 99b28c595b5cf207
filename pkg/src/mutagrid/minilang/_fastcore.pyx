# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpreter core.

Mirrors ``_pycore`` exactly: same step accounting, same wrapping int64
arithmetic, same statuses.  Compiled with -fwrapv so C signed overflow is
defined two's-complement wrapping, matching the language semantics.
"""

from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc

import numpy as np

# mirrored from mutagrid.minilang.flat; test_backends asserts these agree
DEF K_LIT_INT = 0
DEF K_LIT_BOOL = 1
DEF K_VAR = 2
DEF K_BINOP = 3
DEF K_NEG = 4
DEF K_NOT = 5
DEF K_CALL = 6
DEF K_LET = 7
DEF K_ASSIGN = 8
DEF K_CASSIGN = 9
DEF K_IF = 10
DEF K_WHILE = 11
DEF K_RETURN = 12
DEF K_EXPRSTMT = 13
DEF K_ASSERT = 14
DEF K_NOP = 15

DEF OP_ADD = 0
DEF OP_SUB = 1
DEF OP_MUL = 2
DEF OP_DIV = 3
DEF OP_MOD = 4
DEF OP_LT = 5
DEF OP_LE = 6
DEF OP_GT = 7
DEF OP_GE = 8
DEF OP_EQ = 9
DEF OP_NE = 10
DEF OP_AND = 11
DEF OP_OR = 12
DEF OP_ADDEQ = 13
DEF OP_SUBEQ = 14

DEF S_OK = 0
DEF S_ASSERT = 1
DEF S_DIVZERO = 2
DEF S_STACK = 3
DEF S_STEPLIMIT = 4

DEF MAX_CALL_DEPTH = 64

CONSTANTS = {
    "K_LIT_INT": K_LIT_INT, "K_LIT_BOOL": K_LIT_BOOL, "K_VAR": K_VAR,
    "K_BINOP": K_BINOP, "K_NEG": K_NEG, "K_NOT": K_NOT, "K_CALL": K_CALL,
    "K_LET": K_LET, "K_ASSIGN": K_ASSIGN, "K_CASSIGN": K_CASSIGN,
    "K_IF": K_IF, "K_WHILE": K_WHILE, "K_RETURN": K_RETURN,
    "K_EXPRSTMT": K_EXPRSTMT, "K_ASSERT": K_ASSERT, "K_NOP": K_NOP,
    "OP_ADD": OP_ADD, "OP_SUB": OP_SUB, "OP_MUL": OP_MUL, "OP_DIV": OP_DIV,
    "OP_MOD": OP_MOD, "OP_LT": OP_LT, "OP_LE": OP_LE, "OP_GT": OP_GT,
    "OP_GE": OP_GE, "OP_EQ": OP_EQ, "OP_NE": OP_NE, "OP_AND": OP_AND,
    "OP_OR": OP_OR, "OP_ADDEQ": OP_ADDEQ, "OP_SUBEQ": OP_SUBEQ,
    "S_OK": S_OK, "S_ASSERT": S_ASSERT, "S_DIVZERO": S_DIVZERO,
    "S_STACK": S_STACK, "S_STEPLIMIT": S_STEPLIMIT,
    "MAX_CALL_DEPTH": MAX_CALL_DEPTH,
}

BACKEND_NAME = "compiled"


cdef struct State:
    int64_t steps
    int64_t step_limit
    int status
    int64_t fail_node
    int depth
    int64_t retval
    int64_t* locals_buf
    int64_t locals_top


cdef struct Prog:
    const int64_t* kind
    const int64_t* op
    const int64_t* a
    const int64_t* b
    const int64_t* c
    const int64_t* block_items
    const int64_t* block_start
    const int64_t* block_len
    const int64_t* fn_body_block
    const int64_t* fn_nparams
    const int64_t* fn_nlocals


cdef class PreparedProgram:
    cdef dict _refs  # keeps the numpy arrays alive
    cdef Prog prog
    cdef int64_t max_nlocals
    cdef int64_t n_functions

    def __init__(self, flat):
        cdef dict arrays = {}
        for name in ("kind", "op", "a", "b", "c", "block_items",
                     "block_start", "block_len", "fn_body_block",
                     "fn_nparams", "fn_nlocals"):
            arrays[name] = np.ascontiguousarray(getattr(flat, name),
                                                dtype=np.int64)
        self._refs = arrays
        self.prog.kind = self._ptr(arrays["kind"])
        self.prog.op = self._ptr(arrays["op"])
        self.prog.a = self._ptr(arrays["a"])
        self.prog.b = self._ptr(arrays["b"])
        self.prog.c = self._ptr(arrays["c"])
        self.prog.block_items = self._ptr(arrays["block_items"])
        self.prog.block_start = self._ptr(arrays["block_start"])
        self.prog.block_len = self._ptr(arrays["block_len"])
        self.prog.fn_body_block = self._ptr(arrays["fn_body_block"])
        self.prog.fn_nparams = self._ptr(arrays["fn_nparams"])
        self.prog.fn_nlocals = self._ptr(arrays["fn_nlocals"])
        self.n_functions = arrays["fn_nlocals"].shape[0]
        self.max_nlocals = (int(arrays["fn_nlocals"].max())
                            if self.n_functions else 0)

    cdef const int64_t* _ptr(self, object arr):
        cdef const int64_t[::1] mv = arr
        if mv.shape[0] == 0:
            return NULL
        return &mv[0]


cdef inline bint tick(State* s, int64_t node) nogil:
    s.steps += 1
    if s.steps >= s.step_limit:
        s.status = S_STEPLIMIT
        s.fail_node = node
        return False
    return True


cdef int64_t eval_expr(const Prog* p, State* s, int64_t node,
                       int64_t* frame) nogil:
    if not tick(s, node):
        return 0
    cdef int64_t k = p.kind[node]
    cdef int64_t o, left, right
    if k == K_LIT_INT or k == K_LIT_BOOL:
        return p.a[node]
    if k == K_VAR:
        return frame[p.a[node]]
    if k == K_BINOP:
        o = p.op[node]
        if o == OP_AND:
            left = eval_expr(p, s, p.a[node], frame)
            if s.status or not left:
                return 0
            return eval_expr(p, s, p.b[node], frame)
        if o == OP_OR:
            left = eval_expr(p, s, p.a[node], frame)
            if s.status:
                return 0
            if left:
                return 1
            return eval_expr(p, s, p.b[node], frame)
        left = eval_expr(p, s, p.a[node], frame)
        if s.status:
            return 0
        right = eval_expr(p, s, p.b[node], frame)
        if s.status:
            return 0
        if o == OP_ADD:
            return left + right
        if o == OP_SUB:
            return left - right
        if o == OP_MUL:
            return left * right
        if o == OP_DIV:
            if right == 0:
                s.status = S_DIVZERO
                s.fail_node = node
                return 0
            if right == -1:
                return -left
            return left / right
        if o == OP_MOD:
            if right == 0:
                s.status = S_DIVZERO
                s.fail_node = node
                return 0
            if right == -1:
                return 0
            return left % right
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
        return 1 if left != right else 0
    if k == K_NEG:
        left = eval_expr(p, s, p.a[node], frame)
        return -left
    if k == K_NOT:
        left = eval_expr(p, s, p.a[node], frame)
        return 1 - left
    # K_CALL
    return do_call(p, s, node, frame)


cdef int64_t do_call(const Prog* p, State* s, int64_t node,
                     int64_t* frame) nogil:
    cdef int64_t target = p.a[node]
    cdef int64_t args_block = p.b[node]
    cdef int64_t start = p.block_start[args_block]
    cdef int64_t argc = p.block_len[args_block]
    cdef int64_t nlocals = p.fn_nlocals[target]
    # reserve the callee frame up front so calls nested in argument
    # expressions allocate above it instead of clobbering written args
    cdef int64_t base = s.locals_top
    cdef int64_t* new_frame = s.locals_buf + base
    cdef int64_t i
    cdef int returned
    s.locals_top = base + nlocals
    for i in range(argc):
        new_frame[i] = eval_expr(p, s, p.block_items[start + i], frame)
        if s.status:
            s.locals_top = base
            return 0
    if s.depth + 1 > MAX_CALL_DEPTH:
        s.status = S_STACK
        s.fail_node = node
        s.locals_top = base
        return 0
    for i in range(argc, nlocals):
        new_frame[i] = 0
    s.depth += 1
    returned = exec_block(p, s, p.fn_body_block[target], new_frame)
    s.depth -= 1
    s.locals_top = base
    if s.status:
        return 0
    return s.retval if returned else 0


cdef int exec_block(const Prog* p, State* s, int64_t block,
                    int64_t* frame) nogil:
    cdef int64_t start = p.block_start[block]
    cdef int64_t i
    for i in range(p.block_len[block]):
        if exec_stmt(p, s, p.block_items[start + i], frame):
            return 1
        if s.status:
            return 0
    return 0


cdef int exec_stmt(const Prog* p, State* s, int64_t node, int64_t* frame) nogil:
    cdef int64_t k = p.kind[node]
    if k == K_NOP:
        return 0
    if not tick(s, node):
        return 0
    cdef int64_t value, slot
    if k == K_LET or k == K_ASSIGN:
        value = eval_expr(p, s, p.b[node], frame)
        if s.status:
            return 0
        frame[p.a[node]] = value
        return 0
    if k == K_CASSIGN:
        value = eval_expr(p, s, p.b[node], frame)
        if s.status:
            return 0
        slot = p.a[node]
        if p.op[node] == OP_ADDEQ:
            frame[slot] = frame[slot] + value
        else:
            frame[slot] = frame[slot] - value
        return 0
    if k == K_IF:
        value = eval_expr(p, s, p.a[node], frame)
        if s.status:
            return 0
        if value:
            return exec_block(p, s, p.b[node], frame)
        return exec_block(p, s, p.c[node], frame)
    if k == K_WHILE:
        while True:
            value = eval_expr(p, s, p.a[node], frame)
            if s.status or not value:
                return 0
            if exec_block(p, s, p.b[node], frame):
                return 1
            if s.status:
                return 0
    if k == K_RETURN:
        value = p.a[node]
        if value >= 0:
            s.retval = eval_expr(p, s, value, frame)
            if s.status:
                return 0
        else:
            s.retval = 0
        return 1
    if k == K_ASSERT:
        value = eval_expr(p, s, p.a[node], frame)
        if s.status:
            return 0
        if not value:
            s.status = S_ASSERT
            s.fail_node = node
        return 0
    if k == K_EXPRSTMT:
        eval_expr(p, s, p.a[node], frame)
        return 0
    # unreachable for checked programs; fail loudly rather than corrupt state
    s.status = S_DIVZERO
    s.fail_node = node
    return 0


def prepare(flat):
    return PreparedProgram(flat)


cdef void run_zero_arg(const Prog* p, State* s, int64_t fn) nogil:
    """Reset per-run state and execute a zero-argument function."""
    cdef int64_t nlocals = p.fn_nlocals[fn]
    cdef int64_t i
    s.steps = 0
    s.status = S_OK
    s.fail_node = -1
    s.depth = 1
    s.retval = 0
    for i in range(nlocals):
        s.locals_buf[i] = 0
    s.locals_top = nlocals
    exec_block(p, s, p.fn_body_block[fn], s.locals_buf)


def run_many(PreparedProgram prog, fn_indices, step_limit, bint stop_on_fail):
    """Run zero-arg functions in order; returns list of (status, steps).

    Stops after the first non-passing outcome when ``stop_on_fail``; the
    returned list covers only the functions actually executed.
    """
    cdef const Prog* p = &prog.prog
    fns_arr = np.ascontiguousarray(fn_indices, dtype=np.int64)
    cdef const int64_t[::1] fns = fns_arr
    cdef int64_t n = fns.shape[0]
    out_status = np.empty(n, dtype=np.int64)
    out_steps = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] st = out_status
    cdef int64_t[::1] sp = out_steps
    cdef State s
    s.step_limit = step_limit
    cdef int64_t cap = (MAX_CALL_DEPTH + 2) * (prog.max_nlocals + 1)
    s.locals_buf = <int64_t*> malloc(cap * sizeof(int64_t))
    if s.locals_buf == NULL:
        raise MemoryError()
    cdef int64_t i, executed = 0
    try:
        with nogil:
            for i in range(n):
                run_zero_arg(p, &s, fns[i])
                st[i] = s.status
                sp[i] = s.steps
                executed += 1
                if stop_on_fail and s.status != S_OK:
                    break
    finally:
        free(s.locals_buf)
    return [(int(out_status[i]), int(out_steps[i])) for i in range(executed)]


def run(PreparedProgram prog, fn_index, step_limit, args=()):
    """Execute one function: returns (status, steps, fail_node, retval)."""
    cdef int64_t fn = fn_index
    cdef State s
    s.steps = 0
    s.step_limit = step_limit
    s.status = S_OK
    s.fail_node = -1
    s.depth = 1
    s.retval = 0
    s.locals_top = 0

    cdef const Prog* pp = &prog.prog
    cdef int64_t nparams = pp.fn_nparams[fn]
    if len(args) != nparams:
        raise ValueError(f"function {fn} expects {nparams} arguments")

    cdef int64_t cap = (MAX_CALL_DEPTH + 2) * (prog.max_nlocals + 1)
    s.locals_buf = <int64_t*> malloc(cap * sizeof(int64_t))
    if s.locals_buf == NULL:
        raise MemoryError()
    cdef int64_t nlocals = pp.fn_nlocals[fn]
    cdef int64_t i
    cdef object v
    cdef int returned
    try:
        for i in range(nparams):
            v = int(args[i]) & 0xFFFFFFFFFFFFFFFF
            if v >= (1 << 63):
                v -= (1 << 64)
            s.locals_buf[i] = v
        for i in range(nparams, nlocals):
            s.locals_buf[i] = 0
        s.locals_top = nlocals
        with nogil:
            returned = exec_block(pp, &s, pp.fn_body_block[fn], s.locals_buf)
    finally:
        free(s.locals_buf)
    if s.status != S_OK:
        return s.status, s.steps, s.fail_node, 0
    return S_OK, s.steps, -1, s.retval if returned else 0
