"""Recursive-descent parser producing a checked SourceProgram.

Statement spans stop just before the terminating ';' (so a mutant snippet
for ``return true;`` reads ``return true``); ``full_length`` additionally
covers the semicolon, which text-level mutation uses when deleting a whole
statement.
"""

from . import ast
from .errors import ParseError
from .lexer import T_EOF, T_IDENT, T_INT, T_KEYWORD, T_SYMBOL, Token, tokenize

MAX_NESTING = 100  # keeps interpreter recursion bounded on both backends


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.depth = 0

    # --- token helpers ---

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def check(self, type_: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.type == type_ and (text is None or tok.text == text)

    def accept(self, type_: str, text: str | None = None) -> Token | None:
        if self.check(type_, text):
            return self.advance()
        return None

    def expect(self, type_: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.type != type_ or (text is not None and tok.text != text):
            want = text if text is not None else type_
            got = tok.text if tok.text else "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", tok.start)
        return self.advance()

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ParseError("nesting too deep", self.peek().start)

    def _leave(self):
        self.depth -= 1

    # --- declarations ---

    def parse_program(self) -> list:
        classes = []
        while not self.check(T_EOF):
            classes.append(self.parse_class())
        if not classes:
            raise ParseError("empty program", 0)
        return classes

    def parse_class(self) -> ast.ClassDef:
        start = self.expect(T_KEYWORD, "class").start
        name = self.expect(T_IDENT).text
        self.expect(T_SYMBOL, "{")
        functions = []
        while not self.check(T_SYMBOL, "}"):
            functions.append(self.parse_function())
        end = self.expect(T_SYMBOL, "}").end
        cls = ast.ClassDef(name=name, functions=functions, start=start,
                           length=end - start)
        cls.line_span = self._line_span(start, end)
        return cls

    def parse_function(self) -> ast.FunctionDef:
        first = self.peek()
        is_test = self.accept(T_KEYWORD, "test") is not None
        self.expect(T_KEYWORD, "fn")
        name = self.expect(T_IDENT).text
        self.expect(T_SYMBOL, "(")
        params = []
        if not self.check(T_SYMBOL, ")"):
            while True:
                pname = self.expect(T_IDENT).text
                self.expect(T_SYMBOL, ":")
                ptype = self._value_type()
                params.append((pname, ptype))
                if not self.accept(T_SYMBOL, ","):
                    break
        self.expect(T_SYMBOL, ")")
        return_type = ast.VOID
        if self.accept(T_SYMBOL, "->"):
            tok = self.expect(T_KEYWORD)
            if tok.text not in (ast.INT, ast.BOOL, ast.VOID):
                raise ParseError(f"unknown return type {tok.text!r}", tok.start)
            return_type = tok.text
        body, end = self.parse_block()
        fn = ast.FunctionDef(name=name, is_test=is_test, params=params,
                             return_type=return_type, body=body,
                             start=first.start, length=end - first.start)
        fn.line_span = self._line_span(first.start, end)
        return fn

    def _value_type(self) -> str:
        tok = self.expect(T_KEYWORD)
        if tok.text not in (ast.INT, ast.BOOL):
            raise ParseError(f"expected 'int' or 'bool', found {tok.text!r}", tok.start)
        return tok.text

    def _line_span(self, start: int, end: int) -> tuple:
        first = self.text.count("\n", 0, start) + 1
        last = self.text.count("\n", 0, max(start, end - 1)) + 1
        return (first, last)

    # --- statements ---

    def parse_block(self) -> tuple:
        self._enter()
        self.expect(T_SYMBOL, "{")
        body = []
        while not self.check(T_SYMBOL, "}"):
            body.append(self.parse_statement())
        end = self.expect(T_SYMBOL, "}").end
        self._leave()
        return body, end

    def parse_statement(self) -> ast.Node:
        tok = self.peek()
        if tok.type == T_KEYWORD:
            if tok.text == "let":
                return self._let()
            if tok.text == "if":
                return self._if()
            if tok.text == "while":
                return self._while()
            if tok.text == "return":
                return self._return()
            if tok.text == "assert":
                return self._assert()
        if tok.type == T_IDENT:
            nxt = self.tokens[self.pos + 1]
            if nxt.type == T_SYMBOL and nxt.text in ("=", "+=", "-="):
                return self._assignment()
            if nxt.type == T_SYMBOL and nxt.text == ".":
                return self._call_statement()
        raise ParseError(f"expected a statement, found {tok.text or 'end of input'!r}",
                         tok.start)

    def _finish_simple(self, node: ast.Node, start: int, expr_end: int) -> ast.Node:
        semi = self.expect(T_SYMBOL, ";")
        node.start = start
        node.length = expr_end - start
        node.full_length = semi.end - start
        return node

    def _let(self) -> ast.Node:
        start = self.advance().start
        name = self.expect(T_IDENT).text
        declared = None
        if self.accept(T_SYMBOL, ":"):
            declared = self._value_type()
        self.expect(T_SYMBOL, "=")
        value = self.parse_expr()
        node = ast.Let(start=start, length=0, name=name, declared_type=declared,
                       value=value)
        return self._finish_simple(node, start, value.start + value.length)

    def _assignment(self) -> ast.Node:
        name_tok = self.advance()
        op_tok = self.advance()
        value = self.parse_expr()
        if op_tok.text == "=":
            node = ast.Assignment(start=name_tok.start, length=0,
                                  name=name_tok.text, value=value)
        else:
            node = ast.CompoundAssignment(start=name_tok.start, length=0,
                                          name=name_tok.text, op=op_tok.text,
                                          value=value, op_start=op_tok.start,
                                          op_length=len(op_tok.text))
        return self._finish_simple(node, name_tok.start,
                                   value.start + value.length)

    def _if(self) -> ast.Node:
        start = self.advance().start
        self.expect(T_SYMBOL, "(")
        cond = self.parse_expr()
        self.expect(T_SYMBOL, ")")
        then_body, end = self.parse_block()
        else_body = []
        if self.accept(T_KEYWORD, "else"):
            if self.check(T_KEYWORD, "if"):
                nested = self._if()  # else-if sugar: else body is the nested if
                else_body = [nested]
                end = nested.start + nested.length
            else:
                else_body, end = self.parse_block()
        node = ast.If(start=start, length=end - start, cond=cond,
                      then_body=then_body, else_body=else_body)
        node.full_length = node.length
        return node

    def _while(self) -> ast.Node:
        start = self.advance().start
        self.expect(T_SYMBOL, "(")
        cond = self.parse_expr()
        self.expect(T_SYMBOL, ")")
        body, end = self.parse_block()
        node = ast.While(start=start, length=end - start, cond=cond, body=body)
        node.full_length = node.length
        return node

    def _return(self) -> ast.Node:
        start_tok = self.advance()
        if self.check(T_SYMBOL, ";"):
            node = ast.Return(start=start_tok.start, length=0, value=None)
            return self._finish_simple(node, start_tok.start, start_tok.end)
        value = self.parse_expr()
        node = ast.Return(start=start_tok.start, length=0, value=value)
        return self._finish_simple(node, start_tok.start,
                                   value.start + value.length)

    def _assert(self) -> ast.Node:
        start = self.advance().start
        value = self.parse_expr()
        node = ast.Assert(start=start, length=0, value=value)
        return self._finish_simple(node, start, value.start + value.length)

    def _call_statement(self) -> ast.Node:
        call = self.parse_primary()
        if not isinstance(call, ast.Call):
            raise ParseError("only calls may be used as statements", call.start)
        node = ast.ExpressionStatement(start=call.start, length=call.length,
                                       call=call)
        return self._finish_simple(node, call.start, call.start + call.length)

    # --- expressions (precedence climbing) ---

    def parse_expr(self) -> ast.Node:
        self._enter()
        node = self._binary(0)
        self._leave()
        return node

    _LEVELS = [("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="),
               ("+", "-"), ("*", "/", "%")]

    def _binary(self, level: int) -> ast.Node:
        if level == len(self._LEVELS):
            return self._unary()
        node = self._binary(level + 1)
        ops = self._LEVELS[level]
        while self.peek().type == T_SYMBOL and self.peek().text in ops:
            op_tok = self.advance()
            right = self._binary(level + 1)
            node = ast.BinaryOp(start=node.start,
                                length=right.start + right.length - node.start,
                                op=op_tok.text, left=node, right=right,
                                op_start=op_tok.start, op_length=len(op_tok.text))
        return node

    def _unary(self) -> ast.Node:
        tok = self.peek()
        if tok.type == T_SYMBOL and tok.text == "-":
            self.advance()
            operand = self._unary()
            return ast.UnaryNeg(start=tok.start,
                                length=operand.start + operand.length - tok.start,
                                operand=operand)
        if tok.type == T_SYMBOL and tok.text == "!":
            self.advance()
            operand = self._unary()
            return ast.LogicalNot(start=tok.start,
                                  length=operand.start + operand.length - tok.start,
                                  operand=operand)
        return self.parse_primary()

    def parse_primary(self) -> ast.Node:
        tok = self.peek()
        if tok.type == T_INT:
            self.advance()
            return ast.Literal(start=tok.start, length=len(tok.text),
                               value=int(tok.text), is_bool=False)
        if tok.type == T_KEYWORD and tok.text in ("true", "false"):
            self.advance()
            return ast.Literal(start=tok.start, length=len(tok.text),
                               value=1 if tok.text == "true" else 0, is_bool=True)
        if tok.type == T_SYMBOL and tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            end = self.expect(T_SYMBOL, ")").end
            # keep the parenthesized extent so snippets stay well-formed
            inner.start = tok.start
            inner.length = end - tok.start
            return inner
        if tok.type == T_IDENT:
            nxt = self.tokens[self.pos + 1]
            if nxt.type == T_SYMBOL and nxt.text == ".":
                return self._call()
            self.advance()
            return ast.Variable(start=tok.start, length=len(tok.text),
                                name=tok.text)
        raise ParseError(f"expected an expression, found {tok.text or 'end of input'!r}",
                         tok.start)

    def _call(self) -> ast.Call:
        cls_tok = self.advance()
        self.expect(T_SYMBOL, ".")
        fn_tok = self.expect(T_IDENT)
        self.expect(T_SYMBOL, "(")
        args = []
        if not self.check(T_SYMBOL, ")"):
            while True:
                args.append(self.parse_expr())
                if not self.accept(T_SYMBOL, ","):
                    break
        end = self.expect(T_SYMBOL, ")").end
        return ast.Call(start=cls_tok.start, length=end - cls_tok.start,
                        class_name=cls_tok.text, fn_name=fn_tok.text, args=args)


def parse_classes(text: str) -> list:
    """Parse to raw class declarations (unchecked, unnumbered)."""
    return _Parser(text).parse_program()


def parse_program(text: str):
    """Parse, resolve, type-check and number a program.

    Returns a :class:`~mutagrid.minilang.program.SourceProgram`; raises
    ParseError / ResolutionError / TypeCheckError.
    """
    from .program import SourceProgram  # late import: program builds on parser

    return SourceProgram.from_text(text)
