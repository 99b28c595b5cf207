"""Tokenizer for mini-language source text."""

from .errors import ParseError

KEYWORDS = {
    "class", "fn", "test", "let", "if", "else", "while", "return",
    "assert", "true", "false", "int", "bool", "void",
}

# longest first so "<=" wins over "<"
SYMBOLS = [
    "->", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=",
    "{", "}", "(", ")", ";", ":", ",", ".",
    "+", "-", "*", "/", "%", "<", ">", "=", "!",
]

MAX_INT_LITERAL = 2**63 - 1

T_IDENT = "ident"
T_INT = "int"
T_KEYWORD = "keyword"
T_SYMBOL = "symbol"
T_EOF = "eof"


class Token:
    __slots__ = ("type", "text", "start")

    def __init__(self, type_: str, text: str, start: int):
        self.type = type_
        self.text = text
        self.start = start

    @property
    def end(self) -> int:
        return self.start + len(self.text)

    def __repr__(self):
        return f"Token({self.type}, {self.text!r}, {self.start})"


def tokenize(text: str) -> list:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "/" and text.startswith("//", i):
            nl = text.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            lit = text[i:j]
            if int(lit) > MAX_INT_LITERAL:
                raise ParseError(f"integer literal out of range: {lit}", i)
            tokens.append(Token(T_INT, lit, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token(T_KEYWORD if word in KEYWORDS else T_IDENT, word, i))
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(T_SYMBOL, sym, i))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(Token(T_EOF, "", n))
    return tokens
