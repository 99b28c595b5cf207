"""Errors raised while turning source text into a runnable program."""


class MiniLangError(Exception):
    """Base class; carries the byte offset the problem was detected at."""

    def __init__(self, message: str, offset: int = -1):
        super().__init__(message)
        self.message = message
        self.offset = offset

    def located(self, text: str) -> str:
        """Render as ``line:col: message`` against the originating text."""
        if self.offset < 0:
            return self.message
        line = text.count("\n", 0, self.offset) + 1
        col = self.offset - (text.rfind("\n", 0, self.offset) + 1) + 1
        return f"{line}:{col}: {self.message}"


class ParseError(MiniLangError):
    """Lexical or syntactic error."""


class ResolutionError(MiniLangError):
    """Unknown name, duplicate name, or unresolved call target."""


class TypeCheckError(MiniLangError):
    """int/bool/void mismatch, bad arity, or a missing return path."""
