"""Tiny s-expression reader used for formulas and value expressions."""

from __future__ import annotations


class SexprError(ValueError):
    """Raised on malformed s-expression input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


def _atom(token: str):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def tokenize(text: str) -> list[tuple[str, int]]:
    """Split into (token, offset) pairs. Parens are their own tokens."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in "()":
                i += 1
            tokens.append((text[start:i], start))
    return tokens


def parse(text: str):
    """Parse exactly one expression; atoms become int, float, or str."""
    tokens = tokenize(text)
    if not tokens:
        raise SexprError("empty input", 0)
    expr, rest = _parse_one(tokens, 0)
    if rest != len(tokens):
        raise SexprError("trailing content after expression", tokens[rest][1])
    return expr


def _parse_one(tokens: list[tuple[str, int]], pos: int):
    token, offset = tokens[pos]
    if token == "(":
        items = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise SexprError("unclosed parenthesis", offset)
            if tokens[pos][0] == ")":
                return items, pos + 1
            item, pos = _parse_one(tokens, pos)
            items.append(item)
    if token == ")":
        raise SexprError("unexpected closing parenthesis", offset)
    return _atom(token), pos + 1
