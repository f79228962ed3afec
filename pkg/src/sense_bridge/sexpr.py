"""Tiny s-expression reader shared by every on-disk file format.

All formats are UTF-8 with ``;`` line comments.  Atoms are bare symbols,
double-quoted strings (with ``\\"`` and ``\\\\`` escapes) or non-negative
integers; everything else is nesting.
"""

from collections import namedtuple

from .errors import ParseError


class Symbol(str):
    """Bare identifier; a distinct type so readers can tell it from a string."""

    __slots__ = ()

    def __repr__(self):
        return f"Symbol({str.__repr__(self)})"


Token = namedtuple("Token", "kind value line col")

_DELIMS = frozenset('();"')


def tokenize(text):
    """Return the token list for ``text``, raising ParseError on bad lexemes."""
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
        elif ch.isspace():
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, ch, line, col))
            i += 1
            col += 1
        elif ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            chars = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string", start_line, start_col)
                c = text[i]
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in '\\"':
                        raise ParseError("unsupported escape", line, col)
                    chars.append(text[i + 1])
                    i += 2
                    col += 2
                elif c == '"':
                    i += 1
                    col += 1
                    break
                else:
                    chars.append(c)
                    if c == "\n":
                        line += 1
                        col = 1
                    else:
                        col += 1
                    i += 1
            tokens.append(Token("atom", "".join(chars), start_line, start_col))
        else:
            start = i
            start_col = col
            while i < n and not text[i].isspace() and text[i] not in _DELIMS:
                i += 1
                col += 1
            word = text[start:i]
            value = int(word) if word.isdigit() else Symbol(word)
            tokens.append(Token("atom", value, line, start_col))
    return tokens


def _parse(tokens, pos):
    tok = tokens[pos]
    if tok.kind == "atom":
        return tok.value, pos + 1
    if tok.kind == "(":
        items = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise ParseError("unexpected end of input (unbalanced parenthesis)",
                                 tok.line, tok.col)
            if tokens[pos].kind == ")":
                return items, pos + 1
            item, pos = _parse(tokens, pos)
            items.append(item)
    raise ParseError("unexpected ')'", tok.line, tok.col)


def read_forms(text):
    """Parse every toplevel form; returns a list of (value, line) pairs."""
    tokens = tokenize(text)
    forms = []
    pos = 0
    while pos < len(tokens):
        line = tokens[pos].line
        value, pos = _parse(tokens, pos)
        forms.append((value, line))
    return forms


def read_one(text):
    """Parse exactly one form; trailing material is an error."""
    tokens = tokenize(text)
    if not tokens:
        raise ParseError("empty input", 1, 1)
    value, pos = _parse(tokens, 0)
    if pos != len(tokens):
        extra = tokens[pos]
        raise ParseError("trailing material after form", extra.line, extra.col)
    return value


def plist(items, form_name, line, allowed, required=()):
    """Interpret ``items`` as alternating :keyword value pairs.

    Returns a plain dict keyed by keyword name without the colon.
    """
    out = {}
    i = 0
    while i < len(items):
        key = items[i]
        if not (isinstance(key, Symbol) and key.startswith(":")):
            raise ParseError(f"{form_name}: expected keyword, got {key!r}", line)
        name = key[1:]
        if name not in allowed:
            raise ParseError(f"{form_name}: unknown keyword :{name}", line)
        if name in out:
            raise ParseError(f"{form_name}: duplicate keyword :{name}", line)
        if i + 1 >= len(items):
            raise ParseError(f"{form_name}: keyword :{name} lacks a value", line)
        out[name] = items[i + 1]
        i += 2
    for name in required:
        if name not in out:
            raise ParseError(f"{form_name}: missing required keyword :{name}", line)
    return out


def quote_string(s):
    """Render ``s`` as a double-quoted s-expression string."""
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'
