"""Maximal-munch lexer for the supported Java subset."""

from __future__ import annotations

from dataclasses import dataclass, field

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized this
    throw throws transient try void volatile while""".split()
)

LITERAL_WORDS = frozenset({"true", "false", "null"})

SEPARATORS = ("...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@")

# Longest first so the scan below is maximal munch.
OPERATORS = tuple(
    sorted(
        """>>>= <<= >>= >>> ->
        == <= >= != && || ++ -- << >> += -= *= /= &= |= ^= %=
        = > < ! ~ ? : + - * / & | ^ %""".split(),
        key=len,
        reverse=True,
    )
)

PUNCTUATION = tuple(sorted(SEPARATORS + OPERATORS, key=len, reverse=True))


class LexError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | literal | operator | separator
    text: str
    position: tuple[int, int]
    offset: int = field(default=0, compare=False)

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


def classify(text: str) -> str:
    """Lexical kind of a single token text (used on tree labels too)."""
    if text in LITERAL_WORDS:
        return "literal"
    if text in KEYWORDS:
        return "keyword"
    if text in SEPARATORS:
        return "separator"
    if text in OPERATORS:
        return "operator"
    if text[0].isdigit() or text[0] in "\"'" or (text[0] == "." and len(text) > 1):
        return "literal"
    return "identifier"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(source)
    line, col = 1, 1

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in source[i : i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = source[i]
        if ch in " \t\r\n\f":
            advance(1)
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            advance((n if j < 0 else j) - i)
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise LexError("unterminated comment", line, col)
            advance(j + 2 - i)
            continue

        start, pos = i, (line, col)
        if ch == '"' or ch == "'":
            j = i + 1
            while True:
                if j >= n or source[j] == "\n":
                    what = "string" if ch == '"' else "character"
                    raise LexError(f"unterminated {what} literal", *pos)
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == ch:
                    break
                j += 1
            text = source[i : j + 1]
            advance(j + 1 - i)
            tokens.append(Token("literal", text, pos, start))
            continue

        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = _scan_number(source, i)
            text = source[i:j]
            advance(j - i)
            tokens.append(Token("literal", text, pos, start))
            continue

        if ch.isalpha() or ch in "_$":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            text = source[i:j]
            advance(j - i)
            tokens.append(Token(classify(text), text, pos, start))
            continue

        for p in PUNCTUATION:
            if source.startswith(p, i):
                advance(len(p))
                tokens.append(Token(classify(p), p, pos, start))
                break
        else:
            raise LexError(f"unexpected character {ch!r}", *pos)
    return tokens


def _scan_number(s: str, i: int) -> int:
    n = len(s)
    if s.startswith(("0x", "0X"), i):
        j = i + 2
        while j < n and (s[j] in "0123456789abcdefABCDEF_"):
            j += 1
    elif s.startswith(("0b", "0B"), i):
        j = i + 2
        while j < n and s[j] in "01_":
            j += 1
    else:
        j = i
        while j < n and (s[j].isdigit() or s[j] == "_"):
            j += 1
        if j < n and s[j] == "." and (j + 1 >= n or s[j + 1].isdigit() or not s[j + 1].isalpha()):
            j += 1
            while j < n and (s[j].isdigit() or s[j] == "_"):
                j += 1
        if j < n and s[j] in "eE":
            k = j + 1
            if k < n and s[k] in "+-":
                k += 1
            if k < n and s[k].isdigit():
                j = k
                while j < n and s[j].isdigit():
                    j += 1
    if j < n and s[j] in "lLfFdD":
        j += 1
    return j
