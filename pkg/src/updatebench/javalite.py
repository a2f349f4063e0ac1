"""Java-lite lexing and method extraction.

Lexes a comment-free Java-like source into tokens, strips comments with
string-literal protection, and locates method bodies by header matching
plus brace balancing. Deliberately not a full Java parser: generics are
lexed as plain angle-bracket operators and method detection is heuristic.

All offsets index the decoded source text (identical to byte offsets for
ASCII input).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import LexError, ParseError, UnterminatedComment


class TokenKind(Enum):
    KEYWORD = "Keyword"
    IDENTIFIER = "Identifier"
    INT_LITERAL = "IntLiteral"
    FLOAT_LITERAL = "FloatLiteral"
    STRING_LITERAL = "StringLiteral"
    CHAR_LITERAL = "CharLiteral"
    OPERATOR = "Operator"
    PUNCTUATION = "Punctuation"
    ANNOTATION = "Annotation"


class Token(NamedTuple):
    kind: TokenKind
    text: str
    byte_offset: int


@dataclass
class MethodSpan:
    name: str
    signature_text: str
    body_start: int
    body_end: int
    param_count: int
    signature_start: int = 0

    def text(self, source: str) -> str:
        """Full method text: signature through closing brace."""
        return source[self.signature_start : self.body_end]


KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while
    true false null""".split()
)

MODIFIER_KEYWORDS = frozenset(
    "public private protected static final abstract synchronized native "
    "strictfp transient volatile default".split()
)

# Longest-first so maximal munch falls out of ordered alternation.
_OPERATORS = [
    ">>>=",
    ">>>", "<<=", ">>=",
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "<<", ">>", "->", "::",
    "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
]
_PUNCTUATION = ["...", "(", ")", "{", "}", "[", "]", ";", ",", "."]

_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_ANNOTATION_RE = re.compile(r"@[A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$]*)*")
_FLOAT_RE = re.compile(
    r"""
    (?: \d[\d_]* \. [\d_]* (?:[eE][+-]?\d+)? [fFdD]?
      | \. \d[\d_]* (?:[eE][+-]?\d+)? [fFdD]?
      | \d[\d_]* [eE][+-]?\d+ [fFdD]?
      | \d[\d_]* [fFdD]
    )
    """,
    re.VERBOSE,
)
_INT_RE = re.compile(r"0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?|\d[\d_]*[lL]?")
_STRING_RE = re.compile(r'"(?:[^"\\\n]|\\.)*"')
_CHAR_RE = re.compile(r"'(?:[^'\\\n]|\\.)+'")
_SYMBOL_RE = re.compile(
    "|".join(re.escape(s) for s in sorted(_OPERATORS + _PUNCTUATION, key=len, reverse=True))
)
_PUNCT_SET = frozenset(_PUNCTUATION)


def strip_comments(source: str) -> str:
    """Replace every // and /* */ comment with a single space.

    String and char literals are left untouched even when they contain
    comment delimiters. Raises UnterminatedComment for an unclosed block
    comment, reporting the offset where it starts.
    """
    out = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        two = source[i : i + 2]
        if two == "//":
            j = source.find("\n", i)
            if j == -1:
                j = n
            out.append(" ")
            i = j  # keep the newline itself
        elif two == "/*":
            j = source.find("*/", i + 2)
            if j == -1:
                raise UnterminatedComment(i)
            out.append(" ")
            i = j + 2
        elif c == '"' or c == "'":
            quote = c
            j = i + 1
            while j < n:
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == quote or source[j] == "\n":
                    j += 1
                    break
                j += 1
            out.append(source[i:j])
            i = j
        else:
            out.append(c)
            i += 1
    return "".join(out)


def lex(source: str) -> list[Token]:
    """Deterministic maximal-munch tokenization of comment-free source."""
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isalpha() or c in "_$":
            m = _IDENT_RE.match(source, i)
            text = m.group()
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENTIFIER
            tokens.append(Token(kind, text, i))
            i = m.end()
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            m = _FLOAT_RE.match(source, i)
            if m:
                tokens.append(Token(TokenKind.FLOAT_LITERAL, m.group(), i))
                i = m.end()
                continue
            m = _INT_RE.match(source, i)
            tokens.append(Token(TokenKind.INT_LITERAL, m.group(), i))
            i = m.end()
            continue
        if c == '"':
            m = _STRING_RE.match(source, i)
            if not m:
                raise LexError(i, source[i : i + 20])
            tokens.append(Token(TokenKind.STRING_LITERAL, m.group(), i))
            i = m.end()
            continue
        if c == "'":
            m = _CHAR_RE.match(source, i)
            if not m:
                raise LexError(i, source[i : i + 20])
            tokens.append(Token(TokenKind.CHAR_LITERAL, m.group(), i))
            i = m.end()
            continue
        if c == "@":
            m = _ANNOTATION_RE.match(source, i)
            if not m:
                raise LexError(i, source[i : i + 20])
            tokens.append(Token(TokenKind.ANNOTATION, m.group(), i))
            i = m.end()
            continue
        m = _SYMBOL_RE.match(source, i)
        if not m:
            raise LexError(i, source[i : i + 20])
        text = m.group()
        kind = TokenKind.PUNCTUATION if text in _PUNCT_SET else TokenKind.OPERATOR
        tokens.append(Token(kind, text, i))
        i = m.end()
    return tokens


def _match_bracket(tokens: list[Token], i: int) -> int:
    """Index just past the token matching the opener at i; (), [], {}."""
    pairs = {"(": ")", "[": "]", "{": "}"}
    stack = [pairs[tokens[i].text]]
    j = i + 1
    while j < len(tokens):
        t = tokens[j].text
        if t in pairs:
            stack.append(pairs[t])
        elif t in (")", "]", "}"):
            if t != stack.pop():
                raise ParseError(f"mismatched bracket {t!r} at offset {tokens[j].byte_offset}")
            if not stack:
                return j + 1
        j += 1
    raise ParseError(f"unclosed bracket at offset {tokens[i].byte_offset}")


_ANGLE_DELTA = {"<": 1, ">": -1, ">>": -2, ">>>": -3}

_TYPE_KEYWORDS = frozenset(["class", "interface", "enum"])


def _skip_statement(tokens: list[Token], i: int) -> int:
    """Skip past the ';' ending a field/statement, balancing all brackets."""
    while i < len(tokens):
        t = tokens[i].text
        if t == ";":
            return i + 1
        if t in ("(", "[", "{"):
            i = _match_bracket(tokens, i)
            continue
        if t in (")", "]", "}"):
            return i  # enclosing scope closes before a ';' appears
        i += 1
    return i


def _find_type_body(tokens: list[Token], i: int) -> int:
    """From a class/interface/enum keyword, index of the body's '{'."""
    while i < len(tokens) and tokens[i].text != "{":
        if tokens[i].text == ";":
            return -1  # e.g. forward-ish declaration, nothing to parse
        i += 1
    return i if i < len(tokens) else -1


def _scan_for_types(tokens: list[Token], i: int, end: int, source: str, spans: list[MethodSpan]) -> None:
    """Find named type declarations in [i, end) and extract their methods."""
    while i < end:
        t = tokens[i]
        if (
            t.kind is TokenKind.KEYWORD
            and t.text in _TYPE_KEYWORDS
            and (i == 0 or tokens[i - 1].text != ".")
        ):
            body = _find_type_body(tokens, i)
            if body == -1 or body >= end:
                i += 1
                continue
            close = _match_bracket(tokens, body)
            _parse_type_body(tokens, body + 1, close - 1, t.text == "enum", source, spans)
            i = close
            continue
        i += 1


def _parse_member(tokens: list[Token], i: int, end: int, source: str, spans: list[MethodSpan]) -> int:
    """Parse one type-body member starting at i; returns index after it."""
    start = i
    # Leading annotations (with optional argument lists) and modifiers.
    while i < end:
        t = tokens[i]
        if t.kind is TokenKind.ANNOTATION:
            i += 1
            if i < end and tokens[i].text == "(":
                i = _match_bracket(tokens, i)
        elif t.kind is TokenKind.KEYWORD and t.text in MODIFIER_KEYWORDS:
            i += 1
        else:
            break
    if i >= end:
        return end
    if tokens[i].kind is TokenKind.KEYWORD and tokens[i].text in _TYPE_KEYWORDS:
        body = _find_type_body(tokens, i)
        if body == -1 or body >= end:
            return _skip_statement(tokens, i)
        close = _match_bracket(tokens, body)
        _parse_type_body(tokens, body + 1, close - 1, tokens[i].text == "enum", source, spans)
        return close
    # Scan to the parameter list '(' of a method header, tracking generic
    # angle depth so commas and '=' inside type arguments don't mislead us.
    angle = 0
    j = i
    while j < end:
        text = tokens[j].text
        if text in _ANGLE_DELTA:
            angle = max(0, angle + _ANGLE_DELTA[text])
        elif angle == 0:
            if text == "(":
                break
            if text in ("=", ";"):
                return _skip_statement(tokens, i)
            if text == "{":  # stray block; treat as initializer
                return _match_bracket(tokens, j)
        j += 1
    else:
        return end
    if j == i or tokens[j - 1].kind is not TokenKind.IDENTIFIER:
        return _skip_statement(tokens, j)
    name = tokens[j - 1].text
    params_close = _match_bracket(tokens, j)  # index just past ')'
    param_count = _count_params(tokens, j, params_close - 1)
    # Optional throws clause, then either a body or ';' (abstract/native).
    k = params_close
    while k < end and tokens[k].text not in ("{", ";"):
        k += 1
    if k >= end or tokens[k].text == ";":
        return k + 1 if k < end else end
    body_open = k
    body_close = _match_bracket(tokens, body_open)  # just past '}'
    sig_start = tokens[start].byte_offset
    body_start = tokens[body_open].byte_offset
    body_end = tokens[body_close - 1].byte_offset + 1
    spans.append(
        MethodSpan(
            name=name,
            signature_text=source[sig_start:body_start].rstrip(),
            body_start=body_start,
            body_end=body_end,
            param_count=param_count,
            signature_start=sig_start,
        )
    )
    # Local named classes keep their own extractable methods.
    _scan_for_types(tokens, body_open + 1, body_close - 1, source, spans)
    return body_close


def _count_params(tokens: list[Token], open_idx: int, close_idx: int) -> int:
    if close_idx - open_idx <= 1:
        return 0
    count = 1
    depth = 0
    angle = 0
    for j in range(open_idx + 1, close_idx):
        text = tokens[j].text
        if text in ("(", "[", "{"):
            depth += 1
        elif text in (")", "]", "}"):
            depth -= 1
        elif text in _ANGLE_DELTA:
            angle = max(0, angle + _ANGLE_DELTA[text])
        elif text == "," and depth == 0 and angle == 0:
            count += 1
    return count


def _parse_type_body(
    tokens: list[Token], i: int, end: int, is_enum: bool, source: str, spans: list[MethodSpan]
) -> None:
    """Extract members between a type body's braces: tokens[i:end]."""
    if is_enum:
        # Constants (possibly with argument lists and bodies) run until the
        # first top-level ';'. Constant bodies are anonymous-class-like and
        # are deliberately not mined for methods.
        while i < end:
            text = tokens[i].text
            if text == ";":
                i += 1
                break
            if text in ("(", "[", "{"):
                i = _match_bracket(tokens, i)
            else:
                i += 1
    while i < end:
        text = tokens[i].text
        if text == ";":
            i += 1
        elif text == "{":  # instance initializer
            i = _match_bracket(tokens, i)
        elif text == "static" and i + 1 < end and tokens[i + 1].text == "{":
            i = _match_bracket(tokens, i + 1)
        else:
            i = _parse_member(tokens, i, end, source, spans)


def extract_methods(source: str) -> list[MethodSpan]:
    """Locate every method (constructors included) in comment-free source.

    Methods are found by header matching (`name ( params ) [throws ...] {`)
    inside named type bodies; anonymous classes, lambdas, enum-constant
    bodies and initializer blocks are never extracted. Spans are ordered by
    body_start and may nest (inner/local classes).
    """
    tokens = lex(source)
    depth = 0
    for t in tokens:
        if t.text == "{":
            depth += 1
        elif t.text == "}":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced '}}' at offset {t.byte_offset}")
    if depth != 0:
        raise ParseError("unbalanced braces at end of input")
    spans: list[MethodSpan] = []
    _scan_for_types(tokens, 0, len(tokens), source, spans)
    spans.sort(key=lambda s: s.body_start)
    return spans
