"""Address query language: quoted wildcard phrases, OR, implicit AND, NOT, NEAR/n.

Grammar::

    expr   := term (OR term)*
    term   := factor ((AND)? factor | NOT factor)*
    factor := "phrase" | bareword | NOT factor
            | '(' NOT expr ')' | '(' expr ')' | '(' expr NEAR/n expr ')'

Adjacent factors are AND-ed, so ``UJI (NOT Kyoto)`` reads as UJI AND NOT Kyoto.
Keywords are uppercase. Words and phrases are split into tokens on every
character that is neither alphanumeric nor a wildcard, the same way field text
is tokenized, so ``UPV/EHU`` is the two-token phrase ``upv ehu``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .errors import QuerySyntaxError
from .textnorm import fold, tokenize

__all__ = [
    "And",
    "Near",
    "Not",
    "Or",
    "Phrase",
    "QueryExpr",
    "WildcardToken",
    "evaluate",
    "parse",
    "wildcard_match",
]

_PATTERN_TOKEN_RE = re.compile(r"(?:[^\W_]|[*?])+")


@lru_cache(maxsize=1 << 16)
def _glob(pattern: str, token: str) -> bool:
    # linear-time greedy matcher, backtracking only to the most recent '*'
    p = s = 0
    star = -1
    mark = 0
    while s < len(token):
        if p < len(pattern) and (pattern[p] == "?" or pattern[p] == token[s]):
            p += 1
            s += 1
        elif p < len(pattern) and pattern[p] == "*":
            star = p
            mark = s
            p += 1
        elif star >= 0:
            p = star + 1
            mark += 1
            s = mark
        else:
            return False
    while p < len(pattern) and pattern[p] == "*":
        p += 1
    return p == len(pattern)


@dataclass(frozen=True)
class WildcardToken:
    """One token pattern; ``*`` is zero or more characters, ``?`` exactly one."""

    pattern: str

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("empty wildcard token")
        object.__setattr__(self, "pattern", fold(self.pattern))

    def matches(self, token: str) -> bool:
        return _glob(self.pattern, token)

    def __str__(self) -> str:
        return self.pattern


def wildcard_match(pattern: WildcardToken | str, token: str) -> bool:
    """Anchored, case- and diacritic-insensitive wildcard match of one token."""
    if not isinstance(pattern, WildcardToken):
        pattern = WildcardToken(pattern)
    return _glob(pattern.pattern, fold(token))


@dataclass(frozen=True)
class Phrase:
    tokens: tuple[WildcardToken, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("phrase needs at least one token")

    def __str__(self) -> str:
        inner = " ".join(map(str, self.tokens))
        return f'"{inner}"' if len(self.tokens) > 1 else inner


@dataclass(frozen=True)
class Or:
    left: "QueryExpr"
    right: "QueryExpr"

    def __str__(self) -> str:
        return f"({self.left} OR {self.right})"


@dataclass(frozen=True)
class And:
    left: "QueryExpr"
    right: "QueryExpr"

    def __str__(self) -> str:
        return f"({self.left} AND {self.right})"


@dataclass(frozen=True)
class Not:
    operand: "QueryExpr"

    def __str__(self) -> str:
        return f"(NOT {self.operand})"


@dataclass(frozen=True)
class Near:
    left: "QueryExpr"
    right: "QueryExpr"
    distance: int

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError("NEAR distance must be non-negative")

    def __str__(self) -> str:
        return f"({self.left} NEAR/{self.distance} {self.right})"


QueryExpr = Union[Phrase, Or, And, Not, Near]


def phrase(text: str) -> Phrase:
    """Build a Phrase from source text, splitting it the way fields are split."""
    parts = _PATTERN_TOKEN_RE.findall(fold(text))
    if not parts:
        raise ValueError(f"no searchable token in {text!r}")
    return Phrase(tuple(WildcardToken(p) for p in parts))


# --- lexer -----------------------------------------------------------------

@dataclass(frozen=True)
class _Tok:
    kind: str  # LPAREN RPAREN PHRASE WORD OR AND NOT NEAR END
    text: str
    offset: int  # byte offset into the UTF-8 source
    distance: int = 0


def _first_unmatched_paren(source: str, stray_quote: int) -> int | None:
    """Index of the first unmatched '(' when the quote at ``stray_quote`` is ignored."""
    stack: list[int] = []
    in_quote = False
    for k, ch in enumerate(source):
        if ch == '"' and k != stray_quote:
            in_quote = not in_quote
        elif in_quote:
            continue
        elif ch == "(":
            stack.append(k)
        elif ch == ")" and stack:
            stack.pop()
    return stack[0] if stack else None


def _lex(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    n = len(source)

    def boff(k: int) -> int:
        return len(source[:k].encode("utf-8"))

    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
        elif ch == "(":
            toks.append(_Tok("LPAREN", ch, boff(i)))
            i += 1
        elif ch == ")":
            toks.append(_Tok("RPAREN", ch, boff(i)))
            i += 1
        elif ch == '"':
            end = source.find('"', i + 1)
            if end < 0:
                paren = _first_unmatched_paren(source, stray_quote=i)
                if paren is not None:
                    raise QuerySyntaxError("unbalanced parenthesis", boff(paren))
                raise QuerySyntaxError("unterminated quoted phrase", boff(i))
            body = source[i + 1:end]
            if not _PATTERN_TOKEN_RE.search(fold(body)):
                raise QuerySyntaxError("empty phrase", boff(i))
            toks.append(_Tok("PHRASE", body, boff(i)))
            i = end + 1
        else:
            j = i
            while j < n and not source[j].isspace() and source[j] not in '()"':
                j += 1
            word = source[i:j]
            if word in ("OR", "AND", "NOT"):
                toks.append(_Tok(word, word, boff(i)))
            elif word == "NEAR" or word.startswith("NEAR/"):
                digits = word[5:]
                if not digits.isdigit() or not digits.isascii():
                    raise QuerySyntaxError("malformed NEAR distance", boff(i))
                toks.append(_Tok("NEAR", word, boff(i), int(digits)))
            elif not _PATTERN_TOKEN_RE.search(fold(word)):
                raise QuerySyntaxError(f"no searchable token in {word!r}", boff(i))
            else:
                toks.append(_Tok("WORD", word, boff(i)))
            i = j
    toks.append(_Tok("END", "", boff(n)))
    return toks


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, source: str):
        self.toks = _lex(source)
        self.pos = 0
        self.open_parens: list[int] = []

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_rparen(self) -> None:
        tok = self.peek()
        if tok.kind != "RPAREN":
            # report the unmatched opening paren, not where we ran out
            raise QuerySyntaxError("unbalanced parenthesis", self.open_parens[-1])
        self.take()
        self.open_parens.pop()

    def expr(self) -> QueryExpr:
        node = self.term()
        while self.peek().kind == "OR":
            self.take()
            node = Or(node, self.term())
        return node

    def term(self) -> QueryExpr:
        node = self.factor()
        while True:
            kind = self.peek().kind
            if kind in ("PHRASE", "WORD", "LPAREN"):
                node = And(node, self.factor())
            elif kind == "AND":
                self.take()
                node = And(node, self.factor())
            elif kind == "NOT":
                self.take()
                node = And(node, Not(self.factor()))
            else:
                return node

    def factor(self) -> QueryExpr:
        tok = self.take()
        if tok.kind in ("PHRASE", "WORD"):
            return phrase(tok.text)
        if tok.kind == "NOT":
            return Not(self.factor())
        if tok.kind == "LPAREN":
            self.open_parens.append(tok.offset)
            if self.peek().kind == "NOT":
                self.take()
                node: QueryExpr = Not(self.expr())
                self.expect_rparen()
                return node
            node = self.expr()
            if self.peek().kind == "NEAR":
                near = self.take()
                node = Near(node, self.expr(), near.distance)
            self.expect_rparen()
            return node
        if tok.kind == "END":
            if self.open_parens:
                raise QuerySyntaxError("unbalanced parenthesis", self.open_parens[-1])
            raise QuerySyntaxError("unexpected end of expression", tok.offset)
        raise QuerySyntaxError(f"unexpected {tok.text!r}", tok.offset)


def parse(source: str) -> QueryExpr:
    """Parse an address expression into an immutable tree.

    Raises QuerySyntaxError (with a byte offset) on unbalanced quotes or
    parentheses, empty phrases and malformed NEAR distances.
    """
    if not source or not source.strip():
        raise QuerySyntaxError("empty expression", 0)
    p = _Parser(source)
    node = p.expr()
    tok = p.peek()
    if tok.kind != "END":
        if tok.kind == "RPAREN":
            raise QuerySyntaxError("unbalanced parenthesis", tok.offset)
        raise QuerySyntaxError(f"unexpected {tok.text!r}", tok.offset)
    return node


# --- evaluation --------------------------------------------------------------

def _phrase_spans(node: Phrase, tokens: list[str], first_only: bool = False) -> list[tuple[int, int]]:
    k = len(node.tokens)
    pats = [t.pattern for t in node.tokens]
    spans = []
    for i in range(len(tokens) - k + 1):
        if all(_glob(pats[j], tokens[i + j]) for j in range(k)):
            spans.append((i, i + k - 1))
            if first_only:
                break
    return spans


def _gap(a: tuple[int, int], b: tuple[int, int]) -> int:
    # tokens strictly between the two spans; overlapping spans count as adjacent
    return max(0, max(a[0], b[0]) - min(a[1], b[1]) - 1)


def _spans(node: QueryExpr, tokens: list[str]) -> set[tuple[int, int]]:
    """Match positions of positional sub-expressions (NOT carries none)."""
    if isinstance(node, Phrase):
        return set(_phrase_spans(node, tokens))
    if isinstance(node, Or):
        return _spans(node.left, tokens) | _spans(node.right, tokens)
    if isinstance(node, And):
        if not (_truth(node.left, tokens) and _truth(node.right, tokens)):
            return set()
        return _spans(node.left, tokens) | _spans(node.right, tokens)
    if isinstance(node, Not):
        return set()
    if isinstance(node, Near):
        left = _spans(node.left, tokens)
        right = _spans(node.right, tokens)
        return {
            (min(a[0], b[0]), max(a[1], b[1]))
            for a in left
            for b in right
            if _gap(a, b) <= node.distance
        }
    raise TypeError(f"not a query node: {node!r}")


def _truth(node: QueryExpr, tokens: list[str]) -> bool:
    if isinstance(node, Phrase):
        return bool(_phrase_spans(node, tokens, first_only=True))
    if isinstance(node, Or):
        return _truth(node.left, tokens) or _truth(node.right, tokens)
    if isinstance(node, And):
        return _truth(node.left, tokens) and _truth(node.right, tokens)
    if isinstance(node, Not):
        return not _truth(node.operand, tokens)
    if isinstance(node, Near):
        return bool(_spans(node, tokens))
    raise TypeError(f"not a query node: {node!r}")


def evaluate(expr: QueryExpr, field_text: str | list[str]) -> bool:
    """Evaluate ``expr`` against free text (or an already tokenized field).

    A phrase matches when its tokens match consecutive field tokens. NEAR/n
    holds when some match of each side has at most n tokens between them.
    """
    tokens = tokenize(field_text) if isinstance(field_text, str) else field_text
    return _truth(expr, tokens)
