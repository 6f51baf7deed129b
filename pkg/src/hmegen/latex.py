"""Canonical LaTeX token handling for CROHME-style math ground truth.

Ground truth is normalized to a spaced token stream over a fixed symbol
inventory (e.g. ``x ^ { 2 } + 2 x + 1``). The parser here turns such a
stream into a symbol relation tree skeleton whose nodes carry labels but
no symbol ids yet; id assignment happens during InkML alignment.
"""

from __future__ import annotations

from .errors import StructureError
from .ink import RelationLabel, SrtNode

# The 101 CROHME symbol classes. "-" doubles as minus sign and fraction
# bar; over/under children disambiguate the two in a tree.
SYMBOL_CLASSES = frozenset(
    [str(d) for d in range(10)]
    + [chr(c) for c in range(ord("a"), ord("z") + 1)]
    + list("ABCEFGHILMNPRSTVXY")
    + [
        "\\alpha", "\\beta", "\\gamma", "\\Delta", "\\lambda",
        "\\mu", "\\phi", "\\pi", "\\sigma", "\\theta",
        "\\cos", "\\sin", "\\tan", "\\log", "\\lim",
        "\\sum", "\\int", "\\sqrt",
        "\\div", "\\times", "\\pm", "+", "-", "/",
        "=", "\\neq", "\\leq", "\\geq", "<", ">",
        "\\exists", "\\forall", "\\in", "\\rightarrow",
        "\\infty", "\\ldots", "\\prime",
        "(", ")", "[", "]", "\\{", "\\}", "|",
        "!", ",", ".",
    ]
)

# Accepted spellings found in raw truth annotations, mapped to canonical tokens.
TOKEN_ALIASES = {
    "\\lt": "<",
    "\\gt": ">",
    "\\to": "\\rightarrow",
    "\\cdots": "\\ldots",
    "\\dots": "\\ldots",
    "\\lbrack": "[",
    "\\rbrack": "]",
    "\\lbrace": "\\{",
    "\\rbrace": "\\}",
    "\\vert": "|",
    "\\Vert": "|",
    "\\ne": "\\neq",
    "\\le": "\\leq",
    "\\ge": "\\geq",
    "'": "\\prime",
    "COMMA": ",",
}

# Unicode spellings seen in MathML text content.
UNICODE_ALIASES = {
    "−": "-", "×": "\\times", "÷": "\\div",
    "±": "\\pm", "≤": "\\leq", "≥": "\\geq",
    "≠": "\\neq", "→": "\\rightarrow", "∑": "\\sum",
    "∫": "\\int", "√": "\\sqrt", "∞": "\\infty",
    "…": "\\ldots", "′": "\\prime", "∈": "\\in",
    "∃": "\\exists", "∀": "\\forall",
    "α": "\\alpha", "β": "\\beta", "γ": "\\gamma",
    "Δ": "\\Delta", "λ": "\\lambda", "μ": "\\mu",
    "φ": "\\phi", "ϕ": "\\phi", "π": "\\pi",
    "σ": "\\sigma", "θ": "\\theta",
    "sin": "\\sin", "cos": "\\cos", "tan": "\\tan",
    "log": "\\log", "lim": "\\lim", "{": "\\{", "}": "\\}",
}

STRUCTURAL_TOKENS = frozenset(["^", "_", "{", "}", "\\frac", "\\sqrt"])

# Operators taking limits below/above rather than sub/superscripts.
BIG_OPERATORS = frozenset(["\\sum", "\\int", "\\lim"])

BINARY_OPERATORS = frozenset(
    ["+", "-", "\\pm", "\\times", "\\div", "=",
     "\\neq", "<", ">", "\\leq", "\\geq", "\\rightarrow"]
)

OPEN_BRACKETS = frozenset(["(", "[", "\\{"])
CLOSE_BRACKETS = frozenset([")", "]", "\\}"])
BAR_BRACKET = "|"

FRACTION_BAR_LABEL = "-"
RADICAL_LABEL = "\\sqrt"

_DROPPED_COMMANDS = frozenset(["\\left", "\\right", "\\limits", "\\displaystyle"])


def normalize_symbol(text: str) -> str:
    """Map a raw symbol spelling (truth label or MathML text) to its canonical token."""
    text = text.strip()
    text = UNICODE_ALIASES.get(text, text)
    text = TOKEN_ALIASES.get(text, text)
    if text in SYMBOL_CLASSES:
        return text
    raise StructureError(f"unknown symbol {text!r}")


def tokenize(latex: str) -> list[str]:
    """Split a raw LaTeX truth string into normalized tokens."""
    tokens: list[str] = []
    i = 0
    n = len(latex)
    while i < n:
        ch = latex[i]
        if ch.isspace() or ch == "$":
            i += 1
            continue
        if ch == "\\":
            j = i + 1
            while j < n and latex[j].isalpha():
                j += 1
            if j == i + 1 and j < n:
                j += 1  # escaped single char such as \{
            tok = latex[i:j]
            i = j
        else:
            tok = ch
            i += 1
        tok = TOKEN_ALIASES.get(tok, tok)
        if tok in _DROPPED_COMMANDS:
            continue
        tokens.append(tok)
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise StructureError("unexpected end of expression")
        self.pos += 1
        return tok


def parse_tokens(tokens: list[str]) -> SrtNode:
    """Parse a token stream into a relation-tree skeleton (empty symbol ids)."""
    stream = _TokenStream(tokens)
    head = _parse_sequence(stream)
    if stream.peek() is not None:
        raise StructureError(f"unexpected token {stream.peek()!r}")
    if head is None:
        raise StructureError("empty expression")
    return head


def parse_latex(latex: str) -> SrtNode:
    return parse_tokens(tokenize(latex))


def _parse_sequence(stream: _TokenStream) -> SrtNode | None:
    head: SrtNode | None = None
    tail: SrtNode | None = None
    while True:
        tok = stream.peek()
        if tok is None or tok == "}":
            return head
        if tok in ("^", "_"):
            if tail is None:
                raise StructureError(f"script {tok!r} with no base")
            stream.next()
            script = _parse_group(stream)
            attach_script(tail, tok, script)
            continue
        item_head = _parse_item(stream)
        if head is None:
            head = item_head
        else:
            assert tail is not None
            tail.attach(RelationLabel.RIGHT, item_head)
        tail = item_head.baseline_tail()


def _parse_item(stream: _TokenStream) -> SrtNode:
    tok = stream.next()
    if tok == "{":
        inner = _parse_sequence(stream)
        if stream.next() != "}":
            raise StructureError("unbalanced braces")
        if inner is None:
            raise StructureError("empty group")
        return inner
    if tok == "\\frac":
        node = SrtNode("", FRACTION_BAR_LABEL)
        node.attach(RelationLabel.OVER, _parse_group(stream))
        node.attach(RelationLabel.UNDER, _parse_group(stream))
        return node
    if tok == "\\sqrt":
        node = SrtNode("", RADICAL_LABEL)
        node.attach(RelationLabel.INSIDE, _parse_group(stream))
        return node
    if tok == "}":
        raise StructureError("unbalanced braces")
    return SrtNode("", normalize_symbol(tok))


def _parse_group(stream: _TokenStream) -> SrtNode:
    """A braced subexpression, or a single item when braces are omitted."""
    if stream.peek() == "{":
        stream.next()
        inner = _parse_sequence(stream)
        if stream.next() != "}":
            raise StructureError("unbalanced braces")
        if inner is None:
            raise StructureError("empty group")
        return inner
    return _parse_item(stream)


def attach_script(base: SrtNode, marker: str, script: SrtNode) -> None:
    # Limits of big operators are under/over relations; plain symbols take
    # sub/superscripts. This keeps the emitted form canonical.
    if base.label in BIG_OPERATORS:
        rel = RelationLabel.UNDER if marker == "_" else RelationLabel.OVER
    else:
        rel = RelationLabel.SUBSCRIPT if marker == "_" else RelationLabel.SUPERSCRIPT
    base.attach(rel, script)
