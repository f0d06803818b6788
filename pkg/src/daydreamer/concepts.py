"""Parenthesized concept terms: the symbolic currency of the whole simulator.

A concept is either an atom (symbol, number, quoted text) or a compound
``(head arg1 arg2 ...)``.  Symbols are case-insensitive and normalized to
lower case at parse time; variables are symbols starting with ``?``.
Serialization is canonical: parsing the output of :func:`fmt` yields an
equal term, and equal terms serialize to equal strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union


class ConceptError(ValueError):
    """Raised on malformed concept text.  Carries a 1-based position."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Text:
    """Quoted string atom.  Keeps its case, unlike symbols."""

    value: str

    def __repr__(self) -> str:
        return f"Text({self.value!r})"


Atom = Union[str, int, float, Text]


@dataclass(frozen=True)
class Concept:
    """Compound term with a symbol head and positional arguments."""

    head: str
    args: tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        if not self.head or self.head.startswith("?"):
            raise ValueError(f"invalid concept head: {self.head!r}")

    def __repr__(self) -> str:
        return f"Concept({fmt(self)!r})"


Term = Union[Atom, Concept]
Binding = dict[str, Term]


def is_var(term: Term) -> bool:
    return isinstance(term, str) and term.startswith("?")


def compound(head: str, *args: Term) -> Concept:
    return Concept(head.lower(), tuple(args))


# ---------------------------------------------------------------------------
# Reader


_DELIMS = set("()\"")


def _tokenize(text: str) -> Iterator[tuple[str, str, int, int]]:
    """Yield (kind, value, line, column) tokens.  Kinds: open, close, atom, text."""
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            yield "open", ch, line, col
            i += 1
            col += 1
            continue
        if ch == ")":
            yield "close", ch, line, col
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while True:
                if i >= n:
                    raise ConceptError("unterminated string", start_line, start_col)
                c = text[i]
                if c == "\\" and i + 1 < n:
                    buf.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\n":
                    raise ConceptError("newline in string", start_line, start_col)
                buf.append(c)
                i += 1
                col += 1
            yield "text", "".join(buf), start_line, start_col
            continue
        start_line, start_col = line, col
        j = i
        while j < n and text[j] not in " \t\r\n#" and text[j] not in _DELIMS:
            j += 1
        yield "atom", text[i:j], start_line, start_col
        col += j - i
        i = j


# strict digit shapes only; "inf", "nan", and "1_0" stay symbols
_INT_ATOM = re.compile(r"[+-]?\d+\Z")
_FLOAT_ATOM = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?\Z|[+-]?\d+[eE][+-]?\d+\Z")


def _atom(value: str, line: int, col: int) -> Atom:
    if _INT_ATOM.match(value):
        return int(value)
    if _FLOAT_ATOM.match(value):
        return float(value)
    lowered = value.lower()
    if lowered == "?":
        raise ConceptError("bare '?' is not a variable", line, col)
    return lowered


def parse_many(text: str) -> list[Term]:
    """Parse every top-level term in *text*."""
    stack: list[list[Term]] = []
    opens: list[tuple[int, int]] = []
    out: list[Term] = []

    def emit(term: Term, line: int, col: int) -> None:
        if stack:
            stack[-1].append(term)
        else:
            out.append(term)

    last = (1, 1)
    for kind, value, line, col in _tokenize(text):
        last = (line, col)
        if kind == "open":
            stack.append([])
            opens.append((line, col))
        elif kind == "close":
            if not stack:
                raise ConceptError("unbalanced ')'", line, col)
            items = stack.pop()
            opens.pop()
            if not items:
                raise ConceptError("empty concept", line, col)
            head = items[0]
            if not isinstance(head, str) or head.startswith("?"):
                raise ConceptError("concept head must be a plain symbol", line, col)
            emit(Concept(head, tuple(items[1:])), line, col)
        elif kind == "text":
            emit(Text(value), line, col)
        else:
            emit(_atom(value, line, col), line, col)
    if stack:
        line, col = opens[-1]
        raise ConceptError("unclosed '('", line, col)
    return out


def parse(text: str) -> Term:
    """Parse exactly one term."""
    terms = parse_many(text)
    if len(terms) != 1:
        raise ConceptError(f"expected one term, found {len(terms)}", *(1, 1))
    return terms[0]


def fmt(term: Term) -> str:
    """Canonical serialization.  ``parse(fmt(t)) == t`` for any term t."""
    if isinstance(term, Concept):
        inner = " ".join([term.head] + [fmt(a) for a in term.args])
        return f"({inner})"
    if isinstance(term, Text):
        escaped = term.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(term, bool):  # guard: bools are ints in python
        raise TypeError("bool is not a concept atom")
    if isinstance(term, float):
        return repr(term)
    return str(term)


# ---------------------------------------------------------------------------
# Substitution and unification


def substitute(term: Term, binding: Mapping[str, Term]) -> Term:
    if isinstance(term, str) and term.startswith("?"):
        value = binding.get(term, term)
        # chase chains like ?a -> ?b -> debra
        seen = {term}
        while isinstance(value, str) and value.startswith("?") and value in binding:
            if value in seen:
                break
            seen.add(value)
            value = binding[value]
        if isinstance(value, Concept):
            return substitute(value, binding)
        return value
    if isinstance(term, Concept):
        return Concept(term.head, tuple(substitute(a, binding) for a in term.args))
    return term


def variables(term: Term) -> set[str]:
    if isinstance(term, str) and term.startswith("?"):
        return {term}
    if isinstance(term, Concept):
        out: set[str] = set()
        for a in term.args:
            out |= variables(a)
        return out
    return set()


def is_ground(term: Term) -> bool:
    return not variables(term)


def _walk(term: Term, binding: Mapping[str, Term]) -> Term:
    while isinstance(term, str) and term.startswith("?") and term in binding:
        term = binding[term]
    return term


def _occurs(var: str, term: Term, binding: Mapping[str, Term]) -> bool:
    term = _walk(term, binding)
    if term == var:
        return True
    if isinstance(term, Concept):
        return any(_occurs(var, a, binding) for a in term.args)
    return False


def unify(a: Term, b: Term, binding: Optional[Binding] = None) -> Optional[Binding]:
    """Most general unifier of two terms, or None.

    The returned binding extends the one passed in; the input dict is not
    mutated.  Numeric atoms unify only on equality, so 1 and 1.0 differ
    exactly when their formatted forms differ.
    """
    if binding is None:
        binding = {}
    a = _walk(a, binding)
    b = _walk(b, binding)
    if is_var(a) and is_var(b) and a == b:
        return binding
    if is_var(a):
        if _occurs(a, b, binding):
            return None
        out = dict(binding)
        out[a] = b
        return out
    if is_var(b):
        if _occurs(b, a, binding):
            return None
        out = dict(binding)
        out[b] = a
        return out
    if isinstance(a, Concept) and isinstance(b, Concept):
        if a.head != b.head or len(a.args) != len(b.args):
            return None
        current: Optional[Binding] = binding
        for x, y in zip(a.args, b.args):
            current = unify(x, y, current)
            if current is None:
                return None
        return current
    if isinstance(a, Concept) or isinstance(b, Concept):
        return None
    if type(a) is type(b) and a == b:
        return binding
    # ints and floats compare canonically, 2 vs 2.0 are distinct atoms
    return None


_RENAME_COUNTER = 0


def rename_apart(term: Term) -> Term:
    """Rename every variable in *term* to a fresh one (standardizing apart)."""
    global _RENAME_COUNTER
    _RENAME_COUNTER += 1
    tag = _RENAME_COUNTER
    mapping = {v: f"{v}~{tag}" for v in sorted(variables(term))}
    return substitute(term, mapping)


def base_var(name: str) -> str:
    """Undo rename_apart decoration for display."""
    return name.split("~", 1)[0]
