"""English realization of concepts.

Templates are data: a table keyed by (head, form) whose patterns carry
numbered slots referring to the concept's arguments.  A slot may name a
grammatical case for a person symbol, a sub-form for a nested concept,
or a verb whose agreement follows the slot's referent.

One realized sentence tracks its mentions.  The first mention of a
person uses the display name, later mentions use a pronoun, which is
what turns "Debra ... Debra" into "Debra ... her" without the
templates having to care.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

from .concepts import Concept, Term, Text

CASES = ("subj", "obj", "poss", "refl")

# pronoun tables by gender; "self" is the narrating agent
PRONOUNS: dict[str, dict[str, str]] = {
    "female": {"subj": "she", "obj": "her", "poss": "her", "refl": "herself"},
    "male": {"subj": "he", "obj": "him", "poss": "his", "refl": "himself"},
    "neuter": {"subj": "it", "obj": "it", "poss": "its", "refl": "itself"},
    "self": {"subj": "I", "obj": "me", "poss": "my", "refl": "myself"},
}

BANNER_WIDTH = 60

_SLOT = re.compile(r"\{(\d+)(?::([^{}]*))?\}")

TemplateKey = tuple[str, str]
Warn = Callable[[str], None]


@dataclass
class Realizer:
    templates: dict[TemplateKey, str]
    displays: dict[str, str] = field(default_factory=dict)
    genders: dict[str, str] = field(default_factory=dict)
    self_agent: str = "me"
    warn: Optional[Warn] = None

    # -- public ------------------------------------------------------------

    def realize(self, concept: Term, form: str = "say") -> str:
        state: dict[str, int] = {}
        text = self._render(concept, form, state)
        return _capitalize(text)

    def realize_template(self, pattern: str, args: Sequence[Term]) -> str:
        """Render an ad hoc pattern against explicit slot arguments."""
        state: dict[str, int] = {}
        text = self._apply(pattern, tuple(args), state)
        return _capitalize(text)

    def banner(self, text: str) -> str:
        bar = "-" * BANNER_WIDTH
        return f"{bar}\n{text}\n{bar}"

    def tag(self, concept: Term) -> str:
        """Compact upper-case rendering used by trace lines."""
        if isinstance(concept, Concept):
            parts = [concept.head.upper()]
            for arg in concept.args:
                if isinstance(arg, Concept):
                    parts.append(f"({arg.head.upper()})")
                elif isinstance(arg, Text):
                    parts.append(f'"{arg.value}"')
                elif isinstance(arg, str):
                    parts.append(arg.upper())
                else:
                    parts.append(str(arg))
            return " ".join(parts)
        if isinstance(concept, Text):
            return f'"{concept.value}"'
        if isinstance(concept, str):
            return concept.upper()
        return str(concept)

    def wm_tag(self, entry_id: int, concept: Term) -> str:
        return f"[^W.{entry_id}: {self.tag(concept)}]"

    def goal_tag(self, goal_id: int, concept: Term) -> str:
        return f"[^G.{goal_id}: {self.tag(concept)}]"

    # -- internals ---------------------------------------------------------

    def _warn(self, message: str) -> None:
        if self.warn:
            self.warn(message)

    def _render(self, term: Term, form: str, state: dict[str, int]) -> str:
        if isinstance(term, str):
            case = form if form in CASES else "subj"
            return self._symbol(term, case, state)
        if isinstance(term, Text):
            return term.value
        if isinstance(term, (int, float)):
            return str(term)
        assert isinstance(term, Concept)
        pattern = self.templates.get((term.head, form))
        if pattern is None:
            self._warn(f"no template for ({term.head} {form})")
            return f"<<{term.head}>>"
        return self._apply(pattern, term.args, state)

    def _apply(self, pattern: str, args: tuple[Term, ...], state: dict[str, int]) -> str:
        def fill(match: re.Match) -> str:
            index = int(match.group(1))
            spec = match.group(2)
            if index >= len(args):
                self._warn(f"slot {{{index}}} out of range in {pattern!r}")
                return f"<<{index}>>"
            arg = args[index]
            if spec is None:
                return self._render(arg, "np" if isinstance(arg, Concept) else "subj", state)
            if spec.startswith("v:"):
                return self._agree(arg, spec)
            return self._render(arg, spec, state)

        return _SLOT.sub(fill, pattern)

    def _agree(self, referent: Term, spec: str) -> str:
        parts = spec.split(":")
        if len(parts) != 3:
            self._warn(f"bad verb spec {spec!r}")
            return f"<<{spec}>>"
        _v, first_person, third_person = parts
        return first_person if referent == self.self_agent else third_person

    def _symbol(self, symbol: str, case: str, state: dict[str, int]) -> str:
        if symbol == self.self_agent:
            return PRONOUNS["self"][case]
        count = state.get(symbol, 0)
        state[symbol] = count + 1
        gender = self.genders.get(symbol)
        if count > 0 and gender in PRONOUNS:
            return PRONOUNS[gender][case]
        display = self.displays.get(symbol, symbol)
        if case == "poss":
            return display + "'s"
        return display


def _capitalize(text: str) -> str:
    for i, ch in enumerate(text):
        if ch.isdigit():
            return text  # a leading numeral already opens the sentence
        if ch.isalpha():
            return text[:i] + ch.upper() + text[i + 1 :]
    return text


def parse_template_spec(args: Sequence[Term]) -> tuple[str, str, str]:
    """Validate a (template head form "pattern") declaration's arguments."""
    if len(args) != 3:
        raise ValueError("template declarations take head, form, pattern")
    head, form, pattern = args
    if not isinstance(head, str) or not isinstance(form, str):
        raise ValueError("template head and form must be symbols")
    if not isinstance(pattern, Text):
        raise ValueError("template pattern must be a quoted string")
    return head, form, pattern.value
