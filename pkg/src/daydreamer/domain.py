"""Domain, persona, and script loading.

A domain file declares everything world-specific as concepts: planning
rules, relaxations, preservation and initiation and outcome rules, the
strategy catalog, generation templates, display names, input phrases,
and pinned background facts.  A persona file declares the agent's goal
class importances and memory decay settings.  Scripts are plain text,
one command per line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .concepts import Concept, Term, Text, fmt, parse_many
from .control import CONTROL_KINDS, StrategyDef
from .goals import DELTA, PRESERVATION, PreservationRule
from .planning import LEVELS, PlanRule, RelaxationRule
from .textgen import parse_template_spec

GOAL_KIND_NAMES = {"delta": DELTA, "preservation": PRESERVATION}


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class InitiationRule:
    """World states that wake up a new goal."""

    name: str
    when: tuple[Concept, ...]
    kind: str
    goal: Concept


@dataclass(frozen=True)
class OutcomeRule:
    """World states that settle an active goal, consuming the evidence."""

    name: str
    goal_kind: str
    goal: Concept
    evidence: Concept
    status: str
    causer: Optional[Term] = None


@dataclass
class Domain:
    rules: list[PlanRule] = field(default_factory=list)
    relaxations: list[RelaxationRule] = field(default_factory=list)
    preservation_rules: list[PreservationRule] = field(default_factory=list)
    initiation_rules: list[InitiationRule] = field(default_factory=list)
    outcome_rules: list[OutcomeRule] = field(default_factory=list)
    strategies: list[StrategyDef] = field(default_factory=list)
    templates: dict[tuple[str, str], str] = field(default_factory=dict)
    displays: dict[str, str] = field(default_factory=dict)
    genders: dict[str, str] = field(default_factory=dict)
    phrases: dict[str, Concept] = field(default_factory=dict)
    background: list[Concept] = field(default_factory=list)


@dataclass
class Persona:
    importances: dict[str, float] = field(default_factory=dict)
    classes: dict[str, str] = field(default_factory=dict)
    relationship_classes: set[str] = field(default_factory=set)
    decay_start: float = 1.0
    decay_step: float = 0.1
    decay_limit: float = 0.2
    self_agent: str = "me"
    control_kinds: Optional[tuple[str, ...]] = None


def load_domain(path: Union[str, Path]) -> Domain:
    return loads_domain(Path(path).read_text(encoding="utf-8"))


def load_persona(path: Union[str, Path]) -> Persona:
    return loads_persona(Path(path).read_text(encoding="utf-8"))


def loads_domain(text: str) -> Domain:
    domain = Domain()
    for record in parse_many(text):
        if not isinstance(record, Concept):
            raise DomainError(f"domain declarations must be compound, got {fmt(record)}")
        handler = _DOMAIN_HANDLERS.get(record.head)
        if handler is None:
            raise DomainError(f"unknown domain declaration {record.head!r}")
        try:
            handler(domain, record)
        except DomainError:
            raise
        except (TypeError, ValueError, IndexError) as exc:
            raise DomainError(f"bad {record.head} declaration {fmt(record)}: {exc}") from exc
    return domain


def loads_persona(text: str) -> Persona:
    persona = Persona()
    for record in parse_many(text):
        if not isinstance(record, Concept):
            raise DomainError(f"persona declarations must be compound, got {fmt(record)}")
        head = record.head
        if head == "importance":
            klass, value = record.args
            persona.importances[str(klass)] = float(value)  # type: ignore[arg-type]
        elif head == "goal-class":
            goal_head, klass = record.args
            persona.classes[str(goal_head)] = str(klass)
        elif head == "relationship-class":
            for klass in record.args:
                persona.relationship_classes.add(str(klass))
        elif head == "decay":
            start, step, limit = record.args
            persona.decay_start = float(start)  # type: ignore[arg-type]
            persona.decay_step = float(step)  # type: ignore[arg-type]
            persona.decay_limit = float(limit)  # type: ignore[arg-type]
        elif head == "self-agent":
            (persona.self_agent,) = (str(a) for a in record.args)
        elif head == "control-kinds":
            kinds = tuple(str(a).upper() for a in record.args)
            for kind in kinds:
                if kind not in CONTROL_KINDS:
                    raise DomainError(f"unknown control goal kind {kind!r}")
            persona.control_kinds = kinds
        else:
            raise DomainError(f"unknown persona declaration {head!r}")
    return persona


# -- scripts ---------------------------------------------------------------


@dataclass(frozen=True)
class ScriptCommand:
    kind: str  # input | mode | run | interrupt
    arg: str = ""


def parse_script(text: str) -> list[ScriptCommand]:
    commands = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "input":
            if not rest:
                raise DomainError(f"script line {lineno}: input needs text")
            commands.append(ScriptCommand("input", rest))
        elif word == "mode":
            if rest not in ("performance", "daydreaming"):
                raise DomainError(f"script line {lineno}: unknown mode {rest!r}")
            commands.append(ScriptCommand("mode", rest))
        elif word == "run":
            if rest != "until-quiescent":
                try:
                    int(rest)
                except ValueError:
                    raise DomainError(f"script line {lineno}: run needs a count or until-quiescent")
            commands.append(ScriptCommand("run", rest))
        elif word == "interrupt" and not rest:
            commands.append(ScriptCommand("interrupt"))
        else:
            raise DomainError(f"script line {lineno}: unknown command {line!r}")
    return commands


# -- declaration handlers --------------------------------------------------


def _sections(record: Concept) -> tuple[list[Term], dict[str, list[Concept]]]:
    """Split args into leading atoms and named (head ...) sections."""
    atoms: list[Term] = []
    named: dict[str, list[Concept]] = {}
    for arg in record.args:
        if isinstance(arg, Concept):
            named.setdefault(arg.head, []).append(arg)
        else:
            atoms.append(arg)
    return atoms, named


def _one(named: dict[str, list[Concept]], head: str, record: Concept) -> Concept:
    found = named.get(head, [])
    if len(found) != 1:
        raise DomainError(f"{record.head} {fmt(record)} needs exactly one ({head} ...)")
    return found[0]


def _concept_arg(section: Concept) -> Concept:
    if len(section.args) != 1 or not isinstance(section.args[0], Concept):
        raise DomainError(f"({section.head} ...) takes exactly one compound concept")
    return section.args[0]


def _handle_plan_rule(domain: Domain, record: Concept) -> None:
    atoms, named = _sections(record)
    if len(atoms) != 1 or not isinstance(atoms[0], str):
        raise DomainError(f"plan-rule needs a name symbol: {fmt(record)}")
    name = atoms[0]
    goal = _concept_arg(_one(named, "goal", record))
    kind = "plan"
    if "kind" in named:
        kind = str(_one(named, "kind", record).args[0])
        if kind not in ("plan", "inference", "request"):
            raise DomainError(f"plan-rule {name}: unknown kind {kind!r}")
    goal_kinds = None
    if "goal-kinds" in named:
        names = [str(a) for a in _one(named, "goal-kinds", record).args]
        for n in names:
            if n not in GOAL_KIND_NAMES:
                raise DomainError(f"plan-rule {name}: unknown goal kind {n!r}")
        goal_kinds = frozenset(names)
    action = None
    if "action" in named:
        action = _concept_arg(_one(named, "action", record))
    rule = PlanRule(
        name=name,
        goal=goal,
        kind=kind,
        goal_kinds=goal_kinds,
        preconds=tuple(_concept_arg(s) for s in named.get("precond", [])),
        subgoals=tuple(_concept_arg(s) for s in named.get("subgoal", [])),
        action=action,
        effects=tuple(_concept_arg(s) for s in named.get("effect", [])),
        retracts=tuple(_concept_arg(s) for s in named.get("retract", [])),
    )
    if kind == "request" and rule.action is None:
        raise DomainError(f"plan-rule {name}: request rules need an action")
    if kind == "inference" and (rule.action or rule.subgoals):
        raise DomainError(f"plan-rule {name}: inference rules only derive")
    domain.rules.append(rule)


def _handle_relaxation(domain: Domain, record: Concept) -> None:
    atoms, named = _sections(record)
    if len(atoms) != 3:
        raise DomainError(f"relaxation needs name, class, level: {fmt(record)}")
    name, klass, level = (str(a) for a in atoms)
    if level not in LEVELS:
        raise DomainError(f"relaxation {name}: unknown level {level!r}")
    pattern = _concept_arg(_one(named, "pattern", record))
    domain.relaxations.append(RelaxationRule(name, klass.upper(), pattern, level))


def _handle_preservation(domain: Domain, record: Concept) -> None:
    atoms, named = _sections(record)
    if len(atoms) != 1:
        raise DomainError(f"preservation-rule needs a name: {fmt(record)}")
    name = str(atoms[0])
    when = tuple(_concept_arg(s) for s in named.get("when", []))
    if not when:
        raise DomainError(f"preservation-rule {name} needs at least one (when ...)")
    absent = tuple(_concept_arg(s) for s in named.get("absent", []))
    goal = _concept_arg(_one(named, "goal", record))
    banner_section = _one(named, "banner", record)
    if not banner_section.args or not all(
        isinstance(a, Text) for a in banner_section.args
    ):
        raise DomainError(f"preservation-rule {name}: banner takes quoted lines")
    banner = "\n".join(a.value for a in banner_section.args)  # type: ignore[union-attr]
    domain.preservation_rules.append(
        PreservationRule(name, when, absent, goal, banner)
    )


def _handle_initiation(domain: Domain, record: Concept) -> None:
    atoms, named = _sections(record)
    if len(atoms) != 1:
        raise DomainError(f"initiation-rule needs a name: {fmt(record)}")
    name = str(atoms[0])
    when = tuple(_concept_arg(s) for s in named.get("when", []))
    if not when:
        raise DomainError(f"initiation-rule {name} needs at least one (when ...)")
    kind_name = str(_one(named, "goal-kind", record).args[0])
    if kind_name not in GOAL_KIND_NAMES:
        raise DomainError(f"initiation-rule {name}: unknown goal kind {kind_name!r}")
    goal = _concept_arg(_one(named, "goal", record))
    domain.initiation_rules.append(InitiationRule(name, when, GOAL_KIND_NAMES[kind_name], goal))


def _handle_outcome(domain: Domain, record: Concept) -> None:
    atoms, named = _sections(record)
    if len(atoms) != 1:
        raise DomainError(f"outcome-rule needs a name: {fmt(record)}")
    name = str(atoms[0])
    kind_name = str(_one(named, "goal-kind", record).args[0])
    if kind_name not in GOAL_KIND_NAMES:
        raise DomainError(f"outcome-rule {name}: unknown goal kind {kind_name!r}")
    goal = _concept_arg(_one(named, "goal", record))
    evidence = _concept_arg(_one(named, "evidence", record))
    status = str(_one(named, "status", record).args[0]).upper()
    if status not in ("SUCCEEDED", "FAILED"):
        raise DomainError(f"outcome-rule {name}: status must be succeeded or failed")
    causer = None
    if "causer" in named:
        causer_args = _one(named, "causer", record).args
        if len(causer_args) != 1 or not isinstance(causer_args[0], str):
            raise DomainError(f"outcome-rule {name}: causer takes one symbol or variable")
        causer = causer_args[0]
    domain.outcome_rules.append(
        OutcomeRule(name, GOAL_KIND_NAMES[kind_name], goal, evidence, status, causer)
    )


def _handle_strategy(domain: Domain, record: Concept) -> None:
    atoms, named = _sections(record)
    if len(atoms) != 4:
        raise DomainError(f"strategy needs name, kind, realization, level: {fmt(record)}")
    name, kind, realization, level = (str(a) for a in atoms)
    kind = kind.upper()
    if kind not in CONTROL_KINDS:
        raise DomainError(f"strategy {name}: unknown control goal kind {kind!r}")
    if level not in LEVELS:
        raise DomainError(f"strategy {name}: unknown level {level!r}")
    unit = None
    if "unit" in named:
        unit = str(_one(named, "unit", record).args[0]).upper()
    domain.strategies.append(StrategyDef(name, kind, realization, level, unit))


def _handle_template(domain: Domain, record: Concept) -> None:
    head, form, pattern = parse_template_spec(record.args)
    key = (head, form)
    if key in domain.templates:
        raise DomainError(f"duplicate template for ({head} {form})")
    domain.templates[key] = pattern


def _handle_display(domain: Domain, record: Concept) -> None:
    if len(record.args) != 2 or not isinstance(record.args[0], str) or not isinstance(
        record.args[1], Text
    ):
        raise DomainError(f"display needs a symbol and a quoted name: {fmt(record)}")
    domain.displays[record.args[0]] = record.args[1].value


def _handle_gender(domain: Domain, record: Concept) -> None:
    if len(record.args) != 2:
        raise DomainError(f"gender needs a symbol and a gender: {fmt(record)}")
    symbol, gender = (str(a) for a in record.args)
    if gender not in ("female", "male", "neuter", "self"):
        raise DomainError(f"unknown gender {gender!r} for {symbol}")
    domain.genders[symbol] = gender


def _handle_phrase(domain: Domain, record: Concept) -> None:
    if (
        len(record.args) != 2
        or not isinstance(record.args[0], Text)
        or not isinstance(record.args[1], Concept)
    ):
        raise DomainError(f"phrase needs a quoted line and a concept: {fmt(record)}")
    domain.phrases[record.args[0].value] = record.args[1]


def _handle_background(domain: Domain, record: Concept) -> None:
    for arg in record.args:
        if not isinstance(arg, Concept):
            raise DomainError(f"background facts must be compound: {fmt(record)}")
        domain.background.append(arg)


_DOMAIN_HANDLERS = {
    "plan-rule": _handle_plan_rule,
    "relaxation": _handle_relaxation,
    "preservation-rule": _handle_preservation,
    "initiation-rule": _handle_initiation,
    "outcome-rule": _handle_outcome,
    "strategy": _handle_strategy,
    "template": _handle_template,
    "display": _handle_display,
    "gender": _handle_gender,
    "phrase": _handle_phrase,
    "background": _handle_background,
}
