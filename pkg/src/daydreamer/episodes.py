"""Episodic memory: storage, indexing, retrieval, and reminding.

Episodes are stored with their index keys frozen at store time.  Four
index families cover the ways an episode can come back: the plot units
recognized in it, the emotions felt during it, the surface heads of its
events, and the goal classes its outcomes touched.

Reminding here is deliberately shallow.  A stored episode suggests a
continuation for the current situation when one of its participants can
be swapped for a current agent so that some episode event becomes a
present fact; the episode's remaining events, swapped the same way, are
candidate next states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

from .concepts import Concept, Term, fmt, parse_many, unify
from .wm import WorkingMemory

PERSONAL = "PERSONAL"
VICARIOUS = "VICARIOUS"
IMAGINED = "IMAGINED"
EPISODE_KINDS = (PERSONAL, VICARIOUS, IMAGINED)

KEY_PLOT_UNIT = "PLOT-UNIT"
KEY_EMOTION = "EMOTION"
KEY_SURFACE = "SURFACE"
KEY_THEME = "THEME"

IndexKey = tuple[str, str]


class MemoryFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EpisodeOutcome:
    objective: Concept
    status: str
    imagined: bool = False
    goal_class: Optional[str] = None
    causer: Optional[str] = None


@dataclass(frozen=True)
class EpisodeEmotion:
    kind: str
    intensity: float
    target: Optional[str] = None


@dataclass(frozen=True)
class EpisodeUnit:
    name: str
    bindings: tuple[tuple[str, str], ...]

    def binding(self, role: str) -> Optional[str]:
        for r, agent in self.bindings:
            if r == role:
                return agent
        return None


@dataclass(frozen=True)
class EpisodeRecord:
    id: int
    kind: str
    events: tuple[Concept, ...]
    outcomes: tuple[EpisodeOutcome, ...] = ()
    emotions: tuple[EpisodeEmotion, ...] = ()
    units: tuple[EpisodeUnit, ...] = ()
    cycle: int = 0
    index_keys: tuple[IndexKey, ...] = ()


@dataclass(frozen=True)
class StrategyRecord:
    """A learned conditional attachment, kept for later consultation."""

    id: int
    rule_name: str
    condition: Concept
    precondition: Concept
    episode_id: int


@dataclass(frozen=True)
class FuturePlanRecord:
    """A realistic imagined plan kept ready for its situation."""

    id: int
    goal: Concept
    actions: tuple[Concept, ...]
    episode_id: int


@dataclass
class CorrespondenceMap:
    agent_map: dict[str, str]

    def translate(self, term: Term) -> Term:
        return _swap(term, self.agent_map)


def _swap(term: Term, mapping: dict[str, str]) -> Term:
    if isinstance(term, str):
        return mapping.get(term, term)
    if isinstance(term, Concept):
        return Concept(mapping.get(term.head, term.head), tuple(_swap(a, mapping) for a in term.args))
    return term


Listener = Callable[[str, object], None]


class EpisodicMemory:
    def __init__(self, listener: Optional[Listener] = None) -> None:
        self.episodes: list[EpisodeRecord] = []
        self.strategies: list[StrategyRecord] = []
        self.future_plans: list[FuturePlanRecord] = []
        self.listener = listener

    # -- storing -----------------------------------------------------------

    def store(
        self,
        kind: str,
        events: Sequence[Concept],
        outcomes: Sequence[EpisodeOutcome] = (),
        emotions: Sequence[EpisodeEmotion] = (),
        units: Sequence[EpisodeUnit] = (),
        cycle: int = 0,
    ) -> EpisodeRecord:
        if kind not in EPISODE_KINDS:
            raise ValueError(f"unknown episode kind {kind!r}")
        record = EpisodeRecord(
            id=len(self.episodes) + 1,
            kind=kind,
            events=tuple(events),
            outcomes=tuple(outcomes),
            emotions=tuple(emotions),
            units=tuple(units),
            cycle=cycle,
        )
        record = EpisodeRecord(
            **{**record.__dict__, "index_keys": self.compute_index_keys(record)}
        )
        self.episodes.append(record)
        if self.listener:
            self.listener("store", record)
        return record

    @staticmethod
    def compute_index_keys(record: EpisodeRecord) -> tuple[IndexKey, ...]:
        keys: list[IndexKey] = []
        for unit in record.units:
            key = (KEY_PLOT_UNIT, unit.name.upper())
            if key not in keys:
                keys.append(key)
        for emotion in record.emotions:
            key = (KEY_EMOTION, emotion.kind.upper())
            if key not in keys:
                keys.append(key)
        for event in record.events:
            key = (KEY_SURFACE, event.head)
            if key not in keys:
                keys.append(key)
        for outcome in record.outcomes:
            if outcome.goal_class:
                key = (KEY_THEME, outcome.goal_class)
                if key not in keys:
                    keys.append(key)
        return tuple(keys)

    # -- retrieval ---------------------------------------------------------

    def retrieve(self, cues: Iterable[IndexKey]) -> list[EpisodeRecord]:
        """Episodes sharing index keys with the cues, best match first."""
        cue_set = set(cues)
        scored = []
        for record in self.episodes:
            count = len(cue_set & set(record.index_keys))
            if count:
                scored.append((count, record.id, record))
        scored.sort(key=lambda item: (-item[0], -item[1]))
        return [record for _c, _i, record in scored]

    def with_unit(self, unit_name: str) -> list[EpisodeRecord]:
        return self.retrieve([(KEY_PLOT_UNIT, unit_name.upper())])

    # -- analogy -----------------------------------------------------------

    def adapt(
        self, episode: EpisodeRecord, unit_name: str, current: dict[str, str]
    ) -> CorrespondenceMap:
        """Map the episode's participants onto current agents by shared roles."""
        for unit in episode.units:
            if unit.name.lower() == unit_name.lower():
                agent_map = {}
                for role, agent in unit.bindings:
                    if role in current and current[role] != agent:
                        agent_map[agent] = current[role]
                return CorrespondenceMap(agent_map)
        raise ValueError(f"episode {episode.id} has no {unit_name} instance")

    def suggest_continuation(
        self, wm: WorkingMemory, ctx: str, agent: str
    ) -> Optional[tuple[EpisodeRecord, Concept, CorrespondenceMap]]:
        """A next state for *agent* borrowed from a matching episode.

        Most recent episode first.  A participant symbol is swapped for
        *agent*; if the swap turns some episode event into a present
        fact, the first event the swap does not yet make true is the
        suggestion.
        """
        for record in reversed(self.episodes):
            best: Optional[tuple[int, str]] = None
            for symbol in _participants(record):
                if symbol == agent:
                    continue
                mapping = {symbol: agent}
                score = 0
                for event in record.events:
                    swapped = _swap(event, mapping)
                    if swapped != event and wm.prove(swapped, ctx) is not None:
                        score += 1
                if score and (best is None or score > best[0]):
                    best = (score, symbol)
            if best is None:
                continue
            cmap = CorrespondenceMap({best[1]: agent})
            for event in record.events:
                swapped = cmap.translate(event)
                if swapped != event and wm.prove(swapped, ctx) is None:
                    assert isinstance(swapped, Concept)
                    return record, swapped, cmap
        return None

    # -- learned records ---------------------------------------------------

    def add_strategy(
        self, rule_name: str, condition: Concept, precondition: Concept, episode_id: int
    ) -> StrategyRecord:
        record = StrategyRecord(
            len(self.strategies) + 1, rule_name, condition, precondition, episode_id
        )
        self.strategies.append(record)
        if self.listener:
            self.listener("strategy", record)
        return record

    def add_future_plan(
        self, goal: Concept, actions: Sequence[Concept], episode_id: int
    ) -> FuturePlanRecord:
        record = FuturePlanRecord(
            len(self.future_plans) + 1, goal, tuple(actions), episode_id
        )
        self.future_plans.append(record)
        if self.listener:
            self.listener("future-plan", record)
        return record

    def consult_strategies(self, rule_name: Optional[str] = None) -> list[StrategyRecord]:
        if rule_name is None:
            return list(self.strategies)
        return [s for s in self.strategies if s.rule_name == rule_name]

    def consult_future_plans(self, goal: Optional[Concept] = None) -> list[FuturePlanRecord]:
        if goal is None:
            return list(self.future_plans)
        return [p for p in self.future_plans if unify(p.goal, goal) is not None]

    # -- persistence -------------------------------------------------------

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    def dumps(self) -> str:
        lines = []
        for record in self.episodes:
            lines.append(fmt(_episode_to_concept(record)))
        for strategy in self.strategies:
            lines.append(fmt(_strategy_to_concept(strategy)))
        for plan in self.future_plans:
            lines.append(fmt(_plan_to_concept(plan)))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def load(cls, path: Union[str, Path], listener: Optional[Listener] = None) -> "EpisodicMemory":
        return cls.loads(Path(path).read_text(encoding="utf-8"), listener)

    @classmethod
    def loads(cls, text: str, listener: Optional[Listener] = None) -> "EpisodicMemory":
        memory = cls(listener)
        for concept in parse_many(text):
            if not isinstance(concept, Concept):
                raise MemoryFormatError(f"expected a compound record, got {fmt(concept)}")
            if concept.head == "episode":
                memory.episodes.append(_episode_from_concept(concept))
            elif concept.head == "strategy":
                memory.strategies.append(_strategy_from_concept(concept))
            elif concept.head == "future-plan":
                memory.future_plans.append(_plan_from_concept(concept))
            else:
                raise MemoryFormatError(f"unknown record head {concept.head!r}")
        memory.episodes.sort(key=lambda r: r.id)
        memory.strategies.sort(key=lambda r: r.id)
        memory.future_plans.sort(key=lambda r: r.id)
        return memory


def _participants(record: EpisodeRecord) -> list[str]:
    seen: list[str] = []

    def walk(term: Term) -> None:
        if isinstance(term, str) and not term.startswith("?"):
            if term not in seen:
                seen.append(term)
        elif isinstance(term, Concept):
            for arg in term.args:
                walk(arg)

    for event in record.events:
        walk(event)
    return seen


def _opt(value: Optional[str]) -> str:
    return value if value is not None else "none"


def _unopt(value: Term) -> Optional[str]:
    return None if value == "none" else str(value)


def _episode_to_concept(record: EpisodeRecord) -> Concept:
    sections: list[Term] = [record.id, record.kind.lower()]
    sections.append(Concept("events", record.events))
    if record.outcomes:
        sections.append(
            Concept(
                "outcomes",
                tuple(
                    Concept(
                        "outcome",
                        (
                            o.objective,
                            o.status.lower(),
                            "imagined" if o.imagined else "real",
                            _opt(o.goal_class),
                            _opt(o.causer),
                        ),
                    )
                    for o in record.outcomes
                ),
            )
        )
    if record.emotions:
        sections.append(
            Concept(
                "emotions",
                tuple(
                    Concept("emotion", (e.kind.lower(), float(e.intensity), _opt(e.target)))
                    for e in record.emotions
                ),
            )
        )
    if record.units:
        sections.append(
            Concept(
                "units",
                tuple(
                    Concept(
                        "unit",
                        (u.name.lower(),)
                        + tuple(Concept(role, (agent,)) for role, agent in u.bindings),
                    )
                    for u in record.units
                ),
            )
        )
    sections.append(Concept("cycle", (record.cycle,)))
    return Concept("episode", tuple(sections))


def _section(concept: Concept, head: str) -> Optional[Concept]:
    for arg in concept.args:
        if isinstance(arg, Concept) and arg.head == head:
            return arg
    return None


def _episode_from_concept(concept: Concept) -> EpisodeRecord:
    try:
        eid = int(concept.args[0])  # type: ignore[arg-type]
        kind = str(concept.args[1]).upper()
    except (IndexError, TypeError, ValueError) as exc:
        raise MemoryFormatError(f"malformed episode record: {fmt(concept)}") from exc
    events_c = _section(concept, "events")
    if events_c is None:
        raise MemoryFormatError(f"episode {eid} missing events")
    events = tuple(e for e in events_c.args if isinstance(e, Concept))
    if len(events) != len(events_c.args):
        raise MemoryFormatError(f"episode {eid} has a non-compound event")
    outcomes: list[EpisodeOutcome] = []
    outcomes_c = _section(concept, "outcomes")
    if outcomes_c is not None:
        for o in outcomes_c.args:
            if not isinstance(o, Concept) or len(o.args) != 5:
                raise MemoryFormatError(f"episode {eid} has a malformed outcome")
            objective, status, tag, klass, causer = o.args
            if not isinstance(objective, Concept):
                raise MemoryFormatError(f"episode {eid} outcome objective must be compound")
            outcomes.append(
                EpisodeOutcome(
                    objective,
                    str(status).upper(),
                    tag == "imagined",
                    _unopt(klass),
                    _unopt(causer),
                )
            )
    emotions: list[EpisodeEmotion] = []
    emotions_c = _section(concept, "emotions")
    if emotions_c is not None:
        for e in emotions_c.args:
            if not isinstance(e, Concept) or len(e.args) != 3:
                raise MemoryFormatError(f"episode {eid} has a malformed emotion")
            kind_e, intensity, target = e.args
            emotions.append(
                EpisodeEmotion(str(kind_e).upper(), float(intensity), _unopt(target))  # type: ignore[arg-type]
            )
    units: list[EpisodeUnit] = []
    units_c = _section(concept, "units")
    if units_c is not None:
        for u in units_c.args:
            if not isinstance(u, Concept) or not u.args:
                raise MemoryFormatError(f"episode {eid} has a malformed unit")
            name = str(u.args[0])
            bindings = []
            for pair in u.args[1:]:
                if not isinstance(pair, Concept) or len(pair.args) != 1:
                    raise MemoryFormatError(f"episode {eid} has a malformed role binding")
                bindings.append((pair.head, str(pair.args[0])))
            units.append(EpisodeUnit(name.upper(), tuple(bindings)))
    cycle_c = _section(concept, "cycle")
    cycle = int(cycle_c.args[0]) if cycle_c and cycle_c.args else 0  # type: ignore[arg-type]
    record = EpisodeRecord(
        eid, kind, events, tuple(outcomes), tuple(emotions), tuple(units), cycle
    )
    return EpisodeRecord(
        **{**record.__dict__, "index_keys": EpisodicMemory.compute_index_keys(record)}
    )


def _strategy_to_concept(record: StrategyRecord) -> Concept:
    return Concept(
        "strategy",
        (
            record.id,
            record.rule_name,
            Concept("condition", (record.condition,)),
            Concept("precondition", (record.precondition,)),
            Concept("episode", (record.episode_id,)),
        ),
    )


def _strategy_from_concept(concept: Concept) -> StrategyRecord:
    try:
        sid = int(concept.args[0])  # type: ignore[arg-type]
        rule_name = str(concept.args[1])
        condition = _section(concept, "condition").args[0]  # type: ignore[union-attr]
        precondition = _section(concept, "precondition").args[0]  # type: ignore[union-attr]
        episode_id = int(_section(concept, "episode").args[0])  # type: ignore[union-attr,arg-type]
    except (AttributeError, IndexError, TypeError, ValueError) as exc:
        raise MemoryFormatError(f"malformed strategy record: {fmt(concept)}") from exc
    if not isinstance(condition, Concept) or not isinstance(precondition, Concept):
        raise MemoryFormatError(f"strategy {sid} condition and precondition must be compound")
    return StrategyRecord(sid, rule_name, condition, precondition, episode_id)


def _plan_to_concept(record: FuturePlanRecord) -> Concept:
    return Concept(
        "future-plan",
        (
            record.id,
            Concept("goal", (record.goal,)),
            Concept("actions", record.actions),
            Concept("episode", (record.episode_id,)),
        ),
    )


def _plan_from_concept(concept: Concept) -> FuturePlanRecord:
    try:
        pid = int(concept.args[0])  # type: ignore[arg-type]
        goal = _section(concept, "goal").args[0]  # type: ignore[union-attr]
        actions_c = _section(concept, "actions")
        episode_id = int(_section(concept, "episode").args[0])  # type: ignore[union-attr,arg-type]
    except (AttributeError, IndexError, TypeError, ValueError) as exc:
        raise MemoryFormatError(f"malformed future-plan record: {fmt(concept)}") from exc
    if not isinstance(goal, Concept) or actions_c is None:
        raise MemoryFormatError(f"future-plan {pid} needs a compound goal and actions")
    actions = tuple(a for a in actions_c.args if isinstance(a, Concept))
    if len(actions) != len(actions_c.args):
        raise MemoryFormatError(f"future-plan {pid} has a non-compound action")
    return FuturePlanRecord(pid, goal, actions, episode_id)
