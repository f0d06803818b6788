"""Control goals: what to daydream about and which strategy to use.

Emotions left over from real outcomes propose control goals.  Each
cycle at most one new control goal is adopted, chosen by the intensity
of its sponsoring emotion, and a given kind never fires twice for the
same target in a session.  Strong negative affect sponsors
rationalization; anger sponsors revenge; a failure whose negative
affect has faded below threshold sponsors reversal; fear sponsors
preparation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .concepts import Concept, fmt
from .emotions import (
    ANGER,
    EmotionRecord,
    EmotionSystem,
    FEAR,
    NEG_AFFECT,
    POS_AFFECT,
)
from .episodes import EpisodicMemory
from .goals import FAILED, SUCCEEDED, GoalRecord, GoalSystem, OutcomeRecord

RATIONALIZATION = "RATIONALIZATION"
REVENGE = "REVENGE"
FAILURE_REVERSAL = "FAILURE-REVERSAL"
SUCCESS_REVERSAL = "SUCCESS-REVERSAL"
PREPARATION = "PREPARATION"
CONTROL_KINDS = (
    RATIONALIZATION,
    REVENGE,
    FAILURE_REVERSAL,
    SUCCESS_REVERSAL,
    PREPARATION,
)

# affect below this no longer masks a failure, so reversal becomes worth
# daydreaming about; affect at or above it still demands rationalizing
REVERSAL_THRESHOLD = 0.7

# how much a successful rationalization dampens the failure's affect
RATIONALIZATION_SCALE = 0.5

ACTIVE = "ACTIVE"

BANNER_RATIONALIZATION_TRIGGER = (
    "IF   failure of a goal with negative affect\n"
    "THEN activate a goal to rationalize the failure"
)
BANNER_REVENGE_TRIGGER = (
    "IF   anger toward a person for a goal failure\n"
    "THEN activate a goal to get revenge on that person"
)
BANNER_REVERSAL_TRIGGER = (
    "IF   a goal failure whose negative affect has faded\n"
    "THEN activate a goal to reverse the failure"
)
BANNER_SUCCESS_REVERSAL_TRIGGER = (
    "IF   a goal success whose positive affect has faded\n"
    "THEN activate a goal to imagine the success undone"
)
BANNER_PREPARATION_TRIGGER = (
    "IF   fear of an upcoming situation\n"
    "THEN activate a goal to prepare for the situation"
)
BANNER_RECALL = (
    "IF   a new state matches a state from a past episode\n"
    "THEN recall the episode and map its next event forward"
)
BANNER_CONFLICT = (
    "IF   a plan would undo a state another active goal needs\n"
    "THEN detect a goal conflict and keep the more important goal"
)
BANNER_RATIONALIZE = (
    "IF   an imagined success of a failed goal leads to another failure\n"
    "THEN rationalize the failure as a blessing in disguise"
)
BANNER_SCALE_AFFECT = (
    "IF   a failure has been rationalized\n"
    "THEN reduce the negative affect from the failure"
)
BANNER_LEARN = (
    "IF   planning for a goal loops\n"
    "THEN learn a conditional plan from the loop"
)

TRIGGER_BANNERS = {
    RATIONALIZATION: BANNER_RATIONALIZATION_TRIGGER,
    REVENGE: BANNER_REVENGE_TRIGGER,
    FAILURE_REVERSAL: BANNER_REVERSAL_TRIGGER,
    SUCCESS_REVERSAL: BANNER_SUCCESS_REVERSAL_TRIGGER,
    PREPARATION: BANNER_PREPARATION_TRIGGER,
}


@dataclass(frozen=True)
class StrategyDef:
    """One realization of a control goal kind, declared as domain data."""

    name: str
    kind: str
    realization: str
    level: str
    unit: Optional[str] = None


DEFAULT_CATALOG: tuple[StrategyDef, ...] = (
    StrategyDef("mixed-blessing", RATIONALIZATION, "imagine-alternative", "low", "MIXED-BLESSING"),
    StrategyDef(
        "success-born-of-adversity",
        RATIONALIZATION,
        "find-benefit",
        "low",
        "SUCCESS-BORN-OF-ADVERSITY",
    ),
    StrategyDef("external-attribution", RATIONALIZATION, "blame-outside", "low"),
    StrategyDef("retaliation", REVENGE, "enact-unit", "high", "RETALIATION"),
    StrategyDef("replan-failure", FAILURE_REVERSAL, "replan", "low"),
    StrategyDef("replan-success", SUCCESS_REVERSAL, "replan", "low"),
    StrategyDef("rehearse", PREPARATION, "rehearse", "low"),
)


@dataclass
class ControlGoalRecord:
    id: int
    kind: str
    objective: Concept
    importance: float
    emotion_id: int
    outcome_id: Optional[int] = None
    status: str = ACTIVE
    strategy: Optional[str] = None

    @property
    def key(self) -> str:
        return f"{self.kind}:{fmt(self.objective)}"


Listener = Callable[[str, ControlGoalRecord, EmotionRecord], None]


class ControlGoalSystem:
    def __init__(
        self,
        goals: GoalSystem,
        emotions: EmotionSystem,
        memory: EpisodicMemory,
        catalog: Sequence[StrategyDef] = DEFAULT_CATALOG,
        enabled_kinds: Optional[Sequence[str]] = None,
        threshold: float = REVERSAL_THRESHOLD,
        listener: Optional[Listener] = None,
    ) -> None:
        self.goals = goals
        self.emotions = emotions
        self.memory = memory
        self.catalog = list(catalog)
        # imagining a success undone is unsettling enough to stay opt-in
        self.enabled = set(
            enabled_kinds
            if enabled_kinds is not None
            else (RATIONALIZATION, REVENGE, FAILURE_REVERSAL, PREPARATION)
        )
        self.threshold = threshold
        self.records: list[ControlGoalRecord] = []
        self._seen_keys: set[str] = set()
        self._listener = listener

    # -- triggering --------------------------------------------------------

    def candidates(self) -> list[tuple[str, Concept, EmotionRecord, Optional[OutcomeRecord]]]:
        """Possible new control goals, strongest sponsor first."""
        found: list[tuple[str, Concept, EmotionRecord, Optional[OutcomeRecord]]] = []
        for emotion in self.emotions.records.values():
            if not self.emotions.is_live(emotion):
                continue
            outcome, goal = self._sponsor_outcome(emotion)
            if emotion.kind == NEG_AFFECT and outcome is not None and goal is not None:
                if outcome.status == FAILED and not outcome.imagined:
                    if emotion.intensity >= self.threshold:
                        found.append(
                            (RATIONALIZATION, Concept("rationalize", (goal.objective,)), emotion, outcome)
                        )
                    else:
                        found.append(
                            (FAILURE_REVERSAL, Concept("reverse", (goal.objective,)), emotion, outcome)
                        )
            elif emotion.kind == POS_AFFECT and outcome is not None and goal is not None:
                if outcome.status == SUCCEEDED and not outcome.imagined:
                    if emotion.intensity < self.threshold:
                        found.append(
                            (SUCCESS_REVERSAL, Concept("undo", (goal.objective,)), emotion, outcome)
                        )
            elif emotion.kind == ANGER and outcome is not None:
                offense = outcome.evidence if outcome.evidence is not None else (
                    goal.objective if goal is not None else None
                )
                if offense is not None:
                    found.append((REVENGE, Concept("get-revenge", (offense,)), emotion, outcome))
            elif emotion.kind == FEAR and emotion.situation is not None:
                found.append((PREPARATION, Concept("prepare", (emotion.situation,)), emotion, None))
        found = [c for c in found if c[0] in self.enabled]
        found.sort(key=lambda c: (-c[2].intensity, c[2].seq))
        return found

    def _sponsor_outcome(self, emotion: EmotionRecord):
        if emotion.source is None:
            return None, None
        outcome = self.goals.outcomes.get(emotion.source)
        if outcome is None:
            return None, None
        return outcome, self.goals.goal_of(outcome)

    def unseen(self) -> list[tuple[str, Concept, EmotionRecord, Optional[OutcomeRecord]]]:
        """Candidates that trigger_one has not yet adopted this session."""
        return [
            c for c in self.candidates() if f"{c[0]}:{fmt(c[1])}" not in self._seen_keys
        ]

    def trigger_one(self) -> Optional[tuple[ControlGoalRecord, EmotionRecord]]:
        """Adopt the strongest candidate not yet tried this session."""
        for kind, objective, emotion, outcome in self.candidates():
            record = ControlGoalRecord(
                id=len(self.records) + 1,
                kind=kind,
                objective=objective,
                importance=emotion.intensity,
                emotion_id=emotion.id,
                outcome_id=outcome.id if outcome else None,
            )
            if record.key in self._seen_keys:
                continue
            self._seen_keys.add(record.key)
            self.records.append(record)
            if self._listener:
                self._listener("activate", record, emotion)
            return record, emotion
        return None

    # -- strategy choice ---------------------------------------------------

    def select_strategy(self, record: ControlGoalRecord) -> Optional[StrategyDef]:
        """Catalog order, but a strategy whose unit recalls episodes wins."""
        options = [s for s in self.catalog if s.kind == record.kind]
        if not options:
            return None
        recalled = [s for s in options if s.unit and self.memory.with_unit(s.unit)]
        chosen = (recalled or options)[0]
        record.strategy = chosen.name
        return chosen

    # -- settling ----------------------------------------------------------

    def conclude(self, record: ControlGoalRecord, status: str) -> None:
        if record.status != ACTIVE:
            raise ValueError(f"control goal {record.id} already {record.status}")
        if status not in (SUCCEEDED, FAILED):
            raise ValueError(f"control goal status must be terminal, got {status!r}")
        record.status = status

    def active(self) -> list[ControlGoalRecord]:
        return [r for r in self.records if r.status == ACTIVE]
