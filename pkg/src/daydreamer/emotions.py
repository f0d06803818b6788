"""Emotions appraised from goal outcomes.

Each emotion is pegged to a working memory entry, so an emotion is alive
exactly as long as its entry has not decayed away.  Appraisal happens in
two stages: the undirected valence response first, and the responses
directed at another person (anger, rejection) on a later pass.  The
engine runs one stage per cycle, which is what staggers "I feel
displeased." and "I am angry at Debra." across cycles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

from .concepts import Concept
from .goals import DELTA, FAILED, GoalRecord, GoalSystem, OutcomeRecord, PRESERVATION, SUCCEEDED
from .wm import WorkingMemory

POS_AFFECT = "POS-AFFECT"
NEG_AFFECT = "NEG-AFFECT"
ANGER = "ANGER"
REJECTION = "REJECTION"
EMBARRASSMENT = "EMBARRASSMENT"
REGRET = "REGRET"
FEAR = "FEAR"

KINDS = (POS_AFFECT, NEG_AFFECT, ANGER, REJECTION, EMBARRASSMENT, REGRET, FEAR)

# initial intensities
MAJOR_FAILURE_INTENSITY = 0.8  # failed goal of importance >= 0.5
MINOR_FAILURE_INTENSITY = 0.5
SUCCESS_INTENSITY = 0.6
MAJOR_IMPORTANCE = 0.5

BANNER_NEGATIVE_AFFECT = "IF   self goal failure\nTHEN activate negative affect"
BANNER_POSITIVE_AFFECT = "IF   self goal success\nTHEN activate positive affect"
BANNER_ANGER = "IF   person caused a self goal failure\nTHEN activate anger toward person"
BANNER_FEAR = "IF   an upcoming situation could go badly\nTHEN activate fear of the situation"


def clamp(value: float) -> float:
    return max(0.0, min(1.0, round(value, 6)))


@dataclass
class EmotionRecord:
    id: int
    kind: str
    intensity: float
    target: Optional[str]
    imagined: bool
    source: Optional[int]  # OutcomeRecord id; None for FEAR
    seq: int
    entry_id: int
    situation: Optional[Concept] = None  # FEAR carries the feared situation


class EmotionSystem:
    def __init__(
        self,
        wm: WorkingMemory,
        goals: GoalSystem,
        self_agent: str = "me",
        social_regard_class: str = "social-esteem",
        listener: Optional[Callable] = None,
    ) -> None:
        self.wm = wm
        self.goals = goals
        self.self_agent = self_agent
        self.social_regard_class = social_regard_class
        self.listener = listener
        self.records: dict[int, EmotionRecord] = {}
        self._ids = itertools.count(1)

    def _emit(self, op: str, record: EmotionRecord) -> None:
        if self.listener is not None:
            self.listener(op, record)

    def _concept(self, kind: str, target: Optional[str], imagined: bool) -> Concept:
        args: list = [kind.lower(), self.self_agent]
        if target is not None:
            args.append(target)
        if imagined:
            args.append("imagined")
        return Concept("affect", tuple(args))

    def _create(
        self,
        kind: str,
        intensity: float,
        target: Optional[str],
        imagined: bool,
        source: Optional[int],
        situation: Optional[Concept] = None,
        op: str = "activate",
    ) -> EmotionRecord:
        if kind in (ANGER, REJECTION) and target == self.self_agent:
            raise ValueError(f"{kind} cannot target the self")
        entry = self.wm.add(self._concept(kind, target, imagined))
        rid = next(self._ids)
        record = EmotionRecord(
            id=rid,
            kind=kind,
            intensity=clamp(intensity),
            target=target,
            imagined=imagined,
            source=source,
            seq=rid,
            entry_id=entry.id,
        )
        record.situation = situation
        self.records[record.id] = record
        self._emit(op, record)
        return record

    # -- appraisal ---------------------------------------------------------

    def failure_intensity(self, goal: GoalRecord) -> float:
        if goal.importance >= MAJOR_IMPORTANCE:
            return MAJOR_FAILURE_INTENSITY
        return MINOR_FAILURE_INTENSITY

    def appraise_stage(self, outcome: OutcomeRecord, stage: int) -> list[EmotionRecord]:
        """Stage 1: undirected valence.  Stage 2: other-directed responses."""
        goal = self.goals.goal_of(outcome)
        created: list[EmotionRecord] = []
        if stage == 1:
            if outcome.status == FAILED:
                intensity = self.failure_intensity(goal)
                created.append(
                    self._create(NEG_AFFECT, intensity, None, outcome.imagined, outcome.id)
                )
                if (
                    goal.kind == PRESERVATION
                    and goal.goal_class == self.social_regard_class
                ):
                    created.append(
                        self._create(
                            EMBARRASSMENT, intensity, None, outcome.imagined, outcome.id
                        )
                    )
            elif outcome.status == SUCCEEDED:
                created.append(
                    self._create(
                        POS_AFFECT, SUCCESS_INTENSITY, None, outcome.imagined, outcome.id
                    )
                )
        elif stage == 2:
            causer = outcome.causer
            if (
                outcome.status == FAILED
                and causer is not None
                and causer != self.self_agent
            ):
                intensity = self.failure_intensity(goal)
                created.append(
                    self._create(ANGER, intensity, causer, outcome.imagined, outcome.id)
                )
                if goal.kind == DELTA and self.goals.tree.is_relationship(goal.objective):
                    created.append(
                        self._create(
                            REJECTION, intensity, causer, outcome.imagined, outcome.id
                        )
                    )
        else:
            raise ValueError(f"no appraisal stage {stage}")
        return created

    def appraise(self, outcome: OutcomeRecord) -> list[EmotionRecord]:
        """Both stages at once; what the engine spreads over two cycles."""
        return self.appraise_stage(outcome, 1) + self.appraise_stage(outcome, 2)

    def fear(self, situation: Concept, intensity: float = MAJOR_FAILURE_INTENSITY) -> EmotionRecord:
        """Fear of an explicitly stated upcoming situation."""
        return self._create(FEAR, intensity, None, False, None, situation=situation)

    # -- later adjustments -------------------------------------------------

    def scale_affect(self, record: EmotionRecord, factor: float) -> EmotionRecord:
        record.intensity = clamp(record.intensity * factor)
        self._emit("scale", record)
        return record

    def renew_negative(self, outcome: OutcomeRecord) -> EmotionRecord:
        """Reversal daydream brushed against a real failure: regret flares up."""
        if outcome.imagined:
            raise ValueError("renew_negative applies to real failures only")
        priors = [
            r
            for r in self.records.values()
            if r.kind == NEG_AFFECT and r.source == outcome.id
        ]
        if not priors:
            raise ValueError(f"no negative affect on record for outcome {outcome.id}")
        prior = max(priors, key=lambda r: r.seq)
        return self._create(
            REGRET, clamp(prior.intensity * 1.2), None, False, outcome.id, op="renew"
        )

    # -- inspection --------------------------------------------------------

    def is_live(self, record: EmotionRecord) -> bool:
        return record.entry_id in self.wm.entries

    def live(self, kind: Optional[str] = None) -> list[EmotionRecord]:
        out = [r for r in self.records.values() if self.is_live(r)]
        if kind is not None:
            out = [r for r in out if r.kind == kind]
        return sorted(out, key=lambda r: r.seq)

    def strongest(self, kind: Optional[str] = None) -> Optional[EmotionRecord]:
        candidates = self.live(kind)
        if not candidates:
            return None
        return max(candidates, key=lambda r: (r.intensity, r.seq))

    def for_outcome(self, outcome_id: int, kind: Optional[str] = None) -> list[EmotionRecord]:
        out = [r for r in self.records.values() if r.source == outcome_id]
        if kind is not None:
            out = [r for r in out if r.kind == kind]
        return sorted(out, key=lambda r: r.seq)
