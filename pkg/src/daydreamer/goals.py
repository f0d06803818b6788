"""Goals: what the agent wants, how much it matters, and what became of it.

Goal importance is not stored on the goal; it is looked up in the
configured goal tree by the head symbol of the objective, so two goals
over the same kind of objective always weigh the same.  Status moves
from ACTIVE to exactly one of SUCCEEDED or FAILED and never back.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .concepts import Binding, Concept, Term, fmt, substitute, unify
from .wm import WorkingMemory

ACTIVE = "ACTIVE"
SUCCEEDED = "SUCCEEDED"
FAILED = "FAILED"

DELTA = "DELTA"
PRESERVATION = "PRESERVATION"
PERSONAL = "PERSONAL"
CONTROL_LINKED = "CONTROL-LINKED"

ABANDON_PURSUIT = "ABANDON-PURSUIT"
CONTINUE = "CONTINUE"


class GoalConfigError(KeyError):
    """Objective head has no entry in the goal tree."""


@dataclass
class GoalTree:
    """Importance per goal class plus the head-to-class map."""

    importances: dict[str, float]
    classes: dict[str, str]
    relationship_classes: set[str] = field(default_factory=set)

    def class_of(self, objective: Concept) -> str:
        try:
            return self.classes[objective.head]
        except KeyError:
            raise GoalConfigError(
                f"no goal class configured for head {objective.head!r}"
            ) from None

    def importance_of(self, objective: Concept) -> float:
        cls = self.class_of(objective)
        try:
            return self.importances[cls]
        except KeyError:
            raise GoalConfigError(f"no importance configured for class {cls!r}") from None

    def is_relationship(self, objective: Concept) -> bool:
        return self.class_of(objective) in self.relationship_classes


@dataclass
class GoalRecord:
    id: int
    kind: str
    objective: Concept
    importance: float
    context: str
    seq: int
    goal_class: str
    status: str = ACTIVE
    outcome_id: Optional[int] = None


@dataclass
class OutcomeRecord:
    id: int
    goal_id: int
    status: str  # SUCCEEDED | FAILED
    causer: Optional[str]
    imagined: bool
    cycle: int
    evidence: Optional[Concept] = None


@dataclass(frozen=True)
class PreservationRule:
    name: str
    when: tuple[Concept, ...]
    absent: tuple[Concept, ...]
    goal: Concept
    banner: Optional[str] = None


def prove_all(
    wm: WorkingMemory,
    patterns: Iterable[Term],
    ctx: str,
    binding: Optional[Binding] = None,
) -> Iterator[Binding]:
    """Every binding satisfying the conjunction of patterns, backtracking."""
    patterns = list(patterns)
    if binding is None:
        binding = {}

    def walk(i: int, bound: Binding) -> Iterator[Binding]:
        if i == len(patterns):
            yield bound
            return
        pattern = substitute(patterns[i], bound)
        for hit, _entry in wm.query(pattern, ctx):
            merged = dict(bound)
            merged.update(hit)
            yield from walk(i + 1, merged)

    yield from walk(0, binding)


# listener events: ("goal", GoalRecord) and ("outcome", OutcomeRecord, GoalRecord)
class GoalSystem:
    def __init__(
        self,
        tree: GoalTree,
        wm: WorkingMemory,
        listener: Optional[Callable] = None,
    ) -> None:
        self.tree = tree
        self.wm = wm
        self.listener = listener
        self.goals: dict[int, GoalRecord] = {}
        self.outcomes: dict[int, OutcomeRecord] = {}
        self._goal_ids = itertools.count(1)
        self._outcome_ids = itertools.count(1)
        self._seq = itertools.count(1)

    def _emit(self, *event) -> None:
        if self.listener is not None:
            self.listener(*event)

    # -- activation --------------------------------------------------------

    def activate(self, kind: str, objective: Concept, context: str) -> GoalRecord:
        goal = GoalRecord(
            id=next(self._goal_ids),
            kind=kind,
            objective=objective,
            importance=self.tree.importance_of(objective),
            context=context,
            seq=next(self._seq),
            goal_class=self.tree.class_of(objective),
        )
        self.goals[goal.id] = goal
        self._emit("goal", goal)
        return goal

    def active_goals(self, context: Optional[str] = None) -> list[GoalRecord]:
        out = [g for g in self.goals.values() if g.status == ACTIVE]
        if context is not None:
            out = [g for g in out if g.context == context]
        return out

    def select_focus(self, context: Optional[str] = None) -> Optional[GoalRecord]:
        """Most important active goal; the newer one wins a tie."""
        candidates = self.active_goals(context)
        if not candidates:
            return None
        return max(candidates, key=lambda g: (g.importance, g.seq))

    # -- outcomes ----------------------------------------------------------

    def record_outcome(
        self,
        goal: GoalRecord,
        status: str,
        causer: Optional[str] = None,
        imagined: bool = False,
        cycle: int = 0,
        evidence: Optional[Concept] = None,
    ) -> OutcomeRecord:
        if status not in (SUCCEEDED, FAILED):
            raise ValueError(f"not a terminal status: {status}")
        if goal.status != ACTIVE:
            raise ValueError(
                f"goal g{goal.id} already {goal.status}, cannot record {status}"
            )
        outcome = OutcomeRecord(
            id=next(self._outcome_ids),
            goal_id=goal.id,
            status=status,
            causer=causer,
            imagined=imagined,
            cycle=cycle,
            evidence=evidence,
        )
        goal.status = status
        goal.outcome_id = outcome.id
        self.outcomes[outcome.id] = outcome
        self._emit("outcome", outcome, goal)
        return outcome

    def goal_of(self, outcome: OutcomeRecord) -> GoalRecord:
        return self.goals[outcome.goal_id]

    # -- preservation ------------------------------------------------------

    def preservation_triggers(
        self,
        rules: Iterable[PreservationRule],
        context: str,
    ) -> list[tuple[GoalRecord, PreservationRule, Binding]]:
        """Activate preservation goals whose rules now match in *context*.

        Idempotent: a rule that already produced a preservation goal for
        the same objective in the same context does not fire again, no
        matter the status that goal reached.
        """
        activated = []
        for rule in rules:
            for binding in prove_all(self.wm, rule.when, context):
                blocked = False
                for pattern in rule.absent:
                    if self.wm.prove(substitute(pattern, binding), context) is not None:
                        blocked = True
                        break
                if blocked:
                    continue
                objective = substitute(rule.goal, binding)
                if not isinstance(objective, Concept):
                    raise TypeError(f"preservation goal must be compound: {objective!r}")
                if self._already_preserving(objective, context):
                    continue
                goal = self.activate(PRESERVATION, objective, context)
                activated.append((goal, rule, binding))
                break  # one activation per rule per call
        return activated

    def _already_preserving(self, objective: Concept, context: str) -> bool:
        key = fmt(objective)
        return any(
            g.kind == PRESERVATION and g.context == context and fmt(g.objective) == key
            for g in self.goals.values()
        )

    # -- conflict ----------------------------------------------------------

    def resolve_conflict(self, pursuing: GoalRecord, threatened: GoalRecord) -> str:
        """Arbitrate between an ongoing pursuit and a preservation goal it set off.

        The explored branch has already committed to the pursuit, so the
        threatened goal is the one sacrificed there; the verdict says
        whether the pursuit itself deserves to go on.  Ties favor the
        pursuit.
        """
        if threatened.kind != PRESERVATION:
            raise ValueError("threatened goal must be a preservation goal")
        if threatened.context != pursuing.context:
            raise ValueError("conflicting goals must share a context")
        if threatened.importance > pursuing.importance:
            return ABANDON_PURSUIT
        return CONTINUE
