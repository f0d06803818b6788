"""The session engine: modes, cycles, pursuits, and the event stream.

Everything observable about a session is a SessionEvent.  Renderers
turn events into transcript lines at a chosen verbosity; the server
streams them as JSON; tests assert against them directly.

A cycle in either mode runs the same spine: decay, inputs, goal
initiation, goal outcomes, one appraisal stage per settled outcome,
episode flush, then a pursuit.  Performance pursues the most important
active goal with no assumptions and stops at an action the world must
answer.  Daydreaming adopts at most one new control goal, picks a
strategy for it, and plays the strategy out inside an imagined
context that is discarded afterwards.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

from . import plotunits
from .concepts import Concept, ConceptError, Term, fmt, parse, substitute, unify
from .control import (
    BANNER_CONFLICT,
    BANNER_LEARN,
    BANNER_RATIONALIZE,
    BANNER_RECALL,
    BANNER_SCALE_AFFECT,
    DEFAULT_CATALOG,
    FAILURE_REVERSAL,
    RATIONALIZATION_SCALE,
    TRIGGER_BANNERS,
    ControlGoalRecord,
    ControlGoalSystem,
    StrategyDef,
)
from .domain import Domain, Persona
from .emotions import (
    BANNER_ANGER,
    BANNER_FEAR,
    BANNER_NEGATIVE_AFFECT,
    BANNER_POSITIVE_AFFECT,
    EmotionRecord,
    EmotionSystem,
    NEG_AFFECT,
    POS_AFFECT,
)
from .episodes import (
    EpisodeEmotion,
    EpisodeOutcome,
    EpisodeRecord,
    EpisodeUnit,
    EpisodicMemory,
    IMAGINED,
    PERSONAL,
)
from .goals import (
    ABANDON_PURSUIT,
    ACTIVE,
    CONTROL_LINKED,
    DELTA,
    FAILED,
    GoalRecord,
    GoalSystem,
    GoalTree,
    PRESERVATION,
    SUCCEEDED,
    prove_all,
)
from .planning import (
    CONFLICT,
    LOOP,
    LOW,
    NONE,
    PENDING,
    Planner,
    PlannerHooks,
    PlanRule,
    Scenario,
)
from .plotunits import AffectState, BUILTIN_UNITS, MENTAL_STATE, NEGATIVE_OUTCOME, POSITIVE_OUTCOME
from .textgen import Realizer
from .wm import REAL, WMEntry, WorkingMemory

PERFORMANCE = "performance"
DAYDREAMING = "daydreaming"
MODES = (PERFORMANCE, DAYDREAMING)

DEFAULT_MAX_CYCLES = 100

# architecture-level sentence patterns; domain templates fill the slots
RATIONALIZE_PATTERN = (
    "I rationalize failing at {0:gerund} by the fact that "
    "succeeding at {1:gerund} leads to failing at {2:gerund}."
)
BLAME_PATTERN = "I blame {0} for failing at {1:gerund}."
BENEFIT_PATTERN = "Failing at {0:gerund} may yet turn out for the best."
RECALL_PATTERN = "The time {0:past}."

EVENT_KINDS = (
    "WM-ADD",
    "WM-REMOVE",
    "RULE-FIRED",
    "GOAL",
    "EMOTION",
    "CONTROL-GOAL",
    "SCENARIO-EVENT",
    "TEXT",
    "MODE",
    "PROMPT",
    "ERROR",
)


@dataclass
class SessionEvent:
    seq: int
    cycle: int
    kind: str
    data: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "cycle": self.cycle, "kind": self.kind, "data": self.data}


Sink = Callable[[SessionEvent], None]


class Engine:
    def __init__(
        self,
        domain: Domain,
        persona: Persona,
        memory: Optional[EpisodicMemory] = None,
        seed: Optional[int] = None,
        max_cycles: int = DEFAULT_MAX_CYCLES,
    ) -> None:
        self.domain = domain
        self.persona = persona
        self.max_cycles = max_cycles
        self.tree = GoalTree(
            dict(persona.importances),
            dict(persona.classes),
            set(persona.relationship_classes),
        )
        self.wm = WorkingMemory(
            decay_step=persona.decay_step,
            removal_limit=persona.decay_limit,
            listener=self._on_wm,
        )
        self.goals = GoalSystem(self.tree, self.wm, listener=self._on_goal)
        self.emotions = EmotionSystem(
            self.wm, self.goals, persona.self_agent, listener=self._on_emotion
        )
        self.memory = memory if memory is not None else EpisodicMemory()
        self.memory.listener = self._on_memory
        catalog: Sequence[StrategyDef] = domain.strategies or DEFAULT_CATALOG
        self.control = ControlGoalSystem(
            self.goals,
            self.emotions,
            self.memory,
            catalog,
            persona.control_kinds,
            listener=self._on_control,
        )
        self.realizer = Realizer(
            dict(domain.templates),
            dict(domain.displays),
            dict(domain.genders),
            persona.self_agent,
            warn=self.warn,
        )
        # private rule copies: learning mutates rules, and the domain may
        # be shared with other engines
        rules = [replace(r, conditionals=list(r.conditionals)) for r in domain.rules]
        self.planner = Planner(
            self.wm,
            rules,
            domain.relaxations,
            hooks=PlannerHooks(
                on_goal=self._plan_goal,
                on_action=self._plan_action,
                on_assumption=self._plan_assumption,
                on_effect=self._plan_effect,
                on_goal_failed=self._plan_goal_failed,
                on_conflict=self._plan_conflict,
            ),
            rule_order_rng=random.Random(seed) if seed is not None else None,
        )
        self.units = BUILTIN_UNITS
        # conditionals learned in an earlier session ride in the memory
        # snapshot; reattach them so this session plans with them
        for learned in self.memory.consult_strategies():
            rule = self.planner.rules_by_name.get(learned.rule_name)
            if rule is not None:
                rule.attach_conditional(learned.condition, learned.precondition)
        self.mode = PERFORMANCE
        self.cycle = 0
        self.events: list[SessionEvent] = []
        self.sinks: list[Sink] = []
        self._seq = itertools.count(1)
        self._pending_inputs: list[str] = []
        self._appraisal_queue: list[tuple[int, object, int]] = []  # (due cycle, outcome, stage)
        self._episode_events: list[Concept] = []
        self._episode_outcomes: list = []
        self._episode_emotion_ids: list[int] = []
        self._consumed_evidence: set[int] = set()
        self._initiation_armed: dict[str, set[str]] = {}
        self._pending_world: Optional[tuple[GoalRecord, Concept]] = None
        self._interrupted = False
        # realization-scoped state the planner hooks consult
        self._say_subgoals = False
        self._pursuit_root: Optional[GoalRecord] = None
        self._planning_goal: Optional[GoalRecord] = None
        self._conflict_verdict: Optional[str] = None
        self._realizations = {
            "imagine-alternative": self._realize_imagine_alternative,
            "find-benefit": self._realize_find_benefit,
            "blame-outside": self._realize_blame_outside,
            "enact-unit": self._realize_enact_unit,
            "replan": self._realize_replan,
            "rehearse": self._realize_rehearse,
        }
        for fact in domain.background:
            self.wm.add(fact, REAL, pinned=True)

    # -- event plumbing ----------------------------------------------------

    def _emit(self, event_kind: str, **data) -> SessionEvent:
        event = SessionEvent(next(self._seq), self.cycle, event_kind, data)
        self.events.append(event)
        for sink in self.sinks:
            sink(event)
        return event

    def say(self, text: str) -> None:
        self._emit("TEXT", tag="say", text=text)

    def trace(self, text: str) -> None:
        self._emit("TEXT", tag="trace", text=text)

    def warn(self, text: str) -> None:
        self._emit("TEXT", tag="warn", text=text)

    def banner(self, text: str) -> None:
        self._emit("TEXT", tag="banner", text=text)

    def error(self, message: str) -> None:
        self._emit("ERROR", message=message)

    # -- subsystem listeners -----------------------------------------------

    def _on_wm(self, op: str, entry: WMEntry) -> None:
        tag = self.realizer.wm_tag(entry.id, entry.concept)
        if op in ("add", "readd"):
            self._emit(
                "WM-ADD",
                id=entry.id,
                concept=fmt(entry.concept),
                context=entry.context,
                activation=entry.activation,
                pinned=entry.pinned,
                refreshed=(op == "readd"),
                tag=tag,
            )
        elif op == "remove":
            self._emit(
                "WM-REMOVE",
                id=entry.id,
                concept=fmt(entry.concept),
                context=entry.context,
                tag=tag,
            )
        elif op == "fade":
            self.trace(f"ACTIVATION FALLS BELOW LIMIT {tag}")
        elif op == "replenish":
            self.trace(f"REPLENISH {tag}")
        elif op == "tombstone":
            self.trace(f"SHADOW {tag}")

    def _on_goal(self, *event) -> None:
        if event[0] == "goal":
            goal: GoalRecord = event[1]
            self._emit(
                "GOAL",
                op="activate",
                id=goal.id,
                kind=goal.kind,
                objective=fmt(goal.objective),
                importance=goal.importance,
                context=goal.context,
                goal_class=goal.goal_class,
                tag=self.realizer.goal_tag(goal.id, goal.objective),
            )
        elif event[0] == "outcome":
            outcome, goal = event[1], event[2]
            self._emit(
                "GOAL",
                op="outcome",
                id=goal.id,
                outcome_id=outcome.id,
                status=outcome.status,
                imagined=outcome.imagined,
                causer=outcome.causer,
                objective=fmt(goal.objective),
                tag=self.realizer.goal_tag(goal.id, goal.objective),
            )

    def _on_emotion(self, op: str, record: EmotionRecord) -> None:
        self._emit(
            "EMOTION",
            op=op,
            id=record.id,
            kind=record.kind,
            intensity=record.intensity,
            target=record.target,
            imagined=record.imagined,
            source=record.source,
        )

    def _on_control(self, op: str, record: ControlGoalRecord, emotion: EmotionRecord) -> None:
        self._emit(
            "CONTROL-GOAL",
            op=op,
            id=record.id,
            kind=record.kind,
            objective=fmt(record.objective),
            importance=record.importance,
            emotion=emotion.kind,
        )

    def _on_memory(self, op: str, record) -> None:
        if op == "store":
            self.trace(f"EPISODE {record.id} STORED ({record.kind})")
            for family, value in record.index_keys:
                self.trace(f"EPISODE INDEX {family} = {value}")
        elif op == "strategy":
            self.trace(f"INDEXING STRATEGY UNDER RULE {record.rule_name.upper()}")
        elif op == "future-plan":
            self.trace(f"INDEXING FUTURE PLAN {self.realizer.tag(record.goal)}")

    # -- planner hooks -----------------------------------------------------

    def _plan_goal(self, goal: Term) -> None:
        self._emit("SCENARIO-EVENT", step="goal", tag=self.realizer.tag(goal), concept=fmt(goal))
        if self._say_subgoals:
            self.say(self.realizer.realize(goal, "want"))

    def _plan_action(self, action: Concept) -> None:
        self._emit("SCENARIO-EVENT", step="action", tag=self.realizer.tag(action), concept=fmt(action))
        if self.mode == PERFORMANCE and self._pursuit_root is None:
            self._episode_events.append(action)
        self.say(self.realizer.realize(action, "action"))

    def _plan_assumption(self, klass: str, concept: Concept) -> None:
        self._emit(
            "SCENARIO-EVENT",
            step="assumption",
            klass=klass,
            tag=self.realizer.tag(concept),
            concept=fmt(concept),
        )
        self.trace(f"ASSUME ({klass}) {self.realizer.tag(concept)}")

    def _plan_effect(self, concept: Concept) -> None:
        self._emit("SCENARIO-EVENT", step="effect", tag=self.realizer.tag(concept), concept=fmt(concept))

    def _plan_goal_failed(self, goal: Term, reason: str) -> None:
        tag = self.realizer.tag(goal)
        if reason == "loop":
            self._emit("SCENARIO-EVENT", step="loop", tag=tag, concept=fmt(goal))
            self.trace(f"PLANNING LOOP {tag}")
        else:
            self._emit("SCENARIO-EVENT", step="goal-failed", tag=tag, concept=fmt(goal))
            self.trace(f"GOAL FAILURE {tag}")

    def _plan_conflict(self, rule: PlanRule, retracted: Concept) -> str:
        self.banner(BANNER_CONFLICT)
        self.trace(
            f"CONFLICT: RULE {rule.name.upper()} WOULD RETRACT {self.realizer.tag(retracted)}"
        )
        threatened = self._planning_goal
        pursuing = self._pursuit_root
        if threatened is None or pursuing is None:
            self._conflict_verdict = ABANDON_PURSUIT
            return "abandon"
        verdict = self.goals.resolve_conflict(pursuing, threatened)
        self._conflict_verdict = verdict
        self._settle_imagined(threatened, FAILED, causer=self.persona.self_agent, say=True)
        self.trace(f"CONFLICT VERDICT {verdict}")
        return "abandon" if verdict == ABANDON_PURSUIT else "continue"

    # -- session commands --------------------------------------------------

    def submit(self, text: str) -> None:
        self._pending_inputs.append(text)
        self._emit("PROMPT", text=text)

    def set_mode(self, mode: str) -> None:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self._emit("MODE", mode=mode)
        if mode == PERFORMANCE:
            self.run_cycle()

    def interrupt(self) -> None:
        self._interrupted = True
        self.say("INTERRUPT")
        self.trace("DAYDREAMING SUSPENDED")

    def run(self, cycles: Union[int, str]) -> int:
        """Run daydream cycles; returns how many actually ran."""
        self._interrupted = False
        ran = 0
        if isinstance(cycles, int):
            for _ in range(cycles):
                if self._interrupted:
                    break
                self.run_cycle()
                ran += 1
        elif cycles == "until-quiescent":
            while not self.quiescent() and ran < self.max_cycles:
                if self._interrupted:
                    break
                self.run_cycle()
                ran += 1
        else:
            raise ValueError(f"run takes a count or 'until-quiescent', got {cycles!r}")
        return ran

    def quiescent(self) -> bool:
        if self._pending_inputs or self._appraisal_queue:
            return False
        if self.control.unseen():
            return False
        strongest = self.emotions.strongest()
        if strongest is not None and strongest.intensity > self.control.threshold:
            return False
        return True

    # -- the cycle ---------------------------------------------------------

    def run_cycle(self) -> None:
        self.cycle += 1
        self.trace(f"CYCLE {self.cycle} BEGINS ({self.mode.upper()})")
        self.wm.decay()
        self._process_inputs()
        self._run_initiation_rules()
        self._run_outcome_rules()
        self._run_appraisals()
        self._flush_real_episode()
        self._run_real_preservation()
        if self.mode == PERFORMANCE:
            self._performance_pursuit()
        else:
            self._daydream_pursuit()

    def _process_inputs(self) -> None:
        lines, self._pending_inputs = self._pending_inputs, []
        for line in lines:
            concept = self.domain.phrases.get(line)
            if concept is None:
                try:
                    parsed = parse(line)
                except ConceptError as exc:
                    self.error(f"cannot understand input: {exc}")
                    continue
                if not isinstance(parsed, Concept):
                    self.error(f"input must be a compound concept: {line}")
                    continue
                concept = parsed
            self.wm.add(concept, REAL)
            self._episode_events.append(concept)
            if concept.head == "upcoming" and concept.args:
                situation = concept.args[0]
                if isinstance(situation, Concept):
                    record = self.emotions.fear(situation)
                    self.banner(BANNER_FEAR)
                    self._say_emotion(record)

    def _run_initiation_rules(self) -> None:
        for rule in self.domain.initiation_rules:
            keys_now: set[str] = set()
            fresh: list[Concept] = []
            for binding in prove_all(self.wm, rule.when, REAL):
                objective = substitute(rule.goal, binding)
                if not isinstance(objective, Concept):
                    continue
                key = fmt(objective)
                if key in keys_now:
                    continue
                keys_now.add(key)
                if key not in self._initiation_armed.get(rule.name, set()):
                    fresh.append(objective)
            # a trigger situation only wakes the goal once while it lasts;
            # when it lapses and returns, the goal can wake again
            self._initiation_armed[rule.name] = keys_now
            for objective in fresh:
                self._emit("RULE-FIRED", name=rule.name, rule_kind="initiation")
                goal = self.goals.activate(rule.kind, objective, REAL)
                self.say(self.realizer.realize(objective, "want"))

    def _run_outcome_rules(self) -> None:
        for rule in self.domain.outcome_rules:
            for goal in list(self.goals.active_goals(REAL)):
                if goal.kind != rule.goal_kind:
                    continue
                theta = unify(rule.goal, goal.objective)
                if theta is None:
                    continue
                evidence_pattern = substitute(rule.evidence, theta)
                for binding, entry in self.wm.query(evidence_pattern, REAL):
                    if entry.id in self._consumed_evidence:
                        continue
                    self._consumed_evidence.add(entry.id)
                    merged = dict(theta)
                    merged.update(binding)
                    causer = rule.causer
                    if isinstance(causer, str) and causer.startswith("?"):
                        causer_term = substitute(causer, merged)
                        causer = causer_term if isinstance(causer_term, str) else None
                    self._emit("RULE-FIRED", name=rule.name, rule_kind="outcome")
                    self._settle_real(goal, rule.status, causer, entry.concept)
                    break

    def _settle_real(
        self,
        goal: GoalRecord,
        status: str,
        causer: Optional[str],
        evidence: Optional[Concept],
    ) -> None:
        outcome = self.goals.record_outcome(
            goal, status, causer=causer, imagined=False, cycle=self.cycle, evidence=evidence
        )
        self._say_outcome(goal, status)
        self._episode_outcomes.append((goal, outcome))
        self._appraisal_queue.append((self.cycle, outcome, 1))

    def _settle_imagined(
        self,
        goal: GoalRecord,
        status: str,
        causer: Optional[str] = None,
        say: bool = False,
    ):
        outcome = self.goals.record_outcome(
            goal, status, causer=causer, imagined=True, cycle=self.cycle
        )
        if say:
            self._say_outcome(goal, status)
        return outcome

    def _say_outcome(self, goal: GoalRecord, status: str) -> None:
        form = "fail" if status == FAILED else "success"
        self.say(self.realizer.realize(goal.objective, form))

    def _run_appraisals(self) -> None:
        due = [item for item in self._appraisal_queue if item[0] <= self.cycle]
        self._appraisal_queue = [item for item in self._appraisal_queue if item[0] > self.cycle]
        for _due, outcome, stage in due:
            created = self.emotions.appraise_stage(outcome, stage)
            if created:
                self.banner(self._stage_banner(created[0]))
                for record in created:
                    self._say_emotion(record)
                    self._episode_emotion_ids.append(record.id)
            if stage == 1:
                self._appraisal_queue.append((self.cycle + 1, outcome, 2))

    def _stage_banner(self, record: EmotionRecord) -> str:
        if record.kind == POS_AFFECT:
            return BANNER_POSITIVE_AFFECT
        if record.kind == NEG_AFFECT:
            return BANNER_NEGATIVE_AFFECT
        return BANNER_ANGER

    def _say_emotion(self, record: EmotionRecord) -> None:
        form = "say"
        if record.kind == NEG_AFFECT and record.intensity < 0.5:
            form = "say-mild"
        pattern = self.domain.templates.get((record.kind.lower(), form))
        if pattern is None:
            self.warn(f"no template for ({record.kind.lower()} {form})")
            return
        args: list[Term] = []
        if record.target is not None:
            args.append(record.target)
        elif record.situation is not None:
            args.append(record.situation)
        self.say(self.realizer.realize_template(pattern, args))

    # -- episodes ----------------------------------------------------------

    def _flush_real_episode(self) -> None:
        if not self._episode_outcomes:
            return
        events = list(self._episode_events)
        outcomes = [
            EpisodeOutcome(
                goal.objective,
                outcome.status,
                imagined=False,
                goal_class=goal.goal_class,
                causer=outcome.causer,
            )
            for goal, outcome in self._episode_outcomes
        ]
        emotions = [
            EpisodeEmotion(r.kind, r.intensity, r.target)
            for r in (self.emotions.records[i] for i in self._episode_emotion_ids)
        ]
        states = self._affect_states_real(events, self._episode_outcomes)
        instances = plotunits.recognize(states, self.units)
        units = [EpisodeUnit(i.unit.upper(), i.bindings) for i in instances]
        self.memory.store(PERSONAL, events, outcomes, emotions, units, cycle=self.cycle)
        self._episode_events = []
        self._episode_outcomes = []
        self._episode_emotion_ids = []

    def _mental_head(self, payload: Term) -> str:
        """The objective a mental event is about, for coreference checks."""
        seen = payload
        while isinstance(seen, Concept):
            if seen.head in ("want", "not", "know", "tell") and seen.args:
                inner = seen.args[-1]
                if isinstance(inner, Concept):
                    seen = inner
                    continue
            return seen.head
        return str(seen)

    def _affect_states_real(self, events, settled) -> list[AffectState]:
        states: list[AffectState] = []
        index = itertools.count()
        me = self.persona.self_agent
        for event in events:
            if event.head == "tell" and len(event.args) >= 3:
                speaker = event.args[0]
                if not isinstance(speaker, str):
                    continue
                head = self._mental_head(event.args[2])
                states.append(AffectState(next(index), speaker, MENTAL_STATE, head))
        for goal, outcome in settled:
            kind = NEGATIVE_OUTCOME if outcome.status == FAILED else POSITIVE_OUTCOME
            states.append(
                AffectState(next(index), me, kind, goal.objective.head, outcome.causer)
            )
        return states

    # -- real-context preservation -----------------------------------------

    def _run_real_preservation(self) -> None:
        activated = self.goals.preservation_triggers(self.domain.preservation_rules, REAL)
        for goal, rule, _binding in activated:
            self._emit("RULE-FIRED", name=rule.name, rule_kind="preservation")
            if rule.banner:
                self.banner(rule.banner)
            self.say(self.realizer.realize(goal.objective, "preserve"))

    # -- performance -------------------------------------------------------

    def _performance_pursuit(self) -> None:
        if self._pending_world is not None:
            goal, _action = self._pending_world
            if goal.status != ACTIVE:
                self._pending_world = None
            else:
                return  # still waiting on the world
        candidates = [
            g
            for g in self.goals.active_goals(REAL)
            if g.kind in (DELTA, PRESERVATION)
        ]
        if not candidates:
            return
        focus = max(candidates, key=lambda g: (g.importance, g.seq))
        gtag = self.realizer.goal_tag(focus.id, focus.objective)
        self.trace(f"START PLANNING {gtag} LEVEL NONE")
        scenario = self.planner.run(
            focus.objective,
            REAL,
            NONE,
            goal_kind=focus.kind.lower(),
            performance=True,
            preserve=(focus.kind == PRESERVATION),
        )
        self.trace(f"TERMINATE PLANNING {gtag} OUTCOME {scenario.outcome}")
        if scenario.outcome == SUCCEEDED:
            self._settle_real(focus, SUCCEEDED, causer=None, evidence=None)
        elif scenario.outcome == PENDING and scenario.pending_action is not None:
            self._pending_world = (focus, scenario.pending_action)
            self.trace("PLANNING SUSPENDED AWAITING RESPONSE")
        # a dead-end performance plan leaves the goal active; the world
        # may still change in its favor

    # -- daydreaming -------------------------------------------------------

    def _daydream_pursuit(self) -> None:
        triggered = self.control.trigger_one()
        if triggered is None:
            return
        record, _emotion = triggered
        self.banner(TRIGGER_BANNERS[record.kind])
        self.say(self.realizer.realize(record.objective, "want"))
        strategy = self.control.select_strategy(record)
        if strategy is None:
            self.warn(f"no strategy available for {record.kind}")
            self.control.conclude(record, FAILED)
            return
        self.trace(f"STRATEGY {strategy.name.upper()} SELECTED")
        realization = self._realizations.get(strategy.realization)
        if realization is None:
            self.warn(f"no realization named {strategy.realization}")
            self.control.conclude(record, FAILED)
            return
        status = realization(record, strategy)
        self.control.conclude(record, status)
        self._emit(
            "CONTROL-GOAL",
            op="conclude",
            id=record.id,
            kind=record.kind,
            objective=fmt(record.objective),
            importance=record.importance,
            status=status,
        )

    # -- shared realization helpers ----------------------------------------

    def _sponsor(self, record: ControlGoalRecord) -> tuple:
        outcome = self.goals.outcomes.get(record.outcome_id) if record.outcome_id else None
        goal = self.goals.goal_of(outcome) if outcome else None
        return outcome, goal

    def _plan_in(
        self,
        goal: GoalRecord,
        ctx: str,
        level: str,
        scenario: Scenario,
        say_subgoals: bool = False,
        goal_kind: Optional[str] = None,
        preserve: bool = False,
    ) -> Scenario:
        gtag = self.realizer.goal_tag(goal.id, goal.objective)
        self.trace(f"START PLANNING {gtag} LEVEL {level.upper()}")
        previous = (self._say_subgoals, self._planning_goal)
        self._say_subgoals = say_subgoals
        self._planning_goal = goal
        try:
            result = self.planner.run(
                goal.objective,
                ctx,
                level,
                goal_kind=goal_kind,
                preserve=preserve,
                scenario=scenario,
            )
        finally:
            self._say_subgoals, self._planning_goal = previous
        self.trace(f"TERMINATE PLANNING {gtag} OUTCOME {result.outcome}")
        return result

    def _store_imagined(
        self,
        scenario: Scenario,
        settled: list,
        extra_states: Optional[list[AffectState]] = None,
        emotion_records: Sequence[EmotionRecord] = (),
    ) -> tuple[EpisodeRecord, list]:
        events = [
            e.concept
            for e in scenario.events
            if e.kind in ("action", "assumption", "effect", "belief") and e.concept is not None
        ]
        outcomes = [
            EpisodeOutcome(
                goal.objective,
                outcome.status,
                imagined=True,
                goal_class=goal.goal_class,
                causer=outcome.causer,
            )
            for goal, outcome in settled
        ]
        states = extra_states
        if states is None:
            states = []
            index = itertools.count()
            for goal, outcome in settled:
                kind = NEGATIVE_OUTCOME if outcome.status == FAILED else POSITIVE_OUTCOME
                states.append(
                    AffectState(
                        next(index), self.persona.self_agent, kind, goal.objective.head, outcome.causer
                    )
                )
        instances = plotunits.recognize(states, self.units)
        units = [EpisodeUnit(i.unit.upper(), i.bindings) for i in instances]
        emotions = [EpisodeEmotion(r.kind, r.intensity, r.target) for r in emotion_records]
        record = self.memory.store(
            IMAGINED, events, outcomes, emotions, units, cycle=self.cycle
        )
        return record, instances

    def _cascade(self, ctx: str, scenario: Scenario) -> str:
        """Preservation ripple inside an imagined scenario.

        Returns "ok" or "abandoned".  Newly satisfied preservation goals
        keep the cascade going until nothing new triggers.
        """
        while True:
            activated = self.goals.preservation_triggers(self.domain.preservation_rules, ctx)
            if not activated:
                return "ok"
            for pgoal, rule, _binding in activated:
                self._emit("RULE-FIRED", name=rule.name, rule_kind="preservation")
                if rule.banner:
                    self.banner(rule.banner)
                self.say(self.realizer.realize(pgoal.objective, "preserve"))
                self._conflict_verdict = None
                result = self._plan_in(
                    pgoal, ctx, LOW, scenario, goal_kind="preservation", preserve=True
                )
                if result.outcome == SUCCEEDED:
                    self._settle_imagined(pgoal, SUCCEEDED)
                elif result.outcome == CONFLICT:
                    # the conflict hook already settled the threatened goal
                    if self._conflict_verdict == ABANDON_PURSUIT:
                        return "abandoned"
                else:
                    if pgoal.status == ACTIVE:
                        self._settle_imagined(pgoal, FAILED, say=True)

    def _suggest_forward(self, ctx: str, scenario: Scenario, agent: str) -> None:
        while True:
            found = self.memory.suggest_continuation(self.wm, ctx, agent)
            if found is None:
                return
            episode, suggestion, cmap = found
            source_event = None
            for event in episode.events:
                if cmap.translate(event) == suggestion:
                    source_event = event
                    break
            self.banner(BANNER_RECALL)
            self.trace(f"RECALL EPISODE {episode.id}")
            if source_event is not None:
                self.say(self.realizer.realize_template(RECALL_PATTERN, [source_event]))
            entry = self.wm.add(suggestion, ctx)
            scenario.entry_ids.add(entry.id)
            scenario.add("belief", suggestion)
            self._emit(
                "SCENARIO-EVENT",
                step="belief",
                tag=self.realizer.tag(suggestion),
                concept=fmt(suggestion),
            )
            self.say(self.realizer.realize(suggestion, "say"))

    def _other_agent(self, objective: Concept) -> Optional[str]:
        for arg in objective.args:
            if isinstance(arg, str) and arg != self.persona.self_agent and not arg.startswith("?"):
                return arg
        return None

    # -- realizations ------------------------------------------------------

    def _realize_imagine_alternative(self, record: ControlGoalRecord, strategy: StrategyDef) -> str:
        outcome, failed_goal = self._sponsor(record)
        if failed_goal is None:
            return FAILED
        ctx = self.wm.new_imagined().id
        scenario = Scenario(ctx, strategy.level, target=failed_goal.objective)
        linked = self.goals.activate(CONTROL_LINKED, failed_goal.objective, ctx)
        self._pursuit_root = linked
        settled: list = []
        try:
            result = self._plan_in(
                linked, ctx, strategy.level, scenario, goal_kind=failed_goal.kind.lower()
            )
            if result.outcome != SUCCEEDED:
                self._settle_imagined(linked, FAILED)
                return FAILED
            boon = self._settle_imagined(linked, SUCCEEDED, say=True)
            settled.append((linked, boon))
            agent = self._other_agent(failed_goal.objective)
            if agent:
                self._suggest_forward(ctx, scenario, agent)
            self._cascade(ctx, scenario)
            settled.extend(
                (self.goals.goal_of(o), o)
                for o in self.goals.outcomes.values()
                if o.imagined
                and o.cycle == self.cycle
                and self.goals.goal_of(o).context == ctx
                and o.id != boon.id
            )
            _episode, instances = self._store_imagined(scenario, settled)
            wanted = (strategy.unit or "").lower()
            if not any(i.unit == wanted for i in instances):
                return FAILED
            boon_goal = settled[0][0]
            price = next(
                ((g, o) for g, o in settled[1:] if o.status == FAILED),
                None,
            )
            if price is None:
                return FAILED
            self.banner(BANNER_RATIONALIZE)
            self.say(
                self.realizer.realize_template(
                    RATIONALIZE_PATTERN,
                    [boon_goal.objective, boon_goal.objective, price[0].objective],
                )
            )
            self._scale_down(record)
            return SUCCEEDED
        finally:
            self._pursuit_root = None
            self.wm.drop(ctx)

    def _scale_down(self, record: ControlGoalRecord) -> None:
        self.banner(BANNER_SCALE_AFFECT)
        if record.outcome_id is None:
            return
        priors = self.emotions.for_outcome(record.outcome_id, NEG_AFFECT)
        live = [r for r in priors if self.emotions.is_live(r)]
        if not live:
            return
        target = live[-1]
        self.emotions.scale_affect(target, RATIONALIZATION_SCALE)
        self._say_emotion(target)

    def _realize_find_benefit(self, record: ControlGoalRecord, strategy: StrategyDef) -> str:
        """Rationalize by recalling a past setback that paid off."""
        if not strategy.unit:
            return FAILED
        episodes = self.memory.with_unit(strategy.unit)
        if not episodes:
            return FAILED
        episode = episodes[0]
        self.banner(BANNER_RECALL)
        self.trace(f"RECALL EPISODE {episode.id}")
        if episode.events:
            self.say(self.realizer.realize_template(RECALL_PATTERN, [episode.events[0]]))
        _outcome, failed_goal = self._sponsor(record)
        self.banner(BANNER_RATIONALIZE)
        if failed_goal is not None:
            self.say(
                self.realizer.realize_template(
                    BENEFIT_PATTERN, [failed_goal.objective]
                )
            )
        self._scale_down(record)
        return SUCCEEDED

    def _realize_blame_outside(self, record: ControlGoalRecord, strategy: StrategyDef) -> str:
        outcome, failed_goal = self._sponsor(record)
        if outcome is None or failed_goal is None:
            return FAILED
        causer = outcome.causer
        if causer is None or causer == self.persona.self_agent:
            return FAILED
        self.banner(BANNER_RATIONALIZE)
        self.say(
            self.realizer.realize_template(BLAME_PATTERN, [causer, failed_goal.objective])
        )
        self._scale_down(record)
        return SUCCEEDED

    def _recall_enactment(self, strategy: StrategyDef, bindings: dict[str, str]) -> None:
        """Recall a past episode shaped like the unit and map its cast over."""
        if not strategy.unit:
            return
        episodes = self.memory.with_unit(strategy.unit)
        if not episodes:
            return
        past = episodes[0]
        self.banner(BANNER_RECALL)
        self.trace(f"RECALL EPISODE {past.id}")
        try:
            cmap = self.memory.adapt(past, strategy.unit, bindings)
        except ValueError:
            return
        for old, new in sorted(cmap.agent_map.items()):
            self.trace(f"ANALOGY {old.upper()} -> {new.upper()}")

    def _realize_enact_unit(self, record: ControlGoalRecord, strategy: StrategyDef) -> str:
        outcome, failed_goal = self._sponsor(record)
        if outcome is None or failed_goal is None or outcome.causer is None:
            return FAILED
        unit = plotunits.catalog_by_name(self.units).get((strategy.unit or "").lower())
        if unit is None:
            return FAILED
        me = self.persona.self_agent
        offender = outcome.causer
        bindings = {"a": me, "b": offender}
        self._recall_enactment(strategy, bindings)
        steps = plotunits.skeleton(unit, bindings, relation=failed_goal.objective)
        ctx = self.wm.new_imagined().id
        scenario = Scenario(ctx, strategy.level, target=record.objective)
        settled: list = []
        emotion_records: list[EmotionRecord] = []
        try:
            for step_kind, concept in steps:
                if step_kind == "goal" and isinstance(concept, Concept):
                    linked = self.goals.activate(CONTROL_LINKED, concept, ctx)
                    self.say(self.realizer.realize(concept, "want"))
                    result = self._plan_in(linked, ctx, strategy.level, scenario)
                    if result.outcome != SUCCEEDED:
                        self._settle_imagined(linked, FAILED)
                        return FAILED
                    settled.append((linked, self._settle_imagined(linked, SUCCEEDED)))
                elif step_kind == "belief" and isinstance(concept, Concept):
                    entry = self.wm.add(concept, ctx)
                    scenario.entry_ids.add(entry.id)
                    scenario.add("belief", concept)
                    self._emit(
                        "SCENARIO-EVENT",
                        step="belief",
                        tag=self.realizer.tag(concept),
                        concept=fmt(concept),
                    )
                elif isinstance(concept, Concept):
                    # any remaining step is an action the daydream performs
                    entry = self.wm.add(concept, ctx)
                    scenario.entry_ids.add(entry.id)
                    scenario.add("action", concept)
                    self._emit(
                        "SCENARIO-EVENT",
                        step="action",
                        tag=self.realizer.tag(concept),
                        concept=fmt(concept),
                    )
                    self.say(self.realizer.realize(concept, "action"))
            payoff_goal = self.goals.activate(CONTROL_LINKED, record.objective, ctx)
            payoff = self._settle_imagined(payoff_goal, SUCCEEDED)
            settled.append((payoff_goal, payoff))
            created = self.emotions.appraise_stage(payoff, 1)
            if created:
                self.banner(BANNER_POSITIVE_AFFECT)
                for emo in created:
                    self._say_emotion(emo)
                    emotion_records.append(emo)
            states = [
                AffectState(0, me, NEGATIVE_OUTCOME, failed_goal.objective.head, offender),
                AffectState(1, offender, MENTAL_STATE, failed_goal.objective.head),
                AffectState(2, offender, NEGATIVE_OUTCOME, failed_goal.objective.head, me),
                AffectState(3, me, POSITIVE_OUTCOME, record.objective.head),
            ]
            self._store_imagined(
                scenario, settled, extra_states=states, emotion_records=emotion_records
            )
            return SUCCEEDED
        finally:
            self.wm.drop(ctx)

    def _realize_replan(self, record: ControlGoalRecord, strategy: StrategyDef) -> str:
        outcome, failed_goal = self._sponsor(record)
        if outcome is None or failed_goal is None:
            return FAILED
        ctx = self.wm.new_imagined().id
        scenario = Scenario(ctx, strategy.level, target=failed_goal.objective)
        linked = self.goals.activate(CONTROL_LINKED, failed_goal.objective, ctx)
        try:
            result = self._plan_in(
                linked,
                ctx,
                strategy.level,
                scenario,
                say_subgoals=True,
                goal_kind=failed_goal.kind.lower(),
            )
            if result.outcome == SUCCEEDED:
                achieved = self._settle_imagined(linked, SUCCEEDED, say=True)
                report = self.planner.assess(scenario, self.persona.self_agent)
                episode, _instances = self._store_imagined(scenario, [(linked, achieved)])
                if record.kind == FAILURE_REVERSAL and report.dampening_agent:
                    self.trace(
                        f"DAMPENED: OUTCOME ASSUMES {report.dampening_agent.upper()} COOPERATES"
                    )
                elif report.realistic:
                    actions = [
                        e.concept for e in scenario.events if e.kind == "action" and e.concept
                    ]
                    self.memory.add_future_plan(linked.objective, actions, episode.id)
                return SUCCEEDED
            achieved = self._settle_imagined(linked, FAILED)
            if not outcome.imagined and self.emotions.for_outcome(outcome.id, NEG_AFFECT):
                regret = self.emotions.renew_negative(outcome)
                self._say_emotion(regret)
            episode, _instances = self._store_imagined(scenario, [(linked, achieved)])
            if result.outcome == LOOP and scenario.loop is not None:
                self.banner(BANNER_LEARN)
                rule, condition, precondition = self.planner.learn_conditional(scenario)
                self.trace(
                    f"LEARN CONDITIONAL FOR RULE {rule.name.upper()}: "
                    f"WHEN [{self.realizer.tag(condition)}] "
                    f"FIRST ACHIEVE [{self.realizer.tag(precondition)}]"
                )
                self.memory.add_strategy(rule.name, condition, precondition, episode.id)
            return FAILED
        finally:
            self.wm.drop(ctx)

    def _realize_rehearse(self, record: ControlGoalRecord, strategy: StrategyDef) -> str:
        situation = record.objective.args[0] if record.objective.args else None
        if not isinstance(situation, Concept):
            return FAILED
        ctx = self.wm.new_imagined().id
        scenario = Scenario(ctx, strategy.level, target=situation)
        try:
            entry = self.wm.add(situation, ctx)
            scenario.entry_ids.add(entry.id)
            scenario.add("belief", situation)
            verdict = self._cascade(ctx, scenario)
            report = self.planner.assess(scenario, self.persona.self_agent)
            settled = [
                (self.goals.goal_of(o), o)
                for o in self.goals.outcomes.values()
                if o.imagined and o.cycle == self.cycle and self.goals.goal_of(o).context == ctx
            ]
            episode, _instances = self._store_imagined(scenario, settled)
            actions = [e.concept for e in scenario.events if e.kind == "action" and e.concept]
            if verdict == "ok" and report.realistic and actions:
                self.memory.add_future_plan(situation, actions, episode.id)
                return SUCCEEDED
            return FAILED
        finally:
            self.wm.drop(ctx)

    # -- inspection --------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "cycle": self.cycle,
            "mode": self.mode,
            "wm": [
                {
                    "id": e.id,
                    "concept": fmt(e.concept),
                    "context": e.context,
                    "activation": e.activation,
                    "pinned": e.pinned,
                }
                for e in sorted(self.wm.entries.values(), key=lambda e: e.id)
            ],
            "goals": [
                {
                    "id": g.id,
                    "kind": g.kind,
                    "objective": fmt(g.objective),
                    "status": g.status,
                    "importance": g.importance,
                    "context": g.context,
                }
                for g in self.goals.goals.values()
            ],
            "emotions": [
                {
                    "id": r.id,
                    "kind": r.kind,
                    "intensity": r.intensity,
                    "target": r.target,
                    "imagined": r.imagined,
                    "live": self.emotions.is_live(r),
                }
                for r in self.emotions.records.values()
            ],
            "control_goals": [
                {
                    "id": r.id,
                    "kind": r.kind,
                    "objective": fmt(r.objective),
                    "status": r.status,
                    "strategy": r.strategy,
                }
                for r in self.control.records
            ],
            "episodes": len(self.memory.episodes),
        }

    def transcript(self, level: str = "full") -> str:
        lines: list[str] = []
        for event in self.events:
            lines.extend(render_event(event, level))
        return "\n".join(lines)


# -- script driving --------------------------------------------------------


def run_script(engine: Engine, commands) -> None:
    for command in commands:
        if command.kind == "input":
            engine.submit(command.arg)
        elif command.kind == "mode":
            engine.set_mode(command.arg)
        elif command.kind == "run":
            if command.arg == "until-quiescent":
                engine.run("until-quiescent")
            else:
                engine.run(int(command.arg))
        elif command.kind == "interrupt":
            engine.interrupt()


# -- rendering -------------------------------------------------------------

TRACE_LEVELS = ("quiet", "banner", "full")

_BANNER_BAR = "-" * 60


def render_event(event: SessionEvent, level: str = "full") -> list[str]:
    """Transcript lines for one event at the given verbosity."""
    if level not in TRACE_LEVELS:
        raise ValueError(f"unknown trace level {level!r}")
    if level == "quiet":
        return ["ERROR: " + event.data["message"]] if event.kind == "ERROR" else []
    full = level == "full"
    kind = event.kind
    data = event.data
    if kind == "PROMPT":
        return ["> " + data["text"]]
    if kind == "MODE":
        return [data["mode"].upper() + " MODE"]
    if kind == "ERROR":
        return ["ERROR: " + data["message"]]
    if kind == "TEXT":
        tag = data["tag"]
        if tag == "say":
            return [data["text"]]
        if tag == "banner":
            return [_BANNER_BAR, *data["text"].splitlines(), _BANNER_BAR]
        if tag == "warn":
            return ["WARNING: " + data["text"]]
        return [data["text"]] if full else []
    if not full:
        return []
    if kind == "WM-ADD":
        verb = "REFRESH IN WM" if data.get("refreshed") else "ADD TO WM"
        return [f"{verb} {data['tag']}"]
    if kind == "WM-REMOVE":
        return [f"REMOVE FROM WM {data['tag']}"]
    if kind == "RULE-FIRED":
        return [f"RULE {data['name'].upper()} FIRES"]
    if kind == "GOAL":
        if data["op"] == "activate":
            return [
                f"GOAL ACTIVATED {data['tag']} KIND {data['kind']}"
                f" IMPORTANCE {data['importance']}"
            ]
        suffix = " (IMAGINED)" if data.get("imagined") else ""
        return [f"GOAL {data['status']} {data['tag']}{suffix}"]
    if kind == "EMOTION":
        op = data["op"]
        base = f"{data['kind']} {data['intensity']}"
        if data.get("target"):
            base += f" TOWARD {str(data['target']).upper()}"
        if data.get("imagined"):
            base += " (IMAGINED)"
        if op == "activate":
            return [f"EMOTION {base}"]
        if op == "scale":
            return [f"EMOTION SCALED {base}"]
        if op == "renew":
            return [f"EMOTION RENEWED {base}"]
        return []
    if kind == "CONTROL-GOAL":
        op = data["op"]
        if op == "activate":
            return [
                f"CONTROL GOAL {data['kind']} ACTIVATED"
                f" (IMPORTANCE {data['importance']})"
            ]
        if op == "conclude":
            return [f"CONTROL GOAL {data['kind']} {data['status']}"]
        return []
    if kind == "SCENARIO-EVENT":
        step = data["step"]
        tag = data.get("tag", "")
        if step == "goal":
            return [f"SUBGOAL {tag}"]
        if step == "action":
            return [f"ACTION {tag}"]
        if step == "assumption":
            return []  # the ASSUME trace line already covers it
        if step == "effect":
            return [f"EFFECT {tag}"]
        if step == "belief":
            return [f"BELIEF {tag}"]
        return []
    return []
