"""Backward-chaining scenario planner.

Planning serves both modes.  In performance mode it runs with no need
relaxation and stops at the first action that requires the world to
respond.  In daydreaming mode it runs inside an imagined context where
unprovable needs may be assumed, each assumption tagged with its
relaxation class so a finished scenario can be judged for realism.

A goal that unifies with one of its own proper ancestors is a planning
loop.  The loop's shape is worth keeping: the repeated goal becomes the
condition and the goal that needed it becomes the precondition of a
learned conditional attachment on the top rule, which both schedules
the precondition early next time and prunes the loop branch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .concepts import (
    Binding,
    Concept,
    Term,
    fmt,
    is_ground,
    substitute,
    unify,
    variables,
)
from .wm import WorkingMemory

NONE = "none"
LOW = "low"
HIGH = "high"
LEVELS = {NONE: 0, LOW: 1, HIGH: 2}

OTHER_BEHAVIOR = "OTHER-BEHAVIOR"
SELF_ATTRIBUTE = "SELF-ATTRIBUTE"
PHYSICAL = "PHYSICAL"
SOCIAL = "SOCIAL"
RELAXATION_CLASSES = (OTHER_BEHAVIOR, SELF_ATTRIBUTE, PHYSICAL, SOCIAL)

DEFAULT_BUDGET = 200
DEFAULT_DEPTH = 12

SUCCEEDED = "SUCCEEDED"
FAILED = "FAILED"
LOOP = "LOOP"
PENDING = "PENDING"
CONFLICT = "CONFLICT"
ABANDONED = "ABANDONED"


class PlannerError(RuntimeError):
    pass


@dataclass
class PlanRule:
    """One way of achieving a goal pattern.

    kind "plan" rules may subgoal and relax their preconditions;
    "inference" rules only derive from facts already present;
    "request" rules perform an action whose payoff is up to the world.
    """

    name: str
    goal: Concept
    kind: str = "plan"
    goal_kinds: Optional[frozenset[str]] = None
    preconds: tuple[Term, ...] = ()
    subgoals: tuple[Term, ...] = ()
    action: Optional[Concept] = None
    effects: tuple[Term, ...] = ()
    retracts: tuple[Term, ...] = ()
    conditionals: list[tuple[Concept, Concept]] = field(default_factory=list)

    def attach_conditional(self, condition: Concept, precondition: Concept) -> bool:
        key = (fmt(condition), fmt(precondition))
        for cond, pre in self.conditionals:
            if (fmt(cond), fmt(pre)) == key:
                return False
        self.conditionals.append((condition, precondition))
        return True


@dataclass(frozen=True)
class RelaxationRule:
    name: str
    klass: str
    pattern: Concept
    min_level: str

    def __post_init__(self) -> None:
        if self.klass not in RELAXATION_CLASSES:
            raise ValueError(f"unknown relaxation class {self.klass}")
        if self.min_level not in (LOW, HIGH):
            raise ValueError(f"relaxation level must be low or high, got {self.min_level}")


@dataclass
class ScenarioEvent:
    kind: str  # goal | action | assumption | effect | belief | state | recall | outcome
    concept: Optional[Term]
    note: str = ""


@dataclass
class LoopInfo:
    condition: Concept
    precondition: Concept
    top_goal: Concept
    top_rule: str


@dataclass
class Scenario:
    context: str
    level: str
    target: Optional[Concept] = None
    events: list[ScenarioEvent] = field(default_factory=list)
    assumptions: list[tuple[str, Concept]] = field(default_factory=list)
    outcome: str = FAILED
    loop: Optional[LoopInfo] = None
    pending_action: Optional[Concept] = None
    steps_used: int = 0
    # working memory entries asserted on behalf of this scenario, shared
    # across several planner runs when the engine chains them
    entry_ids: set[int] = field(default_factory=set)

    def add(self, kind: str, concept: Optional[Term], note: str = "") -> ScenarioEvent:
        event = ScenarioEvent(kind, concept, note)
        self.events.append(event)
        return event


@dataclass
class RealismReport:
    counts: dict[str, int]
    realistic: bool
    dampening_agent: Optional[str] = None


@dataclass
class PlannerHooks:
    """Engine integration points.  All optional; tests mostly skip them."""

    on_goal: Optional[Callable[[Term], None]] = None
    on_action: Optional[Callable[[Concept], None]] = None
    on_assumption: Optional[Callable[[str, Concept], None]] = None
    on_effect: Optional[Callable[[Concept], None]] = None
    on_goal_failed: Optional[Callable[[Term, str], None]] = None
    # called when applying a rule would retract a fact this scenario
    # established; decides the fate of the enclosing pursuit
    on_conflict: Optional[Callable[[PlanRule, Concept], str]] = None


@dataclass
class _Frame:
    goal: Term
    rule: str = ""


class _AwaitWorld(Exception):
    def __init__(self, action: Concept) -> None:
        self.action = action


class _ConflictAbort(Exception):
    pass


class _AbandonScenario(Exception):
    pass


class _BudgetExhausted(Exception):
    pass


class Planner:
    def __init__(
        self,
        wm: WorkingMemory,
        rules: Sequence[PlanRule],
        relaxations: Sequence[RelaxationRule] = (),
        hooks: Optional[PlannerHooks] = None,
        budget: int = DEFAULT_BUDGET,
        depth_bound: int = DEFAULT_DEPTH,
        rule_order_rng=None,
    ) -> None:
        self.wm = wm
        self.rules = list(rules)
        self.rules_by_name = {r.name: r for r in self.rules}
        if len(self.rules_by_name) != len(self.rules):
            raise PlannerError("duplicate plan rule names")
        self.relaxations = list(relaxations)
        self.hooks = hooks or PlannerHooks()
        self.budget = budget
        self.depth_bound = depth_bound
        self.rule_order_rng = rule_order_rng
        self._rename = itertools.count(1)

    # -- public ------------------------------------------------------------

    def run(
        self,
        goal: Concept,
        ctx: str,
        level: str = NONE,
        goal_kind: Optional[str] = None,
        performance: bool = False,
        preserve: bool = False,
        scenario: Optional[Scenario] = None,
    ) -> Scenario:
        if level not in LEVELS:
            raise PlannerError(f"unknown relaxation level {level!r}")
        sc = scenario if scenario is not None else Scenario(ctx, level)
        if sc.target is None:
            sc.target = goal
        self._sc = sc
        self._ctx = ctx
        self._level = LEVELS[level]
        self._performance = performance
        self._spent = 0
        self._memo: dict[str, int] = {}
        self._asserts = 0
        self._loop_seen = False
        try:
            # a preservation objective holds right now; planning it means
            # countering the threat, so the initial prove is skipped
            binding = self._achieve(goal, [], goal_kind, skip_prove=preserve)
            sc.outcome = SUCCEEDED if binding is not None else FAILED
        except _AwaitWorld as pending:
            sc.outcome = PENDING
            sc.pending_action = pending.action
        except _ConflictAbort:
            sc.outcome = CONFLICT
        except _AbandonScenario:
            sc.outcome = ABANDONED
        except _BudgetExhausted:
            sc.outcome = FAILED
        if sc.outcome == FAILED and self._loop_seen:
            sc.outcome = LOOP
        sc.steps_used += self._spent
        return sc

    def relax(self, term: Term, level: str, binding: Optional[Binding] = None) -> Optional[tuple[str, Concept]]:
        """First relaxation rule willing to assume *term* at *level*."""
        rank = LEVELS[level] if isinstance(level, str) else level
        if rank <= 0:
            return None
        grounded = substitute(term, binding or {})
        if not is_ground(grounded) or not isinstance(grounded, Concept):
            return None
        for rule in self.relaxations:
            if LEVELS[rule.min_level] > rank:
                continue
            if unify(rule.pattern, grounded) is not None:
                return (rule.klass, grounded)
        return None

    def detect_loop(self, goal: Term, ancestors: Sequence[Term]) -> Optional[Term]:
        """The proper ancestor this goal repeats, if any."""
        for ancestor in ancestors:
            if unify(goal, ancestor) is not None:
                return ancestor
        return None

    def learn_conditional(self, scenario: Scenario) -> tuple[PlanRule, Concept, Concept]:
        """Turn a planning loop into a conditional precondition on the top rule."""
        if scenario.outcome != LOOP or scenario.loop is None:
            raise PlannerError("learn_conditional requires a scenario that looped")
        info = scenario.loop
        rule = self.rules_by_name.get(info.top_rule)
        if rule is None:
            raise PlannerError(f"loop top rule {info.top_rule!r} not found")
        rule.attach_conditional(info.condition, info.precondition)
        return rule, info.condition, info.precondition

    def assess(self, scenario: Scenario, self_agent: str = "me") -> RealismReport:
        """Count assumptions by class; flag wishfulness about higher-ups."""
        counts = {klass: 0 for klass in RELAXATION_CLASSES}
        for klass, _concept in scenario.assumptions:
            counts[klass] += 1
        dampening = None
        my_rank = self._status_rank(self_agent, scenario.context)
        for klass, concept in scenario.assumptions:
            if klass not in (OTHER_BEHAVIOR, SELF_ATTRIBUTE):
                continue
            for agent in self._agents_in(concept, self_agent):
                rank = self._status_rank(agent, scenario.context)
                if rank is not None and (my_rank is None or rank > my_rank):
                    dampening = agent
                    break
            if dampening:
                break
        realistic = sum(counts.values()) == 0
        return RealismReport(counts, realistic, dampening)

    # -- internals ---------------------------------------------------------

    def _status_rank(self, agent: str, ctx: str) -> Optional[float]:
        hit = self.wm.prove(Concept("status-rank", (agent, "?n")), ctx)
        if hit is None:
            return None
        value = hit.get("?n")
        return float(value) if isinstance(value, (int, float)) else None

    def _agents_in(self, concept: Term, self_agent: str):
        if isinstance(concept, str) and not concept.startswith("?"):
            if concept != self_agent:
                yield concept
        elif isinstance(concept, Concept):
            for arg in concept.args:
                yield from self._agents_in(arg, self_agent)

    def _spend(self) -> None:
        self._spent += 1
        if self._spent > self.budget:
            raise _BudgetExhausted()

    def _rename_rule_goal(self, rule: PlanRule) -> tuple[Concept, dict[str, Term]]:
        tag = next(self._rename)
        mapping: dict[str, Term] = {}
        for part in (rule.goal,) + rule.preconds + rule.subgoals + rule.effects + rule.retracts:
            for var in variables(part):
                mapping.setdefault(var, f"{var}~{tag}")
        if rule.action is not None:
            for var in variables(rule.action):
                mapping.setdefault(var, f"{var}~{tag}")
        renamed_goal = substitute(rule.goal, mapping)
        assert isinstance(renamed_goal, Concept)
        return renamed_goal, mapping

    def _prove_or_infer(self, term: Term, used: Optional[set[str]] = None) -> Optional[Binding]:
        """Query, then try inference rules that fire from present facts."""
        hit = self.wm.prove(term, self._ctx)
        if hit is not None:
            return hit
        used = used or set()
        for rule in self._candidate_rules(term):
            if rule.kind != "inference" or rule.name in used:
                continue
            renamed_goal, mapping = self._rename_rule_goal(rule)
            theta = unify(renamed_goal, term)
            if theta is None:
                continue
            ok = theta
            for pre in rule.preconds:
                pre_t = substitute(substitute(pre, mapping), ok)
                sub = self._prove_or_infer(pre_t, used | {rule.name})
                if sub is None:
                    ok = None
                    break
                merged = dict(ok)
                merged.update(sub)
                ok = merged
            if ok is None:
                continue
            self._apply_effects(rule, mapping, ok)
            hit = self.wm.prove(term, self._ctx)
            if hit is not None:
                return hit
        return None

    def _candidate_rules(self, term: Term) -> list[PlanRule]:
        if not isinstance(term, Concept):
            return []
        matches = [r for r in self.rules if r.goal.head == term.head]
        if self.rule_order_rng is not None:
            matches = list(matches)
            self.rule_order_rng.shuffle(matches)
        return matches

    def _achieve(
        self,
        goal: Term,
        frames: list[_Frame],
        goal_kind: Optional[str] = None,
        prove_only: tuple[Term, ...] = (),
        skip_prove: bool = False,
    ) -> Optional[Binding]:
        self._spend()
        if not skip_prove:
            hit = self._prove_or_infer(goal)
            if hit is not None:
                return hit
        for blocked in prove_only:
            if unify(goal, blocked) is not None:
                return None
        if len(frames) > self.depth_bound:
            return None
        if self.hooks.on_goal:
            self.hooks.on_goal(goal)
        self._sc.add("goal", goal)
        repeated = self.detect_loop(goal, [f.goal for f in frames])
        if repeated is not None:
            self._loop_seen = True
            if frames and isinstance(goal, Concept) and isinstance(frames[-1].goal, Concept):
                self._sc.loop = LoopInfo(
                    condition=goal,
                    precondition=frames[-1].goal,  # the goal that needed the repeat
                    top_goal=frames[0].goal,
                    top_rule=frames[0].rule,
                )
            if self.hooks.on_goal_failed:
                self.hooks.on_goal_failed(goal, "loop")
            return None
        memo_key = fmt(goal) if is_ground(goal) else None
        if memo_key is not None and self._memo.get(memo_key) == self._asserts:
            return None

        for rule in self._candidate_rules(goal):
            if rule.kind == "inference":
                continue  # already exhausted by _prove_or_infer
            if rule.goal_kinds is not None:
                if goal_kind is None or goal_kind.lower() not in rule.goal_kinds:
                    continue
            binding = self._try_rule(rule, goal, frames, prove_only)
            if binding is not None:
                return binding

        if memo_key is not None:
            self._memo[memo_key] = self._asserts
        if self.hooks.on_goal_failed:
            self.hooks.on_goal_failed(goal, "exhausted")
        return None

    def _try_rule(
        self,
        rule: PlanRule,
        goal: Term,
        frames: list[_Frame],
        prove_only: tuple[Term, ...],
    ) -> Optional[Binding]:
        renamed_goal, mapping = self._rename_rule_goal(rule)
        theta = unify(renamed_goal, goal)
        if theta is None:
            return None
        frame = _Frame(substitute(goal, theta), rule.name)
        frames = frames + [frame]

        # learned conditionals come first: when the opportunity situation
        # is derivable the missing knowledge goal is scheduled before the
        # rule's own needs, and inside that subtree the situation itself
        # is prove-only so the old loop cannot re-form
        for condition, precondition in rule.conditionals:
            foreseeable = self._prove_or_infer(condition) is not None or any(
                unify(substitute(p, mapping), condition) is not None for p in rule.preconds
            )
            if not foreseeable:
                continue
            sub = self._achieve(
                precondition, frames, None, prove_only + (condition,)
            )
            if sub is None:
                return None

        binding = theta
        for need in rule.preconds + rule.subgoals:
            need_t = substitute(substitute(need, mapping), binding)
            sub = self._satisfy_need(need_t, frames, prove_only)
            if sub is None:
                return None
            merged = dict(binding)
            merged.update(sub)
            binding = merged

        retracted = self._first_conflicting(rule, mapping, binding)
        if retracted is not None:
            if self.hooks.on_conflict is not None:
                self.hooks.on_conflict(rule, retracted)
            # the hook's verdict decides what the engine does with the
            # enclosing pursuit; this planning line is spent either way
            raise _ConflictAbort()

        performed: Optional[Concept] = None
        if rule.action is not None:
            action = substitute(substitute(rule.action, mapping), binding)
            if not is_ground(action) or not isinstance(action, Concept):
                raise PlannerError(f"action not ground in rule {rule.name}: {fmt(action)}")
            performed = action
            self._sc.add("action", action)
            entry = self.wm.add(action, self._ctx)
            self._sc.entry_ids.add(entry.id)
            self._asserts += 1
            if self.hooks.on_action:
                self.hooks.on_action(action)

        self._apply_effects(rule, mapping, binding)

        goal_now = substitute(goal, binding)
        if self.wm.prove(goal_now, self._ctx) is not None:
            return binding
        if rule.kind == "request":
            if self._performance and performed is not None:
                raise _AwaitWorld(performed)
            assumed = self.relax(goal_now, self._level)
            if assumed is not None:
                self._assume(*assumed)
                return binding
            return None
        if not rule.effects:
            return binding  # purely procedural rule
        return None

    def _satisfy_need(
        self,
        need: Term,
        frames: list[_Frame],
        prove_only: tuple[Term, ...],
    ) -> Optional[Binding]:
        hit = self._prove_or_infer(need)
        if hit is not None:
            return hit
        sub = self._achieve(need, frames, None, prove_only)
        if sub is not None:
            return sub
        assumed = self.relax(need, self._level)
        if assumed is not None:
            self._assume(*assumed)
            return {}
        return None

    def _assume(self, klass: str, concept: Concept) -> None:
        self._sc.assumptions.append((klass, concept))
        self._sc.add("assumption", concept, note=klass)
        entry = self.wm.add(concept, self._ctx)
        self._sc.entry_ids.add(entry.id)
        self._asserts += 1
        if self.hooks.on_assumption:
            self.hooks.on_assumption(klass, concept)

    def _conflicts(self, rule: PlanRule, mapping: dict, binding: Binding) -> bool:
        return self._first_conflicting(rule, mapping, binding) is not None

    def _first_conflicting(
        self, rule: PlanRule, mapping: dict, binding: Binding
    ) -> Optional[Concept]:
        for pattern in rule.retracts:
            pattern_t = substitute(substitute(pattern, mapping), binding)
            for _b, entry in self.wm.query(pattern_t, self._ctx):
                if entry.id in self._sc.entry_ids:
                    return entry.concept
        return None

    def _apply_effects(self, rule: PlanRule, mapping: dict, binding: Binding) -> None:
        for pattern in rule.retracts:
            pattern_t = substitute(substitute(pattern, mapping), binding)
            self.wm.retract_matching(pattern_t, self._ctx)
        for effect in rule.effects:
            effect_t = substitute(substitute(effect, mapping), binding)
            if not is_ground(effect_t):
                raise PlannerError(
                    f"effect not ground after binding in rule {rule.name}: {fmt(effect_t)}"
                )
            assert isinstance(effect_t, Concept)
            self._sc.add("effect", effect_t)
            entry = self.wm.add(effect_t, self._ctx)
            self._sc.entry_ids.add(entry.id)
            self._asserts += 1
            if self.hooks.on_effect:
                self.hooks.on_effect(effect_t)
