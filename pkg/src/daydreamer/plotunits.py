"""Plot units: small graphs of outcomes and mental states across one or
two participant lanes.

Recognition maps unit nodes onto an episode's affect states; the same
definitions run in the other direction as skeletons that seed scenario
generation, so a daydream built from a unit is recognizable as that unit
afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .concepts import Concept, Term, substitute

POSITIVE_OUTCOME = "POSITIVE-OUTCOME"
NEGATIVE_OUTCOME = "NEGATIVE-OUTCOME"
MENTAL_STATE = "MENTAL-STATE"

INITIATION = "INITIATION"
TERMINATION = "TERMINATION"
COREFERENCE = "COREFERENCE"


@dataclass(frozen=True)
class PUNode:
    id: str
    lane: str  # role name
    kind: str  # POSITIVE-OUTCOME | NEGATIVE-OUTCOME | MENTAL-STATE
    tag: str
    caused_by: Optional[str] = None  # role that must have caused this state


@dataclass(frozen=True)
class PULink:
    src: str
    dst: str
    kind: str  # INITIATION | TERMINATION | COREFERENCE


@dataclass(frozen=True)
class PlotUnitDef:
    name: str
    roles: tuple[str, ...]
    nodes: tuple[PUNode, ...]
    links: tuple[PULink, ...]
    # generation recipe: (step kind, optional concept template over role vars)
    skeleton_steps: tuple[tuple[str, Optional[Term]], ...] = ()

    def __post_init__(self) -> None:
        ids = {n.id for n in self.nodes}
        if len(ids) != len(self.nodes):
            raise ValueError(f"{self.name}: duplicate node ids")
        for node in self.nodes:
            if node.lane not in self.roles:
                raise ValueError(f"{self.name}: node {node.id} lane {node.lane} unknown")
            if node.caused_by is not None and node.caused_by not in self.roles:
                raise ValueError(f"{self.name}: node {node.id} causer role unknown")
        for link in self.links:
            if link.src not in ids or link.dst not in ids:
                raise ValueError(f"{self.name}: link {link.src}->{link.dst} dangling")

    def node(self, node_id: str) -> PUNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)


@dataclass(frozen=True)
class AffectState:
    """One recognizable moment of an episode, normalized for matching."""

    index: int
    agent: str
    kind: str
    head: str  # head symbol of the underlying objective, for coreference
    causer: Optional[str] = None


@dataclass(frozen=True)
class PUInstance:
    unit: str
    bindings: tuple[tuple[str, str], ...]  # (role, agent) in role order
    node_map: tuple[tuple[str, int], ...]  # (node id, state index) in node order

    def binding(self, role: str) -> str:
        for r, agent in self.bindings:
            if r == role:
                return agent
        raise KeyError(role)


def _link_ok(link: PULink, states: dict[str, AffectState]) -> bool:
    a, b = states[link.src], states[link.dst]
    if link.kind == INITIATION:
        return a.index < b.index
    if link.kind == TERMINATION:
        return b.index < a.index
    if link.kind == COREFERENCE:
        return a.head == b.head
    raise ValueError(f"unknown link kind {link.kind}")


def recognize(
    states: Sequence[AffectState],
    catalog: Sequence[PlotUnitDef],
) -> list[PUInstance]:
    """All unit instances present in *states*, catalog order first.

    Role bindings are injective: two roles never share an agent.  Link
    kinds constrain relative order (initiation forward, termination
    backward) or require a shared objective head (coreference).
    """
    found: list[PUInstance] = []
    for unit in catalog:
        found.extend(_match_unit(unit, states))
    return found


def _bind_role(roles: dict[str, str], role: str, agent: str) -> Optional[dict[str, str]]:
    """Extend an injective role binding, or None if it would clash."""
    bound = roles.get(role)
    if bound is not None:
        return roles if bound == agent else None
    if agent in roles.values():
        return None
    out = dict(roles)
    out[role] = agent
    return out


def _match_unit(unit: PlotUnitDef, states: Sequence[AffectState]) -> list[PUInstance]:
    out: list[PUInstance] = []

    def extend(
        i: int,
        roles: dict[str, str],
        picked: dict[str, AffectState],
        used: set[int],
    ) -> None:
        if i == len(unit.nodes):
            bindings = tuple((r, roles[r]) for r in unit.roles)
            node_map = tuple((n.id, picked[n.id].index) for n in unit.nodes)
            out.append(PUInstance(unit.name, bindings, node_map))
            return
        node = unit.nodes[i]
        for state in states:
            if state.index in used or state.kind != node.kind:
                continue
            roles2 = _bind_role(roles, node.lane, state.agent)
            if roles2 is None:
                continue
            if node.caused_by is not None:
                if state.causer is None:
                    continue
                roles2 = _bind_role(roles2, node.caused_by, state.causer)
                if roles2 is None:
                    continue
            if not _partial_links_ok(unit, i, picked, state):
                continue
            picked[node.id] = state
            extend(i + 1, roles2, picked, used | {state.index})
            del picked[node.id]

    extend(0, {}, {}, set())
    # drop duplicates while preserving first-found order
    seen = set()
    unique = []
    for inst in out:
        key = (inst.unit, inst.node_map)
        if key not in seen:
            seen.add(key)
            unique.append(inst)
    return unique


def _partial_links_ok(
    unit: PlotUnitDef,
    upto: int,
    picked: dict[str, AffectState],
    candidate: AffectState,
) -> bool:
    node = unit.nodes[upto]
    trial = dict(picked)
    trial[node.id] = candidate
    for link in unit.links:
        if link.src in trial and link.dst in trial:
            if not _link_ok(link, trial):
                return False
    return True


def skeleton(
    unit: PlotUnitDef,
    bindings: dict[str, str],
    relation: Optional[Term] = None,
) -> list[tuple[str, Optional[Term]]]:
    """Instantiate the unit's generation recipe with role bindings.

    Role ``a`` fills variable ``?a`` and so on; ``?rel`` takes the
    relation concept the scenario is about, when one applies.
    """
    missing = [r for r in unit.roles if r not in bindings]
    if missing:
        raise KeyError(f"{unit.name}: unbound roles {missing}")
    mapping: dict[str, Term] = {f"?{role}": agent for role, agent in bindings.items()}
    if relation is not None:
        mapping["?rel"] = relation
    steps: list[tuple[str, Optional[Term]]] = []
    for kind, template in unit.skeleton_steps:
        if template is None:
            steps.append((kind, None))
        else:
            steps.append((kind, substitute(template, mapping)))
    return steps


def _c(text: str) -> Term:
    from .concepts import parse

    return parse(text)


RETALIATION = PlotUnitDef(
    name="retaliation",
    roles=("a", "b"),
    nodes=(
        PUNode("grievance", "a", NEGATIVE_OUTCOME, "grievance", caused_by="b"),
        PUNode("desire", "b", MENTAL_STATE, "desire"),
        PUNode("comeuppance", "b", NEGATIVE_OUTCOME, "comeuppance", caused_by="a"),
        PUNode("triumph", "a", POSITIVE_OUTCOME, "triumph"),
    ),
    links=(
        PULink("desire", "comeuppance", INITIATION),
        PULink("comeuppance", "grievance", TERMINATION),
        PULink("comeuppance", "triumph", INITIATION),
    ),
    skeleton_steps=(
        ("goal", _c("(likes ?b ?a)")),
        ("belief", _c("(want ?b ?rel)")),
        ("retaliate", _c("(tell ?a ?b (not (want ?a ?rel)))")),
    ),
)

MIXED_BLESSING = PlotUnitDef(
    name="mixed-blessing",
    roles=("a",),
    nodes=(
        PUNode("boon", "a", POSITIVE_OUTCOME, "boon"),
        PUNode("price", "a", NEGATIVE_OUTCOME, "price"),
    ),
    links=(PULink("boon", "price", INITIATION),),
    skeleton_steps=(("imagine-success", None), ("play-forward", None)),
)

SUCCESS_BORN_OF_ADVERSITY = PlotUnitDef(
    name="success-born-of-adversity",
    roles=("a",),
    nodes=(
        PUNode("setback", "a", NEGATIVE_OUTCOME, "setback"),
        PUNode("harvest", "a", POSITIVE_OUTCOME, "harvest"),
    ),
    links=(PULink("setback", "harvest", INITIATION),),
    skeleton_steps=(("play-forward", None),),
)

DENIED_REQUEST = PlotUnitDef(
    name="denied-request",
    roles=("a", "b"),
    nodes=(
        PUNode("request", "a", MENTAL_STATE, "request"),
        PUNode("refusal", "b", MENTAL_STATE, "refusal"),
        PUNode("denial", "a", NEGATIVE_OUTCOME, "denial", caused_by="b"),
    ),
    links=(
        PULink("request", "refusal", INITIATION),
        PULink("refusal", "denial", INITIATION),
        PULink("request", "denial", COREFERENCE),
    ),
)

BUILTIN_UNITS: tuple[PlotUnitDef, ...] = (
    RETALIATION,
    MIXED_BLESSING,
    SUCCESS_BORN_OF_ADVERSITY,
    DENIED_REQUEST,
)


def catalog_by_name(catalog: Iterable[PlotUnitDef]) -> dict[str, PlotUnitDef]:
    return {u.name: u for u in catalog}
