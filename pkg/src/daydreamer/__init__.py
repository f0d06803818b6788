"""A symbolic daydreaming simulator.

An agent alternates between a performance mode that acts in the
world and a daydreaming mode in which emotions spawn control goals,
control goals pick strategies, and strategies play out consequences
in imagined contexts.  What it learns there feeds back into later
behavior.
"""

from .concepts import Concept, ConceptError, Text, fmt, parse, parse_many, substitute, unify
from .control import ControlGoalSystem, StrategyDef
from .domain import (
    Domain,
    DomainError,
    Persona,
    load_domain,
    load_persona,
    loads_domain,
    loads_persona,
    parse_script,
)
from .emotions import EmotionRecord, EmotionSystem
from .engine import Engine, SessionEvent, render_event, run_script
from .episodes import EpisodeRecord, EpisodicMemory
from .goals import GoalRecord, GoalSystem, GoalTree
from .planning import Planner, PlanRule, Scenario
from .plotunits import AffectState, BUILTIN_UNITS, recognize
from .textgen import Realizer
from .wm import REAL, WorkingMemory

__version__ = "0.1.0"

__all__ = [
    "AffectState",
    "BUILTIN_UNITS",
    "Concept",
    "ConceptError",
    "ControlGoalSystem",
    "Domain",
    "DomainError",
    "EmotionRecord",
    "EmotionSystem",
    "Engine",
    "EpisodeRecord",
    "EpisodicMemory",
    "GoalRecord",
    "GoalSystem",
    "GoalTree",
    "Persona",
    "Planner",
    "PlanRule",
    "REAL",
    "Realizer",
    "Scenario",
    "SessionEvent",
    "StrategyDef",
    "Text",
    "WorkingMemory",
    "fmt",
    "load_domain",
    "load_persona",
    "loads_domain",
    "loads_persona",
    "parse",
    "parse_many",
    "parse_script",
    "recognize",
    "render_event",
    "run_script",
    "substitute",
    "unify",
]
