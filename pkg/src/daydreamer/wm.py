"""Working memory: ground concepts in layered contexts with activation decay.

One REAL root context holds what actually happened.  Imagined contexts
chain to REAL (or to another imagined context) and see parent facts by
fall-through; retracting an inherited fact inside an imagined context
shadows it there without touching the parent.  Every entry carries an
activation that decays each engine cycle and is removed once it falls
below the removal limit, so old episodes literally fade from view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .concepts import Binding, Concept, Term, fmt, is_ground, unify

DEFAULT_START_ACTIVATION = 1.0
DEFAULT_DECAY_STEP = 0.1
DEFAULT_REMOVAL_LIMIT = 0.2

REAL = "real"


@dataclass(frozen=True)
class ContextRef:
    id: str
    kind: str  # REAL | IMAGINED
    parent: Optional[str]


@dataclass
class WMEntry:
    id: int
    concept: Concept
    context: str
    activation: float
    pinned: bool = False

    @property
    def key(self) -> str:
        return fmt(self.concept)


# listener signature: (event, entry) with event in
# add / readd / remove / fade / replenish / tombstone
Listener = Callable[[str, WMEntry], None]


class WorkingMemory:
    def __init__(
        self,
        decay_step: float = DEFAULT_DECAY_STEP,
        removal_limit: float = DEFAULT_REMOVAL_LIMIT,
        listener: Optional[Listener] = None,
    ) -> None:
        self.decay_step = decay_step
        self.removal_limit = removal_limit
        self.listener = listener
        self._next_entry = 1
        self._next_ctx = 1
        self.contexts: dict[str, ContextRef] = {REAL: ContextRef(REAL, "REAL", None)}
        self.entries: dict[int, WMEntry] = {}
        # per context: concept key -> entry id, insertion order preserved by dict
        self._index: dict[str, dict[str, int]] = {REAL: {}}
        self._tombstones: dict[str, set[str]] = {REAL: set()}

    # -- contexts ----------------------------------------------------------

    @property
    def real(self) -> ContextRef:
        return self.contexts[REAL]

    def new_imagined(self, parent: Optional[str] = None) -> ContextRef:
        parent_id = parent or REAL
        if parent_id not in self.contexts:
            raise KeyError(f"unknown parent context {parent_id}")
        ref = ContextRef(f"i{self._next_ctx}", "IMAGINED", parent_id)
        self._next_ctx += 1
        self.contexts[ref.id] = ref
        self._index[ref.id] = {}
        self._tombstones[ref.id] = set()
        return ref

    def drop(self, ctx: str) -> None:
        """Discard an imagined context and everything asserted in it."""
        if ctx == REAL:
            raise ValueError("cannot drop the real context")
        for entry_id in list(self._index.get(ctx, {}).values()):
            self.entries.pop(entry_id, None)
        self._index.pop(ctx, None)
        self._tombstones.pop(ctx, None)
        self.contexts.pop(ctx, None)

    def _chain(self, ctx: str) -> list[str]:
        """Context ids from ctx up to the real root, inclusive."""
        out = []
        cur: Optional[str] = ctx
        while cur is not None:
            ref = self.contexts.get(cur)
            if ref is None:
                raise KeyError(f"unknown context {cur}")
            out.append(cur)
            cur = ref.parent
        return out

    # -- assertion and retraction -----------------------------------------

    def add(self, concept: Term, ctx: str = REAL, pinned: bool = False) -> WMEntry:
        if not isinstance(concept, Concept):
            raise TypeError(f"only compound concepts enter WM, got {concept!r}")
        if not is_ground(concept):
            raise ValueError(f"cannot assert non-ground concept {fmt(concept)}")
        if ctx not in self.contexts:
            raise KeyError(f"unknown context {ctx}")
        key = fmt(concept)
        # an assert overrides any local shadow of the same concept
        self._tombstones[ctx].discard(key)
        existing_id = self._index[ctx].get(key)
        if existing_id is not None:
            entry = self.entries[existing_id]
            entry.activation = DEFAULT_START_ACTIVATION
            self._emit("readd", entry)
            return entry
        entry = WMEntry(self._next_entry, concept, ctx, DEFAULT_START_ACTIVATION, pinned)
        self._next_entry += 1
        self.entries[entry.id] = entry
        self._index[ctx][key] = entry.id
        self._emit("add", entry)
        return entry

    def retract(self, concept: Term, ctx: str = REAL) -> bool:
        """Remove a concept as seen from *ctx*.

        A concept held locally is deleted outright.  A concept inherited
        from a parent context is shadowed with a tombstone instead, so the
        parent keeps its own view.
        """
        key = fmt(concept)
        local_id = self._index[ctx].get(key)
        if local_id is not None:
            entry = self.entries.pop(local_id)
            del self._index[ctx][key]
            self._emit("remove", entry)
            return True
        for up in self._chain(ctx)[1:]:
            if key in self._index[up] and key not in self._tombstones[ctx]:
                self._tombstones[ctx].add(key)
                ghost = self.entries[self._index[up][key]]
                self._emit("tombstone", ghost)
                return True
        return False

    def retract_matching(self, pattern: Term, ctx: str = REAL) -> int:
        hits = [entry.concept for _, entry in self.query(pattern, ctx)]
        for concept in hits:
            self.retract(concept, ctx)
        return len(hits)

    # -- lookup ------------------------------------------------------------

    def visible_entries(self, ctx: str = REAL) -> list[WMEntry]:
        """All entries visible from *ctx*, nearest context winning per key."""
        chain = self._chain(ctx)
        chosen: dict[str, WMEntry] = {}
        shadowed: set[str] = set()
        for cid in chain:  # nearest first
            for key, entry_id in self._index[cid].items():
                if key in shadowed or key in chosen:
                    continue
                chosen[key] = self.entries[entry_id]
            shadowed |= self._tombstones[cid]
        return sorted(chosen.values(), key=lambda e: e.id)

    def query(self, pattern: Term, ctx: str = REAL) -> list[tuple[Binding, WMEntry]]:
        """Insertion-ordered matches of *pattern* against everything visible."""
        out = []
        for entry in self.visible_entries(ctx):
            binding = unify(pattern, entry.concept)
            if binding is not None:
                out.append((binding, entry))
        return out

    def prove(self, pattern: Term, ctx: str = REAL) -> Optional[Binding]:
        hits = self.query(pattern, ctx)
        return hits[0][0] if hits else None

    def holds(self, concept: Term, ctx: str = REAL) -> bool:
        return self.prove(concept, ctx) is not None

    # -- activation --------------------------------------------------------

    def decay(self, contexts: Optional[Iterable[str]] = None) -> list[WMEntry]:
        """One decay tick.  Returns removed entries in creation order."""
        targets = set(contexts) if contexts is not None else set(self.contexts)
        removed = []
        for entry in sorted(self.entries.values(), key=lambda e: e.id):
            if entry.context not in targets or entry.pinned:
                continue
            entry.activation = round(entry.activation - self.decay_step, 6)
            if entry.activation < self.removal_limit:
                removed.append(entry)
        for entry in removed:
            self._emit("fade", entry)
            del self._index[entry.context][entry.key]
            del self.entries[entry.id]
            self._emit("remove", entry)
        return removed

    def replenish(self, entry: WMEntry) -> None:
        if entry.id not in self.entries:
            raise KeyError(f"entry {entry.id} is no longer in memory")
        entry.activation = DEFAULT_START_ACTIVATION
        self._emit("replenish", entry)

    def find(self, concept: Term, ctx: str = REAL) -> Optional[WMEntry]:
        """Nearest visible entry holding exactly *concept*."""
        key = fmt(concept)
        shadowed: set[str] = set()
        for cid in self._chain(ctx):
            if key in self._index[cid] and key not in shadowed:
                return self.entries[self._index[cid][key]]
            shadowed |= self._tombstones[cid]
        return None

    def _emit(self, event: str, entry: WMEntry) -> None:
        if self.listener is not None:
            self.listener(event, entry)
