"""Layered working memory: contexts, shadowing, decay, events."""

import pytest
from hypothesis import given, strategies as st

from daydreamer.concepts import Text, parse
from daydreamer.wm import REAL, WorkingMemory


def _wm(**kwargs):
    return WorkingMemory(**kwargs)


# ---------------------------------------------------------------------------
# Assertion basics

def test_add_and_holds():
    wm = _wm()
    wm.add(parse("(near debra me)"))
    assert wm.holds(parse("(near debra me)"))
    assert not wm.holds(parse("(near jodie me)"))


def test_add_rejects_non_compound_and_non_ground():
    wm = _wm()
    with pytest.raises(TypeError):
        wm.add("debra")
    with pytest.raises(ValueError):
        wm.add(parse("(near ?who me)"))
    with pytest.raises(KeyError):
        wm.add(parse("(near debra me)"), ctx="i99")


def test_readd_resets_activation_not_identity():
    wm = _wm()
    first = wm.add(parse("(at me los-angeles)"))
    wm.decay()
    assert first.activation < 1.0
    second = wm.add(parse("(at me los-angeles)"))
    assert second is first
    assert first.activation == 1.0
    assert len(wm.entries) == 1


def test_retract_local_and_missing():
    wm = _wm()
    wm.add(parse("(at me paris)"))
    assert wm.retract(parse("(at me paris)"))
    assert not wm.holds(parse("(at me paris)"))
    assert not wm.retract(parse("(at me paris)"))


def test_retract_matching_counts():
    wm = _wm()
    wm.add(parse("(likes debra me)"))
    wm.add(parse("(likes jodie me)"))
    wm.add(parse("(near debra me)"))
    assert wm.retract_matching(parse("(likes ?who me)")) == 2
    assert wm.holds(parse("(near debra me)"))


# ---------------------------------------------------------------------------
# Imagined contexts and shadowing

def test_imagined_context_sees_parent_facts():
    wm = _wm()
    wm.add(parse("(at me los-angeles)"))
    ctx = wm.new_imagined()
    assert wm.holds(parse("(at me los-angeles)"), ctx.id)
    wm.add(parse("(at me paris)"), ctx.id)
    assert wm.holds(parse("(at me paris)"), ctx.id)
    # the imagined addition never leaks to real
    assert not wm.holds(parse("(at me paris)"))


def test_retract_inherited_shadows_without_touching_parent():
    wm = _wm()
    wm.add(parse("(at me los-angeles)"))
    ctx = wm.new_imagined()
    assert wm.retract(parse("(at me los-angeles)"), ctx.id)
    assert not wm.holds(parse("(at me los-angeles)"), ctx.id)
    assert wm.holds(parse("(at me los-angeles)"))


def test_local_add_overrides_own_shadow():
    wm = _wm()
    wm.add(parse("(at me los-angeles)"))
    ctx = wm.new_imagined()
    wm.retract(parse("(at me los-angeles)"), ctx.id)
    wm.add(parse("(at me los-angeles)"), ctx.id)
    assert wm.holds(parse("(at me los-angeles)"), ctx.id)


def test_grandchild_inherits_shadow():
    wm = _wm()
    wm.add(parse("(work-at me los-angeles)"))
    mid = wm.new_imagined()
    wm.retract(parse("(work-at me los-angeles)"), mid.id)
    deep = wm.new_imagined(mid.id)
    assert not wm.holds(parse("(work-at me los-angeles)"), deep.id)
    # sibling branch is unaffected
    other = wm.new_imagined()
    assert wm.holds(parse("(work-at me los-angeles)"), other.id)


def test_nearest_context_wins_per_key():
    wm = _wm()
    wm.add(parse("(mood me calm)"))
    ctx = wm.new_imagined()
    wm.retract(parse("(mood me calm)"), ctx.id)
    wm.add(parse("(mood me tense)"), ctx.id)
    visible = {e.key for e in wm.visible_entries(ctx.id)}
    assert visible == {"(mood me tense)"}


def test_drop_discards_context_entries():
    wm = _wm()
    ctx = wm.new_imagined()
    wm.add(parse("(at me paris)"), ctx.id)
    doomed = {eid for eid, e in wm.entries.items() if e.context == ctx.id}
    assert doomed
    wm.drop(ctx.id)
    assert ctx.id not in wm.contexts
    assert not (doomed & set(wm.entries))
    with pytest.raises(ValueError):
        wm.drop(REAL)
    with pytest.raises(KeyError):
        wm.new_imagined("i404")


# ---------------------------------------------------------------------------
# Query

def test_query_returns_bindings_in_insertion_order():
    wm = _wm()
    wm.add(parse("(likes debra me)"))
    wm.add(parse("(likes jodie me)"))
    hits = wm.query(parse("(likes ?who me)"))
    assert [b["?who"] for b, _ in hits] == ["debra", "jodie"]
    assert wm.prove(parse("(likes ?who me)")) == {"?who": "debra"}
    assert wm.prove(parse("(likes harvey me)")) is None


def test_query_distinguishes_atom_types():
    wm = _wm()
    wm.add(parse('(note me "Hello")'))
    assert wm.holds(parse('(note me "Hello")'))
    assert not wm.holds(parse("(note me hello)"))
    assert wm.prove(parse("(note me ?what)"))["?what"] == Text("Hello")


# ---------------------------------------------------------------------------
# Decay

def test_decay_step_and_removal():
    wm = _wm(decay_step=0.3, removal_limit=0.2)
    entry = wm.add(parse("(near debra me)"))
    assert wm.decay() == []
    assert entry.activation == 0.7
    wm.decay()
    assert entry.activation == 0.4
    removed = wm.decay()
    assert removed == [entry]
    assert not wm.holds(parse("(near debra me)"))


def test_decay_skips_pinned_and_filters_contexts():
    wm = _wm(decay_step=1.0)
    pinned = wm.add(parse("(self me)"), pinned=True)
    ctx = wm.new_imagined()
    kept = wm.add(parse("(at me paris)"), ctx.id)
    doomed = wm.add(parse("(near debra me)"))
    removed = wm.decay(contexts=[REAL])
    assert removed == [doomed]
    assert pinned.activation == 1.0
    assert kept.activation == 1.0


def test_decay_removes_in_creation_order():
    wm = _wm(decay_step=1.0)
    first = wm.add(parse("(a x)"))
    second = wm.add(parse("(b x)"))
    assert wm.decay() == [first, second]


def test_replenish():
    wm = _wm(decay_step=0.5)
    entry = wm.add(parse("(near debra me)"))
    wm.decay()
    wm.replenish(entry)
    assert entry.activation == 1.0
    wm.decay()
    wm.decay()
    with pytest.raises(KeyError):
        wm.replenish(entry)


def test_find_respects_shadows():
    wm = _wm()
    real_entry = wm.add(parse("(at me los-angeles)"))
    ctx = wm.new_imagined()
    assert wm.find(parse("(at me los-angeles)"), ctx.id) is real_entry
    wm.retract(parse("(at me los-angeles)"), ctx.id)
    assert wm.find(parse("(at me los-angeles)"), ctx.id) is None
    assert wm.find(parse("(at me los-angeles)")) is real_entry


# ---------------------------------------------------------------------------
# Listener events

def test_listener_sees_lifecycle():
    events = []
    wm = WorkingMemory(decay_step=1.0, listener=lambda ev, e: events.append((ev, e.key)))
    wm.add(parse("(near debra me)"))
    wm.add(parse("(near debra me)"))
    ctx = wm.new_imagined()
    wm.retract(parse("(near debra me)"), ctx.id)
    wm.decay(contexts=[REAL])
    kinds = [ev for ev, _ in events]
    assert kinds == ["add", "readd", "tombstone", "fade", "remove"]
    assert all(key == "(near debra me)" for _, key in events)


# ---------------------------------------------------------------------------
# Model comparison: a WM restricted to add/retract on the real context
# behaves exactly like a set of concept keys

_POOL = [parse(s) for s in (
    "(near debra me)",
    "(at me paris)",
    "(likes debra me)",
    "(know me (phone-number debra))",
)]

_ops = st.lists(
    st.tuples(st.sampled_from(["add", "retract"]), st.integers(0, len(_POOL) - 1)),
    max_size=30,
)


@given(_ops)
def test_real_context_matches_set_model(ops):
    wm = _wm()
    model = set()
    for op, idx in ops:
        concept = _POOL[idx]
        if op == "add":
            wm.add(concept)
            model.add(idx)
        else:
            assert wm.retract(concept) == (idx in model)
            model.discard(idx)
    visible = {e.key for e in wm.visible_entries()}
    from daydreamer.concepts import fmt
    assert visible == {fmt(_POOL[i]) for i in model}
