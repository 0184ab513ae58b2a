"""Expansion grammar and dynamic-marker substitution."""

import pytest

from forensica.config import GenConfig
from forensica.grammar import (
    DREAM_ENGRAVINGS,
    DynamicContext,
    Grammar,
    MissingBindingError,
    MissingRuleError,
    RecursionLimitError,
    substitute,
    village_context,
)
from forensica.rng import derive_stream
from forensica.village.sim import Ending, run_village


def stream():
    return derive_stream(0, "test.grammar")


def test_single_terminal():
    g = Grammar({"A": ["x"]})
    assert g.expand("A", stream()) == "x"


def test_forced_expansion():
    g = Grammar({"A": ["#B# #B#"], "B": ["y"]})
    assert g.expand("A", stream()) == "y y"


def test_markers_survive_expansion():
    g = Grammar({"A": ["made of @MATERIAL@"]})
    assert "@MATERIAL@" in g.expand("A", stream())


def test_modifiers():
    g = Grammar({"A": ["#w.capitalize#"], "w": ["wolf"], "B": ["#c.s#"], "c": ["bench"]})
    assert g.expand("A", stream()) == "Wolf"
    assert g.expand("B", stream()) == "benches"


def test_escaped_hash():
    g = Grammar({"A": ["lab \\#1"]})
    assert g.expand("A", stream()) == "lab #1"


def test_missing_rule():
    g = Grammar({"A": ["#nope#"]})
    with pytest.raises(MissingRuleError):
        g.expand("A", stream())
    with pytest.raises(MissingRuleError):
        g.expand("missing_start", stream())


def test_recursion_limit():
    g = Grammar({"A": ["#A#"]})
    with pytest.raises(RecursionLimitError):
        g.expand("A", stream())


def test_substitute_direct():
    ctx = DynamicContext({"MATERIAL": "bone"})
    assert substitute("made of @MATERIAL@", ctx) == "made of bone"


def test_substitute_unbound_marker():
    with pytest.raises(MissingBindingError):
        substitute("@NOPE@", DynamicContext({}))


def test_substitute_idempotent():
    ctx = DynamicContext({"MATERIAL": "clay", "FLOWER": "iris"})
    once = substitute("a @MATERIAL@ pot of @FLOWER@", ctx)
    assert substitute(once, ctx) == once


def test_one_binding_per_world():
    # Two different templates in the same world render the same material.
    ctx = DynamicContext({"MATERIAL": "copper"})
    a = substitute("hinges of @MATERIAL@", ctx)
    b = substitute("a @MATERIAL@ ladle", ctx)
    assert "copper" in a and "copper" in b


def test_engraving_bijection():
    texts = {DREAM_ENGRAVINGS[e.value] for e in Ending}
    assert len(texts) == 3
    assert "lush forest" in DREAM_ENGRAVINGS["EcosystemCollapse"]


def test_village_context_tracks_ending():
    for seed in range(40):
        history = run_village(seed, GenConfig())
        ctx = village_context(history)
        assert (
            ctx.bindings["DREAMENGRAVING"]
            == DREAM_ENGRAVINGS[history.ending.kind.value]
        )
        assert ctx.bindings["SACREDNUMBER"].isdigit()


def test_packaged_village_grammar_is_closed():
    g = Grammar.from_package_content("village_grammar.json")
    s = derive_stream(1, "test.grammar.content")
    ctx = DynamicContext(
        {
            "MATERIAL": "stone",
            "FLOWER": "poppy",
            "SACREDNUMBER": "7",
            "DREAMENGRAVING": DREAM_ENGRAVINGS["Famine"],
        }
    )
    for symbol in g.rules:
        for _ in range(5):
            text = ctx.substitute(g.expand(symbol, s))
            assert "#" not in text and "@" not in text
            assert text
