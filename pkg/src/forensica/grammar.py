"""Two-layer description text.

Layer one is a context-free expansion grammar: ``#symbol#`` references
expand recursively, with optional modifiers (``#beast.capitalize#``,
``#crop.s#``) and ``\\#`` escaping a literal hash. Layer two runs after
expansion: ``@MARKER@`` tokens survive layer one untouched and are
replaced from a per-world binding table, so every description in one
world agrees on the same material, flower, sacred number, and engraving.

Grammar files are JSON: a flat object mapping symbol -> array of
alternative expansion strings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .rng import RandomStream

MAX_DEPTH = 64

_MARKER_RE = re.compile(r"@([A-Z][A-Z0-9_]*)@")


class MissingRuleError(KeyError):
    """A #symbol# reference has no rule in the grammar."""


class RecursionLimitError(RuntimeError):
    """Expansion exceeded MAX_DEPTH; the grammar recurses unboundedly."""


class MissingBindingError(KeyError):
    """A @MARKER@ in the text has no binding in the dynamic context."""


def _apply_modifier(text: str, modifier: str) -> str:
    if modifier == "capitalize":
        return text[:1].upper() + text[1:]
    if modifier == "s":
        if re.search(r"(s|x|z|ch|sh)$", text):
            return text + "es"
        if re.search(r"[^aeiou]y$", text):
            return text[:-1] + "ies"
        return text + "s"
    raise MissingRuleError(f"unknown modifier: .{modifier}")


@dataclass
class Grammar:
    rules: dict[str, list[str]]

    @classmethod
    def load(cls, path: str) -> "Grammar":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    @classmethod
    def from_package_content(cls, filename: str) -> "Grammar":
        blob = resources.files("forensica.content").joinpath(filename).read_text()
        return cls(json.loads(blob))

    def merged_with(self, other: "Grammar") -> "Grammar":
        rules = dict(self.rules)
        rules.update(other.rules)
        return Grammar(rules)

    def expand(self, start_symbol: str, stream: RandomStream) -> str:
        """Expand to text; dynamic @MARKER@ tokens are left in place."""
        if start_symbol not in self.rules:
            raise MissingRuleError(f"no rule for symbol: {start_symbol}")
        return self._expand_symbol(start_symbol, None, stream, 0)

    def _expand_symbol(
        self, symbol: str, modifier: str | None, stream: RandomStream, depth: int
    ) -> str:
        if depth > MAX_DEPTH:
            raise RecursionLimitError(f"expansion depth > {MAX_DEPTH} at #{symbol}#")
        alternatives = self.rules.get(symbol)
        if alternatives is None:
            raise MissingRuleError(f"no rule for symbol: {symbol}")
        template = stream.choice(alternatives)
        text = self._expand_template(template, stream, depth)
        return _apply_modifier(text, modifier) if modifier else text

    def _expand_template(self, template: str, stream: RandomStream, depth: int) -> str:
        out: list[str] = []
        i = 0
        while i < len(template):
            ch = template[i]
            if ch == "\\" and i + 1 < len(template) and template[i + 1] == "#":
                out.append("#")
                i += 2
                continue
            if ch == "#":
                end = template.find("#", i + 1)
                if end == -1:
                    raise MissingRuleError(f"unterminated #symbol# in: {template!r}")
                ref = template[i + 1 : end]
                symbol, dot, modifier = ref.partition(".")
                out.append(
                    self._expand_symbol(
                        symbol, modifier if dot else None, stream, depth + 1
                    )
                )
                i = end + 1
                continue
            out.append(ch)
            i += 1
        return "".join(out)


@dataclass
class DynamicContext:
    """Per-world-instance marker bindings; one context per world."""

    bindings: dict[str, str] = field(default_factory=dict)

    def substitute(self, text: str) -> str:
        def repl(match: re.Match) -> str:
            name = match.group(1)
            if name not in self.bindings:
                raise MissingBindingError(f"no binding for @{name}@")
            return self.bindings[name]

        return _MARKER_RE.sub(repl, text)


def substitute(text: str, context: DynamicContext) -> str:
    return context.substitute(text)


# The worship-hall engraving is the one text that unambiguously encodes
# the village's ending. Keys are Ending enum values.
DREAM_ENGRAVINGS = {
    "EcosystemCollapse": (
        "a lush forest scene, trees heavy with leaves above a river "
        "running full and clear"
    ),
    "OverrunByPredators": (
        "a ring of villagers with spears raised against a tide of "
        "lean, long-toothed beasts"
    ),
    "Famine": (
        "a harvest table piled impossibly high, every bowl "
        "overflowing with grain"
    ),
}


def village_context(history) -> DynamicContext:
    """Bindings for one village world, derived from its history."""
    culture = history.final_society.culture
    return DynamicContext(
        {
            "MATERIAL": culture.craft_material,
            "FLOWER": culture.cultivated_flower,
            "SACREDNUMBER": str(culture.sacred_number),
            "DREAMENGRAVING": DREAM_ENGRAVINGS[history.ending.kind.value],
        }
    )
