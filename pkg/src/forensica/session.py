"""The playable investigation layer.

A session wraps a finished world: the player walks the grid, bumps into
things to inspect them, shines a room-bounded torch (station worlds),
reads terminals, and — for station worlds — submits a final fate report
that is scored against the sealed ground truth. Nothing in the
client-facing view exposes that ground truth before submission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .evidence import RadioMessage
from .grammar import Grammar
from .rng import derive_stream
from .world import (
    DOOR,
    FLOOR,
    ROAD,
    RUBBLE,
    SAND,
    SNOW,
    WALL,
    WATER,
    PlacedObject,
    chebyshev,
)
from .worldgen import StationArtifact, VillageArtifact


class IllegalStateError(RuntimeError):
    """Command not allowed in the session's current phase."""


class OutOfReachError(RuntimeError):
    """Target tile is too far away to interact with."""


class Phase(Enum):
    EXPLORING = "Exploring"
    SUBMITTED = "Submitted"


MOVE_DIRS = {"n": (0, -1), "s": (0, 1), "e": (1, 0), "w": (-1, 0)}
FACE_DIRS = {
    "n": (0, -1),
    "ne": (1, -1),
    "e": (1, 0),
    "se": (1, 1),
    "s": (0, 1),
    "sw": (-1, 1),
    "w": (-1, 0),
    "nw": (-1, -1),
}

_VILLAGE_TERRAIN_KEYS = {
    SAND: "sand",
    FLOOR: "house_floor",
    ROAD: "road",
    WATER: "lake_water",
    WALL: "house_wall",
    RUBBLE: "rubble",
    DOOR: "door",
}
_STATION_TERRAIN_KEYS = {
    FLOOR: "station_floor",
    WALL: "station_wall",
    DOOR: "station_door",
    SNOW: "snow",
    RUBBLE: "rubble",
}


@dataclass
class MoveResult:
    moved: bool
    text: str | None = None


@dataclass
class ReportEntry:
    claimed_name: str
    claimed_cause: str


@dataclass
class FateReport:
    entries: dict[str, ReportEntry] = field(default_factory=dict)


class GameSession:
    def __init__(self, artifact: VillageArtifact | StationArtifact) -> None:
        self.artifact = artifact
        self.world = artifact.world
        self.is_station = isinstance(artifact, StationArtifact)
        self.player_pos: tuple[int, int] = self.world.spawn
        self.facing: tuple[int, int] = (0, 1) if self.is_station else (0, -1)
        self.phase = Phase.EXPLORING
        self.discovered: set[tuple[int, int]] = set()
        self.read_terminals: set[tuple[int, int]] = set()
        self.inspected: set[tuple[int, int]] = set()
        self.score: int | None = None
        if self.is_station:
            self._grammar = Grammar.from_package_content("station_grammar.json")
            self._terrain_keys = _STATION_TERRAIN_KEYS
            self._terminals = {t.position: t for t in artifact.terminals}
        else:
            self._grammar = Grammar.from_package_content("village_grammar.json")
            self._terrain_keys = _VILLAGE_TERRAIN_KEYS
            self._terminals = {}
        self._context = artifact.context
        self._desc_cache: dict[tuple, str] = {}
        self._see()

    # -- visibility ---------------------------------------------------------

    def visible_tiles(self) -> set[tuple[int, int]]:
        cfg = self.artifact.config.session
        px, py = self.player_pos
        if not self.is_station:
            r = cfg.village_sight_radius
            return {
                (x, y)
                for y in range(py - r, py + r + 1)
                for x in range(px - r, px + r + 1)
                if self.world.in_bounds(x, y)
                and math.dist((x, y), (px, py)) <= r + 1e-9
            }
        # Station: the current room/corridor, lit by a 90-degree torch cone.
        bound = self.artifact.station.sight_tiles(px, py)
        radius = cfg.torch_radius
        half = math.radians(cfg.torch_aperture_deg) / 2
        fx, fy = self.facing
        fnorm = math.hypot(fx, fy)
        visible = {self.player_pos}
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if self.world.in_bounds(px + dx, py + dy):
                    visible.add((px + dx, py + dy))
        for x, y in bound:
            vx, vy = x - px, y - py
            dist = math.hypot(vx, vy)
            if dist == 0 or dist > radius:
                continue
            cos_angle = (vx * fx + vy * fy) / (dist * fnorm)
            if cos_angle >= math.cos(half) - 1e-9:
                visible.add((x, y))
        return visible

    def _see(self) -> set[tuple[int, int]]:
        vis = self.visible_tiles()
        self.discovered |= vis
        return vis

    # -- description --------------------------------------------------------

    def _expand(self, key: str, x: int, y: int) -> str:
        cache_key = (x, y, key)
        if cache_key not in self._desc_cache:
            stream = derive_stream(self.artifact.seed, f"desc.{x}.{y}")
            text = self._grammar.expand(key, stream)
            self._desc_cache[cache_key] = self._context.substitute(text)
        return self._desc_cache[cache_key]

    def describe(self, x: int, y: int) -> str:
        parts = []
        for obj in self.world.objects_at(x, y):
            if "text" in obj.props:
                parts.append(obj.props["text"])
            else:
                parts.append(self._expand(obj.description_key, x, y))
        if not parts:
            key = self._terrain_keys.get(self.world.terrain(x, y))
            if key is not None:
                parts.append(self._expand(key, x, y))
        return " ".join(parts)

    # -- commands -----------------------------------------------------------

    def move(self, direction: str) -> MoveResult:
        if direction not in MOVE_DIRS:
            raise ValueError(f"unknown direction: {direction}")
        dx, dy = MOVE_DIRS[direction]
        self.facing = (dx, dy)
        tx, ty = self.player_pos[0] + dx, self.player_pos[1] + dy
        if not self.world.in_bounds(tx, ty):
            return MoveResult(moved=False, text="The world ends here.")
        if self.world.is_walkable(tx, ty):
            self.player_pos = (tx, ty)
            self._see()
            return MoveResult(moved=True)
        # Bump-inspect whatever blocks the way.
        self.inspected.add((tx, ty))
        self._see()
        return MoveResult(moved=False, text=self.describe(tx, ty))

    def face(self, direction: str) -> None:
        if direction not in FACE_DIRS:
            raise ValueError(f"unknown facing: {direction}")
        self.facing = FACE_DIRS[direction]
        self._see()

    def inspect(self, x: int, y: int) -> str:
        reachable = self.visible_tiles() | {
            (self.player_pos[0] + dx, self.player_pos[1] + dy)
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
        }
        if (x, y) not in reachable:
            raise OutOfReachError(f"({x}, {y}) is not visible from here")
        self.inspected.add((x, y))
        return self.describe(x, y)

    def read_terminal(self, x: int, y: int) -> RadioMessage:
        terminal = self._terminals.get((x, y))
        if terminal is None:
            raise OutOfReachError(f"no terminal at ({x}, {y})")
        if chebyshev(self.player_pos, (x, y)) > 1:
            raise OutOfReachError("the terminal is out of reach")
        self.read_terminals.add((x, y))
        return terminal.message

    def bodies(self) -> list[PlacedObject]:
        return [e for e in self.world.entities if e.kind == "body"]

    def submit_report(self, report: FateReport) -> dict:
        if not self.is_station:
            raise IllegalStateError("village sessions have no report phase")
        if self.phase is Phase.SUBMITTED:
            raise IllegalStateError("report already submitted")
        fates = self.artifact.fates
        names = {m.id: m.name for m in self.artifact.crew}
        score = 0
        for body_id, entry in report.entries.items():
            fate = fates.get(body_id)
            if fate is None:
                continue
            if (
                entry.claimed_name == names[body_id]
                and entry.claimed_cause == fate.cause.value
            ):
                score += 1
        self.phase = Phase.SUBMITTED
        self.score = score
        return {"score": score, "ground_truth": self.ground_truth()}

    def ground_truth(self) -> dict:
        """Sealed answers; only available once the report is in."""
        if self.phase is not Phase.SUBMITTED:
            raise IllegalStateError("ground truth is sealed until submission")
        names = {m.id: m.name for m in self.artifact.crew}
        return {
            body_id: {
                "name": names[body_id],
                "cause": fate.cause.value,
                "turn": fate.turn,
                "position": list(fate.position),
            }
            for body_id, fate in sorted(self.artifact.fates.items())
        }

    def quit_summary(self) -> dict:
        return {
            "tiles_discovered": len(self.discovered),
            "objects_inspected": len(self.inspected),
            "terminals_read": len(self.read_terminals),
        }

    # -- client view --------------------------------------------------------

    def client_view(self) -> dict:
        """Everything the client may know right now. Never includes the
        sealed ground truth before submission."""
        visible = sorted(self.visible_tiles())
        tiles = []
        for x, y in visible:
            entry = {
                "x": x,
                "y": y,
                "terrain": self.world.terrain(x, y),
                "objects": [
                    {"kind": e.kind, "blocking": e.blocking}
                    for e in self.world.objects_at(x, y)
                ],
            }
            tiles.append(entry)
        view = {
            "game": self.artifact.game,
            "phase": self.phase.value,
            "player": list(self.player_pos),
            "facing": list(self.facing),
            "visible": tiles,
            "discovered_count": len(self.discovered),
        }
        if self.is_station:
            view["crew_manifest"] = self.artifact.crew_manifest()
            view["bodies_found"] = sorted(
                e.props["crew_id"]
                for e in self.bodies()
                if (e.x, e.y) in self.discovered
            )
        if self.phase is Phase.SUBMITTED:
            view["score"] = self.score
            view["ground_truth"] = self.ground_truth()
        return view
