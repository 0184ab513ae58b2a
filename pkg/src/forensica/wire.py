"""Stable world serialization.

A WorldBundle is canonical JSON (sorted keys, compact separators) so
snapshots diff cleanly and serialization is injective. The sealed
``ground_truth`` section — fates, the crew id-to-name mapping, village
ending — is separable: ``strip_ground_truth`` produces a bundle safe to
hand to players, with message sender ids removed so bodies cannot be
linked to names.
"""

from __future__ import annotations

import json

from .config import GenConfig
from .evidence import RadioMessage, Terminal
from .station.build import CrewMember, Profession, Room, RoomKind, Station
from .station.sim import DeathCause, FateRecord, MessageKind
from .village.render import BuildingFootprint, BuildingKind, VillageWorld
from .village.sim import (
    CultureProfile,
    EcosystemState,
    Ending,
    SocietyState,
    VillageEnding,
    VillageHistory,
)
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
    Rect,
    TileWorld,
    flood_fill,
)
from .worldgen import StationArtifact, VillageArtifact

FORMAT_VERSION = 1
FILE_SUFFIX = ".forensica.json"

TERRAIN_CHARS = {
    SAND: ",",
    FLOOR: ".",
    ROAD: "=",
    WATER: "~",
    WALL: "#",
    RUBBLE: "%",
    DOOR: "+",
    SNOW: "*",
}
CHARS_TERRAIN = {v: k for k, v in TERRAIN_CHARS.items()}


class WireFormatError(ValueError):
    """Unknown format version or structurally unreadable input."""


class CorruptWorldError(ValueError):
    """A parsed bundle violates a world invariant; message names the path."""


# ---------------------------------------------------------------------------
# Serialization


def _world_to_dict(world: TileWorld) -> dict:
    return {
        "width": world.width,
        "height": world.height,
        "spawn": list(world.spawn),
        "tiles": ["".join(TERRAIN_CHARS[t] for t in row) for row in world.tiles],
        "entities": [
            {
                "x": e.x,
                "y": e.y,
                "kind": e.kind,
                "description_key": e.description_key,
                "blocking": e.blocking,
                "props": e.props,
            }
            for e in world.entities
        ],
    }


def _world_from_dict(data: dict) -> TileWorld:
    try:
        tiles = [[CHARS_TERRAIN[c] for c in row] for row in data["tiles"]]
    except KeyError as exc:
        raise CorruptWorldError(f"world.tiles: unknown terrain glyph {exc}") from exc
    world = TileWorld(
        width=data["width"],
        height=data["height"],
        tiles=tiles,
        entities=[
            PlacedObject(
                x=e["x"],
                y=e["y"],
                kind=e["kind"],
                description_key=e["description_key"],
                blocking=e["blocking"],
                props=e.get("props", {}),
            )
            for e in data["entities"]
        ],
        spawn=tuple(data["spawn"]),
    )
    if len(world.tiles) != world.height or any(
        len(row) != world.width for row in world.tiles
    ):
        raise CorruptWorldError("world.tiles: ragged grid")
    return world


def _rect_to_list(rect: Rect) -> list[int]:
    return [rect.x, rect.y, rect.w, rect.h]


def _message_to_dict(m: RadioMessage) -> dict:
    return {
        "sender_id": m.sender_id,
        "sender_name": m.sender_name,
        "turn": m.turn,
        "timestamp": m.timestamp,
        "kind": m.kind.value,
        "body": m.body,
        "optional_reply": m.optional_reply,
    }


def _message_from_dict(d: dict) -> RadioMessage:
    return RadioMessage(
        sender_id=d.get("sender_id", ""),
        sender_name=d["sender_name"],
        turn=d["turn"],
        timestamp=d["timestamp"],
        kind=MessageKind(d["kind"]),
        body=d["body"],
        optional_reply=d.get("optional_reply"),
    )


def to_bundle(artifact: VillageArtifact | StationArtifact) -> dict:
    bundle = {
        "format_version": FORMAT_VERSION,
        "game": artifact.game,
        "seed": artifact.seed,
        "config": artifact.config.to_dict(),
        "config_digest": artifact.config.digest(),
        "world": _world_to_dict(artifact.world),
    }
    if isinstance(artifact, VillageArtifact):
        village = artifact.village
        bundle["evidence"] = {
            "plaque": list(village.plaque),
            "context": dict(village.context.bindings),
            "buildings": [
                {
                    "kind": b.kind.value,
                    "rect": _rect_to_list(b.rect),
                    "door": list(b.door) if b.door else None,
                }
                for b in village.buildings
            ],
        }
        history = artifact.history
        bundle["ground_truth"] = {
            "ending": history.ending.kind.value,
            "tick": history.ending.tick_of_collapse,
            "tick_count": history.tick_count,
            "final_eco": {
                "temperature": history.final_eco.temperature,
                "hostile_fauna": history.final_eco.hostile_fauna,
                "eco_health": history.final_eco.eco_health,
            },
            "final_society": {
                "population": history.final_society.population,
                "working_age": history.final_society.working_age,
                "food_store": history.final_society.food_store,
                "culture": {
                    "craft_material": history.final_society.culture.craft_material,
                    "sacred_number": history.final_society.culture.sacred_number,
                    "cultivated_flower": history.final_society.culture.cultivated_flower,
                },
            },
            "birth_trace": history.birth_trace,
        }
    else:
        station = artifact.station
        bundle["evidence"] = {
            "rooms": [
                {
                    "rect": _rect_to_list(r.rect),
                    "kind": r.kind.value,
                    "name": r.name,
                    "doorways": [list(d) for d in r.doorways],
                }
                for r in station.rooms
            ],
            "corridors": [_rect_to_list(c) for c in station.corridors],
            "entrance_door": list(station.entrance_door),
            "crew_manifest": artifact.crew_manifest(),
            "start_minutes": artifact.start_minutes,
            "terminals": [
                {
                    "position": list(t.position),
                    "depth": t.depth,
                    "message": _message_to_dict(t.message),
                }
                for t in artifact.terminals
            ],
        }
        bundle["ground_truth"] = {
            "crew": [
                {
                    "id": m.id,
                    "name": m.name,
                    "profession": m.profession.value,
                    "start_position": list(m.start_position),
                    "description": m.description,
                }
                for m in artifact.crew
            ],
            "fates": {
                cid: {
                    "cause": fate.cause.value,
                    "turn": fate.turn,
                    "position": list(fate.position),
                }
                for cid, fate in sorted(artifact.fates.items())
            },
            "tick_count": artifact.tick_count,
        }
    return bundle


def serialize_world(bundle: dict) -> bytes:
    return json.dumps(bundle, sort_keys=True, separators=(",", ":")).encode("utf-8")


def strip_ground_truth(bundle: dict) -> dict:
    """A player-safe copy: sealed section gone, message sender ids gone."""
    safe = json.loads(json.dumps(bundle))
    safe.pop("ground_truth", None)
    for terminal in safe.get("evidence", {}).get("terminals", []):
        terminal["message"].pop("sender_id", None)
    return safe


# ---------------------------------------------------------------------------
# Parsing


def parse_world(data: bytes) -> VillageArtifact | StationArtifact:
    try:
        bundle = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WireFormatError(f"unreadable bundle: {exc}") from exc
    if not isinstance(bundle, dict):
        raise WireFormatError("bundle must be a JSON object")
    version = bundle.get("format_version")
    if version != FORMAT_VERSION:
        raise WireFormatError(f"unknown format_version: {version!r}")
    try:
        config = GenConfig.from_dict(bundle["config"])
        if config.digest() != bundle["config_digest"]:
            raise CorruptWorldError("config_digest: does not match config")
        world = _world_from_dict(bundle["world"])
        game = bundle["game"]
        if game == "Village":
            artifact = _parse_village(bundle, world, config)
        elif game == "Station":
            artifact = _parse_station(bundle, world, config)
        else:
            raise CorruptWorldError(f"game: unknown kind {game!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (CorruptWorldError, WireFormatError)):
            raise
        raise CorruptWorldError(f"malformed bundle: {exc!r}") from exc
    validate_artifact(artifact)
    return artifact


def _parse_village(bundle: dict, world: TileWorld, config: GenConfig):
    from .grammar import DynamicContext

    ev = bundle["evidence"]
    buildings = [
        BuildingFootprint(
            kind=BuildingKind(b["kind"]),
            rect=Rect(*b["rect"]),
            door=tuple(b["door"]) if b["door"] else None,
        )
        for b in ev["buildings"]
    ]
    halls = [b for b in buildings if b.kind is BuildingKind.WORSHIP_HALL]
    if len(halls) != 1:
        raise CorruptWorldError("evidence.buildings: expected exactly one hall")
    village = VillageWorld(
        world=world,
        buildings=buildings,
        plaque=tuple(ev["plaque"]),
        hall=halls[0].rect,
        context=DynamicContext(dict(ev["context"])),
    )
    history = None
    gt = bundle.get("ground_truth")
    if gt is not None:
        history = VillageHistory(
            ending=VillageEnding(Ending(gt["ending"]), gt["tick"]),
            final_eco=EcosystemState(**gt["final_eco"]),
            final_society=SocietyState(
                population=gt["final_society"]["population"],
                working_age=gt["final_society"]["working_age"],
                food_store=gt["final_society"]["food_store"],
                culture=CultureProfile(**gt["final_society"]["culture"]),
            ),
            birth_trace=list(gt["birth_trace"]),
            tick_count=gt["tick_count"],
        )
    return VillageArtifact(
        seed=bundle["seed"],
        config=config,
        world=world,
        village=village,
        history=history,
    )


def _parse_station(bundle: dict, world: TileWorld, config: GenConfig):
    ev = bundle["evidence"]
    rooms = [
        Room(
            rect=Rect(*r["rect"]),
            kind=RoomKind(r["kind"]),
            name=r["name"],
            doorways=[tuple(d) for d in r["doorways"]],
        )
        for r in ev["rooms"]
    ]
    station = Station(
        grid=world,
        rooms=rooms,
        corridors=[Rect(*c) for c in ev["corridors"]],
        entrance_door=tuple(ev["entrance_door"]),
    )
    terminals = [
        Terminal(
            position=tuple(t["position"]),
            depth=t["depth"],
            message=_message_from_dict(t["message"]),
        )
        for t in ev["terminals"]
    ]
    messages = [t.message for t in terminals]
    crew: list[CrewMember] = []
    fates: dict[str, FateRecord] = {}
    gt = bundle.get("ground_truth")
    tick_count = 0
    if gt is not None:
        crew = [
            CrewMember(
                id=c["id"],
                name=c["name"],
                profession=Profession(c["profession"]),
                start_position=tuple(c["start_position"]),
                description=c["description"],
            )
            for c in gt["crew"]
        ]
        fates = {
            cid: FateRecord(
                cause=DeathCause(f["cause"]),
                turn=f["turn"],
                position=tuple(f["position"]),
            )
            for cid, f in gt["fates"].items()
        }
        tick_count = gt["tick_count"]
    artifact = StationArtifact(
        seed=bundle["seed"],
        config=config,
        world=world,
        station=station,
        crew=crew,
        fates=fates,
        messages=messages,
        terminals=terminals,
        start_minutes=ev["start_minutes"],
        tick_count=tick_count,
        manifest=list(ev["crew_manifest"]),
    )
    return artifact


# ---------------------------------------------------------------------------
# Validation


def validate_artifact(artifact: VillageArtifact | StationArtifact) -> None:
    world = artifact.world
    if not world.in_bounds(*world.spawn) or not world.is_walkable(*world.spawn):
        raise CorruptWorldError("world.spawn: not a walkable tile")
    for i, e in enumerate(world.entities):
        if not world.in_bounds(e.x, e.y):
            raise CorruptWorldError(f"world.entities[{i}]: out of bounds")

    if isinstance(artifact, VillageArtifact):
        plaques = [e for e in world.entities if e.kind == "plaque"]
        if len(plaques) != 1:
            raise CorruptWorldError("world.entities: expected exactly one plaque")
        return

    station = artifact.station
    reachable = flood_fill(world, station.entrance_door)
    for x, y in station.floor_tiles():
        if world.is_walkable(x, y) and (x, y) not in reachable:
            raise CorruptWorldError(
                f"world.tiles: floor tile ({x}, {y}) unreachable from entrance"
            )
    by_depth = sorted(artifact.terminals, key=lambda t: t.depth)
    turns = [t.message.turn for t in by_depth]
    if turns != sorted(turns):
        raise CorruptWorldError(
            "evidence.terminals: depth order breaks message chronology"
        )
    for i, t in enumerate(artifact.terminals):
        if t.position not in reachable:
            raise CorruptWorldError(
                f"evidence.terminals[{i}]: unreachable from entrance"
            )
