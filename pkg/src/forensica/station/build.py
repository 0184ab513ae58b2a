"""Station construction: corridors, typed rooms, scenery, crew, anomaly.

The layout grows a connected web of 3-tile-wide corridor segments, then
attaches walled rectangular rooms flush against them, each with one
carved doorway. The southernmost room is the entrance and carries the
station's only exterior door. Scenery placement keeps every room
internally walkable; a final flood fill from the entrance door proves
the whole station is reachable before a layout is accepted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from ..config import GenConfig, StationConfig
from ..errors import GenerationError, GenerationRetry
from ..grammar import Grammar
from ..rng import RandomStream, derive_stream
from ..world import DOOR, FLOOR, SNOW, WALL, PlacedObject, Rect, TileWorld, flood_fill


class RoomKind(Enum):
    ENTRANCE = "Entrance"
    MESS_HALL = "MessHall"
    RESIDENCES = "Residences"
    LAB1 = "Lab1"
    SECURITY_OFFICE = "SecurityOffice"
    SECONDARY_LAB = "SecondaryLab"


class Profession(Enum):
    SECURITY_OFFICER = "SecurityOfficer"
    LOGISTICS_OFFICER = "LogisticsOfficer"
    SCIENTIST = "Scientist"


LAB_KINDS = {RoomKind.LAB1, RoomKind.SECONDARY_LAB}


@dataclass
class Room:
    rect: Rect
    kind: RoomKind
    name: str
    doorways: list[tuple[int, int]] = field(default_factory=list)
    scenery: list[PlacedObject] = field(default_factory=list)

    def interior_tiles(self) -> list[tuple[int, int]]:
        return list(self.rect.interior())


@dataclass
class CrewMember:
    id: str
    name: str
    profession: Profession
    start_position: tuple[int, int]
    description: str


@dataclass
class AnomalySpawn:
    position: tuple[int, int]


@dataclass
class Station:
    grid: TileWorld
    rooms: list[Room]
    corridors: list[Rect]
    entrance_door: tuple[int, int]

    def room_containing(self, x: int, y: int) -> Room | None:
        for room in self.rooms:
            if room.rect.contains(x, y):
                return room
        return None

    def sight_tiles(self, x: int, y: int) -> set[tuple[int, int]]:
        """Room-bounded line of sight: every tile of the room rect(s)
        and/or corridor rect(s) containing the viewer."""
        tiles: set[tuple[int, int]] = set()
        for room in self.rooms:
            if room.rect.contains(x, y):
                tiles.update(room.rect.all_tiles())
        for corridor in self.corridors:
            if corridor.contains(x, y):
                tiles.update(corridor.all_tiles())
        return tiles

    def place_name(self, x: int, y: int) -> str:
        room = self.room_containing(x, y)
        if room is not None:
            return room.name
        if any(c.contains(x, y) for c in self.corridors):
            return "the corridor"
        return "outside"

    def floor_tiles(self) -> list[tuple[int, int]]:
        """Every interior station tile (floor or doorway)."""
        return [
            (x, y)
            for y in range(self.grid.height)
            for x in range(self.grid.width)
            if self.grid.terrain(x, y) in (FLOOR, DOOR)
        ]


@dataclass
class SceneryPattern:
    name: str
    rooms: list[str]
    wall_adjacent: bool
    pieces: list[dict]


def load_scenery_patterns() -> list[SceneryPattern]:
    blob = resources.files("forensica.content").joinpath("scenery_patterns.json")
    return [SceneryPattern(**entry) for entry in json.loads(blob.read_text())]


def load_name_pool() -> list[str]:
    blob = resources.files("forensica.content").joinpath("names.json")
    return json.loads(blob.read_text())


# ---------------------------------------------------------------------------
# Corridors


def _grow_corridors(cfg: StationConfig, stream: RandomStream) -> list[Rect]:
    count = stream.randint(cfg.corridor_count_min, cfg.corridor_count_max)
    margin = 2
    corridors: list[Rect] = []

    def fits(rect: Rect) -> bool:
        return (
            rect.x >= margin
            and rect.y >= margin
            and rect.x2 <= cfg.grid_w - 1 - margin
            and rect.y2 <= cfg.grid_h - 1 - margin
        )

    length = stream.randint(cfg.corridor_len_min, cfg.corridor_len_max)
    cx, cy = cfg.grid_w // 2, cfg.grid_h // 2
    if stream.chance(0.5):
        first = Rect(cx - length // 2, cy - 1, length, 3)
    else:
        first = Rect(cx - 1, cy - length // 2, 3, length)
    if not fits(first):
        raise GenerationRetry("first corridor out of bounds")
    corridors.append(first)

    attempts = 0
    while len(corridors) < count and attempts < 200:
        attempts += 1
        base = stream.choice(corridors)
        bx = stream.randint(base.x, base.x2)
        by = stream.randint(base.y, base.y2)
        length = stream.randint(cfg.corridor_len_min, cfg.corridor_len_max)
        if stream.chance(0.5):
            rect = Rect(bx - stream.randint(0, length - 1), by - 1, length, 3)
        else:
            rect = Rect(bx - 1, by - stream.randint(0, length - 1), 3, length)
        if fits(rect):
            corridors.append(rect)
    if len(corridors) < count:
        raise GenerationRetry("corridor growth stalled")
    return corridors


# ---------------------------------------------------------------------------
# Rooms

_SIDES = ("north", "south", "east", "west")


def _attach_rooms(
    cfg: StationConfig, corridors: list[Rect], stream: RandomStream
) -> list[tuple[Rect, tuple[int, int]]]:
    """Place room rectangles flush against corridors.

    Returns (rect, doorway) pairs; the doorway is the wall tile carved
    into the adjoining corridor.
    """
    target = stream.randint(cfg.room_count_min, cfg.room_count_max)
    rooms: list[tuple[Rect, tuple[int, int]]] = []

    def valid(rect: Rect) -> bool:
        if rect.x < 1 or rect.y < 1:
            return False
        if rect.x2 > cfg.grid_w - 2 or rect.y2 > cfg.grid_h - 2:
            return False
        if any(rect.intersects(c) for c in corridors):
            return False
        return not any(rect.intersects(r) for r, _ in rooms)

    for _ in range(target):
        for _ in range(40):
            corridor = stream.choice(corridors)
            side = stream.choice(_SIDES)
            w = stream.randint(cfg.room_dim_min, cfg.room_dim_max)
            h = stream.randint(cfg.room_dim_min, cfg.room_dim_max)
            if side in ("north", "south"):
                x = stream.randint(corridor.x - w + 2, corridor.x2 - 1)
                y = corridor.y - h if side == "north" else corridor.y2 + 1
                rect = Rect(x, y, w, h)
                lo = max(rect.x + 1, corridor.x)
                hi = min(rect.x2 - 1, corridor.x2)
                if lo > hi or not valid(rect):
                    continue
                door = (stream.randint(lo, hi), rect.y2 if side == "north" else rect.y)
            else:
                y = stream.randint(corridor.y - h + 2, corridor.y2 - 1)
                x = corridor.x - w if side == "west" else corridor.x2 + 1
                rect = Rect(x, y, w, h)
                lo = max(rect.y + 1, corridor.y)
                hi = min(rect.y2 - 1, corridor.y2)
                if lo > hi or not valid(rect):
                    continue
                door = (rect.x2 if side == "west" else rect.x, stream.randint(lo, hi))
            rooms.append((rect, door))
            break
    if len(rooms) < 5:
        raise GenerationRetry("not enough rooms for the typed set")
    return rooms


def _paint(
    cfg: StationConfig,
    corridors: list[Rect],
    rooms: list[tuple[Rect, tuple[int, int]]],
) -> TileWorld:
    world = TileWorld.filled(cfg.grid_w, cfg.grid_h, SNOW)
    for c in corridors:
        for x, y in c.all_tiles():
            world.set_terrain(x, y, FLOOR)
    for rect, _ in rooms:
        for x, y in rect.perimeter():
            world.set_terrain(x, y, WALL)
        for x, y in rect.interior():
            world.set_terrain(x, y, FLOOR)
    # Wrap every exposed floor edge (corridor sides and ends) in wall.
    for y in range(cfg.grid_h):
        for x in range(cfg.grid_w):
            if world.terrain(x, y) != SNOW:
                continue
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nx, ny = x + dx, y + dy
                    if world.in_bounds(nx, ny) and world.terrain(nx, ny) == FLOOR:
                        world.set_terrain(x, y, WALL)
                        break
                else:
                    continue
                break
    for _, door in rooms:
        world.set_terrain(*door, DOOR)
    return world


# ---------------------------------------------------------------------------
# Typing


def _type_rooms(
    placed: list[tuple[Rect, tuple[int, int]]],
    world: TileWorld,
    stream: RandomStream,
) -> tuple[list[Room], tuple[int, int]]:
    """Assign room kinds; southernmost becomes the entrance with an
    exterior door carved in its south wall."""
    order = sorted(
        range(len(placed)),
        key=lambda i: (-placed[i][0].center[1], placed[i][0].center[0]),
    )
    entrance_i = order[0]
    others = sorted(order[1:])
    stream.shuffle(others)
    unique = [
        RoomKind.MESS_HALL,
        RoomKind.RESIDENCES,
        RoomKind.LAB1,
        RoomKind.SECURITY_OFFICE,
    ]
    kinds: dict[int, RoomKind] = {entrance_i: RoomKind.ENTRANCE}
    for slot, idx in enumerate(others):
        kinds[idx] = unique[slot] if slot < len(unique) else RoomKind.SECONDARY_LAB

    base_names = {
        RoomKind.ENTRANCE: "the entrance",
        RoomKind.MESS_HALL: "the mess hall",
        RoomKind.RESIDENCES: "the residences",
        RoomKind.LAB1: "Lab 1",
        RoomKind.SECURITY_OFFICE: "the security office",
    }
    rooms: list[Room] = []
    lab_no = 2
    for i, (rect, door) in enumerate(placed):
        kind = kinds[i]
        if kind is RoomKind.SECONDARY_LAB:
            name = f"Lab {lab_no}"
            lab_no += 1
        else:
            name = base_names[kind]
        rooms.append(Room(rect=rect, kind=kind, name=name, doorways=[door]))

    entrance = rooms[entrance_i]
    candidates = [
        x
        for x in range(entrance.rect.x + 1, entrance.rect.x2)
        if world.in_bounds(x, entrance.rect.y2 + 1)
        and world.terrain(x, entrance.rect.y2 + 1) == SNOW
    ]
    if not candidates:
        raise GenerationRetry("entrance room has no free south wall")
    door_x = stream.choice(candidates)
    exterior = (door_x, entrance.rect.y2)
    world.set_terrain(*exterior, DOOR)
    entrance.doorways.append(exterior)
    return rooms, exterior


# ---------------------------------------------------------------------------
# Scenery


def place_scenery(
    room: Room,
    patterns: list[SceneryPattern],
    world: TileWorld,
    stream: RandomStream,
) -> None:
    """Fill one room with furniture without breaking its walkability.

    Every doorway tile and the interior tiles beside it stay clear, and
    each tentative placement is re-checked with a room-local flood fill
    so all free interior tiles remain reachable from every doorway.
    """
    usable = [p for p in patterns if room.kind.value in p.rooms]
    if not usable:
        return
    interior = room.interior_tiles()
    reserved: set[tuple[int, int]] = set()
    for door in room.doorways:
        reserved.add(door)
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            reserved.add((door[0] + dx, door[1] + dy))

    blocked: set[tuple[int, int]] = set()
    interior_set = set(interior)

    def room_connected(extra: set[tuple[int, int]]) -> bool:
        bad = blocked | extra
        free = [t for t in interior if t not in bad]
        if not free:
            return False
        entries = sorted(t for t in reserved if t in interior_set)
        start = entries[0] if entries else free[0]
        if start in bad:
            return False
        seen = {start}
        frontier = [start]
        while frontier:
            x, y = frontier.pop()
            for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
                nxt = (x + dx, y + dy)
                if nxt in seen or nxt in bad or nxt not in interior_set:
                    continue
                seen.add(nxt)
                frontier.append(nxt)
        return all(t in seen for t in free) and all(t in seen for t in entries)
    budget = max(1, len(interior) // 7)
    anchors = list(interior)
    stream.shuffle(anchors)
    placed = 0
    for anchor in anchors:
        if placed >= budget:
            break
        pattern = stream.choice(usable)
        tiles = [(anchor[0] + p["dx"], anchor[1] + p["dy"]) for p in pattern.pieces]
        if any(t not in interior_set or t in reserved for t in tiles):
            continue
        block_tiles = {
            t for t, p in zip(tiles, pattern.pieces) if p["blocking"]
        }
        # Keep a gap between separate furniture groups.
        if any(
            (t[0] + dx, t[1] + dy) in blocked
            for t in block_tiles
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
        ):
            continue
        if pattern.wall_adjacent:
            ax, ay = tiles[0]
            if not any(
                world.terrain(ax + dx, ay + dy) == WALL
                for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0))
            ):
                continue
        if block_tiles and not room_connected(block_tiles):
            continue
        for (tx, ty), piece in zip(tiles, pattern.pieces):
            obj = PlacedObject(
                x=tx,
                y=ty,
                kind=piece["kind"],
                description_key=piece["kind"],
                blocking=piece["blocking"],
            )
            world.entities.append(obj)
            room.scenery.append(obj)
        blocked |= block_tiles
        placed += 1


# ---------------------------------------------------------------------------
# Crew and anomaly


def _free_tiles(room: Room, world: TileWorld) -> list[tuple[int, int]]:
    return [t for t in room.interior_tiles() if world.is_walkable(*t)]


def _make_crew(
    rooms: list[Room],
    world: TileWorld,
    cfg: StationConfig,
    grammar: Grammar,
    stream: RandomStream,
) -> list[CrewMember]:
    size = stream.randint(cfg.crew_min, cfg.crew_max)
    names = stream.sample(load_name_pool(), size)
    by_kind = {room.kind: room for room in rooms if room.kind is not RoomKind.SECONDARY_LAB}
    labs = [r for r in rooms if r.kind in LAB_KINDS]
    professions = [Profession.SECURITY_OFFICER, Profession.LOGISTICS_OFFICER]
    professions += [Profession.SCIENTIST] * (size - 2)

    taken: set[tuple[int, int]] = set()
    crew: list[CrewMember] = []
    for i, (name, profession) in enumerate(zip(names, professions)):
        if profession is Profession.SECURITY_OFFICER:
            room = by_kind[RoomKind.SECURITY_OFFICE]
        elif profession is Profession.LOGISTICS_OFFICER:
            room = by_kind[RoomKind.MESS_HALL]
        else:
            room = stream.choice(labs)
        free = [t for t in _free_tiles(room, world) if t not in taken]
        if not free:
            raise GenerationRetry(f"no free start tile in {room.name}")
        pos = stream.choice(free)
        taken.add(pos)
        description = grammar.expand(f"crew_{profession.value}", stream)
        crew.append(
            CrewMember(
                id=f"crew-{i}",
                name=name,
                profession=profession,
                start_position=pos,
                description=description,
            )
        )
    return crew


# ---------------------------------------------------------------------------
# Entry point


def build_station(
    seed: int, config: GenConfig
) -> tuple[Station, list[CrewMember], AnomalySpawn]:
    cfg = config.station
    patterns = load_scenery_patterns()
    grammar = Grammar.from_package_content("station_grammar.json")
    last_error: Exception | None = None
    for attempt in range(cfg.layout_retries):
        suffix = "" if attempt == 0 else f"#{attempt}"
        try:
            layout = derive_stream(seed, "station.layout" + suffix)
            corridors = _grow_corridors(cfg, layout)
            placed = _attach_rooms(cfg, corridors, layout)
            world = _paint(cfg, corridors, placed)
            rooms, entrance_door = _type_rooms(placed, world, layout)

            scenery = derive_stream(seed, "station.scenery" + suffix)
            for room in rooms:
                place_scenery(room, patterns, world, scenery)

            crew_stream = derive_stream(seed, "station.crew" + suffix)
            crew = _make_crew(rooms, world, cfg, grammar, crew_stream)
            lab1 = next(r for r in rooms if r.kind is RoomKind.LAB1)
            lab_free = _free_tiles(lab1, world)
            if not lab_free:
                raise GenerationRetry("Lab 1 fully furnished; no anomaly tile")
            anomaly = AnomalySpawn(position=crew_stream.choice(lab_free))

            station = Station(
                grid=world,
                rooms=rooms,
                corridors=corridors,
                entrance_door=entrance_door,
            )
            _verify_walkable(station)
            world.spawn = entrance_door
            return station, crew, anomaly
        except GenerationRetry as exc:
            last_error = exc
    raise GenerationError(
        f"station generation failed after {cfg.layout_retries} attempts: {last_error}"
    )


def _verify_walkable(station: Station) -> None:
    reachable = flood_fill(station.grid, station.entrance_door)
    for tile in station.floor_tiles():
        if station.grid.is_walkable(*tile) and tile not in reachable:
            raise GenerationRetry(f"unreachable floor tile {tile}")
