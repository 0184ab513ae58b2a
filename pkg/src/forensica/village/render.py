"""Render a collapsed village history into an explorable 100x100 ruin.

Rendering is the second phase of the two-phase design: it consumes only
(history, seed, config), so re-rendering the same inputs is bit
identical. The grid is split into 10x10 regions used to reserve space
for large features (lakes, the statue, the worship hall) so they never
overlap.

Simulation conditioning, in order of application:
  * lake count and size grow with final ecosystem health
  * wall decay probability grows with final temperature
  * toys track birth/population growth, crops fail and weeds thrive
    under famine or ecosystem collapse, predator skeletons track the
    final hostile-fauna density
Perfume is deliberately unconditioned: it appears in houses at a fixed
rate no matter how the village died.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from ..config import GenConfig, VillageRenderConfig
from ..errors import GenerationError, GenerationRetry
from ..grammar import DynamicContext, village_context
from ..rng import RandomStream, derive_stream
from ..world import (
    DOOR,
    REGION_SIZE,
    ROAD,
    RUBBLE,
    SAND,
    WALL,
    WATER,
    PlacedObject,
    Rect,
    TileWorld,
    bfs_depths,
    flood_fill,
    region_of,
)

VILLAGE_SIZE = 100
CENTER = (VILLAGE_SIZE // 2, VILLAGE_SIZE // 2)


class BuildingKind(str, Enum):
    HOUSE = "House"
    BARN = "Barn"
    FIELD = "Field"
    WORSHIP_HALL = "WorshipHall"


@dataclass
class BuildingFootprint:
    kind: BuildingKind
    rect: Rect
    door: tuple[int, int] | None = None


@dataclass
class VillageWorld:
    world: TileWorld
    buildings: list[BuildingFootprint]
    plaque: tuple[int, int]
    hall: Rect
    context: DynamicContext = field(default_factory=DynamicContext)


def clamp01(x: float) -> float:
    return max(0.0, min(1.0, x))


# ---------------------------------------------------------------------------
# Water


def place_water(history, stream: RandomStream, world: TileWorld,
                cfg: VillageRenderConfig, reserved: set) -> None:
    """Grow lakes as random-walk blobs; quantity and size scale with the
    final ecosystem health. Always places at least one minimal lake."""
    eco_frac = clamp01(history.final_eco.eco_health)
    count = cfg.lake_count_min + round(
        eco_frac * (cfg.lake_count_max - cfg.lake_count_min)
    )
    area = cfg.lake_area_min + round(
        eco_frac * (cfg.lake_area_max - cfg.lake_area_min)
    )
    for _ in range(count):
        for _attempt in range(40):
            x = stream.randint(5, world.width - 6)
            y = stream.randint(5, world.height - 6)
            if region_of(x, y) not in reserved:
                break
        else:
            continue
        reserved.add(region_of(x, y))
        _grow_blob(stream, world, x, y, area)


def _grow_blob(stream: RandomStream, world: TileWorld, x: int, y: int,
               target_area: int) -> None:
    world.set_terrain(x, y, WATER)
    frontier = [(x, y)]
    placed = 1
    while placed < target_area and frontier:
        cx, cy = frontier[stream.randint(0, len(frontier) - 1)]
        dx, dy = stream.choice([(0, -1), (1, 0), (0, 1), (-1, 0)])
        nx, ny = cx + dx, cy + dy
        if (
            1 <= nx < world.width - 1
            and 1 <= ny < world.height - 1
            and world.terrain(nx, ny) == SAND
        ):
            world.set_terrain(nx, ny, WATER)
            frontier.append((nx, ny))
            placed += 1


# ---------------------------------------------------------------------------
# Statue, plaque, worship hall


def place_fixed_features(stream: RandomStream, world: TileWorld,
                         cfg: VillageRenderConfig, reserved: set,
                         ) -> tuple[tuple[int, int], Rect, list[BuildingFootprint]]:
    plaque = _place_statue(stream, world, cfg, reserved)
    hall_rect = _place_hall(stream, world, cfg, reserved, plaque)
    hall = BuildingFootprint(BuildingKind.WORSHIP_HALL, hall_rect)
    return plaque, hall_rect, [hall]


def _place_statue(stream, world, cfg, reserved) -> tuple[int, int]:
    for _attempt in range(60):
        px = stream.randint(30, 70)
        py = stream.randint(30, 70)
        if world.terrain(px, py) != SAND or region_of(px, py) in reserved:
            continue
        # need a walkable spawn tile next to the plaque
        spawn = next(
            (
                (px + dx, py + dy)
                for dx, dy in ((0, 1), (0, -1), (1, 0), (-1, 0))
                if world.terrain(px + dx, py + dy) == SAND
            ),
            None,
        )
        if spawn is None:
            continue
        reserved.add(region_of(px, py))
        world.entities.append(
            PlacedObject(px, py, "plaque", "plaque", blocking=True)
        )
        world.spawn = spawn
        n_fragments = stream.randint(cfg.statue_fragment_min, cfg.statue_fragment_max)
        placed = 0
        while placed < n_fragments:
            fx = px + stream.randint(-cfg.statue_scatter_radius, cfg.statue_scatter_radius)
            fy = py + stream.randint(-cfg.statue_scatter_radius, cfg.statue_scatter_radius)
            if (fx, fy) in ((px, py), spawn) or not world.in_bounds(fx, fy):
                continue
            if world.terrain(fx, fy) != SAND or world.objects_at(fx, fy):
                continue
            world.entities.append(
                PlacedObject(fx, fy, "statue-fragment", "statue_fragment", blocking=True)
            )
            placed += 1
        return (px, py)
    raise GenerationRetry("no room for the statue")


def _place_hall(stream, world, cfg, reserved, plaque) -> Rect:
    """Scan outward from the statue for the first feasible 20x10 spot."""
    px, py = plaque
    candidates = []
    for oy in range(-cfg.hall_search_radius, cfg.hall_search_radius + 1):
        for ox in range(-cfg.hall_search_radius, cfg.hall_search_radius + 1):
            x, y = px + ox, py + oy
            rect = Rect(x, y, cfg.hall_w, cfg.hall_h)
            if rect.x < 1 or rect.y < 1 or rect.x2 >= world.width - 1 or rect.y2 >= world.height - 1:
                continue
            candidates.append((max(abs(ox), abs(oy)), oy, ox, rect))
    candidates.sort()
    for _dist, _oy, _ox, rect in candidates:
        if _rect_clear(world, rect, margin=1):
            _build_hall(stream, world, rect, plaque)
            for tx, ty in rect.all_tiles():
                reserved.add(region_of(tx, ty))
            return rect
    raise GenerationRetry("no feasible 20x10 worship hall placement")


def _rect_clear(world: TileWorld, rect: Rect, margin: int = 0) -> bool:
    for y in range(rect.y - margin, rect.y2 + margin + 1):
        for x in range(rect.x - margin, rect.x2 + margin + 1):
            if not world.in_bounds(x, y):
                return False
            if world.terrain(x, y) != SAND or world.objects_at(x, y):
                return False
    return True


def _build_hall(stream, world, rect: Rect, plaque) -> None:
    for x, y in rect.all_tiles():
        world.set_terrain(x, y, "floor")
    for x, y in rect.perimeter():
        world.set_terrain(x, y, WALL)
    # door in the middle of the long wall facing the plaque
    door_y = rect.y if plaque[1] < rect.center[1] else rect.y2
    door = (rect.center[0], door_y)
    world.set_terrain(*door, DOOR)
    # pews fill the west 2/3 of the interior in rows with a central aisle;
    # the east end stays open with the altar
    aisle_y = (rect.y + 1 + rect.y2 - 1) // 2
    pew_x_end = rect.x + (rect.w * 2) // 3
    for y in range(rect.y + 2, rect.y2 - 1, 2):
        if y == aisle_y:
            continue
        for x in range(rect.x + 2, pew_x_end):
            if (x, y) == door or abs(x - door[0]) <= 1:
                continue  # keep the doorway approach clear
            world.entities.append(PlacedObject(x, y, "pew", "pew", blocking=True))
    altar = (rect.x2 - 2, aisle_y)
    world.entities.append(PlacedObject(*altar, "altar", "altar", blocking=True))
    # engravings on the interior face of the east wall
    for y in (aisle_y - 2, aisle_y + 2):
        if rect.y < y < rect.y2:
            world.entities.append(
                PlacedObject(rect.x2, y, "engraving", "engraving", blocking=True)
            )


# ---------------------------------------------------------------------------
# Roads and buildings


def grow_roads(stream: RandomStream, world: TileWorld, cfg: VillageRenderConfig,
               hall: Rect, buildings: list[BuildingFootprint]) -> None:
    """Main road from the worship hall to the nearest water, then random
    branches, with buildings lining every road."""
    start = _hall_door_outside(world, hall)
    path = _shortest_path_to_water(world, start)
    for x, y in path:
        if world.terrain(x, y) == SAND:
            world.set_terrain(x, y, ROAD)
    road_tiles = [t for t in path if world.terrain(*t) == ROAD]
    _line_with_buildings(stream, world, cfg, road_tiles, buildings)

    budget = stream.randint(cfg.road_budget_min, cfg.road_budget_max)
    all_roads = list(road_tiles)
    added, attempts = 0, 0
    while added < budget and attempts < 200:
        attempts += 1
        branch = _grow_branch(stream, world, cfg, all_roads)
        if branch is None:
            continue
        added += 1
        _line_with_buildings(stream, world, cfg, branch, buildings)
        all_roads.extend(branch)
    # a village is more than a chapel: force a few houses if the road
    # network came out too sparse to seed any
    forced = 0
    while len(buildings) < 5 and forced < 100:
        forced += 1
        _line_with_buildings(
            stream, world, cfg,
            [all_roads[stream.randint(0, len(all_roads) - 1)]],
            buildings, force=True,
        )


def _hall_door_outside(world: TileWorld, hall: Rect) -> tuple[int, int]:
    for x, y in hall.perimeter():
        if world.terrain(x, y) == DOOR:
            for dx, dy in ((0, -1), (0, 1), (1, 0), (-1, 0)):
                if not hall.contains(x + dx, y + dy) and world.in_bounds(x + dx, y + dy):
                    return (x + dx, y + dy)
    raise GenerationRetry("hall door is sealed")


def _shortest_path_to_water(world: TileWorld, start) -> list[tuple[int, int]]:
    """BFS over open ground to the closest tile adjacent to water."""
    from collections import deque

    parents = {start: None}
    frontier = deque([start])
    goal = None
    while frontier:
        x, y = frontier.popleft()
        if any(
            world.in_bounds(x + dx, y + dy) and world.terrain(x + dx, y + dy) == WATER
            for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0))
        ):
            goal = (x, y)
            break
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nxt = (x + dx, y + dy)
            if nxt in parents or not world.in_bounds(*nxt):
                continue
            if world.terrain(*nxt) not in (SAND, ROAD):
                continue
            parents[nxt] = (x, y)
            frontier.append(nxt)
    if goal is None:
        raise GenerationRetry("no path from hall to water")
    path = []
    node = goal
    while node is not None:
        path.append(node)
        node = parents[node]
    path.reverse()
    return path


def _grow_branch(stream, world, cfg, all_roads) -> list[tuple[int, int]] | None:
    """Branch a new straight road off a random existing road tile."""
    for _attempt in range(30):
        bx, by = all_roads[stream.randint(0, len(all_roads) - 1)]
        if not stream.chance(cfg.branch_chance):
            continue
        dx, dy = stream.choice([(0, -1), (1, 0), (0, 1), (-1, 0)])
        length = stream.randint(6, 16)
        tiles = []
        x, y = bx, by
        for _ in range(length):
            x, y = x + dx, y + dy
            if not (1 <= x < world.width - 1 and 1 <= y < world.height - 1):
                break
            if world.terrain(x, y) != SAND:
                break
            tiles.append((x, y))
        if len(tiles) >= 4:
            for t in tiles:
                world.set_terrain(*t, ROAD)
            return tiles
    return None


def _line_with_buildings(stream, world, cfg, road_tiles, buildings, force=False) -> None:
    for rx, ry in road_tiles:
        if not force and not stream.chance(cfg.house_chance):
            continue
        side = stream.choice([(0, -1), (1, 0), (0, 1), (-1, 0)])
        w = stream.randint(cfg.house_w_min, cfg.house_w_max)
        h = stream.randint(cfg.house_h_min, cfg.house_h_max)
        rect = _rect_beside(rx, ry, side, w, h)
        if rect.x < 1 or rect.y < 1 or rect.x2 >= world.width - 1 or rect.y2 >= world.height - 1:
            continue
        if not _rect_clear(world, rect):
            continue
        dist = math.dist((rx, ry), CENTER)
        farm_p = clamp01(cfg.farm_base + cfg.farm_dist_coeff * dist / 50.0)
        if stream.chance(farm_p):
            kind = BuildingKind.BARN if stream.chance(0.5) else BuildingKind.FIELD
        else:
            kind = BuildingKind.HOUSE
        door = (rx + side[0] * 1, ry + side[1] * 1) if side != (0, 0) else None
        _build_structure(world, rect, kind, door)
        buildings.append(BuildingFootprint(kind, rect, door))


def _rect_beside(rx, ry, side, w, h) -> Rect:
    dx, dy = side
    if dy == -1:
        return Rect(rx - w // 2, ry - h, w, h)
    if dy == 1:
        return Rect(rx - w // 2, ry + 1, w, h)
    if dx == -1:
        return Rect(rx - w, ry - h // 2, w, h)
    return Rect(rx + 1, ry - h // 2, w, h)


def _build_structure(world, rect: Rect, kind: BuildingKind, door) -> None:
    floor_key = {
        BuildingKind.HOUSE: "floor",
        BuildingKind.BARN: "floor",
        BuildingKind.FIELD: "floor",
    }[kind]
    for x, y in rect.all_tiles():
        world.set_terrain(x, y, floor_key)
    if kind is BuildingKind.FIELD:
        for x, y in rect.perimeter():
            world.entities.append(PlacedObject(x, y, "fence", "fence", blocking=True))
    else:
        for x, y in rect.perimeter():
            world.set_terrain(x, y, WALL)
    if door is not None and rect.contains(*door):
        if kind is BuildingKind.FIELD:
            world.entities = [
                e for e in world.entities if (e.x, e.y) != door or e.kind != "fence"
            ]
        world.set_terrain(*door, DOOR)


# ---------------------------------------------------------------------------
# Decay


def apply_decay(history, stream: RandomStream, world: TileWorld,
                cfg: VillageRenderConfig,
                buildings: list[BuildingFootprint]) -> None:
    """Knock walls into passable rubble; harsher final temperature means
    more destruction."""
    temp_frac = clamp01(history.final_eco.temperature)
    p = clamp01(cfg.decay_floor + cfg.decay_span * temp_frac)
    for building in buildings:
        for x, y in building.rect.perimeter():
            if world.terrain(x, y) == WALL and stream.chance(p):
                world.set_terrain(x, y, RUBBLE)
    # fences rot at the same rate
    survivors = []
    for obj in world.entities:
        if obj.kind == "fence" and stream.chance(p):
            continue
        survivors.append(obj)
    world.entities[:] = survivors


# ---------------------------------------------------------------------------
# Items


def birth_intensity(history) -> float:
    """Mean positive per-tick population growth, saturating at 1."""
    gains = [max(0.0, d) for d in history.birth_trace]
    if not gains:
        return 0.0
    return clamp01(sum(gains) / len(gains))


def populate_items(history, stream: RandomStream, world: TileWorld,
                   cfg: VillageRenderConfig,
                   buildings: list[BuildingFootprint]) -> None:
    sacred = history.final_society.culture.sacred_number
    toy_p = clamp01(cfg.toy_coeff * birth_intensity(history))
    fauna_frac = clamp01(history.final_eco.hostile_fauna)
    predator_p = clamp01(cfg.predator_skeleton_coeff * fauna_frac)
    crops_failed = history.ending.kind.value in ("Famine", "EcosystemCollapse")
    crop_p = cfg.crop_base_chance * (0.3 if crops_failed else 1.0)
    weed_p = clamp01(cfg.weed_base_chance * (3.0 if crops_failed else 1.0))

    for building in buildings:
        if building.kind is BuildingKind.WORSHIP_HALL:
            continue
        doors = [
            (x, y)
            for x, y in building.rect.perimeter()
            if world.terrain(x, y) == DOOR
        ]
        interior = [
            (x, y)
            for x, y in building.rect.interior()
            if world.is_walkable(x, y)
            and all(abs(x - dx) + abs(y - dy) > 1 for dx, dy in doors)
        ]
        if not interior:
            continue
        free = list(interior)

        def take(stream=stream, free=free):
            if not free:
                return None
            return free.pop(stream.randint(0, len(free) - 1))

        if building.kind is BuildingKind.HOUSE:
            if stream.chance(cfg.table_chance):
                spot = take()
                if spot:
                    world.entities.append(
                        PlacedObject(*spot, kind="table", description_key="table", blocking=True)
                    )
                    for _ in range(stream.randint(cfg.chair_per_table_min, cfg.chair_per_table_max)):
                        cspot = take()
                        if cspot:
                            world.entities.append(
                                PlacedObject(
                                    *cspot, kind="chair", description_key="chair",
                                    blocking=False, props={"leg_count": sacred},
                                )
                            )
            if stream.chance(cfg.cutlery_chance):
                spot = take()
                if spot:
                    world.entities.append(
                        PlacedObject(*spot, kind="cutlery", description_key="cutlery")
                    )
            for _ in range(2):
                if stream.chance(toy_p):
                    spot = take()
                    if spot:
                        world.entities.append(
                            PlacedObject(*spot, kind="toy", description_key="toy")
                        )
            if stream.chance(cfg.perfume_chance):
                spot = take()
                if spot:
                    world.entities.append(
                        PlacedObject(*spot, kind="perfume", description_key="perfume")
                    )
        elif building.kind is BuildingKind.FIELD:
            for x, y in interior:
                if stream.chance(crop_p):
                    world.entities.append(PlacedObject(x, y, "crop", "crop"))
                elif stream.chance(weed_p):
                    world.entities.append(PlacedObject(x, y, "weed", "weed"))
        if building.kind in (BuildingKind.BARN, BuildingKind.FIELD):
            if stream.chance(cfg.skeleton_cattle_chance):
                spot = take()
                if spot:
                    world.entities.append(
                        PlacedObject(*spot, kind="cattle-skeleton", description_key="cattle_skeleton")
                    )
        # predator skeletons can turn up in any building
        if stream.chance(predator_p):
            spot = take()
            if spot:
                world.entities.append(
                    PlacedObject(*spot, kind="predator-skeleton", description_key="predator_skeleton")
                )


# ---------------------------------------------------------------------------
# Connectivity repair + top-level driver


def _ensure_connected(world: TileWorld, buildings: list[BuildingFootprint]) -> None:
    """Carve minimal rubble gaps so every building interior is reachable
    from spawn. Decay usually does this for free; this is the guarantee."""
    reachable = flood_fill(world, world.spawn)
    for building in buildings:
        interior = [
            (x, y) for x, y in building.rect.interior() if world.is_walkable(x, y)
        ]
        missing = [t for t in interior if t not in reachable]
        if not missing:
            continue
        _carve_path(world, world.spawn, missing[0])
        reachable = flood_fill(world, world.spawn)


def _carve_path(world: TileWorld, start, goal) -> None:
    """BFS ignoring walls (but not water); knock blocking tiles into
    rubble along the found path."""
    from collections import deque

    parents = {start: None}
    frontier = deque([start])
    while frontier:
        node = frontier.popleft()
        if node == goal:
            break
        x, y = node
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nxt = (x + dx, y + dy)
            if nxt in parents or not world.in_bounds(*nxt):
                continue
            if world.terrain(*nxt) == WATER:
                continue
            parents[nxt] = node
            frontier.append(nxt)
    if goal not in parents:
        return
    node = goal
    while node is not None:
        x, y = node
        if world.terrain(x, y) == WALL:
            world.set_terrain(x, y, RUBBLE)
        world.entities[:] = [
            e
            for e in world.entities
            if not (e.x == x and e.y == y and e.blocking and e.kind != "plaque")
        ]
        node = parents[node]


def render_village(history, seed: int, config: GenConfig) -> VillageWorld:
    """Build the full ruin for one collapse history."""
    last_error: Exception | None = None
    for attempt in range(8):
        suffix = "" if attempt == 0 else f"#{attempt}"
        try:
            return _render_once(history, seed, config, suffix)
        except GenerationRetry as exc:
            last_error = exc
    raise GenerationError(f"village rendering failed after 8 attempts: {last_error}")


def _render_once(history, seed, config, suffix) -> VillageWorld:
    cfg = config.village_render
    cfg.validate()
    world = TileWorld.filled(VILLAGE_SIZE, VILLAGE_SIZE, SAND)
    reserved: set = set()
    place_water(history, derive_stream(seed, "village.water" + suffix), world, cfg, reserved)
    plaque, hall_rect, buildings = place_fixed_features(
        derive_stream(seed, "village.features" + suffix), world, cfg, reserved
    )
    grow_roads(
        derive_stream(seed, "village.roads" + suffix), world, cfg, hall_rect, buildings
    )
    apply_decay(
        history, derive_stream(seed, "village.decay" + suffix), world, cfg, buildings
    )
    populate_items(
        history, derive_stream(seed, "village.items" + suffix), world, cfg, buildings
    )
    _ensure_connected(world, buildings)
    return VillageWorld(
        world=world,
        buildings=buildings,
        plaque=plaque,
        hall=hall_rect,
        context=village_context(history),
    )
