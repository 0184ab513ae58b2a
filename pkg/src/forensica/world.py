"""Tile-grid world shared by both games' rendered output.

The grid stores one terrain kind per tile plus a list of placed objects
(scenery, bodies, terminals). Regions split the grid into 10x10 blocks
used to reserve space for large features during village rendering.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

REGION_SIZE = 10

# Terrain kinds (one per tile).
SAND = "sand"
FLOOR = "floor"
ROAD = "road"
WATER = "water"
WALL = "wall"
RUBBLE = "rubble"
DOOR = "door"
SNOW = "snow"

BLOCKING_TERRAIN = {WALL, WATER}


@dataclass
class PlacedObject:
    """An object sitting on a tile: scenery, remains, evidence."""

    x: int
    y: int
    kind: str
    description_key: str
    blocking: bool = False
    props: dict = field(default_factory=dict)


@dataclass
class TileWorld:
    width: int
    height: int
    tiles: list[list[str]]
    entities: list[PlacedObject] = field(default_factory=list)
    spawn: tuple[int, int] = (0, 0)

    @classmethod
    def filled(cls, width: int, height: int, terrain: str) -> "TileWorld":
        return cls(width, height, [[terrain] * width for _ in range(height)])

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def terrain(self, x: int, y: int) -> str:
        return self.tiles[y][x]

    def set_terrain(self, x: int, y: int, kind: str) -> None:
        self.tiles[y][x] = kind

    def objects_at(self, x: int, y: int) -> list[PlacedObject]:
        return [e for e in self.entities if e.x == x and e.y == y]

    def is_walkable(self, x: int, y: int) -> bool:
        if not self.in_bounds(x, y):
            return False
        if self.tiles[y][x] in BLOCKING_TERRAIN:
            return False
        return not any(e.blocking for e in self.entities if e.x == x and e.y == y)

    def walkable_neighbors(self, x: int, y: int) -> Iterator[tuple[int, int]]:
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nx, ny = x + dx, y + dy
            if self.is_walkable(nx, ny):
                yield nx, ny


def _blocked_set(world: TileWorld) -> set[tuple[int, int]]:
    return {(e.x, e.y) for e in world.entities if e.blocking}


def flood_fill(world: TileWorld, start: tuple[int, int]) -> set[tuple[int, int]]:
    """All tiles 4-connected-walkable from ``start`` (inclusive)."""
    return set(bfs_depths(world, start))


def bfs_depths(
    world: TileWorld, start: tuple[int, int]
) -> dict[tuple[int, int], int]:
    """Shortest 4-connected walking distance from ``start`` to every
    reachable tile."""
    blocked = _blocked_set(world)

    def walkable(x: int, y: int) -> bool:
        return (
            world.in_bounds(x, y)
            and world.tiles[y][x] not in BLOCKING_TERRAIN
            and (x, y) not in blocked
        )

    if not walkable(*start):
        return {}
    depths = {start: 0}
    frontier = deque([start])
    while frontier:
        x, y = frontier.popleft()
        d = depths[(x, y)] + 1
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nxt = (x + dx, y + dy)
            if nxt not in depths and walkable(*nxt):
                depths[nxt] = d
                frontier.append(nxt)
    return depths


@dataclass(frozen=True)
class Rect:
    """Axis-aligned tile rectangle, inclusive of x..x+w-1, y..y+h-1."""

    x: int
    y: int
    w: int
    h: int

    @property
    def x2(self) -> int:
        return self.x + self.w - 1

    @property
    def y2(self) -> int:
        return self.y + self.h - 1

    @property
    def center(self) -> tuple[int, int]:
        return (self.x + self.w // 2, self.y + self.h // 2)

    def contains(self, x: int, y: int) -> bool:
        return self.x <= x <= self.x2 and self.y <= y <= self.y2

    def interior(self) -> Iterator[tuple[int, int]]:
        """Tiles strictly inside the 1-tile wall ring."""
        for y in range(self.y + 1, self.y2):
            for x in range(self.x + 1, self.x2):
                yield x, y

    def perimeter(self) -> Iterator[tuple[int, int]]:
        for x in range(self.x, self.x2 + 1):
            yield x, self.y
            yield x, self.y2
        for y in range(self.y + 1, self.y2):
            yield self.x, y
            yield self.x2, y

    def all_tiles(self) -> Iterator[tuple[int, int]]:
        for y in range(self.y, self.y2 + 1):
            for x in range(self.x, self.x2 + 1):
                yield x, y

    def intersects(self, other: "Rect", margin: int = 0) -> bool:
        return not (
            self.x2 + margin < other.x
            or other.x2 + margin < self.x
            or self.y2 + margin < other.y
            or other.y2 + margin < self.y
        )


def region_of(x: int, y: int) -> tuple[int, int]:
    return (x // REGION_SIZE, y // REGION_SIZE)


def chebyshev(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))
