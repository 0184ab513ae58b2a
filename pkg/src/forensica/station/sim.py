"""Turn-based station catastrophe.

Each tick the crew act in stable id order, then the anomaly, then the
dynamic objects (fire, fuel barrels). Crew run a priority ladder over
fresh percepts — seen fire/bodies/anomaly, heard bangs and screams,
radioed facts — accumulating panic that pushes them from the Opening
act into Panic (shelter-seeking) and, once only two remain, into the
Climax act with one of two doomed endgame plans. The anomaly cannot be
killed; the run ends when every crew member is dead.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum

from ..config import GenConfig, StationConfig
from ..rng import RandomStream, derive_stream
from ..world import (
    BLOCKING_TERRAIN,
    DOOR,
    FLOOR,
    RUBBLE,
    SNOW,
    WALL,
    PlacedObject,
    TileWorld,
    chebyshev,
)
from .build import (
    AnomalySpawn,
    CrewMember,
    Profession,
    Room,
    RoomKind,
    Station,
    build_station,
)


class NonConvergenceError(RuntimeError):
    """The simulation hit the tick cap with crew still alive."""


class Act(Enum):
    OPENING = "Opening"
    PANIC = "Panic"
    CLIMAX = "Climax"


class DeathCause(Enum):
    BURNED_BY_ANOMALY = "BurnedByAnomaly"
    FIRE = "Fire"
    EXPOSURE = "Exposure"
    EXPLOSION = "Explosion"


class MessageKind(Enum):
    REPORT = "Report"
    INTENTION = "Intention"
    UPDATE = "Update"


@dataclass
class FateRecord:
    cause: DeathCause
    turn: int
    position: tuple[int, int]


@dataclass
class SimEvent:
    turn: int
    actor: str
    kind: str
    data: dict = field(default_factory=dict)


@dataclass
class MessageRecord:
    """A radio message as emitted by the simulation.

    The body is rendered later (evidence module) from the grammar
    template symbol plus the bindings captured here.
    """

    sender_id: str
    sender_name: str
    turn: int
    kind: MessageKind
    template: str
    bindings: dict[str, str] = field(default_factory=dict)


@dataclass
class Plan:
    kind: str  # idle | investigate | shelter | armory | confront | flee_outside
    goal: tuple[int, int] | None = None
    path: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class CrewAgent:
    member: CrewMember
    position: tuple[int, int]
    alive: bool = True
    panic: float = 0.0
    act: Act = Act.OPENING
    plan: Plan = field(default_factory=lambda: Plan("idle"))
    anomaly_known: bool = False
    armed: bool = False
    turns_outside: int = 0
    fate: FateRecord | None = None
    seen_fires: set[tuple[int, int]] = field(default_factory=set)
    seen_bodies: set[str] = field(default_factory=set)
    heard_index: int = 0  # cursor into the event log


@dataclass
class AnomalyAgent:
    position: tuple[int, int]
    target_id: str | None = None
    turns_since_seen: int = 0
    waypoint: tuple[int, int] | None = None
    shot_this_tick: bool = False


@dataclass
class SimState:
    station: Station
    crew: list[CrewAgent]
    anomaly: AnomalyAgent
    turn: int = 0
    burning: set[tuple[int, int]] = field(default_factory=set)
    ever_burned: set[tuple[int, int]] = field(default_factory=set)
    event_log: list[SimEvent] = field(default_factory=list)
    message_log: list[MessageRecord] = field(default_factory=list)
    climax_turn: int | None = None

    def alive_crew(self) -> list[CrewAgent]:
        return [a for a in self.crew if a.alive]


_NOISY = {"gunshot", "explosion", "scream"}

_PANIC_WEIGHT = {
    "fire": "panic_fire",
    "body": "panic_body",
    "noise": "panic_noise",
    "anomaly": "panic_anomaly",
}


# ---------------------------------------------------------------------------
# Pathfinding


def astar(
    world: TileWorld,
    start: tuple[int, int],
    goal: tuple[int, int],
    blocked: set[tuple[int, int]],
    allow_snow: bool = False,
) -> list[tuple[int, int]] | None:
    """Deterministic A*: ties broken lexicographically on (f, h, x, y).

    Burning tiles go in ``blocked``; fire-adjacent tiles are costed
    normally, on purpose. Returns the path excluding ``start``, or None.
    """

    def passable(x: int, y: int) -> bool:
        if not world.in_bounds(x, y):
            return False
        t = world.tiles[y][x]
        if t in BLOCKING_TERRAIN:
            return False
        if t == SNOW and not allow_snow:
            return False
        return (x, y) not in blocked

    def h(x: int, y: int) -> int:
        return abs(x - goal[0]) + abs(y - goal[1])

    open_heap = [(h(*start), h(*start), start[0], start[1])]
    g_score = {start: 0}
    came: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    while open_heap:
        _, _, x, y = heapq.heappop(open_heap)
        if (x, y) in closed:
            continue
        closed.add((x, y))
        if (x, y) == goal:
            path = [(x, y)]
            while path[-1] in came:
                path.append(came[path[-1]])
            path.reverse()
            return path[1:]
        g = g_score[(x, y)]
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nx, ny = x + dx, y + dy
            if not passable(nx, ny):
                continue
            ng = g + 1
            if ng < g_score.get((nx, ny), 1 << 30):
                g_score[(nx, ny)] = ng
                came[(nx, ny)] = (x, y)
                heapq.heappush(open_heap, (ng + h(nx, ny), h(nx, ny), nx, ny))
    return None


# ---------------------------------------------------------------------------
# Simulation


class StationSimulation:
    def __init__(
        self,
        station: Station,
        crew: list[CrewMember],
        anomaly: AnomalySpawn,
        config: GenConfig,
        stream: RandomStream,
    ) -> None:
        self.cfg: StationConfig = config.station
        self.stream = stream
        self.state = SimState(
            station=station,
            crew=[CrewAgent(member=m, position=m.start_position) for m in crew],
            anomaly=AnomalyAgent(position=anomaly.position),
        )
        self._blocked_scenery = {
            (e.x, e.y) for e in station.grid.entities if e.blocking
        }
        self._barrels = {
            (e.x, e.y): e for e in station.grid.entities if e.kind == "fuel-barrel"
        }
        self._sight_cache: dict[tuple[int, int], set[tuple[int, int]]] = {}

    # -- logging ------------------------------------------------------------

    def _event(self, actor: str, kind: str, **data) -> SimEvent:
        ev = SimEvent(turn=self.state.turn, actor=actor, kind=kind, data=data)
        self.state.event_log.append(ev)
        return ev

    def _radio(
        self, agent: CrewAgent, kind: MessageKind, template: str, **bindings: str
    ) -> None:
        self.state.message_log.append(
            MessageRecord(
                sender_id=agent.member.id,
                sender_name=agent.member.name,
                turn=self.state.turn,
                kind=kind,
                template=template,
                bindings=dict(bindings),
            )
        )
        self._event(agent.member.id, "message", template=template)
        # Radio is station-wide: anomaly sightings put everyone on alert.
        if template == "msg_report_anomaly":
            for other in self.state.alive_crew():
                other.anomaly_known = True

    # -- geometry helpers ---------------------------------------------------

    def _place(self, pos: tuple[int, int]) -> str:
        return self.state.station.place_name(*pos)

    def _sight(self, pos: tuple[int, int]) -> set[tuple[int, int]]:
        cached = self._sight_cache.get(pos)
        if cached is None:
            cached = self.state.station.sight_tiles(*pos)
            self._sight_cache[pos] = cached
        return cached

    def _sees(self, pos: tuple[int, int], other: tuple[int, int]) -> bool:
        return other in self._sight(pos) or chebyshev(pos, other) <= 1

    def _crew_blocked(self) -> set[tuple[int, int]]:
        return self._blocked_scenery | self.state.burning

    def _step_along(self, agent: CrewAgent, allow_snow: bool = False) -> None:
        plan = agent.plan
        if plan.goal is None or agent.position == plan.goal:
            return
        if not plan.path or not self._free_for_crew(plan.path[0], allow_snow):
            path = astar(
                self.state.station.grid,
                agent.position,
                plan.goal,
                self._crew_blocked(),
                allow_snow=allow_snow,
            )
            if path is None:
                return
            plan.path = path
        if plan.path:
            agent.position = plan.path.pop(0)

    def _free_for_crew(self, pos: tuple[int, int], allow_snow: bool) -> bool:
        world = self.state.station.grid
        if not world.in_bounds(*pos):
            return False
        t = world.tiles[pos[1]][pos[0]]
        if t in BLOCKING_TERRAIN or (t == SNOW and not allow_snow):
            return False
        return pos not in self._crew_blocked()

    # -- deaths -------------------------------------------------------------

    def _kill(self, agent: CrewAgent, cause: DeathCause) -> None:
        if not agent.alive:
            return
        agent.alive = False
        agent.fate = FateRecord(
            cause=cause, turn=self.state.turn, position=agent.position
        )
        self._event(
            agent.member.id,
            "death",
            cause=cause.value,
            position=list(agent.position),
        )
        self._event(agent.member.id, "scream", position=list(agent.position))
        alive = len(self.state.alive_crew())
        if self.state.climax_turn is None and alive == 2:
            self.state.climax_turn = self.state.turn
            self._event("sim", "climax")
            for survivor in self.state.alive_crew():
                survivor.act = Act.CLIMAX
                survivor.plan = Plan("idle")

    # -- crew AI ------------------------------------------------------------

    def _perceive(self, agent: CrewAgent) -> None:
        cfg = self.cfg
        seen = self._sight(agent.position) | {agent.position}

        new_fires = (self.state.burning & seen) - agent.seen_fires
        if new_fires:
            agent.seen_fires |= new_fires
            agent.panic += cfg.panic_fire
            spot = min(new_fires)
            self._radio(
                agent, MessageKind.REPORT, "msg_report_fire", PLACE=self._place(spot)
            )

        for other in self.state.crew:
            if other.alive or other.member.id in agent.seen_bodies:
                continue
            if other.fate is not None and other.fate.position in seen:
                agent.seen_bodies.add(other.member.id)
                agent.panic += cfg.panic_body
                self._radio(
                    agent,
                    MessageKind.REPORT,
                    "msg_report_body",
                    NAME=other.member.name,
                    PLACE=self._place(other.fate.position),
                )

        if self._sees(agent.position, self.state.anomaly.position):
            agent.panic += cfg.panic_anomaly
            if not agent.anomaly_known:
                agent.anomaly_known = True
                self._radio(
                    agent,
                    MessageKind.REPORT,
                    "msg_report_anomaly",
                    PLACE=self._place(self.state.anomaly.position),
                )

        # Heard noises since this agent last acted.
        log = self.state.event_log
        noise_source: tuple[int, int] | None = None
        while agent.heard_index < len(log):
            ev = log[agent.heard_index]
            agent.heard_index += 1
            if ev.kind not in _NOISY or ev.actor == agent.member.id:
                continue
            pos = tuple(ev.data.get("position", ()))
            if len(pos) != 2:
                continue
            if chebyshev(agent.position, pos) <= self.cfg.hearing_radius:
                agent.panic += cfg.panic_noise
                noise_source = pos
        if noise_source is not None and agent.act is Act.OPENING:
            if agent.member.profession is Profession.SECURITY_OFFICER:
                agent.plan = Plan("investigate", goal=noise_source)
                self._radio(
                    agent,
                    MessageKind.INTENTION,
                    "msg_intention_investigate",
                    NAME=agent.member.name,
                    PLACE=self._place(noise_source),
                )
            else:
                self._radio(
                    agent,
                    MessageKind.REPORT,
                    "msg_report_noise",
                    PLACE=self._place(noise_source),
                )

    def _shelter_room(self, agent: CrewAgent) -> Room:
        rooms = self.state.station.rooms
        anomaly_room = self.state.station.room_containing(
            *self.state.anomaly.position
        )
        candidates = [
            r
            for r in rooms
            if r is not anomaly_room and not r.rect.contains(*agent.position)
        ]
        return self.stream.choice(candidates or rooms)

    def _room_goal(self, room: Room) -> tuple[int, int]:
        world = self.state.station.grid
        free = [
            t
            for t in room.rect.interior()
            if world.tiles[t[1]][t[0]] == FLOOR
            and t not in self._crew_blocked()
        ]
        return self.stream.choice(free) if free else room.rect.center

    def _shoot(self, agent: CrewAgent) -> None:
        anomaly = self.state.anomaly
        anomaly.shot_this_tick = True
        anomaly.target_id = agent.member.id
        anomaly.turns_since_seen = 0
        self._event(
            agent.member.id, "gunshot", position=list(agent.position)
        )

    def _crew_turn(self, agent: CrewAgent) -> None:
        world = self.state.station.grid
        if world.tiles[agent.position[1]][agent.position[0]] == SNOW:
            agent.turns_outside += 1
        else:
            agent.turns_outside = 0
        if agent.turns_outside > self.cfg.exposure_turn_limit:
            self._kill(agent, DeathCause.EXPOSURE)
            return

        self._perceive(agent)
        if not agent.alive:
            return

        if agent.act is Act.OPENING and agent.anomaly_known:
            agent.act = Act.PANIC
            self._event(agent.member.id, "act_change", act=Act.PANIC.value)

        if agent.act is Act.CLIMAX:
            self._climax_turn(agent)
            return

        anomaly_visible = self._sees(agent.position, self.state.anomaly.position)
        armed = agent.armed or agent.member.profession is Profession.SECURITY_OFFICER
        if anomaly_visible and armed:
            self._shoot(agent)
            # Shooting and backing away are the whole turn.
            agent.plan = Plan("shelter", goal=self._room_goal(self._shelter_room(agent)))
            return

        if anomaly_visible:
            # Run for any room the anomaly is not in.
            agent.plan = Plan("shelter", goal=self._room_goal(self._shelter_room(agent)))
        elif agent.panic >= self.cfg.panic_shelter_threshold and agent.plan.kind not in (
            "shelter",
        ):
            room = self._shelter_room(agent)
            agent.plan = Plan("shelter", goal=self._room_goal(room))
            self._radio(
                agent, MessageKind.INTENTION, "msg_intention_shelter", PLACE=room.name
            )
        elif agent.plan.kind == "idle" and self.stream.chance(0.2):
            # Mill about the current room.
            room = self.state.station.room_containing(*agent.position)
            if room is not None:
                agent.plan = Plan("idle", goal=self._room_goal(room))

        if agent.plan.goal == agent.position:
            agent.plan = Plan(agent.plan.kind)

        self._step_along(agent)

        # Morning check-in on the first turn, sporadic updates after.
        if self.state.turn == 1 or self.stream.chance(0.06):
            if self.stream.chance(self.cfg.update_location_chance):
                self._radio(
                    agent,
                    MessageKind.UPDATE,
                    "msg_update_where",
                    PLACE=self._place(agent.position),
                )
            else:
                self._radio(agent, MessageKind.UPDATE, "msg_update_alive")

    def _climax_turn(self, agent: CrewAgent) -> None:
        station = self.state.station
        if agent.plan.kind not in ("armory", "confront", "flee_outside"):
            if self.stream.chance(0.5):
                office = next(
                    r for r in station.rooms if r.kind is RoomKind.SECURITY_OFFICE
                )
                agent.plan = Plan("armory", goal=self._room_goal(office))
                self._radio(
                    agent,
                    MessageKind.INTENTION,
                    "msg_intention_armory",
                    PLACE=office.name,
                )
            else:
                door = station.entrance_door
                agent.plan = Plan("flee_outside", goal=(door[0], door[1] + 3))
                self._radio(agent, MessageKind.INTENTION, "msg_intention_flee")

        if agent.plan.kind == "flee_outside":
            self._step_along(agent, allow_snow=True)
            if agent.position == agent.plan.goal:
                # Keep trudging south into the snow.
                agent.plan.goal = (agent.position[0], agent.position[1] + 3)
                agent.plan.path = []
            return

        if agent.plan.kind == "armory":
            room = station.room_containing(*agent.position)
            if room is not None and room.kind is RoomKind.SECURITY_OFFICE:
                agent.armed = True
                agent.plan = Plan("confront", goal=self.state.anomaly.position)
            else:
                self._step_along(agent)
                return

        # Confrontation: hunt the anomaly down and shoot on sight.
        agent.plan.goal = self.state.anomaly.position
        agent.plan.path = []
        if self._sees(agent.position, self.state.anomaly.position):
            self._shoot(agent)
        elif chebyshev(agent.position, self.state.anomaly.position) > 1:
            self._step_along(agent)

    # -- anomaly AI ---------------------------------------------------------

    def _anomaly_turn(self) -> None:
        anomaly = self.state.anomaly
        cfg = self.cfg

        # Begin-of-turn kill: one adjacent human combusts.
        adjacent = [
            a
            for a in self.state.alive_crew()
            if chebyshev(a.position, anomaly.position) <= 1
        ]
        if adjacent:
            victim = min(adjacent, key=lambda a: a.member.id)
            self._kill(victim, DeathCause.BURNED_BY_ANOMALY)

        if anomaly.shot_this_tick:
            self._ignite_burst(anomaly.position, cfg.shot_burst_radius)
            anomaly.shot_this_tick = False

        crew_by_id = {a.member.id: a for a in self.state.alive_crew()}
        target = crew_by_id.get(anomaly.target_id or "")
        if target is None:
            anomaly.target_id = None

        visible = [
            a
            for a in self.state.alive_crew()
            if self._sees(anomaly.position, a.position)
        ]
        if target is not None and self._sees(anomaly.position, target.position):
            anomaly.turns_since_seen = 0
        else:
            anomaly.turns_since_seen += 1

        if target is None and visible:
            chosen = min(visible, key=lambda a: a.member.id)
            anomaly.target_id = chosen.member.id
            anomaly.turns_since_seen = 0
            target = chosen

        if anomaly.turns_since_seen > cfg.anomaly_patience:
            # Hint: the location of a random crew member.
            anomaly.target_id = None
            target = None
            alive = self.state.alive_crew()
            if alive:
                mark = self.stream.choice(alive)
                anomaly.waypoint = mark.position
                anomaly.turns_since_seen = 0
                self._event("anomaly", "anomaly_hint", position=list(mark.position))

        goal = target.position if target is not None else anomaly.waypoint
        if goal is not None and goal != anomaly.position:
            path = astar(
                self.state.station.grid,
                anomaly.position,
                goal,
                self._blocked_scenery,
            )
            if path:
                for pos in path[:2]:  # the anomaly covers two tiles a turn
                    anomaly.position = pos
        if anomaly.position == anomaly.waypoint:
            anomaly.waypoint = None

        if self.stream.chance(cfg.anomaly_self_ignite_chance):
            self._ignite(anomaly.position)

    # -- dynamics -----------------------------------------------------------

    def _can_burn(self, pos: tuple[int, int]) -> bool:
        world = self.state.station.grid
        if not world.in_bounds(*pos):
            return False
        return world.tiles[pos[1]][pos[0]] in (FLOOR, DOOR, RUBBLE)

    def _ignite(self, pos: tuple[int, int]) -> None:
        if not self._can_burn(pos) or pos in self.state.burning:
            return
        self.state.burning.add(pos)
        self.state.ever_burned.add(pos)
        self._event("fire", "fire_ignite", position=list(pos))

    def _ignite_burst(self, center: tuple[int, int], radius: int) -> None:
        for dy in range(-radius, radius + 1):
            for dx in range(-radius, radius + 1):
                self._ignite((center[0] + dx, center[1] + dy))

    def _explode_barrel(self, pos: tuple[int, int]) -> None:
        barrel = self._barrels.pop(pos, None)
        if barrel is None:
            return
        world = self.state.station.grid
        world.entities.remove(barrel)
        self._blocked_scenery.discard(pos)
        self._event("barrel", "explosion", position=list(pos))
        radius = self.cfg.shot_burst_radius
        chained = []
        for dy in range(-radius, radius + 1):
            for dx in range(-radius, radius + 1):
                bx, by = pos[0] + dx, pos[1] + dy
                if not world.in_bounds(bx, by):
                    continue
                if world.tiles[by][bx] == WALL:
                    world.set_terrain(bx, by, RUBBLE)
                self._ignite((bx, by))
                if (bx, by) in self._barrels:
                    chained.append((bx, by))
        for agent in self.state.alive_crew():
            if chebyshev(agent.position, pos) <= radius:
                self._kill(agent, DeathCause.EXPLOSION)
        for chain_pos in chained:
            self._explode_barrel(chain_pos)

    def _dynamics_turn(self) -> None:
        cfg = self.cfg
        # Spread, in stable tile order.
        for pos in sorted(self.state.burning):
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    if dx == 0 and dy == 0:
                        continue
                    nxt = (pos[0] + dx, pos[1] + dy)
                    if self._can_burn(nxt) and nxt not in self.state.burning:
                        if self.stream.chance(cfg.fire_spread_chance):
                            self._ignite(nxt)
        # Barrels adjacent to flame explode.
        for pos in sorted(self._barrels):
            near = any(
                (pos[0] + dx, pos[1] + dy) in self.state.burning
                for dx in (-1, 0, 1)
                for dy in (-1, 0, 1)
            )
            if near:
                self._explode_barrel(pos)
        # Standing in flames is lethal.
        for agent in self.state.alive_crew():
            if agent.position in self.state.burning:
                self._kill(agent, DeathCause.FIRE)
        # Burnout.
        for pos in sorted(self.state.burning):
            if self.stream.chance(cfg.fire_burnout_chance):
                self.state.burning.discard(pos)
                self._event("fire", "fire_out", position=list(pos))

    # -- driver -------------------------------------------------------------

    def step(self) -> None:
        self.state.turn += 1
        for agent in self.state.crew:
            if agent.alive:
                self._crew_turn(agent)
        self._anomaly_turn()
        self._dynamics_turn()

    def run(self) -> SimState:
        while self.state.alive_crew():
            if self.state.turn >= self.cfg.tick_cap:
                alive = [
                    (a.member.id, a.member.name, a.position, a.plan.kind)
                    for a in self.state.alive_crew()
                ]
                raise NonConvergenceError(
                    f"tick cap {self.cfg.tick_cap} hit; survivors: {alive}; "
                    f"anomaly at {self.state.anomaly.position}"
                )
            self.step()
        self._finalize()
        return self.state

    def _finalize(self) -> None:
        """Persist the catastrophe into the tile world; remove the anomaly."""
        world = self.state.station.grid
        for pos in sorted(self.state.ever_burned):
            world.entities.append(
                PlacedObject(
                    x=pos[0],
                    y=pos[1],
                    kind="scorch-mark",
                    description_key="burned_floor",
                )
            )
        for agent in self.state.crew:
            fate = agent.fate
            assert fate is not None
            world.entities.append(
                PlacedObject(
                    x=fate.position[0],
                    y=fate.position[1],
                    kind="body",
                    description_key=f"crew_{agent.member.profession.value}",
                    props={
                        "crew_id": agent.member.id,
                        "text": agent.member.description,
                    },
                )
            )
        self.state.burning.clear()


def run_station_sim(seed: int, config: GenConfig) -> SimState:
    """Build a station and run its catastrophe to the all-dead state."""
    station, crew, anomaly = build_station(seed, config)
    stream = derive_stream(seed, "station.sim")
    sim = StationSimulation(station, crew, anomaly, config, stream)
    return sim.run()
