"""Radio traffic becomes placed evidence.

The simulation's message log is stamped with clock times (one turn =
one minute past a random morning start), rendered to text through the
station grammar, and a chronological subset is written onto terminals
placed so that walking deeper from the entrance reads the catastrophe
roughly in order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import GenConfig
from .errors import GenerationRetry
from .grammar import DynamicContext, Grammar
from .rng import RandomStream, derive_stream
from .station.build import Station
from .station.sim import MessageKind, MessageRecord, SimState
from .world import FLOOR, WALL, PlacedObject, bfs_depths


class EvidenceIntegrityError(RuntimeError):
    """The simulation emitted a message from a dead sender."""


@dataclass
class RadioMessage:
    sender_id: str
    sender_name: str
    turn: int
    timestamp: str
    kind: MessageKind
    body: str
    optional_reply: str | None = None


@dataclass
class Terminal:
    position: tuple[int, int]
    message: RadioMessage
    depth: int


def format_clock(start_minutes: int, turn: int) -> str:
    """12-hour clock string for ``turn`` minutes past the start time."""
    total = (start_minutes + turn) % (24 * 60)
    hour24, minute = divmod(total, 60)
    suffix = "am" if hour24 < 12 else "pm"
    hour12 = hour24 % 12 or 12
    return f"{hour12}:{minute:02d} {suffix}"


def stamp_messages(
    log: list[MessageRecord],
    start_minutes: int,
    fate_turns: dict[str, int],
    grammar: Grammar,
    stream: RandomStream,
) -> list[RadioMessage]:
    """Render and timestamp every message in the log.

    A message recorded after its sender's death is a simulation bug and
    is rejected outright.
    """
    messages: list[RadioMessage] = []
    for record in log:
        fate_turn = fate_turns[record.sender_id]
        if record.turn > fate_turn:
            raise EvidenceIntegrityError(
                f"{record.sender_id} radioed on turn {record.turn} "
                f"but died on turn {fate_turn}"
            )
        raw = grammar.expand(record.template, stream)
        text = DynamicContext(record.bindings).substitute(raw)
        body, sep, reply = text.partition(" -- ")
        messages.append(
            RadioMessage(
                sender_id=record.sender_id,
                sender_name=record.sender_name,
                turn=record.turn,
                timestamp=format_clock(start_minutes, record.turn),
                kind=record.kind,
                body=body,
                optional_reply=reply if sep else None,
            )
        )
    return messages


def _select_messages(
    messages: list[RadioMessage], fate_turns: dict[str, int], count: int
) -> list[RadioMessage]:
    """Chronological subset of ``count`` messages whose senders outlived
    them, dropping low-information messages first.

    Every crew member keeps at least one message when they have any, so
    each sender's liveness can be established from the terminals.
    """
    usable = [m for m in messages if fate_turns[m.sender_id] > m.turn]
    if len(usable) <= count:
        return usable

    keep: set[int] = set()
    last_by_sender: dict[str, int] = {}
    for i, msg in enumerate(usable):
        last_by_sender[msg.sender_id] = i
    keep.update(last_by_sender.values())

    def info_rank(msg: RadioMessage) -> int:
        # Higher = kept longer. Updates carry liveness; reports carry
        # the story; repeated chatter goes first.
        return {
            MessageKind.REPORT: 2,
            MessageKind.INTENTION: 1,
            MessageKind.UPDATE: 3,
        }[msg.kind]

    ranked = sorted(
        (i for i in range(len(usable)) if i not in keep),
        key=lambda i: (info_rank(usable[i]), i),
        reverse=True,
    )
    for i in ranked:
        if len(keep) >= count:
            break
        keep.add(i)
    chosen = sorted(keep)[:count] if len(keep) > count else sorted(keep)
    return [usable[i] for i in sorted(chosen)]


def terminal_positions(station: Station) -> dict[tuple[int, int], int]:
    """Wall-adjacent, walkable floor tiles with their entrance depth."""
    depths = bfs_depths(station.grid, station.entrance_door)
    world = station.grid
    out: dict[tuple[int, int], int] = {}
    for (x, y), depth in depths.items():
        if world.tiles[y][x] != FLOOR:
            continue
        # Scorch marks are floor decals; a terminal can stand on one.
        # Blocking furniture and bodies keep the tile off-limits.
        if any(
            e.x == x and e.y == y and (e.blocking or e.kind == "body")
            for e in world.entities
        ):
            continue
        if any(
            world.in_bounds(x + dx, y + dy)
            and world.tiles[y + dy][x + dx] == WALL
            for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0))
        ):
            out[(x, y)] = depth
    return out


def place_terminals(
    station: Station,
    messages: list[RadioMessage],
    fate_turns: dict[str, int],
    stream: RandomStream,
    config: GenConfig,
) -> list[Terminal]:
    """Distribute a chronological message subset over the station so
    terminal depth from the entrance tracks message time."""
    cfg = config.station
    floor_count = len(station.floor_tiles())
    budget = max(cfg.terminal_min, floor_count // cfg.terminal_tile_divisor)
    candidates = terminal_positions(station)
    if len(candidates) < 3:
        raise GenerationRetry("fewer than 3 valid terminal positions")

    count = min(len(messages), budget, len(candidates))
    chosen = _select_messages(messages, fate_turns, count)
    chosen.sort(key=lambda m: m.turn)
    count = len(chosen)
    if count == 0:
        return []

    by_depth = sorted(candidates.items(), key=lambda kv: (kv[1], kv[0]))
    # Spread the picks across the full depth range.
    step = len(by_depth) / count
    picks = [by_depth[min(int(i * step), len(by_depth) - 1)] for i in range(count)]

    terminals: list[Terminal] = []
    for (pos, depth), message in zip(picks, chosen):
        terminals.append(Terminal(position=pos, message=message, depth=depth))
        station.grid.entities.append(
            PlacedObject(
                x=pos[0],
                y=pos[1],
                kind="terminal",
                description_key="terminal",
                props={"terminal_index": len(terminals) - 1},
            )
        )
    return terminals


def build_evidence(
    state: SimState, seed: int, config: GenConfig
) -> tuple[list[RadioMessage], list[Terminal], int]:
    """Stamp, render, and place the whole evidence layer for one run."""
    cfg = config.station
    stream = derive_stream(seed, "station.evidence")
    start_minutes = (
        stream.randint(cfg.start_hour_min, cfg.start_hour_max) * 60
        + stream.randint(0, 59)
    )
    grammar = Grammar.from_package_content("station_grammar.json")
    fate_turns = {a.member.id: a.fate.turn for a in state.crew}
    messages = stamp_messages(
        state.message_log, start_minutes, fate_turns, grammar, stream
    )
    terminals = place_terminals(state.station, messages, fate_turns, stream, config)
    return messages, terminals, start_minutes
