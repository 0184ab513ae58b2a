"""Batch tooling: generate, calibrate, validate, trace, and headless play.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
The ``play`` command is deliberately minimal — a glyph grid plus a text
command loop — and can be driven by a script file for deterministic
transcripts. Ground truth is only revealed with ``--reveal``, which is
refused unless FORENSICA_TEST=1 is set.
"""

from __future__ import annotations

import collections
import json
import os
import sys
from importlib import resources

import click

from .config import GenConfig, InvalidConfigError
from .errors import GenerationError
from .rng import parse_seed
from .session import FateReport, GameSession, IllegalStateError, OutOfReachError, Phase, ReportEntry
from .village.sim import Ending, run_village
from .wire import (
    FILE_SUFFIX,
    CorruptWorldError,
    WireFormatError,
    parse_world,
    serialize_world,
    strip_ground_truth,
    to_bundle,
)
from .worldgen import generate_station, generate_village

GAMES = ("village", "station")


def load_glyphs() -> dict:
    blob = resources.files("forensica.content").joinpath("glyphs.json").read_text()
    return json.loads(blob)


def _load_config(path: str | None) -> GenConfig:
    try:
        return GenConfig.load(path) if path else GenConfig()
    except (InvalidConfigError, OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad config: {exc}")


class SeedType(click.ParamType):
    name = "seed"

    def convert(self, value, param, ctx):
        try:
            return parse_seed(str(value))
        except ValueError:
            self.fail(f"{value!r} is not a decimal or 0x-hex seed", param, ctx)


SEED = SeedType()


@click.group()
def main() -> None:
    """Seed-deterministic forensic worlds: generate, inspect, play."""


@main.command()
@click.argument("game", type=click.Choice(GAMES))
@click.option("--seed", type=SEED, required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--public", is_flag=True, help="Strip the sealed ground truth.")
@click.option("--json", "as_json", is_flag=True)
def generate(game, seed, config_path, out_path, public, as_json) -> None:
    """Generate one world and write it to a bundle file."""
    config = _load_config(config_path)
    try:
        artifact = (generate_village if game == "village" else generate_station)(
            seed, config
        )
    except GenerationError as exc:
        click.echo(f"generation failed: {exc}", err=True)
        sys.exit(1)
    bundle = to_bundle(artifact)
    if public:
        bundle = strip_ground_truth(bundle)
    out_path = out_path or f"{game}_{seed}{FILE_SUFFIX}"
    with open(out_path, "wb") as fh:
        fh.write(serialize_world(bundle))
    if game == "village":
        summary = {"game": game, "seed": seed, "out": out_path,
                   "ending": artifact.history.ending.kind.value,
                   "ticks": artifact.history.tick_count}
        line = (f"village seed={seed} ending={summary['ending']} "
                f"ticks={summary['ticks']} -> {out_path}")
    else:
        summary = {"game": game, "seed": seed, "out": out_path,
                   "crew": len(artifact.crew),
                   "terminals": len(artifact.terminals)}
        line = (f"station seed={seed} crew={summary['crew']} "
                f"terminals={summary['terminals']} -> {out_path}")
    click.echo(json.dumps(summary) if as_json else line)


@main.command()
@click.argument("game", type=click.Choice(GAMES))
@click.option("-n", "--runs", type=int, default=500, show_default=True)
@click.option("--seed-base", type=SEED, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--suggest", is_flag=True, help="Print parameter nudges.")
@click.option("--json", "as_json", is_flag=True)
def calibrate(game, runs, seed_base, config_path, suggest, as_json) -> None:
    """Run many simulations and print the outcome distribution."""
    if runs < 1:
        raise click.UsageError("--runs must be >= 1")
    config = _load_config(config_path)
    counts: collections.Counter = collections.Counter()
    if game == "village":
        for i in range(runs):
            counts[run_village(seed_base + i, config).ending.kind.value] += 1
        labels = [e.value for e in Ending]
    else:
        from .station.sim import run_station_sim

        for i in range(runs):
            state = run_station_sim(seed_base + i, config)
            for agent in state.crew:
                counts[agent.fate.cause.value] += 1
        labels = sorted(counts)
    total = sum(counts.values())
    table = {label: {"count": counts.get(label, 0),
                     "frequency": counts.get(label, 0) / total}
             for label in labels}
    if as_json:
        click.echo(json.dumps({"runs": runs, "table": table}))
    else:
        for label, row in table.items():
            click.echo(f"{label:20s} {row['count']:6d}  {row['frequency']:.3f}")
    if suggest and game == "village":
        freqs = {e.value: table.get(e.value, {"frequency": 0})["frequency"]
                 for e in Ending}
        nudges = []
        if freqs["EcosystemCollapse"] < 1 / 3:
            nudges.append("raise village.damage_temp_coeff by ~5%")
        else:
            nudges.append("lower village.damage_temp_coeff by ~5%")
        if freqs["OverrunByPredators"] < 1 / 3:
            nudges.append("raise village.fauna_kill_rate by ~5%")
        else:
            nudges.append("lower village.fauna_kill_rate by ~5%")
        if freqs["Famine"] < 1 / 3:
            nudges.append("lower village.crop_yield_per_worker by ~2%")
        else:
            nudges.append("raise village.crop_yield_per_worker by ~2%")
        for n in nudges:
            click.echo(f"suggest: {n}")


@main.command()
@click.argument("world_path", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def validate(world_path, as_json) -> None:
    """Parse a bundle and re-check every world invariant."""
    try:
        artifact = parse_world(open(world_path, "rb").read())
    except (WireFormatError, CorruptWorldError) as exc:
        if as_json:
            click.echo(json.dumps({"ok": False, "error": str(exc)}))
        else:
            click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    result = {"ok": True, "game": artifact.game, "seed": artifact.seed}
    click.echo(json.dumps(result) if as_json else
               f"ok: {artifact.game} world, seed {artifact.seed}")


@main.command()
@click.argument("game", type=click.Choice(GAMES))
@click.option("--seed", type=SEED, required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def trace(game, seed, config_path, out_path) -> None:
    """Dump a simulation's full event log as JSON lines."""
    config = _load_config(config_path)
    lines = []
    if game == "village":
        history = run_village(seed, config)
        lines.append({"kind": "ending",
                      "ending": history.ending.kind.value,
                      "tick": history.ending.tick_of_collapse})
        for i, delta in enumerate(history.birth_trace):
            lines.append({"kind": "population_delta", "tick": i, "delta": delta})
    else:
        from .station.sim import run_station_sim

        state = run_station_sim(seed, config)
        for ev in state.event_log:
            lines.append({"turn": ev.turn, "actor": ev.actor,
                          "kind": ev.kind, **ev.data})
    text = "\n".join(json.dumps(line) for line in lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def render_grid(session: GameSession, glyphs: dict, full: bool = False) -> str:
    """Glyph view of the discovered (or whole, in test mode) world."""
    world = session.world
    object_glyphs = glyphs["objects"]
    terrain_glyphs = glyphs["terrain"]
    top: dict[tuple[int, int], str] = {}
    for e in world.entities:
        top[(e.x, e.y)] = object_glyphs.get(e.kind, "?")
    rows = []
    shown = session.discovered
    for y in range(world.height):
        row = []
        for x in range(world.width):
            if (x, y) == session.player_pos:
                row.append(glyphs["player"])
            elif full or (x, y) in shown:
                row.append(top.get((x, y)) or terrain_glyphs[world.terrain(x, y)])
            else:
                row.append(" ")
        rows.append("".join(row).rstrip())
    return "\n".join(rows)


_MOVE_KEYS = {"w": "n", "a": "w", "s": "s", "d": "e"}


@main.command()
@click.argument("world_path", type=click.Path(exists=True))
@click.option("--script", "script_path", type=click.Path(exists=True), default=None,
              help="File of commands to replay instead of stdin.")
@click.option("--reveal", is_flag=True,
              help="Allow the 'reveal' command (requires FORENSICA_TEST=1).")
def play(world_path, script_path, reveal) -> None:
    """Play a world file in the terminal."""
    if reveal and os.environ.get("FORENSICA_TEST") != "1":
        raise click.UsageError("--reveal requires FORENSICA_TEST=1")
    try:
        artifact = parse_world(open(world_path, "rb").read())
    except (WireFormatError, CorruptWorldError) as exc:
        click.echo(f"invalid world: {exc}", err=True)
        sys.exit(1)
    session = GameSession(artifact)
    glyphs = load_glyphs()
    draft = FateReport()

    if script_path:
        commands = open(script_path, encoding="utf-8").read().splitlines()
    else:
        commands = None  # interactive

    click.echo(f"{artifact.game} world, seed {artifact.seed}. "
               "Commands: w/a/s/d face look inspect read report submit quit")

    def next_command():
        if commands is not None:
            return commands.pop(0) if commands else None
        try:
            return click.prompt(">", prompt_suffix=" ", default="", show_default=False)
        except (EOFError, click.Abort):
            return None

    while True:
        raw = next_command()
        if raw is None or raw.strip() == "quit":
            break
        parts = raw.strip().split()
        if not parts:
            continue
        cmd, args = parts[0], parts[1:]
        try:
            if cmd in _MOVE_KEYS:
                result = session.move(_MOVE_KEYS[cmd])
                if result.text:
                    click.echo(result.text)
            elif cmd == "face" and args:
                session.face(args[0])
            elif cmd == "look":
                click.echo(render_grid(session, glyphs))
            elif cmd == "inspect" and len(args) == 2:
                click.echo(session.inspect(int(args[0]), int(args[1])))
            elif cmd == "read" and len(args) == 2:
                msg = session.read_terminal(int(args[0]), int(args[1]))
                click.echo(f"[{msg.timestamp}] {msg.sender_name}: {msg.body}")
                if msg.optional_reply:
                    click.echo(f"    reply: {msg.optional_reply}")
            elif cmd == "report" and len(args) >= 3:
                body_id, name, cause = args[0], args[1], args[2]
                draft.entries[body_id] = ReportEntry(name, cause)
                click.echo(f"noted: {body_id} = {name}, {cause}")
            elif cmd == "submit":
                result = session.submit_report(draft)
                click.echo(f"score: {result['score']}")
                click.echo(json.dumps(result["ground_truth"], sort_keys=True))
            elif cmd == "reveal":
                if not reveal:
                    click.echo("reveal is disabled; run with --reveal")
                else:
                    truth = to_bundle(artifact).get("ground_truth", {})
                    click.echo(json.dumps(truth, sort_keys=True))
            else:
                click.echo(f"unknown command: {raw.strip()}")
        except (OutOfReachError, IllegalStateError, ValueError) as exc:
            click.echo(f"error: {exc}")

    if session.is_station and session.phase is Phase.SUBMITTED:
        click.echo(f"final score: {session.score}")
    else:
        summary = session.quit_summary()
        click.echo(
            f"explored {summary['tiles_discovered']} tiles, "
            f"inspected {summary['objects_inspected']} objects, "
            f"read {summary['terminals_read']} terminals"
        )


if __name__ == "__main__":
    main()
