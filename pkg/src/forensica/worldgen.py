"""End-to-end world generation for both games.

Bundles the per-game pipelines (simulate, render, evidence) into single
artifacts that the session, serialization, CLI, and service layers all
share.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import GenConfig
from .evidence import RadioMessage, Terminal, build_evidence
from .grammar import DynamicContext, village_context
from .station.build import CrewMember, Station
from .station.sim import FateRecord, run_station_sim
from .village.render import VillageWorld, render_village
from .village.sim import VillageHistory, run_village
from .world import TileWorld


@dataclass
class VillageArtifact:
    seed: int
    config: GenConfig
    world: TileWorld
    village: VillageWorld
    history: VillageHistory | None

    @property
    def game(self) -> str:
        return "Village"

    @property
    def context(self) -> DynamicContext:
        return self.village.context


@dataclass
class StationArtifact:
    seed: int
    config: GenConfig
    world: TileWorld
    station: Station
    crew: list[CrewMember]
    fates: dict[str, FateRecord]
    messages: list[RadioMessage]
    terminals: list[Terminal]
    start_minutes: int
    tick_count: int
    manifest: list[str] | None = None

    @property
    def game(self) -> str:
        return "Station"

    @property
    def context(self) -> DynamicContext:
        return DynamicContext({})

    def crew_manifest(self) -> list[str]:
        """Public roster: who was stationed here, alphabetical."""
        if self.manifest is not None:
            return list(self.manifest)
        return sorted(m.name for m in self.crew)


def generate_village(seed: int, config: GenConfig | None = None) -> VillageArtifact:
    config = config or GenConfig()
    history = run_village(seed, config)
    village = render_village(history, seed, config)
    return VillageArtifact(
        seed=seed,
        config=config,
        world=village.world,
        village=village,
        history=history,
    )


def generate_station(seed: int, config: GenConfig | None = None) -> StationArtifact:
    config = config or GenConfig()
    state = run_station_sim(seed, config)
    messages, terminals, start_minutes = build_evidence(state, seed, config)
    return StationArtifact(
        seed=seed,
        config=config,
        world=state.station.grid,
        station=state.station,
        crew=[a.member for a in state.crew],
        fates={a.member.id: a.fate for a in state.crew},
        messages=messages,
        terminals=terminals,
        start_minutes=start_minutes,
        tick_count=state.turn,
    )
