"""Abstract village-collapse simulation.

Two coupled models: an ecosystem (temperature, hostile fauna, ecosystem
health, each capped and drift-limited) and a society (population,
working-age count, food store, plus cultural colour that only the
renderer consumes). Each tick runs the same fixed sequence of checks
until one of three endings fires: ecosystem collapse, overrun by
predators, or famine.

Draw order per tick is part of the reproducibility contract:
  1. temperature drift   uniform(-cap, +cap)
  2. fauna drift         uniform(-cap, +cap)
  3. damage roll         chance(clamp01(base + coeff * T))
  4. damage amount       uniform(0, eco max_drift)   (only if 3 hit)
No other draws occur; population/food updates are deterministic given
the states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..config import GenConfig, VillageSimConfig
from ..rng import RandomStream, derive_stream


class IllegalStateError(RuntimeError):
    """An operation was applied to a simulation that already ended."""


class NonConvergenceError(RuntimeError):
    """The simulation exceeded its hard tick limit without an ending."""


class Ending(str, Enum):
    ECOSYSTEM_COLLAPSE = "EcosystemCollapse"
    OVERRUN_BY_PREDATORS = "OverrunByPredators"
    FAMINE = "Famine"


def clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


@dataclass
class EcosystemState:
    temperature: float
    hostile_fauna: float
    eco_health: float


@dataclass
class CultureProfile:
    craft_material: str
    sacred_number: int
    cultivated_flower: str


@dataclass
class SocietyState:
    population: float
    working_age: float
    food_store: float
    culture: CultureProfile


@dataclass
class VillageEnding:
    kind: Ending
    tick_of_collapse: int


@dataclass
class VillageHistory:
    ending: VillageEnding
    final_eco: EcosystemState
    final_society: SocietyState
    birth_trace: list[float]  # net population delta per tick
    tick_count: int


def init_village(
    stream: RandomStream, config: VillageSimConfig
) -> tuple[EcosystemState, SocietyState]:
    """Draw starting states. Culture fields are uniform draws; they only
    matter to the renderer."""
    config.validate()
    eco = EcosystemState(
        temperature=stream.uniform(
            config.temperature.start_min, config.temperature.start_max
        ),
        hostile_fauna=stream.uniform(
            config.hostile_fauna.start_min, config.hostile_fauna.start_max
        ),
        eco_health=stream.uniform(
            config.eco_health.start_min, config.eco_health.start_max
        ),
    )
    population = float(
        stream.randint(config.start_population_min, config.start_population_max)
    )
    culture = CultureProfile(
        craft_material=stream.choice(config.craft_materials),
        sacred_number=stream.randint(
            config.sacred_number_min, config.sacred_number_max
        ),
        cultivated_flower=stream.choice(config.flowers),
    )
    society = SocietyState(
        population=population,
        working_age=population * config.working_age_fraction,
        food_store=stream.uniform(config.start_food_min, config.start_food_max),
        culture=culture,
    )
    return eco, society


class VillageSimulation:
    """Owns the two states and the tick loop. Single-owner, stateful."""

    def __init__(self, stream: RandomStream, config: VillageSimConfig) -> None:
        self.config = config
        self.stream = stream
        self.eco, self.society = init_village(stream, config)
        self.tick = 0
        self.ending: VillageEnding | None = None
        self.birth_trace: list[float] = []

    def step(self) -> VillageEnding | None:
        """Run one tick; returns the ending if one fired, else None."""
        if self.ending is not None:
            raise IllegalStateError("step() after the simulation ended")
        cfg = self.config
        eco, soc = self.eco, self.society
        self.tick += 1
        pop_before = soc.population

        # 1-2. Temperature and hostile fauna fluctuate randomly.
        t = cfg.temperature
        eco.temperature = clamp(
            eco.temperature + self.stream.uniform(-t.max_drift, t.max_drift),
            t.min_cap,
            t.max_cap,
        )
        f = cfg.hostile_fauna
        eco.hostile_fauna = clamp(
            eco.hostile_fauna + self.stream.uniform(-f.max_drift, f.max_drift),
            f.min_cap,
            f.max_cap,
        )

        # 3. Ecosystem damage, chance rising with temperature.
        p = clamp(cfg.damage_base + cfg.damage_temp_coeff * eco.temperature, 0.0, 1.0)
        if self.stream.chance(p):
            dmg = self.stream.uniform(0.0, cfg.eco_health.max_drift)
            eco.eco_health -= dmg
        if eco.eco_health <= 0.0:
            eco.eco_health = 0.0
            return self._end(Ending.ECOSYSTEM_COLLAPSE)
        eco.eco_health = clamp(
            eco.eco_health, cfg.eco_health.min_cap, cfg.eco_health.max_cap
        )

        # 4. Predation.
        soc.population -= eco.hostile_fauna * cfg.fauna_kill_rate
        if soc.population <= 0.0:
            soc.population = 0.0
            soc.working_age = 0.0
            self.birth_trace.append(soc.population - pop_before)
            return self._end(Ending.OVERRUN_BY_PREDATORS)

        # 5. Births from crop surplus. Rate scales with population and
        # saturates with per-capita surplus, so a decimated village
        # cannot rebound instantly.
        surplus = soc.food_store - soc.population * cfg.food_per_person
        per_capita = max(0.0, surplus) / max(soc.population, 1.0)
        births = cfg.birth_rate * soc.population * min(1.0, per_capita)
        soc.population += births
        soc.working_age = soc.population * cfg.working_age_fraction
        self.birth_trace.append(soc.population - pop_before)

        # 6. Crops grow or shrink with temperature and population.
        grown = (
            cfg.crop_yield_per_worker
            * soc.working_age ** cfg.labor_exponent
            * (1.0 - cfg.crop_eco_coupling * (1.0 - eco.eco_health))
            * (1.0 - cfg.crop_temp_penalty * eco.temperature)
        )
        soc.food_store += grown - soc.population * cfg.food_per_person
        soc.food_store = min(soc.food_store, cfg.food_store_cap)
        if soc.food_store <= 0.0:
            soc.food_store = 0.0
            return self._end(Ending.FAMINE)
        return None

    def _end(self, kind: Ending) -> VillageEnding:
        self.ending = VillageEnding(kind=kind, tick_of_collapse=self.tick)
        return self.ending

    def run(self) -> VillageHistory:
        while self.ending is None:
            if self.tick >= self.config.tick_limit:
                raise NonConvergenceError(
                    f"no ending after {self.config.tick_limit} ticks"
                )
            self.step()
        return VillageHistory(
            ending=self.ending,
            final_eco=self.eco,
            final_society=self.society,
            birth_trace=self.birth_trace,
            tick_count=self.tick,
        )


def run_village(seed: int, config: GenConfig) -> VillageHistory:
    """Simulate one village to collapse. Pure function of (seed, config)."""
    stream = derive_stream(seed, "village.sim")
    return VillageSimulation(stream, config.village).run()
