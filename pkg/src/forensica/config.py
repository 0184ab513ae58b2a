"""All tunable generation parameters, with committed defaults.

The village defaults were produced by the repo's own `forensica
calibrate` run (see content/calibration_log.json) so that the three
collapse endings come out roughly balanced over 500 runs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass


class InvalidConfigError(ValueError):
    """A config field or range is unusable; message names the field."""


@dataclass
class VarSpec:
    """One bounded simulation variable: start range, caps, drift cap."""

    start_min: float
    start_max: float
    min_cap: float
    max_cap: float
    max_drift: float

    def validate(self, name: str) -> None:
        if self.start_min > self.start_max:
            raise InvalidConfigError(f"{name}.start_min > start_max")
        if self.min_cap > self.max_cap:
            raise InvalidConfigError(f"{name}.min_cap > max_cap")
        if not (self.min_cap <= self.start_min and self.start_max <= self.max_cap):
            raise InvalidConfigError(f"{name}: start range outside caps")
        if self.max_drift < 0:
            raise InvalidConfigError(f"{name}.max_drift negative")


CRAFT_MATERIALS = ["wood", "stone", "bone", "copper", "clay"]
FLOWERS = ["marigold", "iris", "poppy", "jasmine", "chrysanthemum", "lotus"]


@dataclass
class VillageSimConfig:
    temperature: VarSpec = field(
        default_factory=lambda: VarSpec(0.35, 0.65, 0.0, 1.0, 0.05)
    )
    hostile_fauna: VarSpec = field(
        default_factory=lambda: VarSpec(0.2, 0.5, 0.0, 1.0, 0.07)
    )
    eco_health: VarSpec = field(
        default_factory=lambda: VarSpec(0.75, 1.0, 0.0, 1.0, 0.165)
    )
    start_population_min: int = 60
    start_population_max: int = 110
    working_age_fraction: float = 0.55
    start_food_min: float = 90.0
    start_food_max: float = 150.0
    # Chance of ecosystem damage: clamp01(damage_base + damage_temp_coeff * T)
    damage_base: float = -0.22
    damage_temp_coeff: float = 0.64
    # Villagers killed per tick per unit of fauna intensity.
    fauna_kill_rate: float = 2.63
    # Birth rate per person per tick, scaled by saturating per-capita
    # food surplus.
    birth_rate: float = 0.0145
    food_per_person: float = 1.0
    # Food delta: yield * workers^labor_exponent
    #             * (1 - eco_coupling * (1 - eco)) * (1 - temp_penalty * T)
    #             - population consumption.
    # Sub-linear labor returns mean a growing village can outgrow its
    # fields, giving famine its own clock instead of merely trailing
    # ecosystem decline.
    crop_yield_per_worker: float = 4.19
    crop_temp_penalty: float = 0.13
    crop_eco_coupling: float = 0.07
    labor_exponent: float = 0.8
    food_store_cap: float = 250.0  # granary capacity; surplus beyond it rots
    sacred_number_min: int = 3
    sacred_number_max: int = 9
    craft_materials: list[str] = field(default_factory=lambda: list(CRAFT_MATERIALS))
    flowers: list[str] = field(default_factory=lambda: list(FLOWERS))
    tick_limit: int = 10000

    def validate(self) -> None:
        self.temperature.validate("temperature")
        self.hostile_fauna.validate("hostile_fauna")
        self.eco_health.validate("eco_health")
        if self.start_population_min > self.start_population_max:
            raise InvalidConfigError("start_population_min > start_population_max")
        if self.start_food_min > self.start_food_max:
            raise InvalidConfigError("start_food_min > start_food_max")
        if self.sacred_number_min > self.sacred_number_max:
            raise InvalidConfigError("sacred_number_min > sacred_number_max")
        if not (3 <= self.sacred_number_min and self.sacred_number_max <= 9):
            raise InvalidConfigError("sacred_number range must lie in [3, 9]")
        if len(self.flowers) < 5:
            raise InvalidConfigError("flowers: need at least 5 entries")
        if self.tick_limit < 1:
            raise InvalidConfigError("tick_limit must be >= 1")


@dataclass
class VillageRenderConfig:
    # Lakes: count and per-lake area both scale with final eco health.
    lake_count_min: int = 1
    lake_count_max: int = 4
    lake_area_min: int = 8
    lake_area_max: int = 60
    large_water_min: int = 100  # total water tiles at eco_health = max
    statue_fragment_min: int = 4
    statue_fragment_max: int = 9
    statue_scatter_radius: int = 6
    # Worship hall footprint; "near the statue" = within this Chebyshev range.
    hall_w: int = 20
    hall_h: int = 10
    hall_search_radius: int = 15
    road_budget_min: int = 6
    road_budget_max: int = 14
    branch_chance: float = 0.28
    house_chance: float = 0.5  # chance each road tile sprouts a building
    house_w_min: int = 4
    house_w_max: int = 7
    house_h_min: int = 4
    house_h_max: int = 6
    # Barn/field replacement: clamp01(base + coeff * dist_from_center/50)
    farm_base: float = 0.0
    farm_dist_coeff: float = 1.3
    # Wall decay chance: clamp01(floor + span * T_final)
    decay_floor: float = 0.0
    decay_span: float = 0.55
    # Item tables.
    table_chance: float = 0.5
    chair_per_table_min: int = 1
    chair_per_table_max: int = 3
    cutlery_chance: float = 0.35
    perfume_chance: float = 0.25  # deliberately static, never sim-conditioned
    toy_coeff: float = 0.9  # toy chance per house = coeff * birth intensity
    crop_base_chance: float = 0.5
    weed_base_chance: float = 0.12
    skeleton_cattle_chance: float = 0.18
    predator_skeleton_coeff: float = 0.5  # per-building chance at fauna = max

    def validate(self) -> None:
        if self.lake_count_min < 1:
            raise InvalidConfigError("lake_count_min must be >= 1")
        if self.lake_count_min > self.lake_count_max:
            raise InvalidConfigError("lake_count_min > lake_count_max")
        if self.lake_area_min > self.lake_area_max:
            raise InvalidConfigError("lake_area_min > lake_area_max")
        if (self.hall_w, self.hall_h) != (20, 10):
            raise InvalidConfigError("hall footprint is fixed at 20x10")


@dataclass
class StationConfig:
    grid_w: int = 60
    grid_h: int = 60
    corridor_count_min: int = 3
    corridor_count_max: int = 6
    corridor_len_min: int = 8
    corridor_len_max: int = 18
    room_count_min: int = 6
    room_count_max: int = 10
    room_dim_min: int = 4
    room_dim_max: int = 9
    crew_min: int = 5
    crew_max: int = 6
    layout_retries: int = 8
    # Simulation magnitudes (mechanisms fixed, numbers tunable).
    fire_spread_chance: float = 0.12
    fire_burnout_chance: float = 0.08
    anomaly_self_ignite_chance: float = 0.05
    anomaly_patience: int = 8
    shot_burst_radius: int = 2
    hearing_radius: int = 14
    exposure_turn_limit: int = 5
    panic_shelter_threshold: float = 3.0
    panic_fire: float = 1.5
    panic_body: float = 2.0
    panic_noise: float = 1.0
    panic_anomaly: float = 4.0
    tick_cap: int = 2000
    # Evidence.
    start_hour_min: int = 6  # random clock start drawn in [min, max] hours
    start_hour_max: int = 11
    update_location_chance: float = 0.3
    terminal_tile_divisor: int = 60
    terminal_min: int = 5

    def validate(self) -> None:
        if self.corridor_count_min > self.corridor_count_max:
            raise InvalidConfigError("corridor_count_min > corridor_count_max")
        if self.room_count_min > self.room_count_max:
            raise InvalidConfigError("room_count_min > room_count_max")
        if not (4 <= self.room_dim_min <= self.room_dim_max <= 9):
            raise InvalidConfigError("room dims must lie in [4, 9]")
        if not (5 <= self.crew_min <= self.crew_max <= 6):
            raise InvalidConfigError("crew size range must lie in {5, 6}")
        if self.room_count_min < 5:
            raise InvalidConfigError("room_count_min must be >= 5 (typed rooms)")
        if self.exposure_turn_limit != 5:
            raise InvalidConfigError("exposure_turn_limit is fixed at 5")


@dataclass
class SessionConfig:
    torch_radius: int = 9
    torch_aperture_deg: float = 90.0
    village_sight_radius: int = 7


@dataclass
class GenConfig:
    village: VillageSimConfig = field(default_factory=VillageSimConfig)
    village_render: VillageRenderConfig = field(default_factory=VillageRenderConfig)
    station: StationConfig = field(default_factory=StationConfig)
    session: SessionConfig = field(default_factory=SessionConfig)

    def validate(self) -> None:
        self.village.validate()
        self.village_render.validate()
        self.station.validate()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GenConfig":
        cfg = cls()
        _merge_dataclass(cfg, data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "GenConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def digest(self) -> str:
        """Stable hash of the full parameter set, for world provenance."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _merge_dataclass(target, data: dict) -> None:
    known = {f.name: f for f in fields(target)}
    for key, value in data.items():
        if key not in known:
            raise InvalidConfigError(f"unknown config field: {key}")
        current = getattr(target, key)
        if is_dataclass(current) and isinstance(value, dict):
            _merge_dataclass(current, value)
        else:
            setattr(target, key, value)
