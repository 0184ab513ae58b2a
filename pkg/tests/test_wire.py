"""Serialization: canonical form, round trips, sealing, validation."""

import json
import pathlib

import pytest

from forensica.wire import (
    CorruptWorldError,
    WireFormatError,
    parse_world,
    serialize_world,
    strip_ground_truth,
    to_bundle,
)
from forensica.worldgen import generate_station, generate_village

GOLDEN = pathlib.Path(__file__).parent / "golden"


def village_blob(seed=7):
    return serialize_world(to_bundle(generate_village(seed)))


def station_blob(seed=7):
    return serialize_world(to_bundle(generate_station(seed)))


def test_serialize_is_canonical():
    art = generate_village(1)
    assert serialize_world(to_bundle(art)) == serialize_world(to_bundle(art))


def test_round_trip_village():
    blob = village_blob()
    assert serialize_world(to_bundle(parse_world(blob))) == blob


def test_round_trip_station():
    blob = station_blob()
    assert serialize_world(to_bundle(parse_world(blob))) == blob


def test_golden_snapshots_are_stable():
    assert (GOLDEN / "village_7.forensica.json").read_bytes() == village_blob(7)
    assert (GOLDEN / "station_7.forensica.json").read_bytes() == station_blob(7)


def test_golden_files_parse():
    for path in GOLDEN.glob("*.forensica.json"):
        artifact = parse_world(path.read_bytes())
        assert artifact.seed == 7


def test_strip_ground_truth_still_parses():
    bundle = to_bundle(generate_station(3))
    safe = strip_ground_truth(bundle)
    assert "ground_truth" not in safe
    art = parse_world(serialize_world(safe))
    assert art.crew == []
    assert art.fates == {}
    assert art.crew_manifest()  # public roster survives


def test_strip_removes_sender_ids():
    safe = strip_ground_truth(to_bundle(generate_station(3)))
    blob = json.dumps(safe)
    for terminal in safe["evidence"]["terminals"]:
        assert "sender_id" not in terminal["message"]
    assert '"fates"' not in blob


def test_unknown_version_rejected():
    bundle = to_bundle(generate_village(1))
    bundle["format_version"] = 99
    with pytest.raises(WireFormatError):
        parse_world(serialize_world(bundle))


def test_truncated_input_is_a_parse_error():
    with pytest.raises(WireFormatError):
        parse_world(village_blob()[:100])
    with pytest.raises(WireFormatError):
        parse_world(b"\xff\xfe garbage")


def test_tampered_walkability_is_rejected():
    bundle = to_bundle(generate_station(5))
    # Seal a room: turn its doorway tiles into wall.
    room = bundle["evidence"]["rooms"][-1]
    tiles = [list(row) for row in bundle["world"]["tiles"]]
    for x, y in room["doorways"]:
        tiles[y][x] = "#"
    bundle["world"]["tiles"] = ["".join(row) for row in tiles]
    with pytest.raises(CorruptWorldError):
        parse_world(serialize_world(bundle))


def test_tampered_chronology_is_rejected():
    bundle = to_bundle(generate_station(5))
    terminals = bundle["evidence"]["terminals"]
    if len(terminals) < 2:
        pytest.skip("needs two terminals")
    terminals[0]["message"]["turn"], terminals[-1]["message"]["turn"] = (
        terminals[-1]["message"]["turn"],
        terminals[0]["message"]["turn"],
    )
    if terminals[0]["message"]["turn"] == terminals[-1]["message"]["turn"]:
        pytest.skip("equal turns")
    with pytest.raises(CorruptWorldError):
        parse_world(serialize_world(bundle))


def test_tampered_digest_is_rejected():
    bundle = to_bundle(generate_village(1))
    bundle["config_digest"] = "0" * 16
    with pytest.raises(CorruptWorldError):
        parse_world(serialize_world(bundle))
