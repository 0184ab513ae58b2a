"""CLI transcripts: every subcommand exercised end to end."""

import json

import pytest
from click.testing import CliRunner

from forensica.cli import main
from forensica.wire import parse_world


@pytest.fixture()
def runner():
    return CliRunner()


def test_generate_village_smoke(runner, tmp_path):
    out = tmp_path / "v.forensica.json"
    result = runner.invoke(main, ["generate", "village", "--seed", "7",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    artifact = parse_world(out.read_bytes())
    assert artifact.game == "Village"
    assert "ending=" in result.output


def test_generate_station_twice_is_byte_identical(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        result = runner.invoke(main, ["generate", "station", "--seed", "7",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
    assert a.read_bytes() == b.read_bytes()


def test_generate_accepts_hex_seed(runner, tmp_path):
    out = tmp_path / "x.json"
    result = runner.invoke(main, ["generate", "village", "--seed", "0x2A",
                                  "--out", str(out)])
    assert result.exit_code == 0
    assert parse_world(out.read_bytes()).seed == 42


def test_generate_invalid_config_exits_2(runner, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"village": {"tick_limit": 0}}))
    result = runner.invoke(main, ["generate", "village", "--seed", "1",
                                  "--config", str(cfg)])
    assert result.exit_code == 2
    assert "tick_limit" in result.output


def test_generate_unknown_field_exits_2(runner, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"village": {"no_such_knob": 1}}))
    result = runner.invoke(main, ["generate", "village", "--seed", "1",
                                  "--config", str(cfg)])
    assert result.exit_code == 2
    assert "no_such_knob" in result.output


def test_calibrate_degenerate_single_run(runner):
    result = runner.invoke(main, ["calibrate", "village", "-n", "1", "--json"])
    assert result.exit_code == 0
    table = json.loads(result.output)["table"]
    assert sum(row["count"] for row in table.values()) == 1


def test_calibrate_is_deterministic(runner):
    args = ["calibrate", "village", "-n", "40", "--json"]
    a = runner.invoke(main, args)
    b = runner.invoke(main, args)
    assert a.output == b.output


def test_calibrate_default_config_is_balanced(runner):
    result = runner.invoke(main, ["calibrate", "village", "-n", "200", "--json"])
    table = json.loads(result.output)["table"]
    for row in table.values():
        assert 0.20 <= row["frequency"] <= 0.47


def test_validate_ok_and_corrupt(runner, tmp_path):
    out = tmp_path / "w.json"
    runner.invoke(main, ["generate", "station", "--seed", "3", "--out", str(out)])
    ok = runner.invoke(main, ["validate", str(out)])
    assert ok.exit_code == 0
    out.write_bytes(out.read_bytes()[:200])
    bad = runner.invoke(main, ["validate", str(out)])
    assert bad.exit_code == 1


def test_trace_station_emits_json_lines(runner):
    result = runner.invoke(main, ["trace", "station", "--seed", "2"])
    assert result.exit_code == 0
    lines = [json.loads(line) for line in result.output.splitlines() if line]
    kinds = {line["kind"] for line in lines}
    assert "death" in kinds
    assert "climax" in kinds


def station_file(runner, tmp_path, seed=5):
    out = tmp_path / "s.json"
    result = runner.invoke(main, ["generate", "station", "--seed", str(seed),
                                  "--out", str(out)])
    assert result.exit_code == 0
    return out


def test_play_scripted_transcript_is_deterministic(runner, tmp_path):
    out = station_file(runner, tmp_path)
    script = tmp_path / "script.txt"
    script.write_text("w\nw\nlook\nsubmit\nquit\n")
    a = runner.invoke(main, ["play", str(out), "--script", str(script)])
    b = runner.invoke(main, ["play", str(out), "--script", str(script)])
    assert a.exit_code == 0, a.output
    assert a.output == b.output
    assert "score: 0" in a.output


def test_play_quit_village_prints_summary(runner, tmp_path):
    out = tmp_path / "v.json"
    runner.invoke(main, ["generate", "village", "--seed", "4", "--out", str(out)])
    script = tmp_path / "script.txt"
    script.write_text("w\nd\nlook\nquit\n")
    result = runner.invoke(main, ["play", str(out), "--script", str(script)])
    assert result.exit_code == 0
    assert "explored" in result.output


def test_play_reveal_gated_by_env(runner, tmp_path, monkeypatch):
    out = station_file(runner, tmp_path)
    script = tmp_path / "script.txt"
    script.write_text("reveal\nquit\n")
    monkeypatch.delenv("FORENSICA_TEST", raising=False)
    refused = runner.invoke(main, ["play", str(out), "--script", str(script),
                                   "--reveal"])
    assert refused.exit_code == 2
    monkeypatch.setenv("FORENSICA_TEST", "1")
    allowed = runner.invoke(main, ["play", str(out), "--script", str(script),
                                   "--reveal"])
    assert allowed.exit_code == 0
    assert "fates" in allowed.output


def test_play_perfect_report_scores_crew_size(runner, tmp_path, monkeypatch):
    out = station_file(runner, tmp_path, seed=9)
    monkeypatch.setenv("FORENSICA_TEST", "1")
    truth_run = runner.invoke(
        main, ["play", str(out), "--reveal",
               "--script", str(write_script(tmp_path, "reveal\nquit\n"))])
    payload = json.loads(
        [line for line in truth_run.output.splitlines() if line.startswith("{")][0]
    )
    names = {c["id"]: c["name"] for c in payload["crew"]}
    commands = [
        f"report {cid} {names[cid]} {fate['cause']}"
        for cid, fate in payload["fates"].items()
    ]
    commands += ["submit", "quit"]
    script = write_script(tmp_path, "\n".join(commands) + "\n", name="perfect.txt")
    result = runner.invoke(main, ["play", str(out), "--script", str(script)])
    assert result.exit_code == 0, result.output
    assert f"score: {len(names)}" in result.output


def write_script(tmp_path, text, name="script.txt"):
    path = tmp_path / name
    path.write_text(text)
    return path
