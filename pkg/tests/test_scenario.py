import csv
import io
import math

import pytest

from beaconsim.scenario import (CSV_COLUMNS, ConfigError, RunPoint, ScenarioConfig, build_network,
                                load_config, parse_config, parse_value, rows_to_csv, run_matrix,
                                so_for_duty_cycle)


def test_value_syntax():
    assert parse_value("[0..5]") == [0, 1, 2, 3, 4, 5]
    assert parse_value("[5, 10, 15]") == [5, 10, 15]
    assert parse_value("1, 2") == [1, 2]
    assert parse_value("12.5") == 12.5
    assert parse_value("true") is True
    assert parse_value("bo") == "bo"
    assert parse_value("[]") == []


def test_beacon_order_sweep_with_so_tied_to_bo():
    cfg = parse_config("n_devices = 10\nbo = [0..5]\nso = bo\nseeds = [1, 2]\n")
    points = cfg.points()
    assert [(p.bo, p.so) for p in points] == [(b, b) for b in range(6)]
    assert len(cfg.runs()) == 12


def test_duty_cycle_sweep_derives_superframe_order():
    cfg = parse_config("n_devices = 10\nbo = 5\nduty_cycle = [100, 50, 25, 12.5]\n")
    assert [p.so for p in cfg.points()] == [5, 4, 3, 2]


def test_cartesian_product_with_device_counts():
    cfg = parse_config("n_devices = [5, 15]\nbo = [1, 5]\nso = [1]\n")
    assert cfg.points() == [RunPoint(1, 1, 5), RunPoint(1, 1, 15),
                            RunPoint(5, 1, 5), RunPoint(5, 1, 15)]


def test_defaults_and_comments():
    cfg = parse_config("# sweep\nn_devices = 3   # three nodes\n\n")
    assert (cfg.radius_m, cfg.range_m, cfg.payload_bytes, cfg.interval_s) == (10, 18, 70, 0.2)
    assert cfg.sim_time_s == 60 and cfg.seeds == [1] and cfg.trace is False


@pytest.mark.parametrize("text,line,key", [
    ("n_devices = 3\nbo = 3\nso = 4\n", 3, "so"),
    ("n_devices = 3\nbo = 15\n", 2, "bo"),
    ("n_devices = 0\n", 1, "n_devices"),
    ("n_devices = 3\n\ninterval_s = 0\n", 3, "interval_s"),
    ("n_devices = 3\nbo = 3\nduty_cycle = 30\n", 3, "duty_cycle"),
    ("n_devices = 3\nbo = 1\nduty_cycle = 12.5\n", 3, "duty_cycle"),
    ("n_devices = 3\ncolour = red\n", 2, "colour"),
    ("n_devices = 3\nbo = three\n", 2, "bo"),
    ("n_devices = 3\ntrace = 2\n", 2, "trace"),
])
def test_validation_errors_name_the_line(text, line, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "sweep.cfg")
    msg = str(exc.value)
    assert f"sweep.cfg:{line}:" in msg and key in msg


def test_missing_device_count():
    with pytest.raises(ConfigError, match="n_devices"):
        parse_config("bo = 3\n")


def test_line_without_equals():
    with pytest.raises(ConfigError, match=":2:"):
        parse_config("n_devices = 3\nbo 3\n")


def test_so_for_duty_cycle():
    assert so_for_duty_cycle(5, 12.5) == 2
    with pytest.raises(ConfigError):
        so_for_duty_cycle(5, 0)


def test_load_config_from_file(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("n_devices = 2\nsim_time_s = 5\n")
    assert load_config(path).n_devices == [2]


def test_devices_are_placed_on_the_circle():
    cfg = ScenarioConfig(n_devices=[4])
    sim, ch, *_ = build_network(cfg, RunPoint(3, 3, 4), 1)
    assert ch.radios[0].position == (0.0, 0.0)
    for k in range(1, 5):
        x, y = ch.radios[k].position
        assert math.isclose(math.hypot(x, y), 10.0)
        angle = 2 * math.pi * k / 4
        assert math.isclose(x, 10 * math.cos(angle), abs_tol=1e-9)
        assert math.isclose(y, 10 * math.sin(angle), abs_tol=1e-9)
    # opposite devices are 20 m apart, beyond the 18 m range
    assert not ch.in_range(1, 3) and ch.in_range(1, 2)


def test_matrix_rows_and_aggregates(tmp_path):
    cfg = ScenarioConfig(n_devices=[3], bo=[2, 3], so="bo", seeds=[1, 2], sim_time_s=8)
    rows, results = run_matrix(cfg, trace_dir=tmp_path)
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 1 + 2 * 2 + 2 * 2
    assert [r[3] for r in rows[1:]] == ["1", "2", "mean", "std"] * 2
    assert len(list(tmp_path.glob("*.tr"))) == 4
    parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
    mean_row = parsed[2]
    s_values = [float(parsed[0]["S_kbps"]), float(parsed[1]["S_kbps"])]
    assert float(mean_row["S_kbps"]) == pytest.approx(sum(s_values) / 2)
    assert all(not r.conservation_errors() for r in results)


def test_absent_metrics_are_empty_cells():
    cfg = ScenarioConfig(n_devices=[1], n_gts_devices=0, sim_time_s=3, seeds=[1])
    rows, _ = run_matrix(cfg)
    row = dict(zip(rows[0], rows[1]))
    assert row["Pd_pct"] == "" and row["C_pct"] == ""
    std = dict(zip(rows[0], rows[3]))
    assert std["S_kbps"] == ""


def test_same_seed_gives_identical_csv_and_trace(tmp_path):
    cfg = ScenarioConfig(n_devices=[4], bo=[2], sim_time_s=10, seeds=[5])
    a_rows, a = run_matrix(cfg, trace_dir=tmp_path / "a")
    b_rows, b = run_matrix(cfg, trace_dir=tmp_path / "b")
    assert rows_to_csv(a_rows) == rows_to_csv(b_rows)
    assert (tmp_path / "a").joinpath(next((tmp_path / "a").iterdir()).name).read_bytes() == \
        next((tmp_path / "b").iterdir()).read_bytes()
