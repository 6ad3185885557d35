import pytest

from egocontext.config import ConfigError, NetworkParams, RunConfig, load_config
from egocontext.core import AlterId, AlterKind
from egocontext.events import EventEnvelope
from egocontext.replay import EgoEngine, ReplayError, replay
from egocontext.synth import SyntheticWorldSpec, three_alter_scenario_events, generate_world


def test_empty_stream():
    rows, engines = replay([])
    assert rows == [] and engines == {}


def test_three_alter_last_window():
    rows, engines = replay(three_alter_scenario_events("u1"))
    last = rows[-1]
    assert last.sc == (0.0, 1 / 3, 1 / 3, 1 / 3)
    assert last.active_count == 3
    net = engines["u1"].social_net.network
    P = lambda k: AlterId(AlterKind.PERSON, k)
    assert [i for i, l in enumerate(net.layers, 1) if P("b") in l] == [2]
    assert [i for i, l in enumerate(net.layers, 1) if P("c") in l] == [3]
    assert [i for i, l in enumerate(net.layers, 1) if P("a") in l] == [4]


def test_windows_and_row_shape():
    evs = [EventEnvelope("u", 1_000, "call", "a"), EventEnvelope("u", 59_000, "sms", "b"),
           EventEnvelope("u", 200_000, "call", "a")]
    rows, _ = replay(evs)
    assert [r.window_end for r in rows] == [60_000, 240_000]
    assert rows[0].active_count == 2
    assert len(rows[0].sc) == 4 and len(rows[0].fpp) == 6 and len(rows[0].fpg) == 3


def test_fixed_anchor_gps_is_innermost():
    evs = [EventEnvelope("u", i * 60_000, "gps", lat=43.7, lon=10.4) for i in range(30)]
    rows, engines = replay(evs)
    assert all(r.fpg == (1.0, 0.0, 0.0) for r in rows)
    assert len(engines["u"].geo) == 1


def test_place_devices_go_to_proximity_model():
    evs = [EventEnvelope("u", 1000, "bt", "tv", rssi=-90, device_class="SmartTv"),
           EventEnvelope("u", 2000, "bt", "ph", rssi=-90, device_class="PersonalMobile")]
    rows, engines = replay(evs)
    e = engines["u"]
    assert AlterId(AlterKind.DEVICE, "tv") in e.proximity.weights
    assert e.n_filtered == 1 and len(e.social.counters) == 0
    assert rows[0].fpp[0] == 1.0 and rows[0].active_count == 0


def test_timestamp_regression_is_error():
    evs = [EventEnvelope("u", 5000, "call", "a"), EventEnvelope("u", 4000, "call", "b")]
    with pytest.raises(ReplayError, match="event 1"):
        replay(evs)


def test_engine_rejects_foreign_ego():
    with pytest.raises(ReplayError):
        EgoEngine("u", RunConfig()).feed(EventEnvelope("v", 0, "call", "a"))


def test_replay_deterministic_and_worker_independent():
    evs, _ = generate_world(SyntheticWorldSpec(n_egos=3, duration_days=2, seed=9))
    r1, _ = replay(evs)
    r2, _ = replay(evs)
    r3, _ = replay(evs, workers=2)
    assert r1 == r2 == r3
    assert [(r.ego, r.window_end) for r in r1] == sorted((r.ego, r.window_end) for r in r1)


def test_split_replay_equals_whole():
    evs, _ = generate_world(SyntheticWorldSpec(duration_days=2, seed=4))
    whole, _ = replay(evs)
    half = len(evs) // 2
    rows_a, engines = replay(evs[:half], flush=False)
    rows_b, _ = replay(evs[half:], engines=engines)
    assert rows_a + rows_b == whole


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError, match=r"lambda out of range \[0, 1\]"):
        RunConfig(lam=1.5)
    with pytest.raises(ConfigError):
        RunConfig(social=NetworkParams(eta=3, layers=5))
    p = tmp_path / "c.json"
    p.write_text('{"lambda": 0.25, "social": {"eta": 50, "layers": 3}}')
    cfg = load_config(p)
    assert cfg.lam == 0.25 and cfg.social.eta == 50 and cfg.social.layers == 3
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
