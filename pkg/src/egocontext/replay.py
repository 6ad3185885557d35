"""Per-ego streaming engine and windowed replay of event streams.

For every window the engine runs the four modeling steps: extract active
alters, refresh their weights, update the ego networks (rebuilding layers only
when the top-eta ranking changed) and emit the SC/FPP/FPG feature vectors.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

from egocontext.config import RunConfig
from egocontext.core import AlterId, AlterKind, EgoNetworkState, WeightUpdate
from egocontext.events import EventEnvelope
from egocontext.places import GeoClusterer, GpsFix, LocationWeightState, geo_assign, is_place_device
from egocontext.places import place_feature_vectors, proximity_weight_update
from egocontext.social import (Channel, DeviceClass, SocialEvent, SocialWeightState,
                               filter_social_event, layer_distribution, social_weight)


class ReplayError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureRow:
    ego: str
    window_end: int
    sc: tuple[float, ...]
    fpp: tuple[float, ...]
    fpg: tuple[float, ...]
    active_count: int


class EgoEngine:
    def __init__(self, ego: str, config: RunConfig):
        self.ego = ego
        self.config = config
        self.social = SocialWeightState(config.lam, config.window_ms)
        self.social_net = EgoNetworkState(config.social.engine())
        self.proximity = LocationWeightState(config.delta_max_ms)
        self.proximity_net = EgoNetworkState(config.proximity.engine())
        self.geo = GeoClusterer(config.radius_max_m, config.delta_max_ms)
        self.gps_net = EgoNetworkState(config.gps.engine())
        self.pending: list[EventEnvelope] = []
        self.window: Optional[int] = None
        self.last_ts: Optional[int] = None
        self.n_events = 0
        self.n_windows = 0
        self.n_filtered = 0

    @property
    def networks(self):
        return {"social": self.social_net, "proximity": self.proximity_net, "gps": self.gps_net}

    def feed(self, event: EventEnvelope) -> list[FeatureRow]:
        if event.ego != self.ego:
            raise ReplayError(f"event for ego {event.ego!r} fed to engine {self.ego!r}")
        if self.last_ts is not None and event.ts < self.last_ts:
            raise ReplayError(
                f"ego {self.ego!r}: timestamp {event.ts} precedes previous {self.last_ts}")
        w = event.ts // self.config.window_ms
        rows = []
        if self.window is not None and w != self.window:
            rows = self.flush()
        self.window = w
        self.last_ts = event.ts
        self.pending.append(event)
        self.n_events += 1
        return rows

    def flush(self) -> list[FeatureRow]:
        if not self.pending:
            return []
        events, self.pending = self.pending, []
        window_end = (self.window + 1) * self.config.window_ms
        self.n_windows += 1
        return [self._process_window(events, window_end)]

    def _process_window(self, events: list[EventEnvelope], window_end: int) -> FeatureRow:
        cfg = self.config
        active: dict[AlterId, int] = {}
        devices: dict[AlterId, int] = {}
        clusters: dict[AlterId, int] = {}
        current_cluster = None

        for ev in events:
            if ev.is_gps:
                cid, _ = geo_assign(self.geo, GpsFix(ev.ts, ev.lat, ev.lon))
                clusters[cid] = ev.ts
                current_cluster = cid
                continue
            dc = DeviceClass(ev.device_class) if ev.device_class is not None else None
            if ev.is_sighting and is_place_device(dc):
                dev = AlterId(AlterKind.DEVICE, ev.counterpart)
                proximity_weight_update(self.proximity, dev, ev.ts)
                devices[dev] = ev.ts
                continue
            se = SocialEvent(ev.ts, Channel(ev.type), AlterId(AlterKind.PERSON, ev.counterpart),
                             ev.rssi, dc)
            if filter_social_event(se, cfg.rssi_threshold) is None:
                self.n_filtered += 1
                continue
            self.social.record(se)
            active[se.counterpart] = ev.ts

        if active:
            self.social_net.update([
                WeightUpdate(a, social_weight(self.social, a), self.social.n_interactions(a), t)
                for a, t in sorted(active.items())])
        if devices:
            self.proximity_net.update([self.proximity.weights[d].as_update(d)
                                       for d in sorted(devices)])
        if clusters:
            self.gps_net.update([self.geo[c].contact.as_update(c) for c in sorted(clusters)])

        sc = layer_distribution(self.social_net.network, active)
        places = place_feature_vectors(self.proximity_net.network, self.gps_net.network,
                                       devices, current_cluster, window_end)
        return FeatureRow(self.ego, window_end, sc, places.fpp, places.fpg, len(active))

    def summary(self) -> dict:
        return {
            "events": self.n_events,
            "windows": self.n_windows,
            "filtered_sightings": self.n_filtered,
            "rebuilds": {k: s.n_rebuilds for k, s in self.networks.items()},
            "alters": {k: len(s.ranking) for k, s in self.networks.items()},
            "geo_clusters": len(self.geo),
        }


def _run_ego(args):
    ego, events, config, engine, flush = args
    engine = engine if engine is not None else EgoEngine(ego, config)
    rows = []
    for i, ev in events:
        try:
            rows.extend(engine.feed(ev))
        except ValueError as exc:
            raise ReplayError(f"event {i}: {exc}") from exc
    if flush:
        rows.extend(engine.flush())
    return rows, engine


def replay(events: Iterable[EventEnvelope], config: Optional[RunConfig] = None,
           engines: Optional[dict[str, EgoEngine]] = None, flush: bool = True,
           workers: int = 1) -> tuple[list[FeatureRow], dict[str, EgoEngine]]:
    """Replay a stream, one engine per ego; file order is authoritative.

    Returns feature rows ordered by (ego, window_end) and the engines. Pass
    ``engines`` to continue from existing (e.g. restored) state. Event indices
    in error messages are 0-based positions in the stream.
    """
    config = config if config is not None else RunConfig()
    engines = dict(engines) if engines else {}
    by_ego: dict[str, list] = {}
    for i, ev in enumerate(events):
        by_ego.setdefault(ev.ego, []).append((i, ev))
    for ego in engines:
        by_ego.setdefault(ego, [])
    jobs = [(ego, by_ego[ego], config, engines.get(ego), flush) for ego in sorted(by_ego)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_ego, jobs))
    else:
        results = [_run_ego(job) for job in jobs]
    rows = []
    for (ego, *_), (ego_rows, engine) in zip(jobs, results):
        rows.extend(ego_rows)
        engines[ego] = engine
    return rows, engines
