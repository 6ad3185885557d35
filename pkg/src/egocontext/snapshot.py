"""Versioned JSON snapshots of engine state.

Layout (version 1)::

    {"format": "egocontext-snapshot", "version": 1,
     "config": {...RunConfig...},
     "egos": {"<ego>": {
        "social": {"counters": [[key, {channel: n}], ...], "last_seen": [[key, t], ...],
                   "sighting_window": [[key, channel, w], ...]},
        "proximity_weights": [[key, weight, n_contacts, last_seen], ...],
        "geo": [[key, lat, lon, radius, n_fixes, weight, n_contacts, last_seen], ...],
        "networks": {"social" | "proximity" | "gps": {
            "ranking": [[kind, key, weight, n_contacts, last_seen], ...],
            "layers": [[[kind, key], ...], ...],
            "built_from": [[kind, key, weight], ...],
            "rebuilds": n}},
        "pending": [<event>, ...], "window": w | null, "last_ts": t | null,
        "stats": {"events": n, "windows": n, "filtered": n}}}}

Lists are written in a canonical order so that saving a loaded snapshot
reproduces the original bytes.
"""
from __future__ import annotations

import json
import os
from collections import Counter
from pathlib import Path
from typing import Mapping, Union

from egocontext.config import RunConfig
from egocontext.core import AlterId, AlterKind, AlterRanking, AlterRecord, EgoNetwork
from egocontext.core import EgoNetworkState
from egocontext.events import EventEnvelope, parse_event
from egocontext.places import ContactWeight, GeoCluster
from egocontext.replay import EgoEngine
from egocontext.social import Channel

FORMAT = "egocontext-snapshot"
VERSION = 1


class SnapshotError(ValueError):
    pass


def _aid(a: AlterId):
    return [a.kind.value, a.key]


def _network_to_dict(state: EgoNetworkState) -> dict:
    net = state.network
    return {
        "ranking": [[r.id.kind.value, r.id.key, r.weight, r.n_contacts, r.last_seen]
                    for r in state.ranking],
        "layers": [sorted(_aid(a) for a in layer) for layer in net.layers],
        "built_from": [[a.kind.value, a.key, w] for a, w in net.built_from],
        "rebuilds": state.n_rebuilds,
    }


def _network_from_dict(d: dict, state: EgoNetworkState) -> None:
    cfg = state.config
    ranking = AlterRanking(
        AlterRecord(AlterId.of(k, key), float(w), int(n), int(t))
        for k, key, w, n, t in d["ranking"])
    layers = tuple(frozenset(AlterId.of(k, key) for k, key in layer) for layer in d["layers"])
    if len(layers) != cfg.num_layers:
        raise SnapshotError("layer count does not match the snapshot config")
    built = tuple((AlterId.of(k, key), float(w)) for k, key, w in d["built_from"])
    if built != tuple(ranking.top_pairs(cfg.eta)):
        raise SnapshotError("network does not match the stored ranking")
    state.ranking = ranking
    state.network = EgoNetwork(layers, cfg.eta, cfg.num_layers, built)
    state.n_rebuilds = int(d["rebuilds"])


def engine_to_dict(engine: EgoEngine) -> dict:
    soc = engine.social
    return {
        "social": {
            "counters": [[a.key, {ch.value: n for ch, n in sorted(c.items(), key=lambda x: x[0].value)}]
                         for a, c in sorted(soc.counters.items())],
            "last_seen": [[a.key, t] for a, t in sorted(soc.last_seen.items())],
            "sighting_window": sorted([a.key, ch.value, w]
                                      for (a, ch), w in soc._sighting_window.items()),
        },
        "proximity_weights": [[a.key, cw.weight, cw.n_contacts, cw.last_seen]
                              for a, cw in sorted(engine.proximity.weights.items())],
        "geo": [[c.id.key, c.lat, c.lon, c.radius, c.n_fixes, c.contact.weight,
                 c.contact.n_contacts, c.contact.last_seen] for c in engine.geo.clusters],
        "networks": {name: _network_to_dict(s) for name, s in engine.networks.items()},
        "pending": [ev.to_dict() for ev in engine.pending],
        "window": engine.window,
        "last_ts": engine.last_ts,
        "stats": {"events": engine.n_events, "windows": engine.n_windows,
                  "filtered": engine.n_filtered},
    }


def engine_from_dict(ego: str, d: dict, config: RunConfig) -> EgoEngine:
    eng = EgoEngine(ego, config)
    person = lambda key: AlterId.of(AlterKind.PERSON, key)
    soc = d["social"]
    eng.social.counters = {person(k): Counter({Channel(ch): int(n) for ch, n in c.items()})
                           for k, c in soc["counters"]}
    eng.social.last_seen = {person(k): int(t) for k, t in soc["last_seen"]}
    eng.social._sighting_window = {(person(k), Channel(ch)): int(w)
                                   for k, ch, w in soc["sighting_window"]}
    eng.proximity.weights = {AlterId.of(AlterKind.DEVICE, k): ContactWeight(float(w), int(n), int(t))
                             for k, w, n, t in d["proximity_weights"]}
    for key, lat, lon, radius, n_fixes, w, n, t in d["geo"]:
        eng.geo._add(GeoCluster(AlterId.of(AlterKind.GEO_CLUSTER, key), float(lat), float(lon),
                                float(radius), int(n_fixes), ContactWeight(float(w), int(n), int(t))))
    for name, state in eng.networks.items():
        _network_from_dict(d["networks"][name], state)
    eng.pending = [parse_event(json.dumps(ev)) for ev in d["pending"]]
    eng.window = d["window"]
    eng.last_ts = d["last_ts"]
    st = d["stats"]
    eng.n_events, eng.n_windows, eng.n_filtered = int(st["events"]), int(st["windows"]), int(st["filtered"])
    return eng


def dumps(engines: Mapping[str, EgoEngine], config: RunConfig) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "config": config.to_dict(),
        "egos": {ego: engine_to_dict(engines[ego]) for ego in sorted(engines)},
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def loads(text: str) -> tuple[dict[str, EgoEngine], RunConfig]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"corrupt snapshot: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise SnapshotError("not an egocontext snapshot")
    version = doc.get("version")
    if not isinstance(version, int) or version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version!r} (expected {VERSION})")
    try:
        config = RunConfig.from_dict(doc["config"])
        engines = {ego: engine_from_dict(ego, d, config) for ego, d in doc["egos"].items()}
    except SnapshotError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"corrupt snapshot: {exc!r}") from None
    return engines, config


def save(engines: Mapping[str, EgoEngine], config: RunConfig, path: Union[str, Path]) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps(engines, config), encoding="utf-8")
    os.replace(tmp, path)


def load(path: Union[str, Path]) -> tuple[dict[str, EgoEngine], RunConfig]:
    return loads(Path(path).read_text(encoding="utf-8"))
