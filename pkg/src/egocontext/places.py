"""Familiar places: device-proximity weights, single-pass GPS clustering and
the FPP/FPG feature vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from egocontext.core import AlterId, AlterKind, EgoNetwork, WeightUpdate, layer_of
from egocontext.social import PERSONAL_DEVICES, DeviceClass, layer_distribution

EARTH_RADIUS_M = 6_371_008.8
DELTA_MAX_MS = 5 * 60 * 1000
RADIUS_MAX_M = 100.0


class OutOfOrderError(ValueError):
    pass


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


@dataclass
class ContactWeight:
    """Running contact weight: stores only the weight, the number of contact
    windows and the last sighting time."""

    weight: float
    n_contacts: int
    last_seen: int

    @classmethod
    def first(cls, t: int) -> "ContactWeight":
        return cls(1.0, 1, t)

    def sighting(self, t: int, delta_max_ms: int) -> None:
        if t < self.last_seen:
            raise OutOfOrderError(f"sighting at {t} precedes last_seen {self.last_seen}")
        gap = t - self.last_seen
        if gap <= delta_max_ms:
            # same contact window: dwell credit in seconds
            self.weight += (self.n_contacts + 1) * (gap / 1000.0)
        else:
            self.n_contacts += 1
            self.weight += self.n_contacts
        self.last_seen = t

    def as_update(self, alter: AlterId) -> WeightUpdate:
        return WeightUpdate(alter, self.weight, self.n_contacts, self.last_seen)


def is_place_device(device_class: DeviceClass) -> bool:
    return device_class not in PERSONAL_DEVICES


@dataclass(frozen=True)
class ProximityEvent:
    timestamp: int
    device: AlterId
    device_class: DeviceClass


@dataclass
class LocationWeightState:
    delta_max_ms: int = DELTA_MAX_MS
    weights: dict[AlterId, ContactWeight] = field(default_factory=dict)

    def __post_init__(self):
        if self.delta_max_ms <= 0:
            raise ValueError("delta_max must be positive")

    def update(self, device: AlterId, t: int) -> ContactWeight:
        return proximity_weight_update(self, device, t)


def proximity_weight_update(state: LocationWeightState, device: AlterId, t: int) -> ContactWeight:
    cw = state.weights.get(device)
    if cw is None:
        cw = state.weights[device] = ContactWeight.first(t)
    else:
        cw.sighting(t, state.delta_max_ms)
    return cw


@dataclass(frozen=True)
class GpsFix:
    timestamp: int
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"lat out of bounds: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"lon out of bounds: {self.lon}")


@dataclass
class GeoCluster:
    id: AlterId
    lat: float
    lon: float
    radius: float
    n_fixes: int
    contact: ContactWeight

    @property
    def center(self):
        return (self.lat, self.lon)

    @property
    def weight(self):
        return self.contact.weight

    @property
    def n_contacts(self):
        return self.contact.n_contacts

    @property
    def last_seen(self):
        return self.contact.last_seen


class GeoClusterer:
    """Online clusterer for GPS fixes; each fix is seen once and discarded.

    A fix joins the nearest cluster whose center lies within ``radius_max``
    metres, otherwise it seeds a new cluster. Centers are running means of
    member coordinates (fine for clusters far smaller than the globe and away
    from the antimeridian).
    """

    def __init__(self, radius_max: float = RADIUS_MAX_M, delta_max_ms: int = DELTA_MAX_MS):
        if radius_max <= 0:
            raise ValueError("radius_max must be positive")
        self.radius_max = radius_max
        self.delta_max_ms = delta_max_ms
        self.clusters: list[GeoCluster] = []
        self._by_id: dict[AlterId, GeoCluster] = {}

    def __len__(self):
        return len(self.clusters)

    def __getitem__(self, alter_id: AlterId) -> GeoCluster:
        return self._by_id[alter_id]

    @property
    def stored_fixes(self) -> int:
        """Number of raw fixes reachable from the clusterer state."""
        def count(obj):
            if isinstance(obj, GpsFix):
                return 1
            if isinstance(obj, (list, tuple, set, frozenset)):
                return sum(count(o) for o in obj)
            if isinstance(obj, dict):
                return sum(count(k) + count(v) for k, v in obj.items())
            if isinstance(obj, (GeoCluster, ContactWeight)):
                return sum(count(v) for v in vars(obj).values())
            return 0
        return sum(count(v) for v in vars(self).values())

    def _add(self, cluster: GeoCluster):
        self.clusters.append(cluster)
        self._by_id[cluster.id] = cluster

    def nearest(self, lat: float, lon: float) -> tuple[Optional[GeoCluster], float]:
        best, best_d = None, math.inf
        for c in self.clusters:
            d = haversine_m(c.lat, c.lon, lat, lon)
            if d < best_d:
                best, best_d = c, d
        return best, best_d

    def assign(self, fix: GpsFix) -> tuple[AlterId, bool]:
        return geo_assign(self, fix)


def geo_assign(clusterer: GeoClusterer, fix: GpsFix) -> tuple[AlterId, bool]:
    c, d = clusterer.nearest(fix.lat, fix.lon)
    if c is None or d > clusterer.radius_max:
        cid = AlterId(AlterKind.GEO_CLUSTER, f"g{len(clusterer.clusters)}")
        clusterer._add(GeoCluster(cid, fix.lat, fix.lon, 0.0, 1, ContactWeight.first(fix.timestamp)))
        return cid, True
    c.contact.sighting(fix.timestamp, clusterer.delta_max_ms)
    c.n_fixes += 1
    c.lat += (fix.lat - c.lat) / c.n_fixes
    c.lon += (fix.lon - c.lon) / c.n_fixes
    c.radius = min(clusterer.radius_max,
                   max(c.radius, haversine_m(c.lat, c.lon, fix.lat, fix.lon)))
    return c.id, False


@dataclass(frozen=True)
class PlaceFeatureVectors:
    fpp: tuple[float, ...]
    fpg: tuple[float, ...]
    window_end: int = 0


def place_feature_vectors(prox_network: EgoNetwork, gps_network: EgoNetwork,
                          in_proximity: Iterable[AlterId], current_cluster: Optional[AlterId],
                          window_end: int = 0) -> PlaceFeatureVectors:
    fpp = layer_distribution(prox_network, in_proximity)
    fpg = [0.0] * gps_network.num_layers
    if current_cluster is not None:
        i = layer_of(gps_network, current_cluster)
        fpg[(i if i is not None else gps_network.num_layers) - 1] = 1.0
    return PlaceFeatureVectors(fpp, tuple(fpg), window_end)
