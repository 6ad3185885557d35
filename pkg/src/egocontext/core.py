"""Alter ranking and layered ego networks with incremental (skip-aware) updates."""
from __future__ import annotations

import enum
import functools
import itertools
import math
import operator
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from sortedcontainers import SortedList


class AlterKind(str, enum.Enum):
    PERSON = "Person"
    DEVICE = "Device"
    GEO_CLUSTER = "GeoCluster"


class AlterId(NamedTuple):
    kind: AlterKind
    key: str

    @classmethod
    def of(cls, kind, key: str) -> "AlterId":
        """Validating constructor."""
        if not isinstance(key, str) or not key:
            raise ValueError("alter key must be a non-empty string")
        return cls(AlterKind(kind), key)

    def __str__(self):
        return f"{self.kind.value}:{self.key}"


@dataclass(frozen=True)
class AlterRecord:
    id: AlterId
    weight: float
    n_contacts: int
    last_seen: int

    def sort_key(self):
        # weight desc, then most recent first, then (kind, key) asc;
        # AlterKind is a str enum so members order by their value
        return (-self.weight, -self.last_seen, self.id.kind, self.id.key)


class WeightUpdate(NamedTuple):
    id: AlterId
    weight: float
    n_contacts: int
    last_seen: int


@dataclass(frozen=True)
class EngineConfig:
    eta: int
    num_layers: int
    tie_epsilon: float = 0.0

    def __post_init__(self):
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        if self.eta < self.num_layers:
            raise ValueError("eta must be >= num_layers")
        if self.tie_epsilon < 0:
            raise ValueError("tie_epsilon must be non-negative")


_PAIR = operator.itemgetter(-1)


class AlterRanking:
    """Every alter ever seen, kept in descending weight order.

    The ranking is never truncated; only the ego network built from it is
    capped at ``eta``. Entries are ``sort_key() + ((id, weight),)`` in a
    sorted list, so an update costs O(log n) and the top-eta pairs are read
    without touching the records.
    """

    def __init__(self, records: Iterable[AlterRecord] = ()):
        self._records: dict[AlterId, AlterRecord] = {}
        self._entries = SortedList()
        for rec in records:
            self._put(rec)

    def __len__(self):
        return len(self._entries)

    def __contains__(self, alter_id):
        return alter_id in self._records

    def __iter__(self):
        recs = self._records
        return (recs[e[-1][0]] for e in self._entries)

    def __eq__(self, other):
        if not isinstance(other, AlterRanking):
            return NotImplemented
        return list(self) == list(other)

    def get(self, alter_id: AlterId) -> Optional[AlterRecord]:
        return self._records.get(alter_id)

    def copy(self) -> "AlterRanking":
        new = AlterRanking()
        new._records = dict(self._records)
        new._entries = self._entries.copy()
        return new

    def top(self, eta: int) -> list[AlterRecord]:
        recs = self._records
        return [recs[e[-1][0]] for e in itertools.islice(self._entries, eta)]

    def top_pairs(self, eta: int) -> list[tuple[AlterId, float]]:
        return list(map(_PAIR, itertools.islice(self._entries, eta)))

    def position(self, alter_id: AlterId) -> Optional[int]:
        rec = self._records.get(alter_id)
        if rec is None:
            return None
        return self._entries.bisect_left(rec.sort_key())

    def _put(self, rec: AlterRecord):
        old = self._records.get(rec.id)
        if old is not None:
            self._entries.remove(old.sort_key() + ((old.id, old.weight),))
        self._entries.add(rec.sort_key() + ((rec.id, rec.weight),))
        self._records[rec.id] = rec

    def apply(self, active: Iterable[WeightUpdate]) -> None:
        """In-place version of :func:`apply_weights`."""
        updates = [WeightUpdate(*u) for u in active]
        for u in updates:
            if not u.weight >= 0:
                raise ValueError(f"negative weight {u.weight!r} for {u.id}")
            if u.n_contacts < 0:
                raise ValueError(f"negative n_contacts for {u.id}")
            old = self._records.get(u.id)
            if old is not None and u.last_seen < old.last_seen:
                raise ValueError(
                    f"last_seen moved backwards for {u.id}: {u.last_seen} < {old.last_seen}")
        for u in updates:
            self._put(AlterRecord(u.id, float(u.weight), int(u.n_contacts), int(u.last_seen)))


def apply_weights(ranking: AlterRanking, active: Iterable[WeightUpdate]) -> AlterRanking:
    """Return a new ranking with the active alters' weights merged in."""
    new = ranking.copy()
    new.apply(active)
    return new


def _pairs_differ(a, b, eps):
    if len(a) != len(b):
        return True
    for (ia, wa), (ib, wb) in zip(a, b):
        if ia != ib or abs(wa - wb) > eps:
            return True
    return False


def top_eta_changed(before: AlterRanking, after: AlterRanking, eta: int,
                    tie_epsilon: float = 0.0) -> bool:
    return _pairs_differ(before.top_pairs(eta), after.top_pairs(eta), tie_epsilon)


# -- layer construction -------------------------------------------------------

def build_layers(top_weights: Sequence[float], num_layers: int) -> list[tuple[int, int]]:
    """Split descending weights into at most ``num_layers`` contiguous layers.

    Returns ``num_layers`` half-open ``(start, stop)`` index ranges into
    ``top_weights``, innermost layer first; trailing layers may be empty.

    The split minimises the total within-layer sum of squared deviations.
    Equal weights are never separated, so a list with ``d`` distinct values
    yields ``min(d, num_layers)`` non-empty layers. Among equal-cost splits
    the one with the smallest outer layers wins (cuts as late as possible,
    compared from the outermost cut inwards).
    """
    if num_layers < 1:
        raise ValueError("num_layers must be >= 1")
    n = len(top_weights)
    if n == 0:
        return [(0, 0)] * num_layers
    if n <= _SMALL_N:
        w = [float(x) for x in top_weights]
        item_edges = [0, *(i for i, (a, b) in enumerate(zip(w, w[1:]), 1) if a != b), n]
        if any(w[i] > w[i - 1] for i in item_edges[1:-1]):
            raise ValueError("weights must be sorted in descending order")
    else:
        w = np.asarray(top_weights, dtype=float)
        if np.any(w[:-1] < w[1:]):
            raise ValueError("weights must be sorted in descending order")
        item_edges = [0, *(np.flatnonzero(w[1:] != w[:-1]) + 1).tolist(), n]

    # runs of equal weights are the units being segmented
    m = len(item_edges) - 1
    k = min(num_layers, m)
    if k == 1:
        bounds = [0, m]
    elif k == m:
        bounds = list(range(m + 1))
    elif m <= _SMALL_M:
        vals = [float(w[i]) for i in item_edges[:-1]]
        cnts = [item_edges[i + 1] - item_edges[i] for i in range(m)]
        bounds = _optimal_cuts_small(vals, cnts, k)
    else:
        w = np.asarray(w, dtype=float)
        ie = np.asarray(item_edges)
        bounds = _optimal_cuts(w[ie[:-1]], np.diff(ie).astype(float), k)

    item_bounds = [item_edges[b] for b in bounds]
    layers = [(item_bounds[i], item_bounds[i + 1]) for i in range(k)]
    layers.extend([(n, n)] * (num_layers - k))
    return layers


_SMALL_M = 16
_SMALL_N = 64


def _optimal_cuts_small(values, counts, k):
    """Pure-Python twin of :func:`_optimal_cuts`; cheaper for few distinct values."""
    m = len(values)
    mean = sum(v * c for v, c in zip(values, counts)) / sum(counts)
    s0, s1, s2 = [0.0], [0.0], [0.0]
    for v, c in zip(values, counts):
        x = v - mean
        s0.append(s0[-1] + c)
        s1.append(s1[-1] + c * x)
        s2.append(s2[-1] + c * x * x)
    tol = 1e-9 * max(s2[-1], 1e-300)

    # best[j]: cost of covering distinct values 0..j with the segments so far
    best = []
    for j in range(m):
        c = s2[j + 1] - s1[j + 1] ** 2 / s0[j + 1]
        best.append(c if c > 0.0 else 0.0)
    choice = []
    for stage in range(2, k + 1):
        first = stage - 1
        # leave room for the k - stage segments still to come
        cols = [m - 1] if stage == k else range(first, m - (k - stage))
        new = [math.inf] * m
        pick = [0] * m
        starts = list(zip(best[first - 1:], s0[first:], s1[first:], s2[first:]))
        ends = [(s0[j + 1], s1[j + 1], s2[j + 1], j - first + 1) for j in cols]
        # every (start, end) candidate of this stage in one pass; segment
        # costs may dip below zero by rounding only, far under tol
        flat = [b + (a2 - p2) - (a1 - p1) * (a1 - p1) / (a0 - p0)
                for a0, a1, a2, n in ends for b, p0, p1, p2 in starts[:n]]
        lo_i = 0
        for j, (_, _, _, n) in zip(cols, ends):
            cand = flat[lo_i:lo_i + n]
            lo_i += n
            lo = min(cand)
            off = n - 1
            while cand[off] > lo + tol:
                off -= 1
            new[j] = lo
            pick[j] = first + off
        choice.append(pick)
        best = new

    cuts = [m]
    j = m - 1
    for stage in range(k, 1, -1):
        i = choice[stage - 2][j]
        cuts.append(i)
        j = i - 1
    cuts.append(0)
    return cuts[::-1]


@functools.lru_cache(maxsize=64)
def _below_diagonal(m: int) -> np.ndarray:
    return np.tri(m, m, -1, dtype=bool)


def _optimal_cuts(values, counts, k):
    """Indices ``0 = b0 < b1 < ... < bk = m`` of the optimal k-segmentation."""
    m = len(values)
    x = values - np.dot(values, counts) / counts.sum()
    zero = np.zeros(1)
    s0 = np.concatenate((zero, np.cumsum(counts)))
    s1 = np.concatenate((zero, np.cumsum(counts * x)))
    s2 = np.concatenate((zero, np.cumsum(counts * x * x)))
    tol = 1e-9 * max(s2[-1], 1e-300)

    # cost[i, j]: segment covering distinct values i..j inclusive
    n0 = s0[None, 1:] - s0[:-1, None]
    n1 = s1[None, 1:] - s1[:-1, None]
    n2 = s2[None, 1:] - s2[:-1, None]
    # below the diagonal counts are <= 0; those entries are masked anyway
    cost = n2 - n1 * n1 / np.maximum(n0, 1.0)
    np.maximum(cost, 0.0, out=cost)
    cost[_below_diagonal(m)] = np.inf

    rows = np.arange(m)
    best = cost[0].copy()          # one segment ending at j
    choice = []
    for stage in range(2, k + 1):
        last = stage == k
        # segment i..j preceded by (stage-1) segments ending at i-1
        prev = np.full(m, np.inf)
        prev[1:] = best[:-1]
        if last:
            total = prev + cost[:, m - 1]
            total[rows < stage - 1] = np.inf
            lo = total.min()
            pick = int(np.flatnonzero(total <= lo + tol)[-1])
            choice.append(np.array([pick]))
            break
        total = prev[:, None] + cost
        total[rows < stage - 1, :] = np.inf
        lo = total.min(axis=0)
        ok = total <= lo[None, :] + tol
        pick = m - 1 - np.argmax(ok[::-1], axis=0)
        choice.append(pick)
        best = lo

    cuts = [m]
    j = m - 1
    for stage in range(k, 1, -1):
        arr = choice[stage - 2]
        i = int(arr[0]) if stage == k else int(arr[j])
        cuts.append(i)
        j = i - 1
    cuts.append(0)
    return cuts[::-1]


# -- ego network ---------------------------------------------------------------

@dataclass(frozen=True)
class EgoNetwork:
    """Immutable layered snapshot; ``layers[0]`` is the innermost circle."""

    layers: tuple[frozenset, ...]
    eta: int
    num_layers: int
    built_from: tuple[tuple[AlterId, float], ...] = ()

    @functools.cached_property
    def _index(self) -> dict:
        # built on first lookup; benchmark-style rebuild loops never pay for it
        return {a: i for i, layer in enumerate(self.layers, start=1) for a in layer}

    @classmethod
    def empty(cls, config: EngineConfig) -> "EgoNetwork":
        return cls(tuple(frozenset() for _ in range(config.num_layers)),
                   config.eta, config.num_layers)

    def __contains__(self, alter_id):
        return alter_id in self._index

    def __len__(self):
        return len(self._index)

    def layer_sizes(self) -> list[int]:
        return [len(layer) for layer in self.layers]

    def weights_by_layer(self) -> list[list[float]]:
        out = [[] for _ in self.layers]
        for a, w in self.built_from:
            out[self._index[a] - 1].append(w)
        return out


def layer_of(network: EgoNetwork, alter_id: AlterId) -> Optional[int]:
    return network._index.get(alter_id)


def build_network(top: Sequence[AlterRecord], config: EngineConfig) -> EgoNetwork:
    return _network_from_pairs([(r.id, r.weight) for r in top], config)


def _network_from_pairs(pairs: Sequence[tuple[AlterId, float]], config: EngineConfig) -> EgoNetwork:
    ids, weights = zip(*pairs) if pairs else ((), ())
    spans = build_layers(weights, config.num_layers)
    layers = tuple(frozenset(ids[lo:hi]) for lo, hi in spans)
    return EgoNetwork(layers, config.eta, config.num_layers, tuple(pairs))


def recompute_network(ranking: AlterRanking, config: EngineConfig) -> EgoNetwork:
    """Build the network from scratch from the full ranking."""
    if len(ranking) == 0:
        return EgoNetwork.empty(config)
    return build_network(ranking.top(config.eta), config)


class EgoNetworkState:
    """Ranking plus the current network for one ego and one alter type.

    Mutations are expected from a single writer; the ``network`` attribute is
    an immutable snapshot that may be shared freely.
    """

    def __init__(self, config: EngineConfig, ranking: Optional[AlterRanking] = None,
                 network: Optional[EgoNetwork] = None):
        self.config = config
        self.ranking = ranking if ranking is not None else AlterRanking()
        if network is None:
            network = recompute_network(self.ranking, config)
        elif network.built_from != tuple(self.ranking.top_pairs(config.eta)):
            raise ValueError("network was not built from this ranking's top-eta")
        self.network = network
        self.n_rebuilds = 0

    def update(self, active: Iterable[WeightUpdate], force: bool = False):
        return update_ego_network(self, active, force=force)


def update_ego_network(state: EgoNetworkState, active: Iterable[WeightUpdate],
                       force: bool = False) -> tuple[EgoNetwork, bool]:
    """Merge active weights and rebuild the layers only if the top-eta changed.

    ``force=True`` rebuilds unconditionally (worst-case benchmarking).
    """
    cfg = state.config
    state.ranking.apply(active)
    after = state.ranking.top_pairs(cfg.eta)
    # the network always reflects the current top-eta, so it holds the
    # sequence as it stood before this update
    before = state.network.built_from
    if cfg.tie_epsilon == 0:
        changed = len(after) != len(before) or tuple(after) != before
    else:
        changed = _pairs_differ(before, after, cfg.tie_epsilon)
    if force or changed:
        state.network = _network_from_pairs(after, cfg)
        state.n_rebuilds += 1
        return state.network, True
    return state.network, False
