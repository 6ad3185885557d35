"""Per-update latency benchmark for the ego-network update.

Replays a random-contact workload and times each ``update_ego_network`` call
with a monotonic clock. Latencies are bucketed by the number of distinct
alters encountered so far (``n_a``).
"""
from __future__ import annotations

import gc
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from egocontext.core import AlterId, AlterKind, EgoNetworkState, EngineConfig, WeightUpdate
from egocontext.synth import generate_benchmark

PLATEAU_RATIO = 3.0
MIN_BUCKET_SAMPLES = 20


@dataclass
class Curve:
    eta: int
    bucket_width: int
    buckets: list[dict] = field(default_factory=list)   # n_a_lo, n_a_hi, count, mean_ms
    pre_plateau_mean_ms: float = float("nan")
    post_plateau_mean_ms: float = float("nan")
    plateau: bool = False
    plateau_ratio: float = float("nan")
    n_updates: int = 0
    n_rebuilds: int = 0


@dataclass
class BenchReport:
    n_contacts: int
    n_alters: int
    seed: int
    force_rebuild: bool
    num_layers: int
    curves: list[Curve] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def post_plateau_means(self) -> dict[int, float]:
        return {c.eta: c.post_plateau_mean_ms for c in self.curves}


def time_updates(contacts: Sequence[str], config: EngineConfig, force_rebuild: bool = True):
    """Return ``(latencies_ns, n_alters_seen, n_rebuilds)`` for one replay.

    Each contact adds one interaction to its alter; the alter's weight is its
    contact count.
    """
    state = EgoNetworkState(config)
    counts: dict[str, int] = {}
    lat = np.empty(len(contacts), dtype=np.int64)
    seen = np.empty(len(contacts), dtype=np.int64)
    clock = time.perf_counter_ns
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for i, key in enumerate(contacts):
            n = counts.get(key, 0) + 1
            counts[key] = n
            upd = [WeightUpdate(AlterId(AlterKind.PERSON, key), float(n), n, i)]
            t0 = clock()
            state.update(upd, force=force_rebuild)
            lat[i] = clock() - t0
            seen[i] = len(counts)
    finally:
        if gc_was_enabled:
            gc.enable()
    return lat, seen, state.n_rebuilds


def summarize_curve(eta: int, lat_ns: np.ndarray, seen: np.ndarray, bucket_width: int,
                    n_rebuilds: int = 0) -> Curve:
    """Bucket latencies by ``n_a`` and check for the post-eta plateau.

    The plateau check uses buckets at or beyond ``eta`` holding at least
    ``MIN_BUCKET_SAMPLES`` updates; it holds when their means stay within
    ``PLATEAU_RATIO`` of each other.
    """
    ms = lat_ns / 1e6
    curve = Curve(eta, bucket_width, n_updates=len(ms), n_rebuilds=n_rebuilds)
    idx = (seen - 1) // bucket_width
    for b in np.unique(idx):
        sel = idx == b
        curve.buckets.append({
            "n_a_lo": int(b * bucket_width + 1),
            "n_a_hi": int((b + 1) * bucket_width),
            "count": int(sel.sum()),
            "mean_ms": float(ms[sel].mean()),
        })
    pre = seen < eta
    post = ~pre
    if pre.any():
        curve.pre_plateau_mean_ms = float(ms[pre].mean())
    if post.any():
        curve.post_plateau_mean_ms = float(ms[post].mean())
        means = [bk["mean_ms"] for bk in curve.buckets
                 if bk["n_a_lo"] >= eta and bk["count"] >= MIN_BUCKET_SAMPLES]
        if means:
            curve.plateau_ratio = max(means) / min(means)
            curve.plateau = curve.plateau_ratio <= PLATEAU_RATIO
    return curve


def run_bench(etas: Sequence[int] = (150, 500, 1000), n_contacts: int = 20_000,
              n_alters: int = 5_000, force_rebuild: bool = True, seed: int = 1,
              num_layers: int = 4, bucket_width: int = 100) -> BenchReport:
    events = generate_benchmark(n_contacts, n_alters, seed)
    contacts = [ev.counterpart for ev in events]
    report = BenchReport(n_contacts, n_alters, seed, force_rebuild, num_layers)
    for eta in etas:
        cfg = EngineConfig(eta=eta, num_layers=min(num_layers, eta))
        lat, seen, rebuilds = time_updates(contacts, cfg, force_rebuild)
        report.curves.append(summarize_curve(eta, lat, seen, bucket_width, rebuilds))
    return report
