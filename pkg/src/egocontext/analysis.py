"""Offline analysis of accumulated ego networks: optimal number of circles,
structural statistics and semantic evaluation against ground-truth tags."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from egocontext.core import AlterId, EgoNetwork

STRONG, WEAK = "Strong", "Weak"


def mean_shift_bandwidth(weights: Sequence[float], quantile: float = 0.3) -> float:
    """Average, over all points, of the mean distance to the point's
    ``ceil(quantile * n)`` nearest other points."""
    x = np.sort(np.asarray(weights, dtype=float))
    n = len(x)
    if n < 2:
        return 0.0
    k = min(max(1, math.ceil(quantile * n)), n - 1)
    d = np.abs(x[:, None] - x[None, :])
    d.sort(axis=1)
    # column 0 is the point itself
    return float(d[:, 1:k + 1].mean(axis=1).mean())


def mean_shift_modes(weights: Sequence[float], bandwidth: Optional[float] = None,
                     max_iter: int = 500, tol: float = 1e-9) -> np.ndarray:
    """1-D mean shift with a flat kernel, seeded at every distinct value.

    Converged seeds closer than ``bandwidth / 2`` are merged (the mode with
    more supporting seeds absorbs the other). Returns the sorted modes.
    """
    x = np.sort(np.asarray(weights, dtype=float))
    if len(x) == 0:
        raise ValueError("need at least one weight")
    h = mean_shift_bandwidth(x) if bandwidth is None else float(bandwidth)
    seeds, support = np.unique(x, return_counts=True)
    if h <= 0 or len(seeds) == 1:
        return seeds[:1] if len(seeds) == 1 else seeds
    csum = np.concatenate(([0.0], np.cumsum(x)))
    pts = seeds.copy()
    scale = max(abs(x[-1] - x[0]), h)
    for _ in range(max_iter):
        lo = np.searchsorted(x, pts - h, side="left")
        hi = np.searchsorted(x, pts + h, side="right")
        new = (csum[hi] - csum[lo]) / (hi - lo)
        done = np.max(np.abs(new - pts)) <= tol * scale
        pts = new
        if done:
            break

    order = np.argsort(pts, kind="stable")
    pts, support = pts[order], support[order]
    # seeds that converged to the same point form one peak
    peaks, weight = [], []
    for p, s in zip(pts, support):
        if peaks and p - peaks[-1] <= tol * scale:
            weight[-1] += s
        else:
            peaks.append(p)
            weight.append(s)
    modes, mass = [], []
    for p, s in zip(peaks, weight):
        if modes and p - modes[-1] < h / 2:
            if s > mass[-1]:
                modes[-1] = p
            mass[-1] += s
        else:
            modes.append(p)
            mass.append(s)
    return np.asarray(modes)


def optimal_circles(weights: Sequence[float]) -> int:
    """Number of mean-shift modes of the alters' weights (at least 1)."""
    if len(weights) == 0:
        raise ValueError("optimal_circles needs at least one weight")
    return max(1, len(mean_shift_modes(weights)))


def ccdf(values: Iterable[int]) -> list[tuple[int, float]]:
    """Points ``(x, P(X >= x))`` at x = 0 and at every observed value."""
    v = np.sort(np.asarray(list(values), dtype=int))
    if len(v) == 0:
        return [(0, 1.0)]
    xs = np.unique(np.concatenate(([0], v)))
    frac = 1.0 - np.searchsorted(v, xs, side="left") / len(v)
    return [(int(a), float(b)) for a, b in zip(xs, frac)]


@dataclass
class StructureReport:
    num_layers: int
    mean_counts: list[float]
    mean_weights: list[float]             # NaN where no ego has the layer populated
    ccdf: list[tuple[int, float]]
    circles_hist: dict[int, int] = field(default_factory=dict)
    n_egos: int = 0


def structure_report(egos: Iterable[tuple[EgoNetwork, Sequence[float]]]) -> StructureReport:
    """Aggregate per-layer structure over egos.

    Each item is an ego's network plus the weights of all its alters (used for
    the distinct-alter CCDF and the optimal-circle histogram). Counts are
    averaged over egos; layer means pool every alter in that layer.
    """
    egos = list(egos)
    if not egos:
        return StructureReport(0, [], [], ccdf([]), {}, 0)
    l = max(net.num_layers for net, _ in egos)
    counts = np.zeros(l)
    wsum = np.zeros(l)
    wn = np.zeros(l)
    sizes, hist = [], {}
    for net, all_weights in egos:
        for i, ws in enumerate(net.weights_by_layer()):
            counts[i] += len(ws)
            wsum[i] += sum(ws)
            wn[i] += len(ws)
        sizes.append(len(all_weights))
        if len(all_weights):
            c = optimal_circles(all_weights)
            hist[c] = hist.get(c, 0) + 1
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(wn > 0, wsum / np.maximum(wn, 1), np.nan)
    return StructureReport(l, list(counts / len(egos)), [float(m) for m in means],
                           ccdf(sizes), dict(sorted(hist.items())), len(egos))


class UntaggedAlterError(ValueError):
    def __init__(self, alters):
        self.alters = sorted(str(a) for a in alters)
        shown = ", ".join(self.alters[:10])
        more = f" (+{len(self.alters) - 10} more)" if len(self.alters) > 10 else ""
        super().__init__(f"in-network alters without truth tag: {shown}{more}")


@dataclass
class SemanticEval:
    n_alters: list[int]
    strong_fraction: list[float]          # NaN for empty layers
    weak_fraction: list[float]
    monotone: bool                        # strong fraction non-increasing outward

    def as_rows(self):
        return [
            {"layer": i + 1, "n_alters": n, "strong_fraction": s, "weak_fraction": w}
            for i, (n, s, w) in enumerate(zip(self.n_alters, self.strong_fraction,
                                              self.weak_fraction))
        ]


def _tag_of(tags: Mapping, a: AlterId):
    if a in tags:
        return tags[a]
    return tags.get(a.key)


def semantic_layer_eval(networks: Iterable[EgoNetwork], tags: Mapping) -> SemanticEval:
    """Per-layer share of Strong-tagged alters, pooled over the networks.

    ``tags`` maps an :class:`AlterId` or its key to ``"Strong"``/``"Weak"``.
    """
    networks = list(networks)
    l = max((n.num_layers for n in networks), default=0)
    strong = [0] * l
    total = [0] * l
    missing = set()
    for net in networks:
        for i, layer in enumerate(net.layers):
            for a in layer:
                t = _tag_of(tags, a)
                if t not in (STRONG, WEAK):
                    missing.add(a)
                    continue
                total[i] += 1
                strong[i] += t == STRONG
    if missing:
        raise UntaggedAlterError(missing)
    sf = [s / n if n else math.nan for s, n in zip(strong, total)]
    wf = [1.0 - f if n else math.nan for f, n in zip(sf, total)]
    seen = [f for f in sf if not math.isnan(f)]
    monotone = all(a >= b for a, b in zip(seen, seen[1:]))
    return SemanticEval(total, sf, wf, monotone)


def mean_strong_fraction(networks: Iterable[EgoNetwork], tags: Mapping) -> list[float]:
    """Per-layer Strong fraction averaged over egos (each ego evaluated on its
    own network; egos with an empty layer are left out of that layer's mean)."""
    per_ego = [semantic_layer_eval([net], tags).strong_fraction for net in networks]
    if not per_ego:
        return []
    arr = np.asarray(per_ego, dtype=float)
    out = []
    for col in arr.T:
        ok = ~np.isnan(col)
        out.append(float(col[ok].mean()) if ok.any() else math.nan)
    return out
