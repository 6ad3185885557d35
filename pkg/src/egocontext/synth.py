"""Synthetic event streams: the latency-benchmark workload, planted-truth
worlds and small hand-built scenarios."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from egocontext.events import EventEnvelope

DAY_MS = 86_400_000
_M_PER_DEG = 111_320.0

_SOCIAL_MIX = (
    ("call", 0.25), ("sms", 0.25), ("osn_comment", 0.1), ("osn_reaction", 0.1),
    ("osn_mention", 0.05), ("bt", 0.2), ("wfd", 0.05),
)
_PLACE_CLASSES = ("AccessPoint", "SmartTv", "Printer", "HomeAssistant", "SmartBulb")


def generate_benchmark(n_contacts: int, n_alters: int, seed: int = 0,
                       ego: str = "bench") -> list[EventEnvelope]:
    """``n_contacts`` calls, each with a uniformly random alter, one per second."""
    if n_contacts <= 0 or n_alters <= 0:
        raise ValueError("n_contacts and n_alters must be positive")
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, n_alters, size=n_contacts)
    return [EventEnvelope(ego, i * 1000, "call", f"a{int(k)}") for i, k in enumerate(picks)]


@dataclass(frozen=True)
class SyntheticWorldSpec:
    n_egos: int = 1
    n_strong_alters: int = 15
    n_weak_alters: int = 50
    rate_strong: float = 2.0       # events per day
    rate_weak: float = 0.2
    rate_spread: float = 0.5       # per-alter rate ~ rate * U(1 - spread, 1 + spread)
    n_home_devices: int = 5
    n_transient_devices: int = 50
    home: tuple[float, float] = (43.7102, 10.4036)
    work: tuple[float, float] = (43.7206, 10.4080)
    jitter_m: float = 20.0
    duration_days: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.rate_strong <= 0 or self.rate_weak <= 0:
            raise ValueError("interaction rates must be positive")
        if not 0.0 <= self.rate_spread < 1.0:
            raise ValueError("rate_spread must be in [0, 1)")
        if self.duration_days < 0 or self.n_egos < 0:
            raise ValueError("duration_days and n_egos must be non-negative")


def _poisson_times(rng, rate_per_day, duration_ms):
    n = rng.poisson(rate_per_day * duration_ms / DAY_MS)
    return np.sort(rng.integers(0, duration_ms, size=n))


def _jitter(rng, anchor, sigma_m):
    lat, lon = anchor
    dlat = rng.normal(0.0, sigma_m) / _M_PER_DEG
    dlon = rng.normal(0.0, sigma_m) / (_M_PER_DEG * math.cos(math.radians(lat)))
    return round(lat + dlat, 7), round(lon + dlon, 7)


def _ego_events(rng, ego, spec, duration_ms):
    out = []      # (ts, seq, envelope)
    tags = {}
    types = [t for t, _ in _SOCIAL_MIX]
    probs = np.array([p for _, p in _SOCIAL_MIX])
    probs = probs / probs.sum()

    def alter_rate(rate):
        return rate * rng.uniform(1.0 - spec.rate_spread, 1.0 + spec.rate_spread)

    def person(key, rate):
        for ts in _poisson_times(rng, alter_rate(rate), duration_ms):
            typ = types[rng.choice(len(types), p=probs)]
            if typ in ("bt", "wfd"):
                dc = "Wearable" if rng.random() < 0.2 else "PersonalMobile"
                ev = EventEnvelope(ego, int(ts), typ, key, rssi=int(rng.integers(-80, -40)),
                                   device_class=dc)
            else:
                ev = EventEnvelope(ego, int(ts), typ, key)
            out.append(ev)

    for i in range(spec.n_strong_alters):
        key = f"{ego}.s{i}"
        tags[key] = "Strong"
        person(key, spec.rate_strong)
    for i in range(spec.n_weak_alters):
        key = f"{ego}.w{i}"
        tags[key] = "Weak"
        person(key, spec.rate_weak)

    def device(key, rate, mean_len):
        dc = _PLACE_CLASSES[int(rng.integers(len(_PLACE_CLASSES)))]
        typ = "bt" if rng.random() < 0.7 else "wfd"
        for start in _poisson_times(rng, alter_rate(rate), duration_ms):
            for j in range(1 + int(rng.poisson(mean_len))):
                ts = int(start) + j * 60_000
                if ts < duration_ms:
                    out.append(EventEnvelope(ego, ts, typ, key, rssi=int(rng.integers(-90, -40)),
                                             device_class=dc))

    for i in range(spec.n_home_devices):
        key = f"{ego}.hd{i}"
        tags[key] = "Strong"
        device(key, spec.rate_strong, 5.0)
    for i in range(spec.n_transient_devices):
        key = f"{ego}.td{i}"
        tags[key] = "Weak"
        device(key, spec.rate_weak, 0.5)

    n_days = int(math.ceil(duration_ms / DAY_MS))
    for d in range(n_days):
        base = d * DAY_MS
        slots = [(h, spec.home) for h in (1, 6, 21, 23)]
        if d % 7 < 5:
            slots += [(h, spec.work) for h in (9, 11, 14, 16)]
        if rng.random() < 0.3:
            far = (spec.home[0] + rng.uniform(-0.2, 0.2), spec.home[1] + rng.uniform(-0.2, 0.2))
            slots.append((19, far))
        for h, anchor in slots:
            ts = base + h * 3_600_000 + int(rng.integers(0, 600_000))
            if ts < duration_ms:
                lat, lon = _jitter(rng, anchor, spec.jitter_m)
                out.append(EventEnvelope(ego, ts, "gps", lat=lat, lon=lon))
    return out, tags


def generate_world(spec: SyntheticWorldSpec) -> tuple[list[EventEnvelope], dict[str, str]]:
    """Planted-truth world: returns the event stream (sorted by time) and the
    truth-tag sidecar mapping each person/device key to Strong or Weak."""
    rng = np.random.default_rng(spec.seed)
    duration_ms = int(round(spec.duration_days * DAY_MS))
    events, tags = [], {}
    for e in range(spec.n_egos):
        ego = f"u{e}"
        evs, t = _ego_events(rng, ego, spec, duration_ms)
        events.extend(evs)
        tags.update(t)
    if duration_ms == 0:
        return [], tags
    # stable sort keeps generation order for equal timestamps
    events.sort(key=lambda ev: (ev.ts, ev.ego))
    return events, tags


def mode_population(rng: np.random.Generator, n_modes: int = 4, ratio: float = 2.0,
                    base: float = 1.0, size: int = 25, rel_spread: float = 0.03) -> np.ndarray:
    """Alter weights clustered around log-spaced modes ``base * ratio**i``.

    Each mode contributes ``size`` draws with multiplicative log-normal noise
    of scale ``rel_spread``.
    """
    parts = [base * ratio ** i * np.exp(rng.normal(0.0, rel_spread, size=size))
             for i in range(n_modes)]
    return np.concatenate(parts)


def three_alter_scenario_events(ego: str = "u1") -> list[EventEnvelope]:
    """Warm-up history followed by one window in which two colleagues (b, c)
    are sighted nearby and a rarely heard-from friend (a) sends a message.

    With the default configuration the last window puts b, c and a in the
    2nd, 3rd and 4th social layers.
    """
    ev = []
    t = 0

    def call(who, n):
        nonlocal t
        for _ in range(n):
            ev.append(EventEnvelope(ego, t, "call", who))
            t += 61_000

    call("x1", 40)
    call("x2", 40)
    call("b", 20)
    call("c", 10)
    for f in ("f1", "f2", "f3", "f4", "f5"):
        call(f, 2)
    ev.append(EventEnvelope(ego, t, "sms", "a"))
    t = (t // 60_000 + 10) * 60_000
    ev.append(EventEnvelope(ego, t + 1_000, "bt", "b", rssi=-55, device_class="PersonalMobile"))
    ev.append(EventEnvelope(ego, t + 2_000, "bt", "c", rssi=-58, device_class="PersonalMobile"))
    ev.append(EventEnvelope(ego, t + 3_000, "sms", "a"))
    return ev
