"""Social context: channel filtering, interaction counters and SC feature vectors."""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from egocontext.core import AlterId, AlterKind, EgoNetwork, layer_of

RSSI_THRESHOLD_DBM = -65


class Channel(str, enum.Enum):
    CALL = "call"
    SMS = "sms"
    OSN_COMMENT = "osn_comment"
    OSN_REACTION = "osn_reaction"
    OSN_MENTION = "osn_mention"
    BT_SIGHTING = "bt"
    WFD_SIGHTING = "wfd"

    @property
    def is_sighting(self):
        return self in SIGHTING_CHANNELS


VIRTUAL_CHANNELS = frozenset({Channel.OSN_COMMENT, Channel.OSN_REACTION, Channel.OSN_MENTION})
PHYSICAL_CHANNELS = frozenset({Channel.CALL, Channel.SMS, Channel.BT_SIGHTING, Channel.WFD_SIGHTING})
SIGHTING_CHANNELS = frozenset({Channel.BT_SIGHTING, Channel.WFD_SIGHTING})


class DeviceClass(str, enum.Enum):
    PERSONAL_MOBILE = "PersonalMobile"
    WEARABLE = "Wearable"
    ACCESS_POINT = "AccessPoint"
    SMART_TV = "SmartTv"
    PRINTER = "Printer"
    HOME_ASSISTANT = "HomeAssistant"
    SMART_BULB = "SmartBulb"
    OTHER = "Other"


PERSONAL_DEVICES = frozenset({DeviceClass.PERSONAL_MOBILE, DeviceClass.WEARABLE})


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class SocialEvent:
    timestamp: int
    channel: Channel
    counterpart: AlterId
    rssi: Optional[int] = None
    device_class: Optional[DeviceClass] = None

    def __post_init__(self):
        if self.counterpart.kind is not AlterKind.PERSON:
            raise ValidationError("social counterpart must be a Person alter")
        if self.channel.is_sighting:
            if self.rssi is None or self.device_class is None:
                raise ValidationError(
                    f"{self.channel.value} sighting requires rssi and device_class")
        elif self.rssi is not None or self.device_class is not None:
            raise ValidationError(f"{self.channel.value} event must not carry rssi/device_class")


def filter_social_event(event: SocialEvent,
                        rssi_threshold: int = RSSI_THRESHOLD_DBM) -> Optional[SocialEvent]:
    """Drop weak or non-personal radio sightings; pass everything else."""
    if not event.channel.is_sighting:
        return event
    if event.rssi is None or event.device_class is None:
        raise ValidationError("sighting event requires rssi and device_class")
    if event.rssi >= rssi_threshold and event.device_class in PERSONAL_DEVICES:
        return event
    return None


def extract_active_alters(events: Iterable[SocialEvent]) -> set[AlterId]:
    return {e.counterpart for e in events}


@dataclass
class SocialWeightState:
    """Per-alter interaction counters for one ego.

    Repeated sightings of the same counterpart on the same channel within one
    window count once. ``window_ms`` defines that window.
    """

    lam: float = 0.5
    window_ms: int = 60_000
    counters: dict[AlterId, Counter] = field(default_factory=dict)
    last_seen: dict[AlterId, int] = field(default_factory=dict)
    _sighting_window: dict[tuple[AlterId, Channel], int] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lambda out of range: {self.lam}")
        if self.window_ms <= 0:
            raise ValidationError("window_ms must be positive")

    def record(self, event: SocialEvent) -> bool:
        """Count one (already filtered) event. Returns False if debounced."""
        a = event.counterpart
        prev = self.last_seen.get(a)
        if prev is not None and event.timestamp < prev:
            raise ValidationError(f"out-of-order event for {a}: {event.timestamp} < {prev}")
        self.last_seen[a] = event.timestamp
        if event.channel.is_sighting:
            slot = (a, event.channel)
            w = event.timestamp // self.window_ms
            if self._sighting_window.get(slot) == w:
                return False
            self._sighting_window[slot] = w
        self.counters.setdefault(a, Counter())[event.channel] += 1
        return True

    def virtual_weight(self, alter: AlterId) -> int:
        c = self.counters.get(alter)
        return sum(c[s] for s in VIRTUAL_CHANNELS) if c else 0

    def physical_weight(self, alter: AlterId) -> int:
        c = self.counters.get(alter)
        return sum(c[s] for s in PHYSICAL_CHANNELS) if c else 0

    def n_interactions(self, alter: AlterId) -> int:
        c = self.counters.get(alter)
        return sum(c.values()) if c else 0


def social_weight(state: SocialWeightState, alter: AlterId) -> float:
    lam = state.lam
    return lam * state.virtual_weight(alter) + (1.0 - lam) * state.physical_weight(alter)


@dataclass(frozen=True)
class SocialFeatureVector:
    sc: tuple[float, ...]
    window_end: int
    active_count: int


def layer_distribution(network: EgoNetwork, active: Iterable[AlterId]) -> tuple[float, ...]:
    """Fraction of ``active`` alters per layer; alters outside the network go
    to the outermost layer."""
    active = set(active)
    counts = [0] * network.num_layers
    for a in active:
        i = layer_of(network, a)
        counts[(i if i is not None else network.num_layers) - 1] += 1
    if not active:
        return tuple(0.0 for _ in counts)
    n = len(active)
    return tuple(c / n for c in counts)


def social_feature_vector(network: EgoNetwork, active: Iterable[AlterId],
                          window_end: int = 0) -> SocialFeatureVector:
    active = set(active)
    return SocialFeatureVector(layer_distribution(network, active), window_end, len(active))
