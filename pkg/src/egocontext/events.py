"""Canonical JSONL event schema: parsing, validation and serialization."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Optional, Union

from egocontext.social import Channel, DeviceClass

EVENT_TYPES = frozenset(c.value for c in Channel) | {"gps"}
SIGHTING_TYPES = frozenset({"bt", "wfd"})
_DEVICE_CLASSES = {d.value: d for d in DeviceClass}


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class EventEnvelope:
    ego: str
    ts: int
    type: str
    counterpart: Optional[str] = None
    rssi: Optional[int] = None
    device_class: Optional[str] = None
    lat: Optional[float] = None
    lon: Optional[float] = None

    @property
    def is_gps(self):
        return self.type == "gps"

    @property
    def is_sighting(self):
        return self.type in SIGHTING_TYPES

    def to_dict(self) -> dict:
        d = {"ego": self.ego, "ts": self.ts, "type": self.type}
        for name in ("counterpart", "rssi", "device_class", "lat", "lon"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def _int(obj, name, line):
    v = obj.get(name)
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ParseError(f"field {name!r} must be an integer", line)
    return v


def _num(obj, name, line):
    v = obj.get(name)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParseError(f"field {name!r} must be a finite number", line)
    return float(v)


def _str(obj, name, line):
    v = obj.get(name)
    if not isinstance(v, str) or not v:
        raise ParseError(f"field {name!r} must be a non-empty string", line)
    return v


def parse_event(line: str, lineno: Optional[int] = None,
                identities: Optional[Mapping[str, str]] = None) -> EventEnvelope:
    """Parse and validate one JSONL line. Unknown fields are ignored.

    ``identities`` maps raw counterpart identifiers to canonical alter keys.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("event must be a JSON object", lineno)
    for name in ("ego", "ts", "type"):
        if name not in obj:
            raise ParseError(f"missing required field {name!r}", lineno)
    ego = _str(obj, "ego", lineno)
    ts = _int(obj, "ts", lineno)
    typ = obj["type"]
    if typ not in EVENT_TYPES:
        raise ParseError(f"unknown event type {typ!r}", lineno)

    if typ == "gps":
        if "counterpart" in obj:
            raise ParseError("gps event must not carry a counterpart", lineno)
        for name in ("lat", "lon"):
            if name not in obj:
                raise ParseError(f"gps event missing {name!r}", lineno)
        lat, lon = _num(obj, "lat", lineno), _num(obj, "lon", lineno)
        if not -90.0 <= lat <= 90.0:
            raise ParseError(f"lat out of bounds: {lat}", lineno)
        if not -180.0 <= lon <= 180.0:
            raise ParseError(f"lon out of bounds: {lon}", lineno)
        return EventEnvelope(ego, ts, typ, lat=lat, lon=lon)

    if "counterpart" not in obj:
        raise ParseError(f"{typ} event missing 'counterpart'", lineno)
    cp = _str(obj, "counterpart", lineno)
    if identities:
        cp = identities.get(cp, cp)
    if typ in SIGHTING_TYPES:
        if "rssi" not in obj or "device_class" not in obj:
            raise ParseError(f"{typ} event missing rssi/device_class", lineno)
        rssi = _int(obj, "rssi", lineno)
        dc = obj["device_class"]
        if dc not in _DEVICE_CLASSES:
            raise ParseError(f"unknown device_class {dc!r}", lineno)
        return EventEnvelope(ego, ts, typ, cp, rssi=rssi, device_class=dc)
    if "rssi" in obj or "device_class" in obj:
        raise ParseError(f"{typ} event must not carry rssi/device_class", lineno)
    return EventEnvelope(ego, ts, typ, cp)


def iter_events(source: Union[str, Path, IO[str], Iterable[str]],
                identities: Optional[Mapping[str, str]] = None) -> Iterator[EventEnvelope]:
    """Parse events from a path, an open file or an iterable of lines.
    Blank lines are skipped; line numbers are 1-based."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_events(fh, identities)
        return
    for i, line in enumerate(source, start=1):
        if line.strip():
            yield parse_event(line, i, identities)


def write_events(events: Iterable[EventEnvelope], fh: IO[str]) -> int:
    n = 0
    for ev in events:
        fh.write(ev.to_json())
        fh.write("\n")
        n += 1
    return n


def load_identities(path: Union[str, Path]) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or not all(
            isinstance(k, str) and isinstance(v, str) and v for k, v in data.items()):
        raise ParseError("identity map must be a JSON object of string -> non-empty string")
    return data
