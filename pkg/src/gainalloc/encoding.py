"""Prefix extraction and fixed-width aggregate feature encoding.

A fitted :class:`EncodingSchema` freezes the feature layout from training
data only: one-hot columns for case categoricals, occurrence-count columns
for every categorical event value (activity and resource included), sum
columns for numeric event attributes, plus a block of engineered temporal
features. Values unseen at fit time contribute zero to every feature, so
the vector width never changes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import DataError, SchemaError
from .eventlog import Event, EventLog, Outcome, Treatment

ACTIVITY_KEY = "activity"
RESOURCE_KEY = "resource"

# Engineered per-prefix features: position, offer pressure, elapsed seconds
# since case start, and calendar fields of the last event (UTC).
ENGINEERED_FEATURES = (
    "event_number",
    "offer_count",
    "sum_time",
    "hour_of_day",
    "day_of_month",
    "month",
)


@dataclass(frozen=True)
class Prefix:
    case_id: str
    events: tuple[Event, ...]
    k: int
    outcome: Outcome
    treatment: Treatment

    @property
    def last_timestamp(self) -> datetime:
        return self.events[-1].timestamp


def prefix_length_cap(log: EventLog, percentile: float) -> int:
    """Nearest-rank percentile of trace lengths (index ceil(p*n), 1-based)."""
    if not 0.0 < percentile <= 1.0:
        raise DataError(f"percentile must be in (0, 1], got {percentile}")
    if not log.traces:
        raise DataError("cannot derive a prefix cap from an empty log")
    lengths = sorted(len(trace) for trace in log.traces)
    rank = math.ceil(percentile * len(lengths))
    return lengths[rank - 1]


def extract_prefixes(log: EventLog, cap: int) -> list[Prefix]:
    """All prefixes of length 1..min(L, cap) per trace, inheriting labels."""
    if cap < 1:
        raise DataError(f"prefix cap must be >= 1, got {cap}")
    prefixes = []
    for trace in log.traces:
        for k in range(1, min(len(trace), cap) + 1):
            prefixes.append(
                Prefix(trace.case_id, trace.events[:k], k, trace.outcome, trace.treatment)
            )
    return prefixes


@dataclass(eq=True)
class EncodingSchema:
    """Immutable-by-convention feature layout fitted on training prefixes."""

    case_numeric_attrs: tuple[str, ...]
    case_categorical_domains: tuple[tuple[str, tuple[str, ...]], ...]
    event_numeric_attrs: tuple[str, ...]
    event_categorical_domains: tuple[tuple[str, tuple[str, ...]], ...]
    max_prefix_len: int
    offer_activity: str | None
    feature_names: tuple[str, ...] = field(init=False)
    _value_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names: list[str] = []
        value_index: dict[tuple[str, str], int] = {}
        for attr in self.case_numeric_attrs:
            names.append(f"case:{attr}")
        for attr, domain in self.case_categorical_domains:
            for value in domain:
                value_index[("case/" + attr, value)] = len(names)
                names.append(f"case:{attr}={value}")
        for attr, domain in self.event_categorical_domains:
            for value in domain:
                value_index[("event/" + attr, value)] = len(names)
                names.append(f"{attr}={value}" if attr in (ACTIVITY_KEY, RESOURCE_KEY) else f"event:{attr}={value}")
        for attr in self.event_numeric_attrs:
            names.append(f"event:{attr}:sum")
        names.extend(ENGINEERED_FEATURES)
        self.feature_names = tuple(names)
        self._value_index = value_index

    @property
    def width(self) -> int:
        return len(self.feature_names)

    def to_dict(self) -> dict:
        return {
            "case_numeric_attrs": list(self.case_numeric_attrs),
            "case_categorical_domains": [
                [attr, list(domain)] for attr, domain in self.case_categorical_domains
            ],
            "event_numeric_attrs": list(self.event_numeric_attrs),
            "event_categorical_domains": [
                [attr, list(domain)] for attr, domain in self.event_categorical_domains
            ],
            "max_prefix_len": self.max_prefix_len,
            "offer_activity": self.offer_activity,
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> EncodingSchema:
        schema = cls(
            case_numeric_attrs=tuple(data["case_numeric_attrs"]),
            case_categorical_domains=tuple(
                (attr, tuple(domain)) for attr, domain in data["case_categorical_domains"]
            ),
            event_numeric_attrs=tuple(data["event_numeric_attrs"]),
            event_categorical_domains=tuple(
                (attr, tuple(domain)) for attr, domain in data["event_categorical_domains"]
            ),
            max_prefix_len=int(data["max_prefix_len"]),
            offer_activity=data.get("offer_activity"),
        )
        stored = data.get("feature_names")
        if stored is not None and tuple(stored) != schema.feature_names:
            raise SchemaError("stored feature names do not match the reconstructed layout")
        return schema

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> EncodingSchema:
        return cls.from_dict(json.loads(text))

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def fit_schema(
    prefixes: list[Prefix], cap: int, offer_activity: str | None = None
) -> EncodingSchema:
    """Fit the feature layout from training prefixes only.

    Categorical domains are the sorted distinct values observed; numeric
    event attributes are registered with sum aggregation.
    """
    if not prefixes:
        raise DataError("cannot fit an encoding schema on zero prefixes")

    case_numeric: set[str] = set()
    case_domains: dict[str, set[str]] = {}
    event_numeric: set[str] = set()
    event_domains: dict[str, set[str]] = {}

    def observe(domains: dict[str, set[str]], attr: str, value: str) -> None:
        domains.setdefault(attr, set()).add(value)

    for prefix in prefixes:
        for event in prefix.events:
            for name, value in event.case_attrs.items():
                if isinstance(value, float):
                    case_numeric.add(name)
                else:
                    observe(case_domains, name, value)
            for name, value in event.event_attrs.items():
                if isinstance(value, float):
                    event_numeric.add(name)
                else:
                    observe(event_domains, name, value)
            observe(event_domains, ACTIVITY_KEY, event.activity)
            if event.resource is not None:
                observe(event_domains, RESOURCE_KEY, event.resource)

    return EncodingSchema(
        case_numeric_attrs=tuple(sorted(case_numeric)),
        case_categorical_domains=tuple(
            (attr, tuple(sorted(values))) for attr, values in sorted(case_domains.items())
        ),
        event_numeric_attrs=tuple(sorted(event_numeric)),
        event_categorical_domains=tuple(
            (attr, tuple(sorted(values))) for attr, values in sorted(event_domains.items())
        ),
        max_prefix_len=cap,
        offer_activity=offer_activity,
    )


def encode(prefix: Prefix, schema: EncodingSchema) -> np.ndarray:
    """Encode one prefix into a fixed-width float vector.

    Pure function: case categoricals are one-hot over the fitted domain,
    case numerics copied, categorical event values counted, numeric event
    attributes summed. Unseen values contribute zero everywhere.
    """
    vector = np.zeros(schema.width, dtype=np.float64)
    index = schema._value_index
    first = prefix.events[0]

    offset = 0
    for attr in schema.case_numeric_attrs:
        value = first.case_attrs.get(attr)
        if isinstance(value, float):
            vector[offset] = value
        offset += 1
    for attr, value in first.case_attrs.items():
        if not isinstance(value, float):
            position = index.get(("case/" + attr, value))
            if position is not None:
                vector[position] = 1.0

    for event in prefix.events:
        position = index.get(("event/" + ACTIVITY_KEY, event.activity))
        if position is not None:
            vector[position] += 1.0
        if event.resource is not None:
            position = index.get(("event/" + RESOURCE_KEY, event.resource))
            if position is not None:
                vector[position] += 1.0
        for attr, value in event.event_attrs.items():
            if not isinstance(value, float):
                position = index.get(("event/" + attr, value))
                if position is not None:
                    vector[position] += 1.0

    numeric_base = schema.width - len(ENGINEERED_FEATURES) - len(schema.event_numeric_attrs)
    for slot, attr in enumerate(schema.event_numeric_attrs):
        total = 0.0
        for event in prefix.events:
            value = event.event_attrs.get(attr)
            if isinstance(value, float):
                total += value
        vector[numeric_base + slot] = total

    last = prefix.events[-1].timestamp
    engineered_base = schema.width - len(ENGINEERED_FEATURES)
    offers = 0
    if schema.offer_activity is not None:
        offers = sum(1 for event in prefix.events if event.activity == schema.offer_activity)
    vector[engineered_base + 0] = float(prefix.k)
    vector[engineered_base + 1] = float(offers)
    vector[engineered_base + 2] = (last - first.timestamp).total_seconds()
    vector[engineered_base + 3] = float(last.hour)
    vector[engineered_base + 4] = float(last.day)
    vector[engineered_base + 5] = float(last.month)
    return vector


def encode_batch(prefixes: list[Prefix], schema: EncodingSchema) -> np.ndarray:
    if not prefixes:
        return np.zeros((0, schema.width), dtype=np.float64)
    return np.stack([encode(prefix, schema) for prefix in prefixes])
