"""Event-log parsing, rule-based labeling, and temporal train/val/test splitting.

On-disk format: UTF-8 CSV, comma separated, first row is the header.
Mandatory columns: ``case_id``, ``activity``, ``timestamp`` (RFC3339).
Optional columns: ``resource`` plus ``outcome``/``treatment`` label columns
(written by :func:`write_log` once a log has been labeled, so that split
files survive a round trip). ``case:<name>`` columns hold case attributes
(constant within a case), ``event:<name>`` columns hold event attributes.
An attribute column whose non-empty values all parse as finite floats is
numeric, otherwise categorical.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from .errors import (
    ConfigurationError,
    InsufficientDataError,
    IntegrityError,
    LabelingConflictError,
    RowError,
    SchemaError,
)

MANDATORY_COLUMNS = ("case_id", "activity", "timestamp")
CASE_ATTR_PREFIX = "case:"
EVENT_ATTR_PREFIX = "event:"

AttrValue = float | str


class Outcome(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNLABELED = ""


class Treatment(Enum):
    TREATED = "treated"
    UNTREATED = "untreated"
    UNLABELED = ""


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC3339 timestamp; naive values are taken to be UTC."""
    parsed = datetime.fromisoformat(value.strip().replace("Z", "+00:00"))
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    return value.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class Event:
    case_id: str
    activity: str
    timestamp: datetime
    resource: str | None = None
    event_attrs: dict[str, AttrValue] = field(default_factory=dict)
    case_attrs: dict[str, AttrValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple[Event, ...]
    outcome: Outcome = Outcome.UNLABELED
    treatment: Treatment = Treatment.UNLABELED

    def __len__(self) -> int:
        return len(self.events)

    @property
    def start_time(self) -> datetime:
        return self.events[0].timestamp

    def activity_set(self) -> set[str]:
        return {event.activity for event in self.events}

    def count_activity(self, activity: str) -> int:
        return sum(1 for event in self.events if event.activity == activity)


@dataclass(frozen=True)
class LogSchema:
    """Declared attribute names and kinds ("numeric" | "categorical")."""

    case_attrs: dict[str, str] = field(default_factory=dict)
    event_attrs: dict[str, str] = field(default_factory=dict)
    has_resource: bool = False


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...]
    schema: LogSchema = field(default_factory=LogSchema)

    def __len__(self) -> int:
        return len(self.traces)

    def case_ids(self) -> list[str]:
        return [trace.case_id for trace in self.traces]


@dataclass(frozen=True)
class LabelingRules:
    positive_end_activities: frozenset[str]
    negative_end_activities: frozenset[str]
    offer_activity: str
    treated_max_offers: int = 1

    def __post_init__(self) -> None:
        overlap = self.positive_end_activities & self.negative_end_activities
        if overlap:
            raise LabelingConflictError(
                f"positive and negative end activities overlap: {sorted(overlap)}"
            )
        if self.treated_max_offers < 1:
            raise ConfigurationError("treated_max_offers must be >= 1")
        if not self.offer_activity:
            raise ConfigurationError("offer_activity must be non-empty")

    @classmethod
    def from_dict(cls, data: dict) -> LabelingRules:
        try:
            return cls(
                positive_end_activities=frozenset(data["positive_end_activities"]),
                negative_end_activities=frozenset(data["negative_end_activities"]),
                offer_activity=str(data["offer_activity"]),
                treated_max_offers=int(data.get("treated_max_offers", 1)),
            )
        except KeyError as exc:
            raise ConfigurationError(f"labeling rules missing key {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "positive_end_activities": sorted(self.positive_end_activities),
            "negative_end_activities": sorted(self.negative_end_activities),
            "offer_activity": self.offer_activity,
            "treated_max_offers": self.treated_max_offers,
        }


@dataclass(frozen=True)
class OutcomeLabelReport:
    retained: int
    dropped: int
    positives: int
    negatives: int
    dropped_case_ids: tuple[str, ...]


def _is_float(value: str) -> bool:
    try:
        return math.isfinite(float(value))
    except ValueError:
        return False


def _column_kind(rows: list[dict[str, str]], column: str) -> str:
    non_empty = [row[column] for row in rows if row.get(column) not in (None, "")]
    if non_empty and all(_is_float(value) for value in non_empty):
        return "numeric"
    return "categorical"


_OUTCOME_VALUES = {item.value: item for item in Outcome}
_TREATMENT_VALUES = {item.value: item for item in Treatment}


def parse_log(data: bytes | str) -> EventLog:
    """Parse CSV content into an :class:`EventLog`, one trace per case.

    Events are sorted by timestamp within each trace, stable on input order
    for equal timestamps. Raises :class:`SchemaError` for a missing
    mandatory column, :class:`RowError` (with the 1-based file row) for
    unparseable values, and :class:`IntegrityError` when case-level values
    disagree between events of one case.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    for column in MANDATORY_COLUMNS:
        if column not in header:
            raise SchemaError(f"missing mandatory column '{column}'")
    rows = list(reader)

    case_cols = [c for c in header if c.startswith(CASE_ATTR_PREFIX)]
    event_cols = [c for c in header if c.startswith(EVENT_ATTR_PREFIX)]
    has_resource = "resource" in header
    has_outcome = "outcome" in header
    has_treatment = "treatment" in header
    case_kinds = {c[len(CASE_ATTR_PREFIX):]: _column_kind(rows, c) for c in sorted(case_cols)}
    event_kinds = {c[len(EVENT_ATTR_PREFIX):]: _column_kind(rows, c) for c in sorted(event_cols)}

    def typed(column: str, kind: str, raw: str) -> AttrValue:
        return float(raw) if kind == "numeric" else raw

    buckets: dict[str, list[tuple[datetime, int, Event]]] = {}
    case_labels: dict[str, tuple[Outcome, Treatment, int]] = {}
    for index, row in enumerate(rows, start=2):
        case_id = row.get("case_id") or ""
        activity = row.get("activity") or ""
        if not case_id:
            raise RowError(index, "empty case_id")
        if not activity:
            raise RowError(index, "empty activity")
        try:
            timestamp = parse_timestamp(row.get("timestamp") or "")
        except ValueError as exc:
            raise RowError(index, f"unparseable timestamp {row.get('timestamp')!r}") from exc

        case_attrs: dict[str, AttrValue] = {}
        for col in case_cols:
            raw = row.get(col)
            if raw not in (None, ""):
                name = col[len(CASE_ATTR_PREFIX):]
                case_attrs[name] = typed(col, case_kinds[name], raw)
        event_attrs: dict[str, AttrValue] = {}
        for col in event_cols:
            raw = row.get(col)
            if raw not in (None, ""):
                name = col[len(EVENT_ATTR_PREFIX):]
                event_attrs[name] = typed(col, event_kinds[name], raw)

        resource = (row.get("resource") or None) if has_resource else None
        event = Event(case_id, activity, timestamp, resource, event_attrs, case_attrs)

        outcome = Outcome.UNLABELED
        treatment = Treatment.UNLABELED
        if has_outcome:
            raw = (row.get("outcome") or "").strip().lower()
            if raw not in _OUTCOME_VALUES:
                raise RowError(index, f"unknown outcome label {raw!r}")
            outcome = _OUTCOME_VALUES[raw]
        if has_treatment:
            raw = (row.get("treatment") or "").strip().lower()
            if raw not in _TREATMENT_VALUES:
                raise RowError(index, f"unknown treatment label {raw!r}")
            treatment = _TREATMENT_VALUES[raw]

        if case_id in case_labels:
            known_outcome, known_treatment, first_row = case_labels[case_id]
            if outcome is not known_outcome:
                raise IntegrityError(
                    f"case '{case_id}': conflicting outcome labels (rows {first_row} and {index})"
                )
            if treatment is not known_treatment:
                raise IntegrityError(
                    f"case '{case_id}': conflicting treatment labels (rows {first_row} and {index})"
                )
        else:
            case_labels[case_id] = (outcome, treatment, index)
        buckets.setdefault(case_id, []).append((timestamp, index, event))

    traces = []
    for case_id, entries in buckets.items():
        entries.sort(key=lambda item: (item[0], item[1]))
        events = tuple(item[2] for item in entries)
        reference = events[0].case_attrs
        for event in events[1:]:
            if event.case_attrs != reference:
                names = sorted(set(reference) | set(event.case_attrs))
                bad = next(
                    n for n in names if reference.get(n) != event.case_attrs.get(n)
                )
                raise IntegrityError(
                    f"case '{case_id}': conflicting values for case attribute '{bad}'"
                )
        outcome, treatment, _ = case_labels[case_id]
        traces.append(Trace(case_id, events, outcome, treatment))

    schema = LogSchema(case_kinds, event_kinds, has_resource)
    return EventLog(tuple(traces), schema)


def write_log(log: EventLog) -> str:
    """Serialize a log back to the CSV format accepted by :func:`parse_log`."""
    labeled = any(
        t.outcome is not Outcome.UNLABELED or t.treatment is not Treatment.UNLABELED
        for t in log.traces
    )
    columns = list(MANDATORY_COLUMNS)
    if log.schema.has_resource:
        columns.append("resource")
    if labeled:
        columns.extend(["outcome", "treatment"])
    columns.extend(CASE_ATTR_PREFIX + name for name in log.schema.case_attrs)
    columns.extend(EVENT_ATTR_PREFIX + name for name in log.schema.event_attrs)

    def cell(value: AttrValue | None) -> str:
        if value is None:
            return ""
        return repr(value) if isinstance(value, float) else str(value)

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for trace in log.traces:
        for event in trace.events:
            row = {
                "case_id": event.case_id,
                "activity": event.activity,
                "timestamp": format_timestamp(event.timestamp),
            }
            if log.schema.has_resource:
                row["resource"] = event.resource or ""
            if labeled:
                row["outcome"] = trace.outcome.value
                row["treatment"] = trace.treatment.value
            for name in log.schema.case_attrs:
                row[CASE_ATTR_PREFIX + name] = cell(event.case_attrs.get(name))
            for name in log.schema.event_attrs:
                row[EVENT_ATTR_PREFIX + name] = cell(event.event_attrs.get(name))
            writer.writerow(row)
    return buffer.getvalue()


def label_outcomes(
    log: EventLog, rules: LabelingRules
) -> tuple[EventLog, OutcomeLabelReport]:
    """Assign case outcomes by end-activity rule.

    A trace whose activity set intersects the positive set is positive, one
    intersecting the negative set is negative; traces matching neither are
    dropped and counted. Matching both raises :class:`LabelingConflictError`.
    """
    kept: list[Trace] = []
    dropped: list[str] = []
    positives = negatives = 0
    for trace in log.traces:
        activities = trace.activity_set()
        is_positive = bool(activities & rules.positive_end_activities)
        is_negative = bool(activities & rules.negative_end_activities)
        if is_positive and is_negative:
            raise LabelingConflictError(
                f"case '{trace.case_id}' matches both positive and negative end activities"
            )
        if is_positive:
            kept.append(replace(trace, outcome=Outcome.POSITIVE))
            positives += 1
        elif is_negative:
            kept.append(replace(trace, outcome=Outcome.NEGATIVE))
            negatives += 1
        else:
            dropped.append(trace.case_id)
    report = OutcomeLabelReport(len(kept), len(dropped), positives, negatives, tuple(dropped))
    return EventLog(tuple(kept), log.schema), report


def label_treatment(log: EventLog, rules: LabelingRules) -> EventLog:
    """Assign treatment labels from the per-case offer-activity count.

    Exactly ``treated_max_offers`` occurrences mean treated, more mean
    untreated. Counts below the threshold (including zero) stay unlabeled:
    such cases are kept for outcome prediction but excluded from effect
    estimation.
    """
    traces = []
    for trace in log.traces:
        offers = trace.count_activity(rules.offer_activity)
        if offers == rules.treated_max_offers:
            treatment = Treatment.TREATED
        elif offers > rules.treated_max_offers:
            treatment = Treatment.UNTREATED
        else:
            treatment = Treatment.UNLABELED
        traces.append(replace(trace, treatment=treatment))
    return EventLog(tuple(traces), log.schema)


def temporal_split(
    log: EventLog, fractions: tuple[float, float, float]
) -> tuple[EventLog, EventLog, EventLog]:
    """Split whole cases by start time into train/validation/test partitions.

    Traces are ordered by first-event timestamp (ties broken by case_id);
    the first ``floor(n * train)`` go to train, the next ``floor(n * val)``
    to validation, the remainder to test.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ConfigurationError("fractions must be three positive values")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigurationError(f"fractions must sum to 1, got {sum(fractions)}")
    n = len(log.traces)
    if n < 5:
        raise InsufficientDataError(f"need at least 5 traces to split, got {n}")
    ordered = sorted(log.traces, key=lambda t: (t.start_time, t.case_id))
    n_train = int(n * fractions[0])
    n_val = int(n * fractions[1])
    train = EventLog(tuple(ordered[:n_train]), log.schema)
    val = EventLog(tuple(ordered[n_train : n_train + n_val]), log.schema)
    test = EventLog(tuple(ordered[n_train + n_val :]), log.schema)
    return train, val, test
