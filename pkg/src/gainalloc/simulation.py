"""Replay of a test log as a timed event stream with bounded intervention resources.

One simulation run is strictly single-threaded and deterministic. Events of
all traces are merged into a stream ordered by (timestamp, case_id,
within-case index). Every event of an ongoing, untreated case whose prefix
is within the schema cap triggers a re-score; eligible cases sit in a
totally ordered candidate queue (at most one entry per case). Resources are
blocked for a sampled treatment duration; pending releases at or before the
current instant are processed, in time order, before the instant's event.
Allocation is attempted after every queue change and at every release
instant, always taking the queue head under the active ranking policy and
booking the realized net gain at that moment. The run ends when the stream
is exhausted (by which point every case has completed and left the queue).

Treating a case does not alter its replayed events: the estimated effect is
assumed accurate and enters only through the gain ledger.
"""

from __future__ import annotations

import csv
import hashlib
import heapq
import io
import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum

import numpy as np

from .encoding import EncodingSchema, Prefix, encode
from .errors import ConfigurationError, DataError
from .estimators import CateModel, OutcomeModel, estimate_cate, predict_uout
from .eventlog import EventLog, Trace, format_timestamp, parse_timestamp
from .gain import CostParams, cost_no_treat, cost_treat


class DurationKind(Enum):
    FIXED = "fixed"
    NORMAL = "normal"
    EXPONENTIAL = "exponential"

    @classmethod
    def parse(cls, value: str) -> DurationKind:
        for kind in cls:
            if kind.value == value:
                return kind
        raise ConfigurationError(f"unknown duration kind '{value}'")


class Policy(Enum):
    GAIN_RANKED = "gain"
    PROBABILITY_RANKED = "probability"

    @classmethod
    def parse(cls, value: str) -> Policy:
        for policy in cls:
            if policy.value == value:
                return policy
        raise ConfigurationError(f"unknown policy '{value}'")


def _normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


@dataclass
class DurationSampler:
    """Treatment-duration source in seconds; truncated kinds use rejection."""

    kind: DurationKind
    fixed_value: float = 60.0
    lo: float = 1.0
    hi: float = 60.0
    normal_mean: float = 30.5
    normal_sd: float = 15.0
    exp_mean: float = 30.5
    seed: int = 0
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind is DurationKind.FIXED:
            if self.fixed_value <= 0:
                raise ConfigurationError("fixed duration must be > 0 seconds")
        else:
            if not 0 < self.lo <= self.hi:
                raise ConfigurationError("duration bounds must satisfy 0 < lo <= hi")
            if self._acceptance_probability() < 1e-6:
                raise ConfigurationError(
                    "duration distribution places almost no mass inside "
                    f"[{self.lo}, {self.hi}] seconds"
                )
        self._rng = np.random.default_rng(self.seed)

    def _acceptance_probability(self) -> float:
        if self.kind is DurationKind.NORMAL:
            if self.normal_sd <= 0:
                raise ConfigurationError("normal_sd must be > 0")
            return _normal_cdf((self.hi - self.normal_mean) / self.normal_sd) - _normal_cdf(
                (self.lo - self.normal_mean) / self.normal_sd
            )
        if self.kind is DurationKind.EXPONENTIAL:
            if self.exp_mean <= 0:
                raise ConfigurationError("exp_mean must be > 0")
            return math.exp(-self.lo / self.exp_mean) - math.exp(-self.hi / self.exp_mean)
        return 1.0

    def sample(self) -> float:
        if self.kind is DurationKind.FIXED:
            return self.fixed_value
        while True:
            if self.kind is DurationKind.NORMAL:
                value = self._rng.normal(self.normal_mean, self.normal_sd)
            else:
                value = self._rng.exponential(self.exp_mean)
            if self.lo <= value <= self.hi:
                return float(value)

    def fresh(self) -> DurationSampler:
        """Same parameters, stream restarted from the seed."""
        return replace(self)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "fixed_value": self.fixed_value,
            "lo": self.lo,
            "hi": self.hi,
            "normal_mean": self.normal_mean,
            "normal_sd": self.normal_sd,
            "exp_mean": self.exp_mean,
            "seed": self.seed,
        }


class ModelScorer:
    """Scores a case prefix with the trained classifier pair."""

    def __init__(
        self, outcome_model: OutcomeModel, cate_model: CateModel, schema: EncodingSchema
    ) -> None:
        if outcome_model.width != schema.width or cate_model.width != schema.width:
            raise DataError("model widths do not match the encoding schema")
        self.outcome_model = outcome_model
        self.cate_model = cate_model
        self.schema = schema

    def score(self, trace: Trace, k: int) -> tuple[float, float] | None:
        prefix = Prefix(trace.case_id, trace.events[:k], k, trace.outcome, trace.treatment)
        x = encode(prefix, self.schema)
        return predict_uout(self.outcome_model, x), estimate_cate(self.cate_model, x)


SCORE_COLUMNS = ("case_id", "prefix_len", "p_uout", "cate")


@dataclass
class ScoreTable:
    """Externally produced (case_id, prefix_len) -> (p_uout, cate) scores."""

    scores: dict[tuple[str, int], tuple[float, float]]

    def score(self, trace: Trace, k: int) -> tuple[float, float] | None:
        return self.scores.get((trace.case_id, k))

    def max_prefix_len(self) -> int:
        return max((k for _, k in self.scores), default=0)

    @classmethod
    def from_csv(cls, text: str) -> ScoreTable:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != SCORE_COLUMNS:
            raise DataError(f"score CSV must have columns {', '.join(SCORE_COLUMNS)}")
        scores: dict[tuple[str, int], tuple[float, float]] = {}
        for index, row in enumerate(reader, start=2):
            try:
                key = (row["case_id"], int(row["prefix_len"]))
                p_uout = float(row["p_uout"])
                cate = float(row["cate"])
            except (TypeError, ValueError) as exc:
                raise DataError(f"score CSV row {index}: {exc}") from exc
            if key[1] < 1:
                raise DataError(f"score CSV row {index}: prefix_len must be >= 1")
            if not 0.0 <= p_uout <= 1.0:
                raise DataError(f"score CSV row {index}: p_uout outside [0, 1]")
            if not -1.0 <= cate <= 1.0:
                raise DataError(f"score CSV row {index}: cate outside [-1, 1]")
            if key in scores:
                raise DataError(f"score CSV row {index}: duplicate key {key}")
            scores[key] = (p_uout, cate)
        return cls(scores)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(SCORE_COLUMNS)
        for (case_id, k), (p_uout, cate) in sorted(self.scores.items()):
            writer.writerow([case_id, k, repr(p_uout), repr(cate)])
        return buffer.getvalue()


@dataclass(frozen=True)
class CandidateEntry:
    case_id: str
    p_uout: float
    cate: float
    gain: float  # realized net gain at the assessment instant
    assessed_at: datetime


def rank_key(entry: CandidateEntry, policy: Policy):
    """Total order: best candidate first, FIFO on ties, case_id last resort."""
    if policy is Policy.GAIN_RANKED:
        return (-entry.gain, entry.assessed_at, entry.case_id)
    return (-entry.p_uout, entry.assessed_at, entry.case_id)


class CandidateQueue:
    """At most one entry per case, totally ordered by the policy key."""

    def __init__(self, policy: Policy) -> None:
        self.policy = policy
        self._entries: dict[str, CandidateEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def upsert(self, entry: CandidateEntry) -> str:
        action = "update" if entry.case_id in self._entries else "enqueue"
        self._entries[entry.case_id] = entry
        return action

    def remove(self, case_id: str) -> bool:
        return self._entries.pop(case_id, None) is not None

    def pop_best(self) -> CandidateEntry | None:
        if not self._entries:
            return None
        best = min(self._entries.values(), key=lambda e: rank_key(e, self.policy))
        del self._entries[best.case_id]
        return best

    def ordered(self) -> list[CandidateEntry]:
        return sorted(self._entries.values(), key=lambda e: rank_key(e, self.policy))

    def snapshot_hash(self) -> str:
        digest = hashlib.sha256()
        for entry in self.ordered():
            digest.update(
                f"{entry.case_id}|{entry.p_uout!r}|{entry.cate!r}|{entry.gain!r}|"
                f"{format_timestamp(entry.assessed_at)}\n".encode("utf-8")
            )
        return digest.hexdigest()


@dataclass(frozen=True)
class DecisionRecord:
    seq: int
    instant: datetime
    action: str  # enqueue | update | remove | complete | allocate | release
    case_id: str
    p_uout: float | None
    cate: float | None
    gain: float | None
    busy: int
    queue_size: int
    queue_hash: str


TRACE_COLUMNS = (
    "seq",
    "instant",
    "action",
    "case_id",
    "p_uout",
    "cate",
    "gain",
    "busy",
    "queue_size",
    "queue_hash",
)


def write_decision_trace(records: tuple[DecisionRecord, ...]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.seq,
                format_timestamp(r.instant),
                r.action,
                r.case_id,
                "" if r.p_uout is None else repr(r.p_uout),
                "" if r.cate is None else repr(r.cate),
                "" if r.gain is None else repr(r.gain),
                r.busy,
                r.queue_size,
                r.queue_hash,
            ]
        )
    return buffer.getvalue()


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    treated: bool
    treatment_time: datetime | None
    gain_at_treatment: float | None
    p_uout: float | None
    cate: float | None


@dataclass
class SimulationResult:
    policy: Policy
    total_gain: float
    total_cate: float
    treated_cases: int
    treated_fraction: float
    candidate_cases: int
    per_case_records: tuple[CaseRecord, ...]
    decision_trace: tuple[DecisionRecord, ...] = field(repr=False, compare=False)
    config_echo: dict = field(default_factory=dict)
    seed: int = 0

    def treated_case_ids(self) -> list[str]:
        ordered = [r for r in self.decision_trace if r.action == "allocate"]
        return [r.case_id for r in ordered]

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.value,
            "total_gain": self.total_gain,
            "total_cate": self.total_cate,
            "treated_cases": self.treated_cases,
            "treated_fraction": self.treated_fraction,
            "candidate_cases": self.candidate_cases,
            "per_case_records": [
                {
                    "case_id": r.case_id,
                    "treated": r.treated,
                    "treatment_time": None
                    if r.treatment_time is None
                    else format_timestamp(r.treatment_time),
                    "gain_at_treatment": r.gain_at_treatment,
                    "p_uout": r.p_uout,
                    "cate": r.cate,
                }
                for r in self.per_case_records
            ],
            "config_echo": self.config_echo,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _CaseState:
    __slots__ = (
        "trace",
        "total",
        "k",
        "treated",
        "treatment_time",
        "gain_at_treatment",
        "p_uout",
        "cate",
    )

    def __init__(self, trace: Trace) -> None:
        self.trace = trace
        self.total = len(trace.events)
        self.k = 0
        self.treated = False
        self.treatment_time: datetime | None = None
        self.gain_at_treatment: float | None = None
        self.p_uout: float | None = None
        self.cate: float | None = None


def _eligible(policy: Policy, p_uout: float, cate: float, params: CostParams) -> bool:
    if p_uout <= params.tau:
        return False
    if policy is Policy.GAIN_RANKED:
        return cate > 0.0
    return True


def replay(
    test_log: EventLog,
    scorer,
    max_prefix_len: int,
    params: CostParams,
    pool_capacity: int,
    sampler: DurationSampler,
    policy: Policy,
    config_echo: dict | None = None,
) -> SimulationResult:
    """Run one deterministic allocation simulation over the test log.

    ``scorer.score(trace, k)`` must return ``(p_uout, cate)`` for the first-k
    prefix, or None to leave the case's previous assessment in force.
    """
    if pool_capacity < 0:
        raise ConfigurationError("pool capacity must be >= 0")
    if max_prefix_len < 0:
        raise ConfigurationError("max_prefix_len must be >= 0")

    stream: list[tuple[datetime, str, int]] = []
    states: dict[str, _CaseState] = {}
    for trace in test_log.traces:
        states[trace.case_id] = _CaseState(trace)
        for index, event in enumerate(trace.events):
            stream.append((event.timestamp, trace.case_id, index))
    stream.sort()

    queue = CandidateQueue(policy)
    busy: list[tuple[datetime, int, str]] = []  # (release instant, draw order, case)
    records: list[DecisionRecord] = []
    candidates: set[str] = set()
    treated_order: list[str] = []
    totals = {"gain": 0.0, "cate": 0.0}
    counters = {"seq": 0, "draws": 0}

    def log_record(
        instant: datetime,
        action: str,
        case_id: str,
        p_uout: float | None = None,
        cate: float | None = None,
        gain_value: float | None = None,
    ) -> None:
        records.append(
            DecisionRecord(
                seq=counters["seq"],
                instant=instant,
                action=action,
                case_id=case_id,
                p_uout=p_uout,
                cate=cate,
                gain=gain_value,
                busy=len(busy),
                queue_size=len(queue),
                queue_hash=queue.snapshot_hash(),
            )
        )
        counters["seq"] += 1

    def try_allocate(now: datetime) -> None:
        while len(busy) < pool_capacity:
            entry = queue.pop_best()
            if entry is None:
                return
            duration = sampler.sample()
            counters["draws"] += 1
            heapq.heappush(
                busy, (now + timedelta(seconds=duration), counters["draws"], entry.case_id)
            )
            state = states[entry.case_id]
            state.treated = True
            state.treatment_time = now
            state.gain_at_treatment = entry.gain
            state.p_uout = entry.p_uout
            state.cate = entry.cate
            totals["gain"] += entry.gain
            totals["cate"] += entry.cate
            treated_order.append(entry.case_id)
            log_record(now, "allocate", entry.case_id, entry.p_uout, entry.cate, entry.gain)

    def drain_releases(until: datetime) -> None:
        while busy and busy[0][0] <= until:
            release_time, _, case_id = heapq.heappop(busy)
            log_record(release_time, "release", case_id)
            try_allocate(release_time)

    for timestamp, case_id, _ in stream:
        drain_releases(timestamp)
        state = states[case_id]
        state.k += 1
        if state.k == state.total:
            if queue.remove(case_id):
                log_record(timestamp, "complete", case_id)
        elif not state.treated and state.k <= max_prefix_len:
            scored = scorer.score(state.trace, state.k)
            if scored is not None:
                p_uout, cate = scored
                state.p_uout = p_uout
                state.cate = cate
                realized = cost_no_treat(p_uout, params) - cost_treat(p_uout, cate, params)
                if _eligible(policy, p_uout, cate, params):
                    action = queue.upsert(
                        CandidateEntry(case_id, p_uout, cate, realized, timestamp)
                    )
                    candidates.add(case_id)
                    log_record(timestamp, action, case_id, p_uout, cate, realized)
                elif queue.remove(case_id):
                    log_record(timestamp, "remove", case_id, p_uout, cate, realized)
        try_allocate(timestamp)

    assert len(queue) == 0, "all cases complete, so the queue must drain"

    per_case = tuple(
        CaseRecord(
            case_id=state.trace.case_id,
            treated=state.treated,
            treatment_time=state.treatment_time,
            gain_at_treatment=state.gain_at_treatment,
            p_uout=state.p_uout,
            cate=state.cate,
        )
        for state in sorted(states.values(), key=lambda s: s.trace.case_id)
    )
    n_cases = len(test_log.traces)
    return SimulationResult(
        policy=policy,
        total_gain=totals["gain"],
        total_cate=totals["cate"],
        treated_cases=len(treated_order),
        treated_fraction=len(treated_order) / n_cases if n_cases else 0.0,
        candidate_cases=len(candidates),
        per_case_records=per_case,
        decision_trace=tuple(records),
        config_echo=dict(config_echo or {}),
        seed=sampler.seed,
    )


def replay_with_models(
    test_log: EventLog,
    outcome_model: OutcomeModel,
    cate_model: CateModel,
    schema: EncodingSchema,
    params: CostParams,
    pool_capacity: int,
    sampler: DurationSampler,
    policy: Policy,
    config_echo: dict | None = None,
) -> SimulationResult:
    scorer = ModelScorer(outcome_model, cate_model, schema)
    return replay(
        test_log,
        scorer,
        schema.max_prefix_len,
        params,
        pool_capacity,
        sampler,
        policy,
        config_echo,
    )


def compare_policies(
    test_log: EventLog,
    scorer,
    max_prefix_len: int,
    params: CostParams,
    pool_capacity: int,
    sampler: DurationSampler,
    config_echo: dict | None = None,
) -> tuple[SimulationResult, SimulationResult]:
    """Run both ranking policies on identical streams and duration draws.

    Each run gets a fresh sampler restarted from the same seed, so the k-th
    allocation of either policy sees the k-th draw. Both ledgers book the
    realized net gain at treatment time; the probability-ranked baseline
    additionally has its treated-effect sum available as ``total_cate``.
    """
    by_gain = replay(
        test_log,
        scorer,
        max_prefix_len,
        params,
        pool_capacity,
        sampler.fresh(),
        Policy.GAIN_RANKED,
        config_echo,
    )
    by_probability = replay(
        test_log,
        scorer,
        max_prefix_len,
        params,
        pool_capacity,
        sampler.fresh(),
        Policy.PROBABILITY_RANKED,
        config_echo,
    )
    return by_gain, by_probability
