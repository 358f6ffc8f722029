"""Synthetic labeled loan-handling log generator with planted ground truth.

Cases arrive as a Poisson stream. Each case draws planted features (a
numeric amount, a categorical channel), a treatment assignment realized as
the number of offer events in the trace, and a binary outcome from a
logistic rule in the planted features, shifted by the planted effect when
treated. The sidecar truth record keeps the per-case probabilities so
estimator-recovery tests can compare against what was actually planted.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import ConfigurationError
from .eventlog import Event, EventLog, LabelingRules, LogSchema, Trace, format_timestamp, parse_timestamp, write_log

START_ACTIVITY = "application_received"
OFFER_ACTIVITY = "send_offer"
POSITIVE_END = "application_approved"
NEGATIVE_END = "application_cancelled"
MIDDLE_ACTIVITIES = (
    "review_documents",
    "request_information",
    "risk_assessment",
    "customer_call",
)
RESOURCES = ("agent_1", "agent_2", "agent_3", "agent_4", "agent_5")
CHANNELS = ("web", "phone", "broker")
CHANNEL_PROBS = (0.5, 0.3, 0.2)


@dataclass(frozen=True)
class SynthConfig:
    n_cases: int = 250
    seed: int = 0
    start_time: str = "2024-03-01T08:00:00Z"
    arrival_rate_per_min: float = 10.0
    length_min: int = 4
    length_mean: float = 7.0
    event_gap_mean_s: float = 120.0
    treated_fraction: float = 0.5
    zero_offer_fraction: float = 0.05
    outcome_intercept: float = 0.2
    amount_weight: float = 1.2
    channel_weights: dict[str, float] = field(
        default_factory=lambda: {"web": 0.3, "phone": 0.0, "broker": -0.3}
    )
    effect_kind: str = "constant"  # constant | linear
    effect_value: float = 0.25
    effect_slope: float = 0.0

    def __post_init__(self) -> None:
        if self.n_cases < 1:
            raise ConfigurationError("n_cases must be >= 1")
        if self.arrival_rate_per_min <= 0:
            raise ConfigurationError("arrival_rate_per_min must be > 0")
        if self.length_min < 4:
            raise ConfigurationError("length_min must be >= 4 (room for offers)")
        if self.length_mean < self.length_min:
            raise ConfigurationError("length_mean must be >= length_min")
        if self.event_gap_mean_s <= 0:
            raise ConfigurationError("event_gap_mean_s must be > 0")
        if not 0.0 <= self.treated_fraction <= 1.0:
            raise ConfigurationError("treated_fraction must be in [0, 1]")
        if not 0.0 <= self.zero_offer_fraction < 1.0:
            raise ConfigurationError("zero_offer_fraction must be in [0, 1)")
        if self.effect_kind not in ("constant", "linear"):
            raise ConfigurationError("effect_kind must be 'constant' or 'linear'")
        try:
            parse_timestamp(self.start_time)
        except ValueError as exc:
            raise ConfigurationError(f"bad start_time: {exc}") from exc

    @classmethod
    def from_dict(cls, data: dict) -> SynthConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown generator config keys: {sorted(unknown)}")
        return cls(**data)


def default_rules() -> LabelingRules:
    return LabelingRules(
        positive_end_activities=frozenset({POSITIVE_END}),
        negative_end_activities=frozenset({NEGATIVE_END}),
        offer_activity=OFFER_ACTIVITY,
        treated_max_offers=1,
    )


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def generate(cfg: SynthConfig) -> tuple[EventLog, dict]:
    """Produce a labeled-by-construction log and its planted-truth record."""
    rng = np.random.default_rng(cfg.seed)
    start = parse_timestamp(cfg.start_time)
    width = len(str(cfg.n_cases))

    traces: list[Trace] = []
    truth_cases: list[dict] = []
    arrival = start
    effects: list[float] = []
    positives = 0

    for index in range(cfg.n_cases):
        arrival = arrival + timedelta(
            seconds=float(rng.exponential(60.0 / cfg.arrival_rate_per_min))
        )
        case_id = f"case_{index + 1:0{width}d}"

        length = cfg.length_min + int(rng.poisson(cfg.length_mean - cfg.length_min))
        amount = float(rng.normal(5000.0, 1500.0))
        amount_z = (amount - 5000.0) / 1500.0
        channel = str(rng.choice(CHANNELS, p=CHANNEL_PROBS))

        if rng.random() < cfg.zero_offer_fraction:
            treated: bool | None = None
        else:
            treated = bool(rng.random() < cfg.treated_fraction)

        logit = (
            cfg.outcome_intercept
            + cfg.amount_weight * amount_z
            + cfg.channel_weights.get(channel, 0.0)
        )
        p_control = min(max(_sigmoid(logit), 0.01), 0.99)
        if cfg.effect_kind == "constant":
            delta = cfg.effect_value
        else:
            delta = cfg.effect_value + cfg.effect_slope * amount_z
        p_treated = min(max(p_control - delta, 0.01), 0.99)
        p_used = p_treated if treated else p_control
        negative = bool(rng.random() < p_used)
        if not negative:
            positives += 1
        effects.append(p_control - p_treated)

        offers = 0 if treated is None else (1 if treated else 2)
        middle_slots = length - 2
        middle = [str(rng.choice(MIDDLE_ACTIVITIES)) for _ in range(middle_slots)]
        offer_positions = rng.choice(middle_slots, size=offers, replace=False)
        for position in offer_positions:
            middle[int(position)] = OFFER_ACTIVITY
        activities = [START_ACTIVITY] + middle + [NEGATIVE_END if negative else POSITIVE_END]

        gaps = rng.exponential(cfg.event_gap_mean_s, size=length - 1)
        timestamps = [arrival]
        for gap in gaps:
            timestamps.append(timestamps[-1] + timedelta(seconds=float(gap)))

        case_attrs = {"amount": amount, "channel": channel}
        events = tuple(
            Event(
                case_id=case_id,
                activity=activity,
                timestamp=timestamp,
                resource=str(rng.choice(RESOURCES)),
                event_attrs={"effort": float(rng.exponential(30.0))},
                case_attrs=case_attrs,
            )
            for activity, timestamp in zip(activities, timestamps)
        )
        traces.append(Trace(case_id, events))
        truth_cases.append(
            {
                "case_id": case_id,
                "treated": treated,
                "outcome_negative": negative,
                "p_control": p_control,
                "p_treated": p_treated,
                "effect": p_control - p_treated,
                "arrival": format_timestamp(arrival),
            }
        )

    schema = LogSchema(
        case_attrs={"amount": "numeric", "channel": "categorical"},
        event_attrs={"effort": "numeric"},
        has_resource=True,
    )
    log = EventLog(tuple(traces), schema)
    truth = {
        "config": asdict(cfg),
        "labeling_rules": default_rules().to_dict(),
        "n_cases": cfg.n_cases,
        "positive_rate": positives / cfg.n_cases,
        "mean_effect": float(np.mean(effects)),
        "cases": truth_cases,
    }
    return log, truth


def generate_csv(cfg: SynthConfig) -> tuple[str, dict]:
    log, truth = generate(cfg)
    return write_log(log), truth
