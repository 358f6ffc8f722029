"""Gain-ranked intervention scheduling for running process cases.

Combines an undesired-outcome probability estimate with a treatment-effect
estimate into a per-case net-gain score, and replays event logs through a
deterministic simulator that allocates a bounded pool of intervention
resources to the highest-gain candidates.
"""

__version__ = "0.1.0"

from .eventlog import (  # noqa: F401
    Event,
    EventLog,
    LabelingRules,
    Outcome,
    Trace,
    Treatment,
    label_outcomes,
    label_treatment,
    parse_log,
    temporal_split,
    write_log,
)
from .gain import CostParams, GainAssessment, assess, cost_no_treat, cost_treat, gain  # noqa: F401
from .simulation import (  # noqa: F401
    DurationKind,
    DurationSampler,
    Policy,
    ScoreTable,
    SimulationResult,
    compare_policies,
    replay,
    replay_with_models,
)
