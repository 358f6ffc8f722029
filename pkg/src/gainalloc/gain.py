"""Expected intervention costs and the net gain of treating a case.

All quantities are unitless expected costs. ``cost_no_treat`` is the
expected cost of leaving a case alone, ``cost_treat`` the expected cost
after an intervention that lowers the undesired-outcome probability by the
estimated effect, and ``gain`` their difference. A case is worth assessing
only while its undesired-outcome probability exceeds the threshold and the
estimated effect is positive; both tests are strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .errors import ConfigurationError


@dataclass(frozen=True)
class CostParams:
    c_uout: float  # cost of an undesired outcome
    c_t1: float  # cost of applying the intervention
    tau: float  # probability threshold for eligibility

    def __post_init__(self) -> None:
        if self.c_uout < 0:
            raise ConfigurationError("c_uout must be >= 0")
        if self.c_t1 < 0:
            raise ConfigurationError("c_t1 must be >= 0")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigurationError("tau must be in [0, 1]")


def _check_probability(p_uout: float) -> None:
    if not 0.0 <= p_uout <= 1.0:
        raise ValueError(f"p_uout must be in [0, 1], got {p_uout}")


def cost_no_treat(p_uout: float, params: CostParams) -> float:
    """p_uout * c_uout."""
    _check_probability(p_uout)
    return p_uout * params.c_uout


def cost_treat(p_uout: float, cate: float, params: CostParams) -> float:
    """(p_uout - cate) * c_uout + c_t1."""
    _check_probability(p_uout)
    return (p_uout - cate) * params.c_uout + params.c_t1


def gain(p_uout: float, cate: float, params: CostParams) -> float:
    """Net gain of treating: cost without minus cost with the intervention.

    Computed through the two cost forms rather than the algebraic shortcut
    ``cate * c_uout - c_t1`` so that tests exercise both; the identity is
    asserted as a property elsewhere.
    """
    return cost_no_treat(p_uout, params) - cost_treat(p_uout, cate, params)


@dataclass(frozen=True)
class GainAssessment:
    """Snapshot of one case's intervention economics at one instant.

    ``cost_treat`` and ``gain`` are populated only for eligible cases.
    """

    case_id: str
    p_uout: float
    cate: float
    cost_no_treat: float
    cost_treat: float | None
    gain: float | None
    eligible: bool
    assessed_at: datetime


def assess(
    case_id: str,
    p_uout: float,
    cate: float,
    params: CostParams,
    now: datetime,
) -> GainAssessment:
    """Evaluate eligibility (p_uout > tau and cate > 0, both strict)."""
    base_cost = cost_no_treat(p_uout, params)
    eligible = p_uout > params.tau and cate > 0.0
    if eligible:
        treated_cost = cost_treat(p_uout, cate, params)
        net = base_cost - treated_cost
    else:
        treated_cost = None
        net = None
    return GainAssessment(
        case_id=case_id,
        p_uout=p_uout,
        cate=cate,
        cost_no_treat=base_cost,
        cost_treat=treated_cost,
        gain=net,
        eligible=eligible,
        assessed_at=now,
    )
