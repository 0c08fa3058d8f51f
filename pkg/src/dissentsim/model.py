"""Core single-agent model: stances, contextual payoffs, and participation thresholds.

Each agent holds a private preference (for the rebellion or for the status
quo) and publicly shows one of three stances:

* ``R``  — join the rebellion,
* ``U``  — actively support the status quo,
* ``NJ`` — abstain / stay silent.

Expected payoffs for the three stances combine hard contextual factors
(stakes, punishments, participation costs), soft social terms (reputation
among observed neighbors, personal-integrity value), and a fixed taste term
per stance.  All payoff functions are written as plain elementwise
arithmetic, so they accept Python floats or numpy arrays interchangeably;
the simulation engine relies on that to evaluate whole populations at once
through the exact same expressions.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

#: Absolute tolerance under which two stance payoffs count as tied.
TIE_EPS = 1e-9

_ENV_NEG_INF = -math.inf


class Position(enum.IntEnum):
    """Public stance.  Integer codes double as the tie-break order NJ < U < R."""

    NJ = 0
    U = 1
    R = 2


class PrivateType(enum.Enum):
    """An agent's true, privately held preference."""

    PRO_REBELLION = "pro_rebellion"
    PRO_STATUS_QUO = "pro_status_quo"


#: Stable tie-break order: earliest wins when the previous stance is not tied.
TIE_ORDER = (Position.NJ, Position.U, Position.R)


@dataclass(frozen=True)
class SoftTerms:
    """Soft payoff contribution of one candidate stance.

    ``rep``   — reputation payoff among the agent's observed neighbors.
    ``integ`` — personal-integrity payoff (reward for consistency or penalty
                for falsifying).
    """

    rep: float
    integ: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.rep)) and np.all(np.isfinite(self.integ))):
            raise InvalidParameterError("SoftTerms rep/integ must be finite")


@dataclass(frozen=True)
class AgentParams:
    """Hard per-agent factors. All are time-constant; events shift them via offsets.

    F      — value the agent places on the rebellion winning.
    S      — value the agent places on the status quo surviving.
    A_U    — punishment the agent expects from the winning rebels for having
             supported the status quo.
    A_R    — punishment the agent expects from the surviving regime for having
             rebelled or stayed aside when support was demanded.
    c      — cost of abstaining (lost protection, suspicion, self-denial).
    C      — cost of actively supporting the status quo (time, exposure,
             being targeted by rebels); the model assumes C >= c.
    V_R/V_U/V_NJ — fixed taste for each stance (e.g. appetite for violence).
    x      — private preference.
    p_base — the agent's baseline estimate that the rebellion wins.
    """

    F: float
    S: float
    A_U: float
    A_R: float
    c: float
    C: float
    V_R: float
    V_U: float
    V_NJ: float
    x: PrivateType
    p_base: float

    def validate(self) -> None:
        """Load-time checks; raises InvalidParameterError, warns when C == c."""
        numeric = {
            "F": self.F, "S": self.S, "A_U": self.A_U, "A_R": self.A_R,
            "c": self.c, "C": self.C, "V_R": self.V_R, "V_U": self.V_U,
            "V_NJ": self.V_NJ, "p_base": self.p_base,
        }
        for name, value in numeric.items():
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        for name in ("F", "S", "A_U", "A_R", "c", "C"):
            if numeric[name] < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {numeric[name]!r}")
        if not 0.0 <= self.p_base <= 1.0:
            raise InvalidParameterError(f"p_base must lie in [0, 1], got {self.p_base!r}")
        if self.C < self.c:
            raise InvalidParameterError(
                f"C >= c violated: C={self.C!r} < c={self.c!r}"
            )
        if self.C == self.c:
            warnings.warn(
                "C == c: supporting the status quo is no costlier than abstaining; "
                "the model expects strict C > c",
                stacklevel=2,
            )
        if not isinstance(self.x, PrivateType):
            raise InvalidParameterError(f"x must be a PrivateType, got {self.x!r}")


def _check_finite(**named) -> None:
    for name, value in named.items():
        if not np.all(np.isfinite(value)):
            raise InvalidParameterError(f"{name} must be finite")


def _check_probability(p) -> None:
    arr = np.asarray(p)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidParameterError("p must lie in [0, 1]")


def payoff_rebel(F, A_U, p, soft: SoftTerms, V_R):
    """Expected payoff of publicly joining the rebellion.

    Wins F with probability p; eats the rebels'-enemy punishment A_U if the
    status quo survives instead.
    """
    _check_probability(p)
    _check_finite(F=F, A_U=A_U, V_R=V_R)
    return p * F - (1.0 - p) * A_U + soft.rep + soft.integ + V_R


def payoff_statusquo(S, A_R, C, p, soft: SoftTerms, V_U):
    """Expected payoff of actively supporting the status quo.

    Keeps S if the status quo survives, eats the rebel punishment A_R if the
    rebellion wins, and always pays the activism cost C.
    """
    _check_probability(p)
    _check_finite(S=S, A_R=A_R, C=C, V_U=V_U)
    return S * (1.0 - p) - A_R * p - C + soft.rep + soft.integ + V_U


def payoff_nojoin(S, c, p, soft: SoftTerms, V_NJ):
    """Expected payoff of abstaining: keeps S if the status quo survives, pays c."""
    _check_probability(p)
    _check_finite(S=S, c=c, V_NJ=V_NJ)
    return S * (1.0 - p) - c + soft.rep + soft.integ + V_NJ


def choose_positions(e_nj, e_u, e_r, previous) -> np.ndarray:
    """Vectorized stance selection: argmax of the three payoffs with a sticky tie rule.

    ``previous`` holds Position codes.  Stances within TIE_EPS of the best
    payoff form the tied set; the previous stance wins if tied, otherwise the
    earliest tied stance in (NJ, U, R) order.  Returns int8 Position codes.
    """
    e_nj = np.asarray(e_nj, dtype=np.float64)
    e_u = np.asarray(e_u, dtype=np.float64)
    e_r = np.asarray(e_r, dtype=np.float64)
    prev = np.asarray(previous, dtype=np.int8)

    best = np.maximum(np.maximum(e_nj, e_u), e_r)
    tied_nj = e_nj >= best - TIE_EPS
    tied_u = e_u >= best - TIE_EPS
    tied_r = e_r >= best - TIE_EPS

    out = np.where(
        tied_nj,
        np.int8(Position.NJ),
        np.where(tied_u, np.int8(Position.U), np.int8(Position.R)),
    ).astype(np.int8)
    prev_tied = np.where(
        prev == Position.NJ, tied_nj, np.where(prev == Position.U, tied_u, tied_r)
    )
    return np.where(prev_tied, prev, out).astype(np.int8)


def decide(
    params: AgentParams,
    p: float,
    soft_by_position,
    previous: Position = Position.NJ,
) -> Position:
    """Pick the stance with the highest expected payoff at win-probability ``p``.

    ``soft_by_position`` maps each Position to its SoftTerms.  Delegates to
    :func:`choose_positions` so the scalar and vectorized paths share one rule.
    """
    e_nj = payoff_nojoin(params.S, params.c, p, soft_by_position[Position.NJ], params.V_NJ)
    e_u = payoff_statusquo(
        params.S, params.A_R, params.C, p, soft_by_position[Position.U], params.V_U
    )
    e_r = payoff_rebel(params.F, params.A_U, p, soft_by_position[Position.R], params.V_R)
    code = choose_positions(
        np.asarray([e_nj]), np.asarray([e_u]), np.asarray([e_r]),
        np.asarray([int(previous)], dtype=np.int8),
    )[0]
    return Position(int(code))


def _extended_ratio(numerator: float, denominator: float) -> float:
    """numerator/denominator on the extended reals.

    A zero denominator means p never influences the comparison: the sign of
    the numerator alone decides, so the threshold degenerates to -inf (the
    favored stance wins for every p) or +inf (it never wins).
    """
    if denominator == 0.0:
        return math.inf if numerator > 0.0 else _ENV_NEG_INF
    return numerator / denominator


def threshold_nj_over_u(
    params: AgentParams, soft_nj: SoftTerms, soft_u: SoftTerms
) -> float:
    """Win-probability above which abstaining strictly beats supporting the status quo.

    Closed form of payoff_nojoin > payoff_statusquo solved for p.  Returns an
    extended real; -inf means abstention (weakly) dominates for every p.
    """
    _check_finite(c=params.c, C=params.C, A_R=params.A_R, V_NJ=params.V_NJ, V_U=params.V_U)
    numerator = (
        params.c - params.C
        - soft_nj.rep + soft_u.rep
        - soft_nj.integ + soft_u.integ
        - params.V_NJ + params.V_U
    )
    return _extended_ratio(numerator, params.A_R)


def threshold_r_over_nj(
    params: AgentParams, soft_r: SoftTerms, soft_nj: SoftTerms
) -> float:
    """Win-probability above which rebelling strictly beats abstaining.

    Closed form of payoff_rebel > payoff_nojoin solved for p; extended real
    with the same degenerate-denominator convention as threshold_nj_over_u.
    """
    _check_finite(
        F=params.F, S=params.S, A_U=params.A_U, c=params.c,
        V_R=params.V_R, V_NJ=params.V_NJ,
    )
    numerator = (
        params.S - params.c + params.A_U
        + soft_nj.rep - soft_r.rep
        + soft_nj.integ - soft_r.integ
        + params.V_NJ - params.V_R
    )
    denominator = params.F + params.S + params.A_U
    return _extended_ratio(numerator, denominator)
