"""Discrete-time synchronous dynamics over a population of stance-choosing agents.

One step = one time unit (the shipped baseline reads it as one day).  Every
step: timed events shift the shared environment, each agent re-evaluates the
three stances against the *previous* step's public state (previous rebel
share, previous neighbor stances), consecutive-falsification counters and
exit streaks update, and time advances.  Decisions never see anything from
the current step, so update order within a step cannot matter.

The per-agent contract operations (``effective_params``, ``integrity_value``,
``check_exit``...) are plain scalar functions; :func:`step` evaluates the
same formulas over numpy arrays so large populations stay fast, and the two
paths are pinned together by equivalence tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidParameterError
from .model import (
    AgentParams,
    Position,
    PrivateType,
    SoftTerms,
    choose_positions,
    payoff_nojoin,
    payoff_rebel,
    payoff_statusquo,
)
from .network import (
    ReputationSpec,
    ReputationVariant,
    SocialNetwork,
    generate_network,
    influence_scores,
)

#: Environment offset names events may shift.
DELTA_FIELDS = ("dF", "dS", "dC", "dc", "dA_U", "dA_R", "dp")

#: Characters allowed in event labels (kept CSV-safe: no ',', ';', newlines).
_LABEL_SAFE = set(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.- "
)


def consistent(y: Position, x: PrivateType) -> bool:
    """True when the shown stance matches the private preference.

    Abstaining is *not* consistent for either type: silence falsifies both a
    rebel heart and a loyalist one.
    """
    return (y is Position.R and x is PrivateType.PRO_REBELLION) or (
        y is Position.U and x is PrivateType.PRO_STATUS_QUO
    )


@dataclass(frozen=True)
class IntegritySpec:
    """Integrity reward/penalty shape.

    A consistent stance earns ``+nu_match``.  Any falsified stance costs
    ``min(cap, nu0 + kappa * d)`` where ``d`` counts consecutive falsifying
    steps, so sustained pretence wears on the agent up to a cap.
    """

    nu_match: float
    nu0: float
    kappa: float
    cap: float

    def __post_init__(self):
        for name in ("nu_match", "nu0", "kappa", "cap"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0.0:
                raise InvalidParameterError(f"{name} must be finite and >= 0, got {value!r}")
        if self.cap <= 0.0:
            raise InvalidParameterError(f"cap must be > 0, got {self.cap!r}")
        if self.nu0 > self.cap:
            raise InvalidParameterError(
                f"nu0 must not exceed cap, got nu0={self.nu0!r} > cap={self.cap!r}"
            )


@dataclass(frozen=True)
class Environment:
    """Shared additive offsets on the hard factors, plus the share->p coupling.

    ``dp`` shifts every agent's perceived win probability directly;
    ``beta_share`` scales how strongly the previous rebel share feeds it.
    """

    dF: float = 0.0
    dS: float = 0.0
    dC: float = 0.0
    dc: float = 0.0
    dA_U: float = 0.0
    dA_R: float = 0.0
    dp: float = 0.0
    beta_share: float = 0.0

    def __post_init__(self):
        for name in DELTA_FIELDS + ("beta_share",):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if self.beta_share < 0.0:
            raise InvalidParameterError(f"beta_share must be >= 0, got {self.beta_share!r}")


@dataclass(frozen=True)
class Event:
    """A timed additive shock: at ``step``, add ``deltas`` to the environment."""

    step: int
    label: str
    deltas: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "deltas", dict(self.deltas))
        if self.step < 0:
            raise InvalidParameterError(f"event step must be >= 0, got {self.step!r}")
        if not self.label or not set(self.label) <= _LABEL_SAFE:
            raise InvalidParameterError(
                f"event label {self.label!r} must be non-empty and use only "
                "letters, digits, '_', '-', '.', or spaces"
            )
        for key, value in self.deltas.items():
            if key not in DELTA_FIELDS:
                raise InvalidParameterError(f"unknown event delta {key!r}")
            if not np.isfinite(value):
                raise InvalidParameterError(f"event delta {key} must be finite, got {value!r}")


@dataclass(frozen=True)
class ExitSpec:
    """Leave-the-system rule: exit after ``patience`` consecutive steps whose
    best available payoff falls below ``threshold``."""

    threshold: float
    patience: int

    def __post_init__(self):
        if math.isnan(self.threshold) or self.threshold == math.inf:
            raise InvalidParameterError("exit threshold must be a real value or -inf")
        if self.patience < 1:
            raise InvalidParameterError(f"exit patience must be >= 1, got {self.patience!r}")


@dataclass
class AgentState:
    """Full per-agent state at one instant."""

    id: int
    params: AgentParams
    y: Position
    d_falsify: int = 0
    exited: bool = False
    low_payoff_streak: int = 0


@dataclass(frozen=True)
class StepRecord:
    """Aggregate outcome of one step.

    Shares are fractions of non-exited agents (all zero once everyone has
    left); ``n_falsifying`` counts non-exited agents whose shown stance
    contradicts their private preference; ``mean_p`` averages the perceived
    win probability the step's decisions actually used.
    """

    t: int
    share_R: float
    share_U: float
    share_NJ: float
    n_exited: int
    n_falsifying: int
    mean_p: float
    events: tuple[str, ...] = ()


@dataclass(frozen=True)
class _ParamArrays:
    """Struct-of-arrays mirror of a list of AgentParams (engine-internal)."""

    F: np.ndarray
    S: np.ndarray
    A_U: np.ndarray
    A_R: np.ndarray
    c: np.ndarray
    C: np.ndarray
    V_R: np.ndarray
    V_U: np.ndarray
    V_NJ: np.ndarray
    p_base: np.ndarray
    x_rebel: np.ndarray

    @classmethod
    def from_params(cls, params: Sequence[AgentParams]) -> "_ParamArrays":
        def col(name):
            return np.asarray([getattr(a, name) for a in params], dtype=np.float64)

        return cls(
            F=col("F"), S=col("S"), A_U=col("A_U"), A_R=col("A_R"),
            c=col("c"), C=col("C"), V_R=col("V_R"), V_U=col("V_U"),
            V_NJ=col("V_NJ"), p_base=col("p_base"),
            x_rebel=np.asarray(
                [a.x is PrivateType.PRO_REBELLION for a in params], dtype=bool
            ),
        )


@dataclass
class SimState:
    """Simulation state: time, environment, population arrays, and RNG.

    Canonical storage is struct-of-arrays for speed; the ``agents`` property
    materializes the per-agent view on demand.
    """

    t: int
    env: Environment
    rng: np.random.Generator
    network: SocialNetwork
    _params: _ParamArrays
    y: np.ndarray
    d_falsify: np.ndarray
    exited: np.ndarray
    low_payoff_streak: np.ndarray
    _last_p: np.ndarray | None = None
    _last_events: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def agents(self) -> list[AgentState]:
        pa = self._params
        out = []
        for i in range(self.n):
            params = AgentParams(
                F=float(pa.F[i]), S=float(pa.S[i]), A_U=float(pa.A_U[i]),
                A_R=float(pa.A_R[i]), c=float(pa.c[i]), C=float(pa.C[i]),
                V_R=float(pa.V_R[i]), V_U=float(pa.V_U[i]), V_NJ=float(pa.V_NJ[i]),
                x=PrivateType.PRO_REBELLION if pa.x_rebel[i] else PrivateType.PRO_STATUS_QUO,
                p_base=float(pa.p_base[i]),
            )
            out.append(
                AgentState(
                    id=i, params=params, y=Position(int(self.y[i])),
                    d_falsify=int(self.d_falsify[i]), exited=bool(self.exited[i]),
                    low_payoff_streak=int(self.low_payoff_streak[i]),
                )
            )
        return out

    @classmethod
    def from_agents(
        cls,
        agents: Sequence[AgentState],
        network: SocialNetwork,
        env: Environment | None = None,
        t: int = 0,
        rng: np.random.Generator | None = None,
    ) -> "SimState":
        if len(agents) != network.n:
            raise InvalidParameterError(
                f"{len(agents)} agents but network of size {network.n}"
            )
        params = _ParamArrays.from_params([a.params for a in agents])
        return cls(
            t=t,
            env=env if env is not None else Environment(),
            rng=rng if rng is not None else np.random.default_rng(0),
            network=network,
            _params=params,
            y=np.asarray([int(a.y) for a in agents], dtype=np.int8),
            d_falsify=np.asarray([a.d_falsify for a in agents], dtype=np.int64),
            exited=np.asarray([a.exited for a in agents], dtype=bool),
            low_payoff_streak=np.asarray(
                [a.low_payoff_streak for a in agents], dtype=np.int64
            ),
        )


def effective_params(params: AgentParams, env: Environment) -> AgentParams:
    """Hard factors after environment offsets, floored at zero.

    Tastes, private preference, and the probability baseline are untouched.
    """
    return replace(
        params,
        F=max(0.0, params.F + env.dF),
        S=max(0.0, params.S + env.dS),
        C=max(0.0, params.C + env.dC),
        c=max(0.0, params.c + env.dc),
        A_U=max(0.0, params.A_U + env.dA_U),
        A_R=max(0.0, params.A_R + env.dA_R),
    )


def perceived_probability(
    params: AgentParams, share_R_prev: float, env: Environment
) -> float:
    """Perceived rebellion-win probability: baseline + share coupling + shock, clamped to [0, 1]."""
    if not 0.0 <= share_R_prev <= 1.0:
        raise InvalidParameterError(
            f"share_R_prev must lie in [0, 1], got {share_R_prev!r}"
        )
    return float(
        np.clip(params.p_base + env.beta_share * share_R_prev + env.dp, 0.0, 1.0)
    )


def integrity_value(
    spec: IntegritySpec, y: Position, x: PrivateType, d_falsify: int
) -> float:
    """Integrity payoff of showing ``y`` given preference ``x`` and streak ``d_falsify``."""
    if d_falsify < 0:
        raise InvalidParameterError(f"d_falsify must be >= 0, got {d_falsify!r}")
    if consistent(y, x):
        return spec.nu_match
    return -min(spec.cap, spec.nu0 + spec.kappa * d_falsify)


def check_exit(
    agent: AgentState, best_payoff: float, exit_threshold: float, exit_patience: int
) -> AgentState:
    """Advance the low-payoff streak and flip ``exited`` once patience runs out.

    A ``-inf`` threshold disables exit (no payoff is ever below it).
    """
    if exit_patience < 1:
        raise InvalidParameterError(f"exit patience must be >= 1, got {exit_patience!r}")
    streak = agent.low_payoff_streak + 1 if best_payoff < exit_threshold else 0
    return replace(
        agent,
        low_payoff_streak=streak,
        exited=agent.exited or streak >= exit_patience,
    )


def apply_events(
    env: Environment, events: Sequence[Event], t: int
) -> Environment:
    """Fold every event scheduled at step ``t`` into the environment, in list order."""
    out = env
    for ev in events:
        if ev.step == t:
            out = replace(
                out,
                **{
                    name: getattr(out, name) + ev.deltas.get(name, 0.0)
                    for name in DELTA_FIELDS
                },
            )
    return out


def _integrity_arrays(spec: IntegritySpec, x_rebel: np.ndarray, d: np.ndarray):
    penalty = -np.minimum(spec.cap, spec.nu0 + spec.kappa * d)
    integ_r = np.where(x_rebel, spec.nu_match, penalty)
    integ_u = np.where(~x_rebel, spec.nu_match, penalty)
    return penalty, integ_u, integ_r  # NJ always falsifies, so its term is the penalty


def _reputation_arrays(
    network: SocialNetwork,
    spec: ReputationSpec,
    y: np.ndarray,
    exited: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-agent reputation terms for (NJ, U, R) from the previous public state."""
    n = network.n
    src, dst, w = network._arrays
    if spec.variant is ReputationVariant.UNWEIGHTED_FRACTION:
        base = np.ones_like(w)
    elif spec.variant is ReputationVariant.WEIGHTED_FRACTION:
        base = w
    else:
        scores = influence_scores(network, spec.damping, spec.tol, spec.max_iters)
        base = w * scores[dst]
    wm = np.where(exited[dst], 0.0, base)
    denom = np.bincount(src, weights=wm, minlength=n)
    has_obs = denom > 0.0
    reps = []
    for pos in (Position.NJ, Position.U, Position.R):
        num = np.bincount(src, weights=wm * (y[dst] == int(pos)), minlength=n)
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(has_obs, num / np.where(has_obs, denom, 1.0), 0.0)
        if spec.centered:
            rep = spec.alpha * (frac - 0.5)
        else:
            rep = spec.alpha * frac
        reps.append(np.where(has_obs, rep, 0.0))
    return reps[0], reps[1], reps[2]


def step(state: SimState, scenario) -> SimState:
    """One synchronous step; returns the successor state.

    Sub-steps, in order: apply events at t; compute previous rebel share over
    non-exited agents; effective factors; perceived probability; soft terms
    (reputation from the previous step's stances, integrity from the current
    falsification streak); stance choice; falsification-streak update; exit
    check on the best payoff; advance t.  All decisions read only step-t-1
    public state.  Exited agents are frozen and invisible to neighbors.
    """
    t = state.t
    env = apply_events(state.env, scenario.events, t)
    labels = tuple(ev.label for ev in scenario.events if ev.step == t)

    active = ~state.exited
    n_active = int(active.sum())
    if n_active == 0:
        return replace(
            state, t=t + 1, env=env, _last_p=None, _last_events=labels
        )

    y_prev = state.y
    share_R_prev = float((y_prev[active] == int(Position.R)).sum()) / n_active

    pa = state._params
    F_eff = np.maximum(0.0, pa.F + env.dF)
    S_eff = np.maximum(0.0, pa.S + env.dS)
    C_eff = np.maximum(0.0, pa.C + env.dC)
    c_eff = np.maximum(0.0, pa.c + env.dc)
    A_U_eff = np.maximum(0.0, pa.A_U + env.dA_U)
    A_R_eff = np.maximum(0.0, pa.A_R + env.dA_R)
    p = np.clip(pa.p_base + env.beta_share * share_R_prev + env.dp, 0.0, 1.0)

    rep_nj, rep_u, rep_r = _reputation_arrays(
        state.network, scenario.reputation, y_prev, state.exited
    )
    integ_nj, integ_u, integ_r = _integrity_arrays(
        scenario.integrity, pa.x_rebel, state.d_falsify
    )

    e_nj = payoff_nojoin(S_eff, c_eff, p, SoftTerms(rep_nj, integ_nj), pa.V_NJ)
    e_u = payoff_statusquo(S_eff, A_R_eff, C_eff, p, SoftTerms(rep_u, integ_u), pa.V_U)
    e_r = payoff_rebel(F_eff, A_U_eff, p, SoftTerms(rep_r, integ_r), pa.V_R)

    chosen = choose_positions(e_nj, e_u, e_r, y_prev)
    y_new = np.where(active, chosen, y_prev).astype(np.int8)

    now_consistent = ((y_new == int(Position.R)) & pa.x_rebel) | (
        (y_new == int(Position.U)) & ~pa.x_rebel
    )
    d_new = np.where(
        active, np.where(now_consistent, 0, state.d_falsify + 1), state.d_falsify
    )

    exited_new = state.exited
    streak_new = state.low_payoff_streak
    if scenario.exit is not None:
        best = np.maximum(np.maximum(e_nj, e_u), e_r)
        low = best < scenario.exit.threshold
        streak_new = np.where(
            active, np.where(low, state.low_payoff_streak + 1, 0), state.low_payoff_streak
        )
        exited_new = state.exited | (active & (streak_new >= scenario.exit.patience))

    return replace(
        state,
        t=t + 1,
        env=env,
        y=y_new,
        d_falsify=d_new,
        exited=exited_new,
        low_payoff_streak=streak_new,
        _last_p=p,
        _last_events=labels,
    )


def _record_from(state: SimState) -> StepRecord:
    active = ~state.exited
    n_active = int(active.sum())
    n_exited = int(state.exited.sum())
    if n_active == 0:
        return StepRecord(
            t=state.t - 1, share_R=0.0, share_U=0.0, share_NJ=0.0,
            n_exited=n_exited, n_falsifying=0, mean_p=0.0,
            events=state._last_events,
        )
    y = state.y
    x_rebel = state._params.x_rebel
    share_R = float((y[active] == int(Position.R)).sum()) / n_active
    share_U = float((y[active] == int(Position.U)).sum()) / n_active
    share_NJ = float((y[active] == int(Position.NJ)).sum()) / n_active
    now_consistent = ((y == int(Position.R)) & x_rebel) | (
        (y == int(Position.U)) & ~x_rebel
    )
    n_falsifying = int((active & ~now_consistent).sum())
    mean_p = float(state._last_p[active].mean()) if state._last_p is not None else 0.0
    return StepRecord(
        t=state.t - 1,
        share_R=share_R,
        share_U=share_U,
        share_NJ=share_NJ,
        n_exited=n_exited,
        n_falsifying=n_falsifying,
        mean_p=mean_p,
        events=state._last_events,
    )


def init_state(scenario) -> SimState:
    """Fresh t=0 state: population and network drawn from the scenario seed, everyone abstaining."""
    from .scenario import generate_population  # deferred: scenario-io depends on engine types

    if scenario.update != "synchronous":
        raise InvalidParameterError(f"unsupported update discipline {scenario.update!r}")
    pop_seq, net_seq, state_seq = np.random.SeedSequence(scenario.seed).spawn(3)
    population = generate_population(scenario.population, pop_seq)
    network = generate_network(scenario.network, len(population), net_seq)
    params = _ParamArrays.from_params(population)
    n = len(population)
    return SimState(
        t=0,
        env=Environment(beta_share=scenario.beta_share),
        rng=np.random.default_rng(state_seq),
        network=network,
        _params=params,
        y=np.full(n, int(Position.NJ), dtype=np.int8),
        d_falsify=np.zeros(n, dtype=np.int64),
        exited=np.zeros(n, dtype=bool),
        low_payoff_streak=np.zeros(n, dtype=np.int64),
    )


def run(scenario) -> list[StepRecord]:
    """Simulate ``scenario.horizon`` steps from scratch; one record per step.

    Bit-identical across repeated calls with the same scenario.
    """
    state = init_state(scenario)
    records = []
    for _ in range(scenario.horizon):
        state = step(state, scenario)
        records.append(_record_from(state))
    return records
