"""Social network, neighbor-reputation terms, and deterministic graph generators.

Reputation is what an agent earns *from the people they observe* for showing
a stance: the weighted fraction of out-neighbors currently showing the same
stance, optionally centered at 1/2 (so conforming with a majority pays and
deviating costs) and scaled by a weight ``alpha``.  A third variant weights
each neighbor by a global influence score computed with a damped random-surfer
iteration over the whole graph, so applause from influential people counts
for more.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import ConvergenceError, InvalidParameterError, NotFoundError
from .model import Position

#: Default damping factor for the influence iteration.
DEFAULT_DAMPING = 0.85
#: Default L1 convergence tolerance for the influence iteration.
DEFAULT_TOL = 1e-12
#: Default iteration cap for the influence iteration.
DEFAULT_MAX_ITERS = 200

#: Numeric stance values used by the sentiment index: R=+1, U=-1, NJ=0.
SENTIMENT_VALUE = {Position.R: 1.0, Position.U: -1.0, Position.NJ: 0.0}


class ReputationVariant(enum.Enum):
    UNWEIGHTED_FRACTION = "unweighted_fraction"
    WEIGHTED_FRACTION = "weighted_fraction"
    ITERATIVE_INFLUENCE = "iterative_influence"


class NetworkKind(enum.Enum):
    COMPLETE = "complete"
    ERDOS_RENYI = "erdos_renyi"
    SMALL_WORLD = "small_world"


@dataclass(frozen=True)
class SocialNetwork:
    """Directed weighted graph over agents 0..n-1.

    ``edges`` holds (source, target, weight) triples; an edge i->j means
    "i observes j".  Self-loops are forbidden, weights must be finite and
    >= 0.  Instances are treated as immutable after construction, so derived
    arrays and influence scores are cached on first use.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __init__(self, n: int, edges):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(
            self, "edges", tuple((int(s), int(t), float(w)) for s, t, w in edges)
        )
        if self.n < 1:
            raise InvalidParameterError(f"a network needs at least one agent, got n={n!r}")
        for s, t, w in self.edges:
            if not (0 <= s < self.n and 0 <= t < self.n):
                raise InvalidParameterError(f"edge ({s}, {t}) references an unknown agent id")
            if s == t:
                raise InvalidParameterError(f"self-loop on agent {s} is not allowed")
            if not np.isfinite(w) or w < 0.0:
                raise InvalidParameterError(f"edge ({s}, {t}) weight must be finite and >= 0")

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edge list as (src, dst, weight) numpy arrays, sorted by src (stable)."""
        if not self.edges:
            empty_i = np.empty(0, dtype=np.int64)
            return empty_i, empty_i.copy(), np.empty(0, dtype=np.float64)
        src = np.asarray([e[0] for e in self.edges], dtype=np.int64)
        dst = np.asarray([e[1] for e in self.edges], dtype=np.int64)
        w = np.asarray([e[2] for e in self.edges], dtype=np.float64)
        order = np.argsort(src, kind="stable")
        return src[order], dst[order], w[order]

    @cached_property
    def _row_ptr(self) -> np.ndarray:
        """CSR-style row pointers into the sorted edge arrays."""
        src = self._arrays[0]
        return np.searchsorted(src, np.arange(self.n + 1))

    @cached_property
    def _influence_memo(self) -> dict:
        return {}

    def out_edges(self, agent: int) -> list[tuple[int, float]]:
        """(target, weight) pairs observed by ``agent``."""
        if not 0 <= agent < self.n:
            raise NotFoundError(f"agent {agent} not in network of size {self.n}")
        src, dst, w = self._arrays
        lo, hi = self._row_ptr[agent], self._row_ptr[agent + 1]
        return [(int(dst[i]), float(w[i])) for i in range(lo, hi)]


@dataclass(frozen=True)
class ReputationSpec:
    """How reputation terms are computed.

    ``alpha`` scales the whole term; ``centered`` subtracts 1/2 from the
    conforming fraction before scaling, making minority stances cost
    reputation instead of merely earning less.  The iterative variant also
    needs solver controls (damping, tol, max_iters); they default sensibly
    and are ignored by the fraction variants.
    """

    variant: ReputationVariant
    alpha: float
    centered: bool = True
    damping: float = DEFAULT_DAMPING
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if not isinstance(self.variant, ReputationVariant):
            raise InvalidParameterError(f"unknown reputation variant {self.variant!r}")
        if not np.isfinite(self.alpha) or self.alpha < 0.0:
            raise InvalidParameterError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not 0.0 < self.damping < 1.0:
            raise InvalidParameterError(f"damping must lie in (0, 1), got {self.damping!r}")
        if not np.isfinite(self.tol) or self.tol <= 0.0:
            raise InvalidParameterError(f"tol must be > 0, got {self.tol!r}")
        if self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be >= 1, got {self.max_iters!r}")


def _fraction(agent, position, network, publics, weight_of) -> float:
    """Weighted conforming fraction over the agent's non-exited out-neighbors."""
    total = 0.0
    matching = 0.0
    for j, w in network.out_edges(agent):
        y = publics.get(j)
        if y is None:  # exited agents drop out of the neighborhood entirely
            continue
        wj = weight_of(j, w)
        total += wj
        if y == position:
            matching += wj
    if total == 0.0:
        return float("nan")  # signals the degenerate case to the caller
    return matching / total


def _finish(frac: float, spec: ReputationSpec) -> float:
    if frac != frac:  # NaN: no observed neighbors or zero total weight
        return 0.0
    if spec.centered:
        return spec.alpha * (frac - 0.5)
    return spec.alpha * frac


def reputation_fraction(
    agent: int,
    position: Position,
    network: SocialNetwork,
    publics: Mapping[int, Position],
    spec: ReputationSpec,
) -> float:
    """Reputation earned for showing ``position``, fraction variants only.

    Unweighted treats every observed neighbor equally; weighted uses edge
    weights.  Returns 0 when the agent observes nobody (or only exited
    agents, or zero total weight).
    """
    if spec.variant is ReputationVariant.UNWEIGHTED_FRACTION:
        frac = _fraction(agent, position, network, publics, lambda j, w: 1.0)
    elif spec.variant is ReputationVariant.WEIGHTED_FRACTION:
        frac = _fraction(agent, position, network, publics, lambda j, w: w)
    else:
        raise InvalidParameterError(
            "reputation_fraction handles only the fraction variants; "
            "use reputation_iterative for iterative_influence"
        )
    return _finish(frac, spec)


def influence_scores(
    network: SocialNetwork,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> np.ndarray:
    """Global influence score per agent via a damped random-surfer iteration.

    Follows out-edges with probability ``damping`` (weight-proportionally),
    teleports uniformly otherwise; agents with no out-edges redistribute
    their mass uniformly over everyone.  Iterates until the L1 change drops
    below ``tol``; raises ConvergenceError (carrying the last iterate and its
    residual) if ``max_iters`` is exhausted.  Scores are >= 0 and sum to 1.

    Results are memoized on the network instance per (damping, tol, max_iters);
    safe for concurrent reads once built.
    """
    if network.n == 0:
        raise InvalidParameterError("influence scores need at least one agent")
    if not 0.0 < damping < 1.0:
        raise InvalidParameterError(f"damping must lie in (0, 1), got {damping!r}")
    if not np.isfinite(tol) or tol <= 0.0:
        raise InvalidParameterError(f"tol must be > 0, got {tol!r}")
    if max_iters < 1:
        raise InvalidParameterError(f"max_iters must be >= 1, got {max_iters!r}")

    key = (float(damping), float(tol), int(max_iters))
    memo = network._influence_memo
    cached = memo.get(key)
    if cached is not None:
        return cached

    n = network.n
    src, dst, w = network._arrays
    out_strength = np.bincount(src, weights=w, minlength=n)
    dangling = out_strength == 0.0
    # Per-edge transition probability: weight / total outgoing weight of source.
    with np.errstate(invalid="ignore", divide="ignore"):
        edge_p = np.where(out_strength[src] > 0.0, w / out_strength[src], 0.0)

    x = np.full(n, 1.0 / n, dtype=np.float64)
    for _ in range(max_iters):
        flow = np.bincount(dst, weights=x[src] * edge_p, minlength=n)
        dangling_mass = float(x[dangling].sum())
        x_next = damping * (flow + dangling_mass / n) + (1.0 - damping) / n
        residual = float(np.abs(x_next - x).sum())
        x = x_next
        if residual < tol:
            x = x.copy()
            x.setflags(write=False)
            memo[key] = x
            return x
    raise ConvergenceError(
        f"influence iteration did not converge within {max_iters} iterations "
        f"(residual {residual:.3e})",
        last_iterate=x,
        residual=residual,
    )


def reputation_iterative(
    agent: int,
    position: Position,
    network: SocialNetwork,
    publics: Mapping[int, Position],
    spec: ReputationSpec,
) -> float:
    """Reputation variant that weights each observed neighbor by edge weight x influence score."""
    if spec.variant is not ReputationVariant.ITERATIVE_INFLUENCE:
        raise InvalidParameterError("reputation_iterative requires the iterative_influence variant")
    scores = influence_scores(network, spec.damping, spec.tol, spec.max_iters)
    frac = _fraction(agent, position, network, publics, lambda j, w: w * scores[j])
    return _finish(frac, spec)


def public_sentiment(
    publics: Mapping[int, Position], weights: Mapping[int, float]
) -> float:
    """Weighted mean stance value over non-exited agents: R=+1, U=-1, NJ=0.

    Diagnostic index only; it never feeds back into payoffs.
    """
    total = 0.0
    acc = 0.0
    for i, y in publics.items():
        w = weights.get(i)
        if w is None:
            raise NotFoundError(f"no weight supplied for agent {i}")
        if not np.isfinite(w) or w < 0.0:
            raise InvalidParameterError(f"weight for agent {i} must be finite and >= 0")
        total += w
        acc += w * SENTIMENT_VALUE[Position(y)]
    if total == 0.0:
        raise InvalidParameterError("public_sentiment needs positive total weight")
    return acc / total


@dataclass(frozen=True)
class NetworkSpec:
    """Which generator builds the graph, plus its shape parameters."""

    kind: NetworkKind
    p_edge: float | None = None
    k: int | None = None
    rewire_p: float | None = None

    def __post_init__(self):
        if not isinstance(self.kind, NetworkKind):
            raise InvalidParameterError(f"unknown network kind {self.kind!r}")
        if self.kind is NetworkKind.COMPLETE:
            if self.p_edge is not None or self.k is not None or self.rewire_p is not None:
                raise InvalidParameterError("complete networks take no shape parameters")
        elif self.kind is NetworkKind.ERDOS_RENYI:
            if self.k is not None or self.rewire_p is not None:
                raise InvalidParameterError("erdos_renyi takes only p_edge")
            if self.p_edge is None or not 0.0 <= self.p_edge <= 1.0:
                raise InvalidParameterError(f"p_edge must lie in [0, 1], got {self.p_edge!r}")
        else:  # SMALL_WORLD
            if self.p_edge is not None:
                raise InvalidParameterError("small_world takes k and rewire_p, not p_edge")
            if self.k is None or self.k < 0 or self.k % 2 != 0:
                raise InvalidParameterError(f"k must be a non-negative even integer, got {self.k!r}")
            if self.rewire_p is None or not 0.0 <= self.rewire_p <= 1.0:
                raise InvalidParameterError(f"rewire_p must lie in [0, 1], got {self.rewire_p!r}")


def generate_network(spec: NetworkSpec, n: int, seed: int) -> SocialNetwork:
    """Build a unit-weight graph deterministically from (spec, n, seed).

    * complete — every ordered pair.
    * erdos_renyi — each ordered pair independently with probability p_edge
      (i->j and j->i are separate draws).
    * small_world — ring lattice joining each agent to its k nearest ring
      neighbors, each lattice tie rewired with probability rewire_p; ties are
      symmetric, so every kept or rewired tie contributes both directions.
    """
    if n < 1:
        raise InvalidParameterError(f"network generation needs n >= 1, got {n!r}")
    rng = np.random.default_rng(seed)

    if spec.kind is NetworkKind.COMPLETE:
        edges = [(i, j, 1.0) for i in range(n) for j in range(n) if i != j]
        return SocialNetwork(n, edges)

    if spec.kind is NetworkKind.ERDOS_RENYI:
        edges = []
        for i in range(n):  # row at a time keeps memory flat for large n
            draws = rng.random(n) < spec.p_edge
            draws[i] = False
            edges.extend((i, int(j), 1.0) for j in np.nonzero(draws)[0])
        return SocialNetwork(n, edges)

    # small_world: Watts-Strogatz ring lattice with rewiring, symmetric ties.
    if spec.k >= n:
        raise InvalidParameterError(f"small_world needs k < n, got k={spec.k}, n={n}")
    neighbors: list[set[int]] = [set() for _ in range(n)]
    for offset in range(1, spec.k // 2 + 1):
        for i in range(n):
            j = (i + offset) % n
            neighbors[i].add(j)
            neighbors[j].add(i)
    for offset in range(1, spec.k // 2 + 1):
        for i in range(n):
            j = (i + offset) % n
            if j not in neighbors[i]:
                continue  # this lattice tie was already rewired away
            if rng.random() >= spec.rewire_p:
                continue
            if len(neighbors[i]) >= n - 1:
                continue  # i already observes everyone else; nothing to rewire to
            m = int(rng.integers(n))
            while m == i or m in neighbors[i]:
                m = int(rng.integers(n))
            neighbors[i].discard(j)
            neighbors[j].discard(i)
            neighbors[i].add(m)
            neighbors[m].add(i)
    edges = [
        (i, j, 1.0) for i in range(n) for j in sorted(neighbors[i])
    ]
    return SocialNetwork(n, edges)
