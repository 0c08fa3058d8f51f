"""Network tests: reputation variants, influence scores, sentiment, generators.

The influence-score expected values were computed by an independent oracle
(exact rational linear solve plus a separately written float power iteration)
before the implementation ran, and are frozen here as literals.
"""

import numpy as np
import pytest

from dissentsim import (
    ConvergenceError,
    InvalidParameterError,
    NetworkKind,
    NetworkSpec,
    NotFoundError,
    Position,
    ReputationSpec,
    ReputationVariant,
    SocialNetwork,
    generate_network,
    influence_scores,
    public_sentiment,
    reputation_fraction,
    reputation_iterative,
)

UNW = ReputationSpec(ReputationVariant.UNWEIGHTED_FRACTION, alpha=1.0, centered=False)
R, U, NJ = Position.R, Position.U, Position.NJ

# frozen oracle literals: damped random-surfer scores at d=0.85
# chain 0->1->2, unit weights: exact (400/2169, 740/2169, 343/723)
CHAIN_SCORES = (0.18441678192715538, 0.34117104656523745, 0.47441217150760717)
# triangle 0->1, 0->2, 1->2, unit weights
TRI_SCORES = (0.1975796492961225, 0.28155100024697455, 0.520869350456903)


def chain():
    return SocialNetwork(3, [(0, 1, 1.0), (1, 2, 1.0)])


def triangle():
    return SocialNetwork(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


# ---------------------------------------------------------------- SocialNetwork

def test_network_rejects_self_loops_bad_ids_bad_weights():
    with pytest.raises(InvalidParameterError):
        SocialNetwork(3, [(0, 0, 1.0)])
    with pytest.raises(InvalidParameterError):
        SocialNetwork(3, [(0, 3, 1.0)])
    with pytest.raises(InvalidParameterError):
        SocialNetwork(3, [(-1, 0, 1.0)])
    with pytest.raises(InvalidParameterError):
        SocialNetwork(3, [(0, 1, -0.5)])
    with pytest.raises(InvalidParameterError):
        SocialNetwork(3, [(0, 1, float("nan"))])
    with pytest.raises(InvalidParameterError):
        SocialNetwork(0, [])


def test_out_edges():
    net = SocialNetwork(4, [(1, 2, 2.0), (1, 0, 1.0), (3, 1, 5.0)])
    assert net.out_edges(1) == [(2, 2.0), (0, 1.0)] or net.out_edges(1) == [(0, 1.0), (2, 2.0)]
    assert net.out_edges(0) == []
    with pytest.raises(NotFoundError):
        net.out_edges(4)


# ---------------------------------------------------------------- fraction variants

def test_unweighted_fraction_three_of_four():
    net = SocialNetwork(5, [(0, j, 1.0) for j in (1, 2, 3, 4)])
    publics = {0: NJ, 1: R, 2: R, 3: R, 4: U}
    assert reputation_fraction(0, R, net, publics, UNW) == pytest.approx(0.75, abs=1e-12)


def test_isolate_returns_zero():
    net = SocialNetwork(2, [(1, 0, 1.0)])
    assert reputation_fraction(0, R, net, {0: R, 1: R}, UNW) == 0.0


def test_weighted_fraction_centered():
    spec = ReputationSpec(ReputationVariant.WEIGHTED_FRACTION, alpha=2.0, centered=True)
    net = SocialNetwork(3, [(0, 1, 3.0), (0, 2, 1.0)])
    publics = {0: NJ, 1: R, 2: NJ}
    # 2 * (3/4 - 1/2) = 0.5
    assert reputation_fraction(0, R, net, publics, spec) == pytest.approx(0.5, abs=1e-12)


def test_centered_fifty_fifty_is_zero():
    spec = ReputationSpec(ReputationVariant.UNWEIGHTED_FRACTION, alpha=3.0, centered=True)
    net = SocialNetwork(3, [(0, 1, 1.0), (0, 2, 1.0)])
    publics = {0: NJ, 1: R, 2: U}
    assert reputation_fraction(0, R, net, publics, spec) == 0.0
    assert reputation_fraction(0, U, net, publics, spec) == 0.0


def test_unweighted_equals_weighted_at_equal_weights():
    unw = ReputationSpec(ReputationVariant.UNWEIGHTED_FRACTION, alpha=1.7, centered=True)
    wgt = ReputationSpec(ReputationVariant.WEIGHTED_FRACTION, alpha=1.7, centered=True)
    net_w = SocialNetwork(4, [(0, 1, 2.5), (0, 2, 2.5), (0, 3, 2.5)])
    publics = {0: NJ, 1: R, 2: U, 3: R}
    for pos in (R, U, NJ):
        assert reputation_fraction(0, pos, net_w, publics, unw) == pytest.approx(
            reputation_fraction(0, pos, net_w, publics, wgt), abs=1e-12
        )


def test_fraction_monotone_in_support():
    rng = np.random.default_rng(77)
    spec = ReputationSpec(ReputationVariant.WEIGHTED_FRACTION, alpha=1.0, centered=True)
    for _ in range(50):
        n = 6
        net = SocialNetwork(n, [(0, j, float(rng.uniform(0.1, 3))) for j in range(1, n)])
        publics = {j: Position(int(rng.integers(3))) for j in range(n)}
        flip = int(rng.integers(1, n))
        before = reputation_fraction(0, R, net, publics, spec)
        publics_after = dict(publics)
        publics_after[flip] = R
        after = reputation_fraction(0, R, net, publics_after, spec)
        assert after >= before - 1e-12


def test_exited_neighbors_drop_from_both_sides():
    net = SocialNetwork(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
    # agent 3 exited: omitted from publics entirely
    publics = {0: NJ, 1: R, 2: U}
    assert reputation_fraction(0, R, net, publics, UNW) == pytest.approx(0.5, abs=1e-12)
    # all neighbors exited -> degenerate -> 0
    assert reputation_fraction(0, R, net, {0: NJ}, UNW) == 0.0


def test_zero_total_weight_returns_zero():
    spec = ReputationSpec(ReputationVariant.WEIGHTED_FRACTION, alpha=1.0, centered=True)
    net = SocialNetwork(2, [(0, 1, 0.0)])
    assert reputation_fraction(0, R, net, {0: NJ, 1: R}, spec) == 0.0


def test_fraction_rejects_iterative_spec_and_bad_agent():
    it = ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=1.0)
    with pytest.raises(InvalidParameterError):
        reputation_fraction(0, R, chain(), {0: NJ, 1: NJ, 2: NJ}, it)
    with pytest.raises(NotFoundError):
        reputation_fraction(9, R, chain(), {0: NJ, 1: NJ, 2: NJ}, UNW)


# ---------------------------------------------------------------- influence scores

def test_influence_single_node():
    assert influence_scores(SocialNetwork(1, [])).tolist() == [1.0]


def test_influence_two_node_symmetric():
    net = SocialNetwork(2, [(0, 1, 1.0), (1, 0, 1.0)])
    scores = influence_scores(net)
    assert scores[0] == pytest.approx(0.5, abs=1e-12)
    assert scores[1] == pytest.approx(0.5, abs=1e-12)


def test_influence_chain_matches_oracle():
    scores = influence_scores(chain(), damping=0.85, tol=1e-12, max_iters=200)
    for got, want in zip(scores, CHAIN_SCORES):
        assert got == pytest.approx(want, abs=1e-8)
    assert abs(float(scores.sum()) - 1.0) <= 1e-9


def test_influence_triangle_matches_oracle():
    scores = influence_scores(triangle(), damping=0.85, tol=1e-12, max_iters=200)
    for got, want in zip(scores, TRI_SCORES):
        assert got == pytest.approx(want, abs=1e-8)


def test_influence_sum_and_nonneg_on_random_graphs():
    rng = np.random.default_rng(4242)
    for _ in range(20):
        n = int(rng.integers(2, 25))
        edges = [
            (i, j, float(rng.uniform(0.1, 4)))
            for i in range(n)
            for j in range(n)
            if i != j and rng.random() < 0.3
        ]
        scores = influence_scores(SocialNetwork(n, edges))
        assert abs(float(scores.sum()) - 1.0) <= 1e-9
        assert (scores >= 0).all()


def test_influence_nonconvergence_error_carries_state():
    with pytest.raises(ConvergenceError) as exc_info:
        influence_scores(chain(), damping=0.85, tol=1e-12, max_iters=1)
    err = exc_info.value
    assert err.last_iterate is not None and len(err.last_iterate) == 3
    assert err.residual > 1e-12


def test_influence_memoized_per_network():
    net = chain()
    a = influence_scores(net)
    b = influence_scores(net)
    assert a is b
    with pytest.raises(ValueError):
        a[0] = 0.0  # read-only


# ---------------------------------------------------------------- iterative reputation

def test_iterative_reduces_to_weighted_when_scores_equal():
    # fully symmetric 2-cycle: scores are (0.5, 0.5) so iterative == weighted
    net = SocialNetwork(2, [(0, 1, 1.0), (1, 0, 1.0)])
    publics = {0: NJ, 1: R}
    it = ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=1.3, centered=True)
    wg = ReputationSpec(ReputationVariant.WEIGHTED_FRACTION, alpha=1.3, centered=True)
    for pos in (R, U, NJ):
        assert reputation_iterative(0, pos, net, publics, it) == pytest.approx(
            reputation_fraction(0, pos, net, publics, wg), abs=1e-12
        )


def test_iterative_single_neighbor():
    it = ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=2.0, centered=True)
    it_raw = ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=2.0, centered=False)
    net = chain()
    publics = {0: NJ, 1: R, 2: NJ}
    assert reputation_iterative(0, R, net, publics, it) == pytest.approx(1.0, abs=1e-12)  # 2*(1-1/2)
    assert reputation_iterative(0, R, net, publics, it_raw) == pytest.approx(2.0, abs=1e-12)


def test_iterative_composed_oracle():
    # triangle scores weighted into the fraction: agent 0 sees 1 (R) and 2 (NJ);
    # frozen oracle: frac = s1/(s1+s2) = 740/2109... exact value 20/57 with the
    # triangle's (s1, s2); alpha=2 centered -> -17/57, alpha=1 raw -> 20/57.
    net = triangle()
    publics = {0: NJ, 1: R, 2: NJ}
    it2c = ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=2.0, centered=True)
    it1r = ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=1.0, centered=False)
    assert reputation_iterative(0, R, net, publics, it2c) == pytest.approx(-0.2982456140350877, abs=1e-8)
    assert reputation_iterative(0, R, net, publics, it1r) == pytest.approx(0.3508771929824561, abs=1e-8)


def test_iterative_rejects_fraction_spec():
    with pytest.raises(InvalidParameterError):
        reputation_iterative(0, R, chain(), {0: NJ, 1: NJ, 2: NJ}, UNW)


# ---------------------------------------------------------------- sentiment

def test_sentiment_examples():
    publics = {0: R, 1: R, 2: U, 3: NJ}
    unit = {i: 1.0 for i in publics}
    assert public_sentiment(publics, unit) == pytest.approx(0.25, abs=1e-12)
    assert public_sentiment({0: NJ, 1: NJ}, {0: 1.0, 1: 2.0}) == 0.0
    assert public_sentiment({0: R, 1: R}, {0: 0.2, 1: 5.0}) == pytest.approx(1.0, abs=1e-12)


def test_sentiment_errors():
    with pytest.raises(InvalidParameterError):
        public_sentiment({0: R}, {0: 0.0})
    with pytest.raises(NotFoundError):
        public_sentiment({0: R, 1: U}, {0: 1.0})
    with pytest.raises(InvalidParameterError):
        public_sentiment({0: R}, {0: -1.0})


# ---------------------------------------------------------------- generators

def test_complete_network():
    net = generate_network(NetworkSpec(NetworkKind.COMPLETE), 3, seed=0)
    assert len(net.edges) == 6
    assert set(net.edges) == {(i, j, 1.0) for i in range(3) for j in range(3) if i != j}


def test_erdos_renyi_extremes():
    spec0 = NetworkSpec(NetworkKind.ERDOS_RENYI, p_edge=0.0)
    spec1 = NetworkSpec(NetworkKind.ERDOS_RENYI, p_edge=1.0)
    assert len(generate_network(spec0, 10, seed=3).edges) == 0
    assert len(generate_network(spec1, 4, seed=3).edges) == 12


def test_erdos_renyi_directions_independent():
    spec = NetworkSpec(NetworkKind.ERDOS_RENYI, p_edge=0.5)
    net = generate_network(spec, 30, seed=11)
    pairs = {(s, t) for s, t, _ in net.edges}
    asymmetric = [(s, t) for (s, t) in pairs if (t, s) not in pairs]
    assert asymmetric  # independent per-direction draws leave one-way edges


def test_generator_determinism():
    for spec in (
        NetworkSpec(NetworkKind.COMPLETE),
        NetworkSpec(NetworkKind.ERDOS_RENYI, p_edge=0.3),
        NetworkSpec(NetworkKind.SMALL_WORLD, k=4, rewire_p=0.4),
    ):
        a = generate_network(spec, 24, seed=99)
        b = generate_network(spec, 24, seed=99)
        assert a.edges == b.edges
    a = generate_network(NetworkSpec(NetworkKind.ERDOS_RENYI, p_edge=0.3), 24, seed=99)
    c = generate_network(NetworkSpec(NetworkKind.ERDOS_RENYI, p_edge=0.3), 24, seed=100)
    assert a.edges != c.edges


def test_small_world_lattice_no_rewiring():
    net = generate_network(NetworkSpec(NetworkKind.SMALL_WORLD, k=2, rewire_p=0.0), 6, seed=1)
    expected = set()
    for i in range(6):
        expected.add((i, (i + 1) % 6, 1.0))
        expected.add(((i + 1) % 6, i, 1.0))
    assert set(net.edges) == expected


def test_small_world_rewired_stays_symmetric_and_sized():
    net = generate_network(NetworkSpec(NetworkKind.SMALL_WORLD, k=6, rewire_p=1.0), 20, seed=5)
    pairs = {(s, t) for s, t, _ in net.edges}
    assert len(net.edges) == 20 * 6  # tie count conserved, both directions
    assert all((t, s) in pairs for (s, t) in pairs)


def test_generator_validation():
    with pytest.raises(InvalidParameterError):
        NetworkSpec(NetworkKind.ERDOS_RENYI, p_edge=1.5)
    with pytest.raises(InvalidParameterError):
        NetworkSpec(NetworkKind.SMALL_WORLD, k=3, rewire_p=0.1)  # odd k
    with pytest.raises(InvalidParameterError):
        NetworkSpec(NetworkKind.SMALL_WORLD, k=4, rewire_p=-0.1)
    with pytest.raises(InvalidParameterError):
        generate_network(NetworkSpec(NetworkKind.SMALL_WORLD, k=10, rewire_p=0.1), 10, seed=0)
    with pytest.raises(InvalidParameterError):
        generate_network(NetworkSpec(NetworkKind.COMPLETE), 0, seed=0)
    with pytest.raises(InvalidParameterError):
        NetworkSpec(NetworkKind.COMPLETE, p_edge=0.5)  # parameter for wrong kind


def test_reputation_spec_validation():
    with pytest.raises(InvalidParameterError):
        ReputationSpec(ReputationVariant.UNWEIGHTED_FRACTION, alpha=-1.0)
    with pytest.raises(InvalidParameterError):
        ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=1.0, damping=1.0)
    with pytest.raises(InvalidParameterError):
        ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=1.0, tol=0.0)
    with pytest.raises(InvalidParameterError):
        ReputationSpec(ReputationVariant.ITERATIVE_INFLUENCE, alpha=1.0, max_iters=0)
