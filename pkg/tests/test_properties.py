import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pfroots.algebra import algebraize, evaluate, jacobian
from pfroots.counting import DegreeTable, multihom_bezout
from pfroots.graphprops import SimpleGraph, order_width, treewidth
from pfroots.homotopy import TrackerConfig, expected_paths, track_all, verify_count
from pfroots.netmodel import parse_case, random_network, serialize_case
from pfroots.steady import branch_losses, filter_real, involution_check, summarize

from test_counting import brute_force

slow = settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def networks(draw, max_buses=5):
    n = draw(st.integers(2, max_buses))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_network(np.random.default_rng(seed), n)


@slow
@given(networks(), st.integers(0, 1000))
def test_paths_are_conserved(net, seed):
    sys = algebraize(net)
    sol = track_all(sys, TrackerConfig(seed=seed))
    acc = sol.accounting
    assert acc["finite"] + acc["at_infinity"] + acc["failed"] == expected_paths(sys)
    assert sol.finite_total == acc["finite"]


@slow
@given(networks())
def test_certified_sets_are_closed_under_involution(net):
    sol = track_all(algebraize(net))
    if verify_count(sol, expected_paths(algebraize(net))).certified:
        assert involution_check(sol).closed


@slow
@given(networks())
def test_power_balance_on_steady_states(net):
    for s in filter_real(net, track_all(algebraize(net))):
        total = complex(s.injections[:, 0].sum(), s.injections[:, 1].sum())
        assert abs(total - branch_losses(net, s.branch_flows).sum()) < 1e-8


@settings(max_examples=100, deadline=None)
@given(networks(max_buses=6), st.integers(0, 2**32 - 1))
def test_jacobian_central_differences(net, seed):
    rng = np.random.default_rng(seed)
    sys = algebraize(net)
    z = rng.standard_normal(sys.n_vars) + 1j * rng.standard_normal(sys.n_vars)
    J = jacobian(sys, z)
    h = 1e-6
    for j in range(sys.n_vars):
        e = np.zeros(sys.n_vars)
        e[j] = h
        col = (evaluate(sys, z + e) - evaluate(sys, z - e)) / (2 * h)
        assert np.abs(col - J[:, j]).max() <= 1e-6 * max(1.0, np.abs(J).max())


@st.composite
def degree_tables(draw):
    k = draw(st.integers(1, 3))
    n = draw(st.integers(1, 8))
    a = draw(st.lists(st.integers(0, n), min_size=k, max_size=k).filter(lambda x: sum(x) == n)
             | st.just([n] + [0] * (k - 1)))
    d = draw(st.lists(st.lists(st.integers(0, 3), min_size=k, max_size=k), min_size=n,
                      max_size=n))
    return d, a


@settings(max_examples=60, deadline=None)
@given(degree_tables())
def test_bezout_matches_symbolic(table):
    d, a = table
    dt = DegreeTable(tuple(map(tuple, d)), (False,) * len(a), tuple(a))
    assert multihom_bezout(dt) == brute_force(d, a)


@slow
@given(networks())
def test_fixed_seed_is_byte_identical(net):
    sys = algebraize(net)
    assert track_all(sys, TrackerConfig(seed=5)).to_json() == \
        track_all(sys, TrackerConfig(seed=5)).to_json()


@settings(max_examples=50, deadline=None)
@given(networks(max_buses=8))
def test_case_round_trip(net):
    assert parse_case(serialize_case(net)) == net


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 9))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return n, edges


@settings(max_examples=60, deadline=None)
@given(graphs(), st.randoms(use_true_random=False))
def test_treewidth_relabel_invariant(graph, rnd):
    n, edges = graph
    g = SimpleGraph.from_edges(n, edges)
    perm = list(range(n))
    rnd.shuffle(perm)
    h = SimpleGraph.from_edges(n, [(perm[a], perm[b]) for a, b in edges])
    w = treewidth(g)
    assert w.width == treewidth(h).width
    assert w.width <= max(n - 1, 0)
    assert order_width(g, w.order) == w.width


@settings(max_examples=40, deadline=None)
@given(networks(), st.floats(0.1, 100.0))
def test_minimizer_counts_invariant_under_scaling(net, factor):
    from pfroots.netmodel import Network

    states = filter_real(net, track_all(algebraize(net)))
    scaled = Network(net.buses, net.branches, tuple(factor * c for c in net.cost_coefficients))
    a = summarize(net, states)
    b = summarize(scaled, filter_real(scaled, track_all(algebraize(scaled))))
    assert a.n_states == b.n_states
    assert a.min_cost_count == b.min_cost_count
