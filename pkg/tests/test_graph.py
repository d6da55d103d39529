import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisislens.autodiff import Tensor
from crisislens.data import Sample
from crisislens.errors import ConfigError, DataError, DimensionError
from crisislens.gradcheck import grad_check
from crisislens.graph import (
    BprmStep,
    HGCParams,
    HierarchicalAdjacency,
    RewardWeights,
    SocialGraph,
    bprm_update,
    build_hierarchical_adjacency,
    compute_reward,
    hgc_forward,
    init_hgc_params,
    node_features,
)
from crisislens.optim import ParamStore


class TestSocialGraph:
    def test_normalizes_and_dedups_edges(self):
        g = SocialGraph(users=["b", "a"], edges=[("b", "a"), ("a", "b")])
        assert g.edges == [("a", "b")]

    def test_rejects_unknown_endpoint(self):
        with pytest.raises(DataError, match="unknown user"):
            SocialGraph(users=["a"], edges=[("a", "b")])

    def test_rejects_self_edge(self):
        with pytest.raises(DataError, match="self-edge"):
            SocialGraph(users=["a"], edges=[("a", "a")])

    def test_json_round_trip(self, tmp_path):
        g = SocialGraph(users=["u1", "u2", "u3"], edges=[("u1", "u2")])
        path = tmp_path / "graph.json"
        g.save(path)
        assert SocialGraph.load(path) == g


class TestHierarchicalAdjacency:
    def test_single_isolated_node(self):
        adj = build_hierarchical_adjacency(SocialGraph(users=["a"], edges=[]), depth=3)
        for level in adj.levels:
            np.testing.assert_array_equal(level, [[1.0]])

    def test_no_edges_gives_identity(self):
        adj = build_hierarchical_adjacency(SocialGraph(users=list("abcd"), edges=[]), depth=2)
        for level in adj.levels:
            np.testing.assert_array_equal(level, np.eye(4))

    def test_path_two_nodes_level_zero(self):
        g = SocialGraph(users=["a", "b"], edges=[("a", "b")])
        adj = build_hierarchical_adjacency(g, depth=1)
        np.testing.assert_allclose(adj.levels[0], [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)

    def test_depth_below_one_rejected(self):
        with pytest.raises(ConfigError):
            build_hierarchical_adjacency(SocialGraph(users=["a"], edges=[]), depth=0)

    @given(st.integers(0, 10_000), st.integers(1, 4))
    @settings(max_examples=30, deadline=None)
    def test_levels_are_row_stochastic(self, seed, depth):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        users = [f"u{i}" for i in range(n)]
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.4:
                    edges.append((users[i], users[j]))
        adj = build_hierarchical_adjacency(SocialGraph(users=users, edges=edges), depth)
        for level in adj.levels:
            assert (level >= 0).all()
            np.testing.assert_allclose(level.sum(axis=1), 1.0, atol=1e-9)


def identity_params(n_levels, dim):
    weights = [Tensor(np.eye(dim), requires_grad=True) for _ in range(n_levels)]
    biases = [Tensor(np.zeros(dim), requires_grad=True) for _ in range(n_levels)]
    head = Tensor(np.zeros((2, dim)), requires_grad=True)
    return HGCParams(weights=weights, biases=biases, gates=np.ones(n_levels), behavior_head=head)


class TestHgcForward:
    def test_identity_propagation(self):
        adj = HierarchicalAdjacency(levels=[np.eye(3), np.eye(3)])
        params = identity_params(2, 4)
        h0 = Tensor(np.abs(np.random.default_rng(0).normal(size=(3, 4))))
        out = hgc_forward(h0, adj, params)
        np.testing.assert_allclose(out.data, h0.data, atol=1e-12)

    def test_gated_off_network_is_zero(self):
        adj = HierarchicalAdjacency(levels=[np.eye(3), np.eye(3)])
        params = identity_params(2, 4)
        params.gates[:] = 0.0
        out = hgc_forward(Tensor(np.random.default_rng(1).normal(size=(3, 4))), adj, params)
        np.testing.assert_array_equal(out.data, np.zeros((3, 4)))

    def test_hand_case_single_level(self):
        # 2-node path; level-0 matrix [[.5,.5],[.5,.5]]; by-hand evaluation
        g = SocialGraph(users=["a", "b"], edges=[("a", "b")])
        adj = build_hierarchical_adjacency(g, depth=1)
        w = Tensor(np.array([[2.0], [0.0]]), requires_grad=True)
        b = Tensor(np.array([0.5]), requires_grad=True)
        params = HGCParams(
            weights=[w], biases=[b], gates=np.array([1.0]), behavior_head=Tensor(np.zeros((2, 1)))
        )
        h0 = Tensor(np.array([[1.0, 10.0], [3.0, 20.0]]))
        # A @ h0 = [[2, 15], [2, 15]]; @ w = [[4], [4]]; + b = [[4.5], [4.5]]
        out = hgc_forward(h0, adj, params)
        np.testing.assert_allclose(out.data, [[4.5], [4.5]], atol=1e-12)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(7)
        users = [f"u{i}" for i in range(5)]
        edges = [("u0", "u1"), ("u1", "u2"), ("u2", "u3"), ("u3", "u4"), ("u0", "u4")]
        g = SocialGraph(users=users, edges=edges)
        adj = build_hierarchical_adjacency(g, depth=2)
        params = init_hgc_params(rng, d_in=3, level_dims=(4, 2))
        h0 = rng.normal(size=(5, 3))
        out = hgc_forward(Tensor(h0), adj, params).data

        perm = np.array([3, 0, 4, 1, 2])
        levels_p = [a[np.ix_(perm, perm)] for a in adj.levels]
        out_p = hgc_forward(
            Tensor(h0[perm]), HierarchicalAdjacency(levels=levels_p), params
        ).data
        np.testing.assert_allclose(out_p, out[perm], atol=1e-12)

    def test_gradients_pass_grad_check(self):
        rng = np.random.default_rng(3)
        g = SocialGraph(users=["a", "b", "c"], edges=[("a", "b"), ("b", "c")])
        adj = build_hierarchical_adjacency(g, depth=2)
        params = init_hgc_params(rng, d_in=3, level_dims=(3, 2))
        ps = ParamStore()
        ps.add("h0", Tensor(rng.normal(size=(3, 3))))
        for k, (w, b) in enumerate(zip(params.weights, params.biases)):
            ps.add(f"w{k}", w)
            ps.add(f"b{k}", b)

        def f(p):
            out = hgc_forward(p["h0"], adj, params)
            return (out * out).sum()

        report = grad_check(f, ps, epsilon=1e-4)
        assert report.max_error <= 1e-3, str(report)

    def test_shape_mismatch(self):
        adj = HierarchicalAdjacency(levels=[np.eye(3)])
        params = identity_params(1, 4)
        with pytest.raises(DimensionError):
            hgc_forward(Tensor(np.zeros((2, 4))), adj, params)


def make_sample(sid, user, ts, tokens=("hello",)):
    return Sample(
        id=sid,
        user=user,
        timestamp=float(ts),
        tokens=list(tokens),
        crisis=0,
        polarity="neu",
        intensity="mild",
        behavior_risk=0,
    )


class TestNodeFeatures:
    def _graph(self):
        return SocialGraph(users=["a", "b"], edges=[("a", "b")])

    def test_user_with_no_messages_gets_zero_row(self):
        s = make_sample("s1", "a", 10.0)
        per = {"s1": (Tensor([1.0, 2.0]), Tensor([3.0]))}
        out = node_features([s], self._graph(), per, window_seconds=100.0)
        np.testing.assert_array_equal(out.data[1], np.zeros(3))

    def test_singleton_mean_is_exact(self):
        s = make_sample("s1", "a", 10.0)
        per = {"s1": (Tensor([1.0, 2.0]), Tensor([3.0]))}
        out = node_features([s], self._graph(), per, window_seconds=100.0)
        np.testing.assert_array_equal(out.data[0], [1.0, 2.0, 3.0])

    def test_two_messages_average(self):
        samples = [make_sample("s1", "a", 10.0), make_sample("s2", "a", 11.0)]
        per = {
            "s1": (Tensor([1.0, 2.0]), Tensor([3.0])),
            "s2": (Tensor([5.0, 0.0]), Tensor([1.0])),
        }
        out = node_features(samples, self._graph(), per, window_seconds=100.0)
        np.testing.assert_allclose(out.data[0], [3.0, 1.0, 2.0], atol=1e-12)

    def test_window_filters_old_messages(self):
        samples = [make_sample("s1", "a", 0.0), make_sample("s2", "a", 1000.0)]
        per = {
            "s1": (Tensor([1.0, 1.0]), Tensor([1.0])),
            "s2": (Tensor([5.0, 0.0]), Tensor([2.0])),
        }
        out = node_features(samples, self._graph(), per, window_seconds=10.0)
        np.testing.assert_array_equal(out.data[0], [5.0, 0.0, 2.0])

    def test_unknown_user_rejected(self):
        s = make_sample("s1", "zz", 0.0)
        with pytest.raises(DataError, match="not in the graph"):
            node_features([s], self._graph(), {"s1": (Tensor([1.0]), Tensor([1.0]))}, 10.0)


class TestComputeReward:
    def test_perfect_predictions(self):
        w = RewardWeights(0.2, 0.3, 0.5)
        assert compute_reward([1, 0, 1], [1, 0, 1], w) == pytest.approx(1.0)

    def test_no_positives_predicted(self):
        w = RewardWeights()
        assert compute_reward([0, 0, 0], [1, 1, 0], w) == 0.0

    def test_hand_case(self):
        # P=1, R=0.5, F1=2/3; equal thirds -> (1 + 0.5 + 2/3) / 3
        w = RewardWeights()
        reward = compute_reward([1, 0, 0, 0], [1, 1, 0, 0], w)
        assert reward == pytest.approx((1.0 + 0.5 + 2.0 / 3.0) / 3.0, abs=1e-9)
        assert reward == pytest.approx(0.7222, abs=5e-5)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            compute_reward([1, 0], [1], RewardWeights())

    def test_non_binary_rejected(self):
        with pytest.raises(DataError):
            compute_reward([2, 0], [1, 0], RewardWeights())

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=20))
    @settings(max_examples=50, deadline=None)
    def test_bounded_by_weight_total(self, pairs):
        w = RewardWeights(0.5, 0.25, 0.25)
        preds = [p for p, _ in pairs]
        golds = [g for _, g in pairs]
        r = compute_reward(preds, golds, w)
        assert 0.0 <= r <= w.total + 1e-12

    def test_weight_validation(self):
        with pytest.raises(ConfigError):
            RewardWeights(-0.1, 0.5, 0.6)
        with pytest.raises(ConfigError):
            RewardWeights(0.0, 0.0, 0.0)


class TestBprmUpdate:
    def _params(self, gates):
        return HGCParams(
            weights=[Tensor(np.eye(2), requires_grad=True)],
            biases=[Tensor(np.zeros(2), requires_grad=True)],
            gates=np.asarray(gates, dtype=float),
            behavior_head=Tensor(np.zeros((2, 2))),
        )

    def test_both_candidates_worse_leaves_gates(self):
        params = self._params([1.0])
        updated, step = bprm_update(params, lambda g: -abs(g[0] - 1.0), step=0.3, rng_seed=0)
        assert not step.accepted
        np.testing.assert_array_equal(updated.gates, [1.0])
        assert step.reward_after == step.reward_before

    def test_monotone_reward_climbs(self):
        params = self._params([0.5])
        incumbent = 0.5
        for seed in range(20):
            params, step = bprm_update(params, lambda g: g[0], step=0.1, rng_seed=seed)
            assert step.reward_after >= step.reward_before
            assert params.gates[0] >= incumbent
            incumbent = params.gates[0]
        assert params.gates[0] > 0.5

    def test_candidates_clamped_to_bounds(self):
        params = self._params([1.9])
        seen = []

        def reward(g):
            seen.append(g.copy())
            return 0.0

        bprm_update(params, reward, step=0.5, rng_seed=1)
        for g in seen:
            assert (g >= 0.0).all() and (g <= 2.0).all()

    def test_accept_requires_strict_improvement(self):
        params = self._params([1.0])
        updated, step = bprm_update(params, lambda g: 42.0, step=0.1, rng_seed=3)
        assert not step.accepted
        np.testing.assert_array_equal(updated.gates, [1.0])

    def test_nonpositive_step_rejected(self):
        with pytest.raises(ConfigError):
            bprm_update(self._params([1.0]), lambda g: 0.0, step=0.0, rng_seed=0)

    def test_deterministic_for_fixed_seed(self):
        a, step_a = bprm_update(self._params([1.0]), lambda g: g.sum(), step=0.2, rng_seed=9)
        b, step_b = bprm_update(self._params([1.0]), lambda g: g.sum(), step=0.2, rng_seed=9)
        np.testing.assert_array_equal(a.gates, b.gates)
        assert step_a.reward_after == step_b.reward_after
