import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from graphsan.graph import (
    FeatureMatrix,
    PrivacyGraph,
    RngStream,
    normalize_features,
    validate_graph,
)


class TestPrivacyGraph:
    def test_edges_are_canonicalized(self):
        g = PrivacyGraph(4, pub_edges=[(1, 0)], pri_edges=[(3, 2)])
        assert g.pub_edges == frozenset({(0, 1)})
        assert g.pri_edges == frozenset({(2, 3)})

    def test_incidence_derived_node_sets(self):
        g = PrivacyGraph(6, pub_edges=[(0, 1), (1, 2)], pri_edges=[(3, 4)])
        assert g.pub_nodes == frozenset({0, 1, 2})
        assert g.pri_nodes == frozenset({3, 4})
        assert g.all_edges == frozenset({(0, 1), (1, 2), (3, 4)})

    def test_node_can_be_in_both_sets(self):
        g = PrivacyGraph(3, pub_edges=[(0, 1)], pri_edges=[(1, 2)])
        assert 1 in g.pub_nodes and 1 in g.pri_nodes

    def test_adjacency_per_class(self):
        g = PrivacyGraph(4, pub_edges=[(0, 1), (0, 2)], pri_edges=[(2, 3)])
        assert g.adjacency("pub") == [[1, 2], [0], [0], []]
        assert g.adjacency("pri") == [[], [], [3], [2]]
        assert g.adjacency("all")[2] == [0, 3]


class TestValidateGraph:
    def test_self_loop_reported(self):
        report = validate_graph(PrivacyGraph(3, pub_edges=[(1, 1)]))
        assert any("self-loop at 1" in line for line in report)

    def test_dual_class_reported(self):
        report = validate_graph(PrivacyGraph(3, pub_edges=[(1, 2)], pri_edges=[(1, 2)]))
        assert any("dual-class edge" in line for line in report)

    def test_out_of_range_endpoint_reported(self):
        report = validate_graph(PrivacyGraph(2, pub_edges=[(0, 5)]))
        assert any("outside" in line for line in report)

    def test_valid_path_graph_is_clean(self):
        g = PrivacyGraph(4, pub_edges=[(0, 1), (1, 2), (2, 3)])
        assert validate_graph(g) == []


class TestFeatureMatrix:
    def test_copies_and_freezes(self):
        src = np.array([[0.1, 0.2], [0.3, 0.4]])
        m = FeatureMatrix(src)
        src[0, 0] = 9.0
        assert m.values[0, 0] == 0.1
        with pytest.raises(ValueError):
            m.values[0, 0] = 5.0

    def test_shape_accessors(self):
        m = FeatureMatrix(np.zeros((3, 5)))
        assert (m.n_nodes, m.n_features) == (3, 5)

    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            FeatureMatrix(np.zeros(4))


class TestNormalizeFeatures:
    def test_minmax_column(self):
        out = normalize_features(np.array([[0.0], [5.0], [10.0]]))
        assert np.allclose(out.values[:, 0], [0.0, 0.5, 1.0])

    def test_constant_column_maps_to_zero(self):
        out = normalize_features(np.array([[3.0], [3.0]]))
        assert np.array_equal(out.values[:, 0], [0.0, 0.0])

    def test_negative_values(self):
        out = normalize_features(np.array([[-1.0], [0.0], [3.0]]))
        assert np.allclose(out.values[:, 0], [0.0, 0.25, 1.0])

    def test_non_finite_names_column(self):
        bad = np.array([[0.0, 1.0], [np.nan, 2.0]])
        with pytest.raises(ValueError, match="column 0"):
            normalize_features(bad)

    @given(
        arrays(
            np.float64,
            st.tuples(st.integers(2, 8), st.integers(1, 4)),
            elements=st.floats(-100, 100, allow_nan=False),
        )
    )
    def test_idempotent(self, raw):
        once = normalize_features(raw)
        twice = normalize_features(once)
        assert np.array_equal(once.values, twice.values)
        assert once.values.min() >= 0.0 and once.values.max() <= 1.0


class TestRngStream:
    def test_same_path_same_draws(self):
        a = RngStream(7).child(1, 2).generator().random(5)
        b = RngStream(7).child(1, 2).generator().random(5)
        assert np.array_equal(a, b)

    def test_child_composition(self):
        assert RngStream(7).child(1).child(2) == RngStream(7).child(1, 2)

    def test_different_paths_differ(self):
        a = RngStream(7).child(0).generator().random(5)
        b = RngStream(7).child(1).generator().random(5)
        assert not np.array_equal(a, b)

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError):
            RngStream(-1)
