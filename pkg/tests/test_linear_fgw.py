import numpy as np
import pytest
from scipy.stats import spearmanr

from gradate import (
    AttributedGraph,
    LabeledGraphDataset,
    barycentric_embed,
    fgw_distance,
    linear_fgw_distance,
    pairwise_linear_fgw,
)
from gradate.errors import ReferenceMismatch
from gradate.fgw import FGWConfig
from gradate.linear_fgw import BarycentricEmbedding

from conftest import heterogeneous_graphs, random_graph


class TestBarycentricEmbed:
    def test_identity_projection_against_itself(self, rng):
        g = random_graph(rng, n_nodes=5)
        emb = barycentric_embed(g, g, FGWConfig(alpha=0.5))
        assert np.abs(emb.t_node - g.features).max() <= 1e-9
        assert np.abs(emb.t_edge - g.adjacency).max() <= 1e-9

    def test_single_node_reference_aggregates(self, rng):
        g = random_graph(rng, n_nodes=6)
        ref = AttributedGraph(np.zeros((1, 1)), np.zeros((1, 3)))
        emb = barycentric_embed(g, ref, FGWConfig(alpha=0.5))
        assert np.allclose(emb.t_node, g.features.mean(axis=0))
        assert np.allclose(emb.t_edge, [[g.adjacency.mean()]])

    def test_isomorphic_graphs_share_embeddings(self, rng):
        g = random_graph(rng, n_nodes=6)
        perm = rng.permutation(6)
        h = AttributedGraph(g.adjacency[np.ix_(perm, perm)], g.features[perm])
        ref = random_graph(rng, n_nodes=5)
        cfg = FGWConfig(alpha=0.5)
        e1 = barycentric_embed(g, ref, cfg)
        e2 = barycentric_embed(h, ref, cfg)
        assert np.abs(e1.t_node - e2.t_node).max() <= 1e-5
        assert np.abs(e1.t_edge - e2.t_edge).max() <= 1e-5

    def test_nonuniform_reference_rejected(self, rng):
        g = random_graph(rng, n_nodes=4)
        ref = AttributedGraph(np.zeros((2, 2)), np.zeros((2, 3)),
                              node_weights=[0.9, 0.1])
        with pytest.raises(ReferenceMismatch):
            barycentric_embed(g, ref, FGWConfig())

    def test_t_edge_is_symmetric(self, rng):
        g = random_graph(rng, n_nodes=7)
        ref = random_graph(rng, n_nodes=4)
        emb = barycentric_embed(g, ref, FGWConfig(alpha=0.5))
        assert np.abs(emb.t_edge - emb.t_edge.T).max() <= 1e-6


class TestLinearFgwDistance:
    def test_self_distance_zero(self, rng):
        g = random_graph(rng)
        ref = random_graph(rng, n_nodes=4)
        e = barycentric_embed(g, ref, FGWConfig(alpha=0.5))
        assert linear_fgw_distance(e, e, 0.5) == 0.0

    def test_single_entry_perturbation(self):
        t_node = np.zeros((3, 2))
        t_edge = np.zeros((3, 3))
        e1 = BarycentricEmbedding(t_node, t_edge)
        bumped = t_node.copy()
        bumped[1, 0] = 0.25
        e2 = BarycentricEmbedding(bumped, t_edge)
        assert linear_fgw_distance(e1, e2, 0.5) == pytest.approx(0.5 * 0.25 ** 2)

    def test_matches_direct_matrix_arithmetic(self, rng):
        e1 = BarycentricEmbedding(rng.standard_normal((4, 3)), rng.standard_normal((4, 4)))
        e2 = BarycentricEmbedding(rng.standard_normal((4, 3)), rng.standard_normal((4, 4)))
        alpha = 0.3
        expected = ((1 - alpha) * np.linalg.norm(e1.t_node - e2.t_node, "fro") ** 2
                    + alpha * np.linalg.norm(e1.t_edge - e2.t_edge, "fro") ** 2)
        assert linear_fgw_distance(e1, e2, alpha) == pytest.approx(expected, rel=1e-12)

    def test_reference_mismatch_raises(self, rng):
        e1 = BarycentricEmbedding(np.zeros((3, 2)), np.zeros((3, 3)))
        e2 = BarycentricEmbedding(np.zeros((4, 2)), np.zeros((4, 4)))
        with pytest.raises(ReferenceMismatch):
            linear_fgw_distance(e1, e2, 0.5)


class TestPairwise:
    def test_single_graph_dataset(self, rng):
        ds = LabeledGraphDataset([random_graph(rng)], [0])
        D = pairwise_linear_fgw(ds, FGWConfig(alpha=0.5))
        assert D.shape == (1, 1) and D[0, 0] == 0.0

    def test_duplicate_graphs_coincide(self, rng):
        g = random_graph(rng, n_nodes=5)
        others = [random_graph(rng) for _ in range(4)]
        ds = LabeledGraphDataset([g, others[0], g, *others[1:]], [0] * 6)
        D = pairwise_linear_fgw(ds, FGWConfig(alpha=0.5, seed=1))
        assert D[0, 2] <= 1e-6

    def test_symmetry_and_zero_diagonal(self, rng):
        ds = LabeledGraphDataset([random_graph(rng) for _ in range(5)], [0] * 5)
        D = pairwise_linear_fgw(ds, FGWConfig(alpha=0.5, seed=1))
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0.0)

    def test_rank_correlates_with_true_fgw(self):
        graphs = heterogeneous_graphs(seed=2, n_graphs=6)
        ds = LabeledGraphDataset(graphs, [0] * 6)
        cfg = FGWConfig(alpha=0.5, seed=2)
        D_lin = pairwise_linear_fgw(ds, cfg)
        n = len(graphs)
        D_true = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D_true[i, j] = D_true[j, i] = fgw_distance(graphs[i], graphs[j], cfg).distance
        iu = np.triu_indices(n, k=1)
        rho = spearmanr(D_lin[iu], D_true[iu]).statistic
        assert rho > 0.7

    def test_sqrt_satisfies_triangle_inequality(self, rng):
        graphs = [random_graph(rng, n_nodes=int(rng.integers(4, 8))) for _ in range(7)]
        ds = LabeledGraphDataset(graphs, [0] * 7)
        D = np.sqrt(pairwise_linear_fgw(ds, FGWConfig(alpha=0.5, seed=3)))
        n = len(graphs)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    assert D[i, k] <= D[i, j] + D[j, k] + 1e-12

    def test_deterministic_given_seed(self, rng):
        graphs = [random_graph(rng) for _ in range(4)]
        ds = LabeledGraphDataset(graphs, [0] * 4)
        cfg = FGWConfig(alpha=0.5, seed=9)
        assert np.array_equal(pairwise_linear_fgw(ds, cfg), pairwise_linear_fgw(ds, cfg))

    def test_jobs_do_not_change_results(self, rng):
        graphs = [random_graph(rng) for _ in range(5)]
        ds = LabeledGraphDataset(graphs, [0] * 5)
        cfg = FGWConfig(alpha=0.5, seed=4)
        assert np.array_equal(pairwise_linear_fgw(ds, cfg, jobs=1),
                              pairwise_linear_fgw(ds, cfg, jobs=4))
