import numpy as np
import pytest
from helpers import brute_modularity, planted_blocks, set_partitions

from ugvq.cluster import (
    RWRClustering, cluster_graph, column_normalize, local_clusters, merge_clusters, merge_gain,
    modularity, relevance_matrix, single_compactness, sweep_restart,
)
from ugvq.errors import EmptyGraph, InputError

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_relevance_small_delta_is_identity():
    rng = np.random.default_rng(0)
    M = rng.integers(0, 5, (4, 4)).astype(float)
    np.testing.assert_allclose(relevance_matrix(M, 1e-12).R, np.eye(4), atol=1e-11)


def test_relevance_two_by_two():
    rel = relevance_matrix(SWAP, 0.5)
    np.testing.assert_allclose(rel.R, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]], atol=1e-15)
    assert rel.B == pytest.approx(2.0)


@pytest.mark.parametrize("delta", [0.01, 0.15, 0.5, 0.81, 0.99])
def test_relevance_columns_sum_to_one(delta):
    rng = np.random.default_rng(11)
    M = rng.integers(0, 4, (5, 5)).astype(float)
    M[:, 2] = 0  # sink column
    rel = relevance_matrix(M, delta)
    assert np.all(rel.R >= 0)
    np.testing.assert_allclose(rel.R.sum(axis=0), 1.0, atol=1e-10)


def test_zero_columns_become_uniform():
    M = np.array([[0, 0, 1], [2, 0, 0], [0, 0, 0]], dtype=float)
    Mt = column_normalize(M)
    np.testing.assert_allclose(Mt[:, 1], 1 / 3)
    np.testing.assert_allclose(Mt.sum(axis=0), 1.0)


def test_printed_formula_is_not_stochastic():
    rel = relevance_matrix(SWAP, 0.5, invert=False)
    np.testing.assert_allclose(rel.R, 0.5 * (np.eye(2) - 0.5 * SWAP))


def test_delta_range():
    with pytest.raises(InputError):
        relevance_matrix(SWAP, 1.5)
    with pytest.raises(InputError):
        relevance_matrix(SWAP, 0.0)


def test_compactness_empty_cluster():
    rel = relevance_matrix(SWAP, 0.5)
    R, B = rel.R, rel.B
    expected = (R[0, 0] - R[0].sum() * R[:, 0].sum() / B) / B
    assert single_compactness(rel, 0, []) == pytest.approx(expected, abs=1e-15)


def test_compactness_worked_example():
    rel = relevance_matrix(SWAP, 0.5)
    # direct evaluation: (2/3 + (1/3 + 1/3) - 1*1/2) / 2
    assert single_compactness(rel, 1, [0]) == pytest.approx(5 / 12, abs=1e-15)


def test_compactness_monotone():
    rng = np.random.default_rng(2)
    rel = relevance_matrix(rng.integers(1, 5, (6, 6)).astype(float), 0.3)
    assert single_compactness(rel, 0, [1, 2]) > single_compactness(rel, 0, [1])


def test_modularity_single_cluster_is_zero():
    rng = np.random.default_rng(4)
    M = rng.integers(0, 5, (7, 7)).astype(float)
    np.fill_diagonal(M, 0)
    assert modularity(M, [list(range(7))]) == pytest.approx(0.0, abs=1e-15)


def test_modularity_singletons():
    rng = np.random.default_rng(5)
    M = rng.integers(0, 5, (6, 6)).astype(float)
    np.fill_diagonal(M, 0)
    A = M.sum()
    expected = -np.sum(M.sum(axis=1) * M.sum(axis=0)) / A**2
    assert modularity(M, [[i] for i in range(6)]) == pytest.approx(expected, abs=1e-15)


def test_modularity_two_triangles_brute_force():
    M = np.zeros((6, 6))
    for block in ([0, 1, 2], [3, 4, 5]):
        for i in block:
            for j in block:
                if i != j:
                    M[i, j] = 1 + i + 2 * j
    part = [[0, 1, 2], [3, 4, 5]]
    assert abs(modularity(M, part) - brute_modularity(M, part)) <= 1e-12


def test_modularity_errors():
    with pytest.raises(EmptyGraph):
        modularity(np.zeros((3, 3)), [[0, 1, 2]])
    with pytest.raises(InputError):
        modularity(SWAP, [[0]])


def test_modularity_permutation_invariant():
    rng = np.random.default_rng(8)
    M = rng.integers(0, 6, (7, 7)).astype(float)
    part = [[0, 3], [1, 2, 6], [4, 5]]
    perm = rng.permutation(7)
    inv = np.argsort(perm)
    Mp = M[np.ix_(perm, perm)]
    part_p = [[int(inv[i]) for i in U] for U in reversed(part)]
    assert modularity(Mp, part_p) == pytest.approx(modularity(M, part), abs=1e-14)


def test_single_node():
    part = cluster_graph(np.zeros((1, 1)), 0.5)
    assert part.clusters == ((0,),)
    assert part.modularity == 0.0
    assert sweep_restart(np.zeros((1, 1)), [0.5]) == [(0.5, 0.0, 1)]


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("delta", [0.15, 0.5, 0.81])
def test_planted_blocks_match_exhaustive(seed, delta):
    M, blocks = planted_blocks(seed)
    best = max(set_partitions(list(range(8))), key=lambda p: modularity(M, p))
    part = cluster_graph(M, delta)
    assert sorted(map(list, part.clusters)) == sorted(blocks)
    assert sorted(map(sorted, best)) == sorted(blocks)
    assert part.modularity == pytest.approx(modularity(M, best), abs=1e-12)


def test_greedy_replay_on_uniform_complete_graph():
    n = 6
    M = np.ones((n, n)) - np.eye(n)
    rel = relevance_matrix(M, 0.5)
    start = local_clusters(rel)
    final, history = merge_clusters(M, start)
    # replay with full recomputation
    clusters = [list(c) for c in start]
    while len(clusters) > 1:
        base = modularity(M, clusters)
        gains = {}
        for p in range(len(clusters)):
            for q in range(p + 1, len(clusters)):
                merged = [c for k, c in enumerate(clusters) if k not in (p, q)] + [clusters[p] + clusters[q]]
                gains[(p, q)] = modularity(M, merged) - base
        (p, q), g = max(gains.items(), key=lambda kv: (kv[1], [-kv[0][0], -kv[0][1]]))
        if g <= 1e-15:
            break
        clusters[p] = sorted(clusters[p] + clusters[q])
        del clusters[q]
    assert sorted(map(sorted, final)) == sorted(map(sorted, clusters))
    part = cluster_graph(M, 0.5)
    assert part.modularity <= 1e-12
    assert part.modularity == pytest.approx(modularity(M, clusters), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_merge_gain_matches_recomputation(seed):
    rng = np.random.default_rng(seed)
    M = rng.integers(0, 4, (9, 9)).astype(float)
    clusters = [[0, 1], [2, 3, 4], [5], [6, 7, 8]]
    for p in range(4):
        for q in range(p + 1, 4):
            merged = [c for k, c in enumerate(clusters) if k not in (p, q)] + [clusters[p] + clusters[q]]
            delta = modularity(M, merged) - modularity(M, clusters)
            assert abs(merge_gain(M, clusters, p, q) - delta) <= 1e-12


def test_partition_invariants_and_determinism():
    rng = np.random.default_rng(12)
    M = rng.integers(0, 4, (10, 10)).astype(float)
    a, b = cluster_graph(M, 0.3), cluster_graph(M, 0.3)
    assert a.clusters == b.clusters
    assert sorted(i for U in a.clusters for i in U) == list(range(10))
    assert a.modularity == modularity(M, a.clusters)
    for k, U in enumerate(a.clusters):
        assert all(a.assignment[i] == k for i in U)


def test_sweep():
    M, _ = planted_blocks(0)
    rows = sweep_restart(M, [0.1, 0.3, 0.5, 0.7, 0.9])
    assert [c for _, _, c in rows] == [2] * 5
    assert len(sweep_restart(np.zeros((1, 1)))) == 99


def test_estimator():
    M, blocks = planted_blocks(1)
    est = RWRClustering(delta=0.5)
    labels = est.fit_predict(M)
    assert est.n_clusters_ == 2
    assert len(set(labels[blocks[0]])) == 1 and labels[blocks[0][0]] != labels[blocks[1][0]]
    assert est.get_params() == {"delta": 0.5, "invert": True}
