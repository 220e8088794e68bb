"""Shared generators and independent oracles for the test suite."""

import numpy as np


def random_flow_graph(rng, n_max=12, n_min=3):
    """Random undirected graph with integer weights 1..10 and a random edge flow."""
    n = int(rng.integers(n_min, n_max + 1))
    p = rng.uniform(0.3, 1.0)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    if not edges:
        edges = [(0, 1)]
    edges = np.array(edges, dtype=np.int64)
    weights = rng.integers(1, 11, size=len(edges)).astype(float)
    values = rng.uniform(-1.0, 1.0, size=len(edges))
    return n, edges, weights, values


def pinv_scores(n, edges, weights, values):
    """Least-squares scores via the Moore-Penrose pseudoinverse of a dense Laplacian."""
    W = np.zeros((n, n))
    Y = np.zeros((n, n))
    for (i, j), w, y in zip(edges, weights, values):
        W[i, j] = W[j, i] = w
        Y[i, j], Y[j, i] = y, -y
    L = np.diag(W.sum(axis=1)) - W
    b = (W * Y).sum(axis=1)
    return np.linalg.pinv(L) @ b


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        yield [[first]] + p
        for k in range(len(p)):
            yield p[:k] + [[first] + p[k]] + p[k + 1:]


def brute_modularity(M, partition):
    """Literal double sum over member pairs."""
    A = M.sum()
    n = M.shape[0]
    d_in = [sum(M[i, j] for j in range(n)) for i in range(n)]
    d_out = [sum(M[j, i] for j in range(n)) for i in range(n)]
    q = 0.0
    for U in partition:
        for i in U:
            for j in U:
                q += M[i, j] - d_in[i] * d_out[j] / A
    return q / A


def planted_blocks(seed, n=8):
    """Two disjoint dense directed blocks of four nodes, randomly placed."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    blocks = [sorted(order[: n // 2].tolist()), sorted(order[n // 2:].tolist())]
    M = np.zeros((n, n))
    for b in blocks:
        for i in b:
            for j in b:
                if i != j:
                    M[i, j] = rng.integers(1, 6)
    return M, blocks


def naive_ranks(x):
    """Average ranks by counting: rank = (#less) + (#equal + 1) / 2."""
    x = list(x)
    return np.array([sum(v < xi for v in x) + (sum(v == xi for v in x) + 1) / 2 for xi in x])


def naive_pearson(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    num = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    da = sum((x - ma) ** 2 for x in a) ** 0.5
    db = sum((y - mb) ** 2 for y in b) ** 0.5
    return num / (da * db)
