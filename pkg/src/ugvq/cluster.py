"""Community detection on the comparison graph via random walk with restart.

Two phases: local clusters grow greedily by single compactness computed from
the RWR relevance matrix, then clusters are merged greedily while directed
modularity increases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from .errors import EmptyGraph, InputError, SingularSystem

DEFAULT_GRID = tuple(round(0.01 * k, 2) for k in range(1, 100))


@dataclass(frozen=True)
class RelevanceMatrix:
    R: np.ndarray
    B: float
    delta: float


@dataclass(frozen=True)
class ClusterPartition:
    assignment: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    modularity: float

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def _as_adjacency(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError("adjacency must be square")
    if np.any(M < 0) or not np.all(np.isfinite(M)):
        raise InputError("adjacency must be finite and nonnegative")
    return M


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise InputError(f"restart probability must lie in (0, 1), got {delta}")


def column_normalize(M: np.ndarray) -> np.ndarray:
    """Column-stochastic version of ``M``; all-zero columns become uniform."""
    M = _as_adjacency(M)
    n = M.shape[0]
    col = M.sum(axis=0)
    out = np.empty_like(M)
    nz = col > 0
    out[:, nz] = M[:, nz] / col[nz]
    out[:, ~nz] = 1.0 / n if n else 0.0
    return out


def relevance_matrix(M, delta: float, invert: bool = True) -> RelevanceMatrix:
    """``R = (1 - delta) (I - delta * Mt)^{-1}`` with ``Mt`` column-normalized ``M``.

    ``invert=False`` evaluates the same expression without the inverse, for
    comparison only; it is not a random-walk relevance.
    """
    _check_delta(delta)
    Mt = column_normalize(M)
    n = Mt.shape[0]
    A = np.eye(n) - delta * Mt
    if invert:
        try:
            R = (1.0 - delta) * np.linalg.solve(A, np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from None
        if not np.all(np.isfinite(R)):
            raise SingularSystem("non-finite relevance matrix")
    else:
        R = (1.0 - delta) * A
    return RelevanceMatrix(R=R, B=float(R.sum()), delta=float(delta))


def single_compactness(rel: RelevanceMatrix, i: int, cluster) -> float:
    R, B = rel.R, rel.B
    members = list(cluster)
    if i in members:
        raise InputError(f"node {i} already in the cluster")
    link = float(R[i, members].sum() + R[members, i].sum()) if members else 0.0
    return (R[i, i] + link - R[i, :].sum() * R[:, i].sum() / B) / B


def modularity(M, partition) -> float:
    """Directed modularity with ``d_in_i = sum_j M_ij`` and ``d_out_i = sum_j M_ji``."""
    M = _as_adjacency(M)
    A = M.sum()
    if A == 0:
        raise EmptyGraph("adjacency has no weight")
    d_in = M.sum(axis=1)
    d_out = M.sum(axis=0)
    _check_partition(partition, M.shape[0])
    q = 0.0
    for U in partition:
        idx = np.fromiter(U, dtype=np.int64)
        q += M[np.ix_(idx, idx)].sum() - d_in[idx].sum() * d_out[idx].sum() / A
    return float(q / A)


def _check_partition(partition, n):
    seen = [x for U in partition for x in U]
    if sorted(seen) != list(range(n)):
        raise InputError("partition must cover every item exactly once")


def local_clusters(rel: RelevanceMatrix) -> list[list[int]]:
    """Phase one: grow compact local clusters from the lowest unassigned node.

    Growth continues while the best candidate's compactness strictly exceeds
    the compactness the previously added node had when it joined.
    """
    n = rel.R.shape[0]
    R, B = rel.R, rel.B
    row, col, diag = R.sum(axis=1), R.sum(axis=0), np.diag(R)
    base = diag - row * col / B
    sym = R + R.T
    unassigned = np.ones(n, dtype=bool)
    clusters = []
    while unassigned.any():
        seed = int(np.argmax(unassigned))
        unassigned[seed] = False
        members = [seed]
        link = sym[:, seed].copy()
        last = base[seed] / B
        while unassigned.any():
            cand = np.flatnonzero(unassigned)
            scores = (base[cand] + link[cand]) / B
            k = int(np.argmax(scores))  # first maximum = lowest index
            if not scores[k] > last:
                break
            best = int(cand[k])
            members.append(best)
            unassigned[best] = False
            link += sym[:, best]
            last = scores[k]
        clusters.append(sorted(members))
    return clusters


def merge_gain(M, clusters, p: int, q: int) -> float:
    """Modularity change from merging clusters ``p`` and ``q``."""
    M = _as_adjacency(M)
    A = M.sum()
    d_in, d_out = M.sum(axis=1), M.sum(axis=0)
    a, b = list(clusters[p]), list(clusters[q])
    cross = M[np.ix_(a, b)].sum() + M[np.ix_(b, a)].sum()
    null = d_in[a].sum() * d_out[b].sum() + d_in[b].sum() * d_out[a].sum()
    return float((cross - null / A) / A)


def merge_clusters(M, clusters) -> tuple[list[list[int]], list[tuple[int, int, float]]]:
    """Phase two: greedy modularity merging.

    Returns the final clusters and the merge history ``(p, q, gain)``; ties
    go to the lexicographically smallest ``(p, q)`` and the merged cluster
    takes position ``p``.
    """
    M = _as_adjacency(M)
    A = M.sum()
    clusters = [sorted(c) for c in clusters]
    history = []
    if A == 0:
        return clusters, history
    d_in, d_out = M.sum(axis=1), M.sum(axis=0)
    while len(clusters) > 1:
        S = np.zeros((M.shape[0], len(clusters)))
        for c, U in enumerate(clusters):
            S[U, c] = 1.0
        E = S.T @ M @ S
        Din, Dout = S.T @ d_in, S.T @ d_out
        gain = (E + E.T - (np.outer(Din, Dout) + np.outer(Dout, Din)) / A) / A
        iu = np.triu_indices(len(clusters), k=1)
        vals = gain[iu]
        k = int(np.argmax(vals))
        if not vals[k] > 0:
            break
        p, q = int(iu[0][k]), int(iu[1][k])
        history.append((p, q, float(vals[k])))
        clusters[p] = sorted(clusters[p] + clusters[q])
        del clusters[q]
    return clusters, history


def _canonical(clusters, n) -> ClusterPartition:
    ordered = sorted((tuple(sorted(c)) for c in clusters), key=lambda c: c[0])
    assignment = np.empty(n, dtype=np.int64)
    for k, U in enumerate(ordered):
        assignment[list(U)] = k
    return ordered, assignment


def cluster_graph(M, delta: float, invert: bool = True) -> ClusterPartition:
    M = _as_adjacency(M)
    n = M.shape[0]
    if n == 0:
        raise EmptyGraph("no items")
    rel = relevance_matrix(M, delta, invert=invert)
    clusters, _ = merge_clusters(M, local_clusters(rel))
    ordered, assignment = _canonical(clusters, n)
    q = modularity(M, ordered) if M.sum() > 0 else 0.0
    return ClusterPartition(assignment=assignment, clusters=tuple(ordered), modularity=q)


def sweep_restart(M, grid=DEFAULT_GRID, invert: bool = True) -> list[tuple[float, float, int]]:
    rows = []
    for delta in grid:
        part = cluster_graph(M, float(delta), invert=invert)
        rows.append((float(delta), part.modularity, part.n_clusters))
    return rows


class RWRClustering(ClusterMixin, BaseEstimator):
    """Estimator front end; ``fit`` takes the square win-count matrix."""

    def __init__(self, delta=0.5, invert=True):
        self.delta = delta
        self.invert = invert

    def fit(self, X, y=None):
        M = check_array(X, dtype=float, ensure_min_samples=1, ensure_min_features=1)
        part = cluster_graph(M, self.delta, invert=self.invert)
        self.partition_ = part
        self.labels_ = part.assignment
        self.modularity_ = part.modularity
        self.n_clusters_ = part.n_clusters
        return self
