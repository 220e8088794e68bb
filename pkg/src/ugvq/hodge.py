"""HodgeRank global scores and the gradient / curl / harmonic split of a preference flow.

The least-squares scores solve the weighted graph-Laplacian system
``L s = b`` with ``L = diag(W 1) - W`` and ``b_i = sum_j w_ij Y_ij``. The
residual flow is then split into its projection onto the image of the
adjoint triangle-curl operator (local, 3-cycle inconsistency) and what is
left over (harmonic, longer cycles). All projections are orthogonal in the
``w``-weighted inner product over observed edges.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import InputError, NoEdges, NumericError, ZeroFlow
from .pairdata import ComparisonGraph, EdgeFlow, edge_weights, ingest_comparisons, preference_matrix

RESIDUAL_TOL = 1e-10
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class HodgeDecomposition:
    scores: np.ndarray
    flow: EdgeFlow
    weights: np.ndarray
    global_: EdgeFlow
    curl: EdgeFlow
    harmonic: EdgeFlow
    triangles: np.ndarray
    triangle_potentials: np.ndarray

    @property
    def ratios(self) -> tuple[float, float, float]:
        """Unweighted (global, curl, harmonic) energy fractions."""
        return _fractions(self, weighted=False)

    @property
    def weighted_ratios(self) -> tuple[float, float, float]:
        return _fractions(self, weighted=True)


def _solve_psd(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a symmetric PSD system, falling back to the pseudoinverse when singular."""
    if A.shape[0] == 0:
        return np.zeros(0)
    scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
    if A.shape[0] <= DENSE_LIMIT:
        try:
            x = np.linalg.solve(A, rhs)
            if np.all(np.isfinite(x)) and np.linalg.norm(A @ x - rhs) <= RESIDUAL_TOL * scale:
                return x
        except np.linalg.LinAlgError:
            pass
    x = np.linalg.pinv(A, hermitian=True) @ rhs
    # pinv returns the least-squares solution; measure consistency on the range of A
    residual = A @ x - rhs
    if np.linalg.norm(residual) > RESIDUAL_TOL * scale * max(1.0, np.linalg.norm(A, 2)):
        x = np.linalg.lstsq(A, rhs, rcond=None)[0]
        residual = A @ x - rhs
        if np.linalg.norm(residual) > 1e3 * RESIDUAL_TOL * scale * max(1.0, np.linalg.norm(A, 2)):
            raise NumericError(f"normal equations not solved: residual {np.linalg.norm(residual):.3e}")
    return x


def _components(n: int, edges: np.ndarray) -> list[np.ndarray]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return [np.array(g) for g in groups.values()]


def laplacian_system(n: int, edges: np.ndarray, weights: np.ndarray, values: np.ndarray):
    """Return ``(L, b)`` for the weighted least-squares ranking problem."""
    L = np.zeros((n, n))
    b = np.zeros(n)
    for (i, j), w, y in zip(edges, weights, values):
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
        b[i] += w * y
        b[j] -= w * y
    return L, b


def _scores_from_flow(n, edges, weights, values) -> np.ndarray:
    if not len(edges):
        raise NoEdges("no observed comparisons")
    L, b = laplacian_system(n, edges, weights, values)
    s = np.zeros(n)
    for comp in _components(n, edges):
        if len(comp) == 1:
            continue
        Lc = L[np.ix_(comp, comp)]
        # rank-one shift removes the constant null vector; b sums to zero per component
        shifted = Lc + np.full(Lc.shape, 1.0 / len(comp))
        sc = _solve_psd(shifted, b[comp])
        s[comp] = sc - sc.mean()
    return s


def global_scores(g: ComparisonGraph) -> np.ndarray:
    """Weighted least-squares scores, zero mean on each connected component."""
    flow = preference_matrix(g)
    return _scores_from_flow(g.n_items, flow.edges, edge_weights(g, flow), flow.values)


def gradient(scores: np.ndarray, edges: np.ndarray) -> np.ndarray:
    if not len(edges):
        return np.zeros(0)
    return scores[edges[:, 0]] - scores[edges[:, 1]]


def triangles(n: int, edges: np.ndarray) -> np.ndarray:
    """All 3-cliques ``(i, j, k)`` with ``i < j < k``, lexicographic order."""
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(int(j))
        adj[j].add(int(i))
    out = []
    for i in range(n):
        higher = sorted(v for v in adj[i] if v > i)
        for j, k in combinations(higher, 2):
            if k in adj[j]:
                out.append((i, j, k))
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def curl_matrix(edges: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Matrix of ``(curl X)_t = X_ij + X_jk + X_ki`` acting on edge values."""
    pos = {(int(i), int(j)): e for e, (i, j) in enumerate(edges)}
    C = np.zeros((len(tris), len(edges)))
    for t, (i, j, k) in enumerate(tris):
        C[t, pos[(i, j)]] = 1.0
        C[t, pos[(j, k)]] = 1.0
        C[t, pos[(i, k)]] = -1.0
    return C


def decompose_flow(n: int, edges, weights, values) -> HodgeDecomposition:
    """Decompose an arbitrary edge flow with positive edge weights."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(weights <= 0):
        raise InputError("edge weights must be positive on observed edges")
    s = _scores_from_flow(n, edges, weights, values)
    yg = gradient(s, edges)
    residual = values - yg

    tris = triangles(n, edges)
    if len(tris):
        C = curl_matrix(edges, tris)
        CW = C / weights  # C W^{-1}
        phi = _solve_psd(CW @ C.T, C @ residual)
        yc = (C.T @ phi) / weights
    else:
        phi = np.zeros(0)
        yc = np.zeros(len(edges))
    yh = residual - yc

    flow = EdgeFlow(n, edges, values)
    return HodgeDecomposition(
        scores=s,
        flow=flow,
        weights=weights,
        global_=flow.with_values(yg),
        curl=flow.with_values(yc),
        harmonic=flow.with_values(yh),
        triangles=tris,
        triangle_potentials=phi,
    )


def hodge_decompose(g: ComparisonGraph) -> HodgeDecomposition:
    flow = preference_matrix(g)
    if not len(flow.edges):
        raise NoEdges("no observed comparisons")
    return decompose_flow(g.n_items, flow.edges, edge_weights(g, flow), flow.values)


def _fractions(d: HodgeDecomposition, weighted: bool):
    w = d.weights if weighted else np.ones_like(d.weights)
    total = float(np.sum(w * d.flow.values**2))
    if total == 0.0:
        raise ZeroFlow("preference flow is identically zero")
    return tuple(float(np.sum(w * part.values**2)) / total for part in (d.global_, d.curl, d.harmonic))


def total_inconsistency(d: HodgeDecomposition, weighted: bool = False) -> tuple[float, float, float]:
    """Return ``(total, curl_fraction, harmonic_fraction)``.

    The default uses plain Frobenius norms over the full skew-symmetric
    matrices; since each edge appears twice in both numerator and
    denominator, edge sums give the same ratio.
    """
    _, curl, harmonic = _fractions(d, weighted)
    return harmonic + curl, curl, harmonic


def mos_ranking(scores, items=None) -> list:
    """Items ordered best first; equal scores keep input order."""
    scores = np.asarray(scores, dtype=float)
    items = list(range(len(scores))) if items is None else list(items)
    order = sorted(range(len(scores)), key=lambda k: (-scores[k], k))
    return [items[k] for k in order]


def render_full(scores) -> np.ndarray:
    """``s_i - s_j`` on every pair, including unobserved ones (extrapolated)."""
    s = np.asarray(scores, dtype=float)
    return s[:, None] - s[None, :]


def report(d: HodgeDecomposition, items) -> dict:
    total, curl, harmonic = total_inconsistency(d)
    wtotal, wcurl, wharm = total_inconsistency(d, weighted=True)
    g, c, h = d.ratios
    wg, wc, wh = d.weighted_ratios
    return {
        "items": list(items),
        "scores": [float(x) for x in d.scores],
        "ranking": mos_ranking(d.scores, items),
        "ratios": {"global": g, "curl": c, "harmonic": h},
        "weighted_ratios": {"global": wg, "curl": wc, "harmonic": wh},
        "total_inconsistency": total,
        "weighted_total_inconsistency": wtotal,
        "triangles": int(len(d.triangles)),
        "edges": int(len(d.flow.edges)),
    }


def edges_csv(d: HodgeDecomposition, items) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("item_i", "item_j", "weight", "flow", "global", "curl", "harmonic"))
    for k, (i, j) in enumerate(d.flow.edges):
        w.writerow((items[i], items[j], f"{d.weights[k]:.17g}",
                    *(f"{part.values[k]:.17g}" for part in (d.flow, d.global_, d.curl, d.harmonic))))
    return buf.getvalue()


class HodgeRank(BaseEstimator):
    """Estimator wrapper: ``fit`` on comparison records or a :class:`ComparisonGraph`.

    After fitting, ``scores_`` holds the global scores in ``items_`` order and
    ``decomposition_`` the full split. ``predict`` maps index pairs to the
    score difference ``s_i - s_j``.
    """

    def __init__(self, weighted_ratios=False):
        self.weighted_ratios = weighted_ratios

    def fit(self, X, y=None):
        g = X if isinstance(X, ComparisonGraph) else ingest_comparisons(X)
        self.graph_ = g
        self.items_ = list(g.items)
        self.decomposition_ = hodge_decompose(g)
        self.scores_ = self.decomposition_.scores
        self.ranking_ = mos_ranking(self.scores_, self.items_)
        self.inconsistency_ = total_inconsistency(self.decomposition_, weighted=self.weighted_ratios)
        return self

    def predict(self, pairs):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "scores_")
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return self.scores_[pairs[:, 0]] - self.scores_[pairs[:, 1]]
