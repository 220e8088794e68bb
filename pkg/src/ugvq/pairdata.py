"""Paired-comparison records and the comparison graph built from them.

``M[i, j]`` counts how often item ``i`` was preferred over item ``j``. Pairs
that were never compared are missing edges, not zero-valued ones; every
quantity downstream is restricted to the observed edge set.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, NeverCompared, SelfComparison, UnknownWinner

COMPARISON_HEADER = ("item_a", "item_b", "winner")
COUNTS_HEADER = ("item_i", "item_j", "count_i_preferred")


@dataclass(frozen=True)
class ComparisonGraph:
    """Items in first-appearance order plus directed win counts."""

    items: tuple[str, ...]
    wins: Mapping[tuple[str, str], int]
    _index: Mapping[str, int] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        index = {item: k for k, item in enumerate(self.items)}
        if len(index) != len(self.items):
            raise InputError("duplicate item identifiers")
        for (a, b), count in self.wins.items():
            if a == b:
                raise SelfComparison(f"self-comparison for item {a!r}")
            if a not in index or b not in index:
                raise InputError(f"win count references unknown item in ({a!r}, {b!r})")
            if count < 0:
                raise InputError("win counts must be nonnegative")
        # zero counts carry no information; dropping them keeps equality canonical
        wins = {k: int(c) for k, c in self.wins.items() if c}
        object.__setattr__(self, "wins", MappingProxyType(wins))
        object.__setattr__(self, "_index", MappingProxyType(index))

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_records(self) -> int:
        return int(sum(self.wins.values()))

    def index(self, item: str) -> int:
        try:
            return self._index[item]
        except KeyError:
            raise InputError(f"unknown item {item!r}") from None

    def count(self, i: str, j: str) -> int:
        return self.wins.get((i, j), 0)

    def weight(self, i: str, j: str) -> int:
        """Number of comparisons between ``i`` and ``j`` (symmetric)."""
        return self.count(i, j) + self.count(j, i)

    def edges(self) -> list[tuple[int, int]]:
        """Observed unordered pairs as index tuples ``(i, j)`` with ``i < j``, sorted."""
        seen = set()
        for (a, b), c in self.wins.items():
            if c > 0:
                i, j = self._index[a], self._index[b]
                seen.add((min(i, j), max(i, j)))
        return sorted(seen)


@dataclass(frozen=True)
class EdgeFlow:
    """Skew-symmetric function on observed edges.

    ``edges[k] = (i, j)`` with ``i < j`` and ``values[k]`` is ``X_ij``; the
    opposite orientation is implied (``X_ji = -X_ij``).
    """

    n: int
    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        edges = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        values = np.array(self.values, dtype=float).reshape(-1)
        if len(edges) != len(values):
            raise InputError("edges and values differ in length")
        if len(edges) and not np.all(edges[:, 0] < edges[:, 1]):
            raise InputError("edges must be stored with i < j")
        edges.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)

    def value(self, i: int, j: int) -> float:
        if i == j:
            raise InputError("no self edges")
        a, b, sign = (i, j, 1.0) if i < j else (j, i, -1.0)
        hit = np.nonzero((self.edges[:, 0] == a) & (self.edges[:, 1] == b))[0]
        if not len(hit):
            raise NeverCompared(f"({i}, {j}) is not an observed edge")
        return sign * float(self.values[hit[0]])

    def to_dense(self) -> np.ndarray:
        """Full skew-symmetric matrix with zeros on non-edges."""
        X = np.zeros((self.n, self.n))
        if len(self.edges):
            X[self.edges[:, 0], self.edges[:, 1]] = self.values
            X[self.edges[:, 1], self.edges[:, 0]] = -self.values
        return X

    def with_values(self, values) -> "EdgeFlow":
        return EdgeFlow(self.n, self.edges, values)


def ingest_comparisons(records: Iterable[Sequence[str]]) -> ComparisonGraph:
    """Accumulate ``(item_a, item_b, winner)`` judgments into a graph.

    Duplicate records accumulate. Item order follows first appearance.
    """
    items: dict[str, None] = {}
    wins: dict[tuple[str, str], int] = {}
    for rec in records:
        a, b, winner = (str(x) for x in rec)
        if a == b:
            raise SelfComparison(f"record compares {a!r} with itself")
        if winner == a:
            loser = b
        elif winner == b:
            loser = a
        else:
            raise UnknownWinner(f"winner {winner!r} is neither {a!r} nor {b!r}")
        items.setdefault(a)
        items.setdefault(b)
        wins[(winner, loser)] = wins.get((winner, loser), 0) + 1
    return ComparisonGraph(tuple(items), wins)


def graph_from_counts(rows: Iterable[Sequence]) -> ComparisonGraph:
    """Build a graph from aggregated ``(item_i, item_j, count_i_preferred)`` rows."""
    items: dict[str, None] = {}
    wins: dict[tuple[str, str], int] = {}
    for row in rows:
        a, b, raw = row
        a, b = str(a), str(b)
        if a == b:
            raise SelfComparison(f"row compares {a!r} with itself")
        try:
            count = int(raw)
        except (TypeError, ValueError):
            raise InputError(f"non-integer count {raw!r}") from None
        if count < 0:
            raise InputError(f"negative count {count}")
        items.setdefault(a)
        items.setdefault(b)
        wins[(a, b)] = wins.get((a, b), 0) + count
    return ComparisonGraph(tuple(items), wins)


def winning_rate(g: ComparisonGraph, i: str, j: str) -> float:
    g.index(i), g.index(j)
    total = g.weight(i, j)
    if total == 0:
        raise NeverCompared(f"{i!r} and {j!r} were never compared")
    return g.count(i, j) / total


def weight_matrix(g: ComparisonGraph) -> np.ndarray:
    """Symmetric comparison counts ``w_ij = M_ij + M_ji``."""
    M = adjacency_matrix(g)
    return M + M.T


def preference_matrix(g: ComparisonGraph) -> EdgeFlow:
    """Edge flow ``Y_ij = 2 * pi_ij - 1`` on the observed edges."""
    M = adjacency_matrix(g)
    edges = g.edges()
    values = []
    for i, j in edges:
        w = M[i, j] + M[j, i]
        values.append(2.0 * M[i, j] / w - 1.0)
    return EdgeFlow(g.n_items, np.array(edges, dtype=np.int64).reshape(-1, 2), values)


def adjacency_matrix(g: ComparisonGraph) -> np.ndarray:
    n = g.n_items
    M = np.zeros((n, n))
    for (a, b), c in g.wins.items():
        M[g.index(a), g.index(b)] += c
    return M


def edge_weights(g: ComparisonGraph, flow: EdgeFlow | None = None) -> np.ndarray:
    """``w_ij`` for each edge of ``flow`` (defaults to the observed edge list)."""
    W = weight_matrix(g)
    edges = flow.edges if flow is not None else np.array(g.edges(), dtype=np.int64).reshape(-1, 2)
    if not len(edges):
        return np.zeros(0)
    return W[edges[:, 0], edges[:, 1]]


# -- CSV ------------------------------------------------------------------


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def _check_header(header, expected, where):
    if header is None:
        raise InputError(f"{where}: empty file")
    if tuple(h.strip() for h in header) != expected:
        raise InputError(f"{where}: expected header {','.join(expected)!r}, got {','.join(header)!r}")


def read_comparisons_csv(source) -> ComparisonGraph:
    """Read either the per-judgment or the aggregated-counts CSV layout."""
    fh = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and tuple(h.strip() for h in header) == COUNTS_HEADER:
            rows = [r for r in reader if r]
            if any(len(r) != 3 for r in rows):
                raise InputError("counts CSV: every row needs 3 fields")
            return graph_from_counts(rows)
        _check_header(header, COMPARISON_HEADER, "comparisons CSV")
        rows = [r for r in reader if r]
        if any(len(r) != 3 for r in rows):
            raise InputError("comparisons CSV: every row needs 3 fields")
        return ingest_comparisons(rows)
    finally:
        if fh is not source:
            fh.close()


def write_comparisons_csv(records: Iterable[Sequence[str]], dest) -> None:
    fh = open(dest, "w", newline="", encoding="utf-8") if isinstance(dest, (str, Path)) else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARISON_HEADER)
        for rec in records:
            w.writerow(rec)
    finally:
        if fh is not dest:
            fh.close()


def counts_to_csv(g: ComparisonGraph) -> str:
    """Serialize aggregated counts so that reading them back gives an equal graph.

    Rows are emitted so first appearance reproduces the item order; an item
    with no edge to any earlier item gets a zero-count row that introduces it.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNTS_HEADER)
    items = g.items
    for k in range(1, len(items)):
        linked = False
        for j in range(k):
            a, b = items[j], items[k]
            if g.weight(a, b):
                w.writerow((a, b, g.count(a, b)))
                w.writerow((b, a, g.count(b, a)))
                linked = True
        if not linked:
            w.writerow((items[0], items[k], 0))
    return buf.getvalue()
