"""Exact brute-force k-nearest-neighbor search.

Distances are Euclidean. Squared distances are accumulated one feature at
a time, left to right, so a scalar re-implementation reproduces them bit
for bit. Ties are broken by the smaller candidate index.
"""

from dataclasses import dataclass

import numpy as np

from imbr.errors import DimensionMismatch, InsufficientNeighbors

# upper bound on query-by-candidate block size held in memory at once
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense row-per-instance matrix with aligned integer class labels."""

    rows: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        labels = np.asarray(self.labels)
        if rows.ndim != 2:
            raise DimensionMismatch(f"rows must be 2-D, got shape {rows.shape}")
        if rows.shape[1] < 1:
            raise DimensionMismatch("feature dimension must be at least 1")
        if labels.ndim != 1 or labels.shape[0] != rows.shape[0]:
            raise DimensionMismatch(
                f"{labels.shape[0] if labels.ndim == 1 else labels.shape} labels for {rows.shape[0]} rows"
            )
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise ValueError("labels must be integer class ids")
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            raise ValueError("class ids must be non-negative")
        if not np.all(np.isfinite(rows)):
            raise ValueError("feature matrix contains non-finite values")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def dim(self):
        return self.rows.shape[1]

    def class_counts(self, n_classes=None):
        if n_classes is None:
            n_classes = int(self.labels.max()) + 1 if self.n else 0
        return np.bincount(self.labels, minlength=n_classes)

    def subset(self, index):
        index = np.asarray(index, dtype=np.int64)
        return FeatureMatrix(self.rows[index], self.labels[index])


@dataclass(frozen=True)
class NeighborTable:
    """Per-query neighbor indices and distances, both shaped ``(n_queries, k)``."""

    queries: np.ndarray
    indices: np.ndarray
    distances: np.ndarray

    def __len__(self):
        return len(self.queries)

    def __getitem__(self, i):
        return list(zip(self.indices[i].tolist(), self.distances[i].tolist()))


def _candidate_mask(labels, candidate_filter):
    if candidate_filter is None:
        return np.ones(labels.shape[0], dtype=bool)
    if callable(candidate_filter):
        keep = [c for c in np.unique(labels).tolist() if candidate_filter(c)]
    else:
        keep = list(candidate_filter)
    return np.isin(labels, keep)


def pairwise_distances(queries, candidates):
    """Euclidean distances between every query row and every candidate row."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    acc = np.zeros((queries.shape[0], candidates.shape[0]))
    for j in range(queries.shape[1]):
        diff = queries[:, j, None] - candidates[None, :, j]
        acc += diff * diff
    return np.sqrt(acc)


def knn(matrix, query_rows, k, candidate_filter=None, exclude_self=True):
    """Find the ``k`` nearest eligible rows of ``matrix`` for each query row.

    Parameters
    ----------
    matrix : FeatureMatrix
    query_rows : sequence of int
        Row indices into ``matrix`` to use as queries.
    k : int
    candidate_filter : callable, iterable of class ids, or None
        A predicate on class id, or the set of admissible class ids.
        ``None`` admits every row.
    exclude_self : bool
        Drop the query row itself from its own candidate list. Duplicate
        rows at other indices remain eligible.

    Returns
    -------
    NeighborTable
        Neighbors sorted by (distance, index) ascending.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query_rows = np.asarray(query_rows, dtype=np.int64).reshape(-1)
    mask = _candidate_mask(matrix.labels, candidate_filter)
    cand = np.flatnonzero(mask)
    n_q = query_rows.size
    out_idx = np.empty((n_q, k), dtype=np.int64)
    out_dist = np.empty((n_q, k), dtype=np.float64)
    if n_q == 0:
        return NeighborTable(query_rows, out_idx, out_dist)

    # self position inside ``cand`` for each query, -1 when the query is not a candidate
    self_pos = np.full(n_q, -1)
    if exclude_self and cand.size:
        pos = np.minimum(np.searchsorted(cand, query_rows), cand.size - 1)
        self_pos = np.where(cand[pos] == query_rows, pos, -1)
    eligible = cand.size - (self_pos >= 0)
    short = np.flatnonzero(eligible < k)
    if short.size:
        q = int(short[0])
        raise InsufficientNeighbors(int(query_rows[q]), int(eligible[q]), k)

    cand_rows = matrix.rows[cand]
    block = max(1, _BLOCK_ELEMENTS // max(cand.size, 1))
    for start in range(0, n_q, block):
        stop = min(start + block, n_q)
        dist = pairwise_distances(matrix.rows[query_rows[start:stop]], cand_rows)
        for r in range(stop - start):
            q = start + r
            row = dist[r]
            if self_pos[q] >= 0:
                row[self_pos[q]] = np.inf
            # keep everything tied with the k-th value, then order exactly
            kth = np.partition(row, k - 1)[k - 1]
            sel = np.flatnonzero(row <= kth)
            order = np.lexsort((sel, row[sel]))[:k]
            chosen = sel[order]
            out_idx[q] = cand[chosen]
            out_dist[q] = row[chosen]
    return NeighborTable(query_rows, out_idx, out_dist)
