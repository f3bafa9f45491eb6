"""Sparse undirected graphs, edge-list I/O, and Bernoulli sampling.

Graphs are simple (no self-loops, no multi-edges), undirected, and binary.
Nodes are integers 0..n-1.  Probability matrices are dense symmetric
float arrays with a zero diagonal; they stay dense because synthetic
experiments run at desk scale (n up to a few thousand).
"""

from __future__ import annotations

import io
import os

import numpy as np
from scipy import sparse

from .errors import DomainError, ParseError, RangeError, ValidationError

__all__ = [
    "SparseGraph",
    "ProbabilityMatrix",
    "load_edge_list",
    "write_edge_list",
    "degrees",
    "average_density",
    "sample_adjacency",
    "read_truth_labels",
    "write_truth_labels",
]


class SparseGraph:
    """Immutable undirected graph stored as per-node sorted neighbor arrays."""

    __slots__ = ("n", "adjacency", "m", "_csr")

    def __init__(self, n: int, adjacency: list[np.ndarray], _validated: bool = False):
        self.n = int(n)
        self.adjacency = adjacency
        self.m = sum(len(a) for a in adjacency) // 2
        self._csr = None
        if not _validated:
            self._validate()

    def _validate(self) -> None:
        if self.n < 0:
            raise ValidationError("node count must be nonnegative")
        if len(self.adjacency) != self.n:
            raise ValidationError("adjacency list count does not match n")
        neighbor_sets = [None] * self.n
        for i, nbrs in enumerate(self.adjacency):
            arr = np.asarray(nbrs, dtype=np.int64)
            if arr.size and (arr.min() < 0 or arr.max() >= self.n):
                raise RangeError(f"neighbor id out of range for node {i}")
            if np.any(arr == i):
                raise ValidationError(f"self-loop at node {i}")
            if arr.size and (np.any(np.diff(arr) <= 0)):
                raise ValidationError(f"neighbors of node {i} not sorted/unique")
            neighbor_sets[i] = arr
        self.adjacency = neighbor_sets
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i not in self.adjacency[j]:
                    raise ValidationError(f"edge ({i},{j}) not symmetric")

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "SparseGraph":
        """Build from an iterable of (i, j) pairs; duplicates and reversed
        copies are merged, self-loops rejected."""
        pairs = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise RangeError("node id outside 0..n-1")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ValidationError("self-loop in edge set")
            lo = np.minimum(pairs[:, 0], pairs[:, 1])
            hi = np.maximum(pairs[:, 0], pairs[:, 1])
            keys = np.unique(lo * np.int64(n) + hi)
            lo, hi = keys // n, keys % n
        else:
            lo = hi = np.empty(0, dtype=np.int64)
        heads = np.concatenate([lo, hi])
        tails = np.concatenate([hi, lo])
        order = np.argsort(heads, kind="stable")
        heads, tails = heads[order], tails[order]
        counts = np.bincount(heads, minlength=n)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        adjacency = [np.sort(tails[offsets[i]:offsets[i + 1]]) for i in range(n)]
        return cls(n, adjacency, _validated=True)

    def edge_array(self) -> np.ndarray:
        """All edges as an (m, 2) array with i < j, lexicographically sorted."""
        if self.m == 0:
            return np.empty((0, 2), dtype=np.int64)
        rows = []
        for i, nbrs in enumerate(self.adjacency):
            upper = nbrs[nbrs > i]
            if upper.size:
                rows.append(np.column_stack([np.full(upper.size, i, dtype=np.int64), upper]))
        return np.concatenate(rows, axis=0)

    def to_csr(self) -> sparse.csr_matrix:
        """Adjacency as a cached scipy CSR matrix of float64."""
        if self._csr is None:
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            for i, nbrs in enumerate(self.adjacency):
                indptr[i + 1] = indptr[i] + len(nbrs)
            indices = (
                np.concatenate(self.adjacency)
                if self.n and indptr[-1]
                else np.empty(0, dtype=np.int64)
            )
            data = np.ones(indptr[-1], dtype=np.float64)
            self._csr = sparse.csr_matrix((data, indices, indptr), shape=(self.n, self.n))
        return self._csr

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    def __repr__(self) -> str:
        return f"SparseGraph(n={self.n}, m={self.m})"


class ProbabilityMatrix:
    """Dense symmetric edge-probability matrix with a zero diagonal."""

    __slots__ = ("entries", "n")

    def __init__(self, entries: np.ndarray, _validated: bool = False):
        entries = np.ascontiguousarray(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError("probability matrix must be square")
        self.entries = entries
        self.n = entries.shape[0]
        if not _validated:
            self._validate()

    def _validate(self) -> None:
        p = self.entries
        if p.size == 0:
            return
        if np.any(np.diag(p) != 0.0):
            raise ValidationError("probability matrix diagonal must be zero")
        if not np.array_equal(p, p.T):
            raise ValidationError("probability matrix must be symmetric")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ValidationError("probabilities must lie in [0, 1]")

    def expected_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def off_diagonal_mean(self) -> float:
        if self.n < 2:
            raise DomainError("off-diagonal mean requires n >= 2")
        return float(self.entries.sum() / (self.n * self.n - self.n))

    def __repr__(self) -> str:
        return f"ProbabilityMatrix(n={self.n})"


def _iter_lines(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rt", encoding="utf-8") as fh:
            yield from fh
    elif isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
    elif hasattr(source, "read"):
        for line in source:
            yield line.decode("utf-8") if isinstance(line, bytes) else line
    else:
        yield from source


def load_edge_list(source) -> SparseGraph:
    """Parse a whitespace-separated edge list into a SparseGraph.

    Dialect: one `i j` pair per line with 0-based integer ids, `#` starts a
    full-line comment, blank lines are skipped, and an optional first
    non-comment line `n <count>` declares the node count (needed to keep
    trailing isolated nodes).  Duplicate and reversed pairs merge silently;
    self-loops are rejected.
    """
    declared_n = None
    edges = []
    max_id = -1
    first_data_line = True
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if first_data_line and tokens[0] == "n":
            if len(tokens) != 2:
                raise ParseError("header must be 'n <count>'", lineno)
            try:
                declared_n = int(tokens[1])
            except ValueError:
                raise ParseError(f"bad node count {tokens[1]!r}", lineno) from None
            if declared_n < 0:
                raise ParseError("declared node count must be nonnegative", lineno)
            first_data_line = False
            continue
        first_data_line = False
        if len(tokens) != 2:
            raise ParseError(f"expected two node ids, got {len(tokens)} tokens", lineno)
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"non-integer node id in {line!r}", lineno) from None
        if i < 0 or j < 0:
            raise ParseError("node ids must be nonnegative", lineno)
        if i == j:
            raise ValidationError(f"line {lineno}: self-loop {i}-{j}")
        if declared_n is not None and (i >= declared_n or j >= declared_n):
            raise RangeError(
                f"line {lineno}: node id {max(i, j)} >= declared n={declared_n}"
            )
        max_id = max(max_id, i, j)
        edges.append((i, j))
    n = declared_n if declared_n is not None else max_id + 1
    return SparseGraph.from_pairs(n, edges)


def write_edge_list(g: SparseGraph, path) -> None:
    """Write a graph in the dialect understood by load_edge_list."""
    with open(path, "wt", encoding="utf-8", newline="\n") as fh:
        fh.write(f"n {g.n}\n")
        for i, j in g.edge_array():
            fh.write(f"{i}\t{j}\n")


def degrees(g: SparseGraph) -> np.ndarray:
    """Observed degree of every node (sums to 2m)."""
    return np.array([len(a) for a in g.adjacency], dtype=np.int64)


def average_density(g: SparseGraph) -> float:
    """Plug-in edge density 2m / (n^2 - n)."""
    if g.n < 2:
        raise DomainError("density needs at least 2 nodes")
    return 2.0 * g.m / (g.n * g.n - g.n)


def sample_adjacency(p: ProbabilityMatrix, seed: int) -> SparseGraph:
    """Draw one Bernoulli realization of the probability matrix.

    Each unordered pair i<j is sampled once and mirrored.  Row i uses its
    own counter-based RNG stream derived from (seed, i), so the output is
    identical regardless of how rows might be partitioned across workers.
    """
    n = p.n
    entries = p.entries
    adjacency = [[] for _ in range(n)]
    for i in range(n - 1):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        u = rng.random(n - i - 1)
        hits = np.nonzero(u < entries[i, i + 1:])[0] + i + 1
        if hits.size:
            adjacency[i].extend(hits.tolist())
            for j in hits:
                adjacency[j].append(i)
    adjacency = [np.array(sorted(a), dtype=np.int64) for a in adjacency]
    return SparseGraph(n, adjacency, _validated=True)


def read_truth_labels(path) -> np.ndarray:
    """Read the ground-truth CSV `node_id,is_core` into a boolean array."""
    rows = {}
    with open(path, "rt", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "node_id,is_core":
            raise ParseError(f"expected header 'node_id,is_core', got {header!r}", 1)
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError("expected two comma-separated fields", lineno)
            try:
                node, flag = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer field in {line!r}", lineno) from None
            if flag not in (0, 1):
                raise ParseError("is_core must be 0 or 1", lineno)
            rows[node] = bool(flag)
    n = max(rows) + 1 if rows else 0
    if set(rows) != set(range(n)):
        raise ValidationError("truth file must cover node ids 0..n-1 exactly")
    labels = np.zeros(n, dtype=bool)
    for node, flag in rows.items():
        labels[node] = flag
    return labels


def write_truth_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype=bool)
    with open(path, "wt", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id,is_core\n")
        for i, flag in enumerate(labels):
            fh.write(f"{i},{int(flag)}\n")
