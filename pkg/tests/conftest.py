"""Shared helpers: independent brute-force oracles and small generators.

The oracles here deliberately avoid the library's fast paths (Gram trick,
bucket peeling, trapezoid AUC) so the tests compare two genuinely
different routes to the same quantity.
"""

import numpy as np

from corex.graph import ProbabilityMatrix, SparseGraph, sample_adjacency


def centering_matrix(n: int) -> np.ndarray:
    return np.eye(n) - np.ones((n, n)) / n


def dense_er_scores(u: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Brute force: materialize the low-rank estimate and center its rows."""
    n = u.shape[0]
    p_hat = (u * lam[np.newaxis, :]) @ u.T
    return np.linalg.norm(p_hat @ centering_matrix(n), axis=1)


def dense_config_scores(u: np.ndarray, lam: np.ndarray, deg: np.ndarray) -> np.ndarray:
    """Brute force with explicit inverse-degree column scaling (zero-degree
    columns dropped, matching the library's exclusion rule)."""
    n = u.shape[0]
    p_hat = (u * lam[np.newaxis, :]) @ u.T
    inv = np.zeros_like(deg, dtype=np.float64)
    inv[deg > 0] = 1.0 / deg[deg > 0]
    scores = np.linalg.norm((p_hat * inv[np.newaxis, :]) @ centering_matrix(n), axis=1)
    scores[deg == 0] = 0.0
    return scores


def random_orthonormal(n: int, r: int, rng) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q


def random_graph(n: int, p: float, seed: int) -> SparseGraph:
    entries = np.full((n, n), p)
    np.fill_diagonal(entries, 0.0)
    return sample_adjacency(ProbabilityMatrix(entries), seed)


def mann_whitney_auc(values, truth) -> float:
    """Pairwise AUC with half credit for ties, by explicit double loop."""
    values = np.asarray(values, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    pos = values[truth]
    neg = values[~truth]
    total = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (pos.size * neg.size)


def brute_force_coreness(g: SparseGraph) -> np.ndarray:
    """Core numbers by literally re-running k-core deletion for every k."""
    n = g.n
    core = np.zeros(n, dtype=np.int64)
    k = 1
    while True:
        alive = np.ones(n, dtype=bool)
        changed = True
        while changed:
            changed = False
            for v in range(n):
                if alive[v]:
                    live_deg = int(np.sum(alive[g.adjacency[v]]))
                    if live_deg < k:
                        alive[v] = False
                        changed = True
        if not alive.any():
            return core
        core[alive] = k
        k += 1
