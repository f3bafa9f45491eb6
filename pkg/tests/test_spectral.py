import numpy as np
import pytest

from conftest import (dense_config_scores, dense_er_scores, random_graph,
                      random_orthonormal)
from corex.errors import DomainError
from corex.graph import ProbabilityMatrix, SparseGraph, degrees, load_edge_list
from corex.spectral import (CoreScores, SpectralDecomposition, config_scores,
                            diagnostics, er_scores, scores_from_truth,
                            truncated_eigs)


def dense_reference_eigs(matrix: np.ndarray, r: int):
    """Oracle: full dense eigendecomposition, magnitude-truncated."""
    vals, vecs = np.linalg.eigh(matrix)
    order = np.argsort(-np.abs(vals), kind="stable")
    return vals[order[:r]], vecs[:, order[:r]]


class TestTruncatedEigs:
    def test_complete_graph_k3(self):
        g = load_edge_list(["0 1", "1 2", "0 2"])
        dec = truncated_eigs(g, 2, seed=0)
        assert dec.eigenvalues[0] == pytest.approx(2.0, abs=1e-9)
        assert dec.eigenvalues[1] == pytest.approx(-1.0, abs=1e-9)
        gram = dec.eigenvectors.T @ dec.eigenvectors
        assert np.max(np.abs(gram - np.eye(2))) < 1e-8

    def test_single_edge(self):
        g = load_edge_list(["0 1"])
        dec = truncated_eigs(g, 1, seed=0)
        assert dec.eigenvalues[0] == pytest.approx(1.0, abs=1e-10)
        v = dec.eigenvectors[:, 0]
        assert np.allclose(np.abs(v), 1 / np.sqrt(2), atol=1e-8)

    def test_against_dense_solver(self):
        g = random_graph(50, 0.3, seed=9)
        dec = truncated_eigs(g, 5, seed=1)
        ref_vals, ref_vecs = dense_reference_eigs(g.to_dense(), 5)
        scale = max(1.0, abs(ref_vals[0]))
        assert np.max(np.abs(dec.eigenvalues - ref_vals)) <= 1e-8 * scale
        # principal angle between the spanned subspaces
        sigma = np.linalg.svd(ref_vecs.T @ dec.eigenvectors, compute_uv=False)
        assert np.arccos(np.clip(sigma.min(), -1, 1)) <= 1e-6

    def test_residuals_meet_tolerance(self):
        g = random_graph(80, 0.2, seed=3)
        tol = 1e-8
        dec = truncated_eigs(g, 4, tol=tol, seed=5)
        a = g.to_dense()
        for k in range(4):
            u = dec.eigenvectors[:, k]
            resid = np.linalg.norm(a @ u - dec.eigenvalues[k] * u)
            assert resid <= tol * max(1.0, abs(dec.eigenvalues[0]))

    def test_rank_domain_error(self):
        g = load_edge_list(["0 1"])
        with pytest.raises(DomainError):
            truncated_eigs(g, 2)

    def test_empty_graph_zero_spectrum(self):
        g = SparseGraph.from_pairs(5, [])
        dec = truncated_eigs(g, 2, seed=0)
        assert np.all(dec.eigenvalues == 0.0)

    def test_deterministic(self):
        g = random_graph(40, 0.25, seed=2)
        d1 = truncated_eigs(g, 3, seed=17)
        d2 = truncated_eigs(g, 3, seed=17)
        assert np.array_equal(d1.eigenvalues, d2.eigenvalues)
        assert np.array_equal(d1.eigenvectors, d2.eigenvectors)

    def test_signed_ordering_switch(self):
        # path 0-1, 1-2: spectrum {sqrt2, 0, -sqrt2}; signed keeps {sqrt2, 0}
        g = load_edge_list(["0 1", "1 2"])
        mag = truncated_eigs(g, 2, seed=0)
        signed = truncated_eigs(g, 2, seed=0, ordering="signed")
        assert sorted(np.round(mag.eigenvalues, 6)) == [-np.round(np.sqrt(2), 6),
                                                        np.round(np.sqrt(2), 6)]
        assert signed.eigenvalues[0] == pytest.approx(np.sqrt(2), abs=1e-8)
        assert signed.eigenvalues[1] == pytest.approx(0.0, abs=1e-8)


def full_rank_decomposition(p: ProbabilityMatrix) -> SpectralDecomposition:
    vals, vecs = np.linalg.eigh(p.entries)
    order = np.argsort(-np.abs(vals), kind="stable")
    return SpectralDecomposition(p.n, vals[order], vecs[:, order], p.n)


class TestErScores:
    def test_pure_er_constant(self):
        n, prob = 20, 0.35
        entries = np.full((n, n), prob)
        np.fill_diagonal(entries, 0.0)
        dec = full_rank_decomposition(ProbabilityMatrix(entries))
        values = er_scores(dec).values
        expected = prob * np.sqrt((n - 1) / n)
        assert np.allclose(values, expected, rtol=1e-10)

    def test_two_block_matches_brute_force(self):
        entries = np.zeros((6, 6))
        entries[:3, :3] = 0.7
        entries[3:, 3:] = 0.2
        entries[:3, 3:] = 0.1
        entries[3:, :3] = 0.1
        np.fill_diagonal(entries, 0.0)
        dec = full_rank_decomposition(ProbabilityMatrix(entries))
        values = er_scores(dec).values
        oracle = dense_er_scores(dec.eigenvectors, dec.eigenvalues)
        assert np.max(np.abs(values - oracle) / oracle) <= 1e-10

    def test_zero_spectrum_gives_zero_scores(self):
        dec = SpectralDecomposition(2, np.zeros(2), np.eye(5)[:, :2], 5)
        assert np.all(er_scores(dec).values == 0.0)

    def test_gram_matches_brute_force_random(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n = int(rng.integers(10, 200))
            r = int(rng.integers(1, 11))
            u = random_orthonormal(n, r, rng)
            lam = rng.standard_normal(r) * 10
            dec = SpectralDecomposition(r, *_magnitude_sort(lam, u), n)
            values = er_scores(dec).values
            oracle = dense_er_scores(dec.eigenvectors, dec.eigenvalues)
            denom = np.maximum(np.abs(oracle), 1e-30)
            assert np.max(np.abs(values - oracle) / denom) <= 1e-10

    def test_scale_equivariance(self):
        rng = np.random.default_rng(4)
        u = random_orthonormal(30, 3, rng)
        lam = np.array([5.0, -2.0, 1.0])
        base = er_scores(SpectralDecomposition(3, lam, u, 30)).values
        scaled = er_scores(SpectralDecomposition(3, 2.5 * lam, u, 30)).values
        assert np.allclose(scaled, 2.5 * base, rtol=1e-12)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(8)
        u = random_orthonormal(25, 4, rng)
        lam = np.array([6.0, -4.0, 2.0, 1.0])
        base = er_scores(SpectralDecomposition(4, lam, u, 25)).values
        perm = rng.permutation(25)
        permuted = er_scores(SpectralDecomposition(4, lam, u[perm], 25)).values
        assert np.allclose(permuted, base[perm], rtol=1e-12)


def _magnitude_sort(lam, u):
    order = np.argsort(-np.abs(lam), kind="stable")
    return lam[order], u[:, order]


class TestConfigScores:
    def test_parameter_configuration_closed_form(self):
        # diagonal-included convention: entries theta_i theta_j / sum(theta),
        # degree correction by the parameter vector itself
        rng = np.random.default_rng(12)
        n = 30
        theta = 1.0 + rng.random(n) * 3.0
        total = theta.sum()
        entries = np.outer(theta, theta) / (total * 2.0)  # keep entries < 1
        np.fill_diagonal(entries, 0.0)
        dec = full_rank_decomposition(ProbabilityMatrix(entries))
        values = config_scores(dec, theta).values
        expected = np.sqrt((n - 1) / n) * theta / (total * 2.0)
        assert np.max(np.abs(values - expected) / expected) <= 1e-10

    def test_heterogeneous_matches_brute_force(self):
        entries = np.zeros((6, 6))
        entries[:3, :3] = 0.6
        entries[3:, 3:] = 0.15
        entries[:3, 3:] = 0.3
        entries[3:, :3] = 0.3
        np.fill_diagonal(entries, 0.0)
        p = ProbabilityMatrix(entries)
        dec = full_rank_decomposition(p)
        deg = p.expected_degrees()
        values = config_scores(dec, deg).values
        oracle = dense_config_scores(dec.eigenvectors, dec.eigenvalues, deg)
        assert np.max(np.abs(values - oracle) / oracle) <= 1e-10

    def test_regular_graph_reduces_to_er(self):
        g = load_edge_list(["0 1", "1 2", "2 3", "3 0"])  # 2-regular cycle
        dec = truncated_eigs(g, 2, seed=0)
        er = er_scores(dec).values
        cfg = config_scores(dec, degrees(g)).values
        assert np.allclose(cfg, er / 2.0, rtol=1e-10)

    def test_zero_degree_exclusion(self):
        g = load_edge_list(["n 4", "0 1", "1 2"])  # node 3 isolated
        dec = truncated_eigs(g, 2, seed=0)
        scores = config_scores(dec, degrees(g))
        assert scores.excluded == (3,)
        assert scores.values[3] == 0.0

    def test_gram_matches_brute_force_random(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            n = int(rng.integers(10, 200))
            r = int(rng.integers(1, 11))
            u = random_orthonormal(n, r, rng)
            lam = rng.standard_normal(r) * 5
            deg = rng.integers(1, 20, size=n).astype(np.float64)
            dec = SpectralDecomposition(r, *_magnitude_sort(lam, u), n)
            values = config_scores(dec, deg).values
            oracle = dense_config_scores(dec.eigenvectors, dec.eigenvalues, deg)
            denom = np.maximum(np.abs(oracle), 1e-30)
            assert np.max(np.abs(values - oracle) / denom) <= 1e-10


class TestScoresFromTruth:
    def test_pure_er(self):
        n, prob = 100, 0.1
        entries = np.full((n, n), prob)
        np.fill_diagonal(entries, 0.0)
        values = scores_from_truth(ProbabilityMatrix(entries), "er").values
        assert np.allclose(values, 0.1 * np.sqrt(99 / 100), rtol=1e-12)

    def test_one_hot_row(self):
        n = 10
        entries = np.full((n, n), 0.1)
        entries[0, :] = 0.9
        entries[:, 0] = 0.9
        np.fill_diagonal(entries, 0.0)
        p = ProbabilityMatrix(entries)
        values = scores_from_truth(p, "er").values
        # hand-checked dense formula
        h = np.eye(n) - np.ones((n, n)) / n
        oracle = np.linalg.norm(p.entries @ h, axis=1)
        assert np.allclose(values, oracle, rtol=1e-12)

    def test_regular_configuration_closed_form(self):
        # zero-diagonal regular configuration model: the lemma constant is
        # d_i over the sum of the other degrees, exactly
        for n, d in ((10, 3.0), (100, 12.0)):
            c = d / (n - 1)
            entries = np.full((n, n), c)
            np.fill_diagonal(entries, 0.0)
            values = scores_from_truth(ProbabilityMatrix(entries), "config").values
            expected = np.sqrt((n - 1) / n) * d / ((n - 1) * d)
            assert np.max(np.abs(values - expected)) <= 1e-10

    def test_config_zero_degree_error(self):
        entries = np.zeros((4, 4))
        entries[0, 1] = entries[1, 0] = 0.5
        with pytest.raises(DomainError):
            scores_from_truth(ProbabilityMatrix(entries), "config")


class TestDiagnostics:
    def test_pure_er_fields(self):
        n, prob = 30, 0.2
        entries = np.full((n, n), prob)
        np.fill_diagonal(entries, 0.0)
        report = diagnostics(ProbabilityMatrix(entries), r=1,
                             core_labels=np.zeros(n, dtype=bool))
        assert report.p_star == prob
        assert report.h_n is None and report.h_prime_n is None

    def test_h_scaling_two_block(self):
        # planted two-block model: h(n) tracks p* sqrt(n)
        ratios = []
        for n in (100, 200, 400):
            p_star = 0.2
            entries = np.full((n, n), p_star * 0.3)
            half = n // 2
            entries[:half, :half] = p_star
            np.fill_diagonal(entries, 0.0)
            labels = np.zeros(n, dtype=bool)
            labels[:half] = True
            report = diagnostics(ProbabilityMatrix(entries), r=2, core_labels=labels)
            ratios.append(report.h_n / (p_star * np.sqrt(n)))
        ratios = np.asarray(ratios)
        assert np.max(ratios) / np.min(ratios) < 1.2

    def test_low_rank_gap(self):
        rng = np.random.default_rng(2)
        u = random_orthonormal(40, 3, rng)
        lam = np.array([8.0, 5.0, 3.0])
        raw = (u * lam) @ u.T
        raw = raw - np.diag(np.diag(raw))
        raw = np.clip((raw - raw.min()) / max(raw.max() - raw.min(), 1), 0, 1)
        np.fill_diagonal(raw, 0.0)
        sym = (raw + raw.T) / 2
        # direct low-rank example instead: rank-3 block-constant matrix
        entries = np.zeros((30, 30))
        for k, v in enumerate((0.6, 0.4, 0.2)):
            entries[10 * k:10 * (k + 1), 10 * k:10 * (k + 1)] = v
        np.fill_diagonal(entries, 0.0)
        report = diagnostics(ProbabilityMatrix(entries), r=3)
        # the zero-diagonal perturbs exact low-rankness by the block values
        assert abs(report.eigenvalues[5]) <= 0.6 + 1e-9
        # an exactly low-rank matrix (diagonal kept) has lambda_4 == 0
        vals = np.linalg.eigvalsh(entries + np.diag([0.6] * 10 + [0.4] * 10 + [0.2] * 10))
        mags = np.sort(np.abs(vals))[::-1]
        assert mags[3] <= 1e-10
