import math

import numpy as np
import pytest

from sdpcluster import (
    CenterSet,
    DegenerateDrawError,
    MixtureSpec,
    comparison_bounds,
    cutoff_threshold,
    load_dataset,
    min_separation,
    pairwise_harmonic_min,
    place_centers,
    sample_dataset,
    save_dataset,
)


def pairwise_sq(C):
    """Oracle: recompute every pairwise squared distance directly."""
    K = C.shape[1]
    return [
        float(((C[:, a] - C[:, b]) ** 2).sum())
        for a in range(K)
        for b in range(a + 1, K)
    ]


class TestPlaceCenters:
    def test_orthogonal_k2_unit_basis(self):
        cs = place_centers("orthogonal", 2, 2, 2.0)
        assert np.allclose(np.abs(cs.centers), np.eye(2))
        assert math.isclose(min_separation(cs), 2.0)

    def test_orthogonal_k3_scaled_basis(self):
        cs = place_centers("orthogonal", 3, 3, 8.0)
        assert np.allclose(cs.centers, 2.0 * np.eye(3))
        assert all(math.isclose(d, 8.0) for d in pairwise_sq(cs.centers))

    def test_random_sphere_hits_min_separation(self):
        cs = place_centers("random_sphere", 4, 10, 5.0, seed=7)
        dists = pairwise_sq(cs.centers)
        assert min(dists) == pytest.approx(5.0, rel=1e-10)

    @pytest.mark.parametrize("K,p", [(3, 2), (4, 3), (5, 9)])
    def test_simplex_all_distances_equal(self, K, p):
        cs = place_centers("simplex", K, p, 3.5)
        for d in pairwise_sq(cs.centers):
            assert d == pytest.approx(3.5, rel=1e-10)

    def test_dimension_guards(self):
        with pytest.raises(ValueError):
            place_centers("orthogonal", 3, 2, 1.0)
        with pytest.raises(ValueError):
            place_centers("simplex", 4, 2, 1.0)
        with pytest.raises(ValueError):
            place_centers("orthogonal", 2, 2, 0.0)
        with pytest.raises(ValueError):
            place_centers("nonsense", 2, 2, 1.0)

    def test_degenerate_draw_impossible_in_zero_dim_pairs(self):
        # p=1 with K=2 gives antipodal or coincident unit "directions";
        # coincident draws must eventually raise
        with pytest.raises(DegenerateDrawError):
            # force coincidence: 1-d directions are +-1, K=3 must repeat a
            # direction, giving a zero pairwise distance every attempt
            place_centers("random_sphere", 3, 1, 1.0, seed=0)


class TestSampleDataset:
    def test_noiseless_limit_matches_centers(self):
        cs = place_centers("orthogonal", 2, 4, 9.0)
        data = sample_dataset(cs, MixtureSpec(n=6, sizes=(3, 3), sigma2=1e-30, seed=3))
        mu = cs.centers[:, data.truth.labels - 1]
        assert np.max(np.abs(data.X - mu)) < 1e-12

    def test_cluster_means_converge_in_noiseless_limit(self):
        cs = place_centers("orthogonal", 2, 3, 4.0)
        data = sample_dataset(cs, MixtureSpec(n=4, sizes=(2, 2), sigma2=1e-30, seed=11))
        for k, idx in enumerate(data.truth.cluster_indices()):
            assert np.allclose(data.X[:, idx].mean(axis=1), cs.centers[:, k])

    def test_residual_variance_law_of_large_numbers(self):
        # oracle: empirical per-coordinate variance of the injected noise
        cs = place_centers("orthogonal", 2, 50, 4.0)
        data = sample_dataset(
            cs, MixtureSpec(n=1000, sizes=(500, 500), sigma2=1.0, seed=5)
        )
        resid = data.X - cs.centers[:, data.truth.labels - 1]
        assert resid.var(axis=1).mean() == pytest.approx(1.0, rel=0.05)

    def test_determinism_bitwise(self):
        cs = place_centers("orthogonal", 3, 5, 4.0)
        spec = MixtureSpec(n=9, sizes=(3, 3, 3), sigma2=0.5, seed=42)
        a = sample_dataset(cs, spec)
        b = sample_dataset(cs, spec)
        assert a.X.tobytes() == b.X.tobytes()

    def test_k_mismatch_rejected(self):
        cs = place_centers("orthogonal", 2, 3, 1.0)
        with pytest.raises(ValueError):
            sample_dataset(cs, MixtureSpec(n=3, sizes=(1, 1, 1), sigma2=1.0, seed=0))

    def test_size_sum_mismatch_rejected(self):
        with pytest.raises(ValueError):
            MixtureSpec(n=5, sizes=(2, 2), sigma2=1.0, seed=0)


class TestMinSeparation:
    def test_three_four_five(self):
        cs = CenterSet(np.array([[0.0, 3.0], [0.0, 4.0]]))
        assert min_separation(cs) == pytest.approx(25.0)

    def test_min_over_pairs(self):
        C = np.zeros((2, 3))
        C[:, 1] = [1.0, 0.0]
        C[:, 2] = [0.0, 10.0]
        assert min_separation(CenterSet(C)) == pytest.approx(1.0)

    @pytest.mark.parametrize("delta2", [0.5, 2.0, 7.25])
    def test_matches_placement_target(self, delta2):
        cs = place_centers("orthogonal", 4, 6, delta2)
        assert min_separation(cs) == pytest.approx(delta2, rel=1e-12)

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(0)
        cs = place_centers("random_sphere", 4, 7, 3.0, seed=1)
        base = min_separation(cs)
        for _ in range(5):
            Q, _ = np.linalg.qr(rng.standard_normal((7, 7)))
            shift = rng.standard_normal((7, 1))
            moved = CenterSet(Q @ cs.centers + shift)
            assert min_separation(moved) == pytest.approx(base, rel=1e-9)


class TestPairwiseHarmonicMin:
    def test_equal_sizes(self):
        assert pairwise_harmonic_min([50, 50]) == pytest.approx(50.0)

    def test_two_sizes(self):
        assert pairwise_harmonic_min([10, 40]) == pytest.approx(16.0)

    def test_three_sizes_enumerated(self):
        # oracle: the three pair values are 8, 160/17, 32; min is 8
        assert pairwise_harmonic_min([5, 20, 80]) == pytest.approx(8.0)

    def test_harmonic_mean_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            sizes = rng.integers(1, 200, size=rng.integers(2, 6)).tolist()
            m = pairwise_harmonic_min(sizes)
            assert m <= 2 * min(sizes)
            assert m >= min(sizes)


class TestCutoffThreshold:
    def test_frozen_value(self):
        # independent evaluation, frozen: 4*log(100)*(1+sqrt(1+200/(100*log 100)))
        assert cutoff_threshold(100, 2, 100, 1.0) == pytest.approx(
            40.481662703562336, rel=1e-12
        )

    def test_small_p_limit(self):
        n = 10**6
        ratio = cutoff_threshold(n, 2, 1, 1.0) / (8.0 * math.log(n))
        assert 1.0 <= ratio <= 1.001

    def test_k2_matches_symmetric_two_component_form(self):
        # with K=2 the value is exactly 4x the symmetric two-component
        # threshold sigma2*(1+sqrt(1+2p/(n log n)))*log n
        for n, p in [(50, 5), (200, 80), (1000, 1000)]:
            expected = 4.0 * (
                (1 + math.sqrt(1 + 2 * p / (n * math.log(n)))) * math.log(n)
            )
            assert cutoff_threshold(n, 2, p, 1.0) == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_p_and_K_and_linear_in_sigma2(self):
        base = [cutoff_threshold(100, 2, p, 1.0) for p in range(1, 25)]
        assert all(b > a for a, b in zip(base, base[1:]))
        byk = [cutoff_threshold(100, K, 10, 1.0) for K in range(2, 24)]
        assert all(b > a for a, b in zip(byk, byk[1:]))
        assert cutoff_threshold(100, 2, 10, 3.0) == pytest.approx(
            3.0 * cutoff_threshold(100, 2, 10, 1.0)
        )

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            cutoff_threshold(1, 2, 10, 1.0)
        with pytest.raises(ValueError):
            cutoff_threshold(0, 2, 10, 1.0)


class TestComparisonBounds:
    def test_frozen_values(self):
        out = comparison_bounds(100, 2, 10, 1.0, 50)
        assert out["lu_zhou"] == pytest.approx(4.0)
        assert out["giraud_verzelen"] == pytest.approx(4.6051701859880918, rel=1e-12)

    def test_sigma2_scaling(self):
        a = comparison_bounds(100, 2, 10, 1.0, 50)
        b = comparison_bounds(100, 2, 10, 2.0, 50)
        assert b["lu_zhou"] == pytest.approx(2 * a["lu_zhou"])
        assert b["giraud_verzelen"] == pytest.approx(2 * a["giraud_verzelen"])


class TestDatasetIO:
    def test_round_trip(self, tmp_path):
        cs = place_centers("orthogonal", 2, 3, 4.0)
        data = sample_dataset(cs, MixtureSpec(n=6, sizes=(3, 3), sigma2=0.7, seed=9))
        dpath, lpath = tmp_path / "data.txt", tmp_path / "labels.txt"
        save_dataset(dpath, lpath, data)
        X, n, p, K, sigma2 = load_dataset(dpath)
        assert (n, p, K) == (6, 3, 2)
        assert sigma2 == 0.7
        assert np.array_equal(X, data.X)  # 17 significant digits round-trip
        labels = [int(v) for v in lpath.read_text().split()]
        assert labels == list(data.truth.labels)

    def test_header_format(self, tmp_path):
        cs = place_centers("orthogonal", 2, 2, 4.0)
        data = sample_dataset(cs, MixtureSpec(n=4, sizes=(2, 2), sigma2=1.0, seed=0))
        dpath = tmp_path / "data.txt"
        save_dataset(dpath, tmp_path / "labels.txt", data)
        assert dpath.read_text().splitlines()[0] == "4 2 2 1"
