import numpy as np
import pytest

from sdpcluster import (
    MixtureSpec,
    Partition,
    SolverConfig,
    brute_force_kmeans,
    build_affinity,
    construct_alpha,
    construct_lambda,
    cutoff_threshold,
    dual_gap,
    kmeans_objective,
    lambda_uniqueness_bound,
    lambda_window,
    partition_to_membership,
    place_centers,
    sample_dataset,
    solve_regularized,
    solve_sdp,
    verify_certificate,
)

FAST = SolverConfig(max_iters=5000)
TIGHT = SolverConfig(max_iters=20000, tol_primal=1e-9, tol_obj=1e-12)


def noiseless(K, size, p, delta2, seed=0):
    cs = place_centers("orthogonal", K, p, delta2)
    spec = MixtureSpec(n=K * size, sizes=(size,) * K, sigma2=1e-30, seed=seed)
    return sample_dataset(cs, spec)


class TestBuildAffinity:
    def test_identity(self):
        assert np.array_equal(build_affinity(np.eye(2)), np.eye(2))

    def test_identical_columns(self):
        v = np.array([1.0, 2.0])
        X = np.column_stack([v, v, v])
        assert np.allclose(build_affinity(X), (v @ v) * np.ones((3, 3)))

    def test_dot_product_oracle(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((3, 4))
        A = build_affinity(X)
        for i in range(4):
            for j in range(4):
                assert abs(A[i, j] - X[:, i] @ X[:, j]) < 1e-12

    def test_single_column_rejected(self):
        with pytest.raises(ValueError):
            build_affinity(np.ones((3, 1)))


class TestSolveSdp:
    def test_noiseless_recovers_block_structure(self):
        data = noiseless(2, 5, 4, delta2=4.0)
        res = solve_sdp(build_affinity(data.X), 2, FAST)
        Zs = partition_to_membership(data.truth)
        assert res.status == "converged"
        assert np.linalg.norm(res.Z_hat - Zs) / np.linalg.norm(Zs) < 1e-6

    def test_identity_affinity_full_k(self):
        n = 6
        res = solve_sdp(np.eye(n), n, FAST)
        assert res.objective == pytest.approx(n, abs=1e-5)
        assert np.allclose(res.Z_hat, np.eye(n), atol=1e-5)

    def test_relaxation_dominates_enumeration(self):
        rng = np.random.default_rng(1)
        for seed in range(5):
            n, K, p = 8, 2, 5
            dbar2 = cutoff_threshold(n, K, p, 1.0)
            cs = place_centers("orthogonal", K, p, 3 * dbar2)
            data = sample_dataset(
                cs, MixtureSpec(n=n, sizes=(4, 4), sigma2=1.0, seed=seed)
            )
            A = build_affinity(data.X)
            res = solve_sdp(A, K, TIGHT)
            best = brute_force_kmeans(data.X, K)
            assert res.objective >= kmeans_objective(best, data.X) - 1e-6

    def test_cvxpy_oracle_small_instances(self):
        cp = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(2)
        for trial in range(3):
            n, K = 10, 2
            X = rng.standard_normal((3, n)) + 3.0 * np.outer(
                np.ones(3), rng.integers(0, 2, size=n)
            )
            A = build_affinity(X)
            Z = cp.Variable((n, n), symmetric=True)
            constraints = [
                Z >> 0,
                cp.trace(Z) == K,
                cp.sum(Z, axis=1) == 1,
                Z >= 0,
            ]
            prob = cp.Problem(cp.Maximize(cp.trace(A @ Z)), constraints)
            prob.solve(solver=cp.SCS, eps=1e-8)
            res = solve_sdp(A, K, FAST)
            assert res.objective == pytest.approx(prob.value, rel=1e-5, abs=1e-4)
            assert np.linalg.norm(res.Z_hat - Z.value) < 1e-3 * (1 + np.linalg.norm(Z.value))

    def test_warm_start_at_optimum_is_fixed_point(self):
        data = noiseless(2, 6, 4, delta2=5.0)
        Zs = partition_to_membership(data.truth)
        cfg = SolverConfig(max_iters=1)
        res = solve_sdp(build_affinity(data.X), 2, cfg, z0=Zs)
        assert np.linalg.norm(res.Z_hat - Zs) < 1e-10

    def test_permutation_equivariance(self):
        data = noiseless(2, 4, 3, delta2=4.0, seed=5)
        A = build_affinity(data.X)
        n = A.shape[0]
        rng = np.random.default_rng(3)
        perm = rng.permutation(n)
        P = np.zeros((n, n))
        P[np.arange(n), perm] = 1.0
        res = solve_sdp(A, 2, FAST)
        res_p = solve_sdp(P @ A @ P.T, 2, FAST)
        assert res_p.iters == res.iters
        assert np.linalg.norm(res_p.Z_hat - P @ res.Z_hat @ P.T) < 1e-6

    def test_residuals_recomputed_from_zhat(self):
        data = noiseless(2, 4, 3, delta2=4.0)
        res = solve_sdp(build_affinity(data.X), 2, FAST)
        assert res.residuals.rowsum_max_err < 1e-12
        assert res.residuals.min_entry >= 0.0
        assert res.residuals.trace_err < 1e-8

    def test_weak_duality_against_certificate(self):
        data = noiseless(2, 10, 6, delta2=4.0)
        m = 10.0
        lam = construct_lambda(0.0, 6, m, 4.0, 0.5)
        report = verify_certificate(data.X, data.truth, lam)
        assert report.passed
        A = build_affinity(data.X)
        alpha = construct_alpha(A, data.truth, lam)
        dual_obj = lam * 2 + alpha.sum()
        res = solve_sdp(A, 2, FAST)
        assert res.objective <= dual_obj + 1e-6 * (1 + abs(dual_obj))

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            solve_sdp(np.eye(3), 1)
        with pytest.raises(ValueError):
            solve_sdp(np.eye(3), 4)

    def test_trace_csv_written(self, tmp_path):
        data = noiseless(2, 5, 4, delta2=4.0)
        path = tmp_path / "trace.csv"
        solve_sdp(build_affinity(data.X), 2, FAST, trace_path=str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "iter,objective,primal_residual,min_eig"
        assert len(lines) >= 2
        first = lines[1].split(",")
        assert int(first[0]) == 50


class TestSolveRegularized:
    def test_huge_penalty_drives_trace_down(self):
        data = noiseless(2, 5, 4, delta2=4.0)
        A = build_affinity(data.X)
        lam_huge = 1e6 * (1 + float(np.max(np.abs(np.linalg.eigvalsh(A)))))
        res = solve_regularized(A, lam_huge, FAST)
        assert res.trace <= 2.0 + 1e-6

    def test_achieved_trace_monotone_in_penalty(self):
        data = noiseless(2, 5, 4, delta2=4.0)
        A = build_affinity(data.X)
        traces = [solve_regularized(A, lam, FAST).trace for lam in (0.0, 5.0, 50.0, 5e3)]
        assert all(b <= a + 1e-6 for a, b in zip(traces, traces[1:]))

    def test_window_midpoint_matches_constrained_solution(self):
        data = noiseless(2, 10, 6, delta2=4.0)
        A = build_affinity(data.X)
        win = lambda_window(20, 2, 6, 0.0, 10.0, 4.0, beta=0.5, delta=1.0)
        assert win["lo"] <= win["hi"]
        lam = 0.5 * (win["lo"] + win["hi"])
        res = solve_regularized(A, lam, TIGHT)
        Zs = partition_to_membership(data.truth)
        assert np.linalg.norm(res.Z_hat - Zs) / np.linalg.norm(Zs) < 1e-5
        assert res.trace == pytest.approx(2.0, abs=1e-4)

    def test_zero_penalty_inflates_trace(self):
        data = noiseless(2, 5, 4, delta2=4.0)
        A = build_affinity(data.X)
        res = solve_regularized(A, 0.0, FAST)
        assert res.trace > 2.0

    def test_negative_penalty_rejected(self):
        with pytest.raises(ValueError):
            solve_regularized(np.eye(4), -1.0)


class TestLambdaWindow:
    def test_upper_endpoint_by_hand(self):
        win = lambda_window(100, 2, 10, 1.0, 50.0, 40.0, beta=0.5, delta=1.0)
        assert win["hi"] == pytest.approx(10.0 + 0.125 * 50 * 40)

    def test_beta_to_zero_empties_window(self):
        win = lambda_window(100, 2, 10, 1.0, 50.0, 40.0, beta=1e-9, delta=1.0)
        assert win["hi"] == pytest.approx(10.0, rel=1e-6)
        assert win["lo"] > win["hi"]

    def test_separation_doubles_upper_gap(self):
        w1 = lambda_window(100, 2, 10, 1.0, 50.0, 40.0, beta=0.5, delta=1.0)
        w2 = lambda_window(100, 2, 10, 1.0, 50.0, 80.0, beta=0.5, delta=1.0)
        assert (w2["hi"] - 10.0) == pytest.approx(2 * (w1["hi"] - 10.0))

    def test_bad_beta(self):
        with pytest.raises(ValueError):
            lambda_window(100, 2, 10, 1.0, 50.0, 40.0, beta=1.5, delta=1.0)


class TestLambdaUniquenessBound:
    def test_noiseless_equal_clusters(self):
        s, delta2 = 6, 4.0
        data = noiseless(2, s, 5, delta2)
        bound = lambda_uniqueness_bound(data.X, data.truth)
        assert bound == pytest.approx(s / 2 * delta2, rel=1e-9)

    def test_midpoint_gives_nonpositive_bound(self):
        # cluster means are 0 and 3; the last point of cluster 2 sits at
        # their midpoint 1.5, so the inner minimum vanishes
        X = np.array([[-1.0, 1.0, 3.5, 4.0, 1.5]])
        part = Partition(labels=[1, 1, 2, 2, 2], K=2)
        bound = lambda_uniqueness_bound(X, part)
        assert bound <= 0.0 + 1e-12

    def test_translation_invariance(self):
        rng = np.random.default_rng(4)
        data = noiseless(3, 4, 5, 3.0, seed=1)
        X = data.X + rng.standard_normal(data.X.shape) * 0.3
        base = lambda_uniqueness_bound(X, data.truth)
        shifted = lambda_uniqueness_bound(X + rng.standard_normal((5, 1)), data.truth)
        assert shifted == pytest.approx(base, rel=1e-9)


class TestDualGap:
    def test_two_route_arithmetic(self):
        rng = np.random.default_rng(5)
        data = noiseless(2, 4, 3, 4.0, seed=2)
        X = data.X + 0.1 * rng.standard_normal(data.X.shape)
        A = build_affinity(X)
        Zs = partition_to_membership(data.truth)
        lam = 3.7
        alpha = construct_alpha(A, data.truth, lam)
        gap = dual_gap(A, Zs, lam, alpha, B=np.zeros_like(A))
        # second route: trace form with W assembled from the same pieces
        n = A.shape[0]
        ones = np.ones(n)
        W = lam * np.eye(n) + 0.5 * (np.outer(ones, alpha) + np.outer(alpha, ones)) - A
        assert gap == pytest.approx(float(np.tensordot(W, Zs)), abs=1e-10)

    def test_affinity_scaling(self):
        data = noiseless(2, 4, 3, 4.0, seed=3)
        A = build_affinity(data.X)
        Zs = partition_to_membership(data.truth)
        assert float(np.tensordot(3.0 * A, Zs)) == pytest.approx(
            3.0 * float(np.tensordot(A, Zs))
        )

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            dual_gap(np.eye(3), np.eye(2), 1.0, np.ones(3))
        with pytest.raises(ValueError):
            dual_gap(np.eye(3), np.eye(3), 1.0, np.ones(2))
