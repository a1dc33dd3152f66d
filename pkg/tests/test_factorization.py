import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperntf.errors import ConfigError, DataError, DegenerateRankError, InvalidArgumentError
from hyperntf.factorization import (
    FactorModel,
    SolverConfig,
    hosvd,
    hyperntf_solve,
    init_factors,
    kkt_residual,
    normalize_columns,
    ntd_solve,
    ntf_solve,
    objective,
    sample_vectors,
    sweep,
    update_factor,
    update_z,
)
from hyperntf.hypergraph import build_knn_hypergraph, hypergraph_laplacian
from hyperntf.synthetic import cp_tensor
from hyperntf.tensor import cp_reconstruct, rse, tucker_reconstruct


def random_instance(seed, dims=(4, 5, 30), J=3, k=3):
    r = np.random.default_rng(seed)
    x = r.random(dims)
    model = init_factors(dims, J, seed + 1)
    g = build_knn_hypergraph(sample_vectors(x), k)
    return x, model, g


def pairwise_objective(x, model, edges, weights, lam):
    fit = np.sum((x - model.reconstruct()) ** 2)
    pen = 0.0
    z = model.z
    for e, w in zip(edges, weights):
        for i in e:
            for j in e:
                pen += w / len(e) * np.sum((z[i] - z[j]) ** 2)
    return fit + lam * 0.5 * pen


class TestInit:
    def test_deterministic(self):
        a, b = init_factors((3, 4, 5), 2, 9), init_factors((3, 4, 5), 2, 9)
        for u, v in zip(a.all_factors, b.all_factors):
            np.testing.assert_array_equal(u, v)

    def test_positive_and_stochastic(self):
        m = init_factors((3, 4, 5), 2, 0)
        assert all(np.all(f > 0) for f in m.all_factors)
        for u in m.factors:
            np.testing.assert_allclose(u.sum(axis=0), 1, atol=1e-12)

    def test_shapes(self):
        m = init_factors((3, 4, 5), 2, 0)
        assert [f.shape for f in m.all_factors] == [(3, 2), (4, 2), (5, 2)]


class TestObjective:
    def test_exact_is_zero(self):
        m = init_factors((3, 4, 5), 2, 0)
        assert objective(m.reconstruct(), m, None, 0.0) == 0

    def test_constant_rows_zero_penalty(self, rng):
        m = init_factors((3, 4, 10), 2, 0)
        m.z = np.tile([0.5, 2.0], (10, 1))
        x = m.reconstruct()
        g = build_knn_hypergraph(sample_vectors(x) + rng.random((10, 12)), 3)
        assert objective(x, m, g, 4.0) == pytest.approx(0, abs=1e-20)

    def test_matches_pairwise(self):
        for seed in range(10):
            x, m, g = random_instance(seed, dims=(3, 3, 8))
            oracle = pairwise_objective(x, m, g.edges(), g.edge_weights, 4.0)
            assert objective(x, m, g, 4.0) == pytest.approx(oracle, rel=1e-10)
            assert objective(x, m, hypergraph_laplacian(g), 4.0) == pytest.approx(oracle, rel=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            objective(np.ones((3, 4, 6)), init_factors((3, 4, 5), 2, 0), None, 0)


class TestUpdates:
    def test_factor_fixed_point(self):
        m = init_factors((4, 5, 6), 3, 0)
        x = m.reconstruct()
        for n in range(2):
            np.testing.assert_allclose(update_factor(x, m, n), m.factors[n], rtol=1e-12, atol=0)

    def test_factor_nonnegative(self, rng):
        x, m, _ = random_instance(1)
        assert np.all(update_factor(x, m, 0) >= 0)

    def test_factor_descends(self):
        for seed in range(100):
            x, m, g = random_instance(seed)
            before = objective(x, m, g, 4.0)
            m.factors[0] = update_factor(x, m, 0)
            assert objective(x, m, g, 4.0) <= before * (1 + 1e-12)

    def test_z_descends(self):
        for seed in range(100):
            x, m, g = random_instance(seed)
            before = objective(x, m, g, 4.0)
            m.z = update_z(x, m, g, 4.0)
            assert objective(x, m, g, 4.0) <= before * (1 + 1e-12)

    def test_z_fixed_point_lam0(self):
        m = init_factors((4, 5, 6), 3, 0)
        np.testing.assert_allclose(update_z(m.reconstruct(), m, None, 0.0), m.z, rtol=1e-12)

    def test_z_fixed_point_row_constant(self, rng):
        m = init_factors((4, 5, 12), 3, 0)
        m.z = np.tile([0.3, 1.0, 2.0], (12, 1))
        g = build_knn_hypergraph(rng.random((12, 4)), 3)
        np.testing.assert_allclose(update_z(m.reconstruct(), m, g, 4.0), m.z, rtol=1e-12)

    def test_strict_mode_drops_lambda(self):
        x, m, g = random_instance(3)
        strict = update_z(x, m, g, 4.0, unit_hypergraph_coef=True)
        np.testing.assert_allclose(strict, update_z(x, m, g, 1.0), rtol=1e-14)
        assert not np.allclose(strict, update_z(x, m, g, 4.0))

    def test_guard_prevents_nan(self):
        m = init_factors((3, 3, 4), 2, 0)
        m.z[:, 1] = 0
        out = update_factor(np.ones((3, 3, 4)), m, 0)
        assert np.all(np.isfinite(out))


class TestNormalize:
    def test_stochastic_unchanged(self):
        u = np.array([[0.25, 0.5], [0.75, 0.5]])
        v, s = normalize_columns(u)
        np.testing.assert_array_equal(v, u)
        np.testing.assert_array_equal(s, [1, 1])

    def test_scaled(self):
        u = np.array([[0.25, 0.5], [0.75, 0.5]])
        v, s = normalize_columns(3 * u)
        np.testing.assert_allclose(v, u)
        np.testing.assert_allclose(s, [3, 3])

    @given(st.integers(0, 2**32 - 1))
    def test_absorb_keeps_reconstruction(self, seed):
        r = np.random.default_rng(seed)
        f = [r.random((L, 3)) + 0.01 for L in (3, 4, 5)]
        before = cp_reconstruct(f)
        f[1], s = normalize_columns(f[1])
        f[2] = f[2] * s
        np.testing.assert_allclose(cp_reconstruct(f), before, rtol=1e-12)

    def test_zero_column(self):
        with pytest.raises(DegenerateRankError):
            normalize_columns(np.array([[1.0, 0.0], [1.0, 0.0]]))


class TestSweep:
    @pytest.mark.parametrize("lam", [0.0, 4.0])
    def test_fixed_point(self, lam, rng):
        m = init_factors((4, 5, 12), 3, 0)
        if lam:
            m.z = np.tile([0.3, 1.0, 2.0], (12, 1))
        x = m.reconstruct()
        g = build_knn_hypergraph(rng.random((12, 4)), 3) if lam else None
        before = m.copy()
        sweep(x, m, g, lam)
        for a, b in zip(m.all_factors, before.all_factors):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)

    @pytest.mark.parametrize("lam", [0.0, 1.0, 4.0, 64.0])
    def test_monotone_and_stochastic(self, lam):
        x, m, g = random_instance(14, dims=(5, 5, 40), J=4)
        prev = objective(x, m, g, lam)
        for _ in range(60):
            sweep(x, m, g, lam)
            cur = objective(x, m, g, lam)
            assert cur - prev <= 1e-9 * abs(prev)
            prev = cur
            assert all(np.all(f >= 0) for f in m.all_factors)
            for u in m.factors:
                np.testing.assert_allclose(u.sum(axis=0), 1, atol=1e-10)


class TestSolve:
    def test_recovery(self):
        x, _ = cp_tensor(seed=0)
        cfg = SolverConfig(rank=3, max_iter=2000, tol_obj=1e-12, tol_rse=1e-3)
        best = min(ntf_solve(x, SolverConfig(**{**cfg.__dict__, "seed": s}))[1].rse[-1] for s in range(3))
        assert best < 1e-2

    def test_rank1(self, rng):
        x = np.einsum("i,j,k->ijk", rng.random(4) + 0.1, rng.random(5) + 0.1, rng.random(20) + 0.1)
        _, trace = ntf_solve(x, SolverConfig(rank=1, max_iter=500))
        assert trace.rse[-1] < 1e-4
        assert trace.termination == "rse-converged"

    def test_ntf_equals_hyperntf_lam0(self, rng):
        x = rng.random((4, 4, 20))
        cfg = SolverConfig(rank=2, lam=0.0, max_iter=30, seed=3)
        a, ta = ntf_solve(x, cfg)
        b, tb = hyperntf_solve(x, cfg)
        assert ta.objective == tb.objective
        np.testing.assert_array_equal(a.z, b.z)

    def test_deterministic(self, rng):
        x = rng.random((4, 4, 20))
        cfg = SolverConfig(rank=2, lam=4.0, knn=3, max_iter=40, seed=5)
        assert hyperntf_solve(x, cfg)[1].objective == hyperntf_solve(x, cfg)[1].objective

    def test_trace_monotone(self, rng):
        x = rng.random((5, 5, 30))
        _, t = hyperntf_solve(x, SolverConfig(rank=3, lam=4.0, knn=3, max_iter=200, tol_obj=1e-12))
        d = np.diff(t.objective)
        assert np.all(d <= 1e-9 * np.abs(t.objective[:-1]))

    def test_shape_of_z(self, rng):
        m, _ = hyperntf_solve(rng.random((3, 4, 25)), SolverConfig(rank=5, lam=1.0, max_iter=3))
        assert m.z.shape == (25, 5)

    def test_max_iter_reason(self, rng):
        _, t = hyperntf_solve(rng.random((3, 3, 10)), SolverConfig(rank=2, max_iter=3, tol_obj=1e-30))
        assert t.iterations == 3 and t.termination == "max-iter"

    def test_absolute_criterion(self, rng):
        x = 100 * rng.random((3, 3, 10))
        rel = hyperntf_solve(x, SolverConfig(rank=2, tol_obj=1e-3))[1]
        ab = hyperntf_solve(x, SolverConfig(rank=2, tol_obj=1e-3, objective_criterion="absolute"))[1]
        assert ab.iterations > rel.iterations

    def test_kkt_shrinks(self):
        x, _ = cp_tensor(dims=(6, 6, 30), seed=2)
        loose = hyperntf_solve(x, SolverConfig(rank=3, tol_obj=1e-3, tol_rse=1e-12, max_iter=5000))[1]
        tight = hyperntf_solve(x, SolverConfig(rank=3, tol_obj=1e-9, tol_rse=1e-12, max_iter=5000))[1]
        assert tight.kkt_residual < loose.kkt_residual

    def test_kkt_zero_at_exact(self):
        m = init_factors((3, 4, 5), 2, 0)
        assert kkt_residual(m.reconstruct(), m) <= 1e-12

    def test_negative_input(self):
        x = np.ones((3, 3, 5))
        x[0, 1, 2] = -0.5
        with pytest.raises(DataError, match=r"\(0, 1, 2\)"):
            hyperntf_solve(x, SolverConfig(rank=2))

    def test_zero_input(self):
        with pytest.raises(InvalidArgumentError):
            hyperntf_solve(np.zeros((3, 3, 5)), SolverConfig(rank=2))

    def test_degenerate_column_reports_iteration(self):
        x = np.ones((3, 3, 5))
        init = init_factors(x.shape, 2, 0)
        init.z[:, 1] = 0
        with pytest.raises(DegenerateRankError) as info:
            hyperntf_solve(x, SolverConfig(rank=2), init=init)
        assert info.value.column == 1 and info.value.iteration == 1

    @pytest.mark.parametrize(
        "kw", [dict(rank=0), dict(lam=-1.0), dict(knn=0), dict(max_iter=0), dict(tol_obj=0.0),
               dict(weight_scheme="x"), dict(objective_criterion="x")]
    )
    def test_config_validation(self, kw):
        with pytest.raises(ConfigError):
            SolverConfig(**kw)


class TestTucker:
    def test_ntd_nonnegative_and_monotone(self, rng):
        x = rng.random((5, 6, 20))
        model, t = ntd_solve(x, (2, 3, 4), SolverConfig(max_iter=100))
        assert np.all(model.core >= 0) and all(np.all(u >= 0) for u in model.factors)
        d = np.diff(t.objective)
        assert np.all(d <= 1e-9 * np.abs(t.objective[:-1]))
        assert model.embedding.shape == (20, 4)

    def test_ntd_bad_ranks(self, rng):
        with pytest.raises(InvalidArgumentError):
            ntd_solve(rng.random((3, 3, 5)), (4, 2, 2), SolverConfig())

    def test_hosvd_orthonormal(self, rng):
        m = hosvd(rng.random((4, 5, 6)), (2, 3, 4))
        for u in m.factors:
            np.testing.assert_allclose(u.T @ u, np.eye(u.shape[1]), atol=1e-12)

    def test_hosvd_rank1_exact(self, rng):
        x = np.einsum("i,j,k->ijk", rng.random(4), rng.random(5), rng.random(6))
        assert rse(x, hosvd(x, (1, 1, 1)).reconstruct()) <= 1e-10

    def test_hosvd_full_exact(self, rng):
        x = rng.random((3, 4, 5))
        m = hosvd(x, x.shape)
        assert rse(x, tucker_reconstruct(m.core, m.factors)) <= 1e-12


def test_hosvd_rank_above_unfolding_width(rng):
    with pytest.raises(InvalidArgumentError):
        hosvd(rng.random((2, 2, 10)), (2, 2, 5))
