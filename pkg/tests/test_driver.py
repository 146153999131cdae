import math

import numpy as np
import pytest

from otdiag import (
    ConfigError, InitKind, NumericError, RunConfig, Status, align_signs, diagnostics,
    hosvd_factors, initialize, low_rank, reconstruct, run,
)
from otdiag.driver import TraceMode, jacobi_eigh
from otdiag.gradient import lambda_triple
from otdiag.tensor import (
    asymmetry, diag, diag_sq_sum, diagonal_tensor, gen_antisymmetric, gen_diagonalizable,
    gen_paper_T, gen_random, gen_symmetric, matricize, norm, off_norm,
)

from conftest import random_tensor


def check_invariants(a, res):
    norm_a = norm(a)
    assert abs(norm(res.core) - norm_a) <= 1e-12 * norm_a
    assert norm(a - reconstruct(res.core, res.factors)) <= 1e-10 * norm_a
    for q in res.factors:
        assert np.max(np.abs(q.T @ q - np.eye(q.shape[0]))) <= 1e-10
    fs = [r.f for r in res.trace]
    assert res.min_step_gain >= -1e-12 * norm_a ** 2
    assert all(b - a_ >= -1e-12 * norm_a ** 2 for a_, b in zip(fs, fs[1:]))


class TestJacobiEigh:
    def test_against_numpy(self, rng):
        x = rng.standard_normal((6, 9))
        g = x @ x.T
        w, q = jacobi_eigh(g)
        np.testing.assert_allclose(w, np.sort(np.linalg.eigvalsh(g))[::-1], rtol=1e-12)
        np.testing.assert_allclose(q.T @ q, np.eye(6), atol=1e-12)
        off = q.T @ g @ q - np.diag(w)
        assert np.linalg.norm(off) <= 1e-10 * np.linalg.norm(g)
        lead = np.abs(q).argmax(axis=0)
        assert np.all(q[lead, np.arange(6)] > 0)

    def test_no_convergence(self, rng):
        x = rng.standard_normal((8, 8))
        with pytest.raises(NumericError):
            jacobi_eigh(x + x.T, max_sweeps=0)


class TestInitialize:
    def test_identity(self, rng):
        a = random_tensor(rng, 4)
        core, factors = initialize(a)
        assert np.array_equal(core, a)
        assert all(np.array_equal(q, np.eye(4)) for q in factors)

    def test_hosvd_diagonal_tensor(self):
        a = diagonal_tensor([3.0, 2.0, 1.0])
        for q in hosvd_factors(a):
            assert np.array_equal(q, np.eye(3))

    def test_hosvd_random(self, rng):
        a = random_tensor(rng, 6)
        core, factors = initialize(a, InitKind.HOSVD)
        assert abs(norm(core) - norm(a)) <= 1e-13 * norm(a)
        u = factors.u
        np.testing.assert_allclose(u.T @ u, np.eye(6), atol=1e-12)
        x = matricize(a, 1)
        g = u.T @ x @ x.T @ u
        assert np.linalg.norm(g - np.diag(np.diag(g))) <= 1e-10 * np.linalg.norm(g)

    def test_random_precond_reconstructs(self, rng):
        a = random_tensor(rng, 5)
        core, factors = initialize(a, InitKind.RANDOM_PRECOND, 3)
        np.testing.assert_allclose(reconstruct(core, factors), a, atol=1e-13)

    def test_random_precond_breaks_zero_diagonal(self):
        t = gen_paper_T()
        hits = sum(diag_sq_sum(initialize(t, InitKind.RANDOM_PRECOND, s)[0]) > 0
                   for s in range(100))
        assert hits == 100


class TestConfig:
    def test_default_eta(self):
        assert RunConfig().resolved_eta(10) == 0.2

    @pytest.mark.parametrize("kw", [dict(eta=0.0), dict(eta=0.5), dict(tol_grad=0.0),
                                    dict(max_sweeps=0), dict(degenerate_eps=-1.0)])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            RunConfig(**kw).validate(5)

    def test_bad_pairs(self, rng):
        with pytest.raises(ConfigError):
            run(random_tensor(rng, 3), RunConfig(pairs=[(0, 1), (0, 2)]))


class TestRun:
    def test_diagonal_tensor(self):
        a = diagonal_tensor([2.0, -1.0, 0.5, 3.0])
        res = run(a)
        assert res.status is Status.CONVERGED_GRAD and res.sweeps_used == 1
        assert res.n_rotations == 0 and res.off_rel_final == 0.0
        assert np.array_equal(res.core, a)
        assert all(np.array_equal(q, np.eye(4)) for q in res.factors)

    def test_zero_tensor(self):
        res = run(np.zeros((3, 3, 3)))
        assert res.status is Status.CONVERGED_GRAD and res.n_rotations == 0

    def test_diagonalizable(self):
        a = gen_diagonalizable(10, 3)
        res = run(a, RunConfig(eta=1 / 200, trace_every=TraceMode.MICROITERATION))
        assert res.off_rel_final < 1e-6 and res.sweeps_used <= 60
        check_invariants(a, res)

    def test_converged_grad_is_stationary(self):
        a = gen_diagonalizable(8, 1)
        cfg = RunConfig(eta=1 / 160)
        res = run(a, cfg)
        assert res.status is Status.CONVERGED_GRAD
        bound = 2 * cfg.tol_grad * norm(a) ** 2
        assert all(np.max(np.abs(lam)) <= bound for lam in lambda_triple(res.core))

    def test_micro_trace_rows(self, rng):
        a = random_tensor(rng, 4)
        res = run(a, RunConfig(max_sweeps=2, tol_f=1e-300, tol_grad=1e-300,
                               trace_every=TraceMode.MICROITERATION))
        micro = [r for r in res.trace if r.mode is not None]
        ends = [r for r in res.trace if r.mode is None]
        assert len(micro) == 2 * 18 and len(ends) == 2
        assert [r.mode for r in micro[:6]] == [1, 2, 3, 1, 2, 3]
        assert (micro[0].i, micro[0].j) == (0, 1)
        assert all(math.isfinite(r.grad_norm) for r in res.trace)
        assert all(not r.skipped for r in micro if r.angle != 0.0)
        assert res.status is Status.MAX_SWEEPS
        check_invariants(a, res)

    def test_sweep_trace(self, rng):
        res = run(random_tensor(rng, 4), RunConfig(max_sweeps=3, tol_f=1e-300,
                                                   tol_grad=1e-300))
        assert [r.sweep for r in res.trace] == [1, 2, 3]

    def test_skipped_pivots_logged(self, rng):
        res = run(random_tensor(rng, 6), RunConfig(eta=2 / 6, max_sweeps=3,
                                                   trace_every=TraceMode.MICROITERATION))
        assert any(r.skipped for r in res.trace if r.mode is not None)
        assert all(r.angle == 0.0 for r in res.trace if r.skipped)

    def test_all_degenerate_identity(self):
        res = run(gen_antisymmetric(5, 0))
        assert res.status is Status.ALL_DEGENERATE and res.recommend_precond
        assert res.sweeps_used == 1 and res.n_rotations == 0

    def test_paper_T_hosvd_degenerate(self):
        res = run(gen_paper_T(), RunConfig(init=InitKind.HOSVD))
        assert res.status is Status.ALL_DEGENERATE

    def test_paper_T_precond(self):
        res = run(gen_paper_T(), RunConfig(eta=1 / 6000, init=InitKind.RANDOM_PRECOND,
                                           precond_seed=3, max_sweeps=2000))
        assert res.f_final == pytest.approx(64 / 27, abs=1e-6)
        assert np.sort(np.abs(diag(res.core))) == pytest.approx([8 / 9] * 3, abs=1e-4)

    @pytest.mark.parametrize("ordering", ["row", "col", "row-rev", "col-rev", "diag"])
    def test_orderings(self, ordering):
        a = gen_diagonalizable(6, 9)
        assert run(a, RunConfig(eta=1 / 120, ordering=ordering)).off_rel_final < 1e-6

    def test_custom_pairs(self):
        a = gen_diagonalizable(4, 2)
        pairs = [(2, 3), (0, 3), (1, 2), (0, 1), (1, 3), (0, 2)]
        assert run(a, RunConfig(pairs=pairs, eta=0.01)).off_rel_final < 1e-6

    def test_frobenius_pivot_norm(self):
        a = gen_diagonalizable(6, 5)
        res = run(a, RunConfig(eta=1 / 120, norm_kind="frobenius"))
        assert res.off_rel_final < 1e-6

    def test_off_rel_consistent(self, rng):
        a = random_tensor(rng, 5)
        res = run(a, RunConfig(max_sweeps=20))
        assert res.off_rel_final == pytest.approx(off_norm(res.core) / norm(a), rel=1e-15)
        assert res.f_final == pytest.approx(diag_sq_sum(res.core), rel=1e-15)


class TestAlignSigns:
    def test_preserves_decomposition(self, rng):
        a = random_tensor(rng, 5)
        res = run(a, RunConfig(max_sweeps=5, align_signs=False))
        core, factors = align_signs(res.core, res.factors)
        np.testing.assert_allclose(reconstruct(core, factors), a, atol=1e-12)
        assert diag_sq_sum(core) == pytest.approx(res.f_final, rel=1e-15)
        assert np.all(np.sum(factors.u * factors.v, axis=0) >= 0)
        assert np.all(np.sum(factors.u * factors.w, axis=0) >= 0)

    def test_sign_flipped_copies_become_equal(self, rng):
        q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
        flips = np.array([1.0, -1.0, -1.0, 1.0])
        core = random_tensor(rng, 4)
        _, factors = align_signs(core, (q, q * flips, q))
        assert np.array_equal(factors.v, q)

    def test_symmetric_input(self):
        a = gen_symmetric(6, 2)
        res = run(a, RunConfig(eta=1 / 12000, max_sweeps=2000))
        assert asymmetry(res.core) < 1e-3 * norm(a)


class TestLowRank:
    def test_full_rank_diagonalized(self):
        a = gen_diagonalizable(6, 0)
        res = run(a, RunConfig(eta=1 / 120, tol_grad=1e-13))
        assert res.status is Status.CONVERGED_GRAD
        _, err = low_rank(res, 6, a)
        assert err <= 1e-10 * norm(a)

    def test_full_rank_equals_off(self, rng):
        a = random_tensor(rng, 5)
        res = run(a, RunConfig(max_sweeps=30))
        _, err = low_rank(res, 5, a)
        assert err == pytest.approx(off_norm(res.core), rel=1e-10)

    def test_dense_oracle(self):
        d = np.array([10.0, -8.0, 0.3, 0.2, -0.1, 0.05, 0.02, 0.01])
        rng = np.random.default_rng(0)
        qs = [np.linalg.qr(rng.standard_normal((8, 8)))[0] for _ in range(3)]
        a = reconstruct(diagonal_tensor(d), qs)
        res = run(a, RunConfig(eta=1 / 160))
        approx, err = low_rank(res, 2, a)
        dense = np.einsum("l,il,jl,kl->ijk", d[:2], qs[0][:, :2], qs[1][:, :2], qs[2][:, :2])
        np.testing.assert_allclose(approx, dense, atol=1e-8)
        assert err == pytest.approx(norm(a - approx), rel=1e-12)

    @pytest.mark.parametrize("r", [0, 5, 1.5])
    def test_rank_range(self, rng, r):
        res = run(random_tensor(rng, 4), RunConfig(max_sweeps=2))
        with pytest.raises(ValueError):
            low_rank(res, r)


def test_diagnostics(rng):
    a = random_tensor(rng, 4)
    res = run(a, RunConfig(max_sweeps=10))
    d = diagnostics(a, res)
    assert d.n == 4 and d.residual <= 1e-10 * norm(a)
    assert max(d.orthogonality) <= 1e-10
    assert d.off_rel == pytest.approx(res.off_rel_final, rel=1e-15)
    assert set(d.as_dict()) >= {"asymmetry", "factor_distances", "grad_norms"}
