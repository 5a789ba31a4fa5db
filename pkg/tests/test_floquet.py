import cmath
import math

import numpy as np
import pytest

from tsfloquet.errors import ResonantSystem
from tsfloquet.floquet import decompose, find_exponent, monodromy
from tsfloquet.hilger import scalar_exp
from tsfloquet.matpow import matrix_log
from tsfloquet.shifts import multiplicative_shifts
from tsfloquet.timescale import q_scale_window, sample_points
from tsfloquet.transition import (
    MatrixFunction,
    VectorFunction,
    transition_matrix,
)


@pytest.fixture
def q2_dec(diag_inv_t, q2_window, q2_shifts):
    return decompose(diag_inv_t, q2_window, q2_shifts)


@pytest.fixture
def union_dec(diag_inv_t, union_window, union_shifts):
    return decompose(diag_inv_t, union_window, union_shifts)


@pytest.fixture
def cosine_dec(cosine_system, cosine_window, cosine_shifts):
    return decompose(cosine_system, cosine_window, cosine_shifts)


class TestMonodromy:
    def test_q_scale_diagonal(self, diag_inv_t, q2_window, q2_shifts):
        M, mults = monodromy(diag_inv_t, q2_window, q2_shifts)
        assert np.allclose(M, 2.0 * np.eye(2))
        assert np.allclose(sorted(mults.real), [2.0, 2.0])

    def test_cosine_system_is_trivial(self, cosine_dec):
        assert np.allclose(cosine_dec.monodromy, np.eye(2), atol=1e-9)
        assert np.allclose(np.sort(np.abs(cosine_dec.multipliers)), [1.0, 1.0],
                           atol=1e-9)

    def test_zero_system(self, q2_window, q2_shifts):
        A = MatrixFunction.constant(np.zeros((2, 2)))
        M, _ = monodromy(A, q2_window, q2_shifts)
        assert np.allclose(M, np.eye(2))

    def test_unique_across_fundamental_matrices(self, q2_dec, diag_inv_t, q2_window):
        # Psi(t) = Phi(t, t0) C for random invertible C gives the same period map
        rng = np.random.default_rng(1)
        t1 = q2_dec.period_end
        for _ in range(5):
            C = rng.normal(size=(2, 2))
            while abs(np.linalg.det(C)) < 0.1:
                C = rng.normal(size=(2, 2))
            psi_t1 = transition_matrix(diag_inv_t, q2_window, t1, 1.0) @ C
            psi_t0 = C
            M = psi_t1 @ np.linalg.inv(psi_t0)
            assert np.allclose(M, q2_dec.monodromy, rtol=1e-9)


class TestExponentTransition:
    def test_identity_at_start(self, q2_dec):
        assert np.allclose(q2_dec.exponent_transition(1.0), np.eye(2))

    def test_one_period_recovers_monodromy(self, q2_dec, union_dec, cosine_dec):
        for dec in (q2_dec, union_dec, cosine_dec):
            got = dec.exponent_transition(dec.period_end)
            assert np.max(np.abs(got - dec.monodromy)) < 1e-9

    def test_q_scale_whole_periods(self, q2_dec):
        assert np.allclose(q2_dec.exponent_transition(8.0), 8.0 * np.eye(2))

    def test_union_scale_partial_period(self, union_dec):
        expected = 3.0 ** (3.75 / 3.0) * np.eye(2)
        assert np.allclose(union_dec.exponent_transition(4.0), expected, atol=1e-6)

    def test_union_closed_form_off_anchor(self, union_dec):
        for t in (1.5, 5.0, 10.0):
            m = union_dec.clock.steps(t)
            r = (3.0 * m - 3.0 ** m / t) / 3.0
            assert np.allclose(union_dec.exponent_transition(t),
                               3.0 ** r * np.eye(2), rtol=1e-9)

    def test_shift_invariance(self, union_dec):
        # value depends only on the clock reading, which one period advances by T
        for t in (1.5, 2.0, 4.0):
            a = union_dec.exponent_transition(t)
            b = union_dec.exponent_transition(union_dec.shifts.forward(3.0, t))
            assert np.allclose(b, union_dec.monodromy @ a, rtol=1e-9)

    def test_discrete_update_identity(self, q2_dec, q2_window):
        for t in (1.0, 2.0, 4.0):
            mu = q2_window.mu(t)
            lhs = q2_dec.exponent_transition(q2_window.sigma(t))
            rhs = (np.eye(2) + mu * q2_dec.exponent_matrix(t)) @ \
                q2_dec.exponent_transition(t)
            assert np.allclose(lhs, rhs, rtol=1e-10)


class TestExponentMatrix:
    def test_q_scale_reproduces_coefficients(self, q2_dec):
        for t in (1.0, 2.0, 4.0, 8.0):
            assert np.allclose(q2_dec.exponent_matrix(t), np.eye(2) / t, atol=1e-9)

    def test_trivial_monodromy_gives_zero(self, cosine_dec):
        for t in (1.0, 2.5, 16.0):
            assert np.allclose(cosine_dec.exponent_matrix(t), 0.0, atol=1e-9)

    def test_union_dense_branch_is_log_multiple(self, union_dec):
        logM = matrix_log(union_dec.spectral)
        for t in (1.3, 4.5, 11.0):
            R = union_dec.exponent_matrix(t)
            expected = (union_dec.clock.rate(t) / 3.0) * logM
            assert np.allclose(R, expected, atol=1e-10)

    def test_union_dense_branch_at_unit_clock_rate(self, union_dec):
        # where the clock runs at unit speed the coefficient is Log(M)/T itself
        t_star = math.sqrt(3.0)
        assert union_dec.clock.rate(t_star) == pytest.approx(1.0, rel=1e-12)
        assert np.allclose(union_dec.exponent_matrix(t_star),
                           matrix_log(union_dec.spectral) / 3.0, atol=1e-8)

    def test_dense_branch_against_difference_quotient(self, union_dec):
        # independent check: differentiate the exponent factor numerically
        for t in (1.4, 4.7):
            h = 1e-6
            E = union_dec.exponent_transition
            dE = (E(t + h) - E(t - h)) / (2 * h)
            R = dE @ np.linalg.inv(E(t))
            assert np.allclose(R, union_dec.exponent_matrix(t), atol=1e-6)


class TestLyapunovFactor:
    def test_q_scale_identity(self, q2_dec):
        for t in (1.0, 2.0, 4.0, 8.0):
            assert np.allclose(q2_dec.lyapunov(t), np.eye(2), atol=1e-9)

    def test_cosine_system_keeps_full_transition(self, cosine_dec):
        pts = sample_points(cosine_dec.window, 1.0, 64.0, 20)
        cosine_dec.transition_many(pts)
        for t in pts:
            assert np.allclose(cosine_dec.lyapunov(t), cosine_dec.transition(t),
                               atol=1e-8)

    def test_union_closed_form(self, union_dec):
        for t in (2.0, 4.0, 9.0):
            expected = t * np.linalg.inv(
                union_dec.exponent_transition(t)) @ np.eye(2)
            assert np.allclose(union_dec.lyapunov(t), expected, rtol=1e-9)

    def test_periodic_in_shifts(self, union_dec):
        for t in (1.0, 1.5, 2.0, 4.0, 6.0):
            a = union_dec.lyapunov(t)
            b = union_dec.lyapunov(union_dec.shifts.forward(3.0, t))
            assert np.max(np.abs(a - b)) < 1e-8

    def test_invertible_with_bounded_determinant(self, union_dec):
        pts = sample_points(union_dec.window, 1.0, 54.0, 24)
        union_dec.transition_many(pts)
        dets = [abs(np.linalg.det(union_dec.lyapunov(t))) for t in pts]
        assert min(dets) > 1e-3
        norms = [np.linalg.norm(union_dec.lyapunov(t), 2) for t in pts]
        assert max(norms) < 1e3


class TestExponents:
    def test_trivial_multiplier(self, q2_shifts, q2_window):
        exp = find_exponent(q2_shifts, q2_window, 1.0)
        assert exp.base == pytest.approx(0.0, abs=1e-12)

    def test_single_point_inversion(self, q2_shifts, q2_window):
        exp = find_exponent(q2_shifts, q2_window, 2.0)
        assert exp.base == pytest.approx(1.0)

    def test_classical_logarithm_on_reals(self):
        from tsfloquet.shifts import additive_shifts
        from tsfloquet.timescale import real_window

        ts = real_window(0.0, 10.0)
        sys = additive_shifts(3.0)
        lam = math.exp(2.0 * 3.0)
        exp = find_exponent(sys, ts, lam)
        assert exp.base == pytest.approx(2.0, rel=1e-10)

    def test_period_identity_holds_for_all_branches(self, q2_dec, q2_window):
        t1 = q2_dec.period_end
        for lam in q2_dec.spectral.eigenvalues:
            for k in range(-2, 3):
                exp = find_exponent(q2_dec.shifts, q2_window, lam, k=k)
                val = scalar_exp(lambda t: exp.at_mu(q2_window.mu(t)),
                                 q2_window, t1, 1.0)
                assert abs(val - lam) < 1e-9

    def test_branches_on_hybrid_scale(self, union_dec, union_window):
        t1 = union_dec.period_end
        lam = union_dec.spectral.eigenvalues[0]
        for k in (-2, -1, 1, 2):
            exp = find_exponent(union_dec.shifts, union_window, lam, k=k)
            val = scalar_exp(lambda t: exp.at_mu(union_window.mu(t)),
                             union_window, t1, 1.0)
            assert abs(val - lam) < 1e-9

    def test_complex_multiplier(self, q2_shifts, q2_window):
        lam = cmath.exp(1j * 2.0) * 1.5
        exp = find_exponent(q2_shifts, q2_window, lam)
        val = 1.0 + q2_window.mu(1.0) * exp.base  # single scattered point in [1, 2)
        assert abs(val - lam) < 1e-10


class TestSpectralMapping:
    def test_eigenvalues_of_exponent_factor(self, union_dec):
        for t in (2.0, 4.0, 9.0, 30.0):
            target = np.sort_complex(np.linalg.eigvals(union_dec.exponent_transition(t)))
            r = union_dec.clock.value(t) / 3.0
            predicted = np.sort_complex(np.repeat(
                np.exp(r * union_dec.spectral.logs), union_dec.spectral.multiplicities))
            assert np.allclose(target, predicted, rtol=1e-9)

    def test_paths_match_exponent_matrix_spectrum(self, union_dec):
        for t in (1.3, 2.0, 4.0, 9.5):
            vals, mults = union_dec.eigenvalue_paths(t)
            expected = np.sort_complex(np.repeat(vals, mults))
            actual = np.sort_complex(np.linalg.eigvals(union_dec.exponent_matrix(t)))
            assert np.max(np.abs(expected - actual)) < 1e-7

    def test_path_exponential_recovers_factor_spectrum(self, q2_dec, q2_window):
        # integrate the eigenvalue path independently with the scalar engine
        lam = q2_dec.spectral.eigenvalues[0]

        def path(t):
            vals, _ = q2_dec.eigenvalue_paths(t)
            return vals[0]

        for t in (2.0, 4.0, 8.0):
            via_path = scalar_exp(path, q2_window, t, 1.0)
            direct = lam ** (q2_dec.clock.value(t) / 2.0)
            assert abs(via_path - direct) < 1e-9 * max(1.0, abs(direct))


class TestPeriodicSolutions:
    def test_cosine_system_has_one(self, cosine_dec, cosine_system, cosine_window):
        sol = cosine_dec.periodic_solution(tol=1e-8)
        assert sol["exists"]
        x0 = sol["x0"]
        for t in (1.0, 2.0, 3.5, 8.0):
            xa = transition_matrix(cosine_system, cosine_window, 4.0 * t, 1.0) @ x0
            xb = transition_matrix(cosine_system, cosine_window, t, 1.0) @ x0
            assert np.max(np.abs(xa - xb)) < 1e-8

    def test_expanding_system_has_none(self, q2_dec):
        assert q2_dec.periodic_solution()["exists"] is False

    def test_zero_system_every_state_periodic(self, q2_window, q2_shifts):
        A = MatrixFunction.constant(np.zeros((2, 2)))
        dec = decompose(A, q2_window, q2_shifts)
        assert dec.periodic_solution()["exists"]

    def test_forced_fixed_point_q_scale(self, q2_dec, diag_inv_t, q2_window):
        F = VectorFunction.from_exprs(["1/t", "1/t"])
        x0 = q2_dec.forced_periodic_state(F)
        assert np.allclose(x0, [-1.0, -1.0], atol=1e-10)
        from tsfloquet.transition import variation_of_constants

        back = variation_of_constants(diag_inv_t, F, q2_window, 2.0, 1.0, x0)
        assert np.max(np.abs(back - x0)) < 1e-10

    def test_forced_zero_forcing(self, q2_dec):
        F = VectorFunction.from_exprs(["0", "0"])
        assert np.allclose(q2_dec.forced_periodic_state(F), 0.0, atol=1e-12)

    def test_resonance_detected(self, cosine_dec):
        F = VectorFunction.from_exprs(["1/t", "1/t"])
        with pytest.raises(ResonantSystem):
            cosine_dec.forced_periodic_state(F)


class TestBlochSolutions:
    def test_q_scale_ray(self, q2_dec):
        x = q2_dec.bloch_solution(2.0, np.array([1.0, 0.0]))
        for t in (1.0, 2.0, 4.0, 8.0):
            assert np.allclose(x(t), [t, 0.0], atol=1e-9)
            if 2.0 * t <= 16.0:
                assert np.max(np.abs(x(2.0 * t) - 2.0 * x(t))) < 1e-8

    def test_multiplier_one_gives_shift_periodicity(self, cosine_dec):
        x = cosine_dec.bloch_solution(1.0)
        for t in (1.0, 3.0, 7.0):
            assert np.max(np.abs(x(4.0 * t) - x(t))) < 1e-8

    def test_linearity_in_the_eigenvector(self, q2_dec):
        u = np.array([0.3, 0.0])
        x1 = q2_dec.bloch_solution(2.0, np.array([1.0, 0.0]))
        xc = q2_dec.bloch_solution(2.0, u)
        for t in (2.0, 8.0):
            assert np.allclose(xc(t), 0.3 * x1(t), rtol=1e-10)

    def test_distinct_multipliers_independent(self, q2_window, q2_shifts):
        A = MatrixFunction.from_exprs([["1/t", "0"], ["0", "2/t"]])
        dec = decompose(A, q2_window, q2_shifts)
        lams = np.sort(dec.spectral.eigenvalues.real)
        assert lams == pytest.approx([2.0, 3.0])
        x1 = dec.bloch_solution(2.0)
        x2 = dec.bloch_solution(3.0)
        basis = np.column_stack([x1(1.0), x2(1.0)])
        assert np.linalg.matrix_rank(basis, tol=1e-8) == 2
        for t, lam, x in ((2.0, 2.0, x1), (4.0, 3.0, x2)):
            assert np.max(np.abs(x(2.0 * t) - lam * x(t))) < 1e-8


class TestChangeOfVariables:
    def test_rotated_state_follows_exponent_matrix(self, union_dec):
        x0 = np.array([1.0, -0.5])
        pts = [1.0, 1.5, 2.0, 4.0, 6.0]
        union_dec.transition_many([t for t in pts] + [3.0, 9.0])
        for t in (2.0, 6.0):
            info = union_dec.window.jump_info(t)
            z_t = np.linalg.inv(union_dec.lyapunov(t)) @ union_dec.transition(t) @ x0
            sig = info.sigma
            z_s = np.linalg.inv(union_dec.lyapunov(sig)) @ union_dec.transition(sig) @ x0
            lhs = (z_s - z_t) / info.mu
            rhs = union_dec.exponent_matrix(t) @ z_t
            assert np.max(np.abs(lhs - rhs)) < 1e-8


class TestResidualSuite:
    def _random_diag_system(self, rng):
        c = rng.uniform(-0.45, 3.0, size=2)
        rows = [[f"({float(c[0])!r})/t", "0"], ["0", f"({float(c[1])!r})/t"]]
        return MatrixFunction.from_exprs(rows)

    def test_twenty_random_delta_periodic_diagonal_systems(self):
        rng = np.random.default_rng(99)
        ts = q_scale_window(2.0, 1.0, 64.0)
        sys = multiplicative_shifts(2.0)
        pts = [1.0, 2.0, 4.0, 8.0, 16.0]
        for _ in range(20):
            A = self._random_diag_system(rng)
            dec = decompose(A, ts, sys)
            res = dec.residuals(pts)
            assert res["decomposition"] < 1e-8
            assert res["lyapunov_periodicity"] < 1e-8
            # spectral mapping at every sample
            for t in pts:
                vals, mults = dec.eigenvalue_paths(t)
                expected = np.sort_complex(np.repeat(vals, mults))
                actual = np.sort_complex(np.linalg.eigvals(dec.exponent_matrix(t)))
                assert np.max(np.abs(expected - actual)) < 1e-7
            # one-period exponent identity for the principal branch
            t1 = dec.period_end
            for lam, exp in zip(dec.spectral.eigenvalues, dec.exponents()):
                val = scalar_exp(lambda t: exp.at_mu(ts.mu(t)), ts, t1, 1.0)
                assert abs(val - lam) < 1e-9 * max(1.0, abs(lam))
