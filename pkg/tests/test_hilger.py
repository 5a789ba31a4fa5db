import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsfloquet.errors import OmegaOutOfStrip, RegressivityViolation
from tsfloquet.hilger import (
    circle_minus,
    circle_neg,
    circle_plus,
    hilger_imaginary,
    hilger_real,
    in_hilger_circle,
    scalar_exp,
    uniformly_regressive,
)
from tsfloquet.timescale import real_window


class TestScalarExp:
    def test_zero_coefficient(self, q2_window):
        assert scalar_exp(lambda t: 0.0, q2_window, 8.0, 1.0) == pytest.approx(1.0)

    def test_equal_arguments(self, q2_window):
        assert scalar_exp(lambda t: 1.0 / t, q2_window, 4.0, 4.0) == 1.0

    def test_q_scale_product_form(self, q2_window):
        # prod over {1,2} of (1 + (q-1) s / s) = 2 * 2
        assert scalar_exp(lambda t: 1.0 / t, q2_window, 4.0, 1.0) == pytest.approx(4.0)

    def test_classical_exponential(self):
        ts = real_window(0.0, 2.0)
        assert scalar_exp(lambda t: 2.0, ts, 1.0, 0.0) == pytest.approx(math.exp(2.0))

    def test_semigroup(self, union_window):
        p = lambda t: 1.0 / t
        a = scalar_exp(p, union_window, 9.0, 3.0) * scalar_exp(p, union_window, 3.0, 1.0)
        b = scalar_exp(p, union_window, 9.0, 1.0)
        assert a == pytest.approx(b, rel=1e-9)

    def test_reciprocal_law(self, q2_window):
        p = lambda t: 1.0 / t
        mu = lambda t: q2_window.mu(t)
        pm = lambda t: circle_neg(p(t), mu(t))
        prod = scalar_exp(p, q2_window, 8.0, 1.0) * scalar_exp(pm, q2_window, 8.0, 1.0)
        assert prod == pytest.approx(1.0, rel=1e-10)

    def test_backward_argument_inverts(self, q2_window):
        p = lambda t: 1.0 / t
        assert scalar_exp(p, q2_window, 1.0, 4.0) == pytest.approx(0.25)

    def test_jump_identity(self, union_window):
        p = lambda t: math.sin(t) / t
        t = 2.0  # scattered with mu = 1
        lhs = scalar_exp(p, union_window, union_window.sigma(t), 1.0)
        rhs = (1.0 + union_window.mu(t) * p(t)) * scalar_exp(p, union_window, t, 1.0)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_positive_for_positively_regressive(self, union_window):
        p = lambda t: 1.0 / t
        for t in (2.0, 4.0, 9.0, 30.0):
            v = scalar_exp(p, union_window, t, 1.0)
            assert abs(v.imag) < 1e-12 and v.real > 0

    def test_regressivity_violation(self, q2_window):
        # 1 + mu(1) p(1) = 0 at the first point
        with pytest.raises(RegressivityViolation):
            scalar_exp(lambda t: -1.0 / t, q2_window, 4.0, 1.0)

    def test_negative_factor_flagged(self, q2_window):
        flags = []
        v = scalar_exp(lambda t: -2.0 / t, q2_window, 2.0, 1.0, flags=flags)
        assert v == pytest.approx(-1.0)
        assert flags


class TestCircleOps:
    def test_dense_limit_is_plain_addition(self):
        assert circle_plus(3.0, 4.0, 0.0) == 7.0

    def test_unit_graininess(self):
        assert circle_plus(1.0, 1.0, 1.0) == 3.0
        assert circle_neg(1.0, 1.0) == -0.5

    def test_minus_cancels(self):
        a, b, mu = 0.7, -0.2, 0.5
        assert circle_minus(circle_plus(a, b, mu), b, mu) == pytest.approx(a)

    def test_neg_requires_regressive(self):
        with pytest.raises(RegressivityViolation):
            circle_neg(-1.0, 1.0)

    @given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
           st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
           st.floats(min_value=0.0, max_value=2.0))
    @settings(max_examples=150, deadline=None)
    def test_group_laws_hold_where_regressive(self, a, b, mu):
        if abs(1 + mu * a) < 1e-3 or abs(1 + mu * b) < 1e-3:
            return
        s = circle_plus(a, b, mu)
        assert circle_plus(a, b, mu) == pytest.approx(circle_plus(b, a, mu))
        assert circle_minus(s, b, mu) == pytest.approx(a, rel=1e-9, abs=1e-9)
        assert circle_neg(circle_neg(a, mu), mu) == pytest.approx(a, rel=1e-9, abs=1e-9)


class TestHilgerPlane:
    def test_real_part_dense_limit(self):
        assert hilger_real(3 + 4j, 0.0) == 3.0

    def test_real_part_matches_reciprocal_coefficient(self):
        # on the q-scale with mu = (q-1) t the coefficient 1/t has adapted
        # real part 1/t again
        q = 2.0
        for t in (1.0, 2.0, 4.0):
            mu = (q - 1) * t
            assert hilger_real(1.0 / t, mu) == pytest.approx(1.0 / t)

    def test_real_part_unit_graininess(self):
        assert hilger_real(1.0, 1.0) == pytest.approx(1.0)

    def test_circle_membership_definition_unfolds(self):
        for z in (0.5j - 0.4, -0.2, 1.0 + 0.1j, -1.9):
            for mu in (0.25, 1.0, 3.0):
                assert in_hilger_circle(z, mu) == (abs(1 + mu * z) < 1.0)

    def test_imaginary_dense_limit(self):
        assert hilger_imaginary(5.0, 0.0) == 5j

    def test_imaginary_unit_graininess_at_pi(self):
        assert hilger_imaginary(math.pi, 1.0) == pytest.approx(-2.0)

    def test_strip_enforcement(self):
        with pytest.raises(OmegaOutOfStrip):
            hilger_imaginary(4.0, 1.0)
        # pointwise evaluation outside the strip is available on request
        v = hilger_imaginary(4.0, 1.0, strict=False)
        assert v == pytest.approx(cmath.exp(4j) - 1.0)

    def test_uniform_regressivity(self):
        assert uniformly_regressive(-0.25, 1.0, 0.5)
        assert not uniformly_regressive(-0.75, 1.0, 0.5)
        with pytest.raises(ValueError):
            uniformly_regressive(1.0, 1.0, 0.0)
