import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esa.energy import (
    CausalExpansion,
    EnergyFactor,
    ExponentialKernel,
    causal_inverse,
    factor_energy,
    kinetic_beta,
)
from esa.errors import DegenerateEnergyError, UnsupportedMultiplicityError
from esa.spectral import Domain, EnergyPolynomial

U = np.linspace(-math.pi, math.pi, 257)
# two-decimal coefficients: denormal leading terms are outside the supported range
COEF = st.integers(-300, 300).map(lambda k: k / 100)


def kinetic(alpha, domain=Domain.CIRCLE):
    return EnergyPolynomial.kinetic(alpha, domain)


class TestKineticBeta:
    @pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 2.0, 10.0])
    def test_identity(self, alpha):
        b = kinetic_beta(alpha)
        assert abs((b - 1 / b) - math.sqrt(1 + 4 * alpha**2) / alpha**2) < 1e-12

    def test_golden(self):
        assert kinetic_beta(1.0) == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-14)

    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_root_of_quadratic(self, alpha):
        b = kinetic_beta(alpha)
        assert b > 1
        # alpha^2 (b - 1)^2 = b
        assert alpha**2 * (b - 1) ** 2 == pytest.approx(b, rel=1e-10)


class TestFactorCircle:
    def test_kinetic_alpha_one(self):
        lam = factor_energy(kinetic(1.0), Domain.CIRCLE)
        assert lam.degree == 1
        assert lam.roots[0] == pytest.approx(2.6180340, abs=1e-7)
        assert lam.scale == pytest.approx(1 / math.sqrt(lam.roots[0].real), abs=1e-7)
        assert lam.scale == pytest.approx(0.6180340, abs=1e-7)

    def test_zero_energy(self):
        lam = factor_energy(EnergyPolynomial.zero(), Domain.CIRCLE)
        assert lam.roots == () and lam.scale == 1.0

    def test_modulus_examples(self):
        lam = factor_energy(kinetic(1.0), Domain.CIRCLE)
        assert abs(lam(0.0)) ** 2 == pytest.approx(1.0, abs=1e-12)
        assert abs(lam(math.pi)) ** 2 == pytest.approx(5.0, abs=1e-12)

    @given(
        st.lists(
            st.tuples(COEF, COEF).map(lambda t: complex(*t)),
            min_size=1,
            max_size=5,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_modulus_identity_and_root_side(self, coeffs):
        ell = EnergyPolynomial(tuple(coeffs))
        try:
            lam = factor_energy(ell, Domain.CIRCLE)
        except (DegenerateEnergyError, UnsupportedMultiplicityError):
            return
        want = 1 + np.abs(ell.symbol(U, Domain.CIRCLE)) ** 2
        np.testing.assert_allclose(np.abs(lam(U)) ** 2, want, rtol=1e-9)
        assert all(abs(b) > 1 for b in lam.roots)
        assert lam.scale > 0

    def test_json_round_trip(self):
        lam = factor_energy(EnergyPolynomial((1.0, -2.0, 0.5j)), Domain.CIRCLE)
        back = EnergyFactor.from_json(lam.to_json())
        np.testing.assert_allclose(back(U), lam(U), rtol=1e-15)


class TestFactorLine:
    def test_kinetic(self):
        lam = factor_energy(kinetic(1.0, Domain.LINE), Domain.LINE)
        assert lam.scale == pytest.approx(1.0)
        assert lam.roots[0] == pytest.approx(1j)
        np.testing.assert_allclose(lam(U), 1 + 1j * U, atol=1e-14)

    def test_modulus_example(self):
        lam = factor_energy(kinetic(2.0, Domain.LINE), Domain.LINE)
        assert abs(lam(1.0)) ** 2 == pytest.approx(5.0)

    @given(st.lists(COEF, min_size=2, max_size=4))
    @settings(max_examples=40, deadline=None)
    def test_identity_and_upper_half_plane(self, coeffs):
        ell = EnergyPolynomial(tuple(coeffs))
        if ell.degree == 0:
            return
        try:
            lam = factor_energy(ell, Domain.LINE)
        except (DegenerateEnergyError, UnsupportedMultiplicityError):
            return
        u = np.linspace(-5, 5, 101)
        want = 1 + np.abs(ell.symbol(u, Domain.LINE)) ** 2
        np.testing.assert_allclose(np.abs(lam(u)) ** 2, want, rtol=1e-8)
        assert all(b.imag > 0 for b in lam.roots)


class TestCausalInverse:
    def test_kinetic_circle(self):
        lam = factor_energy(kinetic(1.0), Domain.CIRCLE)
        nu = causal_inverse(lam)
        assert isinstance(nu, CausalExpansion)
        assert nu.coeffs[0].real == pytest.approx(-0.618034, abs=1e-6)
        assert nu.coeffs[1].real == pytest.approx(-0.236068, abs=1e-6)
        b = kinetic_beta(1.0)
        tau = np.arange(10)
        np.testing.assert_allclose(nu.coeffs[:10], -(b ** -tau.astype(float)) / math.sqrt(b), atol=1e-14)

    def test_zero_energy(self):
        nu = causal_inverse(factor_energy(EnergyPolynomial.zero(), Domain.CIRCLE))
        np.testing.assert_array_equal(nu.coeffs, [1.0])

    @pytest.mark.parametrize("coeffs", [(-1.0, 1.0), (1.0, -2.0, 0.5j), (0.3, 0.0, 0.0, -1.2)])
    def test_reconstructs_reciprocal(self, coeffs):
        lam = factor_energy(EnergyPolynomial(coeffs), Domain.CIRCLE)
        nu = causal_inverse(lam, tol=1e-12)
        err = np.max(np.abs(nu(U) - 1 / lam(U)))
        assert err <= max(nu.tail_bound, 1e-14) * 1.01

    def test_line_kernel(self):
        lam = factor_energy(kinetic(1.0, Domain.LINE), Domain.LINE)
        nu = causal_inverse(lam)
        assert isinstance(nu, ExponentialKernel)
        assert nu(0.0) == pytest.approx(1.0)
        assert nu(3.0) == pytest.approx(math.exp(-3.0))

    def test_line_kernel_transform(self):
        # int_0^inf nu(t) e^{-itu} dt equals 1/lam(u)
        from scipy.integrate import quad

        lam = factor_energy(EnergyPolynomial((0.2, 1.0, 0.3)), Domain.LINE)
        nu = causal_inverse(lam)
        for u in (-1.0, 0.0, 0.7):
            re = quad(lambda t: (nu(t) * np.exp(-1j * t * u)).real, 0, np.inf, limit=200)[0]
            im = quad(lambda t: (nu(t) * np.exp(-1j * t * u)).imag, 0, np.inf, limit=200)[0]
            assert complex(re, im) == pytest.approx(1 / lam(u), abs=1e-7)
