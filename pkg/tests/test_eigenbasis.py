import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special
from scipy.integrate import simpson

from qcarpet import eigenbasis as eb
from qcarpet.errors import DomainError


class TestWellEigenstate:
    def test_sine_maximum(self):
        assert eb.well_eigenstate(1, math.pi / 2) == pytest.approx(1.0)

    def test_boundary_condition_exact_zero(self):
        assert eb.well_eigenstate(4, math.pi) == 0.0
        assert eb.well_eigenstate(4, 0.0) == 0.0

    def test_n3_at_pi_over_6(self):
        assert eb.well_eigenstate(3, math.pi / 6) == pytest.approx(1.0)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eb.well_eigenstate(0, 1.0)
        with pytest.raises(DomainError):
            eb.well_eigenstate(2, -0.1)
        with pytest.raises(DomainError):
            eb.well_eigenstate(2, math.pi + 0.1)

    def test_orthogonality(self):
        # quadrature oracle: int_0^pi sin(mx) sin(nx) dx = (pi/2) delta_mn
        x = np.linspace(0.0, math.pi, 2**16 + 1)
        S = np.array([eb.well_eigenstate(n, x) for n in range(1, 51)])
        gram = simpson(S[:, None, :] * S[None, :, :], x=x, axis=-1)
        assert np.abs(gram - (math.pi / 2) * np.eye(50)).max() < 1e-10

    def test_energy(self):
        assert eb.well_energy(7) == 49.0


class TestSinPi:
    def test_exact_integer_zeros(self):
        assert eb.sin_pi(0.0) == 0.0
        assert eb.sin_pi(12.0) == 0.0
        assert eb.sin_pi(2.0**40) == 0.0
        assert eb.sin_pi(-7.0) == 0.0

    def test_half_integers(self):
        assert eb.sin_pi(0.5) == 1.0
        assert eb.sin_pi(1.5) == -1.0

    def test_matches_sin(self):
        th = np.linspace(-3.0, 3.0, 1001)
        assert np.allclose(eb.sin_pi(th), np.sin(np.pi * th), atol=1e-15)


class TestHermiteEigenstate:
    def test_ground_state_at_origin(self):
        # direct evaluation: phi_0(0) = (2 pi)^(-1/4)
        assert eb.hermite_eigenstate(0, 0.0) == pytest.approx(
            (2.0 * math.pi) ** -0.25, rel=1e-14
        )

    def test_odd_parity_zero(self):
        assert eb.hermite_eigenstate(1, 0.0) == 0.0

    def test_unit_norm(self):
        # quadrature oracle for the normalization implied by the definition
        x = np.linspace(-40.0, 40.0, 2**15 + 1)
        p5 = eb.hermite_eigenstate(5, x)
        assert simpson(p5 * p5, x=x) == pytest.approx(1.0, abs=1e-10)

    def test_orthonormality(self):
        x = np.linspace(-60.0, 60.0, 2**15 + 1)
        B = eb.hermite_eigenstate_batch(np.arange(61), x)
        gram = simpson(B[:, None, :] * B[None, :, :], x=x, axis=-1)
        assert np.abs(gram - np.eye(61)).max() < 1e-8

    def test_no_overflow_at_switch_order(self):
        v = eb.hermite_eigenstate(eb.N_SWITCH, np.array([-50.0, 0.0, 50.0]))
        assert np.all(np.isfinite(v))

    def test_delegates_above_switch(self):
        n = eb.N_SWITCH + 1
        assert eb.hermite_eigenstate(n, 0.3) == eb.wkb_oscillator_asymptotic(n, 0.3)

    def test_batch_matches_single(self):
        x = np.linspace(-5.0, 5.0, 101)
        B = eb.hermite_eigenstate_batch([2, 7, 30], x)
        for row, n in zip(B, [2, 7, 30]):
            assert np.array_equal(row, np.asarray(eb.hermite_eigenstate(n, x)))

    def test_batch_validation(self):
        with pytest.raises(DomainError):
            eb.hermite_eigenstate_batch([3, 3], [0.0])
        with pytest.raises(DomainError):
            eb.hermite_eigenstate_batch([eb.N_SWITCH + 4], [0.0])


class TestOscillatorAsymptotic:
    def test_envelope_against_exact(self):
        # oracle: exact recurrence evaluation at n=100 on [-1, 1]
        x = np.linspace(-1.0, 1.0, 20001)
        exact = eb.hermite_eigenstate(100, x)
        asym = eb.wkb_oscillator_asymptotic(100, x)
        rms_rel = np.sqrt(np.mean((asym - exact) ** 2) / np.mean(exact**2))
        assert rms_rel < 0.05

    def test_x_zero_reduction(self):
        n = 4**8
        expected = eb.OSC_ASYMPTOTIC_PREFACTOR * n**-0.25
        assert eb.wkb_oscillator_asymptotic(n, 0.0) == pytest.approx(expected)

    def test_direct_substitution(self):
        # sqrt(16.5) x = pi, phase index 15: sin(pi - 15 pi/2) = -1
        n = 16
        val = eb.wkb_oscillator_asymptotic(n, math.pi / math.sqrt(16.5))
        assert val == pytest.approx(-eb.OSC_ASYMPTOTIC_PREFACTOR * 16**-0.25, rel=1e-12)


class TestWKBExponents:
    @pytest.mark.parametrize(
        "alpha,beta,gamma",
        [(1.0, 2.0 / 3.0, 1.0 / 3.0), (2.0, 1.0, 0.25), (math.inf, 2.0, 0.0)],
    )
    def test_table_rows(self, alpha, beta, gamma):
        ex = eb.wkb_exponents(alpha)
        assert ex.beta == pytest.approx(beta, rel=1e-15)
        assert ex.gamma == pytest.approx(gamma, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            eb.wkb_exponents(0.0)
        with pytest.raises(DomainError):
            eb.wkb_exponents(-1.0)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(alpha=st.floats(min_value=1e-3, max_value=1e3))
    def test_identity(self, alpha):
        ex = eb.wkb_exponents(alpha)
        assert ex.gamma == pytest.approx((2.0 - ex.beta) / 4.0, rel=1e-12)


class TestPowerLawEigenstate:
    def test_zero_phase(self):
        # n=9: phase index 8 is a multiple of 4, so the value at x=0 vanishes
        assert eb.wkb_powerlaw_eigenstate(2.0, 9, 0.0) == 0.0

    def test_amplitude(self):
        # g_n = n^(-gamma) with gamma(1) = 1/3: 8^(-1/3) = 1/2
        x = np.linspace(0.0, 2.0, 40001)
        vals = eb.wkb_powerlaw_eigenstate(1.0, 8, x)
        assert np.abs(vals).max() == pytest.approx(0.5, abs=1e-6)

    def test_amplitude_scaling_matches_oscillator(self):
        # gamma(2) = 1/4: both forms decay as n^{-1/4}
        r = lambda f, n: np.abs(f(n, np.linspace(0, 1, 2001))).max()
        for n in (16, 64, 256):
            ratio_pl = r(lambda m, x: eb.wkb_powerlaw_eigenstate(2.0, m, x), 4 * n) / r(
                lambda m, x: eb.wkb_powerlaw_eigenstate(2.0, m, x), n
            )
            ratio_osc = r(eb.wkb_oscillator_asymptotic, 4 * n) / r(
                eb.wkb_oscillator_asymptotic, n
            )
            assert ratio_pl == pytest.approx(4.0**-0.25, abs=0.02)
            assert ratio_osc == pytest.approx(4.0**-0.25, abs=0.02)


class TestNumerov:
    def test_airy_ground_and_first(self):
        # independent oracle: zeros of Ai' and Ai locate the |x| eigenvalues
        a_zeros, ap_zeros, _, _ = special.ai_zeros(1)
        e0 = eb.numerov_solve(1.0, 0).energy
        e1 = eb.numerov_solve(1.0, 1).energy
        assert e0 == pytest.approx(-ap_zeros[0], abs=1e-4)
        assert e1 == pytest.approx(-a_zeros[0], abs=1e-4)

    def test_oscillator_levels(self):
        for n in (3, 7, 20):
            rec = eb.numerov_solve(2.0, n)
            assert rec.energy == pytest.approx(2 * n + 1, rel=1e-6)

    def test_turning_point_invariant(self):
        for alpha, n in [(1.0, 5), (2.0, 7), (4.0, 9)]:
            rec = eb.numerov_solve(alpha, n)
            assert rec.turning_point**alpha == pytest.approx(rec.energy, rel=1e-12)

    def test_energies_increase(self):
        energies = [eb.numerov_solve(1.5, n).energy for n in range(6)]
        assert all(e2 > e1 for e1, e2 in zip(energies, energies[1:]))

    def test_eigenfunction_normalized(self):
        rec = eb.numerov_solve(2.0, 4)
        norm = np.trapezoid(rec._samples**2, rec._grid)
        assert norm == pytest.approx(1.0, rel=1e-8)
        # amplitude accessor interpolates the stored samples
        assert rec.amplitude(rec._grid[100]) == pytest.approx(rec._samples[100])
        assert rec.amplitude(rec._grid[-1] + 5.0) == 0.0

    def test_beta_scaling(self):
        # fitted slope of log E_n vs log n matches 2 alpha / (2 + alpha)
        ns = np.unique(np.round(np.geomspace(50, 200, 9)).astype(int))
        for alpha in (0.5, 1.0, 2.0, 4.0):
            E = np.array([eb.numerov_solve(alpha, int(n)).energy for n in ns])
            slope = np.polyfit(np.log(ns), np.log(E), 1)[0]
            assert slope == pytest.approx(eb.wkb_exponents(alpha).beta, rel=0.02)

    def test_gamma_scaling(self):
        # peak of the normalized eigenfunction over the inner half of the
        # classical region decays as n^{-gamma}
        ns = np.unique(np.round(np.geomspace(50, 200, 9)).astype(int))
        for alpha in (0.5, 1.0, 2.0, 4.0):
            peaks = []
            for n in ns:
                rec = eb.numerov_solve(alpha, int(n))
                mask = np.abs(rec._grid) <= 0.5 * rec.turning_point
                peaks.append(np.abs(rec._samples[mask]).max())
            slope = -np.polyfit(np.log(ns), np.log(peaks), 1)[0]
            assert slope == pytest.approx(eb.wkb_exponents(alpha).gamma, rel=0.05)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eb.numerov_solve(0.2, 3)
        with pytest.raises(DomainError):
            eb.numerov_solve(2.0, 501)
