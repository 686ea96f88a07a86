import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson

from qcarpet import observables as ob
from qcarpet import wavefield as wf
from qcarpet.errors import CutoffError, NyquistError, ValidationError
from qcarpet.wavefield import SuperpositionSpec, System

# frozen from the closed-form series; the quadrature oracle below agrees to 2e-7
MEAN_X_AT_ZERO = 1.146033932262

def well(**kw):
    kw.setdefault("q", 2)
    kw.setdefault("s", 1.5)
    kw.setdefault("m_terms", 20)
    return SuperpositionSpec(System.WELL, **kw)


class TestMeanPosition:
    def test_value_at_zero(self):
        ser = ob.mean_position_series(well(), np.array([0.0]))
        assert ser.values[0] == pytest.approx(MEAN_X_AT_ZERO, abs=1e-9)
        assert ser.values[0] == pytest.approx(1.14604, abs=1e-4)

    def test_quadrature_oracle(self):
        spec = well()
        for t in (0.0, 0.3, 1.1):
            closed = ob.mean_position_series(spec, np.array([t])).values[0]
            quad = ob.mean_position_quadrature(spec, t)
            assert abs(closed - quad) / closed < 1e-4
            assert abs(closed - quad) < 1e-5

    def test_odd_q_constant(self):
        spec = well(q=3, m_terms=8)
        ser = ob.mean_position_series(spec, np.linspace(0.0, 2.0, 33))
        assert np.all(ser.values == math.pi / 2)

    def test_periodicity(self):
        # every frequency q^{2k} - 1 is a multiple of 3 at q = 2
        spec = well()
        ts = np.linspace(0.0, 0.6, 17)
        a = ob.mean_position_series(spec, ts).values
        b = ob.mean_position_series(spec, ts + 2 * math.pi / 3).values
        assert np.abs(a - b).max() < 1e-9

    def test_values_inside_well(self):
        ser = ob.mean_position_series(well(), np.linspace(0.0, 2.1, 501))
        assert np.all(ser.values > 0.0) and np.all(ser.values < math.pi)

    def test_cutoff_error(self):
        with pytest.raises(CutoffError):
            ob.mean_position_series(well(), np.array([0.0]), k_cutoff=5)

    def test_auto_cutoff_minimal(self):
        K = ob.auto_series_cutoff(2, 1.5)
        assert ob.series_tail(2, 1.5, K + 1) < ob.TAIL_BOUND
        assert ob.series_tail(2, 1.5, K) >= ob.TAIL_BOUND


class TestMeanVelocity:
    def test_zero_at_t0(self):
        ser = ob.mean_velocity_series(well(), np.array([0.0, 0.25]))
        assert ser.values[0] == 0.0

    def test_odd_q_identically_zero(self):
        ser = ob.mean_velocity_series(well(q=3, m_terms=8), np.linspace(0, 1, 65))
        assert np.all(ser.values == 0.0)

    def test_antiderivative_consistency(self):
        # integrating v over [0, T] reproduces <x>(T) - <x>(0)
        spec = well(s=0.5, m_terms=8)
        K = ob.auto_series_cutoff(2, 0.5)
        ts = np.linspace(0.0, 0.1, 2**22 + 1)
        v = ob.mean_velocity_series(spec, ts, k_cutoff=K).values
        ends = ob.mean_position_series(spec, np.array([0.0, 0.1]), k_cutoff=K).values
        assert abs(simpson(v, x=ts) - (ends[1] - ends[0])) < 1e-6

    def test_theory_dimension(self):
        assert ob.velocity_theory_dimension(well(s=1.5)) == 1.25
        assert ob.velocity_theory_dimension(well(q=3, m_terms=8)) == 1.0
        assert ob.velocity_theory_dimension(well(s=0.5)) == 1.0


class TestEhrenfest:
    def test_stationary_state(self):
        lhs, rhs = ob.ehrenfest_check(well(m_terms=0), 0.3)
        assert abs(lhs) < 1e-12 and abs(rhs) < 1e-12

    def test_agreement_m6(self):
        lhs, rhs = ob.ehrenfest_check(well(m_terms=6), 0.3, dt=1e-5)
        assert abs(lhs - rhs) < 1e-5

    def test_roughening_trend(self):
        # at fixed dt the finite-difference error grows with the truncation
        errs = []
        for m in (4, 8, 12):
            lhs, rhs = ob.ehrenfest_check(well(m_terms=m), 0.3, dt=1e-4)
            errs.append(abs(lhs - rhs))
        assert errs[0] <= errs[1] <= errs[2]


class TestFrequencyClusters:
    def test_examples(self):
        c = ob.frequency_clusters(2, 2)
        assert list(c.frequencies) == [3.0, 12.0, 15.0]

    def test_divisible_by_three(self):
        c = ob.frequency_clusters(2, 6)
        assert all(f % 3 == 0 for f in c.frequencies)

    @settings(max_examples=20, deadline=None, derandomize=True)
    @given(q=st.sampled_from([2, 4, 6]), m_max=st.integers(min_value=1, max_value=5))
    def test_divisibility_by_q2_minus_1(self, q, m_max):
        c = ob.frequency_clusters(q, m_max)
        assert all(f % (q * q - 1) == 0 for f in c.frequencies)

    def test_log_clustering(self):
        # ln w_{m,k} = m ln q^2 + ln(1 - q^{-2k}), within q^{-4k} of the
        # first-order form m ln q^2 - q^{-2k}
        for m in range(1, 7):
            for k in range(1, m + 1):
                w = 4**m - 4 ** (m - k)
                x = 4.0**-k
                assert abs(math.log(w) - (m * math.log(4) - x)) <= x * x


class TestSpectrumOfCut:
    @staticmethod
    def sample_cut(spec, x=1.0, n=4096, periods=3):
        T = periods * 2 * math.pi / (spec.q**2 - 1)
        ts = np.arange(n) * (T / n)
        return ob.time_cut_series(spec, x, ts)

    def test_peaks_are_exact_beats(self):
        # brute-force oracle: expand |Psi|^2 over all term pairs
        spec = well(m_terms=4)
        peaks = ob.spectrum_of_cut(self.sample_cut(spec), spec)
        allowed = {0.0} | {
            float(4**m - 4**k) for m in range(5) for k in range(m)
        }
        assert set(peaks.frequencies) <= allowed
        assert all(f % 3 == 0 for f in peaks.frequencies)

    def test_peaks_within_cluster_enumeration(self):
        spec = well(m_terms=4)
        peaks = ob.spectrum_of_cut(self.sample_cut(spec), spec)
        clusters = set(ob.frequency_clusters(2, 4).frequencies) | {0.0}
        assert set(peaks.frequencies) <= clusters

    def test_stationary_cut_single_peak(self):
        spec = well(m_terms=0)
        peaks = ob.spectrum_of_cut(self.sample_cut(spec), spec)
        assert list(peaks.frequencies) == [0.0]

    def test_nyquist_error(self):
        spec = well(m_terms=4)
        with pytest.raises(NyquistError):
            ob.spectrum_of_cut(self.sample_cut(spec, n=128), spec)

    def test_period_coverage_required(self):
        spec = well(m_terms=3)
        ts = np.arange(1024) * (1.0 / 1024)
        with pytest.raises(ValidationError, match="integer number of periods"):
            ob.spectrum_of_cut(ob.time_cut_series(spec, 1.0, ts), spec)


class TestCuts:
    def test_time_cut_kind_and_values(self):
        spec = well(m_terms=6)
        ts = np.linspace(0.0, 1.0, 257)
        cut = ob.time_cut_series(spec, 1.0, ts)
        assert cut.kind is ob.SeriesKind.FIXED_X_DENSITY
        amp = wf.well_psi(spec, 1.0, ts)
        assert np.array_equal(cut.values, amp.real**2 + amp.imag**2)

    def test_dyadic_time_cut_is_trigonometric(self):
        # at x = pi/8 only the first three terms survive, so the cut matches
        # a three-mode expansion evaluated independently
        spec = well(m_terms=16)
        ts = np.linspace(0.0, 2 * math.pi / 3, 1025)
        cut = ob.time_cut_series(spec, math.pi / 8, ts)
        n0 = wf.well_normalization(spec)
        amps = [math.sin(math.pi / 8), math.sin(math.pi / 4), math.sin(math.pi / 2)]
        ref = np.zeros_like(ts, dtype=complex)
        for n, a in enumerate(amps):
            ref += n0 * 2.0 ** (n * (spec.s - 2.0)) * a * np.exp(-1j * 4.0**n * ts)
        assert np.allclose(cut.values, np.abs(ref) ** 2, atol=1e-14)


class TestRelationReport:
    class _E:
        def __init__(self, d, se=0.01):
            self.dimension = d
            self.stderr = se

    def test_exact_identity(self):
        # s = 3/2: D_t + D_v = 1.75 + 1.25 = 3 = D_x + 3/2
        rep = ob.dimension_relation_report(
            self._E(1.5), self._E(1.75), self._E(1.25)
        )
        assert rep.residual_additive == pytest.approx(0.0, abs=1e-12)
        assert rep.residual_time_space == pytest.approx(0.0, abs=1e-12)

    def test_oscillator_prediction(self):
        # s = 5/4: D_t = 1 + D_x/2 = 1.625
        rep = ob.dimension_relation_report(
            self._E(1.25), self._E(1.625), self._E(1.125)
        )
        assert rep.residual_time_space == pytest.approx(0.0, abs=1e-12)

    def test_stderr_propagation(self):
        rep = ob.dimension_relation_report(
            self._E(1.5, 0.03), self._E(1.75, 0.04), self._E(1.25, 0.0)
        )
        assert rep.stderr_additive == pytest.approx(0.05)
        assert rep.stderr_time_space == pytest.approx(math.hypot(0.04, 0.015))
