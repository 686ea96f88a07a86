"""Mean position, mean velocity, density cuts, and spectra for the well.

For even q the cross terms pairing each mode with the n = 0 mode survive the
position integral and give the closed-form series

    <x>(t) = pi/2 - (16 (1 - q^{2(s-2)}) / pi)
             sum_k q^{k(s-1)} cos((q^{2k} - 1) t) / (q^{2k} - 1)^2,

a C^1 function whose derivative has a fractal graph.  For odd q every cross
term vanishes and <x> = pi/2 identically.  The density's beat spectrum
consists of the exact integers q^{2m} - q^{2(m-k)}, clustered on the log
scale, which is what makes time cuts fractal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import simpson

from . import wavefield
from .errors import CutoffError, NyquistError, ValidationError
from .wavefield import SuperpositionSpec, System

TAIL_BOUND = 1e-14


class SeriesKind(Enum):
    MEAN_POSITION = "mean_position"
    MEAN_VELOCITY = "mean_velocity"
    FIXED_X_DENSITY = "fixed_x_density"
    FIXED_T_DENSITY = "fixed_t_density"


@dataclass(frozen=True)
class ObservableSeries:
    """A uniformly sampled time (or space) series of one observable."""

    ts: np.ndarray
    values: np.ndarray
    kind: SeriesKind

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "values", vs)
        if ts.ndim != 1 or ts.size != vs.size or ts.size < 1:
            raise ValidationError("series needs matching 1-d ts and values")
        if not np.all(np.isfinite(vs)):
            raise ValidationError("series values must be finite")
        if ts.size > 1:
            dt = np.diff(ts)
            rng = float(ts[-1] - ts[0])
            if dt[0] <= 0 or np.max(np.abs(dt - rng / (ts.size - 1))) > 1e-12 * rng:
                raise ValidationError("ts must be uniform ascending")


@dataclass(frozen=True)
class SpectrumPeaks:
    """Detected spectral peaks, frequencies ascending."""

    frequencies: np.ndarray
    magnitudes: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        m = np.asarray(self.magnitudes, dtype=float)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "magnitudes", m)
        if f.size != m.size:
            raise ValidationError("frequencies and magnitudes must align")
        if f.size and (np.any(np.diff(f) <= 0) or np.any(m < 0)):
            raise ValidationError("frequencies must ascend; magnitudes >= 0")


def _require_well(spec: SuperpositionSpec):
    if spec.system is not System.WELL:
        raise ValidationError("mean-position series are defined for the well")


def series_tail(q: int, s: float, k: int) -> float:
    """Magnitude bound of the k-th mean-position term, q^{k(s-1)}/(q^{2k}-1)^2."""
    return float(q) ** (k * (s - 1.0)) / (float(q) ** (2 * k) - 1.0) ** 2


def auto_series_cutoff(q: int, s: float, tol: float = TAIL_BOUND) -> int:
    """Smallest K whose next term magnitude falls below tol."""
    for k in range(1, 64):
        if series_tail(q, s, k + 1) < tol:
            return k
    raise CutoffError("series cutoff exceeds K = 64; loosen the tail bound")


def _check_cutoff(spec: SuperpositionSpec, k_cutoff):
    if k_cutoff is None:
        return auto_series_cutoff(spec.q, spec.s)
    if series_tail(spec.q, spec.s, k_cutoff + 1) >= TAIL_BOUND:
        raise CutoffError(
            f"cutoff K={k_cutoff} leaves a tail above {TAIL_BOUND:.0e}; "
            f"need K >= {auto_series_cutoff(spec.q, spec.s)}"
        )
    return k_cutoff


def mean_position_series(spec: SuperpositionSpec, ts, k_cutoff=None) -> ObservableSeries:
    """<x>(t) from the closed-form series (constant pi/2 for odd q)."""
    _require_well(spec)
    ta = np.asarray(ts, dtype=float)
    if spec.q % 2 == 1:
        return ObservableSeries(ta, np.full_like(ta, math.pi / 2),
                                SeriesKind.MEAN_POSITION)
    K = _check_cutoff(spec, k_cutoff)
    q = float(spec.q)
    pref = 16.0 * (1.0 - q ** (2.0 * (spec.s - 2.0))) / math.pi
    acc = np.zeros_like(ta)
    for k in range(1, K + 1):
        omega = q ** (2 * k) - 1.0
        acc += q ** (k * (spec.s - 1.0)) * np.cos(omega * ta) / omega**2
    return ObservableSeries(ta, math.pi / 2 - pref * acc, SeriesKind.MEAN_POSITION)


def mean_velocity_series(spec: SuperpositionSpec, ts, k_cutoff=None) -> ObservableSeries:
    """v(t) = d<x>/dt, term-wise derivative of the mean-position series."""
    _require_well(spec)
    ta = np.asarray(ts, dtype=float)
    if spec.q % 2 == 1:
        return ObservableSeries(ta, np.zeros_like(ta), SeriesKind.MEAN_VELOCITY)
    K = _check_cutoff(spec, k_cutoff)
    q = float(spec.q)
    pref = 16.0 * (1.0 - q ** (2.0 * (spec.s - 2.0))) / math.pi
    acc = np.zeros_like(ta)
    for k in range(1, K + 1):
        omega = q ** (2 * k) - 1.0
        acc += q ** (k * (spec.s - 1.0)) * np.sin(omega * ta) / omega
    return ObservableSeries(ta, pref * acc, SeriesKind.MEAN_VELOCITY)


def velocity_theory_dimension(spec: SuperpositionSpec) -> float:
    """Predicted graph dimension of v(t): max{(1+s)/2, 1}; 1 for odd q."""
    if spec.q % 2 == 1:
        return 1.0
    return max((1.0 + spec.s) / 2.0, 1.0)


def _well_quadrature_grid(spec: SuperpositionSpec, n_quad=None) -> np.ndarray:
    intervals = n_quad - 1 if n_quad else max(spec.q**spec.m_terms + 1, 2**14)
    return np.linspace(0.0, math.pi, intervals + 1)


def mean_position_quadrature(spec: SuperpositionSpec, t: float, n_quad=None) -> float:
    """Oracle for the closed form: <x> = int x P dx / int P dx by trapezoid.

    Integrates (x - pi/2) P instead of x P: the integrand and its first
    derivative then vanish at both walls (P and P' do), so on a grid with
    more intervals than the highest beat frequency the uniform trapezoid
    rule is accurate to boundary terms of order h^4.
    """
    _require_well(spec)
    xs = _well_quadrature_grid(spec, n_quad)
    amp = wavefield.well_psi(spec, xs, float(t))
    dens = amp.real**2 + amp.imag**2
    total = float(np.trapezoid(dens, xs))
    centered = float(np.trapezoid((xs - math.pi / 2.0) * dens, xs))
    return math.pi / 2.0 + centered / total


def ehrenfest_check(spec: SuperpositionSpec, t: float, dt: float = 1e-4,
                    n_quad=None) -> tuple[float, float]:
    """(d<x>/dt by central difference, <p>/m by quadrature) at time t.

    For finite truncations the two sides agree; the central difference
    carries an O(dt^2 <x>''') truncation error that grows quickly with M, so
    dt is a documented, tunable knob.  Units have 2m = 1, so <p>/m =
    2 Im int Psi* dPsi/dx dx.
    """
    _require_well(spec)
    xs = _well_quadrature_grid(spec, n_quad)
    xp = mean_position_quadrature(spec, t + dt, n_quad)
    xm = mean_position_quadrature(spec, t - dt, n_quad)
    lhs = (xp - xm) / (2.0 * dt)

    rows, coeffs, energies = wavefield.spatial_modes(spec, xs)
    wavenumbers = float(spec.q) ** np.arange(spec.m_terms + 1)
    phases = np.exp(-1j * energies * float(t))
    amp = (coeffs * phases) @ rows
    # term-wise exact spatial derivative: N sum c_n q^n cos(q^n x) e^{-i E t}
    drows = np.cos(np.multiply.outer(wavenumbers, xs))
    damp = (coeffs * wavenumbers * phases) @ drows
    dens_norm = float(simpson(amp.real**2 + amp.imag**2, x=xs))
    rhs = 2.0 * float(simpson(np.imag(np.conj(amp) * damp), x=xs)) / dens_norm
    return lhs, rhs


def frequency_clusters(q: int, m_max: int, k_max=None) -> SpectrumPeaks:
    """Exact integer beat frequencies q^{2m} - q^{2(m-k)} of the density.

    On the log scale they cluster near m ln q^2 with corrections about
    -q^{-2k}; the clustering approximation is asserted internally.
    """
    if q < 2 or int(q) != q:
        raise ValidationError("base q must be an integer >= 2")
    if m_max < 1:
        raise ValidationError("m_max must be >= 1")
    freqs = set()
    for m in range(1, m_max + 1):
        top = min(m, k_max) if k_max is not None else m
        for k in range(1, top + 1):
            w = q ** (2 * m) - q ** (2 * (m - k))
            x = float(q) ** (-2 * k)
            assert abs(math.log(w) - (m * math.log(q**2) - x)) <= x * x, (
                "log-scale clustering approximation violated"
            )
            freqs.add(w)
    out = np.array(sorted(freqs), dtype=float)
    return SpectrumPeaks(out, np.ones_like(out))


def time_cut_series(spec: SuperpositionSpec, x: float, ts) -> ObservableSeries:
    """P(x, t) over ts at fixed position x."""
    amp = wavefield.psi(spec, float(x), np.asarray(ts, dtype=float))
    return ObservableSeries(ts, amp.real**2 + amp.imag**2, SeriesKind.FIXED_X_DENSITY)


def space_cut_series(spec: SuperpositionSpec, t: float, xs) -> ObservableSeries:
    """P(x, t) over xs at fixed time t."""
    amp = wavefield.psi(spec, np.asarray(xs, dtype=float), float(t))
    return ObservableSeries(xs, amp.real**2 + amp.imag**2, SeriesKind.FIXED_T_DENSITY)


def spectrum_of_cut(series: ObservableSeries, spec: SuperpositionSpec = None,
                    rel_threshold: float = 1e-6) -> SpectrumPeaks:
    """DFT peaks of a fixed-x density cut.

    The samples must cover an integer number of fundamental periods, with the
    right endpoint excluded (t_j = j T / n), so every beat harmonic lands on
    an exact DFT bin.  With `spec` given, the period and the Nyquist bound
    (max beat frequency q^{2M} - 1) are checked and near-integer bin
    frequencies are snapped to the exact integers.
    """
    if series.kind is not SeriesKind.FIXED_X_DENSITY:
        raise ValidationError("spectra are taken over fixed-position time cuts")
    ts = series.ts
    n = ts.size
    dt = float(ts[1] - ts[0])
    total = n * dt
    if spec is not None:
        if spec.system is not System.WELL:
            raise ValidationError("beat-spectrum analysis is defined for the well")
        period = 2.0 * math.pi / (spec.q**2 - 1)
        ratio = total / period
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValidationError(
                "samples must cover an integer number of periods "
                f"2 pi / (q^2 - 1) = {period:.6g} (endpoint excluded)"
            )
        f_max = float(spec.q) ** (2 * spec.m_terms) - 1.0
        if math.pi * n / total <= f_max:
            raise NyquistError(
                f"need more than {2 * f_max * total / (2 * math.pi):.0f} samples "
                f"to resolve the highest beat frequency {f_max:.0f}"
            )
    mags = np.abs(np.fft.rfft(series.values)) / n
    freqs = 2.0 * math.pi * np.arange(mags.size) / total
    keep = mags > rel_threshold * mags.max()
    freqs, mags = freqs[keep], mags[keep]
    if spec is not None:
        snapped = np.round(freqs)
        if np.max(np.abs(freqs - snapped)) > 1e-6 * np.maximum(1.0, snapped).max():
            raise ValidationError("detected peaks are not at integer frequencies")
        freqs = snapped
    return SpectrumPeaks(freqs, mags)


@dataclass(frozen=True)
class RelationReport:
    """Residuals of the dimension relations linking time, velocity and space
    cuts: D_t + D_v = D_x + 3/2 and D_t = 1 + D_x/2."""

    residual_additive: float
    stderr_additive: float
    residual_time_space: float
    stderr_time_space: float


def dimension_relation_report(d_x, d_t, d_v) -> RelationReport:
    """Check the measured estimates against both closed-form relations.

    All three estimates should come from the same superposition with
    1 < s < 2, where every dimension is non-integer.
    """
    res_add = abs(d_t.dimension + d_v.dimension - d_x.dimension - 1.5)
    se_add = math.sqrt(d_t.stderr**2 + d_v.stderr**2 + d_x.stderr**2)
    res_ts = abs(d_t.dimension - 1.0 - d_x.dimension / 2.0)
    se_ts = math.sqrt(d_t.stderr**2 + (d_x.stderr / 2.0) ** 2)
    return RelationReport(res_add, se_add, res_ts, se_ts)
