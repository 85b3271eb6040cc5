"""Trajectory diagnostics: spectra, rational ratios, closure and comparisons.

Functions accept anything exposing a ``tau`` array and observable arrays as
attributes (``TrajectoryRecord``, ``analytic.Curve``) or a mapping of column
names to arrays.  Frequencies are in cycles per unit ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

MIN_SAMPLES = 64
NOISE_FLOOR = 1e-10


class AnalysisError(ValueError):
    pass


def _column(obj, name: str) -> np.ndarray:
    if isinstance(obj, Mapping):
        return np.asarray(obj[name], dtype=float)
    if hasattr(obj, "column"):
        return np.asarray(obj.column(name), dtype=float)
    return np.asarray(getattr(obj, name), dtype=float)


@dataclass(frozen=True)
class SpectrumPeak:
    frequency: float
    amplitude: float
    index: int


def _uniform_step(tau: np.ndarray) -> float:
    if len(tau) < 2:
        raise AnalysisError("need at least two samples")
    d = np.diff(tau)
    dt = (tau[-1] - tau[0]) / (len(tau) - 1)
    if not dt > 0 or np.max(np.abs(d - dt)) > 1e-6 * dt:
        raise AnalysisError("samples are not uniformly spaced in tau")
    return float(dt)


def spectrum(tau, values, pad: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """One-sided amplitude spectrum ``(frequencies, amplitudes)`` with the mean removed.

    Amplitudes are scaled so that a sinusoid of amplitude ``A`` on an exact
    bin shows ``A``.  ``pad`` zero-pads to ``pad`` times the record length.
    """
    tau = np.asarray(tau, dtype=float)
    v = np.asarray(values, dtype=float)
    if v.shape != tau.shape:
        raise AnalysisError("tau and values differ in length")
    if len(tau) < MIN_SAMPLES:
        raise AnalysisError(f"need >= {MIN_SAMPLES} samples, got {len(tau)}")
    if int(pad) != pad or pad < 1:
        raise AnalysisError("pad must be an integer >= 1")
    dt = _uniform_step(tau)
    n = len(v)
    amp = 2.0 * np.abs(np.fft.rfft(v - v.mean(), n=n * pad)) / n
    freqs = np.fft.rfftfreq(n * pad, d=dt)
    return freqs, amp


def dominant_frequencies(
    record,
    observable: str = "x",
    n_peaks: int = 3,
    pad: int = 1,
    floor: float = NOISE_FLOOR,
) -> list[SpectrumPeak]:
    """Strongest spectral lines of one observable, refined by parabolic interpolation.

    Local maxima of the amplitude spectrum below ``floor * max(1, max|signal|)``
    are discarded, so a constant signal yields no peaks.
    """
    tau = _column(record, "tau")
    values = _column(record, observable)
    freqs, amp = spectrum(tau, values, pad)
    threshold = floor * max(1.0, float(np.max(np.abs(values))))
    df = freqs[1] - freqs[0]
    candidates = []
    for k in range(1, len(amp)):
        left = amp[k - 1]
        right = amp[k + 1] if k + 1 < len(amp) else -np.inf
        if amp[k] <= threshold or amp[k] < left or amp[k] <= right:
            continue
        if k + 1 < len(amp):
            denom = left - 2.0 * amp[k] + right
            shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
            peak_amp = amp[k] - 0.25 * (left - right) * shift
        else:
            shift, peak_amp = 0.0, amp[k]
        candidates.append(SpectrumPeak(float((k + shift) * df), float(peak_amp), k))
    candidates.sort(key=lambda p: -p.amplitude)
    return candidates[:n_peaks]


def rationalize(ratio: float, max_denominator: int = 20) -> tuple[int, int, float]:
    """Best rational approximation ``p/q`` with ``q <= max_denominator``."""
    if not ratio > 0:
        raise AnalysisError(f"ratio must be positive, got {ratio}")
    frac = Fraction(ratio).limit_denominator(max_denominator)
    return frac.numerator, frac.denominator, abs(ratio - frac.numerator / frac.denominator)


def curve_diameter(points: np.ndarray) -> float:
    """Largest distance between two points of a planar point set."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 2:
        return 0.0
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        # collinear: the extremes along the line give the diameter
        far = pts[np.argmax(np.linalg.norm(pts - pts[0], axis=1))]
        direction = far - pts[0]
        proj = (pts - pts[0]) @ direction / np.linalg.norm(direction)
        return float(np.ptp(proj))
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff**2, axis=-1))))


def closure_metric(curve, candidate_period: float, axes: Sequence[str] = ("x", "y")) -> float:
    """``max_tau |c(tau) - c(tau + T)| / diameter`` with linear interpolation.

    Zero for ``T = 0``.  Raises if the curve is shorter than ``T``.
    """
    T = float(candidate_period)
    if T == 0:
        return 0.0
    if T < 0:
        raise AnalysisError("candidate period must be >= 0")
    tau = _column(curve, "tau")
    pts = np.column_stack([_column(curve, a) for a in axes])
    span = tau[-1] - tau[0]
    if span < T * (1 - 1e-12):
        raise AnalysisError(f"curve spans {span:.6g} in tau, shorter than the period {T:.6g}")
    keep = tau + T <= tau[-1] * (1 + 1e-15) + 1e-300
    t0 = tau[keep]
    shifted = np.column_stack([np.interp(t0 + T, tau, pts[:, i]) for i in range(pts.shape[1])])
    dev = float(np.max(np.linalg.norm(shifted - pts[keep], axis=1)))
    diam = curve_diameter(pts)
    if diam == 0:
        return 0.0 if dev == 0 else math.inf
    return dev / diam


@dataclass(frozen=True)
class ComparisonReport:
    rms: dict[str, float]
    peak: dict[str, float]
    correlation: dict[str, float]
    tau_range: tuple[float, float]

    @property
    def max_peak(self) -> float:
        return max(self.peak.values(), default=0.0)

    @property
    def max_rms(self) -> float:
        return max(self.rms.values(), default=0.0)


def _correlation(a: np.ndarray, b: np.ndarray) -> float:
    sa, sb = np.std(a), np.std(b)
    if sa == 0 and sb == 0:
        return 1.0
    if sa == 0 or sb == 0:
        return 0.0
    c = float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))
    return min(1.0, max(-1.0, c))


def compare(record_a, record_b, observables: Sequence[str] = ("x", "y"),
            tau_range: tuple[float, float] | None = None) -> ComparisonReport:
    """Deviation statistics of two trajectories on their common tau range.

    The denser record's samples inside the overlap form the common grid; the
    other record is linearly interpolated onto it.
    """
    ta, tb = _column(record_a, "tau"), _column(record_b, "tau")
    lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    if tau_range is not None:
        lo, hi = max(lo, tau_range[0]), min(hi, tau_range[1])
    if hi < lo:
        raise AnalysisError("records have disjoint tau ranges")
    dense_a = len(ta) / max(ta[-1] - ta[0], 1e-300) >= len(tb) / max(tb[-1] - tb[0], 1e-300)
    grid_src = ta if dense_a else tb
    grid = grid_src[(grid_src >= lo) & (grid_src <= hi)]
    if len(grid) == 0:
        raise AnalysisError("no samples in the common tau range")
    rms, peak, corr = {}, {}, {}
    for name in observables:
        va = np.interp(grid, ta, _column(record_a, name))
        vb = np.interp(grid, tb, _column(record_b, name))
        d = va - vb
        rms[name] = float(np.sqrt(np.mean(d**2)))
        peak[name] = float(np.max(np.abs(d)))
        corr[name] = _correlation(va, vb)
    return ComparisonReport(rms, peak, corr, (float(lo), float(hi)))
