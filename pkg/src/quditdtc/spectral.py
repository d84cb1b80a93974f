"""Periodogram, subharmonic weight and peak metrics.

The spectrum is the squared modulus of the plain length-N_t DFT of the
mean-removed record (rectangular window, no padding). The subharmonic
weight C_m is the power fraction in the single bin k_m = round(N_t/m).

Signed targets: for complex series (charged probes) the response is a
single rotating phasor whose sign matters, so m may be negative; m = -4
targets the bin at frequency -1/4, i.e. k = N_t - round(N_t/4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_PEAK_HALFWIDTH = 3
GAUSSIAN_FWHM_FACTOR = 2.355


@dataclass(frozen=True)
class Spectrum:
    power: np.ndarray = field(repr=False)
    n_samples: int
    complex_input: bool
    mean_removed: bool = True

    def __post_init__(self):
        power = np.asarray(self.power, dtype=np.float64)
        if power.shape != (self.n_samples,):
            raise ValueError("power length must equal n_samples")
        power.flags.writeable = False
        object.__setattr__(self, "power", power)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.n_samples

    def total_power(self) -> float:
        return float(self.power.sum())


def periodogram(series: np.ndarray) -> Spectrum:
    """|DFT(x - mean)|^2 over the full record."""
    x = np.asarray(series)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("series must be 1-D with at least 2 samples")
    complex_input = np.iscomplexobj(x)
    x = x - x.mean()
    power = np.abs(np.fft.fft(x)) ** 2
    return Spectrum(power, x.size, complex_input)


def target_bin(n_samples: int, m: int) -> int:
    """k_m = round(N_t/m), nearest integer with ties up; signed m wraps."""
    if m == 0:
        raise ValueError("m must be a nonzero integer")
    k = math.floor(n_samples / m + 0.5)
    return k % n_samples


def subharmonic_weight(spectrum: Spectrum, m: int) -> float | None:
    """C_m = S(k_m) / sum_k S(k); None when there is no signal at all."""
    total = spectrum.total_power()
    if total <= 0.0:
        return None
    return float(spectrum.power[target_bin(spectrum.n_samples, m)] / total)


@dataclass(frozen=True)
class PeakMetrics:
    target_m: int
    k_target: int
    halfwidth: int
    f_peak: float
    delta_f: float
    gamma: float


def peak_metrics(spectrum: Spectrum, m: int,
                 halfwidth: int = DEFAULT_PEAK_HALFWIDTH) -> PeakMetrics | None:
    """Peak offset and moment-based FWHM proxy inside a fixed window.

    The window is k_target +/- halfwidth; f_peak is the discrete argmax
    (lowest index wins ties), delta_f = f_peak - 1/m, and gamma converts
    the window-normalized second moment about f_peak to a Gaussian FWHM.
    Returns None when the window carries no power.
    """
    n = spectrum.n_samples
    if halfwidth < 0:
        raise ValueError("halfwidth must be >= 0")
    k0 = target_bin(n, m)
    lo, hi = k0 - halfwidth, k0 + halfwidth
    if lo < 0 or hi > n - 1:
        raise ValueError("window does not fit inside the spectrum")
    window = np.arange(lo, hi + 1)
    weights = spectrum.power[window]
    total = weights.sum()
    if total <= 0.0:
        return None
    freqs = window / n
    if m < 0:
        freqs = freqs - 1.0  # negative-frequency branch for signed targets
    p = weights / total
    peak_pos = int(np.argmax(weights))
    f_peak = float(freqs[peak_pos])
    gamma = GAUSSIAN_FWHM_FACTOR * math.sqrt(float(p @ (freqs - f_peak) ** 2))
    return PeakMetrics(m, k0, halfwidth, f_peak, f_peak - 1.0 / m, gamma)
