# mypy: show_error_codes
"""Module containing the min-entropy evaluation of the raw samples.

The evaluation is model based and follows four steps:

1. estimate the total variance of the digitized voltage,
2. split it with the quantum signal to classical noise ratio *γ*,
3. model the quantum signal as a zero-mean Gaussian,
4. take the most probable ADC bin, *H∞ = -log2(P_max)*.

Only the quantum signal is credited with randomness. The classical noise
is assumed additive and independent of it, but otherwise known to an
adversary.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, TypedDict

import matplotlib
import numpy as np
import scipy.special as special
from matplotlib import pyplot as plt

from .config import *  # noqa
from .utils import *  # noqa
from .noise_model import NoiseModelParams, snr
from .source import AdcConfig, RawSampleStream, dequantize
from .stattests import autocorrelation

logger = logging.getLogger(__name__)

SECURITY_ASSUMPTION = (
    "classical noise is additive, Gaussian and independent of the quantum "
    "signal; no side information correlated with the quantum signal"
)

#: Lags of the autocorrelation recorded in every report.
REPORT_LAGS = 10


class InsufficientDataError(ValueError):
    """The stream is too short or degenerate for an entropy claim."""


@dataclass(frozen=True)
class GaussianSpec:
    """Zero-mean Gaussian distribution."""

    sigma: float  #: Standard deviation (mV).

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("'sigma' must be positive.")


class EntropyReport(TypedDict):
    """Intermediate values and result of
    :py:func:`~phaserng.minentropy.evaluate`."""

    n_samples: int  #: Number of samples used.
    power: float  #: Optical power (mW).
    adc: dict[str, float]  #: ADC *bits* and *range_a*.
    sigma_total_sq: float  #: Total variance from the bin midpoints (mV^2).
    sigma_total_sq_corrected: float  #: Sheppard-corrected total variance.
    gamma: float  #: Quantum signal to classical noise ratio.
    sigma_quantum_sq: float  #: Variance of the quantum signal (mV^2).
    p_max: float  #: Largest bin probability.
    argmax_code: int  #: Code of the most probable bin.
    h_min_per_sample: float  #: Min-entropy per sample (bits).
    autocorrelation: list[float]  #: Autocorrelation at lags 1..10.
    security_assumption: str  #: Assumption the entropy claim rests on.


def gaussian_cdf(x: float | np.ndarray) -> float | np.ndarray:
    """Standard normal cumulative distribution function.

    It is evaluated as *erfc(-x/√2)/2*, which keeps full relative accuracy
    in the lower tail.
    """
    result = 0.5 * special.erfc(-np.asarray(x, dtype=float) / np.sqrt(2.0))
    if np.ndim(result) == 0:
        return float(result)
    return result


def _as_gaussian(gauss: GaussianSpec | float) -> GaussianSpec:
    if isinstance(gauss, GaussianSpec):
        return gauss
    return GaussianSpec(float(gauss))


def bin_probabilities(
    gauss: GaussianSpec | float, adc: AdcConfig
) -> np.ndarray:
    """Return the probability of every ADC code for a zero-mean Gaussian
    voltage.

    Code *k* gets *Φ(u_{k+1}/σ) - Φ(u_k/σ)* with the bin edges
    *u_k = -a + kΔ*. The first and the last bins also absorb the tails
    below *-a* and above *a*.

    Parameters
    ----------
    gauss :
        Gaussian distribution, or its standard deviation (mV).
    adc :
        ADC configuration.
    """
    sigma = _as_gaussian(gauss).sigma
    cdf = np.asarray(gaussian_cdf(adc.edges() / sigma))
    cdf[0], cdf[-1] = 0.0, 1.0
    return np.diff(cdf)


def max_probability(
    gauss: GaussianSpec | float, adc: AdcConfig
) -> tuple[float, int]:
    """Return the largest bin probability and the code attaining it.

    Between two bins of equal probability the lowest code is returned.
    """
    probs = bin_probabilities(gauss, adc)
    code = int(np.argmax(probs))
    return float(probs[code]), code


def quantum_variance(sigma_total_sq: float, gamma: float) -> float:
    """Return the quantum share *γ/(γ+1)·σ²_total* of the total variance.

    Example
    -------
    >>> import phaserng as phr
    >>> round(phr.quantum_variance(24.4, 21), 2)
    23.29


    Parameters
    ----------
    sigma_total_sq :
        Total variance (mV^2).
    gamma :
        Quantum signal to classical noise ratio.
    """
    if sigma_total_sq < 0:
        raise ValueError("'sigma_total_sq' must be non-negative.")
    if gamma < 0:
        raise ValueError("'gamma' must be non-negative.")
    return gamma / (gamma + 1.0) * sigma_total_sq


def min_entropy_per_sample(
    sigma_quantum: GaussianSpec | float, adc: AdcConfig
) -> float:
    """Return the min-entropy (bits) of one digitized sample of the
    quantum signal, *-log2(P_max)*.

    Example
    -------
    >>> import phaserng as phr
    >>> adc = phr.AdcConfig(bits=8, range_a=15.0)
    >>> round(phr.min_entropy_per_sample(4.8, adc), 2)
    6.68


    Parameters
    ----------
    sigma_quantum :
        Standard deviation of the quantum signal (mV).
    adc :
        ADC configuration.
    """
    p_max, _ = max_probability(sigma_quantum, adc)
    return float(-np.log2(p_max))


def h_min_rate(report: EntropyReport) -> float:
    """Min-entropy per raw bit of an entropy report."""
    return report["h_min_per_sample"] / report["adc"]["bits"]


def evaluate(
    stream: RawSampleStream, params: NoiseModelParams, power: float
) -> EntropyReport:
    """Evaluate the min-entropy of a raw sample stream.

    The total variance is estimated from the bin midpoints of the samples.
    The noise model gives *γ* at the operating *power*, from which the
    quantum variance and the min-entropy per sample follow.

    The autocorrelation of the stream at lags 1 to 10 is recorded in the
    report, as the entropy claim relies on independent samples.

    Parameters
    ----------
    stream :
        Raw samples.
    params :
        Noise model coefficients.
    power :
        Optical power (mW) at which the stream was acquired.

    Raises
    ------
    InsufficientDataError
        If the stream has fewer than 10^4 samples or zero variance.
    """
    n = len(stream)
    if n < MIN_ENTROPY_SAMPLES:  # noqa
        raise InsufficientDataError(
            f"{n} samples are not enough, at least "
            f"{MIN_ENTROPY_SAMPLES} are needed."  # noqa
        )
    adc = stream.adc
    voltage = dequantize(stream.samples, adc)
    sigma_total_sq = float(np.var(voltage))
    if sigma_total_sq == 0.0:
        raise InsufficientDataError("The stream has zero variance.")
    corrected = max(sigma_total_sq - adc.bin_width**2 / 12.0, 0.0)

    gamma = float(snr(params, power))
    sigma_quantum_sq = quantum_variance(sigma_total_sq, gamma)
    p_max, code = max_probability(np.sqrt(sigma_quantum_sq), adc)
    h_min = float(-np.log2(p_max))

    coefficients = autocorrelation(stream.samples, REPORT_LAGS)["coefficients"]
    lags = [float(r) for r in coefficients[1:]]
    if abs(lags[0]) > 4.0 / np.sqrt(n):
        logger.warning(
            "Lag-1 autocorrelation %.3g exceeds 4/sqrt(N); the samples may "
            "not be independent.",
            lags[0],
        )

    logger.info(
        "Total variance %.4g mV^2, gamma %.4g, quantum variance %.4g mV^2, "
        "H_min %.4g bits/sample.",
        sigma_total_sq,
        gamma,
        sigma_quantum_sq,
        h_min,
    )
    return {
        "n_samples": n,
        "power": float(power),
        "adc": {"bits": adc.bits, "range_a": adc.range_a},
        "sigma_total_sq": sigma_total_sq,
        "sigma_total_sq_corrected": corrected,
        "gamma": gamma,
        "sigma_quantum_sq": sigma_quantum_sq,
        "p_max": p_max,
        "argmax_code": code,
        "h_min_per_sample": h_min,
        "autocorrelation": lags,
        "security_assumption": SECURITY_ASSUMPTION,
    }


def save_report(report: EntropyReport, filename: str | Path) -> None:
    """Save an entropy report as JSON."""
    with open(filename, "w", encoding="utf-8") as fp:
        json.dump(report, fp, indent=2)


def load_report(filename: str | Path) -> EntropyReport:
    """Load an entropy report saved with
    :py:func:`~phaserng.minentropy.save_report`."""
    with open(filename, encoding="utf-8") as fp:
        report = json.load(fp)
    not_found = difference_lists_of_str(  # noqa
        list(EntropyReport.__annotations__), list(report.keys())
    )
    if not_found:
        raise KeyError(f"Key(s) {not_found} not found in '{filename}'.")
    return report


def plot_bin_probabilities(
    gauss: GaussianSpec | float,
    adc: AdcConfig,
    layout: Literal["constrained", "compressed", "tight", "none"] = "tight",
    ax_height: float = 3.6,
    ax_width: float = 5.0,
) -> matplotlib.figure.Figure:
    """Plot the Gaussian density over the ADC bins and highlight the most
    probable bin.

    Parameters
    ----------
    gauss :
        Gaussian distribution, or its standard deviation (mV).
    adc :
        ADC configuration.
    layout:
        Figure layout.
    ax_height:
        Approximative height (inches) of the axes.
    ax_width:
        Approximative width (inches) of the axes.
    """
    sigma = _as_gaussian(gauss).sigma
    probs = bin_probabilities(sigma, adc)
    p_max, code = max_probability(sigma, adc)
    cmap = plt.get_cmap(COLORMAP)  # noqa

    colors = [cmap(0)] * adc.n_bins
    colors[code] = cmap(1)
    # Probabilities are drawn as densities over the bins.
    fig, ax = plt.subplots()
    ax.bar(
        adc.midpoints(),
        probs / adc.bin_width,
        width=adc.bin_width,
        color=colors,
        edgecolor="white" if adc.bits <= 6 else None,
    )
    span = max(adc.range_a, 4 * sigma)
    v = np.linspace(-span, span, 800)
    ax.plot(
        v,
        np.exp(-0.5 * (v / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi)),
        color=cmap(2),
        label=f"N(0, {sigma:.3g}^2)",
    )
    ax.axvline(-adc.range_a, color="k", linestyle="--", linewidth=0.8)
    ax.axvline(adc.range_a, color="k", linestyle="--", linewidth=0.8)
    ax.set_xlabel("Voltage (mV)")
    ax.set_ylabel("Density (1/mV)")
    ax.grid(True)
    ax.legend()
    fig.suptitle(
        f"P_max = {p_max:.{NUM_DECIMALS}g} at code {code}, "  # noqa
        f"H_min = {-np.log2(p_max):.{NUM_DECIMALS}g} bits."  # noqa
    )

    fig.set_size_inches(ax_width, ax_height + 0.5)
    fig.set_layout_engine(layout)
    return fig
