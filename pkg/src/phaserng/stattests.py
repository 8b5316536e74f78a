# mypy: show_error_codes
"""Module containing the statistical tests run on raw and extracted data.

The core battery holds the NIST SP 800-22 frequency (monobit), block
frequency and runs tests. It is not a certified NIST implementation; the
full NIST, Diehard and TestU01 suites can be run externally on the packed
bit files.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Literal, TypedDict

import matplotlib
import numpy as np
import scipy.signal as signal
import scipy.special as special
from matplotlib import pyplot as plt

from .config import *  # noqa
from .utils import *  # noqa

logger = logging.getLogger(__name__)

CORE_TESTS = ["monobit", "block_frequency", "runs"]
MIN_TEST_BITS = 100
MIN_KS_VALUES = 5


class TooShortError(ValueError):
    """The sequence is too short for the test."""


class TooFewError(ValueError):
    """Too few p-values to combine."""


class ZeroVarianceError(ValueError):
    """The sequence is constant."""


class AutocorrResult(TypedDict):
    """Autocorrelation coefficients of a sequence."""

    coefficients: np.ndarray  #: *R(j)* for *j = 0..max_lag*.
    n: int  #: Number of samples.
    expected_sd: float  #: Standard deviation of *R(j)* for iid data, *1/√n*.


class TestReport(TypedDict):
    """Outcome of a statistical test.

    When a test yields several p-values, *p_value* is the worst case.
    """

    name: str  #: Test name.
    p_values: list[float]  #: p-values in [0, 1].
    p_value: float  #: Worst-case (smallest) p-value.
    statistic: float  #: Test statistic.
    alpha: float  #: Significance level.
    verdict: Verdict_type  # noqa
    proportion: float | None  #: Fraction of sequences passing, if several.


class FlatnessResult(TypedDict):
    """Welch power spectral density and its flatness."""

    flatness: float  #: Geometric over arithmetic mean, 1.0 when flat.
    frequencies: np.ndarray  #: Frequencies, as fractions of the sampling rate.
    psd: np.ndarray  #: Power spectral density.
    segments: int  #: Number of averaged segments.


def _report(
    name: str,
    p_values: list[float],
    statistic: float,
    alpha: float,
    verdict: Verdict_type | None = None,  # noqa
    proportion: float | None = None,
) -> TestReport:
    p_values = [float(np.clip(p, 0.0, 1.0)) for p in p_values]
    p_value = min(p_values)
    if verdict is None:
        verdict = "pass" if p_value >= alpha else "fail"
    logger.debug("%s: p=%.6g, %s.", name, p_value, verdict)
    return {
        "name": name,
        "p_values": p_values,
        "p_value": p_value,
        "statistic": float(statistic),
        "alpha": float(alpha),
        "verdict": verdict,
        "proportion": proportion,
    }


def _test_bits(bits: np.ndarray | str) -> np.ndarray:
    bits = as_bits(bits)  # noqa
    if bits.size < MIN_TEST_BITS:
        raise TooShortError(
            f"At least {MIN_TEST_BITS} bits are needed, got {bits.size}."
        )
    return bits


def autocorrelation(samples: np.ndarray, max_lag: int) -> AutocorrResult:
    r"""Return the autocorrelation coefficients of *samples*.

    .. math::

        R(j) = \frac{1}{(N-j)\,\sigma^2}\sum_{i=0}^{N-j-1}(x_i-\mu)(x_{i+j}-\mu)

    where the mean *μ* and the variance *σ²* are computed on the whole
    sequence. Bits can be passed as they are, the coefficients are the same
    as those of the ±1 sequence.

    Parameters
    ----------
    samples :
        Numeric sequence.
    max_lag :
        Largest lag *j*.

    Raises
    ------
    TooShortError
        If the sequence has no more than *max_lag + 1* samples.
    ZeroVarianceError
        If the sequence is constant.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if max_lag < 0:
        raise ValueError("'max_lag' must be non-negative.")
    if n <= max_lag + 1:
        raise TooShortError(
            f"{n} samples are too few for lags up to {max_lag}."
        )
    variance = x.var()
    if variance == 0:
        raise ZeroVarianceError("The sequence is constant.")
    y = x - x.mean()

    corr = signal.correlate(y, y, mode="full", method="fft")
    lags = signal.correlation_lags(n, n, mode="full")
    start = int(np.nonzero(lags == 0)[0][0])
    j = np.arange(max_lag + 1)
    coefficients = corr[start : start + max_lag + 1] / ((n - j) * variance)
    coefficients[0] = 1.0
    return {
        "coefficients": np.clip(coefficients, -1.0, 1.0),
        "n": n,
        "expected_sd": 1.0 / np.sqrt(n),
    }


def monobit_test(
    bits: np.ndarray | str, alpha: float = ALPHA  # noqa
) -> TestReport:
    """Frequency (monobit) test.

    The p-value is *erfc(|S_n|/√(2n))* where *S_n* is the sum of the bits
    mapped to ±1.

    Raises
    ------
    TooShortError
        If there are fewer than 100 bits.
    """
    bits = _test_bits(bits)
    n = bits.size
    s = 2.0 * np.count_nonzero(bits) - n
    p = special.erfc(abs(s) / np.sqrt(2.0 * n))
    return _report("monobit", [p], s / np.sqrt(n), alpha)


def block_frequency_test(
    bits: np.ndarray | str,
    block_size: int = 128,
    alpha: float = ALPHA,  # noqa
) -> TestReport:
    """Frequency test within blocks of *block_size* bits.

    With *π_i* the proportion of ones of block *i*, the statistic is
    *χ² = 4M Σ (π_i - 1/2)²* and the p-value is the upper regularized
    incomplete gamma function *Q(N/2, χ²/2)* over the *N* whole blocks.

    Raises
    ------
    TooShortError
        If there are fewer than 100 bits or no whole block.
    """
    bits = _test_bits(bits)
    if block_size < 1:
        raise ValueError("'block_size' must be positive.")
    n_blocks = bits.size // block_size
    if n_blocks < 1:
        raise TooShortError(f"No whole block of {block_size} bits.")
    blocks = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    pi = blocks.mean(axis=1)
    chi2 = 4.0 * block_size * np.sum((pi - 0.5) ** 2)
    p = special.gammaincc(n_blocks / 2.0, chi2 / 2.0)
    return _report("block_frequency", [p], chi2, alpha)


def runs_test(
    bits: np.ndarray | str, alpha: float = ALPHA  # noqa
) -> TestReport:
    """Runs test.

    The number of runs *V* is compared with its expectation
    *2nπ(1-π)*. As in NIST SP 800-22, if the proportion of ones *π* is
    farther than *2/√n* from 1/2 the test is not applicable and the
    p-value is 0.

    Raises
    ------
    TooShortError
        If there are fewer than 100 bits.
    """
    bits = _test_bits(bits)
    n = bits.size
    pi = np.count_nonzero(bits) / n
    v = 1 + np.count_nonzero(bits[1:] != bits[:-1])
    if abs(pi - 0.5) >= 2.0 / np.sqrt(n):
        logger.debug("runs: frequency prerequisite failed (pi=%.4g).", pi)
        return _report("runs", [0.0], v, alpha)
    p = special.erfc(
        abs(v - 2.0 * n * pi * (1.0 - pi))
        / (2.0 * np.sqrt(2.0 * n) * pi * (1.0 - pi))
    )
    return _report("runs", [p], v, alpha)


_TESTS = {
    "monobit": lambda bits, alpha, block_size: monobit_test(bits, alpha),
    "block_frequency": lambda bits, alpha, block_size: block_frequency_test(
        bits, block_size, alpha
    ),
    "runs": lambda bits, alpha, block_size: runs_test(bits, alpha),
}


def proportion(
    reports: list[TestReport], alpha: float = ALPHA  # noqa
) -> float:
    """Fraction of *reports* whose p-value is larger than *alpha*."""
    return float(np.mean([r["p_value"] > alpha for r in reports]))


def proportion_interval(
    n_sequences: int, alpha: float = ALPHA  # noqa
) -> float:
    """Lower end of the acceptable proportion of passing sequences,
    *(1-α) - 3√(α(1-α)/N)*.

    For 500 sequences at *α = 0.01* it is about 0.9767.
    """
    if n_sequences < 1:
        raise ValueError("'n_sequences' must be positive.")
    p = 1.0 - alpha
    return p - 3.0 * np.sqrt(p * alpha / n_sequences)


def proportion_rule(
    reports: list[TestReport],
    alpha: float = ALPHA,  # noqa
    threshold: float = PROPORTION_THRESHOLD,  # noqa
) -> Verdict_type:  # noqa
    """Pass if the fraction of reports with p-value larger than *alpha*
    exceeds *threshold*.

    Parameters
    ----------
    reports :
        Reports of the same test over several sequences.
    alpha :
        Significance level.
    threshold :
        Smallest acceptable fraction, exclusive.
    """
    if len(reports) < 2:
        raise ValueError("The proportion rule needs at least 2 reports.")
    return "pass" if proportion(reports, alpha) > threshold else "fail"


def ks_combine(p_values: list[float] | np.ndarray) -> TestReport:
    """Combine p-values with a one-sample Kolmogorov-Smirnov test against
    the uniform distribution.

    The statistic *D* is scaled by *√n + 0.12 + 0.11/√n* and converted with
    the asymptotic Kolmogorov distribution. The combination passes when
    the resulting p-value lies in [0.01, 0.99].

    Raises
    ------
    TooFewError
        If fewer than 5 p-values are given.
    """
    p = np.sort(np.asarray(p_values, dtype=float))
    n = p.size
    if n < MIN_KS_VALUES:
        raise TooFewError(
            f"At least {MIN_KS_VALUES} p-values are needed, got {n}."
        )
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - p), np.max(p - (i - 1) / n))
    lam = (np.sqrt(n) + 0.12 + 0.11 / np.sqrt(n)) * d
    p_ks = float(special.kolmogorov(lam))
    verdict: Verdict_type = "pass" if 0.01 <= p_ks <= 0.99 else "fail"  # noqa
    return _report("ks_combine", [p_ks], d, 0.01, verdict=verdict)


def spectral_flatness(
    samples: np.ndarray, segments: int = 64
) -> FlatnessResult:
    """Flatness of the Welch power spectral density of *samples*.

    The sequence is cut into *segments* Hann-windowed segments overlapping
    by 50%. The flatness is the ratio of the geometric and arithmetic means
    of the averaged periodogram, without the DC and Nyquist bins.

    Raises
    ------
    TooShortError
        If there are fewer than *256·segments* samples.
    """
    x = np.asarray(samples, dtype=float)
    if segments < 1:
        raise ValueError("'segments' must be positive.")
    if x.size < 256 * segments:
        raise TooShortError(
            f"At least {256 * segments} samples are needed, got {x.size}."
        )
    nperseg = 2 * x.size // (segments + 1)
    freq, psd = signal.welch(
        x, fs=1.0, window="hann", nperseg=nperseg, noverlap=nperseg // 2
    )
    inner = psd[1:-1] if nperseg % 2 == 0 else psd[1:]
    inner = np.maximum(inner, np.finfo(float).tiny)
    flatness = float(np.exp(np.mean(np.log(inner))) / np.mean(inner))
    logger.debug("Spectral flatness %.4g over %d segments.", flatness, segments)
    return {
        "flatness": flatness,
        "frequencies": freq,
        "psd": psd,
        "segments": segments,
    }


def run_battery(
    bits: np.ndarray | str,
    battery: Battery_type = "core",  # noqa
    tests: str | list[str] | None = None,
    alpha: float = ALPHA,  # noqa
    block_size: int = 128,
) -> list[TestReport]:
    """Run the tests of a battery on a single sequence.

    Parameters
    ----------
    bits :
        Bit sequence.
    battery :
        Battery name. Only *"core"* is available.
    tests :
        Subset of the battery tests. If *None*, all of them.
    alpha :
        Significance level.
    block_size :
        Block size of the block frequency test.

    Raises
    ------
    KeyError
        If the battery or a test does not exist.
    """
    if battery not in BATTERY_KIND:  # noqa
        raise KeyError(f"Battery '{battery}' not found in {BATTERY_KIND}.")  # noqa
    tests = CORE_TESTS if tests is None else str2list(tests)  # noqa
    not_found = difference_lists_of_str(tests, CORE_TESTS)  # noqa
    if not_found:
        raise KeyError(f"Test(s) {not_found} not found in {CORE_TESTS}.")
    bits = as_bits(bits)  # noqa
    reports = [_TESTS[name](bits, alpha, block_size) for name in tests]
    logger.info(
        "Battery '%s' on %d bits: %s.",
        battery,
        bits.size,
        ", ".join(f"{r['name']} {r['verdict']}" for r in reports),
    )
    return reports


def sequence_battery(
    bits: np.ndarray | str,
    sequence_length: int,
    tests: str | list[str] | None = None,
    alpha: float = ALPHA,  # noqa
    threshold: float | None = None,
    block_size: int = 128,
) -> list[TestReport]:
    """Run the core battery on consecutive sequences and aggregate.

    The bitstream is cut into sequences of *sequence_length* bits. For each
    test, the aggregated report holds the per-sequence p-values, the
    proportion of passing sequences and the Kolmogorov-Smirnov uniformity
    p-value of the per-sequence p-values (when at least 5 sequences are
    available). It passes when both the proportion rule and the uniformity
    check pass.

    Parameters
    ----------
    bits :
        Bit sequence.
    sequence_length :
        Length (bits) of every sequence.
    tests :
        Subset of the battery tests. If *None*, all of them.
    alpha :
        Significance level.
    threshold :
        Proportion threshold. If *None*, the lower end of
        :py:func:`~phaserng.stattests.proportion_interval` for the
        number of sequences is used.
    block_size :
        Block size of the block frequency test.
    """
    bits = as_bits(bits)  # noqa
    n_sequences = bits.size // sequence_length
    if n_sequences < 2:
        raise TooShortError(
            f"At least 2 sequences of {sequence_length} bits are needed."
        )
    if threshold is None:
        threshold = proportion_interval(n_sequences, alpha)
    tests = CORE_TESTS if tests is None else str2list(tests)  # noqa

    per_sequence = [
        run_battery(seq, "core", tests, alpha, block_size)
        for seq in bits[: n_sequences * sequence_length].reshape(
            n_sequences, sequence_length
        )
    ]
    aggregated = []
    for kk, name in enumerate(tests):
        reports = [r[kk] for r in per_sequence]
        p_values = [r["p_value"] for r in reports]
        share = proportion(reports, alpha)
        verdict = proportion_rule(reports, alpha, threshold)
        statistic = share
        if n_sequences >= MIN_KS_VALUES:
            uniformity = ks_combine(p_values)
            statistic = uniformity["p_value"]
            if uniformity["verdict"] == "fail":
                verdict = "fail"
        aggregated.append(
            _report(name, p_values, statistic, alpha, verdict, share)
        )
        logger.info(
            "%s: %d/%d sequences passed, %s.",
            name,
            round(share * n_sequences),
            n_sequences,
            verdict,
        )
    return aggregated


def battery_verdict(reports: list[TestReport]) -> Verdict_type:  # noqa
    """Pass if every report passes."""
    return "pass" if all(r["verdict"] == "pass" for r in reports) else "fail"


def save_reports(reports: list[TestReport], filename: str | Path) -> None:
    """Save test reports as a JSON array, one object per test."""
    with open(filename, "w", encoding="utf-8") as fp:
        json.dump(reports, fp, indent=2)


def load_reports(filename: str | Path) -> list[TestReport]:
    """Load test reports saved with
    :py:func:`~phaserng.stattests.save_reports`."""
    with open(filename, encoding="utf-8") as fp:
        return json.load(fp)


def plot_autocorrelation(
    result: AutocorrResult,
    n_sd: float = 4.0,
    layout: Literal["constrained", "compressed", "tight", "none"] = "tight",
    ax_height: float = 3.6,
    ax_width: float = 5.0,
) -> matplotlib.figure.Figure:
    """Plot the autocorrelation coefficients for lags *j >= 1* with the
    band *±n_sd/√N* expected for independent samples.

    Parameters
    ----------
    result :
        Autocorrelation, see
        :py:func:`~phaserng.stattests.autocorrelation`.
    n_sd :
        Half-width of the band in standard deviations.
    layout:
        Figure layout.
    ax_height:
        Approximative height (inches) of the axes.
    ax_width:
        Approximative width (inches) of the axes.
    """
    coefficients = result["coefficients"][1:]
    lags = np.arange(1, coefficients.size + 1)
    band = n_sd * result["expected_sd"]
    cmap = plt.get_cmap(COLORMAP)  # noqa

    fig, ax = plt.subplots()
    ax.plot(lags, coefficients, ".", color=cmap(0), label="R(j)")
    ax.axhline(band, color=cmap(1), linestyle="--", label=f"±{n_sd:g}/sqrt(N)")
    ax.axhline(-band, color=cmap(1), linestyle="--")
    ax.set_xlabel("Lag j")
    ax.set_ylabel("Autocorrelation")
    ax.grid(True)
    ax.legend()
    fig.suptitle(
        f"Autocorrelation, N = {result['n']}, "
        f"mean = {coefficients.mean():.{NUM_DECIMALS}g}."  # noqa
    )

    fig.set_size_inches(ax_width, ax_height + 0.5)
    fig.set_layout_engine(layout)
    return fig


def plot_psd(
    result: FlatnessResult,
    layout: Literal["constrained", "compressed", "tight", "none"] = "tight",
    ax_height: float = 3.6,
    ax_width: float = 5.0,
) -> matplotlib.figure.Figure:
    """Plot a Welch power spectral density.

    Parameters
    ----------
    result :
        Spectral flatness, see
        :py:func:`~phaserng.stattests.spectral_flatness`.
    layout:
        Figure layout.
    ax_height:
        Approximative height (inches) of the axes.
    ax_width:
        Approximative width (inches) of the axes.
    """
    cmap = plt.get_cmap(COLORMAP)  # noqa

    fig, ax = plt.subplots()
    ax.semilogy(result["frequencies"][1:], result["psd"][1:], color=cmap(0))
    ax.set_xlabel("Frequency (fraction of the sampling rate)")
    ax.set_ylabel("PSD")
    ax.grid(True, which="both")
    fig.suptitle(
        f"Welch PSD, flatness {result['flatness']:.{NUM_DECIMALS}g}."  # noqa
    )

    fig.set_size_inches(ax_width, ax_height + 0.5)
    fig.set_layout_engine(layout)
    return fig
