# mypy: show_error_codes
"""Module containing everything related to the noise model of the source.

The variance of the detector a.c. voltage is modeled as a quadratic
function of the optical power *P*,

.. math::

    \\langle V^2 \\rangle = AQ\\,P + AC\\,P^2 + F,

where *AQP* is the quantum signal and *ACP² + F* is the classical noise.
"""

from __future__ import annotations

import json
import logging
import warnings
from pathlib import Path
from typing import TypedDict, Literal

import matplotlib
import numpy as np
import pandas as pd
import scipy.linalg as linalg
from matplotlib import pyplot as plt
from scipy import stats

from .config import *  # noqa
from .utils import *  # noqa

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["power_mw", "variance_mv2"]
FIT_KEYS = ["aq", "ac", "f", "ci_aq", "ci_ac", "ci_f", "alpha", "rss"]
CI_KEYS = ["ci_aq", "ci_ac", "ci_f"]


class DegenerateSweepError(ValueError):
    """The power sweep has fewer than three distinct powers."""


class ZeroDenominatorError(ZeroDivisionError):
    """Both classical coefficients are zero."""


class NoInteriorMaximumError(ValueError):
    """The SNR is monotone in the power and has no finite optimum."""


class NegativeCoefficientWarning(UserWarning):
    """A fitted coefficient came out negative."""


class PowerSweepPoint(TypedDict):
    """One measurement of a power sweep."""

    power: float  #: Optical power (mW).
    variance: float  #: Variance of the output a.c. voltage (mV^2).


class NoiseModelParams(TypedDict):
    """Coefficients of the quadratic noise model.

    Only the products *AQ* and *AC* are measurable, hence the individual
    gain, quantum and classical constants are not stored.
    """

    aq: float  #: Quantum coefficient (mV^2/mW).
    ac: float  #: Classical coefficient (mV^2/mW^2).
    f: float  #: Background noise (mV^2).
    ci_aq: float  #: Confidence half-width of *aq*.
    ci_ac: float  #: Confidence half-width of *ac*.
    ci_f: float  #: Confidence half-width of *f*.
    alpha: float  #: Confidence level of the half-widths.


class NoiseFit(NoiseModelParams):
    """Result of :py:func:`~phaserng.noise_model.fit_noise_model`."""

    rss: float  #: Residual sum of squares (mV^4).
    dof: int  #: Residual degrees of freedom.
    negative: list[str]  #: Names of the coefficients that came out negative.


class SnrCurvePoint(TypedDict):
    """A point of the SNR curve."""

    power: float  #: Optical power (mW).
    gamma: float  #: Quantum signal to classical noise ratio.


def validate_noise_params(params: NoiseModelParams) -> None:
    """Check that *params* satisfies the noise model invariants.

    Parameters
    ----------
    params :
        Noise model coefficients.

    Raises
    ------
    KeyError
        If a coefficient is missing.
    ValueError
        If *aq* is not positive, if *ac* or *f* are negative, if *alpha*
        is not in (0, 1) or if a confidence half-width is negative.
    """
    for key in ("aq", "ac", "f"):
        if key not in params:
            raise KeyError(f"Missing noise model coefficient '{key}'.")
    if not params["aq"] > 0:
        raise ValueError("Coefficient 'aq' must be positive.")
    if params["ac"] < 0 or params["f"] < 0:
        raise ValueError("Coefficients 'ac' and 'f' must be non-negative.")
    if "alpha" in params and not 0 < params["alpha"] < 1:
        raise ValueError("Confidence level 'alpha' must be in (0, 1).")
    for key in ("ci_aq", "ci_ac", "ci_f"):
        if params.get(key, 0.0) < 0:  # type: ignore
            raise ValueError(f"Confidence half-width '{key}' is negative.")


def _sweep_arrays(
    sweep: list[PowerSweepPoint] | pd.DataFrame,
) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(sweep, pd.DataFrame):
        not_found = difference_lists_of_str(  # noqa
            SWEEP_COLUMNS, list(sweep.columns)
        )
        if not_found:
            raise KeyError(f"Sweep column(s) {not_found} not found.")
        power = sweep["power_mw"].to_numpy(dtype=float)
        variance = sweep["variance_mv2"].to_numpy(dtype=float)
    else:
        power = np.array([p["power"] for p in sweep], dtype=float)
        variance = np.array([p["variance"] for p in sweep], dtype=float)

    if np.any(power <= 0):
        raise ValueError("Sweep powers must be positive.")
    if np.any(variance < 0):
        raise ValueError("Sweep variances must be non-negative.")
    return power, variance


def model_variance(
    params: NoiseModelParams, power: float | np.ndarray
) -> float | np.ndarray:
    """Return the modeled voltage variance *AQ P + AC P² + F* (mV^2).

    Parameters
    ----------
    params :
        Noise model coefficients.
    power :
        Optical power (mW).
    """
    return (
        params["aq"] * power + params["ac"] * np.square(power) + params["f"]
    )


def fit_noise_model(
    sweep: list[PowerSweepPoint] | pd.DataFrame,
    alpha: float = CONFIDENCE,  # noqa
) -> NoiseFit:
    """Fit the quadratic noise model to a power sweep.

    The coefficients are the ordinary least-squares solution on the basis
    *{P, P², 1}*, obtained from the normal equations with a pivoted LU
    solve. The confidence half-widths are Student-t intervals built from the
    residual variance and the diagonal of the inverted normal matrix.

    Negative coefficients are not clamped: they are reported in the
    *negative* key of the result and a
    :py:class:`~phaserng.noise_model.NegativeCoefficientWarning` is issued.

    Example
    -------
    >>> import phaserng as phr
    >>> sweep = phr.read_sweep_csv("sweep.csv")
    >>> fit = phr.fit_noise_model(sweep, alpha=0.99)
    >>> fit["aq"], fit["ci_aq"]


    Parameters
    ----------
    sweep :
        Power sweep, either as a list of
        :py:class:`~phaserng.noise_model.PowerSweepPoint` or as a
        *pandas* DataFrame with columns *power_mw* and *variance_mv2*.
    alpha :
        Confidence level of the half-widths.

    Raises
    ------
    DegenerateSweepError
        If the sweep has fewer than three distinct powers.
    ValueError
        If *alpha* is not in (0, 1).
    """
    if not 0 < alpha < 1:
        raise ValueError("Confidence level 'alpha' must be in (0, 1).")
    power, variance = _sweep_arrays(sweep)
    if len(np.unique(power)) < 3:
        raise DegenerateSweepError(
            "At least three distinct powers are needed to fit the model."
        )

    X = np.column_stack((power, power**2, np.ones_like(power)))
    A = X.T @ X
    b = X.T @ variance

    # Equilibrate the normal matrix, the three columns live on different
    # scales.
    scale = 1.0 / np.sqrt(np.diag(A))
    lu_piv = linalg.lu_factor(A * np.outer(scale, scale))
    coef = scale * linalg.lu_solve(lu_piv, scale * b)

    residuals = variance - X @ coef
    rss = float(residuals @ residuals)
    dof = len(power) - 3

    if dof > 0:
        A_inv = np.outer(scale, scale) * linalg.lu_solve(lu_piv, np.eye(3))
        sigma2 = rss / dof
        t_quantile = stats.t.ppf((1.0 + alpha) / 2.0, dof)
        ci = t_quantile * np.sqrt(sigma2 * np.abs(np.diag(A_inv)))
    else:
        logger.warning(
            "Zero residual degrees of freedom: "
            "confidence intervals are unbounded."
        )
        ci = np.full(3, np.inf)

    names = ["aq", "ac", "f"]
    negative = [name for name, c in zip(names, coef) if c < 0]
    if negative:
        warnings.warn(
            f"Fitted coefficient(s) {negative} are negative.",
            NegativeCoefficientWarning,
            stacklevel=2,
        )

    fit: NoiseFit = {
        "aq": float(coef[0]),
        "ac": float(coef[1]),
        "f": float(coef[2]),
        "ci_aq": float(ci[0]),
        "ci_ac": float(ci[1]),
        "ci_f": float(ci[2]),
        "alpha": alpha,
        "rss": rss,
        "dof": dof,
        "negative": negative,
    }
    logger.info(
        "Noise model fit: AQ=%.4g±%.2g, AC=%.4g±%.2g, F=%.4g±%.2g (alpha=%g).",
        fit["aq"],
        fit["ci_aq"],
        fit["ac"],
        fit["ci_ac"],
        fit["f"],
        fit["ci_f"],
        alpha,
    )
    return fit


def snr(
    params: NoiseModelParams, power: float | np.ndarray
) -> float | np.ndarray:
    """Return the quantum signal to classical noise ratio
    :math:`\\gamma = AQ P / (AC P^2 + F)`.

    Parameters
    ----------
    params :
        Noise model coefficients.
    power :
        Optical power (mW). It can be a scalar or an array.

    Raises
    ------
    ZeroDenominatorError
        If *ac* and *f* are both zero.
    ValueError
        If any power is not positive.
    """
    if params["ac"] == 0 and params["f"] == 0:
        raise ZeroDenominatorError(
            "The classical noise 'ac*P^2 + f' is identically zero."
        )
    P = np.asarray(power, dtype=float)
    if np.any(P <= 0):
        raise ValueError("Power must be positive.")
    gamma = params["aq"] * P / (params["ac"] * P**2 + params["f"])
    if gamma.ndim == 0:
        return float(gamma)
    return gamma


def optimal_power(params: NoiseModelParams) -> tuple[float, float]:
    """Return the power that maximizes the SNR and the SNR at that power.

    The optimum is :math:`P^* = \\sqrt{F/AC}` and
    :math:`\\gamma(P^*) = AQ P^* / (2F)`.

    Parameters
    ----------
    params :
        Noise model coefficients.

    Raises
    ------
    NoInteriorMaximumError
        If *ac* or *f* is not positive.
    """
    if params["ac"] <= 0 or params["f"] <= 0:
        raise NoInteriorMaximumError(
            "The SNR is monotone when 'ac' or 'f' is zero."
        )
    p_star = float(np.sqrt(params["f"] / params["ac"]))
    gamma = params["aq"] * p_star / (2.0 * params["f"])
    return p_star, float(gamma)


def snr_curve(
    params: NoiseModelParams,
    powers: np.ndarray | None = None,
    n_points: int = 10_000,
) -> pd.DataFrame:
    """Return the SNR as a function of the power.

    If *powers* is not given, a logarithmic grid of *n_points* points is
    used, spanning a decade below and a decade above the optimal power (or
    0.01 to 10 mW when the SNR has no interior maximum).

    The returned DataFrame has one row per
    :py:class:`~phaserng.noise_model.SnrCurvePoint`.

    Parameters
    ----------
    params :
        Noise model coefficients.
    powers :
        Optical powers (mW).
    n_points :
        Number of grid points when *powers* is not given.
    """
    if powers is None:
        try:
            p_star, _ = optimal_power(params)
            lo, hi = np.log10(p_star) - 1.0, np.log10(p_star) + 1.0
        except NoInteriorMaximumError:
            lo, hi = -2.0, 1.0
        powers = np.logspace(lo, hi, n_points)
    powers = np.asarray(powers, dtype=float)
    return pd.DataFrame(
        {"power": powers, "gamma": np.atleast_1d(snr(params, powers))}
    )


def synthetic_sweep(
    params: NoiseModelParams,
    powers: np.ndarray,
    noise_sd: float = 0.0,
    seed: int | None = None,
) -> pd.DataFrame:
    """Generate a power sweep from known coefficients.

    Gaussian measurement noise with standard deviation *noise_sd* (mV^2)
    is added to the modeled variances; negative draws are kept, as a real
    instrument reading after background subtraction could be.

    Parameters
    ----------
    params :
        Noise model coefficients used to generate the data.
    powers :
        Optical powers (mW).
    noise_sd :
        Standard deviation of the measurement noise (mV^2).
    seed :
        Seed of the measurement noise generator.
    """
    if noise_sd < 0:
        raise ValueError("'noise_sd' must be non-negative.")
    powers = np.asarray(powers, dtype=float)
    rng = np.random.default_rng(seed)
    variance = model_variance(params, powers) + noise_sd * rng.standard_normal(
        powers.size
    )
    return pd.DataFrame({"power_mw": powers, "variance_mv2": variance})


def read_sweep_csv(filename: str | Path) -> pd.DataFrame:
    """Read a power sweep CSV file with header *power_mw,variance_mv2*.

    Raises
    ------
    KeyError
        If the header does not contain the two expected columns.
    """
    df = pd.read_csv(filename, encoding="utf-8")
    _sweep_arrays(df)
    return df.loc[:, SWEEP_COLUMNS]


def write_sweep_csv(sweep: pd.DataFrame, filename: str | Path) -> None:
    """Write a power sweep to a CSV file (UTF-8, LF line endings)."""
    sweep.loc[:, SWEEP_COLUMNS].to_csv(
        filename, index=False, encoding="utf-8", lineterminator="\n"
    )


def save_fit(fit: NoiseFit | NoiseModelParams, filename: str | Path) -> None:
    """Save noise model coefficients as JSON.

    Unbounded confidence half-widths (no residual degrees of freedom) are
    written as *null*.
    """
    out = {key: fit.get(key, 0.0) for key in FIT_KEYS}  # type: ignore
    for key in CI_KEYS:
        if not np.isfinite(out[key]):
            out[key] = None
    out["negative"] = fit.get("negative", [])  # type: ignore
    with open(filename, "w", encoding="utf-8") as fp:
        json.dump(out, fp, indent=2, allow_nan=False)


def load_fit(filename: str | Path) -> NoiseFit:
    """Load noise model coefficients saved with
    :py:func:`~phaserng.noise_model.save_fit`."""
    with open(filename, encoding="utf-8") as fp:
        data = json.load(fp)
    not_found = difference_lists_of_str(FIT_KEYS, list(data.keys()))  # noqa
    if not_found:
        raise KeyError(f"Key(s) {not_found} not found in '{filename}'.")
    for key in CI_KEYS:
        if data[key] is None:
            data[key] = np.inf
    data.setdefault("negative", [])
    data.setdefault("dof", 0)
    return data  # type: ignore


def plot_sweep_fit(
    sweep: list[PowerSweepPoint] | pd.DataFrame,
    params: NoiseModelParams,
    layout: Literal["constrained", "compressed", "tight", "none"] = "tight",
    ax_height: float = 3.6,
    ax_width: float = 5.0,
) -> matplotlib.figure.Figure:
    """Plot the measured variances along with the fitted model.

    The quantum signal *AQP* and the classical noise *ACP² + F* are shown
    as separate curves.

    You are free to manipulate the returned figure as you want by using any
    method of the class `matplotlib.figure.Figure`.

    Parameters
    ----------
    sweep :
        Power sweep.
    params :
        Noise model coefficients.
    layout:
        Figure layout.
    ax_height:
        Approximative height (inches) of the axes.
    ax_width:
        Approximative width (inches) of the axes.
    """
    power, variance = _sweep_arrays(sweep)
    grid = np.linspace(0.0, power.max() * 1.05, 400)
    cmap = plt.get_cmap(COLORMAP)  # noqa

    fig, ax = plt.subplots()
    ax.plot(power, variance, "o", color=cmap(0), label="measured")
    ax.plot(grid, model_variance(params, grid), color=cmap(1), label="fit")
    ax.plot(
        grid, params["aq"] * grid, "--", color=cmap(2), label="quantum signal"
    )
    ax.plot(
        grid,
        params["ac"] * grid**2 + params["f"],
        "--",
        color=cmap(3),
        label="classical noise",
    )
    ax.set_xlabel("Power (mW)")
    ax.set_ylabel("Variance (mV^2)")
    ax.grid(True)
    ax.legend()
    fig.suptitle("Output voltage variance.")

    fig.set_size_inches(ax_width, ax_height + 0.5)
    fig.set_layout_engine(layout)
    return fig


def plot_snr(
    params: NoiseModelParams,
    powers: np.ndarray | None = None,
    layout: Literal["constrained", "compressed", "tight", "none"] = "tight",
    ax_height: float = 3.6,
    ax_width: float = 5.0,
) -> matplotlib.figure.Figure:
    """Plot the SNR as a function of the power and mark its maximum.

    Parameters
    ----------
    params :
        Noise model coefficients.
    powers :
        Optical powers (mW). See :py:func:`~phaserng.noise_model.snr_curve`.
    layout:
        Figure layout.
    ax_height:
        Approximative height (inches) of the axes.
    ax_width:
        Approximative width (inches) of the axes.
    """
    curve = snr_curve(params, powers)
    cmap = plt.get_cmap(COLORMAP)  # noqa

    fig, ax = plt.subplots()
    ax.semilogx(curve["power"], curve["gamma"], color=cmap(0), label="model")
    try:
        p_star, gamma = optimal_power(params)
        ax.plot(
            p_star,
            gamma,
            "o",
            color=cmap(1),
            label=f"optimum ({p_star:.3g} mW, {gamma:.3g})",
        )
    except NoInteriorMaximumError:
        pass
    ax.set_xlabel("Power (mW)")
    ax.set_ylabel("gamma")
    ax.grid(True, which="both")
    ax.legend()
    fig.suptitle("Quantum signal to classical noise ratio.")

    fig.set_size_inches(ax_width, ax_height + 0.5)
    fig.set_layout_engine(layout)
    return fig
