# -*- coding: utf-8 -*-

import logging
import pytest
import phaserng as phr
import numpy as np
import matplotlib
from matplotlib import pyplot as plt
from scipy import integrate, stats
from .fixture_data import *  # noqa

toy_adc = phr.AdcConfig(bits=3, range_a=15.0)
reference_adc = phr.AdcConfig(bits=8, range_a=15.0)


def density(v: float) -> float:
    return np.exp(-0.5 * v**2) / np.sqrt(2 * np.pi)


class Test_gaussian_cdf:
    def test_values(self) -> None:
        assert phr.gaussian_cdf(0.0) == 0.5
        assert phr.gaussian_cdf(0.5357) == pytest.approx(0.70391, abs=1e-5)
        assert isinstance(phr.gaussian_cdf(1.0), float)

    @pytest.mark.parametrize("x", [-3.0, -1.2, 0.3, 0.5357, 2.5])
    def test_quadrature_oracle(self, x: float) -> None:
        expected, _ = integrate.quad(density, -np.inf, x, epsabs=1e-13)
        assert phr.gaussian_cdf(x) == pytest.approx(expected, abs=1e-10)

    def test_lower_tail(self) -> None:
        x = np.array([-8.0, -20.0, -37.0])
        np.testing.assert_allclose(
            phr.gaussian_cdf(x), stats.norm.cdf(x), rtol=1e-12
        )
        assert np.all(phr.gaussian_cdf(x) > 0)


class Test_bin_probabilities:
    @pytest.mark.parametrize("sigma", [0.01, 1.0, 7.0, 50.0, 1e4])
    def test_normalization(self, any_adc, sigma: float) -> None:  # type: ignore
        probs = phr.bin_probabilities(sigma, any_adc)
        assert probs.size == any_adc.n_bins
        assert np.all(probs >= 0)
        assert np.sum(probs) == pytest.approx(1.0, abs=1e-12)

    def test_symmetry(self, any_adc) -> None:  # type: ignore
        probs = phr.bin_probabilities(3.0, any_adc)
        np.testing.assert_allclose(probs, probs[::-1], atol=1e-15)

    def test_toy_model(self) -> None:
        probs = phr.bin_probabilities(phr.GaussianSpec(7.0), toy_adc)
        assert probs[4] == pytest.approx(0.2039, abs=5e-4)
        assert probs[3] == pytest.approx(probs[4], abs=1e-15)
        # Edge bins absorb the tails.
        expected_edge = stats.norm.cdf(-11.25 / 7.0)
        assert probs[0] == pytest.approx(expected_edge, abs=1e-12)

    def test_quadrature_oracle(self) -> None:
        sigma = 7.0
        probs = phr.bin_probabilities(sigma, toy_adc)
        edges = toy_adc.edges()
        edges[0], edges[-1] = -np.inf, np.inf
        for kk in range(toy_adc.n_bins):
            expected, _ = integrate.quad(
                lambda v: density(v / sigma) / sigma,
                edges[kk],
                edges[kk + 1],
                epsabs=1e-13,
            )
            assert probs[kk] == pytest.approx(expected, abs=1e-10)

    def test_spec_and_float(self) -> None:
        np.testing.assert_array_equal(
            phr.bin_probabilities(phr.GaussianSpec(4.8), reference_adc),
            phr.bin_probabilities(4.8, reference_adc),
        )

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_invalid_sigma(self, sigma: float) -> None:
        with pytest.raises(ValueError):
            phr.GaussianSpec(sigma)
        with pytest.raises(ValueError):
            phr.bin_probabilities(sigma, reference_adc)


class Test_max_probability:
    def test_toy_model(self) -> None:
        p_max, code = phr.max_probability(7.0, toy_adc)
        assert p_max == pytest.approx(0.2039, abs=5e-4)
        assert code in (3, 4)

    def test_one_bit_adc(self) -> None:
        adc = phr.AdcConfig(bits=1, range_a=15.0)
        p_max, code = phr.max_probability(3.0, adc)
        assert p_max == 0.5
        assert code == 0

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 4.8, 5.0])
    def test_central_argmax(self, any_adc, sigma: float) -> None:  # type: ignore
        sigma = min(sigma, any_adc.range_a / 3)
        _, code = phr.max_probability(sigma, any_adc)
        center = any_adc.n_bins // 2
        assert code in (center - 1, center)

    @pytest.mark.parametrize("factor", [10.0, 30.0, 1000.0])
    def test_edge_argmax(self, any_adc, factor: float) -> None:  # type: ignore
        _, code = phr.max_probability(factor * any_adc.range_a, any_adc)
        assert code in (0, any_adc.n_bins - 1)


class Test_min_entropy_per_sample:
    def test_reference(self) -> None:
        h = phr.min_entropy_per_sample(4.8, reference_adc)
        assert h == pytest.approx(6.70, abs=0.03)
        assert h == pytest.approx(6.68, abs=0.005)

    def test_reference_from_total_variance(self) -> None:
        sigma_q2 = phr.quantum_variance(24.4, 21.0)
        h = phr.min_entropy_per_sample(np.sqrt(sigma_q2), reference_adc)
        assert h == pytest.approx(6.70, abs=0.03)

    def test_toy_model(self) -> None:
        h = phr.min_entropy_per_sample(7.0, toy_adc)
        assert h == pytest.approx(2.294, abs=5e-3)

    def test_one_bit_adc(self) -> None:
        adc = phr.AdcConfig(bits=1, range_a=15.0)
        for sigma in [0.1, 3.0, 100.0]:
            assert phr.min_entropy_per_sample(sigma, adc) == 1.0

    def test_monotone_in_sigma(self) -> None:
        sigma = np.linspace(0.5, 5.0, 40)
        h = [phr.min_entropy_per_sample(s, reference_adc) for s in sigma]
        assert np.all(np.diff(h) > 0)

    def test_bounded_by_adc_bits(self, any_adc) -> None:  # type: ignore
        for sigma in [0.01, 1.0, 5.0, 100.0]:
            h = phr.min_entropy_per_sample(sigma, any_adc)
            assert 0 <= h <= any_adc.bits + 1e-12


class Test_quantum_variance:
    def test_reference(self) -> None:
        assert phr.quantum_variance(24.4, 21) == pytest.approx(23.29, abs=0.01)
        assert phr.quantum_variance(10.0, 0.0) == 0.0

    @pytest.mark.parametrize("args", [(-1.0, 21.0), (24.4, -1.0)])
    def test_invalid(self, args: tuple[float, float]) -> None:
        with pytest.raises(ValueError):
            phr.quantum_variance(*args)


class Test_evaluate:
    def test_operating_point(self, operating_point_stream) -> None:  # type: ignore
        raw, params, power = operating_point_stream
        report = phr.evaluate(raw, params, power)

        assert report["n_samples"] == 200_000
        assert report["gamma"] == pytest.approx(21.2, abs=0.1)
        assert report["sigma_total_sq"] == pytest.approx(
            phr.model_variance(params, power), rel=0.02
        )
        assert report["sigma_total_sq_corrected"] == pytest.approx(
            report["sigma_total_sq"] - raw.adc.bin_width**2 / 12
        )
        assert report["sigma_quantum_sq"] == pytest.approx(
            phr.quantum_variance(report["sigma_total_sq"], report["gamma"])
        )
        # The simulated quantum variance is AQ*P.
        expected = phr.min_entropy_per_sample(
            np.sqrt(params["aq"] * power), raw.adc
        )
        assert report["h_min_per_sample"] == pytest.approx(expected, abs=0.02)
        assert 6.3 <= report["h_min_per_sample"] <= 6.5
        assert report["argmax_code"] in (127, 128)
        assert report["p_max"] == pytest.approx(
            2.0 ** -report["h_min_per_sample"]
        )
        assert len(report["autocorrelation"]) == 10
        assert report["adc"] == {"bits": 8, "range_a": 15.0}
        assert report["security_assumption"] == phr.SECURITY_ASSUMPTION

    def test_h_min_rate(self, operating_point_stream) -> None:  # type: ignore
        raw, params, power = operating_point_stream
        report = phr.evaluate(raw, params, power)
        assert phr.h_min_rate(report) == report["h_min_per_sample"] / 8

    def test_low_power(self, table1_params) -> None:  # type: ignore
        cfg = phr.SimConfig(params=table1_params, power=0.1, n_samples=50_000)
        report = phr.evaluate(phr.simulate_raw(cfg), table1_params, 0.1)
        assert report["gamma"] == pytest.approx(4.42, abs=0.01)
        assert report["h_min_per_sample"] < 5.0

    def test_too_few_samples(self) -> None:
        adc = phr.AdcConfig()
        rng = np.random.default_rng(0)
        raw = phr.RawSampleStream(rng.integers(0, 256, 9_999), adc)
        with pytest.raises(phr.InsufficientDataError):
            phr.evaluate(raw, REFERENCE_PARAMS, 0.95)

    def test_zero_variance(self) -> None:
        raw = phr.RawSampleStream(np.full(10_000, 128), phr.AdcConfig())
        with pytest.raises(phr.InsufficientDataError):
            phr.evaluate(raw, REFERENCE_PARAMS, 0.95)
        # It is a ValueError as well
        with pytest.raises(ValueError):
            phr.evaluate(raw, REFERENCE_PARAMS, 0.95)

    def test_correlated_samples_warning(self, table1_params, caplog) -> None:  # type: ignore
        cfg = phr.SimConfig(
            params=table1_params,
            power=0.95,
            n_samples=20_000,
            bandwidth_cutoff=0.05,
        )
        with caplog.at_level(logging.WARNING, logger="phaserng.minentropy"):
            report = phr.evaluate(phr.simulate_raw(cfg), table1_params, 0.95)
        assert report["autocorrelation"][0] > 0.5
        assert "autocorrelation" in caplog.text

    def test_save_load(self, operating_point_stream, tmp_path) -> None:  # type: ignore
        raw, params, power = operating_point_stream
        report = phr.evaluate(raw, params, power)
        filename = tmp_path / "entropy.json"
        phr.save_report(report, filename)
        assert phr.load_report(filename) == report

    def test_load_missing_key(self, tmp_path) -> None:  # type: ignore
        filename = tmp_path / "entropy.json"
        filename.write_text('{"gamma": 21.0}', encoding="utf-8")
        with pytest.raises(KeyError):
            phr.load_report(filename)


class Test_Plots:
    @pytest.mark.plots
    def test_plot_bin_probabilities(self) -> None:
        fig = phr.plot_bin_probabilities(7.0, toy_adc)
        assert isinstance(fig, matplotlib.figure.Figure)
        fig = phr.plot_bin_probabilities(phr.GaussianSpec(4.8), reference_adc)
        assert isinstance(fig, matplotlib.figure.Figure)
        plt.close("all")
