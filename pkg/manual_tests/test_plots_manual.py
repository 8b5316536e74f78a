#  -*- coding: utf-8 -*-
# ===========================================================================
# This script is used for testing the plot functions
# by visual inspection.
# It is recommended to test both a clean and a noisy sweep, and raw samples
# with and without the bandwidth limit.
# ===========================================================================

import phaserng as phr
import numpy as np
import matplotlib.pyplot as plt


plt.ion()

# ===========================================================================
# Arange: SELECT THE FIXTURE TYPE
# ===========================================================================
sweep_type = ["clean", "noisy"]
fixture_type = "noisy"

bandwidth_cutoff = 0.05  # None for white samples

params = dict(phr.REFERENCE_PARAMS)
powers = np.linspace(0.05, 2.5, 40)
if fixture_type == "clean":
    sweep = phr.synthetic_sweep(params, powers)
else:
    sweep = phr.synthetic_sweep(params, powers, noise_sd=0.4, seed=1)

fit = phr.fit_noise_model(sweep)
power, gamma = phr.optimal_power(fit)

# ===========================================================================
# Act: noise model plots
# ===========================================================================
phr.plot_sweep_fit(sweep, fit)
phr.plot_sweep_fit(sweep, fit, layout="constrained", ax_width=8.0)

phr.plot_snr(fit)
phr.plot_snr(fit, powers=np.linspace(0.01, 10.0, 500))

# ===========================================================================
# Act: min-entropy plots
# ===========================================================================
phr.plot_bin_probabilities(phr.GaussianSpec(4.8), phr.AdcConfig())
# Coarse ADC, edge bins absorb the tails
phr.plot_bin_probabilities(7.0, phr.AdcConfig(bits=3, range_a=15.0))
# Clipping
phr.plot_bin_probabilities(20.0, phr.AdcConfig(bits=6, range_a=15.0))

# ===========================================================================
# Act: raw samples and output bits
# ===========================================================================
cfg = phr.SimConfig(
    params=fit,
    power=power,
    n_samples=2**18,
    bandwidth_cutoff=bandwidth_cutoff,
)
raw = phr.simulate_raw(cfg)

phr.plot_autocorrelation(phr.autocorrelation(raw.samples, 50))
phr.plot_autocorrelation(phr.autocorrelation(raw.samples, 200), n_sd=3.0)
phr.plot_psd(phr.spectral_flatness(raw.samples))

report = phr.evaluate(raw, fit, power)
ext = phr.output_length(1024, phr.h_min_rate(report), 2.0**-40)
bits = phr.stream_extract(raw, ext, phr.demo_seed(ext, 1))["bits"]

phr.plot_autocorrelation(phr.autocorrelation(bits, 100))
phr.plot_psd(phr.spectral_flatness(bits, segments=128))
