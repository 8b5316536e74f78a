# mypy: show_error_codes
"""Module containing the simulated analog front end: Gaussian phase-noise
voltages quantized by a symmetric uniform ADC.

Random draws use *numpy*'s PCG64 bit generator and its ziggurat normal
sampler. Each block of samples gets its own substream, derived from
*(seed, stream, block index)* through a *numpy* ``SeedSequence``, so
that blocks can be generated in any order or in parallel.
"""

from __future__ import annotations

import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy.signal as signal

from .config import *  # noqa
from .utils import *  # noqa
from .noise_model import NoiseModelParams

logger = logging.getLogger(__name__)

RAW_MAGIC = b"QRNGRAW1"
RAW_HEADER = struct.Struct("<8sB3xf")  # magic, bits, reserved, range_a

PRNG_ALGORITHM = "PCG64"
NORMAL_TRANSFORM = "ziggurat"

# Substream identifiers
_QUANTUM_STREAM = 0
_CLASSICAL_STREAM = 1


@dataclass(frozen=True)
class AdcConfig:
    """Uniform ADC spanning *[-range_a, range_a]* with *2**bits* equally
    spaced bins.

    Bins are lower-inclusive, *[-a + kΔ, -a + (k+1)Δ)*, except for the top
    bin which is closed.
    """

    bits: int = 8  #: Resolution in bits.
    range_a: float = 15.0  #: Half-range *a* (mV).

    def __post_init__(self) -> None:
        if isinstance(self.bits, bool) or not isinstance(
            self.bits, (int, np.integer)
        ):
            raise TypeError("ADC 'bits' must be an integer.")
        if not 1 <= self.bits <= 16:
            raise ValueError("ADC 'bits' must be between 1 and 16.")
        if not self.range_a > 0:
            raise ValueError("ADC 'range_a' must be positive.")

    @property
    def n_bins(self) -> int:
        """Number of codes, *2**bits*."""
        return 2**self.bits

    @property
    def bin_width(self) -> float:
        """Bin width *Δ = 2a / 2**bits* (mV)."""
        return 2.0 * self.range_a / self.n_bins

    @property
    def dtype(self) -> type:
        """Smallest unsigned integer type holding a code."""
        return np.uint8 if self.bits <= 8 else np.uint16

    def edges(self) -> np.ndarray:
        """Bin edges *u_k = -a + kΔ*, *k = 0..2**bits* (mV)."""
        return -self.range_a + self.bin_width * np.arange(self.n_bins + 1)

    def midpoints(self) -> np.ndarray:
        """Bin midpoints *-a + (k + 0.5)Δ* (mV)."""
        return -self.range_a + self.bin_width * (np.arange(self.n_bins) + 0.5)


@dataclass(frozen=True)
class SimConfig:
    """Simulation setup.

    The quantum signal has variance *AQ P* and the classical noise
    *AC P² + F*. They are drawn from two independent seeded streams.
    """

    params: NoiseModelParams  #: Noise model coefficients.
    power: float  #: Optical power (mW).
    adc: AdcConfig = field(default_factory=AdcConfig)  #: ADC.
    n_samples: int = 1_000_000  #: Number of samples.
    quantum_seed: int = 1  #: Seed of the quantum signal.
    classical_seed: int = 2  #: Seed of the classical noise.
    bandwidth_cutoff: float | None = None
    """Cut-off of the optional detector low-pass stage, as a fraction of
    the sampling rate in (0, 0.5]. *None* disables the stage."""
    block_size: int = 2**20  #: Samples per PRNG substream.
    workers: int = 1  #: Threads used to draw the blocks.

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("'n_samples' must be at least 1.")
        if not self.power > 0:
            raise ValueError("'power' must be positive.")
        if self.quantum_seed == self.classical_seed:
            raise ValueError(
                "The quantum and classical noise must use different seeds."
            )
        if min(self.quantum_seed, self.classical_seed) < 0:
            raise ValueError("Seeds must be non-negative integers.")
        if self.bandwidth_cutoff is not None and not (
            0 < self.bandwidth_cutoff <= 0.5
        ):
            raise ValueError("'bandwidth_cutoff' must be in (0, 0.5].")
        if self.block_size < 1 or self.workers < 1:
            raise ValueError("'block_size' and 'workers' must be positive.")
        if min(self.params["aq"], self.params["ac"], self.params["f"]) < 0:
            raise ValueError("Noise model coefficients must be non-negative.")

    @property
    def quantum_variance(self) -> float:
        """Variance of the quantum signal, *AQ P* (mV^2)."""
        return float(self.params["aq"] * self.power)

    @property
    def classical_variance(self) -> float:
        """Variance of the classical noise, *AC P² + F* (mV^2)."""
        return float(self.params["ac"] * self.power**2 + self.params["f"])


@dataclass
class RawSampleStream:
    """Sequence of ADC codes."""

    samples: np.ndarray  #: ADC codes in *[0, 2**bits - 1]*.
    adc: AdcConfig  #: ADC that produced the codes.
    metadata: dict[str, Any] = field(default_factory=dict)
    """Provenance of the stream (PRNG algorithm, seeds, power, ...)."""

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 1:
            raise ValueError("Samples must be a 1-D array.")
        if self.samples.size and (
            self.samples.min() < 0 or self.samples.max() >= self.adc.n_bins
        ):
            raise ValueError(
                f"Samples must be codes in [0, {self.adc.n_bins - 1}]."
            )
        self.samples = self.samples.astype(self.adc.dtype)

    def __len__(self) -> int:
        return int(self.samples.size)

    def to_bits(self) -> np.ndarray:
        """Return the raw bitstream, *bits* bits per sample, MSB-first."""
        return samples_to_bits(self.samples, self.adc.bits)


def quantize(
    voltage: float | np.ndarray, adc: AdcConfig
) -> int | np.ndarray:
    """Return the ADC code of *voltage*.

    The code is *floor((v + a)/Δ)* clamped to *[0, 2**bits - 1]*, so that
    the edge bins absorb the out-of-range tails.

    Parameters
    ----------
    voltage :
        Voltage (mV). It can be a scalar or an array.
    adc :
        ADC configuration.
    """
    v = np.asarray(voltage, dtype=float)
    codes = np.floor((v + adc.range_a) / adc.bin_width)
    codes = np.clip(codes, 0, adc.n_bins - 1).astype(adc.dtype)
    if codes.ndim == 0:
        return int(codes)
    return codes


def dequantize(codes: int | np.ndarray, adc: AdcConfig) -> float | np.ndarray:
    """Return the midpoint voltage (mV) of the bins *codes*."""
    v = adc.midpoints()[np.asarray(codes, dtype=np.int64)]
    if v.ndim == 0:
        return float(v)
    return v


def samples_to_bits(samples: np.ndarray, bits: int) -> np.ndarray:
    """Expand ADC codes into a bitstream of *bits* bits per sample,
    most significant bit first."""
    samples = np.asarray(samples)
    if bits == 8:
        return np.unpackbits(samples.astype(np.uint8), bitorder="big")
    shifts = np.arange(bits - 1, -1, -1, dtype=np.uint16)
    expanded = (samples.astype(np.uint16)[:, np.newaxis] >> shifts) & 1
    return expanded.astype(np.uint8).ravel()


def _substream(seed: int, stream: int, block: int) -> np.random.Generator:
    seq = np.random.SeedSequence(seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.PCG64(seq))


def _block_bounds(config: SimConfig) -> list[tuple[int, int]]:
    n, size = config.n_samples, config.block_size
    return [(start, min(start + size, n)) for start in range(0, n, size)]


def _draw_block(
    config: SimConfig, block: int, length: int
) -> tuple[np.ndarray, np.ndarray]:
    rng_q = _substream(config.quantum_seed, _QUANTUM_STREAM, block)
    rng_c = _substream(config.classical_seed, _CLASSICAL_STREAM, block)
    v_q = np.sqrt(config.quantum_variance) * rng_q.standard_normal(length)
    v_c = np.sqrt(config.classical_variance) * rng_c.standard_normal(length)
    return v_q, v_c


def _draw_all(config: SimConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    bounds = _block_bounds(config)
    jobs = [(kk, stop - start) for kk, (start, stop) in enumerate(bounds)]
    if config.workers > 1 and len(jobs) > 1:
        # map() keeps the block order.
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(lambda j: _draw_block(config, *j), jobs))
    return [_draw_block(config, *j) for j in jobs]


def simulate_components(config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return the quantum signal and the classical noise voltages (mV)
    before summation, filtering and quantization.

    Parameters
    ----------
    config :
        Simulation setup.
    """
    blocks = _draw_all(config)
    v_q = np.concatenate([b[0] for b in blocks])
    v_c = np.concatenate([b[1] for b in blocks])
    return v_q, v_c


def _bandwidth_coefficients(cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    # Single-pole low-pass y[k] = (1 - a) y[k-1] + g a u[k].
    # The gain g keeps the output variance equal to the input variance.
    a = 1.0 - np.exp(-2.0 * np.pi * cutoff)
    gain = np.sqrt((2.0 - a) / a)
    return np.array([gain * a]), np.array([1.0, a - 1.0])


def simulate_raw(config: SimConfig) -> RawSampleStream:
    """Simulate the raw ADC samples of the source.

    Each sample is *quantize(v_q + v_c)* where *v_q ~ N(0, AQ P)* and
    *v_c ~ N(0, AC P² + F)* are iid draws from the two independent
    streams. If *bandwidth_cutoff* is set, the summed voltage goes through a
    variance-preserving single-pole low-pass stage before quantization.

    Identical configurations, seeds included, give identical streams,
    regardless of the number of *workers*.

    Example
    -------
    >>> import phaserng as phr
    >>> cfg = phr.SimConfig(phr.REFERENCE_PARAMS, power=0.95, n_samples=10**6)
    >>> raw = phr.simulate_raw(cfg)


    Parameters
    ----------
    config :
        Simulation setup.
    """
    logger.info(
        "Simulating %d samples at P=%g mW (quantum %.4g mV^2, classical %.4g mV^2).",
        config.n_samples,
        config.power,
        config.quantum_variance,
        config.classical_variance,
    )
    adc = config.adc
    codes = np.empty(config.n_samples, dtype=adc.dtype)
    if config.bandwidth_cutoff is not None:
        b, a = _bandwidth_coefficients(config.bandwidth_cutoff)
        zi = np.zeros(1)

    bounds = _block_bounds(config)
    for (start, stop), (v_q, v_c) in zip(bounds, _draw_all(config)):
        v = v_q + v_c
        if config.bandwidth_cutoff is not None:
            # The filter state is carried over between blocks.
            v, zi = signal.lfilter(b, a, v, zi=zi)
        codes[start:stop] = quantize(v, adc)
        logger.debug("Block [%d, %d) quantized.", start, stop)

    metadata = {
        "prng": PRNG_ALGORITHM,
        "normal_transform": NORMAL_TRANSFORM,
        "numpy_version": np.__version__,
        "quantum_seed": config.quantum_seed,
        "classical_seed": config.classical_seed,
        "block_size": config.block_size,
        "power": config.power,
        "bandwidth_cutoff": config.bandwidth_cutoff,
    }
    return RawSampleStream(samples=codes, adc=adc, metadata=metadata)


def write_raw(stream: RawSampleStream, filename: str | Path) -> None:
    """Write a raw sample file.

    The file has a 16-byte header (magic *QRNGRAW1*, bits as one byte,
    three reserved bytes, *range_a* as a little-endian float32) followed by
    one byte per sample for ADCs up to 8 bits, two little-endian bytes
    otherwise.
    """
    header = RAW_HEADER.pack(RAW_MAGIC, stream.adc.bits, stream.adc.range_a)
    if stream.adc.bits <= 8:
        payload = stream.samples.astype(np.uint8).tobytes()
    else:
        payload = stream.samples.astype("<u2").tobytes()
    with open(filename, "wb") as fp:
        fp.write(header)
        fp.write(payload)


def read_raw(filename: str | Path) -> RawSampleStream:
    """Read a raw sample file written by
    :py:func:`~phaserng.source.write_raw`.

    Raises
    ------
    ValueError
        If the file is not a raw sample file.
    """
    with open(filename, "rb") as fp:
        content = fp.read()
    if len(content) < RAW_HEADER.size:
        raise ValueError(f"'{filename}' is too short to be a raw sample file.")
    magic, bits, range_a = RAW_HEADER.unpack_from(content)
    if magic != RAW_MAGIC:
        raise ValueError(f"'{filename}' is not a raw sample file.")
    # float32 round trip of range_a
    adc = AdcConfig(bits=int(bits), range_a=float(np.float32(range_a)))
    dtype = np.uint8 if bits <= 8 else np.dtype("<u2")
    samples = np.frombuffer(content[RAW_HEADER.size :], dtype=dtype)
    return RawSampleStream(samples=samples.copy(), adc=adc)
