# mypy: show_error_codes
"""Module containing the end-to-end pipeline and the extractor benchmark.

The pipeline runs the stages *fit, optimize, simulate, entropy, extract,
test* in this order. Every artifact is first written with a ``.partial``
suffix and renamed once its stage succeeds, so that a failed stage leaves
its partial output on disk and no downstream artifact.
"""

from __future__ import annotations

import contextlib
import dataclasses
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, TypedDict

import numpy as np
import tomli_w

from .config import *  # noqa
from .utils import *  # noqa
from .noise_model import (
    FIT_KEYS,
    NoiseModelParams,
    fit_noise_model,
    optimal_power,
    read_sweep_csv,
    save_fit,
    snr,
)
from .source import AdcConfig, SimConfig, simulate_raw, write_raw
from .minentropy import evaluate, h_min_rate, save_report
from .extractors import (
    ExtractorParams,
    LengthMismatchError,
    ToeplitzHash,
    TrevisanExtractor,
    demo_seed,
    output_length,
    read_seed,
    stream_extract,
    trevisan_params,
    write_bits,
    write_seed,
)
from .stattests import (
    autocorrelation,
    battery_verdict,
    run_battery,
    save_reports,
    sequence_battery,
)

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib  # type: ignore

logger = logging.getLogger(__name__)

STAGES = ["fit", "optimize", "simulate", "entropy", "extract", "test"]

ARTIFACTS = {
    "fit": "fit.json",
    "raw": "raw.bin",
    "entropy": "entropy.json",
    "seed": "seed.bin",
    "bits": "bits.bin",
    "tests": "tests.json",
    "summary": "summary.json",
    "timings": "timings.json",
}


class PipelineStageError(RuntimeError):
    """A pipeline stage failed. The original exception is chained."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"Stage '{stage}' failed: {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    """Configuration of :py:func:`~phaserng.pipeline.run_pipeline`.

    Every source of randomness has an explicit seed. Without a *seed_file*
    the extractor seed is derived from *demo_seed*, which must then be set.
    """

    output_dir: str = "phaserng_out"  #: Directory of the artifacts.
    sweep_csv: str | None = None
    """Power sweep to fit. If *None*, *params* are used as they are."""
    params: dict[str, float] = field(
        default_factory=lambda: dict(REFERENCE_PARAMS)  # noqa
    )  #: Noise model coefficients, used when there is no sweep.
    power: float | None = None
    """Optical power (mW). If *None*, the optimal power is used."""
    adc_bits: int = 8  #: ADC resolution.
    range_a: float = 15.0  #: ADC half-range (mV).
    n_samples: int = 10_000_000  #: Number of raw samples.
    quantum_seed: int = 1  #: Seed of the quantum signal.
    classical_seed: int = 2  #: Seed of the classical noise.
    bandwidth_cutoff: float | None = None  #: Detector low-pass cut-off.
    block_size: int = 2**20  #: Samples per PRNG substream.
    workers: int = 1  #: Simulation threads.
    algorithm: Extractor_type = "toeplitz"  # noqa
    n: int = 4096  #: Extractor input block (bits).
    epsilon: float = EPSILON  # noqa
    seed_file: str | None = None  #: Extractor seed file.
    demo_seed: int | None = None  #: Seed of a demo extractor seed.
    battery: Battery_type = "core"  # noqa
    alpha: float = ALPHA  # noqa
    sequence_length: int | None = None
    """If set, the battery runs on sequences of this many bits."""
    autocorr_lags: int = 100  #: Lags of the output autocorrelation.
    schema_version: int = SCHEMA_VERSION  # noqa

    def __post_init__(self) -> None:
        if self.algorithm not in EXTRACTOR_KIND:  # noqa
            raise ValueError(f"'algorithm' must be one of {EXTRACTOR_KIND}.")  # noqa
        if self.battery not in BATTERY_KIND:  # noqa
            raise ValueError(f"'battery' must be one of {BATTERY_KIND}.")  # noqa
        if self.schema_version != SCHEMA_VERSION:  # noqa
            raise ValueError(
                f"Unsupported schema version {self.schema_version}."
            )

    def to_dict(self) -> dict[str, Any]:
        """Return the configuration without its unset (*None*) entries."""
        return {
            k: v for k, v in dataclasses.asdict(self).items() if v is not None
        }


def save_config(config: PipelineConfig, filename: str | Path) -> None:
    """Save a pipeline configuration as TOML."""
    with open(filename, "wb") as fp:
        tomli_w.dump(config.to_dict(), fp)


def load_config(filename: str | Path) -> PipelineConfig:
    """Load a pipeline configuration saved with
    :py:func:`~phaserng.pipeline.save_config`.

    Raises
    ------
    KeyError
        If the file contains unknown keys.
    """
    with open(filename, mode="rb") as fp:
        data = tomllib.load(fp)
    fields = [f.name for f in dataclasses.fields(PipelineConfig)]
    unknown = difference_lists_of_str(list(data.keys()), fields)  # noqa
    if unknown:
        raise KeyError(f"Unknown key(s) {unknown} in '{filename}'.")
    return PipelineConfig(**data)


class PipelineSummary(TypedDict):
    """Result of :py:func:`~phaserng.pipeline.run_pipeline`."""

    params: dict[str, float]  #: Noise model coefficients.
    power: float  #: Operating power (mW).
    gamma: float  #: Quantum signal to classical noise ratio.
    h_min_per_sample: float  #: Min-entropy per sample (bits).
    extractor: dict[str, Any]  #: Extractor parameters.
    seed_fingerprint: str  #: SHA-256 of the extractor seed.
    bits_extracted: int  #: Number of output bits.
    blocks: int  #: Number of extracted blocks.
    discarded_bits: int  #: Raw bits left out of the last block.
    epsilon_total: float  #: Composed extractor error.
    tests: dict[str, str]  #: Verdict of every test.
    verdict: Verdict_type  # noqa
    autocorr_mean: float  #: Mean of the output *R(j)*, *j >= 1*.
    autocorr_max: float  #: Largest output *|R(j)|*, *j >= 1*.
    artifacts: dict[str, str]  #: Paths of the written artifacts.
    timings: dict[str, float]  #: Duration (s) of every stage.
    throughput: dict[str, float]  #: Samples/s and bits/s of the stages.


@contextlib.contextmanager
def _stage(name: str, timings: dict[str, float]) -> Iterator[None]:
    logger.info("Stage '%s' started.", name)
    start = time.perf_counter()
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as err:
        logger.error("Stage '%s' failed: %s", name, err)
        raise PipelineStageError(name, str(err)) from err
    timings[name] = time.perf_counter() - start
    logger.info("Stage '%s' done in %.3g s.", name, timings[name])


def _partial(path: Path) -> Path:
    return path.with_name(path.name + ".partial")


def _commit(*paths: Path) -> None:
    for path in paths:
        os.replace(_partial(path), path)


def _write_json(data: Any, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(data, fp, indent=2, sort_keys=True)


def _resolve_seed(
    config: PipelineConfig, params: ExtractorParams, seed_path: Path
) -> Any:
    if config.seed_file is not None:
        seed, header = read_seed(config.seed_file)
        expected = {
            "algorithm": params.algorithm,
            "n": params.n,
            "m": params.m,
            "d": params.d,
        }
        if header != expected:
            raise LengthMismatchError(
                f"Seed file is sized for {header}, the extractor needs "
                f"{expected}."
            )
        return seed
    if config.demo_seed is None:
        raise ValueError(
            "No extractor seed: set 'seed_file', or 'demo_seed' for a demo run."
        )
    seed = demo_seed(params, config.demo_seed)
    write_seed(seed, params, _partial(seed_path))
    _commit(seed_path)
    return seed


def run_pipeline(config: PipelineConfig) -> PipelineSummary:
    """Run the whole pipeline.

    The artifacts are written in *config.output_dir*: the noise model fit,
    the raw samples, the entropy report, the extractor seed (demo runs
    only), the extracted bits with their sidecar metadata, the test reports,
    a summary and the stage timings. Apart from the timings, the artifacts
    only depend on the configuration.

    Example
    -------
    >>> import phaserng as phr
    >>> cfg = phr.PipelineConfig(output_dir="out", n_samples=10**6, demo_seed=7)
    >>> summary = phr.run_pipeline(cfg)
    >>> summary["verdict"]
    'pass'


    Parameters
    ----------
    config :
        Pipeline configuration.

    Raises
    ------
    PipelineStageError
        If a stage fails. The *stage* attribute names it.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / v for k, v in ARTIFACTS.items()}
    timings: dict[str, float] = {}
    throughput: dict[str, float] = {}

    with _stage("fit", timings):
        if config.sweep_csv is not None:
            params: NoiseModelParams = fit_noise_model(  # type: ignore
                read_sweep_csv(config.sweep_csv), CONFIDENCE  # noqa
            )
        else:
            params = config.params  # type: ignore
        save_fit(params, _partial(paths["fit"]))
        _commit(paths["fit"])

    with _stage("optimize", timings):
        if config.power is None:
            power, gamma = optimal_power(params)
        else:
            power, gamma = config.power, float(snr(params, config.power))
        logger.info("Operating point: P=%.4g mW, gamma=%.4g.", power, gamma)

    with _stage("simulate", timings):
        sim = SimConfig(
            params=params,
            power=power,
            adc=AdcConfig(bits=config.adc_bits, range_a=config.range_a),
            n_samples=config.n_samples,
            quantum_seed=config.quantum_seed,
            classical_seed=config.classical_seed,
            bandwidth_cutoff=config.bandwidth_cutoff,
            block_size=config.block_size,
            workers=config.workers,
        )
        raw = simulate_raw(sim)
        write_raw(raw, _partial(paths["raw"]))
        _commit(paths["raw"])
    throughput["simulate_samples_per_s"] = len(raw) / timings["simulate"]

    with _stage("entropy", timings):
        report = evaluate(raw, params, power)
        save_report(report, _partial(paths["entropy"]))
        _commit(paths["entropy"])

    with _stage("extract", timings):
        sizing = (
            output_length
            if config.algorithm == "toeplitz"
            else trevisan_params
        )
        ext_params = sizing(config.n, h_min_rate(report), config.epsilon)
        seed = _resolve_seed(config, ext_params, paths["seed"])
        result = stream_extract(raw, ext_params, seed)
        metadata = {k: v for k, v in result.items() if k != "bits"}
        write_bits(result["bits"], _partial(paths["bits"]), metadata)
        os.replace(
            f"{_partial(paths['bits'])}.json", f"{paths['bits']}.json"
        )
        _commit(paths["bits"])
    throughput["extract_bits_per_s"] = (
        result["bits"].size / timings["extract"]
    )

    with _stage("test", timings):
        bits = result["bits"]
        if config.sequence_length is None:
            reports = run_battery(bits, config.battery, alpha=config.alpha)
        else:
            reports = sequence_battery(
                bits, config.sequence_length, alpha=config.alpha
            )
        save_reports(reports, _partial(paths["tests"]))
        _commit(paths["tests"])
        lags = autocorrelation(bits, config.autocorr_lags)["coefficients"][1:]

    verdict = battery_verdict(reports)
    summary: PipelineSummary = {
        "params": {
            k: float(params[k]) for k in FIT_KEYS if k in params  # type: ignore
        },
        "power": float(power),
        "gamma": float(gamma),
        "h_min_per_sample": report["h_min_per_sample"],
        "extractor": ext_params.to_dict(),
        "seed_fingerprint": result["seed_fingerprint"],
        "bits_extracted": int(result["bits"].size),
        "blocks": result["blocks"],
        "discarded_bits": result["discarded_bits"],
        "epsilon_total": result["epsilon_total"],
        "tests": {r["name"]: r["verdict"] for r in reports},
        "verdict": verdict,
        "autocorr_mean": float(lags.mean()),
        "autocorr_max": float(np.abs(lags).max()),
        "artifacts": {k: str(v) for k, v in paths.items() if v.exists()},
        "timings": timings,
        "throughput": throughput,
    }
    summary["artifacts"]["summary"] = str(paths["summary"])
    summary["artifacts"]["timings"] = str(paths["timings"])
    _write_json(
        {
            k: v
            for k, v in summary.items()
            if k not in ("timings", "throughput")
        },
        paths["summary"],
    )
    _write_json(
        {"timings": timings, "throughput": throughput}, paths["timings"]
    )
    logger.info(
        "Pipeline done: gamma=%.4g, H_min=%.4g bits/sample, %d bits, %s.",
        gamma,
        report["h_min_per_sample"],
        summary["bits_extracted"],
        verdict,
    )
    return summary


class BenchReport(TypedDict):
    """Result of :py:func:`~phaserng.pipeline.bench`."""

    algorithm: str  #: Extractor.
    n: int  #: Input block (bits).
    m: int  #: Output block (bits).
    blocks: int  #: Blocks per run.
    repeats: int  #: Number of timed runs.
    setup_s: float  #: Seed preprocessing time (s), not in the throughput.
    median_s: float  #: Median run time (s).
    bits_per_second: float  #: Output bits per second of the median run.
    baseline_bps: float  #: Software Toeplitz reference throughput.
    baseline_n: int  #: Input block of the reference (bits).
    baseline_m: int  #: Output block of the reference (bits).
    speedup: float  #: Throughput over the reference.
    like_for_like: bool  #: Same extractor and sizes as the reference.


def bench(
    algorithm: Extractor_type = "toeplitz",  # noqa
    n: int = 4096,
    h_min_rate: float = 6.7 / 8,
    epsilon: float = EPSILON,  # noqa
    n_blocks: int = 1024,
    repeats: int = 5,
    seed: int = 0,
) -> BenchReport:
    """Measure the extraction throughput.

    Only the extraction is timed: the input bits and the seed are generated
    beforehand and the seed preprocessing is reported apart.

    Parameters
    ----------
    algorithm :
        Extractor.
    n :
        Input block length (bits).
    h_min_rate :
        Min-entropy per raw bit used to size the output.
    epsilon :
        Security parameter.
    n_blocks :
        Number of blocks extracted per run.
    repeats :
        Number of timed runs, at least 5.
    seed :
        Seed of the input bits and of the extractor seed.
    """
    if repeats < 5:
        raise ValueError("'repeats' must be at least 5.")
    sizing = output_length if algorithm == "toeplitz" else trevisan_params
    params = sizing(n, h_min_rate, epsilon)
    rng = np.random.default_rng(seed)
    blocks = rng.integers(0, 2, size=(n_blocks, n), dtype=np.uint8)
    ext_seed = rng.integers(0, 2, size=params.d, dtype=np.uint8)

    start = time.perf_counter()
    extractor: ToeplitzHash | TrevisanExtractor
    if algorithm == "toeplitz":
        extractor = ToeplitzHash(ext_seed, params)
    else:
        extractor = TrevisanExtractor(ext_seed, params)
    setup = time.perf_counter() - start

    runs = []
    for _ in range(repeats):
        start = time.perf_counter()
        extractor.extract_blocks(blocks)
        runs.append(time.perf_counter() - start)
    median = float(np.median(runs))
    bps = n_blocks * params.m / median
    like_for_like = algorithm == "toeplitz" and (n, params.m) == (
        BASELINE_N,  # noqa
        BASELINE_M,  # noqa
    )
    if not like_for_like:
        logger.info(
            "%s n=%d m=%d differs from the reference Toeplitz n=%d m=%d: "
            "the speedup is not a like-for-like comparison.",
            algorithm,
            n,
            params.m,
            BASELINE_N,  # noqa
            BASELINE_M,  # noqa
        )
    logger.info(
        "%s n=%d m=%d: %.4g bit/s (%.4g x %g bit/s).",
        algorithm,
        n,
        params.m,
        bps,
        bps / BASELINE_BPS,  # noqa
        BASELINE_BPS,  # noqa
    )
    return {
        "algorithm": algorithm,
        "n": n,
        "m": params.m,
        "blocks": n_blocks,
        "repeats": repeats,
        "setup_s": setup,
        "median_s": median,
        "bits_per_second": bps,
        "baseline_bps": BASELINE_BPS,  # noqa
        "baseline_n": BASELINE_N,  # noqa
        "baseline_m": BASELINE_M,  # noqa
        "speedup": bps / BASELINE_BPS,  # noqa
        "like_for_like": like_for_like,
    }
