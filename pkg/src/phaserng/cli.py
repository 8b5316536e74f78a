# mypy: show_error_codes
"""Command line interface, ``phaserng <subcommand> ...``.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors and 3 when
the statistical test battery fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Sequence

import numpy as np

from .config import *  # noqa
from .utils import *  # noqa
from .noise_model import (
    NoiseModelParams,
    fit_noise_model,
    load_fit,
    model_variance,
    optimal_power,
    read_sweep_csv,
    save_fit,
    snr,
    validate_noise_params,
)
from .source import AdcConfig, SimConfig, read_raw, simulate_raw, write_raw
from .minentropy import (
    evaluate,
    h_min_rate,
    load_report,
    min_entropy_per_sample,
    quantum_variance,
    save_report,
)
from .extractors import (
    demo_seed,
    output_length,
    read_bits,
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
    spectral_flatness,
)
from .pipeline import (
    PipelineConfig,
    PipelineStageError,
    bench,
    load_config,
    run_pipeline,
    save_config,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TESTS_FAILED = 3

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is our data error code.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _print(data: Any) -> None:
    def _round(x: Any) -> Any:
        if isinstance(x, float):
            if not np.isfinite(x):
                return None
            return round(x, NUM_DECIMALS)  # noqa
        if isinstance(x, dict):
            return {k: _round(v) for k, v in x.items()}
        if isinstance(x, list):
            return [_round(v) for v in x]
        return x

    print(json.dumps(_round(data), indent=2, allow_nan=False))


def _add_params_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("noise model")
    group.add_argument("--fit", help="Noise model fit (JSON).")
    group.add_argument("--aq", type=float, help="Quantum coefficient.")
    group.add_argument("--ac", type=float, help="Classical coefficient.")
    group.add_argument("--f", type=float, help="Background noise.")


def _params(args: argparse.Namespace) -> NoiseModelParams:
    if args.fit is not None:
        params: NoiseModelParams = load_fit(args.fit)  # type: ignore
    else:
        params = dict(REFERENCE_PARAMS)  # type: ignore # noqa
    for key in ("aq", "ac", "f"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)  # type: ignore
    validate_noise_params(params)
    return params


def _add_adc_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--adc-bits", type=int, default=8, help="ADC bits.")
    parser.add_argument(
        "--range-a", type=float, default=15.0, help="ADC half-range (mV)."
    )


def _cmd_fit(args: argparse.Namespace) -> int:
    fit = fit_noise_model(read_sweep_csv(args.sweep), args.alpha)
    if args.out is not None:
        save_fit(fit, args.out)
    _print(fit)
    return EXIT_OK


def _cmd_snr(args: argparse.Namespace) -> int:
    params = _params(args)
    _print({"power": args.power, "gamma": snr(params, args.power)})
    return EXIT_OK


def _cmd_optimal_power(args: argparse.Namespace) -> int:
    power, gamma = optimal_power(_params(args))
    _print({"power": power, "gamma": gamma})
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = _params(args)
    power = args.power if args.power is not None else optimal_power(params)[0]
    config = SimConfig(
        params=params,
        power=power,
        adc=AdcConfig(bits=args.adc_bits, range_a=args.range_a),
        n_samples=args.samples,
        quantum_seed=args.quantum_seed,
        classical_seed=args.classical_seed,
        bandwidth_cutoff=args.bandwidth_cutoff,
        workers=args.workers,
    )
    raw = simulate_raw(config)
    write_raw(raw, args.out)
    _print(raw.metadata)
    return EXIT_OK


def _cmd_entropy(args: argparse.Namespace) -> int:
    params = _params(args)
    power = args.power if args.power is not None else optimal_power(params)[0]
    report = evaluate(read_raw(args.input), params, power)
    if args.report is not None:
        save_report(report, args.report)
    _print(report)
    return EXIT_OK


def _reference_rate() -> float:
    # Min-entropy per raw bit of the reference source at its optimal power,
    # digitized by the default ADC.
    params: NoiseModelParams = dict(REFERENCE_PARAMS)  # type: ignore # noqa
    power, gamma = optimal_power(params)
    sigma_q2 = quantum_variance(float(model_variance(params, power)), gamma)
    adc = AdcConfig()
    return min_entropy_per_sample(float(np.sqrt(sigma_q2)), adc) / adc.bits


def _cmd_extract(args: argparse.Namespace) -> int:
    if args.entropy is not None:
        rate = h_min_rate(load_report(args.entropy))
    elif args.h_min_rate is not None:
        rate = args.h_min_rate
    else:
        rate = _reference_rate()
        logger.warning(
            "No entropy report given, using the reference source rate "
            "%.4f bits per raw bit.",
            rate,
        )
    sizing = output_length if args.algo == "toeplitz" else trevisan_params
    params = sizing(args.n, rate, args.epsilon)

    if args.seed_file is not None:
        seed, header = read_seed(args.seed_file)
        if (header["n"], header["m"], header["d"]) != (
            params.n,
            params.m,
            params.d,
        ) or header["algorithm"] != params.algorithm:
            raise ValueError(
                f"Seed file is sized for {header}, the extractor needs "
                f"n={params.n}, m={params.m}, d={params.d}."
            )
    else:
        seed = demo_seed(params, args.demo_seed)
        if args.seed_out is not None:
            write_seed(seed, params, args.seed_out)

    result = stream_extract(read_raw(args.input), params, seed)
    metadata = {k: v for k, v in result.items() if k != "bits"}
    write_bits(result["bits"], args.out, metadata)
    _print(metadata)
    return EXIT_OK


def _cmd_test(args: argparse.Namespace) -> int:
    if args.raw is not None:
        data = read_raw(args.raw).samples
        bits = None
    else:
        bits = read_bits(args.input)
        data = bits
    out: dict[str, Any] = {}
    code = EXIT_OK

    if args.autocorr:
        lags = autocorrelation(data, args.max_lag)["coefficients"][1:]
        out["autocorrelation"] = {
            "mean": float(lags.mean()),
            "max_abs": float(np.abs(lags).max()),
            "expected_sd": float(1.0 / np.sqrt(len(data))),
        }
    if args.spectrum:
        result = spectral_flatness(data, args.segments)
        out["spectral_flatness"] = result["flatness"]
    if bits is not None and not (args.autocorr or args.spectrum):
        if args.sequence_length is None:
            reports = run_battery(bits, args.battery, alpha=args.alpha)
        else:
            reports = sequence_battery(
                bits, args.sequence_length, alpha=args.alpha
            )
        if args.report is not None:
            save_reports(reports, args.report)
        out["tests"] = {r["name"]: r["verdict"] for r in reports}
        out["verdict"] = battery_verdict(reports)
        if out["verdict"] == "fail":
            code = EXIT_TESTS_FAILED
    _print(out)
    return code


def _cmd_bench(args: argparse.Namespace) -> int:
    reports = [
        bench(
            algorithm=algo,
            n=args.n,
            h_min_rate=args.h_min_rate,
            epsilon=args.epsilon,
            n_blocks=args.blocks,
            repeats=args.repeats,
        )
        for algo in args.algo
    ]
    _print(reports)
    return EXIT_OK


def _cmd_pipeline(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else PipelineConfig()
    if args.output_dir is not None:
        config.output_dir = args.output_dir
    if args.demo_seed is not None:
        config.demo_seed = args.demo_seed
    if args.save_config is not None:
        save_config(config, args.save_config)
    summary = run_pipeline(config)
    _print({k: v for k, v in summary.items() if k != "artifacts"})
    return EXIT_OK if summary["verdict"] == "pass" else EXIT_TESTS_FAILED


def build_parser() -> argparse.ArgumentParser:
    """Return the command line parser."""
    parser = _ArgumentParser(
        prog="phaserng",
        description="Simulate a phase-noise QRNG, evaluate its min-entropy "
        "and extract random bits.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="Debug logging."
    )
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="Warnings only."
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("fit", help="Fit the noise model to a power sweep.")
    p.add_argument("--sweep", required=True, help="Sweep CSV file.")
    p.add_argument("--alpha", type=float, default=CONFIDENCE)  # noqa
    p.add_argument("--out", help="Output fit (JSON).")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("snr", help="Quantum signal to classical noise ratio.")
    _add_params_args(p)
    p.add_argument("--power", type=float, required=True, help="Power (mW).")
    p.set_defaults(func=_cmd_snr)

    p = sub.add_parser("optimal-power", help="Power maximizing the SNR.")
    _add_params_args(p)
    p.set_defaults(func=_cmd_optimal_power)

    p = sub.add_parser("simulate", help="Simulate raw ADC samples.")
    _add_params_args(p)
    _add_adc_args(p)
    p.add_argument("--power", type=float, help="Power (mW), default optimal.")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--quantum-seed", type=int, default=1)
    p.add_argument("--classical-seed", type=int, default=2)
    p.add_argument("--bandwidth-cutoff", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="Output raw file.")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("entropy", help="Min-entropy of raw samples.")
    _add_params_args(p)
    p.add_argument("--in", dest="input", required=True, help="Raw file.")
    p.add_argument("--power", type=float, help="Power (mW), default optimal.")
    p.add_argument("--report", help="Output entropy report (JSON).")
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("extract", help="Extract random bits.")
    p.add_argument("--algo", choices=EXTRACTOR_KIND, default="toeplitz")  # noqa
    p.add_argument("--n", type=int, default=4096, help="Input block (bits).")
    p.add_argument("--epsilon", type=float, default=EPSILON)  # noqa
    rate = p.add_mutually_exclusive_group()
    rate.add_argument(
        "--entropy",
        help="Entropy report (JSON). Without it and without --h-min-rate "
        "the rate of the reference source at its optimal power is used.",
    )
    rate.add_argument("--h-min-rate", type=float, help="Min-entropy per bit.")
    seed = p.add_mutually_exclusive_group(required=True)
    seed.add_argument("--seed-file", help="Extractor seed file.")
    seed.add_argument(
        "--demo-seed",
        type=int,
        help="Generate a reproducible demo seed. Not for production.",
    )
    p.add_argument("--seed-out", help="Where to save the demo seed.")
    p.add_argument("--in", dest="input", required=True, help="Raw file.")
    p.add_argument("--out", required=True, help="Output bits file.")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("test", help="Statistical tests.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="input", help="Packed bits file.")
    src.add_argument("--raw", help="Raw sample file.")
    p.add_argument("--battery", choices=BATTERY_KIND, default="core")  # noqa
    p.add_argument("--alpha", type=float, default=ALPHA)  # noqa
    p.add_argument("--sequence-length", type=int)
    p.add_argument("--report", help="Output reports (JSON).")
    p.add_argument("--autocorr", action="store_true")
    p.add_argument("--max-lag", type=int, default=100)
    p.add_argument("--spectrum", action="store_true")
    p.add_argument("--segments", type=int, default=64)
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("bench", help="Extractor throughput.")
    p.add_argument(
        "--algo",
        choices=EXTRACTOR_KIND,  # noqa
        nargs="+",
        default=["toeplitz"],
    )
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--h-min-rate", type=float, default=6.7 / 8)
    p.add_argument("--epsilon", type=float, default=EPSILON)  # noqa
    p.add_argument("--blocks", type=int, default=1024)
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("pipeline", help="Run the whole pipeline.")
    p.add_argument("--config", help="Pipeline configuration (TOML).")
    p.add_argument("--output-dir")
    p.add_argument("--demo-seed", type=int)
    p.add_argument("--save-config", help="Save the effective configuration.")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``phaserng`` command."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (
        logging.DEBUG
        if args.verbose
        else logging.WARNING
        if args.quiet
        else logging.INFO
    )
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        return args.func(args)
    except (
        ValueError,
        IndexError,
        KeyError,
        ZeroDivisionError,
        OSError,
        PipelineStageError,
    ) as err:
        logger.error("%s", err)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
