"""Config file."""

import pathlib
from typing import Literal
import typing

# Constants exposed to the user
config = {
    "NUM_DECIMALS": 4,
    "COLORMAP": "tab10",
    "ALPHA": 0.01,
    "PROPORTION_THRESHOLD": 0.976,
    "EPSILON": 2.0**-100,
    "CONFIDENCE": 0.99,
}  # Defaults
mapping_dict = {
    "num_decimals": "NUM_DECIMALS",
    "color_map": "COLORMAP",
    "alpha": "ALPHA",
    "proportion_threshold": "PROPORTION_THRESHOLD",
    "epsilon": "EPSILON",
    "confidence": "CONFIDENCE",
}

# TODO If you remove python 3.10 remove the dependency (also from pyproject) from tomli as tomlib is
# part of the standard python package starting from 3.11
try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib  # type: ignore

try:
    with open(
        pathlib.Path.home().joinpath(".phaserng/config.toml"), mode="rb"
    ) as fp:
        data = tomllib.load(fp)
    for k, val in data.items():
        config[mapping_dict[k]] = val
except FileNotFoundError:  # pragma: no cover
    pass


locals().update(config)

# Internal constants
MIN_ENTROPY_SAMPLES = 10_000
BASELINE_BPS = 441e3  # Software Toeplitz throughput we compare against.
BASELINE_N = 4096  # Block sizes of that throughput (bits).
BASELINE_M = 3230
SCHEMA_VERSION = 1

# Laboratory fit of the quadratic noise model (mV^2, mV^2/mW, mV^2/mW^2).
REFERENCE_PARAMS = {
    "aq": 16.1,
    "ac": 0.4,
    "f": 0.36,
    "ci_aq": 0.5,
    "ci_ac": 0.2,
    "ci_f": 0.06,
    "alpha": 0.99,
}

Extractor_type = Literal["toeplitz", "trevisan"]
EXTRACTOR_KIND: list[Extractor_type] = list(typing.get_args(Extractor_type))

Battery_type = Literal["core"]
BATTERY_KIND: list[Battery_type] = list(typing.get_args(Battery_type))

Verdict_type = Literal["pass", "fail"]
