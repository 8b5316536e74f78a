# mypy: show_error_codes
"""Module containing the randomness extractors.

Two seeded extractors are available:

- the Toeplitz-hashing extractor, a two-universal hash that multiplies the
  *n* input bits by an *m x n* Toeplitz matrix over *GF(2)*;
- Trevisan's extractor, which applies a one-bit extractor to *m* subsets of
  the seed given by a weak design.

Both are linear over *GF(2)* once the seed is fixed. The classes
:py:class:`~phaserng.extractors.ToeplitzHash` and
:py:class:`~phaserng.extractors.TrevisanExtractor` exploit it to process
many blocks with the same seed through precomputed lookup tables.

Bits are always packed most significant bit first.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, ClassVar, TypedDict

import numpy as np
import scipy.linalg as linalg
import scipy.signal as signal

from .config import *  # noqa
from .utils import *  # noqa
from .galois import (
    GaloisField,
    InvalidFieldSizeError,
    gf2_irreducible,
    gf2_mul,
    next_prime_power,
)
from .source import RawSampleStream

logger = logging.getLogger(__name__)

SEED_MAGIC = b"QRNGSEED"
SEED_HEADER = struct.Struct("<8sBQQQ")  # magic, algorithm, n, m, d
ALGORITHM_TAG: dict[str, int] = {"toeplitz": 0, "trevisan": 1}

#: Overlap parameter of the polynomial weak design.
DESIGN_RHO = 2.0 * math.e

#: Largest lookup table (bytes) built by the batched extractors.
MAX_TABLE_BYTES = 2**28

#: Blocks per FFT convolution when a Toeplitz matrix has no lookup tables.
FFT_BATCH = 256


class EntropyDeficitError(ValueError):
    """The input does not hold enough min-entropy for a positive output
    length."""


class LengthMismatchError(IndexError):
    """An input or seed length does not match the extractor parameters."""


class DesignMismatchError(IndexError):
    """The weak design does not fit the extractor parameters."""


# ==============================================
# Parameters and seeds
# ==============================================
@dataclass(frozen=True)
class ExtractorParams:
    """Sizes of a seeded extractor *{0,1}^n x {0,1}^d -> {0,1}^m*.

    For Toeplitz hashing *d = n + m - 1*. For Trevisan's extractor the
    seed is the universe of the weak design, *d = t²*, and *w* is the
    degree of the field used by the one-bit extractor.
    """

    n: int  #: Input length (bits).
    k: int  #: Min-entropy of the input (bits).
    m: int  #: Output length (bits).
    epsilon: float  #: Security parameter.
    d: int  #: Seed length (bits).
    algorithm: Extractor_type = "toeplitz"  # noqa
    w: int | None = None  #: One-bit extractor field degree (Trevisan).
    t: int | None = None  #: Weak design set size (Trevisan).

    def __post_init__(self) -> None:
        if self.algorithm not in EXTRACTOR_KIND:  # noqa
            raise ValueError(
                f"'algorithm' must be one of {EXTRACTOR_KIND}."  # noqa
            )
        if self.n < 1:
            raise ValueError("'n' must be positive.")
        if not 0 < self.epsilon <= 1:
            raise ValueError("'epsilon' must be in (0, 1].")
        if self.m <= 0:
            raise EntropyDeficitError(
                f"Output length m={self.m} is not positive (k={self.k})."
            )
        if not self.m <= self.k <= self.n:
            raise ValueError("Sizes must satisfy m <= k <= n.")
        if self.algorithm == "toeplitz" and self.d != self.n + self.m - 1:
            raise ValueError("Toeplitz hashing requires d = n + m - 1.")
        if self.algorithm == "trevisan":
            if self.w is None or self.t is None:
                raise ValueError("Trevisan parameters need 'w' and 't'.")
            if self.d != self.t**2:
                raise ValueError("Trevisan's extractor requires d = t**2.")
            if 2 * self.w > self.t:
                raise ValueError("The design sets must hold 2*w seed bits.")

    def to_dict(self) -> dict[str, Any]:
        """Return the parameters as a JSON-friendly dict."""
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExtractorParams:
        """Build parameters from a dict written by
        :py:meth:`~phaserng.extractors.ExtractorParams.to_dict`."""
        fields = [f.name for f in dataclasses.fields(cls)]
        return cls(**{k: v for k, v in data.items() if k in fields})


@dataclass(frozen=True, eq=False)
class _ExtractorSeed:
    bits: np.ndarray  #: Seed bits.
    algorithm: ClassVar[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", as_bits(self.bits))  # noqa

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other: object) -> bool:
        return (
            type(other) is type(self)
            and np.array_equal(self.bits, other.bits)  # type: ignore
        )


class ToeplitzSeed(_ExtractorSeed):
    """Seed of the Toeplitz-hashing extractor, *n + m - 1* bits."""

    algorithm = "toeplitz"


class TrevisanSeed(_ExtractorSeed):
    """Seed of Trevisan's extractor, one bit per element of the weak design
    universe."""

    algorithm = "trevisan"


_SEED_CLASSES: dict[str, type[_ExtractorSeed]] = {
    "toeplitz": ToeplitzSeed,
    "trevisan": TrevisanSeed,
}


def _seed_bits(seed: _ExtractorSeed | np.ndarray | str) -> np.ndarray:
    if isinstance(seed, _ExtractorSeed):
        return seed.bits
    return as_bits(seed)  # noqa


def output_length(
    n: int, h_min_rate: float, epsilon: float = EPSILON  # noqa
) -> ExtractorParams:
    """Size the Toeplitz-hashing extractor with the leftover hash lemma.

    *k = floor(n·rate)*, *m = k - ceil(2·log2(1/ε))* and *d = n + m - 1*.

    Example
    -------
    >>> import phaserng as phr
    >>> phr.output_length(4096, 6.7 / 8, 2.0**-100)
    ExtractorParams(n=4096, k=3430, m=3230, epsilon=7.888609052210118e-31, d=7325, algorithm='toeplitz', w=None, t=None)


    Parameters
    ----------
    n :
        Input block length (bits).
    h_min_rate :
        Min-entropy per raw bit, in (0, 1].
    epsilon :
        Security parameter, in (0, 1].

    Raises
    ------
    EntropyDeficitError
        If the resulting output length is not positive.
    """
    if not 0 < h_min_rate <= 1:
        raise ValueError("'h_min_rate' must be in (0, 1].")
    if not 0 < epsilon <= 1:
        raise ValueError("'epsilon' must be in (0, 1].")
    k = math.floor(n * h_min_rate)
    m = k - math.ceil(2.0 * math.log2(1.0 / epsilon))
    if m <= 0:
        raise EntropyDeficitError(
            f"k={k} bits of min-entropy cannot pay a security penalty of "
            f"{k - m} bits."
        )
    params = ExtractorParams(n=n, k=k, m=m, epsilon=epsilon, d=n + m - 1)
    logger.info("Toeplitz sizing: n=%d, k=%d, m=%d, d=%d.", n, k, m, params.d)
    return params


def trevisan_params(
    n: int, h_min_rate: float, epsilon: float = EPSILON  # noqa
) -> ExtractorParams:
    """Size Trevisan's extractor.

    The output length is *m = floor((k - 4·log2(1/ε) - 6)/ρ)* with the
    design overlap *ρ = 2e*. The one-bit extractor works in *GF(2^w)* with
    *w = ceil(log2 n + 2·log2(2/ε))*, the design sets have size *t*, the
    smallest prime power not below *2w*, and the seed has *d = t²* bits.

    Parameters
    ----------
    n :
        Input block length (bits).
    h_min_rate :
        Min-entropy per raw bit, in (0, 1].
    epsilon :
        Per-bit security parameter, in (0, 1].

    Raises
    ------
    EntropyDeficitError
        If the resulting output length is not positive.
    """
    if not 0 < h_min_rate <= 1:
        raise ValueError("'h_min_rate' must be in (0, 1].")
    if not 0 < epsilon <= 1:
        raise ValueError("'epsilon' must be in (0, 1].")
    k = math.floor(n * h_min_rate)
    m = math.floor((k - 4.0 * math.log2(1.0 / epsilon) - 6.0) / DESIGN_RHO)
    if m <= 0:
        raise EntropyDeficitError(
            f"k={k} bits of min-entropy give no output at epsilon={epsilon:g}."
        )
    w = math.ceil(math.log2(n) + 2.0 * math.log2(2.0 / epsilon))
    t = next_prime_power(2 * w)
    params = ExtractorParams(
        n=n, k=k, m=m, epsilon=epsilon, d=t**2, algorithm="trevisan", w=w, t=t
    )
    logger.info(
        "Trevisan sizing: n=%d, k=%d, m=%d, w=%d, t=%d, d=%d.",
        n,
        k,
        m,
        w,
        t,
        params.d,
    )
    return params


def trevisan_error(params: ExtractorParams) -> float:
    """Return the error bound *m·ε₁* of Trevisan's extractor, where
    *ε₁ = 2·2^(-(w - log2 n)/2)* bounds the one-bit extractor. The bound is
    capped at 1."""
    if params.w is None:
        raise ValueError("'params' are not Trevisan parameters.")
    eps_one = 2.0 * 2.0 ** (-(params.w - math.log2(params.n)) / 2.0)
    return min(1.0, params.m * eps_one)


# ==============================================
# GF(2) linear maps
# ==============================================
class Gf2LinearMap:
    """Apply a fixed *m x n* matrix over *GF(2)* to many *n*-bit blocks.

    The input bits are grouped by eight. For each group a table of the 256
    possible XOR combinations of the eight corresponding matrix columns is
    precomputed, with columns packed in 64-bit words. A product then costs
    one table lookup and one XOR per input byte.

    If the tables would exceed *max_table_bytes*, blocks are multiplied
    with a dense floating point product instead.

    Parameters
    ----------
    matrix :
        The *m x n* matrix, entries 0 or 1.
    max_table_bytes :
        Size limit of the lookup tables.
    """

    def __init__(
        self, matrix: np.ndarray, max_table_bytes: int = MAX_TABLE_BYTES
    ) -> None:
        matrix = np.asarray(matrix, dtype=np.uint8)
        if matrix.ndim != 2:
            raise ValueError("'matrix' must be two-dimensional.")
        self.m, self.n = matrix.shape
        self._groups = -(-self.n // 8)
        self._words = -(-self.m // 64)

        if self.table_bytes(self.m, self.n) <= max_table_bytes:
            cols = np.zeros((8 * self._groups, 64 * self._words), np.uint8)
            cols[: self.n, : self.m] = matrix.T
            packed = np.packbits(cols, axis=1, bitorder="big").view(np.uint64)
            packed = packed.reshape(self._groups, 8, self._words)
            tables = np.zeros((self._groups, 256, self._words), np.uint64)
            # Input byte weight 2**(7 - q) selects column q of the group.
            weight = 1
            for q in range(7, -1, -1):
                tables[:, weight : 2 * weight] = (
                    tables[:, :weight] ^ packed[:, q, np.newaxis, :]
                )
                weight <<= 1
            self._tables: np.ndarray | None = tables
            self._dense: np.ndarray | None = None
        else:
            logger.debug(
                "Lookup tables for a %dx%d matrix exceed %d bytes.",
                self.m,
                self.n,
                max_table_bytes,
            )
            self._tables = None
            self._dense = matrix.T.astype(np.float32)

    @staticmethod
    def table_bytes(m: int, n: int) -> int:
        """Size (bytes) of the lookup tables of an *m x n* matrix."""
        return -(-n // 8) * 256 * -(-m // 64) * 8

    def apply(self, blocks: np.ndarray) -> np.ndarray:
        """Multiply each row of *blocks* by the matrix.

        Parameters
        ----------
        blocks :
            Array of shape *(n_blocks, n)* or a single block of length *n*.

        Returns
        -------
        Array of shape *(n_blocks, m)*, or of length *m* for a single block.
        """
        blocks = np.asarray(blocks, dtype=np.uint8)
        single = blocks.ndim == 1
        blocks = np.atleast_2d(blocks)
        if blocks.shape[1] != self.n:
            raise LengthMismatchError(
                f"Blocks have {blocks.shape[1]} bits, expected {self.n}."
            )
        out = np.empty((blocks.shape[0], self.m), dtype=np.uint8)
        batch = max(1, 2**22 // (8 * self._words))
        for start in range(0, blocks.shape[0], batch):
            stop = min(start + batch, blocks.shape[0])
            out[start:stop] = self._apply_batch(blocks[start:stop])
        return out[0] if single else out

    def _apply_batch(self, blocks: np.ndarray) -> np.ndarray:
        if self._tables is None:
            product = blocks.astype(np.float32) @ self._dense
            return (np.rint(product).astype(np.int64) % 2).astype(np.uint8)

        padded = np.zeros((blocks.shape[0], 8 * self._groups), np.uint8)
        padded[:, : self.n] = blocks
        index = np.packbits(padded, axis=1, bitorder="big")
        acc = np.zeros((blocks.shape[0], self._words), dtype=np.uint64)
        rows = np.empty_like(acc)
        for g in range(self._groups):
            np.take(self._tables[g], index[:, g], axis=0, out=rows)
            np.bitwise_xor(acc, rows, out=acc)
        bits = np.unpackbits(acc.view(np.uint8), axis=1, bitorder="big")
        return bits[:, : self.m]


# ==============================================
# Toeplitz hashing
# ==============================================
def toeplitz_matrix(
    seed: ToeplitzSeed | np.ndarray | str, n: int, m: int
) -> np.ndarray:
    """Return the dense *m x n* Toeplitz matrix of *seed*.

    The convention is *T[i][j] = s[i + n - 1 - j]*: *s[0..n-1]* is the
    first row reversed and *s[n-1..n+m-2]* is the first column.
    """
    s = _seed_bits(seed)
    if s.size != n + m - 1:
        raise LengthMismatchError(
            f"A {m}x{n} Toeplitz matrix needs {n + m - 1} seed bits, "
            f"got {s.size}."
        )
    return linalg.toeplitz(s[n - 1 :], s[n - 1 :: -1]).astype(np.uint8)


def _check_lengths(
    x: np.ndarray, s: np.ndarray, params: ExtractorParams
) -> None:
    if x.size != params.n:
        raise LengthMismatchError(
            f"Input has {x.size} bits, expected n={params.n}."
        )
    if s.size != params.d:
        raise LengthMismatchError(
            f"Seed has {s.size} bits, expected d={params.d}."
        )


def toeplitz_extract(
    x: np.ndarray | str,
    seed: ToeplitzSeed | np.ndarray | str,
    params: ExtractorParams,
) -> np.ndarray:
    """Hash *n* input bits into *m* output bits with a Toeplitz matrix.

    The output is *T·x* over *GF(2)* with *T* as in
    :py:func:`~phaserng.extractors.toeplitz_matrix`. Since *T* is Toeplitz,
    the product is a slice of the convolution of the seed with the input.

    Example
    -------
    >>> import phaserng as phr
    >>> params = phr.ExtractorParams(n=4, k=2, m=2, epsilon=1.0, d=5)
    >>> phr.toeplitz_extract("1101", "10110", params)
    array([1, 1], dtype=uint8)


    Parameters
    ----------
    x :
        Input block of *n* bits.
    seed :
        Seed of *n + m - 1* bits.
    params :
        Extractor sizes.

    Raises
    ------
    LengthMismatchError
        If the input or the seed lengths do not match *params*.
    """
    x, s = as_bits(x), _seed_bits(seed)  # noqa
    _check_lengths(x, s, params)
    n, m = params.n, params.m
    conv = np.convolve(s.astype(np.int64), x.astype(np.int64))
    return (conv[n - 1 : n - 1 + m] % 2).astype(np.uint8)


class ToeplitzHash:
    """Toeplitz-hashing extractor with a fixed seed, for many blocks.

    The hashing matrix is turned into lookup tables once, see
    :py:class:`~phaserng.extractors.Gf2LinearMap`. Matrices whose tables
    would not fit in memory fall back to FFT convolutions of the seed with
    batches of blocks.

    Parameters
    ----------
    seed :
        Seed of *n + m - 1* bits.
    params :
        Extractor sizes.
    max_table_bytes :
        Size limit of the lookup tables.
    """

    def __init__(
        self,
        seed: ToeplitzSeed | np.ndarray | str,
        params: ExtractorParams,
        max_table_bytes: int = MAX_TABLE_BYTES,
    ) -> None:
        self.params = params
        self.seed = _seed_bits(seed)
        if self.seed.size != params.d:
            raise LengthMismatchError(
                f"Seed has {self.seed.size} bits, expected d={params.d}."
            )
        self._map: Gf2LinearMap | None = None
        if Gf2LinearMap.table_bytes(params.m, params.n) <= max_table_bytes:
            self._map = Gf2LinearMap(
                toeplitz_matrix(self.seed, params.n, params.m)
            )

    def extract(self, x: np.ndarray | str) -> np.ndarray:
        """Hash a single block of *n* bits."""
        x = as_bits(x)  # noqa
        if self._map is None:
            return toeplitz_extract(x, self.seed, self.params)
        if x.size != self.params.n:
            raise LengthMismatchError(
                f"Input has {x.size} bits, expected n={self.params.n}."
            )
        return self._map.apply(x)

    def extract_blocks(self, blocks: np.ndarray) -> np.ndarray:
        """Hash each row of an *(n_blocks, n)* array."""
        blocks = np.atleast_2d(np.asarray(blocks, dtype=np.uint8))
        if self._map is not None:
            return self._map.apply(blocks)
        n, m = self.params.n, self.params.m
        if blocks.shape[1] != n:
            raise LengthMismatchError(
                f"Blocks have {blocks.shape[1]} bits, expected n={n}."
            )
        out = np.empty((blocks.shape[0], m), dtype=np.uint8)
        kernel = self.seed[np.newaxis, :].astype(np.float64)
        for start in range(0, blocks.shape[0], FFT_BATCH):
            chunk = blocks[start : start + FFT_BATCH].astype(np.float64)
            conv = signal.fftconvolve(chunk, kernel, axes=1)
            window = np.rint(conv[:, n - 1 : n - 1 + m]).astype(np.int64)
            out[start : start + FFT_BATCH] = window % 2
        return out


# ==============================================
# Trevisan
# ==============================================
@dataclass(frozen=True, eq=False)
class WeakDesign:
    """Family of *m* subsets of the seed indices *[0, t²)*, each of size *t*.

    Set *i* is *{a·t + p_i(a) : a in GF(t)}* where *p_i* is the *i*-th
    polynomial of degree lower than *c* over *GF(t)*. The indices of each
    set are sorted.
    """

    sets: np.ndarray  #: Array of shape *(m, t)* of seed indices.
    t: int  #: Set size, a prime power.
    c: int  #: Degree bound of the polynomials.
    overlap_rho: float = DESIGN_RHO  #: Overlap parameter.

    @property
    def m(self) -> int:
        """Number of sets."""
        return int(self.sets.shape[0])

    @property
    def universe(self) -> int:
        """Size of the seed index universe, *t²*."""
        return self.t**2


def weak_design(m: int, t: int) -> WeakDesign:
    """Build the polynomial weak design with *m* sets of size *t*.

    The *i*-th polynomial has the base-*t* digits of *i* as coefficients,
    the constant term first. The degree bound *c* is the smallest integer
    with *t^c >= m*. Two distinct polynomials agree on at most *c - 1*
    points, so that two sets share at most *c - 1* indices.

    Parameters
    ----------
    m :
        Number of sets.
    t :
        Set size, a prime power.

    Raises
    ------
    InvalidFieldSizeError
        If *t* is not a prime power.
    """
    if m < 1:
        raise ValueError("'m' must be at least 1.")
    gf = GaloisField(t)
    c = 1
    while t**c < m:
        c += 1

    index = np.arange(m, dtype=np.int64)
    coefficients = (index[:, None] // t ** np.arange(c)) % t
    points = np.arange(t)
    values = gf.poly_eval(coefficients, points)
    sets = points[None, :] * t + values
    logger.debug("Weak design: m=%d, t=%d, c=%d.", m, t, c)
    return WeakDesign(sets=sets, t=t, c=c)


def design_overlap(design: WeakDesign) -> np.ndarray:
    """Return *Σ_{j<i} 2^|S_i ∩ S_j|* for each set *i* of *design*.

    A valid weak design keeps every entry below *overlap_rho·(m - 1)*.
    """
    # Sets are graphs of functions of a, so they meet where the values meet.
    values = design.sets - np.arange(design.t)[None, :] * design.t
    sums = np.zeros(design.m)
    for ii in range(1, design.m):
        common = (values[:ii] == values[ii]).sum(axis=1)
        sums[ii] = np.sum(2.0**common)
    return sums


def _field_elements(x: np.ndarray, w: int) -> list[int]:
    # Zero pad to whole elements, w bits per element, MSB first.
    n_elements = -(-x.size // w)
    padded = np.zeros(n_elements * w, dtype=np.uint8)
    padded[: x.size] = x
    return [bits_to_int(e) for e in padded.reshape(n_elements, w)]  # noqa


def one_bit_extract(
    x: np.ndarray | str, seed: np.ndarray | str, w: int
) -> int:
    """One-bit extractor: Reed–Solomon encoding concatenated with a
    Hadamard inner product.

    The input is split into *w*-bit elements *e_0, e_1, ...* of
    *GF(2^w)*. The first *w* seed bits select the evaluation point *α*
    and the next *w* bits the Hadamard mask *r*. The output is the parity
    of *r AND Σ_j e_j α^(s-1-j)*.

    Parameters
    ----------
    x :
        Input bits.
    seed :
        Seed bits, at least *2w*.
    w :
        Field degree.
    """
    x, seed = as_bits(x), as_bits(seed)  # noqa
    if seed.size < 2 * w:
        raise LengthMismatchError(f"The seed needs at least {2 * w} bits.")
    modulus = gf2_irreducible(w)
    alpha = bits_to_int(seed[:w])  # noqa
    mask = bits_to_int(seed[w : 2 * w])  # noqa
    value = 0
    for element in _field_elements(x, w):
        value = gf2_mul(value, alpha, w, modulus) ^ element
    return (value & mask).bit_count() & 1


def _one_bit_row(n: int, w: int, alpha: int, mask: int) -> np.ndarray:
    # Input bit jw + q contributes x^(w-1-q)·α^(s-1-j) to the RS value.
    modulus = gf2_irreducible(w)
    top = 1 << w
    n_elements = -(-n // w)
    row = np.zeros(n_elements * w, dtype=np.uint8)
    beta = 1
    for jj in range(n_elements - 1, -1, -1):
        u = beta
        for p in range(w):
            row[jj * w + w - 1 - p] = (u & mask).bit_count() & 1
            u <<= 1
            if u & top:
                u ^= modulus
        beta = gf2_mul(beta, alpha, w, modulus)
    return row[:n]


def _check_design(
    s: np.ndarray, params: ExtractorParams, design: WeakDesign
) -> None:
    if design.m < params.m:
        raise DesignMismatchError(
            f"The design has {design.m} sets, {params.m} are needed."
        )
    if s.size != design.universe:
        raise LengthMismatchError(
            f"Seed has {s.size} bits, the design universe has "
            f"{design.universe}."
        )
    if params.w is None or 2 * params.w > design.t:
        raise DesignMismatchError("The design sets must hold 2*w seed bits.")


def trevisan_matrix(
    seed: TrevisanSeed | np.ndarray | str,
    params: ExtractorParams,
    design: WeakDesign,
) -> np.ndarray:
    """Return the *m x n* matrix over *GF(2)* computing Trevisan's
    extractor for a fixed seed."""
    s = _seed_bits(seed)
    _check_design(s, params, design)
    w = params.w
    matrix = np.empty((params.m, params.n), dtype=np.uint8)
    for ii in range(params.m):
        sub = s[design.sets[ii]]
        alpha = bits_to_int(sub[:w])  # noqa
        mask = bits_to_int(sub[w : 2 * w])  # noqa
        matrix[ii] = _one_bit_row(params.n, w, alpha, mask)  # type: ignore
    return matrix


def trevisan_extract(
    x: np.ndarray | str,
    seed: TrevisanSeed | np.ndarray | str,
    params: ExtractorParams,
    design: WeakDesign | None = None,
) -> np.ndarray:
    """Extract *m* bits with Trevisan's extractor.

    Output bit *i* is the one-bit extractor applied to the input and to
    the seed restricted to the set *S_i* of the weak design.

    Parameters
    ----------
    x :
        Input block of *n* bits.
    seed :
        Seed, one bit per element of the design universe.
    params :
        Extractor sizes, see
        :py:func:`~phaserng.extractors.trevisan_params`.
    design :
        Weak design. If *None*, *weak_design(params.m, params.t)* is used.

    Raises
    ------
    LengthMismatchError
        If the input or the seed lengths do not match.
    DesignMismatchError
        If the design has fewer than *m* sets.
    """
    x, s = as_bits(x), _seed_bits(seed)  # noqa
    if params.w is None or params.t is None:
        raise ValueError("'params' are not Trevisan parameters.")
    if design is None:
        design = weak_design(params.m, params.t)
    if x.size != params.n:
        raise LengthMismatchError(
            f"Input has {x.size} bits, expected n={params.n}."
        )
    _check_design(s, params, design)
    return np.array(
        [
            one_bit_extract(x, s[design.sets[ii]], params.w)
            for ii in range(params.m)
        ],
        dtype=np.uint8,
    )


class TrevisanExtractor:
    """Trevisan's extractor with a fixed seed, for many blocks.

    With the seed fixed, each output bit is a parity of input bits. The
    corresponding matrix is computed once and applied through a
    :py:class:`~phaserng.extractors.Gf2LinearMap`.

    Parameters
    ----------
    seed :
        Seed, one bit per element of the design universe.
    params :
        Extractor sizes.
    design :
        Weak design. If *None*, *weak_design(params.m, params.t)* is used.
    """

    def __init__(
        self,
        seed: TrevisanSeed | np.ndarray | str,
        params: ExtractorParams,
        design: WeakDesign | None = None,
    ) -> None:
        if params.w is None or params.t is None:
            raise ValueError("'params' are not Trevisan parameters.")
        self.params = params
        self.design = design or weak_design(params.m, params.t)
        self.seed = _seed_bits(seed)
        self._map = Gf2LinearMap(
            trevisan_matrix(self.seed, params, self.design)
        )

    def extract(self, x: np.ndarray | str) -> np.ndarray:
        """Extract from a single block of *n* bits."""
        return self._map.apply(as_bits(x))  # noqa

    def extract_blocks(self, blocks: np.ndarray) -> np.ndarray:
        """Extract from each row of an *(n_blocks, n)* array."""
        return self._map.apply(np.atleast_2d(blocks))


# ==============================================
# Streams
# ==============================================
class ExtractionResult(TypedDict):
    """Result of :py:func:`~phaserng.extractors.stream_extract`."""

    bits: np.ndarray  #: Extracted bits.
    blocks: int  #: Number of input blocks processed.
    discarded_bits: int  #: Trailing input bits that did not fill a block.
    params: dict[str, Any]  #: Extractor parameters.
    seed_fingerprint: str  #: SHA-256 of the seed.
    epsilon_per_block: float  #: Security parameter of one block.
    epsilon_total: float  #: Composed security parameter, capped at 1.
    security_note: str  #: How the total is composed.


def stream_extract(
    raw: RawSampleStream | np.ndarray,
    params: ExtractorParams,
    seed: ToeplitzSeed | TrevisanSeed | np.ndarray | str,
    algorithm: Extractor_type | None = None,  # noqa
) -> ExtractionResult:
    """Extract from a long stream, one *n*-bit block at a time.

    The raw samples are expanded to bits, most significant bit first, and
    cut into consecutive *n*-bit blocks. Every block is processed with the
    same seed and the outputs are concatenated in block order. The trailing
    bits that do not fill a block are discarded.

    Reusing the seed makes the error grow linearly with the number of
    blocks; the result records the per-block and the composed error.

    Parameters
    ----------
    raw :
        Raw samples, or a bit array.
    params :
        Extractor sizes.
    seed :
        Extractor seed.
    algorithm :
        Extractor, by default *params.algorithm*.

    Raises
    ------
    LengthMismatchError
        If the stream holds fewer than *n* bits.
    """
    algorithm = algorithm or params.algorithm
    if algorithm != params.algorithm:
        raise ValueError(
            f"Parameters are sized for '{params.algorithm}', not '{algorithm}'."
        )
    bits = raw.to_bits() if isinstance(raw, RawSampleStream) else as_bits(raw)
    if bits.size < params.n:
        raise LengthMismatchError(
            f"The stream has {bits.size} bits, at least n={params.n} needed."
        )
    n_blocks = bits.size // params.n
    discarded = bits.size - n_blocks * params.n
    blocks = bits[: n_blocks * params.n].reshape(n_blocks, params.n)

    extractor: ToeplitzHash | TrevisanExtractor
    if algorithm == "toeplitz":
        extractor = ToeplitzHash(seed, params)
        eps = params.epsilon
    else:
        extractor = TrevisanExtractor(seed, params)
        eps = trevisan_error(params)
    logger.info(
        "Extracting %d blocks of %d bits with %s (%d bits discarded).",
        n_blocks,
        params.n,
        algorithm,
        discarded,
    )
    out = extractor.extract_blocks(blocks).ravel()

    if n_blocks > 1:
        logger.warning(
            "The seed is reused over %d blocks, the total error is %d times "
            "the per-block error.",
            n_blocks,
            n_blocks,
        )
    return {
        "bits": out,
        "blocks": n_blocks,
        "discarded_bits": discarded,
        "params": params.to_dict(),
        "seed_fingerprint": seed_fingerprint(seed),
        "epsilon_per_block": eps,
        "epsilon_total": min(1.0, n_blocks * eps),
        "security_note": (
            "One seed is reused for every block; errors compose linearly "
            "in the number of blocks."
        ),
    }


# ==============================================
# Seeds and files
# ==============================================
def demo_seed(
    params: ExtractorParams, seed: int
) -> ToeplitzSeed | TrevisanSeed:
    """Generate a pseudo-random extractor seed from the integer *seed*.

    Demo seeds are reproducible and therefore not uniform to an adversary
    who knows *seed*. Production runs must load a seed file.
    """
    logger.warning("Using a demo extractor seed; not for production use.")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=params.d, dtype=np.uint8)
    return _SEED_CLASSES[params.algorithm](bits)


def seed_fingerprint(
    seed: ToeplitzSeed | TrevisanSeed | np.ndarray | str,
) -> str:
    """Return the SHA-256 hex digest of the seed length and packed bits."""
    s = _seed_bits(seed)
    digest = hashlib.sha256(struct.pack("<Q", s.size))
    digest.update(pack_bits(s))  # noqa
    return digest.hexdigest()


def write_seed(
    seed: ToeplitzSeed | TrevisanSeed,
    params: ExtractorParams,
    filename: str | Path,
) -> None:
    """Write a seed file.

    The file holds the magic *QRNGSEED*, an algorithm tag byte (0 for
    Toeplitz, 1 for Trevisan), *n, m, d* as 8-byte little-endian unsigned
    integers and the *d* seed bits packed most significant bit first.
    """
    s = _seed_bits(seed)
    if s.size != params.d:
        raise LengthMismatchError(
            f"Seed has {s.size} bits, expected d={params.d}."
        )
    header = SEED_HEADER.pack(
        SEED_MAGIC,
        ALGORITHM_TAG[params.algorithm],
        params.n,
        params.m,
        params.d,
    )
    with open(filename, "wb") as fp:
        fp.write(header)
        fp.write(pack_bits(s))  # noqa


def read_seed(
    filename: str | Path,
) -> tuple[ToeplitzSeed | TrevisanSeed, dict[str, Any]]:
    """Read a seed file written by :py:func:`~phaserng.extractors.write_seed`.

    Returns
    -------
    The seed and a dict with the header fields *algorithm, n, m, d*.

    Raises
    ------
    ValueError
        If the file is not a seed file or is truncated.
    """
    with open(filename, "rb") as fp:
        content = fp.read()
    if len(content) < SEED_HEADER.size:
        raise ValueError(f"'{filename}' is too short to be a seed file.")
    magic, tag, n, m, d = SEED_HEADER.unpack_from(content)
    if magic != SEED_MAGIC:
        raise ValueError(f"'{filename}' is not a seed file.")
    algorithms = {v: k for k, v in ALGORITHM_TAG.items()}
    if tag not in algorithms:
        raise ValueError(f"Unknown algorithm tag {tag} in '{filename}'.")
    payload = content[SEED_HEADER.size :]
    if len(payload) < -(-d // 8):
        raise ValueError(f"'{filename}' is truncated.")
    bits = unpack_bits(payload, d)  # noqa
    header = {"algorithm": algorithms[tag], "n": n, "m": m, "d": d}
    return _SEED_CLASSES[algorithms[tag]](bits), header


def write_bits(
    bits: np.ndarray,
    filename: str | Path,
    metadata: dict[str, Any] | None = None,
) -> None:
    """Write bits packed most significant bit first, with no header.

    A sidecar JSON file *<filename>.json* records the number of bits and
    *metadata*.
    """
    bits = as_bits(bits)  # noqa
    with open(filename, "wb") as fp:
        fp.write(pack_bits(bits))  # noqa
    sidecar = {"n_bits": int(bits.size), **(metadata or {})}
    with open(f"{filename}.json", "w", encoding="utf-8") as fp:
        json.dump(sidecar, fp, indent=2, sort_keys=True)


def read_bits(filename: str | Path, n_bits: int | None = None) -> np.ndarray:
    """Read packed bits.

    If *n_bits* is *None*, the length is taken from the sidecar JSON file
    when present, otherwise every bit of the file is returned.
    """
    with open(filename, "rb") as fp:
        data = fp.read()
    sidecar = Path(f"{filename}.json")
    if n_bits is None and sidecar.exists():
        with open(sidecar, encoding="utf-8") as fp:
            n_bits = json.load(fp)["n_bits"]
    return unpack_bits(data, n_bits)  # noqa
