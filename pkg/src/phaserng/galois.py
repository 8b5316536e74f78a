# mypy: show_error_codes
"""Finite field arithmetic used by the weak designs and by the one-bit
extractor.

Two representations are provided:

- :py:class:`~phaserng.galois.GaloisField` builds addition and
  multiplication tables for a small field *GF(q)*, *q* any prime power.
- :py:func:`~phaserng.galois.gf2_mul` multiplies elements of *GF(2^w)*
  stored as Python integers, which is convenient for large *w*.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math

import numpy as np

from .config import *  # noqa
from .utils import *  # noqa

logger = logging.getLogger(__name__)


class InvalidFieldSizeError(ValueError):
    """The field size is not a prime power."""


def prime_power(q: int) -> tuple[int, int]:
    """Return *(p, k)* such that *q = p**k* with *p* prime.

    Raises
    ------
    InvalidFieldSizeError
        If *q* is not a prime power.
    """
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 2:
        raise InvalidFieldSizeError(f"{q} is not a prime power.")
    q = int(q)
    # Smallest prime factor by trial division.
    p = next((d for d in range(2, math.isqrt(q) + 1) if q % d == 0), q)
    k = 0
    while q % p == 0:
        q //= p
        k += 1
    if q != 1:
        raise InvalidFieldSizeError(f"{p**k * q} is not a prime power.")
    return p, k


def is_prime_power(q: int) -> bool:
    """Return *True* if *q* is a prime power."""
    try:
        prime_power(q)
    except InvalidFieldSizeError:
        return False
    return True


def next_prime_power(x: int) -> int:
    """Return the smallest prime power greater than or equal to *x*."""
    q = max(int(x), 2)
    while not is_prime_power(q):
        q += 1
    return q


def _poly_rem(a: list[int], b: list[int], p: int) -> list[int]:
    # Coefficients are stored lowest degree first; b is monic.
    a = a.copy()
    db = len(b) - 1
    for shift in range(len(a) - 1 - db, -1, -1):
        coef = a[shift + db] % p
        if coef:
            for ii, bb in enumerate(b):
                a[shift + ii] = (a[shift + ii] - coef * bb) % p
    return [c % p for c in a[:db]]


def _monic_polys(degree: int, p: int):  # type: ignore
    for low in itertools.product(range(p), repeat=degree):
        yield list(low) + [1]


def find_irreducible(p: int, k: int) -> list[int]:
    """Return the first monic irreducible polynomial of degree *k* over
    *GF(p)* in lexicographic order, lowest degree coefficient first.

    The search is exhaustive: a candidate is accepted when no monic
    polynomial of degree *1..k//2* divides it.
    """
    for f in _monic_polys(k, p):
        if all(
            any(_poly_rem(f, g, p))
            for d in range(1, k // 2 + 1)
            for g in _monic_polys(d, p)
        ):
            return f
    raise ValueError(  # pragma: no cover
        f"No irreducible polynomial of degree {k} over GF({p})."
    )


class GaloisField:
    """The finite field *GF(q)* with *q = p**k*.

    Elements are the integers *0..q-1*. The base-*p* digits of an element
    are the coefficients of a polynomial modulo an irreducible polynomial
    of degree *k*, lowest degree digit first. For prime *q* this is plain
    arithmetic modulo *q*.

    Example
    -------
    >>> import phaserng as phr
    >>> gf = phr.GaloisField(4)
    >>> gf.mul(2, 3)
    1

    Parameters
    ----------
    q :
        Field size.

    Raises
    ------
    InvalidFieldSizeError
        If *q* is not a prime power.
    """

    def __init__(self, q: int) -> None:
        self.p, self.k = prime_power(q)
        self.q = int(q)
        elements = np.arange(self.q)

        if self.k == 1:
            self.modulus = [0, 1]
            self.add_table = np.add.outer(elements, elements) % self.q
            self.mul_table = np.multiply.outer(elements, elements) % self.q
        else:
            self.modulus = find_irreducible(self.p, self.k)
            digits = self._digits(elements)  # (q, k)
            self.add_table = self._from_digits(
                (digits[:, None, :] + digits[None, :, :]) % self.p
            )
            # basis[b, i] are the digits of x**i * b
            basis = np.empty((self.q, self.k, self.k), dtype=np.int64)
            basis[:, 0, :] = digits
            for ii in range(1, self.k):
                basis[:, ii, :] = self._times_x(basis[:, ii - 1, :])
            product = np.einsum("ai,bij->abj", digits, basis) % self.p
            self.mul_table = self._from_digits(product)
        self.add_table = self.add_table.astype(np.int64)
        self.mul_table = self.mul_table.astype(np.int64)
        logger.debug(
            "Built GF(%d) with modulus coefficients %s.", self.q, self.modulus
        )

    def _digits(self, x: np.ndarray) -> np.ndarray:
        powers = self.p ** np.arange(self.k)
        return (x[..., None] // powers) % self.p

    def _from_digits(self, digits: np.ndarray) -> np.ndarray:
        return digits @ (self.p ** np.arange(self.k))

    def _times_x(self, digits: np.ndarray) -> np.ndarray:
        # Multiply by x and reduce with the monic modulus.
        top = digits[:, -1:]
        shifted = np.concatenate(
            [np.zeros_like(top), digits[:, :-1]], axis=1
        )
        low = np.asarray(self.modulus[:-1])
        return (shifted - top * low) % self.p

    def __repr__(self) -> str:
        return f"GaloisField({self.q})"

    def add(self, a: int | np.ndarray, b: int | np.ndarray) -> np.ndarray:
        """Field addition, elementwise."""
        return self.add_table[a, b]

    def mul(self, a: int | np.ndarray, b: int | np.ndarray) -> np.ndarray:
        """Field multiplication, elementwise."""
        return self.mul_table[a, b]

    def poly_eval(self, coefficients: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Evaluate polynomials with Horner's rule.

        Parameters
        ----------
        coefficients :
            Array of shape *(n_polys, c)*, coefficient of degree 0 first.
        x :
            Evaluation points.

        Returns
        -------
        Array of shape *(n_polys, len(x))*.
        """
        coefficients = np.atleast_2d(coefficients)
        x = np.asarray(x)
        values = np.zeros((coefficients.shape[0], x.size), dtype=np.int64)
        for jj in range(coefficients.shape[1] - 1, -1, -1):
            values = self.add_table[
                self.mul_table[values, x[None, :]], coefficients[:, jj, None]
            ]
        return values


def gf2_mul(a: int, b: int, w: int, modulus: int) -> int:
    """Multiply two elements of *GF(2^w)* stored as integers.

    Parameters
    ----------
    a, b :
        Field elements, bit *i* is the coefficient of *x^i*.
    w :
        Field degree.
    modulus :
        Irreducible polynomial of degree *w*, *x^w* bit included.
    """
    result = 0
    top = 1 << w
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return result


def _gf2_poly_mulmod(a: int, b: int, f: int) -> int:
    deg_f = f.bit_length() - 1
    return gf2_mul(a, b, deg_f, f)


def _gf2_poly_gcd(a: int, b: int) -> int:
    while b:
        while a and a.bit_length() >= b.bit_length():
            a ^= b << (a.bit_length() - b.bit_length())
        a, b = b, a
    return a


@functools.lru_cache(maxsize=None)
def gf2_irreducible(w: int) -> int:
    """Return the smallest irreducible polynomial of degree *w* over
    *GF(2)*, encoded as an integer with the *x^w* bit set.

    Irreducibility is checked with Ben-Or's test: *f* is irreducible iff
    *gcd(x^(2^i) - x, f) = 1* for all *i <= w/2*.
    """
    if w < 1:
        raise ValueError("The field degree 'w' must be positive.")
    if w == 1:
        return 0b11
    # Candidates need a nonzero constant term.
    for f in range((1 << w) | 1, 1 << (w + 1), 2):
        x_power = 0b10
        for _ in range(w // 2):
            x_power = _gf2_poly_mulmod(x_power, x_power, f)
            if _gf2_poly_gcd(f, x_power ^ 0b10) != 1:
                break
        else:
            logger.debug("GF(2^%d) modulus: %#x.", w, f)
            return f
    raise ValueError(  # pragma: no cover
        f"No irreducible polynomial of degree {w}."
    )
