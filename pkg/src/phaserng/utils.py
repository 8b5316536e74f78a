# -*- coding: utf-8 -*-
"""Module containing some useful functions."""

import numpy as np
from .config import *  # noqa


def difference_lists_of_str(
    A: str | list[str],
    B: str | list[str],
) -> list[str]:
    r"""Return the strings contained in the list *A* but not in the list *B*.

    In set formalism, this function return a list representing the set difference
    :math:`A \backslash ( A \cap B)`.
    Note that the operation is not commutative.

    Parameters
    ----------
    A:
        list of strings A.
    B:
        list of strings B.
    """
    A = str2list(A)
    B = str2list(B)

    return list(set(A) - set(B))


def str2list(x: str | list[str]) -> list[str]:
    """
    Cast a *str* type to a *list[str]* type.

    If the input is already a list, then it return it as-is.

    Parameters
    ----------
    x :
        Input string or list of strings.
    """
    if not isinstance(x, list):
        x = [x]
    return x


def as_bits(x: np.ndarray | list[int] | str) -> np.ndarray:
    """Return *x* as a 1-D *uint8* array of 0/1 values.

    Strings of '0' and '1' characters are accepted as well.

    Parameters
    ----------
    x :
        Bit sequence.

    Raises
    ------
    ValueError
        If *x* contains values other than 0 and 1.
    """
    if isinstance(x, str):
        x = [int(c) for c in x]
    bits = np.asarray(x)
    if bits.ndim != 1:
        raise ValueError("A bit string must be a 1-D sequence.")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("A bit string can only contain 0 and 1.")
    return bits.astype(np.uint8)


def pack_bits(bits: np.ndarray) -> bytes:
    """Pack a bit array into bytes, MSB-first.

    The last byte is zero-padded if the length is not a multiple of 8.
    """
    return np.packbits(as_bits(bits), bitorder="big").tobytes()


def unpack_bits(data: bytes, n_bits: int | None = None) -> np.ndarray:
    """Unpack MSB-first packed bytes into a bit array.

    Parameters
    ----------
    data :
        Packed bytes.
    n_bits :
        Number of bits to keep. If *None*, all the ``8*len(data)`` bits are
        returned.
    """
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="big")
    if n_bits is not None:
        if n_bits > bits.size:
            raise ValueError(
                f"Requested {n_bits} bits but only {bits.size} are available."
            )
        bits = bits[:n_bits]
    return bits


def bits_to_int(bits: np.ndarray) -> int:
    """Read a bit array as an unsigned integer, MSB-first."""
    bits = np.asarray(bits, dtype=np.uint8)
    packed = np.packbits(bits, bitorder="big").tobytes()
    # Drop the zero padding of the last byte.
    return int.from_bytes(packed, "big") >> ((-bits.size) % 8)
