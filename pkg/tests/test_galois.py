# -*- coding: utf-8 -*-

import pytest
import phaserng as phr
import numpy as np
from .fixture_data import *  # noqa

field_sizes = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27]


def clmul(a: int, b: int) -> int:
    # Carry-less product of two GF(2) polynomials.
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        b >>= 1
    return result


def smallest_irreducible(w: int) -> int:
    reducible = {
        clmul(a, b)
        for da in range(1, w // 2 + 1)
        for a in range(1 << da, 1 << (da + 1))
        for b in range(1 << (w - da), 1 << (w - da + 1))
    }
    return next(
        f for f in range((1 << w) | 1, 1 << (w + 1), 2) if f not in reducible
    )


class Test_prime_power:
    @pytest.mark.parametrize(
        "q, expected",
        [(2, (2, 1)), (8, (2, 3)), (9, (3, 2)), (49, (7, 2)), (97, (97, 1))],
    )
    def test_prime_powers(self, q: int, expected: tuple[int, int]) -> None:
        assert phr.prime_power(q) == expected
        assert phr.is_prime_power(q)

    @pytest.mark.parametrize("q", [0, 1, 6, 12, 100, -4, 2.0, True])
    def test_not_prime_powers(self, q) -> None:  # type: ignore
        with pytest.raises(phr.InvalidFieldSizeError):
            phr.prime_power(q)
        assert not phr.is_prime_power(q)

    @pytest.mark.parametrize(
        "x, expected", [(1, 2), (6, 7), (10, 11), (15, 16), (24, 25), (26, 27)]
    )
    def test_next_prime_power(self, x: int, expected: int) -> None:
        assert phr.next_prime_power(x) == expected


class Test_find_irreducible:
    def test_small_fields(self) -> None:
        assert phr.find_irreducible(2, 2) == [1, 1, 1]
        assert phr.find_irreducible(3, 2) == [1, 0, 1]

    @pytest.mark.parametrize("p, k", [(2, 3), (2, 4), (3, 3), (5, 2)])
    def test_no_roots(self, p: int, k: int) -> None:
        f = phr.find_irreducible(p, k)
        assert len(f) == k + 1
        assert f[-1] == 1
        values = [sum(c * x**i for i, c in enumerate(f)) % p for x in range(p)]
        assert all(values)


class Test_GaloisField:
    @pytest.mark.parametrize("q", field_sizes)
    def test_field_axioms(self, q: int) -> None:
        gf = phr.GaloisField(q)
        e = np.arange(q)

        np.testing.assert_array_equal(gf.add(0, e), e)
        np.testing.assert_array_equal(gf.mul(1, e), e)
        np.testing.assert_array_equal(gf.mul(0, e), np.zeros(q))
        np.testing.assert_array_equal(gf.add_table, gf.add_table.T)
        np.testing.assert_array_equal(gf.mul_table, gf.mul_table.T)

        # Every row is a permutation: inverses exist.
        for a in range(q):
            assert sorted(gf.add_table[a]) == list(range(q))
        for a in range(1, q):
            assert sorted(gf.mul_table[a, 1:]) == list(range(1, q))

    @pytest.mark.parametrize("q", [4, 9, 25, 27])
    def test_distributive_associative(self, q: int) -> None:
        gf = phr.GaloisField(q)
        a, b, c = np.meshgrid(np.arange(q), np.arange(q), np.arange(q))
        np.testing.assert_array_equal(
            gf.mul(a, gf.add(b, c)), gf.add(gf.mul(a, b), gf.mul(a, c))
        )
        np.testing.assert_array_equal(
            gf.mul(a, gf.mul(b, c)), gf.mul(gf.mul(a, b), c)
        )

    def test_gf4(self) -> None:
        gf = phr.GaloisField(4)
        assert gf.modulus == [1, 1, 1]
        assert gf.mul(2, 3) == 1
        assert gf.mul(2, 2) == 3
        assert gf.add(2, 3) == 1
        assert repr(gf) == "GaloisField(4)"

    def test_prime_field(self) -> None:
        gf = phr.GaloisField(7)
        assert gf.mul(3, 5) == 1
        assert gf.add(4, 5) == 2

    @pytest.mark.parametrize("w", [3, 4])
    def test_consistent_with_gf2_mul(self, w: int) -> None:
        gf = phr.GaloisField(2**w)
        modulus = sum(c << i for i, c in enumerate(gf.modulus))
        for a in range(2**w):
            for b in range(2**w):
                assert gf.mul(a, b) == phr.gf2_mul(a, b, w, modulus)

    def test_poly_eval(self) -> None:
        gf = phr.GaloisField(5)
        values = gf.poly_eval(np.array([[1, 2, 3], [4, 0, 0]]), np.arange(5))
        np.testing.assert_array_equal(values[0], [1, 1, 2, 4, 2])
        np.testing.assert_array_equal(values[1], [4, 4, 4, 4, 4])

    def test_poly_eval_extension_field(self) -> None:
        gf = phr.GaloisField(9)
        rng = np.random.default_rng(0)
        coefficients = rng.integers(0, 9, size=(6, 4))
        x = np.arange(9)
        # Naive evaluation: sum of c_j * x^j
        expected = np.zeros((6, 9), dtype=np.int64)
        power = np.ones(9, dtype=np.int64)
        for jj in range(4):
            expected = gf.add(expected, gf.mul(coefficients[:, jj, None], power))
            power = gf.mul(power, x)
        np.testing.assert_array_equal(gf.poly_eval(coefficients, x), expected)

    @pytest.mark.parametrize("q", [6, 10, 1])
    def test_invalid_size(self, q: int) -> None:
        with pytest.raises(phr.InvalidFieldSizeError):
            phr.GaloisField(q)


class Test_gf2:
    def test_known_products(self) -> None:
        # GF(2^8) with x^8 + x^4 + x^3 + x + 1
        assert phr.gf2_mul(0x57, 0x83, 8, 0x11B) == 0xC1
        assert phr.gf2_mul(0x53, 0xCA, 8, 0x11B) == 0x01
        assert phr.gf2_mul(0x57, 0x01, 8, 0x11B) == 0x57
        assert phr.gf2_mul(0x57, 0x00, 8, 0x11B) == 0x00

    def test_small_moduli(self) -> None:
        assert phr.gf2_irreducible(1) == 0b11
        assert phr.gf2_irreducible(2) == 0b111
        assert phr.gf2_irreducible(3) == 0b1011
        assert phr.gf2_irreducible(4) == 0b10011

    @pytest.mark.parametrize("w", range(2, 11))
    def test_smallest_irreducible(self, w: int) -> None:
        assert phr.gf2_irreducible(w) == smallest_irreducible(w)

    @pytest.mark.parametrize("w", [5, 13, 16, 31])
    def test_multiplicative_group(self, w: int) -> None:
        modulus = phr.gf2_irreducible(w)
        assert modulus.bit_length() == w + 1
        rng = np.random.default_rng(w)
        for a in rng.integers(1, 2**w, size=5):
            # a^(2^w) = a in GF(2^w)
            x = int(a)
            for _ in range(w):
                x = phr.gf2_mul(x, x, w, modulus)
            assert x == int(a)

    def test_invalid_degree(self) -> None:
        with pytest.raises(ValueError):
            phr.gf2_irreducible(0)
