"""Tests for the integer substrate, with independent oracles for derived values."""

import random
from fractions import Fraction
from math import gcd, isqrt, log

import numpy as np
import pytest
from scipy.integrate import quad

from cycloscan.arith import (
    big_H,
    divisors,
    euler_phi,
    factorize,
    inner_mu_sum,
    is_prime,
    log_integral,
    mobius,
    omega,
    segmented_primes,
    squarefree_divisors,
    tau2,
)


def oracle_factor(n):
    """Trial-division factorization, the independent oracle."""
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return tuple(sorted(out.items()))


class TestFactorize:
    def test_one(self):
        assert factorize(1).factors == ()

    def test_twelve(self):
        assert factorize(12).factors == ((2, 2), (3, 1))

    def test_mersenne_31_is_prime(self):
        n = 2**31 - 1
        assert all(n % d for d in range(2, isqrt(n) + 1))  # oracle
        assert factorize(n).factors == ((n, 1),)
        assert is_prime(n)

    def test_small_range_vs_oracle(self):
        for n in range(1, 3000):
            assert factorize(n).factors == oracle_factor(n)

    def test_roundtrip_random_63bit(self):
        rng = random.Random(20240801)
        for _ in range(10_000):
            n = rng.randrange(1, 2**63)
            f = factorize(n)
            prod = 1
            prev = 0
            for p, e in f.factors:
                assert p > prev and e >= 1
                assert is_prime(p)
                prev = p
                prod *= p**e
            assert prod == n == f.value

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            factorize(0)


class TestMultiplicativeFunctions:
    def test_values(self):
        assert (mobius(1), mobius(6), mobius(12)) == (1, 1, 0)
        assert (euler_phi(1), tau2(1), omega(1)) == (1, 1, 0)
        assert (euler_phi(12), tau2(12), omega(12)) == (4, 6, 2)
        assert euler_phi(97) == 96

    def test_multiplicativity_random_coprime_pairs(self):
        rng = random.Random(7)
        done = 0
        while done < 1000:
            m = rng.randrange(1, 10**6)
            n = rng.randrange(1, 10**6)
            if gcd(m, n) != 1:
                continue
            assert euler_phi(m * n) == euler_phi(m) * euler_phi(n)
            assert mobius(m * n) == mobius(m) * mobius(n)
            assert tau2(m * n) == tau2(m) * tau2(n)
            done += 1

    def test_divisor_lists(self):
        assert divisors(12) == [1, 2, 3, 4, 6, 12]
        assert squarefree_divisors(12) == [1, 2, 3, 6]


class TestBigH:
    def test_trivial(self):
        assert big_H(1) == 1

    def test_double_sum_oracle_to_1e4(self):
        """Closed form validated against the literal double sum for all
        n <= 10^4 (inner counts vectorized, but computed from the raw
        condition d | k^2, independent of the closed form)."""
        N = 10_000
        inner = np.zeros(N + 1, dtype=np.int64)
        for d in range(1, N + 1):
            k = np.arange(1, d + 1, dtype=np.int64)
            inner[d] = int(np.count_nonzero((k * k) % d == 0))
        oracle = np.zeros(N + 1, dtype=np.int64)
        for d in range(1, N + 1):
            oracle[d::d] += inner[d]
        assert inner[2] == 1 and oracle[2] == 2  # spec examples by enumeration
        assert oracle[4] == 4
        for n in range(1, N + 1):
            assert big_H(n) == oracle[n], n


class TestInnerMuSum:
    def test_equals_reciprocal_to_1e4(self):
        for m in range(1, 10_001):
            assert inner_mu_sum(m) == Fraction(1, m)

    def test_pair_enumeration_oracle(self):
        # brute force over all (d, e) pairs in [1, m]^2 with d*e | m
        for m in (1, 6, 30):
            total = Fraction(0)
            for d in range(1, m + 1):
                for e in range(1, m + 1):
                    if m % (d * e) == 0:
                        mu = mobius(d)
                        if mu:
                            total += Fraction(mu, e)
            assert total == inner_mu_sum(m) == Fraction(1, m)


def oracle_primes(lo, hi, q=1, a=0):
    out = []
    for n in range(max(lo, 2), hi + 1):
        if all(n % d for d in range(2, isqrt(n) + 1)):
            if q == 1 or n % q == a % q:
                out.append(n)
    return out


class TestSegmentedPrimes:
    def test_examples(self):
        assert list(segmented_primes(2, 20)) == [2, 3, 5, 7, 11, 13, 17, 19]
        assert list(segmented_primes(2, 50, 4, 1)) == [5, 13, 17, 29, 37, 41]
        assert list(segmented_primes(2, 10, 3, 2)) == [2, 5]

    def test_against_trial_division(self):
        assert list(segmented_primes(2, 3000)) == oracle_primes(2, 3000)
        assert list(segmented_primes(500, 3000, 7, 3)) == oracle_primes(500, 3000, 7, 3)

    def test_invalid_progression(self):
        with pytest.raises(ValueError):
            list(segmented_primes(2, 10, 4, 2))

    def test_shard_partition_invariance(self):
        full = list(segmented_primes(2, 10**6))
        for k in (4, 16):
            edges = [2 + (10**6 - 2) * i // k for i in range(k)] + [10**6]
            shards = []
            for i in range(k):
                lo = edges[i] if i == 0 else edges[i] + 1
                shards.extend(segmented_primes(lo, edges[i + 1]))
            assert shards == full

    def test_crosses_segment_boundary(self):
        lo, hi = (1 << 20) - 50, (1 << 20) + 50
        assert list(segmented_primes(lo, hi)) == oracle_primes(lo, hi)


class TestLogIntegral:
    def test_offset_convention(self):
        assert log_integral(2) == 0.0

    def test_against_quadrature_oracle(self):
        # independent oracle: adaptive quadrature of 1/log t from 2 to x
        for x in (10.0, 1e3, 1e6, 1e8):
            oracle, err = quad(lambda t: 1.0 / log(t), 2.0, x, limit=400)
            assert err < 1e-6 * max(oracle, 1.0)
            assert abs(log_integral(x) - oracle) <= 1e-9 * oracle + 1e-9

    def test_value_at_1e6(self):
        assert abs(log_integral(1e6) - 78626.5) <= 0.5

    def test_lower_bound(self):
        for x in (10.0, 100.0, 1e5):
            assert log_integral(x) >= (x - 2) / log(x)

    def test_domain(self):
        with pytest.raises(ValueError):
            log_integral(1.5)
