import random

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from certilin.arith import (CRTAccumulator, PrimeModulus, Residue, balanced, ceil_log2, ceil_sqrt,
                            crt_combine, eval_equals_integer, hadamard_invariant_bound, inv_mod,
                            is_probable_prime, large_primes, mod_reduce, next_prime_3mod4,
                            poly_add, poly_divmod_monic, poly_eval, poly_eval_horner_mod, poly_mul,
                            poly_sub, poly_trim, prime_window_bound, primes_in_window, primes_up_to,
                            residue_inverse, rpoly_gcd, rpoly_lcm, rpoly_mul, sample_prime_set)
from certilin.errors import ModuliNotCoprime, ZeroInverse, ZeroMatrixError


# --- residues ---------------------------------------------------------------------


@pytest.mark.parametrize("x,p,want", [(7, 5, 2), (-1, 5, 4), (0, 2, 0)])
def test_mod_reduce_examples(x, p, want):
    r = mod_reduce(x, p)
    assert r.value == want and r.modulus == p


def test_mod_reduce_accepts_prime_modulus():
    assert mod_reduce(12, PrimeModulus(7)).value == 5


def test_prime_modulus_rejects_composites():
    with pytest.raises(ValueError):
        PrimeModulus(15)


def test_residue_inverse_examples():
    assert residue_inverse(Residue(3, 7)).value == 5
    assert residue_inverse(Residue(1, 101)).value == 1
    with pytest.raises(ZeroInverse):
        residue_inverse(Residue(0, 5))


@pytest.mark.parametrize("p", list(sympy.primerange(2, 102)))
def test_inverse_exhaustive(p):
    for a in range(1, p):
        assert a * inv_mod(a, p) % p == 1


# --- bounds -----------------------------------------------------------------------


def test_hadamard_examples():
    assert hadamard_invariant_bound(2, 2, 1) == 2
    assert hadamard_invariant_bound(1, 1, 5) == 5
    H = hadamard_invariant_bound(3, 3, 2)
    assert H == 42
    assert ceil_log2(H) == 6


def test_hadamard_zero_norm():
    with pytest.raises(ZeroMatrixError):
        hadamard_invariant_bound(2, 2, 0)


@given(st.integers(0, 10**40))
def test_ceil_sqrt(x):
    r = ceil_sqrt(x)
    assert r * r >= x and (r == 0 or (r - 1) ** 2 < x)


@given(st.integers(1, 10**30))
def test_ceil_log2(x):
    k = ceil_log2(x)
    assert 2**k >= x and (k == 0 or 2 ** (k - 1) < x)


# --- CRT --------------------------------------------------------------------------


def test_crt_examples():
    assert crt_combine([Residue(1, 3), Residue(1, 5)]) == 1
    assert crt_combine([Residue(2, 3), Residue(3, 5)]) == -7
    assert crt_combine([Residue(0, 2), Residue(0, 3)]) == 0


def test_crt_rejects_shared_factor():
    with pytest.raises(ModuliNotCoprime):
        crt_combine([Residue(1, 3), Residue(2, 3)])


def test_crt_roundtrip_exhaustive():
    # every x in (-M/2, M/2], M up to 10^4
    for moduli in ([3, 5], [4, 9, 25], [7, 11, 13], [16, 625]):
        M = 1
        for m in moduli:
            M *= m
        for x in range(-M // 2 + 1, M // 2 + 1):
            assert crt_combine([(x % m, m) for m in moduli]) == x


@given(st.integers(-10**30, 10**30))
def test_crt_accumulator_recovers(x):
    acc = CRTAccumulator()
    for q in large_primes(3):
        acc.add(x % q, q)
    assert acc.balanced() == x


@given(st.integers(-10**6, 10**6), st.integers(2, 10**4))
def test_balanced_range(x, m):
    b = balanced(x, m)
    assert (b - x) % m == 0 and -m < 2 * b <= m


# --- primes -----------------------------------------------------------------------


def test_primality_against_sympy():
    rng = random.Random(3)
    for _ in range(500):
        n = rng.randrange(1, 10**12)
        assert is_probable_prime(n) == sympy.isprime(n)
    assert is_probable_prime(2**61 - 1) and not is_probable_prime(561)


def test_prime_lists():
    assert primes_up_to(20) == (2, 3, 5, 7, 11, 13, 17, 19)
    assert primes_in_window(10, 20) == (11, 13, 17, 19)
    qs = large_primes(4)
    assert len(set(qs)) == 4 and all(sympy.isprime(q) for q in qs)


def test_next_prime_3mod4():
    q = next_prime_3mod4(1000)
    assert q >= 1000 and q % 4 == 3 and sympy.isprime(q)


def test_sample_prime_set_examples():
    s = sample_prime_set(4, 20, random.Random(0))
    assert len(set(s.primes)) == 4 and set(s.primes) <= {2, 3, 5, 7, 11, 13, 17, 19}
    assert sample_prime_set(1, 2, random.Random(0)).primes == (2,)
    big = sample_prime_set(25, 10, random.Random(0))
    assert big.bound > 10
    assert len(primes_up_to(big.bound)) >= 25
    assert len(set(big.primes)) == 25 and max(big.primes) <= big.bound


def test_sample_prime_set_seeded_draws():
    for seed in range(100):
        rng = random.Random(seed)
        count = rng.randrange(1, 30)
        mag = rng.randrange(2, 500)
        s = sample_prime_set(count, mag, random.Random(seed))
        assert len(s.primes) == count == len(set(s.primes))
        assert all(sympy.isprime(q) and q <= s.bound for q in s.primes)
        assert s.bound >= mag


def test_sample_prime_set_lower_floor():
    s = sample_prime_set(5, 10, random.Random(1), lower=50)
    assert all(q > 50 for q in s.primes)
    assert prime_window_bound(5, 10, 50) == s.bound


def test_sample_prime_set_reproducible():
    a = sample_prime_set(6, 100, random.Random(9))
    b = sample_prime_set(6, 100, random.Random(9))
    assert a == b


# --- polynomials ------------------------------------------------------------------


def test_horner_mod_examples():
    assert poly_eval_horner_mod([-1, 0, 1], 2, 7) == 3
    assert poly_eval_horner_mod([5], 123, 3) == 2
    assert poly_eval_horner_mod([0, 1], 0, 5) == 0


def test_eval_equals_integer_examples():
    assert eval_equals_integer([-1, 0, 1], 2, 3, 8)
    assert not eval_equals_integer([-1, 0, 1], 2, 4, 8)
    assert eval_equals_integer([0], 0, 0, 1)


def test_eval_equals_integer_random():
    rng = random.Random(11)
    for _ in range(1000):
        g = [rng.randint(-10**6, 10**6) for _ in range(rng.randint(1, 51))]
        lam = rng.randint(-50, 50)
        value = poly_eval(g, lam)
        delta = value if rng.random() < 0.5 else value + rng.choice([1, -1, 2**200, rng.randint(1, 10**9)])
        bits = max(value.bit_length(), abs(delta).bit_length()) + 2
        assert eval_equals_integer(g, lam, delta, bits, rng) == (delta == value)


coeffs = st.lists(st.integers(-50, 50), min_size=1, max_size=8)


@given(coeffs, coeffs, st.integers(-20, 20))
def test_poly_ring_homomorphism(f, g, x):
    assert poly_eval(poly_add(f, g), x) == poly_eval(f, x) + poly_eval(g, x)
    assert poly_eval(poly_sub(f, g), x) == poly_eval(f, x) - poly_eval(g, x)
    assert poly_eval(poly_mul(f, g), x) == poly_eval(f, x) * poly_eval(g, x)


@given(coeffs, coeffs)
def test_poly_divmod_monic(f, g):
    g = poly_trim(g)[:4] + [1]
    q, r = poly_divmod_monic(f, g)
    assert poly_trim(poly_add(poly_mul(q, g), r)) == poly_trim(f)
    assert len(poly_trim(r)) < len(g)


@settings(max_examples=50)
@given(st.lists(st.integers(0, 100), min_size=2, max_size=5), st.lists(st.integers(0, 100), min_size=2, max_size=5))
def test_rpoly_gcd_lcm(f, g):
    p = 101
    f = f[:-1] + [1]
    g = g[:-1] + [1]
    d = rpoly_gcd(f, g, p)
    m = rpoly_lcm(f, g, p)
    assert rpoly_mul(d, m, p) == rpoly_mul(f, g, p)
