"""Exact integer and residue arithmetic.

Everything here works on Python integers, which are already arbitrary
precision and canonical.  Polynomials are plain coefficient lists, lowest
degree first; the zero polynomial is the empty list.
"""

from __future__ import annotations

import bisect
import functools
import hashlib
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ModuliNotCoprime, ZeroInverse, ZeroMatrixError

Poly = list  # list[int], lowest degree first

# Miller-Rabin with these bases is exact below this bound.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_DETERMINISTIC_LIMIT = 3317044064679887385961981
_MR_ROUNDS = 32  # 4**-32 = 2**-64


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin test; exact below 3.3e24, error < 2**-64 above."""
    if n < 2:
        return False
    for q in _DETERMINISTIC_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < _DETERMINISTIC_LIMIT:
        bases: Iterable[int] = _DETERMINISTIC_BASES
    else:
        # bases derived from n so the answer is reproducible
        seed = hashlib.sha256(str(n).encode()).digest()
        rng = random.Random(seed)
        bases = [rng.randrange(2, n - 1) for _ in range(_MR_ROUNDS)]
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeModulus:
    p: int

    def __post_init__(self):
        if not is_probable_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def bit_length(self) -> int:
        return self.p.bit_length()

    def __int__(self):
        return self.p


def _modulus(p) -> int:
    return p.p if isinstance(p, PrimeModulus) else int(p)


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, Residue):
            if other.modulus != self.modulus:
                raise ValueError("residues with different moduli")
            return other.value
        return int(other)

    def __add__(self, other):
        return Residue((self.value + self._coerce(other)) % self.modulus, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return Residue((self.value - self._coerce(other)) % self.modulus, self.modulus)

    def __rsub__(self, other):
        return Residue((self._coerce(other) - self.value) % self.modulus, self.modulus)

    def __mul__(self, other):
        return Residue(self.value * self._coerce(other) % self.modulus, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return Residue(-self.value % self.modulus, self.modulus)

    def __eq__(self, other):
        if isinstance(other, Residue):
            return self.modulus == other.modulus and self.value == other.value
        if isinstance(other, int):
            return (other - self.value) % self.modulus == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __int__(self):
        return self.value

    def inverse(self) -> Residue:
        return residue_inverse(self)


def mod_reduce(x: int, p) -> Residue:
    m = _modulus(p)
    return Residue(x % m, m)


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroInverse(f"0 has no inverse modulo {p}")
    return pow(a, -1, p)


def residue_inverse(a: Residue) -> Residue:
    return Residue(inv_mod(a.value, a.modulus), a.modulus)


def ceil_sqrt(x: int) -> int:
    if x <= 0:
        return 0
    return math.isqrt(x - 1) + 1


def ceil_log2(x: int) -> int:
    """Smallest h with 2**h >= x, for x >= 1."""
    return (x - 1).bit_length() if x > 1 else 0


def hadamard_invariant_bound(m: int, n: int, norm_inf: int) -> int:
    """Ceiling of min(sqrt(n)**m * B**m, sqrt(m)**n * B**n) for B = norm_inf."""
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    if norm_inf < 0:
        raise ValueError("norm must be non-negative")
    if norm_inf == 0:
        raise ZeroMatrixError("zero matrix has rank 0")
    # sqrt(n)**m * B**m = sqrt(n**m * B**(2m)), exact ceiling via isqrt
    first = ceil_sqrt(n**m * norm_inf ** (2 * m))
    second = ceil_sqrt(m**n * norm_inf ** (2 * n))
    return min(first, second)


def balanced(x: int, modulus: int) -> int:
    """Representative of x in (-M/2, M/2]."""
    x %= modulus
    if 2 * x > modulus:
        x -= modulus
    return x


def crt_combine(residues: Sequence) -> int:
    """Balanced CRT reconstruction from Residue objects or (value, modulus) pairs."""
    pairs = [(r.value, r.modulus) if isinstance(r, Residue) else (int(r[0]), int(r[1]))
             for r in residues]
    moduli = [m for _, m in pairs]
    for i in range(len(moduli)):
        for j in range(i + 1, len(moduli)):
            if math.gcd(moduli[i], moduli[j]) != 1:
                raise ModuliNotCoprime(f"moduli {moduli[i]} and {moduli[j]} share a factor")
    x, M = 0, 1
    for v, m in pairs:
        # x ≡ previous residues mod M; lift to also satisfy x ≡ v mod m
        t = (v - x) * inv_mod(M, m) % m
        x += M * t
        M *= m
    return balanced(x, M)


class CRTAccumulator:
    """Incremental CRT over a growing set of coprime moduli."""

    def __init__(self):
        self.value = 0
        self.modulus = 1

    def add(self, v: int, m: int) -> None:
        t = (v - self.value) * inv_mod(self.modulus, m) % m
        self.value += self.modulus * t
        self.modulus *= m

    def balanced(self) -> int:
        return balanced(self.value, self.modulus)


# --- primes ---------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _sieve(limit: int) -> tuple:
    if limit < 2:
        return ()
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return tuple(i for i, f in enumerate(flags) if f)


def primes_up_to(limit: int) -> tuple:
    return _sieve(int(limit))


def primes_in_window(lower: int, upper: int) -> tuple:
    """Primes q with lower < q <= upper."""
    ps = _sieve(int(upper))
    return ps[bisect.bisect_right(ps, lower):]


def _draw_below(rng, n: int) -> int:
    if hasattr(rng, "randbelow"):
        return rng.randbelow(n)
    return rng.randrange(n)


def prime_window_bound(count: int, magnitude_bound: int, lower: int = 1) -> int:
    """Double the bound until (lower, bound] holds at least `count` primes."""
    bound = max(int(magnitude_bound), 2, lower + 1)
    while len(primes_in_window(lower, bound)) < count:
        bound *= 2
    return bound


@dataclass(frozen=True)
class PrimeSample:
    primes: tuple
    bound: int


def sample_prime_set(count: int, magnitude_bound: int, rng, lower: int = 1) -> PrimeSample:
    """`count` distinct primes from (lower, bound], uniformly without replacement.

    The bound starts at `magnitude_bound` and is doubled until the window
    holds enough primes.  `rng` is anything exposing ``randbelow`` (a
    challenge stream) or ``randrange`` (``random.Random``).
    """
    bound = prime_window_bound(count, magnitude_bound, lower)
    pool = list(primes_in_window(lower, bound))
    # partial Fisher-Yates
    for i in range(count):
        j = i + _draw_below(rng, len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    return PrimeSample(tuple(sorted(pool[:count])), bound)


@functools.lru_cache(maxsize=4)
def _large_prime_pool(below: int, count: int) -> tuple:
    out = []
    q = below - 1
    while len(out) < count:
        if is_probable_prime(q):
            out.append(q)
        q -= 2 if q % 2 else 1
    return tuple(out)


def large_primes(count: int, below: int = 1 << 61) -> tuple:
    """The `count` largest primes below `below` (deterministic, cached)."""
    size = 64
    while size < count:
        size *= 2
    return _large_prime_pool(below, size)[:count]


def next_prime_3mod4(start: int) -> int:
    q = start + (3 - start) % 4
    while not is_probable_prime(q):
        q += 4
    return q


# --- integer polynomials --------------------------------------------------


def poly_trim(f) -> list:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_degree(f) -> int:
    f = poly_trim(f)
    return len(f) - 1 if f else -1


def poly_add(f, g) -> list:
    n = max(len(f), len(g))
    return poly_trim([(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)])


def poly_sub(f, g) -> list:
    return poly_add(f, [-c for c in g])


def poly_mul(f, g) -> list:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly_trim(out)


def poly_eval(f, x: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
    return acc


def poly_divmod_monic(f, g) -> tuple:
    """Division of integer polynomial f by monic g over the integers."""
    g = poly_trim(g)
    if not g or g[-1] != 1:
        raise ValueError("divisor must be monic")
    r = poly_trim(f)
    dg = len(g) - 1
    if len(r) - 1 < dg:
        return [], r
    q = [0] * (len(r) - dg)
    for k in range(len(r) - 1 - dg, -1, -1):
        c = r[k + dg]
        q[k] = c
        if c:
            for i in range(dg + 1):
                r[k + i] -= c * g[i]
    return poly_trim(q), poly_trim(r[:dg])


def poly_eval_horner_mod(g, lam: int, p) -> int:
    """g(lam) mod p by Horner's rule; result in [0, p)."""
    m = _modulus(p)
    x = lam % m
    acc = 0
    for c in reversed(g):
        acc = (acc * x + c) % m
    return acc


def eval_bit_bound(g, lam: int) -> int:
    """Bit count b with |g(lam)| < 2**b, from coefficient sizes alone."""
    if not g:
        return 0
    lb = abs(lam).bit_length()
    top = max(abs(c).bit_length() + i * lb for i, c in enumerate(g))
    return top + len(g).bit_length()


def eval_equals_integer(g, lam: int, delta: int, value_bit_bound: int, rng=None) -> bool:
    """Decide g(lam) == delta exactly through residues.

    Both |g(lam)| and |delta| must be below 2**value_bit_bound.  The check
    runs Horner's rule modulo enough word-size primes that their product
    exceeds 2**(value_bit_bound + 1), so agreement modulo every prime forces
    equality.  With `rng`, the primes are drawn from a wider pool.
    """
    needed = (value_bit_bound + 2) // 60 + 1  # every pool prime exceeds 2**60
    if rng is None:
        primes = large_primes(needed)
    else:
        pool = list(large_primes(4 * needed))
        primes = []
        for i in range(needed):
            j = i + _draw_below(rng, len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
            primes.append(pool[i])
    for q in primes:
        if poly_eval_horner_mod(g, lam, q) != delta % q:
            return False
    return True


# --- polynomials over Z_p --------------------------------------------------


def rpoly_trim(f, p: int) -> list:
    f = [c % p for c in f]
    while f and f[-1] == 0:
        f.pop()
    return f


def rpoly_monic(f, p: int) -> list:
    f = rpoly_trim(f, p)
    if not f:
        return f
    inv = inv_mod(f[-1], p)
    return [c * inv % p for c in f]


def rpoly_mul(f, g, p: int) -> list:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return rpoly_trim(out, p)


def rpoly_divmod(f, g, p: int) -> tuple:
    g = rpoly_trim(g, p)
    if not g:
        raise ZeroInverse("division by the zero polynomial")
    r = rpoly_trim(f, p)
    dg = len(g) - 1
    if len(r) - 1 < dg:
        return [], r
    inv = inv_mod(g[-1], p)
    q = [0] * (len(r) - dg)
    for k in range(len(r) - 1 - dg, -1, -1):
        c = r[k + dg] * inv % p
        q[k] = c
        if c:
            for i in range(dg + 1):
                r[k + i] = (r[k + i] - c * g[i]) % p
    return rpoly_trim(q, p), rpoly_trim(r[:dg], p)


def rpoly_gcd(f, g, p: int) -> list:
    a, b = rpoly_trim(f, p), rpoly_trim(g, p)
    while b:
        a, b = b, rpoly_divmod(a, b, p)[1]
    return rpoly_monic(a, p)


def rpoly_lcm(f, g, p: int) -> list:
    d = rpoly_gcd(f, g, p)
    return rpoly_monic(rpoly_divmod(rpoly_mul(f, g, p), d, p)[0], p)
