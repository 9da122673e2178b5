"""Exact arithmetic in the cyclic group Z_n.

Element orders, Euler's totient, factorization, the subgroup lattice
(one subgroup per divisor), and CRT splitting into coprime components.
All values are immutable and safe to share between workers.  Moduli are
assumed to fit in native machine integers (n <= 2**31); factorization is
plain trial division, which is plenty at that scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce

from .errors import InvalidDivisorError, InvalidFrameError, MixedModulusError

MAX_MODULUS = 2**31


@dataclass(frozen=True)
class Residue:
    """An element of Z_n, carrying its modulus.

    Mixing moduli is a programming error and raises rather than coercing.
    """

    value: int
    modulus: int

    def __post_init__(self) -> None:
        if not 1 <= self.modulus <= MAX_MODULUS:
            raise ValueError(f"modulus {self.modulus} out of range [1, 2**31]")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"value {self.value} not in [0, {self.modulus})")

    def _check(self, other: "Residue") -> None:
        if self.modulus != other.modulus:
            raise MixedModulusError(
                f"cannot combine residues mod {self.modulus} and mod {other.modulus}"
            )

    def __add__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue((self.value + other.value) % self.modulus, self.modulus)

    def __sub__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue((self.value - other.value) % self.modulus, self.modulus)

    def __neg__(self) -> "Residue":
        return Residue(-self.value % self.modulus, self.modulus)

    def scaled(self, k: int) -> "Residue":
        return Residue(k * self.value % self.modulus, self.modulus)

    def order(self) -> int:
        """Least k >= 1 with k * value == 0 (mod n)."""
        return self.modulus // math.gcd(self.value, self.modulus)


def element_order(r: Residue) -> int:
    """Additive order of r in Z_n, i.e. n / gcd(value, n)."""
    return r.order()


def euler_phi(n: int) -> int:
    """Number of 1 <= k <= n coprime to n."""
    if n < 1:
        raise ValueError("euler_phi requires n >= 1")
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as (prime, exponent) pairs, primes ascending."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    def __iter__(self):
        return iter(self.pairs)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    @property
    def radical(self) -> int:
        """Product of the distinct primes dividing n."""
        return reduce(lambda a, b: a * b, self.primes, 1)


def factorize(n: int) -> Factorization:
    """Exact prime factorization by trial division."""
    if not 1 <= n <= MAX_MODULUS:
        raise ValueError(f"factorize requires 1 <= n <= 2**31, got {n}")
    pairs = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        pairs.append((m, 1))
    return Factorization(n, tuple(pairs))


def prime_set(n: int) -> frozenset[int]:
    """The set of prime divisors of n (pi(n))."""
    return frozenset(factorize(n).primes)


@dataclass(frozen=True)
class Subgroup:
    """The unique subgroup of Z_n of order d: all multiples of n/d.

    Stored by (modulus, order) only; the element tuple is materialized
    lazily since the order is a complete key.
    """

    modulus: int
    order: int

    def __post_init__(self) -> None:
        if self.order < 1 or self.modulus % self.order != 0:
            raise InvalidDivisorError(
                f"order {self.order} does not divide modulus {self.modulus}"
            )

    @property
    def step(self) -> int:
        return self.modulus // self.order

    @cached_property
    def elements(self) -> tuple[int, ...]:
        return tuple(range(0, self.modulus, self.step))

    @cached_property
    def mask(self) -> int:
        m = 0
        for x in self.elements:
            m |= 1 << x
        return m

    def __contains__(self, x: int) -> bool:
        return x % self.step == 0

    def __le__(self, other: "Subgroup") -> bool:
        if self.modulus != other.modulus:
            raise MixedModulusError("subgroups of different ambient groups")
        return other.order % self.order == 0


def subgroup_of_order(n: int, d: int) -> Subgroup:
    """The unique order-d subgroup of Z_n; raises if d does not divide n."""
    return Subgroup(n, d)


def frattini_order(n: int) -> int:
    """Order of the Frattini subgroup of Z_n: n / rad(n)."""
    return n // factorize(n).radical


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def unitary_divisors(n: int) -> list[int]:
    """Divisors d of n with gcd(d, n/d) = 1, ascending."""
    return [d for d in divisors(n) if math.gcd(d, n // d) == 1]


@dataclass(frozen=True)
class CrtFrame:
    """Bijection Z_n <-> Z_{m1} x ... x Z_{mk} for pairwise coprime moduli."""

    moduli: tuple[int, ...]

    def __post_init__(self) -> None:
        for i, a in enumerate(self.moduli):
            if a < 1:
                raise InvalidFrameError(f"modulus {a} is not positive")
            for b in self.moduli[i + 1 :]:
                if math.gcd(a, b) != 1:
                    raise InvalidFrameError(f"moduli {a} and {b} are not coprime")

    @cached_property
    def product(self) -> int:
        return reduce(lambda a, b: a * b, self.moduli, 1)

    @cached_property
    def _weights(self) -> tuple[int, ...]:
        # weight_i = M_i * (M_i^-1 mod m_i) with M_i = n/m_i; combine is then
        # a dot product mod n.
        n = self.product
        weights = []
        for m in self.moduli:
            big = n // m
            weights.append(big * pow(big, -1, m) % n if m > 1 else 0)
        return tuple(weights)

    def split(self, r: Residue | int) -> tuple[int, ...]:
        x = r.value if isinstance(r, Residue) else r
        if isinstance(r, Residue) and r.modulus != self.product:
            raise MixedModulusError(
                f"residue mod {r.modulus} does not belong to a frame of product {self.product}"
            )
        return tuple(x % m for m in self.moduli)

    def combine(self, parts: tuple[int, ...] | list[int]) -> int:
        if len(parts) != len(self.moduli):
            raise InvalidFrameError(
                f"expected {len(self.moduli)} components, got {len(parts)}"
            )
        return sum(w * x for w, x in zip(self._weights, parts)) % self.product


def crt_frame(moduli) -> CrtFrame:
    """Build a CRT frame from pairwise coprime moduli."""
    return CrtFrame(tuple(moduli))


def crt_split(frame: CrtFrame, r: Residue | int) -> tuple[int, ...]:
    return frame.split(r)


def crt_combine(frame: CrtFrame, parts) -> int:
    return frame.combine(tuple(parts))
