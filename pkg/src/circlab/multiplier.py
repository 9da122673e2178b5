"""Multiplicative automorphisms of Z_n and their action on connection sets.

Aut(Z_n) is exactly the units k mod n acting by x -> kx.  The units
fixing a connection set S form the Godsil subgroup; its transitivity on
S is the arithmetic side of the classification, and n times its order is
the order of the normalizer of the translation subgroup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circulant import CirculantGraph
from .cyclic import prime_set
from .errors import HypothesisViolationError, NotAUnitError
from .groups import Permutation


@dataclass(frozen=True)
class Multiplier:
    """A unit k mod n acting on Z_n by x -> kx."""

    modulus: int
    k: int

    def __post_init__(self) -> None:
        if not 0 <= self.k < self.modulus:
            raise NotAUnitError(f"{self.k} not reduced mod {self.modulus}")
        if math.gcd(self.k, self.modulus) != 1:
            raise NotAUnitError(f"{self.k} is not a unit mod {self.modulus}")

    def __call__(self, x: int) -> int:
        return self.k * x % self.modulus

    def as_permutation(self) -> Permutation:
        n = self.modulus
        return Permutation(tuple(self.k * x % n for x in range(n)))


@dataclass(frozen=True)
class MultiplierSet:
    """The units k mod n with kS = S, sorted ascending; a group."""

    modulus: int
    units: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    def __contains__(self, k: int) -> bool:
        return k in self.units


def units_mod(n: int) -> tuple[int, ...]:
    """All units mod n, ascending; (0,) for n = 1."""
    if n == 1:
        return (0,)
    return tuple(k for k in range(1, n) if math.gcd(k, n) == 1)


def aut_c_s(g: CirculantGraph) -> MultiplierSet:
    """The Godsil subgroup: units k with k * S = S (setwise)."""
    n = g.n
    smask = g.mask
    keep = []
    for k in units_mod(n):
        m = 0
        for s in g.s:
            m |= 1 << (k * s % n)
        if m == smask:
            keep.append(k)
    return MultiplierSet(n, tuple(keep))


def is_transitive_on_s(ms: MultiplierSet, s) -> bool:
    """True iff the orbit of min(S) under the multiplier group is all of S."""
    values = tuple(s)
    if not values:
        raise ValueError("transitivity on an empty set is undefined")
    n = ms.modulus
    target = frozenset(values)
    orbit = {k * min(values) % n for k in ms.units}
    return orbit == target


def is_regular_on_s(ms: MultiplierSet, s) -> bool:
    """Transitive with trivial point stabilizers: orbit = S and |ms| = |S|."""
    values = tuple(s)
    return is_transitive_on_s(ms, values) and len(ms) == len(values)


def normalizer_order(g: CirculantGraph) -> int:
    """Order of the normalizer of the translation subgroup: n * |Aut(C,S)|."""
    return g.n * len(aut_c_s(g))


def lift_through_quotient(n: int, m: int, k_bar: int) -> Multiplier:
    """Lift a unit mod m to a unit mod n reducing to it, smallest first.

    Requires m | n and pi(m) = pi(n) (the quotient must not lose prime
    divisors, i.e. the kernel sits inside the Frattini subgroup).
    """
    if m < 1 or n % m != 0:
        raise HypothesisViolationError(f"{m} does not divide {n}")
    if prime_set(m) != prime_set(n):
        raise HypothesisViolationError(
            f"prime sets differ: pi({m}) != pi({n}); kernel exceeds Frattini subgroup"
        )
    k_bar %= m
    if math.gcd(k_bar, m) != 1:
        raise NotAUnitError(f"{k_bar} is not a unit mod {m}")
    for k in range(k_bar, n, m) if m > 1 else range(1, n + 1):
        if math.gcd(k, n) == 1:
            return Multiplier(n, k % n if n > 1 else 0)
    raise AssertionError("no lift found; unreachable when pi(m) = pi(n)")
