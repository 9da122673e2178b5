"""Circulant digraphs Circ(n, S) and their constructions.

A circulant has vertex set Z_n with an arc v -> w exactly when w - v
lies in the connection set S; digraph semantics are primary and an
undirected graph is the special case S = -S.  Connection sets keep both
a sorted tuple and a bitmask so membership tests and the S + h = S scans
used by the kernel search are word operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .cyclic import CrtFrame, Subgroup
from .errors import (
    InvalidConnectionSetError,
    InvalidQuotientError,
    NotACirculantError,
)


@dataclass(frozen=True)
class ConnectionSet:
    """A subset of Z_n \\ {0}, sorted ascending."""

    modulus: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise InvalidConnectionSetError(f"modulus {self.modulus} < 1")
        previous = 0
        for v in self.values:
            if v <= 0 or v >= self.modulus:
                raise InvalidConnectionSetError(
                    f"element {v} outside [1, {self.modulus - 1}]"
                )
            if v <= previous:
                raise InvalidConnectionSetError("elements must be strictly ascending")
            previous = v

    @cached_property
    def mask(self) -> int:
        m = 0
        for v in self.values:
            m |= 1 << v
        return m

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, x: int) -> bool:
        return 0 <= x < self.modulus and (self.mask >> x) & 1 == 1

    def shifted(self, h: int) -> int:
        """Bitmask of S + h (mod n)."""
        n = self.modulus
        h %= n
        full = (1 << n) - 1
        return ((self.mask << h) | (self.mask >> (n - h))) & full if h else self.mask

    def negated(self) -> "ConnectionSet":
        n = self.modulus
        return ConnectionSet(n, tuple(sorted((n - v) % n for v in self.values)))


@dataclass(frozen=True)
class CirculantGraph:
    """The pair (n, S) with arcs v -> v + s for s in S."""

    n: int
    conn: ConnectionSet

    def __post_init__(self) -> None:
        if self.conn.modulus != self.n:
            raise InvalidConnectionSetError(
                f"connection set mod {self.conn.modulus} does not match order {self.n}"
            )

    @property
    def s(self) -> tuple[int, ...]:
        return self.conn.values

    @property
    def mask(self) -> int:
        return self.conn.mask

    @property
    def valency(self) -> int:
        return len(self.conn.values)

    def has_arc(self, v: int, w: int) -> bool:
        return (w - v) % self.n in self.conn

    def arcs(self) -> list[tuple[int, int]]:
        """All arcs as ordered pairs, ascending."""
        return [(v, (v + s) % self.n) for v in range(self.n) for s in self.s]

    def __str__(self) -> str:
        return f"Circ({self.n}, {{{','.join(map(str, self.s))}}})"


def make(n: int, s) -> CirculantGraph:
    """Validate and normalize (n, S) into a circulant."""
    values = sorted(set(int(x) for x in s))
    return CirculantGraph(n, ConnectionSet(n, tuple(values)))


def complete(n: int) -> CirculantGraph:
    """K_n = Circ(n, Z_n \\ {0}); K_1 is the trivial circulant Circ(1, {})."""
    return make(n, range(1, n))


def cycle(n: int) -> CirculantGraph:
    """The n-cycle Circ(n, {1, n-1}); directed K_2 collapses to Circ(2, {1})."""
    if n < 2:
        raise InvalidConnectionSetError("cycle requires n >= 2")
    return make(n, {1, n - 1})


def unit_circulant(n: int) -> CirculantGraph:
    """Circ(n, S) with S the generators of Z_n (units mod n)."""
    return make(n, (k for k in range(1, n) if math.gcd(k, n) == 1))


def is_connected(g: CirculantGraph) -> bool:
    """True iff S generates Z_n, i.e. gcd(S + {n}) = 1."""
    d = g.n
    for v in g.s:
        d = math.gcd(d, v)
        if d == 1:
            return True
    return d == 1


def is_connected_bfs(g: CirculantGraph) -> bool:
    """Reachability from 0 following arcs; cross-check for is_connected."""
    seen = 1
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for s in g.s:
            w = (v + s) % g.n
            if not (seen >> w) & 1:
                seen |= 1 << w
                frontier.append(w)
    return seen == (1 << g.n) - 1


def is_undirected(g: CirculantGraph) -> bool:
    """True iff S = -S, so every arc pairs with its reverse."""
    return g.conn == g.conn.negated()


def tensor_product(g1: CirculantGraph, g2: CirculantGraph) -> CirculantGraph:
    """Direct (tensor) product under CRT: T = {(s1, s2)} in Z_{n1*n2}.

    Requires coprime orders.  An order-1 factor acts as the identity,
    since Circ(1, {}) stands in for the one-vertex complete graph.
    """
    if math.gcd(g1.n, g2.n) != 1:
        raise NotACirculantError(
            f"orders {g1.n} and {g2.n} are not coprime; product is not a circulant"
        )
    if g1.n == 1:
        return g2
    if g2.n == 1:
        return g1
    frame = CrtFrame((g1.n, g2.n))
    values = sorted(frame.combine((a, b)) for a in g1.s for b in g2.s)
    return make(g1.n * g2.n, values)


def lex_blowup(g: CirculantGraph, b: int) -> CirculantGraph:
    """Lexicographic product g[empty_b]: preimage of S under mod-m reduction."""
    if b < 1:
        raise ValueError("blowup multiplicity must be >= 1")
    if b == 1:
        return g
    m = g.n
    return make(m * b, (x for x in range(1, m * b) if x % m in g.conn))


def translation_kernel(g: CirculantGraph) -> Subgroup:
    """Largest subgroup K with S + K = S; S is a union of K-cosets."""
    n = g.n
    if n == 1:
        return Subgroup(1, 1)
    kernel = [h for h in range(1, n) if g.conn.shifted(h) == g.mask]
    return Subgroup(n, len(kernel) + 1)


def quotient_by(g: CirculantGraph, k: Subgroup) -> CirculantGraph:
    """Quotient modulo a subgroup of the translation kernel.

    Uses the canonical isomorphism sending the coset x + K to
    x mod (n/|K|).  Inverse of lex_blowup: blowing the quotient back up
    by |K| recovers g exactly.
    """
    if k.modulus != g.n:
        raise InvalidQuotientError(f"subgroup of Z_{k.modulus} against order {g.n}")
    m = g.n // k.order
    for h in k.elements:
        if g.conn.shifted(h) != g.mask:
            raise InvalidQuotientError(
                f"subgroup of order {k.order} is not inside the translation kernel"
            )
    return make(m, sorted({v % m for v in g.s}))


def edge_list(g: CirculantGraph) -> str:
    """Arcs as 'v w' lines, ordered pairs ascending."""
    return "".join(f"{v} {w}\n" for v, w in sorted(g.arcs()))


def to_dot(g: CirculantGraph) -> str:
    """DOT serialization; undirected graphs collapse arc pairs to edges."""
    if is_undirected(g) and g.valency > 0:
        lines = ["graph {"]
        for v, w in sorted(g.arcs()):
            if v < w:
                lines.append(f"  {v} -- {w};")
    else:
        lines = ["digraph {"]
        for v, w in sorted(g.arcs()):
            lines.append(f"  {v} -> {w};")
    if g.valency == 0:
        lines.extend(f"  {v};" for v in range(g.n))
    lines.append("}")
    return "\n".join(lines) + "\n"
