"""Ground-truth permutation-group oracle.

Explicit permutations, stabilizer chains, and a brute-force digraph
automorphism search.  The search fixes vertices 0, 1, 2, ... in turn and,
for each level, finds a transversal of the next point stabilizer by
complete backtracking over images with forward-checking on adjacency;
the resulting chain gives the exact group order and a membership test
without ever enumerating the group.  Candidate images are tried in
ascending order so runs are reproducible; an optional RNG shuffles the
exploration order for self-consistency checks (the group found must not
depend on it).

Everything here is deliberately independent of the arithmetic criteria
it is used to test: adjacency is the only structure consulted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property

from .circulant import CirculantGraph
from .errors import (
    DegreeMismatchError,
    OracleTooLargeError,
    UndefinedArcTransitivityError,
)

Img = tuple[int, ...]

ORDER_GUARD = 10**6


def _compose(p: Img, q: Img) -> Img:
    """p after q: x -> p[q[x]]."""
    return tuple(p[x] for x in q)


def _inverse(p: Img) -> Img:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def _first_moved(p: Img) -> int:
    for i, j in enumerate(p):
        if i != j:
            return i
    return len(p)


@dataclass(frozen=True)
class Permutation:
    """A permutation of {0..n-1} in one-line notation."""

    img: Img

    def __post_init__(self) -> None:
        if sorted(self.img) != list(range(len(self.img))):
            raise ValueError(f"not a permutation of 0..{len(self.img) - 1}: {self.img}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def rotation(cls, n: int, k: int = 1) -> "Permutation":
        """The translation x -> x + k mod n."""
        return cls(tuple((x + k) % n for x in range(n)))

    @property
    def degree(self) -> int:
        return len(self.img)

    def __call__(self, x: int) -> int:
        return self.img[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise DegreeMismatchError(
                f"degrees {self.degree} and {other.degree} differ"
            )
        return Permutation(_compose(self.img, other.img))

    def inverse(self) -> "Permutation":
        return Permutation(_inverse(self.img))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.img))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Apply q first, then p."""
    return p * q


def inverse(p: Permutation) -> Permutation:
    return p.inverse()


def identity(n: int) -> Permutation:
    return Permutation.identity(n)


def orbit(point: int, gens) -> frozenset[int]:
    """Orbit of a point under the group generated by gens."""
    imgs = [g.img if isinstance(g, Permutation) else tuple(g) for g in gens]
    seen = {point}
    stack = [point]
    while stack:
        x = stack.pop()
        for p in imgs:
            y = p[x]
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# stabilizer chains


@dataclass(frozen=True)
class GroupHandle:
    """A permutation group held as a stabilizer chain.

    levels is a tuple of (base point, transversal) pairs in base order,
    where transversal maps each orbit point x to a group element sending
    the base point to x.  Membership is decided by sifting; the order is
    the product of orbit sizes.
    """

    degree: int
    generators: tuple[Permutation, ...]
    levels: tuple[tuple[int, dict[int, Img]], ...]

    @cached_property
    def order(self) -> int:
        total = 1
        for _, transversal in self.levels:
            total *= len(transversal)
        return total

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(b for b, _ in self.levels)

    def contains(self, p: Permutation | Img) -> bool:
        img = p.img if isinstance(p, Permutation) else tuple(p)
        if len(img) != self.degree:
            raise DegreeMismatchError(
                f"degree {len(img)} against group of degree {self.degree}"
            )
        for b, transversal in self.levels:
            x = img[b]
            if x == b:
                continue
            rep = transversal.get(x)
            if rep is None:
                return False
            img = _compose(_inverse(rep), img)
        return all(i == j for i, j in enumerate(img))

    def orbit_of(self, point: int) -> frozenset[int]:
        return orbit(point, self.generators)

    def elements(self, limit: int | None = ORDER_GUARD):
        """Yield every group element as an image tuple, depth first.

        Refuses to run when the order exceeds limit (pass None to lift
        the guard).
        """
        if limit is not None and self.order > limit:
            raise OracleTooLargeError(
                f"group order {self.order} exceeds enumeration guard {limit}"
            )
        ident = tuple(range(self.degree))
        levels = self.levels

        def rec(idx: int, prefix: Img):
            if idx == len(levels):
                yield prefix
                return
            _, transversal = levels[idx]
            for x in sorted(transversal):
                yield from rec(idx + 1, _compose(prefix, transversal[x]))

        yield from rec(0, ident)


def stabilizer_chain(gens, degree: int | None = None) -> GroupHandle:
    """Deterministic Schreier-Sims: build a GroupHandle from generators.

    Base points are chosen ascending (smallest point moved by the
    residue that created each level), and the outcome depends only on
    the generator order.
    """
    imgs = [g.img if isinstance(g, Permutation) else tuple(g) for g in gens]
    if degree is None:
        if not imgs:
            raise ValueError("degree required when no generators are given")
        degree = len(imgs[0])
    for p in imgs:
        if len(p) != degree:
            raise DegreeMismatchError("generators have mixed degrees")

    ident = tuple(range(degree))
    # levels[i] = [base point, own generators]; the generators acting at
    # level i are those stored at any level >= i (they fix earlier base
    # points by construction).
    levels: list[list] = []
    transversals: list[dict[int, Img]] = []

    def acting(idx: int) -> list[Img]:
        out = []
        for lvl in levels[idx:]:
            out.extend(lvl[1])
        return out

    def rebuild(idx: int) -> None:
        b = levels[idx][0]
        gens_here = acting(idx)
        transversal = {b: ident}
        queue = [b]
        qi = 0
        while qi < len(queue):
            x = queue[qi]
            qi += 1
            tx = transversal[x]
            for p in gens_here:
                y = p[x]
                if y not in transversal:
                    transversal[y] = _compose(p, tx)
                    queue.append(y)
        if idx < len(transversals):
            transversals[idx] = transversal
        else:
            transversals.append(transversal)

    def strip(p: Img, start: int) -> tuple[Img, int]:
        for idx in range(start, len(levels)):
            b = levels[idx][0]
            x = p[b]
            if x == b:
                continue
            rep = transversals[idx].get(x)
            if rep is None:
                return p, idx
            p = _compose(_inverse(rep), p)
        return p, len(levels)

    def add_generator(p: Img, start: int) -> bool:
        residue, idx = strip(p, start)
        if all(i == j for i, j in enumerate(residue)):
            return False
        if idx == len(levels):
            levels.append([_first_moved(residue), []])
            transversals.append({levels[idx][0]: ident})
        levels[idx][1].append(residue)
        for k in range(idx + 1):
            rebuild(k)
        return True

    for p in imgs:
        add_generator(p, 0)

    # close under Schreier generators until stable
    changed = True
    while changed:
        changed = False
        for idx in range(len(levels) - 1, -1, -1):
            rebuild(idx)
            gens_here = acting(idx)
            transversal = transversals[idx]
            for x in sorted(transversal):
                tx = transversal[x]
                for p in gens_here:
                    rep = transversal[p[x]]
                    schreier = _compose(_inverse(rep), _compose(p, tx))
                    if add_generator(schreier, idx + 1):
                        changed = True

    packed = tuple(
        (levels[i][0], transversals[i])
        for i in range(len(levels))
        if len(transversals[i]) > 1
    )
    return GroupHandle(
        degree=degree,
        generators=tuple(Permutation(p) for p in imgs),
        levels=packed,
    )


# ---------------------------------------------------------------------------
# digraph automorphism search


def _adjacency(g: CirculantGraph) -> tuple[list[int], list[int]]:
    """Out- and in-neighbor bitmasks per vertex."""
    n = g.n
    full = (1 << n) - 1
    smask = g.mask
    neg = 0
    for s in g.s:
        neg |= 1 << ((n - s) % n)
    out = []
    inn = []
    for v in range(n):
        if v:
            out.append(((smask << v) | (smask >> (n - v))) & full)
            inn.append(((neg << v) | (neg >> (n - v))) & full)
        else:
            out.append(smask)
            inn.append(neg)
    return out, inn


class _Searcher:
    """Backtracking embedding search between two digraphs of equal order.

    Holds adjacency masks and their complements; candidate masks are
    refined by forward checking as vertices are assigned in ascending
    order.
    """

    def __init__(self, out1, inn1, out2, inn2, n, rng=None):
        full = (1 << n) - 1
        self.n = n
        self.full = full
        self.out1 = out1
        self.inn1 = inn1
        self.out2 = out2
        self.inn2 = inn2
        self.nout2 = [full ^ m for m in out2]
        self.ninn2 = [full ^ m for m in inn2]
        self.notbit = [full ^ (1 << w) for w in range(n)]
        self.rng = rng

    def assign(self, img: list[int], cand: list[int], v: int, w: int) -> bool:
        """Set img[v] = w and refine candidates; False on a wipeout."""
        img[v] = w
        o1v = self.out1[v]
        i1v = self.inn1[v]
        o2w = self.out2[w]
        i2w = self.inn2[w]
        no2w = self.nout2[w]
        ni2w = self.ninn2[w]
        nb = self.notbit[w]
        for x in range(self.n):
            if img[x] >= 0:
                continue
            m = cand[x]
            m &= o2w if (o1v >> x) & 1 else no2w
            m &= i2w if (i1v >> x) & 1 else ni2w
            m &= nb
            if m == 0:
                img[v] = -1
                return False
            cand[x] = m
        return True

    def extend(self, img: list[int], cand: list[int]) -> Img | None:
        """Complete a partial assignment, or prove none exists."""
        v = -1
        for x in range(self.n):
            if img[x] < 0:
                v = x
                break
        if v < 0:
            return tuple(img)
        opts = cand[v]
        bits = []
        while opts:
            low = opts & -opts
            bits.append(low.bit_length() - 1)
            opts ^= low
        if self.rng is not None:
            self.rng.shuffle(bits)
        for w in bits:
            branch = cand.copy()
            if not self.assign(img, branch, v, w):
                continue
            found = self.extend(img, branch)
            if found is not None:
                return found
            img[v] = -1
        return None


def _aut_chain(g: CirculantGraph, rng=None) -> tuple[list[Img], list[tuple[int, dict[int, Img]]]]:
    """Stabilizer chain of Aut(g) with base (0, 1, ..., n-1).

    At level i every vertex still permitted as an image of i is either
    reached by known generators fixing 0..i-1 or settled by a complete
    backtracking search, so each orbit (and hence the group) is exact.
    """
    n = g.n
    out, inn = _adjacency(g)
    searcher = _Searcher(out, inn, out, inn, n, rng=rng)
    ident = tuple(range(n))
    rho = tuple((x + 1) % n for x in range(n))
    gens: list[Img] = [rho] if n > 1 else []
    levels: list[tuple[int, dict[int, Img]]] = []

    img = [-1] * n
    cand = [searcher.full] * n

    for i in range(n):
        active = [p for p in gens if _first_moved(p) >= i]
        transversal: dict[int, Img] = {}

        def bfs():
            transversal.clear()
            transversal[i] = ident
            queue = [i]
            qi = 0
            while qi < len(queue):
                x = queue[qi]
                qi += 1
                tx = transversal[x]
                for p in active:
                    y = p[x]
                    if y not in transversal:
                        transversal[y] = _compose(p, tx)
                        queue.append(y)

        bfs()
        opts = cand[i]
        bits = []
        while opts:
            low = opts & -opts
            bits.append(low.bit_length() - 1)
            opts ^= low
        if rng is not None:
            rng.shuffle(bits)
        for v in bits:
            if v in transversal:
                continue
            trial_img = img.copy()
            trial_cand = cand.copy()
            if not searcher.assign(trial_img, trial_cand, i, v):
                continue
            found = searcher.extend(trial_img, trial_cand)
            if found is None:
                continue
            gens.append(found)
            active.append(found)
            bfs()
        if len(transversal) > 1:
            levels.append((i, dict(transversal)))
        if not searcher.assign(img, cand, i, i):
            raise AssertionError("identity stopped extending; search is broken")

    return gens, levels


def automorphism_generators(g: CirculantGraph, seed: int | None = None) -> list[Permutation]:
    """Generators of Aut(g); always includes the translation x -> x+1."""
    rng = random.Random(seed) if seed is not None else None
    gens, _ = _aut_chain(g, rng=rng)
    if not gens:
        return [Permutation.identity(g.n)]
    return [Permutation(p) for p in gens]


def automorphism_group(g: CirculantGraph, seed: int | None = None) -> GroupHandle:
    """Full automorphism group of the digraph as a GroupHandle."""
    rng = random.Random(seed) if seed is not None else None
    gens, levels = _aut_chain(g, rng=rng)
    return GroupHandle(
        degree=g.n,
        generators=tuple(Permutation(p) for p in gens) or (Permutation.identity(g.n),),
        levels=tuple(levels),
    )


def automorphism_extending(g: CirculantGraph, pairs) -> Permutation | None:
    """One automorphism with the given vertex -> image constraints, if any."""
    n = g.n
    out, inn = _adjacency(g)
    searcher = _Searcher(out, inn, out, inn, n)
    img = [-1] * n
    cand = [searcher.full] * n
    for v, w in pairs:
        if img[v] >= 0 or (cand[v] >> w) & 1 == 0:
            return None
        if not searcher.assign(img, cand, v, w):
            return None
    found = searcher.extend(img, cand)
    return Permutation(found) if found is not None else None


def are_isomorphic(g1: CirculantGraph, g2: CirculantGraph) -> bool:
    """Backtracking isomorphism test between two circulants."""
    if g1.n != g2.n or g1.valency != g2.valency:
        return False
    if g1.conn == g2.conn:
        return True
    n = g1.n
    out1, inn1 = _adjacency(g1)
    out2, inn2 = _adjacency(g2)
    searcher = _Searcher(out1, inn1, out2, inn2, n)
    img = [-1] * n
    cand = [searcher.full] * n
    return searcher.extend(img, cand) is not None


# ---------------------------------------------------------------------------
# transitivity and normality oracles


def is_arc_transitive(g: CirculantGraph, handle: GroupHandle | None = None) -> bool:
    """True iff Aut(g) is transitive on arcs.

    Decided by the orbit of the single arc (0, s0) under the group
    generators; the orbit must cover all n * |S| arcs.
    """
    if g.valency == 0:
        raise UndefinedArcTransitivityError(f"{g} has no arcs")
    if handle is None:
        handle = automorphism_group(g)
    n = g.n
    gens = [p.img for p in handle.generators]
    start = 0 * n + g.s[0]
    seen = {start}
    stack = [start]
    while stack:
        code = stack.pop()
        v, w = divmod(code, n)
        for p in gens:
            code2 = p[v] * n + p[w]
            if code2 not in seen:
                seen.add(code2)
                stack.append(code2)
    return len(seen) == n * g.valency


def is_translation_subgroup_normal(
    g: CirculantGraph, handle: GroupHandle | None = None
) -> bool:
    """True iff the standard regular subgroup <x -> x+1> is normal in Aut(g).

    Checks that each generator conjugates the translation to a
    translation; that already forces normality of the whole subgroup.
    """
    n = g.n
    if n == 1:
        return True
    if handle is None:
        handle = automorphism_group(g)
    for p in handle.generators:
        a = p.img
        conj = [0] * n
        for x in range(n):
            conj[a[x]] = a[(x + 1) % n]
        c = conj[0]
        if any(conj[x] != (x + c) % n for x in range(n)):
            return False
    return True


def exists_normal_regular_cyclic(
    g: CirculantGraph,
    handle: GroupHandle | None = None,
    guard: int = ORDER_GUARD,
) -> bool:
    """True iff Aut(g) has a normal subgroup that is cyclic and regular.

    The standard translation subgroup is tried first (free witness);
    otherwise the group elements are enumerated, each n-cycle spans a
    candidate regular subgroup, and normality is checked by conjugating
    with the group generators.  Raises OracleTooLargeError beyond the
    enumeration guard.
    """
    n = g.n
    if handle is None:
        handle = automorphism_group(g)
    if is_translation_subgroup_normal(g, handle):
        return True
    if handle.order > guard:
        raise OracleTooLargeError(
            f"|Aut| = {handle.order} exceeds enumeration guard {guard}"
        )
    gens = [p.img for p in handle.generators]
    tested: set[Img] = set()
    for el in handle.elements(limit=guard):
        # regular cyclic subgroup <=> el is a single n-cycle; walk the
        # orbit of 0, which doubles as the subgroup's power table:
        # el^j maps el^i(0) to el^(i+j)(0).
        walk = [0]
        x = el[0]
        while x != 0:
            walk.append(x)
            x = el[x]
        if len(walk) != n:
            continue
        position = [0] * n
        for idx, v in enumerate(walk):
            position[v] = idx
        # canonical key for <el>: its unique element sending 0 to 1
        shift = position[1]
        key = tuple(walk[(position[v] + shift) % n] for v in range(n))
        if key in tested:
            continue
        tested.add(key)
        normal = True
        for a in gens:
            conj = [0] * n
            for v in range(n):
                conj[a[v]] = a[el[v]]
            j = position[conj[0]]
            if any(conj[v] != walk[(position[v] + j) % n] for v in range(n)):
                normal = False
                break
        if normal:
            return True
    return False
