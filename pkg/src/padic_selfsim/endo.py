"""Conjugation by s = diag(p^v_1, ..., p^v_n) as a virtual endomorphism of SL(n, Z_p).

The conjugator is never built as a matrix: ``(s g s^-1)_ij = p^(v_i - v_j) g_ij``
is an exact entry-wise scaling.  On Gamma(p^m) with m = max_ij (v_j - v_i) every
division is exact, so the image lands in SL(n, Z_p) with T fewer certified digits.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .congruence import (
    GroupElement,
    elementary,
    is_congruence_member,
    iter_congruence_generators,
    random_congruence_element,
    torus_element,
)
from .errors import BudgetError, PrecisionError, PreconditionError
from .padic import PMatrix, check_prime, reduce


@dataclass(frozen=True)
class VirtualEndo:
    n: int
    p: int
    vals: tuple
    m: int
    T: int

    def to_json(self) -> str:
        return json.dumps({"p": self.p, "vals": list(self.vals), "level": self.m, "gap": self.T})

    def power(self, t: int) -> "VirtualEndo":
        """phi^t, i.e. conjugation by s^t."""
        if t < 1:
            raise PreconditionError("power must be positive")
        return make_endo(self.p, [t * v for v in self.vals])


def make_endo(p: int, vals: Sequence[int]) -> VirtualEndo:
    check_prime(p)
    vals = tuple(int(v) for v in vals)
    if len(vals) < 2:
        raise PreconditionError("need at least two valuations")
    if sum(vals) != 0:
        raise PreconditionError("conjugator not determinant-1: valuations must sum to 0")
    if len(set(vals)) != len(vals):
        raise PreconditionError("degenerate conjugator: valuations must be pairwise distinct")
    T = max(vals) - min(vals)
    return VirtualEndo(len(vals), p, vals, T, T)


def apply(phi: VirtualEndo, g: GroupElement) -> GroupElement:
    """s g s^-1 for g in Gamma(p^m); the result is certified to precision K - T."""
    if g.n != phi.n or g.p != phi.p:
        raise PreconditionError("element and endomorphism disagree on n or p")
    K = g.K
    if K < phi.m + phi.T:
        raise PrecisionError(
            f"precision exhausted: need {phi.m + phi.T} digits, have {K}",
            required=phi.m + phi.T,
            available=K,
        )
    if not is_congruence_member(g, phi.m):
        raise PreconditionError(f"outside H0: element not congruent to I mod {phi.p}^{phi.m}")
    p, v = phi.p, phi.vals
    Kout = K - phi.T
    mod = p**Kout
    rows = []
    for i, row in enumerate(g.rows):
        out = []
        for j, x in enumerate(row):
            e = v[i] - v[j]
            if e >= 0:
                out.append(x * p**e % mod)
            else:
                # x = 0 mod p^m and -e <= T = m, so this division is exact.
                out.append(x // p ** (-e) % mod)
        rows.append(tuple(out))
    return GroupElement(PMatrix(p, Kout, tuple(rows)))


def iterate(phi: VirtualEndo, g: GroupElement, t: int) -> GroupElement:
    for _ in range(t):
        g = apply(phi, g)
    return g


def contracted_position(phi: VirtualEndo) -> tuple:
    """The entry (i, j) that apply() divides by p^T."""
    i = phi.vals.index(min(phi.vals))
    j = phi.vals.index(max(phi.vals))
    return i, j


# -- candidate normal subgroups ------------------------------------------------

@dataclass(frozen=True)
class SubgroupSpec:
    """A subgroup of SL(n, Z_p) with membership decidable at finite precision.

    kind is one of ``congruence`` (level = k), ``center``,
    ``diagonal-torus-intersection`` (diagonal matrices in Gamma(p^level)) and
    ``finite-generated`` (the closure of ``generators``; membership is tested on
    the image mod p^level, which is sound for refutation).
    """

    kind: str
    level: int = 0
    generators: tuple = field(default=(), compare=False)

    KINDS = ("congruence", "center", "diagonal-torus-intersection", "finite-generated")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise PreconditionError(f"unknown subgroup kind {self.kind!r}")
        if self.kind == "finite-generated" and not self.generators:
            raise PreconditionError("finite-generated subgroup needs generators")


def congruence_subgroup(k: int) -> SubgroupSpec:
    return SubgroupSpec("congruence", k)


def center_subgroup() -> SubgroupSpec:
    return SubgroupSpec("center")


def torus_intersection(k: int) -> SubgroupSpec:
    return SubgroupSpec("diagonal-torus-intersection", k)


def generated_subgroup(gens: Sequence[GroupElement], level: int) -> SubgroupSpec:
    return SubgroupSpec("finite-generated", level, tuple(gens))


def roots_of_unity(n: int, p: int, K: int) -> list[int]:
    """Residues mod p^K of the zeta in Z_p with zeta^n = 1."""
    mod = p**K
    if p == 2:
        return [1, mod - 1] if n % 2 == 0 else [1]
    out = set()
    for a in range(1, p):
        # Teichmuller lift of a is a^(p^(K-1)) mod p^K.
        z = pow(a, p ** (K - 1), mod)
        if pow(z, n, mod) == 1:
            out.add(z)
    return sorted(out)


def center_elements(n: int, p: int, K: int) -> list[GroupElement]:
    out = []
    for z in roots_of_unity(n, p, K):
        rows = tuple(tuple(z if i == j else 0 for j in range(n)) for i in range(n))
        out.append(GroupElement(PMatrix(p, K, rows)))
    return out


_generated_cache: dict = {}


def _generated_image(N: SubgroupSpec, cap: int = 200_000) -> frozenset:
    """Image of the closure of <generators> in SL(n, Z/p^level), by BFS."""
    key = (N.level, tuple(reduce(g.matrix, N.level) for g in N.generators))
    if key in _generated_cache:
        return _generated_cache[key]
    gens = [g.truncate(N.level) for g in N.generators]
    gens += [g.inverse() for g in gens]
    n, p = gens[0].n, gens[0].p
    start = GroupElement.identity(n, p, N.level)
    seen = {start.rows}
    frontier = [start]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = x @ s
                if y.rows not in seen:
                    seen.add(y.rows)
                    if len(seen) > cap:
                        raise BudgetError(f"generated subgroup image exceeds {cap} elements")
                    nxt.append(y)
        frontier = nxt
    image = frozenset(seen)
    _generated_cache[key] = image
    return image


def is_member(N: SubgroupSpec, g: GroupElement) -> bool:
    """Membership of g in N, decided from the certified digits of g.

    For the torus and center a False answer means the difference is visible
    at precision K, so it is never a precision artefact.
    """
    if N.kind == "congruence":
        return is_congruence_member(g, N.level)
    if N.kind == "center":
        return any(g.congruent(z) for z in center_elements(g.n, g.p, g.K))
    if N.kind == "diagonal-torus-intersection":
        off = all(x == 0 for i, r in enumerate(g.rows) for j, x in enumerate(r) if i != j)
        return off and is_congruence_member(g, N.level)
    if g.K < N.level:
        raise PrecisionError("insufficient precision for membership", N.level, g.K)
    return reduce(g.matrix, N.level) in _generated_image(N)


def sample_subgroup(
    N: SubgroupSpec, n: int, p: int, K: int, rng: random.Random, within: int = 0
) -> Iterator[GroupElement]:
    """Generators of N (intersected with Gamma(p^within)) first, then random elements.

    The stream may be finite (the center) or unbounded.
    """
    if N.kind == "center":
        for z in center_elements(n, p, K):
            if is_congruence_member(z, within):
                yield z
        return
    if N.kind == "congruence":
        lvl = max(N.level, within)
        yield from iter_congruence_generators(n, p, lvl, K)
        while True:
            yield random_congruence_element(n, p, lvl, K, rng)
    if N.kind == "diagonal-torus-intersection":
        lvl = max(N.level, within, 1)
        mod = p**K
        for i in range(n - 1):
            yield torus_element(n, p, K, i, 1 + p**lvl)
        while True:
            g = GroupElement.identity(n, p, K)
            for i in range(n - 1):
                g = g @ torus_element(n, p, K, i, (1 + p**lvl * rng.randrange(mod)) % mod)
            yield g
    # finite-generated: generators, then random words in them
    gens = [g for g in N.generators]
    pool = gens + [g.inverse() for g in gens]
    for g in gens:
        if is_congruence_member(g, within):
            yield g
    while True:
        w = pool[rng.randrange(len(pool))]
        for _ in range(rng.randrange(1, 6)):
            w = w @ pool[rng.randrange(len(pool))]
        if is_congruence_member(w, within):
            yield w


@dataclass(frozen=True)
class Verdict:
    """Outcome of a sampling search.

    ``kind`` is ``witness`` when a counterexample was found; otherwise
    ``invariant-on-sample`` / ``normal-on-sample``, which only means that no
    counterexample turned up among ``checked`` samples.
    """

    kind: str
    checked: int
    witness: tuple = ()

    @property
    def found(self) -> bool:
        return self.kind == "witness"


def check_invariance(
    phi: VirtualEndo, N: SubgroupSpec, budget: int = 100, seed: int = 0, K: int | None = None
) -> Verdict:
    """Look for g in N and in the domain of phi with phi(g) outside N."""
    K = K if K is not None else 2 * phi.T + max(phi.m, N.level) + 8
    rng = random.Random(seed)
    checked = 0
    for g in itertools.islice(sample_subgroup(N, phi.n, phi.p, K, rng, within=phi.m), budget):
        checked += 1
        image = apply(phi, g)
        if not is_member(N, image):
            return Verdict("witness", checked, (g, image))
    return Verdict("invariant-on-sample", checked)


def normality_witness(
    N: SubgroupSpec,
    n: int,
    p: int,
    m: int,
    budget: int = 100,
    seed: int = 0,
    K: int = 16,
) -> Verdict:
    """Look for h in Gamma(p^m) and g in N with h g h^-1 outside N."""
    rng = random.Random(seed)
    conjugators = list(iter_congruence_generators(n, p, m, K))
    gs = sample_subgroup(N, n, p, K, rng)
    checked = 0
    for g in gs:
        if checked >= budget:
            break
        for h in conjugators + [random_congruence_element(n, p, m, K, rng)]:
            checked += 1
            c = h @ g @ h.inverse()
            if not is_member(N, c):
                return Verdict("witness", checked, (g, h))
            if checked >= budget:
                break
    return Verdict("normal-on-sample", checked)
