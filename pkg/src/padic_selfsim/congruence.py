"""SL(n, Z_p), principal congruence subgroups and the coset transversal.

The transversal of Gamma(p^m) in SL(n, Z_p) is the alphabet of the tree: letter
``j`` is the coset ``h_j Gamma(p^m)``, and letter 0 is always the identity coset.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import BudgetError, InvariantViolation, PrecisionError, PreconditionError
from .padic import (
    DEFAULT_PRECISION,
    PMatrix,
    TruncatedPadic,
    check_prime,
    int_det,
    mat_det,
    mat_inverse,
    reduce,
    unit_inverse,
)

TRANSVERSAL_CAP = 10**6
# Above this many candidate matrices, enumerate by lifting fibres from level 1.
FILTER_LIMIT = 2**16


@dataclass(frozen=True)
class GroupElement:
    """An element of SL(n, Z_p) known modulo p^K (det = 1 at precision K)."""

    matrix: PMatrix

    @classmethod
    def from_rows(cls, rows, p: int, K: int = DEFAULT_PRECISION) -> "GroupElement":
        M = PMatrix.from_rows(rows, p, K)
        if mat_det(M).value != 1 % M.modulus:
            raise PreconditionError(f"determinant is not 1 mod {p}^{K}")
        return cls(M)

    @classmethod
    def identity(cls, n: int, p: int, K: int = DEFAULT_PRECISION) -> "GroupElement":
        return cls(PMatrix.identity(n, p, K))

    @property
    def p(self) -> int:
        return self.matrix.p

    @property
    def K(self) -> int:
        return self.matrix.K

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def rows(self) -> tuple:
        return self.matrix.rows

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix)

    __mul__ = __matmul__

    def inverse(self) -> "GroupElement":
        return GroupElement(mat_inverse(self.matrix))

    def truncate(self, K: int) -> "GroupElement":
        return GroupElement(self.matrix.truncate(K))

    def congruent(self, other: "GroupElement") -> bool:
        return self.matrix.congruent(other.matrix)

    def is_identity(self, m: int | None = None) -> bool:
        return self.matrix.is_identity(m)

    def entry(self, i: int, j: int) -> TruncatedPadic:
        return self.matrix.entry(i, j)

    def __repr__(self):
        return f"GroupElement({self.matrix!r})"


def group_order(n: int, p: int, m: int) -> int:
    """|SL(n, Z/p^m)|."""
    if n < 2 or m < 1:
        raise PreconditionError("need n >= 2 and m >= 1")
    check_prime(p)
    order = p ** ((m - 1) * (n * n - 1)) * p ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        order *= p**i - 1
    return order


def _det_mod(flat: Sequence[int], n: int, mod: int) -> int:
    if n == 2:
        return (flat[0] * flat[3] - flat[1] * flat[2]) % mod
    return int_det([flat[i * n:(i + 1) * n] for i in range(n)]) % mod


def sl_residues(n: int, p: int, m: int) -> list[tuple]:
    """All of SL(n, Z/p^m) as row-major residue tuples, lexicographically sorted."""
    mod = p**m
    if mod ** (n * n) <= FILTER_LIMIT:
        return [
            t for t in itertools.product(range(mod), repeat=n * n) if _det_mod(t, n, mod) == 1
        ]
    level = [t for t in itertools.product(range(p), repeat=n * n) if _det_mod(t, n, p) == 1]
    for k in range(2, m + 1):
        step, modk = p ** (k - 1), p**k
        nxt = []
        for base in level:
            for delta in itertools.product(range(p), repeat=n * n):
                t = tuple(b + step * d for b, d in zip(base, delta))
                if _det_mod(t, n, modk) == 1:
                    nxt.append(t)
        level = nxt
    level.sort()
    return level


def _lift_with_det_one(flat: Sequence[int], n: int, p: int, K: int) -> GroupElement:
    rows = [list(flat[i * n:(i + 1) * n]) for i in range(n)]
    mod = p**K
    u = TruncatedPadic(p, int_det(rows) % mod, K)
    # u = 1 mod p^m, so scaling row 0 by u^-1 keeps the coset and fixes det exactly.
    uinv = unit_inverse(u).value
    rows[0] = [x * uinv % mod for x in rows[0]]
    return GroupElement(PMatrix(p, K, tuple(tuple(r) for r in rows)))


@dataclass(frozen=True)
class Transversal:
    n: int
    p: int
    m: int
    K: int
    reps: tuple
    index: dict = field(repr=False, compare=False)

    @property
    def d(self) -> int:
        return len(self.reps)

    def __len__(self):
        return len(self.reps)

    def __getitem__(self, j: int) -> GroupElement:
        return self.reps[j]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "p": self.p,
                "m": self.m,
                "K": self.K,
                "d": self.d,
                "reps": [list(h.matrix.flat()) for h in self.reps],
            },
            indent=None,
        )

    @classmethod
    def from_json(cls, text: str) -> "Transversal":
        data = json.loads(text)
        n, p, m, K = data["n"], data["p"], data["m"], data["K"]
        reps = []
        for flat in data["reps"]:
            rows = [flat[i * n:(i + 1) * n] for i in range(n)]
            reps.append(GroupElement.from_rows(rows, p, K))
        return cls._build(n, p, m, K, reps)

    @classmethod
    def _build(cls, n, p, m, K, reps) -> "Transversal":
        index = {}
        for j, h in enumerate(reps):
            key = reduce(h.matrix, m)
            if key in index:
                raise InvariantViolation(f"representatives {index[key]} and {j} share a coset")
            index[key] = j
        if not reps[0].is_identity(m):
            raise InvariantViolation("letter 0 must be the identity coset")
        return cls(n, p, m, K, tuple(reps), index)


def enumerate_transversal(
    n: int, p: int, m: int, K: int = DEFAULT_PRECISION, cap: int = TRANSVERSAL_CAP
) -> Transversal:
    check_prime(p)
    if m < 1:
        raise PreconditionError("congruence level must be >= 1")
    if K < m:
        raise PrecisionError(f"precision {K} below congruence level {m}", required=m, available=K)
    d = group_order(n, p, m)
    if d > cap:
        raise BudgetError(f"transversal too large: {d} cosets exceed cap {cap}")
    residues = sl_residues(n, p, m)
    ident = tuple(int(i == j) for i in range(n) for j in range(n))
    residues.remove(ident)
    residues.insert(0, ident)
    reps = [_lift_with_det_one(t, n, p, K) for t in residues]
    return Transversal._build(n, p, m, K, reps)


def coset_lookup(T: Transversal, g: GroupElement) -> int:
    """The letter j with h_j^-1 g in Gamma(p^m)."""
    try:
        return T.index[reduce(g.matrix, T.m)]
    except KeyError:
        raise InvariantViolation("reduced matrix missing from transversal index") from None


def is_congruence_member(g: GroupElement, m: int) -> bool:
    return g.matrix.is_identity(m)


def iwahori_member(g: GroupElement) -> bool:
    p = g.p
    return all(g.rows[i][j] % p == 0 for i in range(g.n) for j in range(i))


# -- random elements ---------------------------------------------------------

def elementary(n: int, p: int, K: int, i: int, j: int, x: int) -> GroupElement:
    """I + x E_ij (i != j)."""
    rows = [[int(r == c) for c in range(n)] for r in range(n)]
    rows[i][j] = x
    return GroupElement(PMatrix(p, K, tuple(map(tuple, rows))))


def torus_element(n: int, p: int, K: int, i: int, u: int) -> GroupElement:
    """diag with u at position i and u^-1 at position i+1 (mod n)."""
    mod = p**K
    rows = [[int(r == c) for c in range(n)] for r in range(n)]
    rows[i][i] = u % mod
    k = (i + 1) % n
    rows[k][k] = pow(u, -1, mod)
    return GroupElement(PMatrix(p, K, tuple(map(tuple, rows))))


def random_congruence_element(
    n: int, p: int, m: int, K: int, rng: random.Random, length: int = 6
) -> GroupElement:
    """Random word in generators of Gamma(p^m) (elementary and torus matrices)."""
    mod = p**K
    step = p**m
    g = GroupElement.identity(n, p, K)
    for _ in range(length):
        if rng.random() < 0.25:
            g = g @ torus_element(n, p, K, rng.randrange(n), 1 + step * rng.randrange(mod))
        else:
            i, j = rng.sample(range(n), 2)
            g = g @ elementary(n, p, K, i, j, step * rng.randrange(mod) % mod)
    return g


def random_group_element(
    n: int, p: int, K: int, rng: random.Random, length: int = 8
) -> GroupElement:
    """Random word in elementary matrices with Z_p entries; these generate SL(n, Z_p)."""
    mod = p**K
    g = GroupElement.identity(n, p, K)
    for _ in range(length):
        if rng.random() < 0.2:
            u = rng.randrange(mod)
            if u % p == 0:
                u += 1
            g = g @ torus_element(n, p, K, rng.randrange(n), u)
        else:
            i, j = rng.sample(range(n), 2)
            g = g @ elementary(n, p, K, i, j, rng.randrange(mod))
    return g


def iter_congruence_generators(n: int, p: int, m: int, K: int) -> Iterator[GroupElement]:
    """The elementary matrices I + p^m E_ij and the torus elements diag(1+p^m, ...)."""
    for i in range(n):
        for j in range(n):
            if i != j:
                yield elementary(n, p, K, i, j, p**m)
    for i in range(n - 1):
        yield torus_element(n, p, K, i, 1 + p**m)
