"""Quaternion division algebras (a, b)_Q_p and the norm-one group SL(1, D).

Elements are stored by truncated Z_p coordinates in the basis 1, i, j, ij with
i^2 = a, j^2 = b, ij = -ji.  The valuation w(x) = val_p(Nrd x) is additive on
products, and conjugation preserves w(x - 1): that is why the filtration of
SL(1, D) by levels is stable under every inner automorphism.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from functools import lru_cache

from .errors import NotInvertibleError, PrecisionError, PreconditionError
from .padic import DEFAULT_PRECISION, TruncatedPadic, check_prime, unit_inverse, val_p


def _split(x: int, p: int) -> tuple:
    v = val_p(x, p)
    return v, x // p**v


def _legendre(u: int, p: int) -> int:
    return 1 if pow(u % p, (p - 1) // 2, p) == 1 else -1


def hilbert_symbol(a: int, b: int, p: int) -> int:
    """The Hilbert symbol (a, b)_p in {1, -1} for nonzero integers a, b."""
    check_prime(p)
    if a == 0 or b == 0:
        raise PreconditionError("structure constants must be nonzero")
    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * (p - 1) // 2) % 2 else 1
    return sign * _legendre(u, p) ** (beta % 2) * _legendre(v, p) ** (alpha % 2)


def norm_form(a: int, b: int):
    return (1, -a, -b, a * b)


@lru_cache(maxsize=None)
def is_division(a: int, b: int, p: int) -> bool:
    """Whether (a, b)_Q_p is a division algebra (norm form anisotropic)."""
    return hilbert_symbol(a, b, p) == -1


def isotropic_vectors_mod(a: int, b: int, p: int, r: int):
    """Brute force: primitive vectors mod p^r with Nrd = 0 mod p^r."""
    mod = p**r
    coeffs = norm_form(a, b)
    for x in itertools.product(range(mod), repeat=4):
        if any(xi % p for xi in x) and sum(c * xi * xi for c, xi in zip(coeffs, x)) % mod == 0:
            yield x


def smallest_nonresidue(p: int) -> int:
    for u in range(2, p):
        if pow(u, (p - 1) // 2, p) == p - 1:
            return u
    raise PreconditionError(f"no quadratic non-residue mod {p}")


@dataclass(frozen=True)
class QuaternionAlgebra:
    p: int
    a: int
    b: int

    def __post_init__(self):
        if not is_division(self.a, self.b, self.p):
            raise PreconditionError(f"({self.a},{self.b}) splits over Q_{self.p}")

    def element(self, coords, K: int = DEFAULT_PRECISION) -> "Quaternion":
        mod = self.p**K
        return Quaternion(self, tuple(int(c) % mod for c in coords), K)

    def one(self, K: int = DEFAULT_PRECISION) -> "Quaternion":
        return self.element((1, 0, 0, 0), K)

    def basis(self, K: int = DEFAULT_PRECISION) -> tuple:
        return tuple(self.element(tuple(int(i == j) for j in range(4)), K) for i in range(4))

    def uniformizer(self, K: int = DEFAULT_PRECISION) -> "Quaternion":
        """An element with w = 1."""
        for x in itertools.product(range(2), repeat=4):
            if any(x):
                q = self.element(x, K)
                if w_val(q) == 1:
                    return q
        for x in itertools.product(range(self.p), repeat=4):
            q = self.element(x, K)
            if any(x) and w_val(q) == 1:
                return q
        raise AssertionError("no small uniformizer found")

    def to_dict(self) -> dict:
        return {"p": self.p, "a": self.a, "b": self.b}


def default_algebra(p: int) -> QuaternionAlgebra:
    """(-1,-1) over Q_2, and (u, p) with u the least non-residue for odd p."""
    check_prime(p)
    if p == 2:
        return QuaternionAlgebra(2, -1, -1)
    return QuaternionAlgebra(p, smallest_nonresidue(p), p)


@dataclass(frozen=True)
class Quaternion:
    algebra: QuaternionAlgebra
    coords: tuple
    K: int

    @property
    def p(self) -> int:
        return self.algebra.p

    def coord(self, k: int) -> TruncatedPadic:
        return TruncatedPadic(self.p, self.coords[k], self.K)

    def _check(self, other: "Quaternion") -> int:
        if other.algebra != self.algebra:
            raise PreconditionError("quaternions from different algebras")
        return min(self.K, other.K)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        K = self._check(other)
        return self.algebra.element([x + y for x, y in zip(self.coords, other.coords)], K)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        K = self._check(other)
        return self.algebra.element([x - y for x, y in zip(self.coords, other.coords)], K)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return quat_mul(self, other)

    def scale(self, c: int) -> "Quaternion":
        return self.algebra.element([c * x for x in self.coords], self.K)

    def conjugate(self) -> "Quaternion":
        x0, x1, x2, x3 = self.coords
        return self.algebra.element((x0, -x1, -x2, -x3), self.K)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def congruent(self, other: "Quaternion") -> bool:
        K = self._check(other)
        mod = self.p**K
        return all((x - y) % mod == 0 for x, y in zip(self.coords, other.coords))

    def truncate(self, K: int) -> "Quaternion":
        if K > self.K:
            raise PrecisionError("cannot raise precision", K, self.K)
        return self.algebra.element(self.coords, K)

    def __repr__(self):
        return f"Quaternion({list(self.coords)} mod {self.p}^{self.K})"


def quat_mul(x: Quaternion, y: Quaternion) -> Quaternion:
    K = x._check(y)
    a, b = x.algebra.a, x.algebra.b
    x0, x1, x2, x3 = x.coords
    y0, y1, y2, y3 = y.coords
    return x.algebra.element(
        (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ),
        K,
    )


def nrd(x: Quaternion) -> TruncatedPadic:
    a, b = x.algebra.a, x.algebra.b
    x0, x1, x2, x3 = x.coords
    return TruncatedPadic(x.p, x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3, x.K)


def sl1_member(x: Quaternion) -> bool:
    return nrd(x).value == 1 % (x.p**x.K)


def w_val(x: Quaternion) -> int:
    n = nrd(x)
    if n.is_zero():
        raise PrecisionError("precision exhausted: reduced norm vanishes at this precision")
    return n.valuation()


def filtration_level(x: Quaternion) -> int:
    """w(x - 1); the value K is a lower bound meaning x = 1 at certified precision."""
    diff = x - x.algebra.one(x.K)
    n = nrd(diff)
    return x.K if n.is_zero() else n.valuation()


def quat_inverse(x: Quaternion) -> Quaternion:
    """x^-1 = conj(x) / Nrd(x) for units of the coordinate order."""
    n = nrd(x)
    if not n.is_unit():
        raise NotInvertibleError("not invertible in the coordinate order at this precision")
    return x.conjugate().scale(unit_inverse(n).value)


def conjugate_by(g: Quaternion, x: Quaternion) -> Quaternion:
    """g x g^-1 computed as g x conj(g) / Nrd(g); loses w(g) digits."""
    w = w_val(g)
    y = g * x * g.conjugate()
    if w == 0:
        return y.scale(unit_inverse(nrd(g)).value)
    step = g.p**w
    if any(c % step for c in y.coords):
        raise PreconditionError("conjugate leaves the coordinate order")
    K = y.K - w
    if K < 1:
        raise PrecisionError("precision exhausted by conjugation", w + 1, y.K)
    unit = TruncatedPadic(g.p, nrd(g).value // step, K)
    inv = unit_inverse(unit).value
    return g.algebra.element([c // step * inv for c in y.coords], K)


# -- sampling ------------------------------------------------------------------

def random_quaternion(A: QuaternionAlgebra, K: int, rng: random.Random, w_min: int = 0) -> Quaternion:
    """Random element with w >= w_min: pi^w_min times a random integral element."""
    mod = A.p**K
    while True:
        y = A.element([rng.randrange(mod) for _ in range(4)], K)
        if not nrd(y).is_zero():
            break
    pi = A.uniformizer(K)
    for _ in range(w_min):
        y = pi * y
    return y


def random_unit(A: QuaternionAlgebra, K: int, rng: random.Random) -> Quaternion:
    while True:
        y = random_quaternion(A, K, rng)
        if nrd(y).is_unit():
            return y


def random_norm_one(A: QuaternionAlgebra, k: int, K: int, rng: random.Random) -> Quaternion:
    """Random x in SL(1, D) with level(x) >= k and x != 1 at precision K.

    Uses x = u conj(u)^-1 = u^2 / Nrd(u) with u = 1 + z, w(z) >= k.
    """
    one = A.one(K)
    while True:
        z = random_quaternion(A, K, rng, w_min=k)
        u = one + z
        if not nrd(u).is_unit():
            continue
        x = (u * u).scale(unit_inverse(nrd(u)).value)
        lvl = filtration_level(x)
        if k <= lvl < K:
            return x


def conj_displacement(
    g: Quaternion, k: int, samples: int = 100, seed: int = 0, power: int = 1
) -> int:
    """max |level(g^t x g^-t) - level(x)| over random x in SL(1, D)_k (t = power).

    Samples whose level is not certified after conjugation are skipped.
    """
    A = g.algebra
    rng = random.Random(seed)
    worst = 0
    for _ in range(samples):
        x = random_norm_one(A, k, g.K, rng)
        y = x
        for _ in range(power):
            y = conjugate_by(g, y)
        before, after = filtration_level(x), filtration_level(y)
        if after >= y.K or before >= y.K:
            continue
        worst = max(worst, abs(after - before))
    return worst


def dichotomy_fragment(A: QuaternionAlgebra, samples: int, max_displacement: int) -> str:
    return json.dumps(
        {"algebra": A.to_dict(), "samples": samples, "max_displacement": max_displacement}
    )
