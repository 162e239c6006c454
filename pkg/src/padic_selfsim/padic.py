"""Truncated p-adic integers and matrices over Z/p^K.

Every value carries its certified precision ``K``: the residue is only
meaningful modulo ``p**K``.  Binary operations on values of different
precision truncate to the smaller one, so precision can only ever be lost
explicitly, never silently gained.
"""

from __future__ import annotations

from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotInvertibleError, PrecisionError, PreconditionError

DEFAULT_PRECISION = 24


@lru_cache(maxsize=256)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def check_prime(p) -> int:
    if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
        raise PreconditionError(f"{p!r} is not a prime")
    return p


def val_p(x, p: int) -> int:
    """p-adic valuation of a nonzero rational (int or Fraction)."""
    x = Fraction(x)
    if x == 0:
        raise PreconditionError("valuation of zero undefined")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def int_val(x: int, p: int, cap: int) -> int:
    """Valuation of an integer residue, capped at ``cap`` (used for residues mod p^cap)."""
    if x % p**cap == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def unit_part(x, p: int) -> Fraction:
    """x / p^val_p(x) for a nonzero rational."""
    x = Fraction(x)
    return x / Fraction(p) ** val_p(x, p)


def to_residue(x, p: int, K: int) -> int:
    """Image of a p-integral rational in Z/p^K."""
    x = Fraction(x)
    mod = p**K
    if x.denominator % p == 0:
        raise PreconditionError(f"{x} is not p-integral for p={p}")
    return x.numerator * pow(x.denominator, -1, mod) % mod


@dataclass(frozen=True)
class TruncatedPadic:
    """An element of Z_p known modulo p^K."""

    p: int
    value: int
    K: int

    def __post_init__(self):
        check_prime(self.p)
        if self.K < 1:
            raise PreconditionError("precision must be positive")
        mod = self.p**self.K
        if not 0 <= self.value < mod:
            object.__setattr__(self, "value", self.value % mod)

    @classmethod
    def of(cls, x, p: int, K: int = DEFAULT_PRECISION) -> "TruncatedPadic":
        return cls(p, to_residue(x, p, K), K)

    @property
    def modulus(self) -> int:
        return self.p**self.K

    def _coerce(self, other) -> "TruncatedPadic":
        if isinstance(other, TruncatedPadic):
            if other.p != self.p:
                raise PreconditionError("mixed primes")
            return other
        return TruncatedPadic.of(other, self.p, self.K)

    def _binop(self, other, op) -> "TruncatedPadic":
        other = self._coerce(other)
        K = min(self.K, other.K)
        return TruncatedPadic(self.p, op(self.value, other.value) % self.p**K, K)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return TruncatedPadic(self.p, -self.value % self.modulus, self.K)

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def valuation(self) -> int:
        """Valuation of the residue; returns K when the value is 0 at this precision."""
        return int_val(self.value, self.p, self.K)

    def truncate(self, K: int) -> "TruncatedPadic":
        if K > self.K:
            raise PrecisionError(
                f"cannot raise precision from {self.K} to {K}", required=K, available=self.K
            )
        return TruncatedPadic(self.p, self.value % self.p**K, K)

    def signed(self) -> int:
        """Representative in (-p^K/2, p^K/2], handy for printing."""
        mod = self.modulus
        return self.value - mod if self.value > mod // 2 else self.value

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p}^{self.K})"


def unit_inverse(x: TruncatedPadic) -> TruncatedPadic:
    if not x.is_unit():
        raise NotInvertibleError("not invertible at this precision")
    return TruncatedPadic(x.p, pow(x.value, -1, x.modulus), x.K)


def _bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def int_det(rows: Sequence[Sequence[int]]) -> int:
    return _bareiss_det(rows)


@dataclass(frozen=True)
class PMatrix:
    """Square matrix over Z/p^K stored as row-major residues."""

    p: int
    K: int
    rows: tuple

    def __post_init__(self):
        check_prime(self.p)
        if self.K < 1:
            raise PreconditionError("precision must be positive")
        n = len(self.rows)
        if n == 0 or any(len(r) != n for r in self.rows):
            raise PreconditionError("matrix must be square and non-empty")
        mod = self.p**self.K
        rows = tuple(tuple(int(x) % mod for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], p: int, K: int = DEFAULT_PRECISION) -> "PMatrix":
        return cls(p, K, tuple(tuple(to_residue(x, p, K) for x in r) for r in rows))

    @classmethod
    def identity(cls, n: int, p: int, K: int = DEFAULT_PRECISION) -> "PMatrix":
        return cls(p, K, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def modulus(self) -> int:
        return self.p**self.K

    def entry(self, i: int, j: int) -> TruncatedPadic:
        return TruncatedPadic(self.p, self.rows[i][j], self.K)

    def flat(self) -> tuple:
        return tuple(x for r in self.rows for x in r)

    def truncate(self, K: int) -> "PMatrix":
        if K > self.K:
            raise PrecisionError(
                f"cannot raise precision from {self.K} to {K}", required=K, available=self.K
            )
        if K == self.K:
            return self
        return PMatrix(self.p, K, self.rows)

    def _common(self, other: "PMatrix") -> int:
        if other.p != self.p or other.n != self.n:
            raise PreconditionError("incompatible matrices")
        return min(self.K, other.K)

    def __matmul__(self, other: "PMatrix") -> "PMatrix":
        K = self._common(other)
        mod = self.p**K
        cols = list(zip(*other.rows))
        rows = tuple(
            tuple(sum(a * b for a, b in zip(r, c)) % mod for c in cols) for r in self.rows
        )
        return PMatrix(self.p, K, rows)

    def __add__(self, other: "PMatrix") -> "PMatrix":
        K = self._common(other)
        return PMatrix(
            self.p, K, tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows))
        )

    def __sub__(self, other: "PMatrix") -> "PMatrix":
        K = self._common(other)
        return PMatrix(
            self.p, K, tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows))
        )

    def scale(self, c: int) -> "PMatrix":
        return PMatrix(self.p, self.K, tuple(tuple(c * a for a in r) for r in self.rows))

    def congruent(self, other: "PMatrix") -> bool:
        """Equality at the common precision."""
        K = self._common(other)
        mod = self.p**K
        return all(
            (a - b) % mod == 0 for r, s in zip(self.rows, other.rows) for a, b in zip(r, s)
        )

    def is_identity(self, m: int | None = None) -> bool:
        m = self.K if m is None else m
        if m > self.K:
            raise PrecisionError("insufficient certified precision", required=m, available=self.K)
        mod = self.p**m
        return all(
            (x - (i == j)) % mod == 0 for i, r in enumerate(self.rows) for j, x in enumerate(r)
        )

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self.rows)
        return f"PMatrix([{body}] mod {self.p}^{self.K})"


def mat_det(M: PMatrix) -> TruncatedPadic:
    return TruncatedPadic(M.p, _bareiss_det(M.rows), M.K)


def mat_inverse(M: PMatrix) -> PMatrix:
    """Gauss-Jordan inversion over Z/p^K using unit pivots."""
    n, mod, p = M.n, M.modulus, M.p
    a = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(M.rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] % p), None)
        if piv is None:
            raise NotInvertibleError("matrix not invertible over Z_p")
        a[col], a[piv] = a[piv], a[col]
        inv = pow(a[col][col], -1, mod)
        a[col] = [x * inv % mod for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [(x - f * y) % mod for x, y in zip(a[r], a[col])]
    return PMatrix(p, M.K, tuple(tuple(r[n:]) for r in a))


def reduce(M: PMatrix, m: int) -> tuple:
    """Entry-wise residues mod p^m as a hashable tuple of rows."""
    if m > M.K:
        raise PrecisionError("insufficient certified precision", required=m, available=M.K)
    mod = M.p**m
    return tuple(tuple(x % mod for x in r) for r in M.rows)
