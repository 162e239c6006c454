"""Lattice model of the Bruhat-Tits building of SL(n, Q_p).

Vertices are homothety classes of Z_p-lattices in Q_p^n.  A lattice is given by
a matrix whose columns span it; the class is stored as a column Hermite normal
form over Z_(p): upper triangular, pivots p^e_i, entries right of a pivot
reduced into [0, p^e_i), and scaled so the lattice lies in Z_p^n but not in
p Z_p^n.  Two matrices span homothetic lattices iff these forms coincide.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

from .endo import VirtualEndo
from .errors import BudgetError, PreconditionError
from .padic import check_prime, int_det, to_residue, val_p

NEIGHBOR_CAP = 10_000


def _fmat(M) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in M]


def frac_inverse(M: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(M)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise PreconditionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def frac_matmul(A, B) -> list[list[Fraction]]:
    cols = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, c)), Fraction(0)) for c in cols] for row in A]


def _min_val(entries: Iterable[Fraction], p: int):
    vals = [val_p(x, p) for x in entries if x != 0]
    return min(vals) if vals else None


@dataclass(frozen=True)
class LatticeClass:
    p: int
    basis: tuple  # rows of the canonical column-HNF, integer entries

    @property
    def n(self) -> int:
        return len(self.basis)

    @cached_property
    def _exponents(self) -> tuple:
        return tuple(_v(self.basis[i][i], self.p) for i in range(self.n))

    def exponents(self) -> tuple:
        """Pivot exponents e_i (diagonal of the canonical form)."""
        return self._exponents

    def is_diagonal(self) -> bool:
        return all(x == 0 for i, r in enumerate(self.basis) for j, x in enumerate(r) if i != j)

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self.basis)
        return f"[{body}]"


def canonical_lattice(M: Sequence[Sequence], p: int) -> LatticeClass:
    """Canonical class of the lattice spanned by the columns of M (n x k, rank n)."""
    check_prime(p)
    A = _fmat(M)
    n = len(A)
    if n == 0 or any(len(r) != len(A[0]) for r in A):
        raise PreconditionError("ragged matrix")
    k = len(A[0])
    cols = [[A[i][j] for i in range(n)] for j in range(k)]
    c = _min_val((x for col in cols for x in col), p)
    if c is None:
        raise PreconditionError("singular matrix: zero lattice")
    scale = Fraction(p) ** (-c)
    cols = [[x * scale for x in col] for col in cols]

    pivots: list = [None] * n
    active = cols
    for r in range(n - 1, -1, -1):
        best = None
        for idx, col in enumerate(active):
            if col[r] != 0:
                v = val_p(col[r], p)
                if best is None or v < best[0]:
                    best = (v, idx)
        if best is None:
            raise PreconditionError("singular matrix: columns do not span Q_p^n")
        e, idx = best
        piv = active.pop(idx)
        u = Fraction(p) ** e / piv[r]
        piv = [x * u for x in piv]
        rest = []
        for col in active:
            if col[r] != 0:
                f = col[r] / piv[r]
                col = [x - f * y for x, y in zip(col, piv)]
            rest.append(col)
        active = rest
        pivots[r] = piv

    B = [[pivots[j][i] for j in range(n)] for i in range(n)]
    exps = [val_p(B[i][i], p) for i in range(n)]
    for i in range(n - 2, -1, -1):
        mod_e = exps[i]
        for j in range(i + 1, n):
            x = B[i][j]
            t = to_residue(x, p, mod_e) if mod_e > 0 else 0
            if x != t:
                f = (x - t) / Fraction(p) ** mod_e
                for r in range(i + 1):
                    B[r][j] -= f * B[r][i]
    basis = []
    for row in B:
        if any(x.denominator != 1 for x in row):
            raise AssertionError("non-integral canonical form")
        basis.append(tuple(int(x) for x in row))
    return LatticeClass(p, tuple(basis))


def standard_vertex(n: int, p: int) -> LatticeClass:
    """[Lambda_0] = [Z_p^n]."""
    return canonical_lattice([[int(i == j) for j in range(n)] for i in range(n)], p)


def diagonal_vertex(a: Sequence[int], p: int) -> LatticeClass:
    """Class of the lattice with basis p^a_1 e_1, ..., p^a_n e_n (a_i may be negative)."""
    n = len(a)
    return canonical_lattice(
        [[Fraction(p) ** a[i] if i == j else 0 for j in range(n)] for i in range(n)], p
    )


def standard_lattice(i: int, n: int, p: int) -> LatticeClass:
    """[Lambda_i]: basis e_1..e_{n-i}, p e_{n-i+1}..p e_n."""
    if not 0 <= i < n:
        raise PreconditionError("index must satisfy 0 <= i < n")
    return diagonal_vertex([0] * (n - i) + [1] * i, p)


def _rel(L: LatticeClass, M: LatticeClass) -> list[list[Fraction]]:
    """Coordinates of L's basis in M's basis."""
    if L.p != M.p or L.n != M.n:
        raise PreconditionError("lattices live in different spaces")
    return frac_matmul(frac_inverse(M.basis), L.basis)


def contains(M_basis, L_basis, p: int) -> bool:
    """Whether the lattice spanned by L_basis lies in the one spanned by M_basis."""
    X = frac_matmul(frac_inverse(M_basis), L_basis)
    return all(x.denominator % p != 0 for row in X for x in row)


def incident(L: LatticeClass, M: LatticeClass) -> bool:
    """Adjacency: representatives with p M' <= L' <= M'."""
    if L == M:
        raise PreconditionError("incidence is only defined for distinct classes")
    p = L.p
    X = _rel(L, M)
    s = -_min_val((x for row in X for x in row), p)
    scale = Fraction(p) ** s
    Ls = [[x * scale for x in row] for row in L.basis]
    pM = [[p * x for x in row] for row in M.basis]
    return contains(Ls, pM, p)


def int_adjugate(B: Sequence[Sequence[int]]) -> list[list[int]]:
    """Integer adjugate, so that adj(B) B = det(B) I."""
    n = len(B)
    if n == 1:
        return [[1]]
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(map(list, B)) if k != i]
            out[j][i] = (-1) ** (i + j) * int_det(minor)
    return out


def int_elementary_exponents(A: Sequence[Sequence[int]], p: int) -> list[int]:
    """Smith exponents over Z_(p) of a nonsingular integer matrix, integers only.

    Rows are rescaled by p-adic units (integers prime to p), which leaves the
    Smith form over Z_(p) unchanged.
    """
    a = [list(r) for r in A]
    n = len(a)
    out = []
    for k in range(n):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                x = a[i][j]
                if x:
                    v = 0
                    while x % p == 0:
                        x //= p
                        v += 1
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            raise PreconditionError("singular matrix")
        v, i, j = best
        a[k], a[i] = a[i], a[k]
        for row in a:
            row[k], row[j] = row[j], row[k]
        pk = p**v
        unit = a[k][k] // pk
        for i in range(k + 1, n):
            x = a[i][k]
            if x:
                f = x // pk
                a[i] = [unit * y - f * z for y, z in zip(a[i], a[k])]
        # the pivot row's tail no longer matters: column ops would clear it
        out.append(v)
    return sorted(out)


@lru_cache(maxsize=200_000)
def _adjugate(L: "LatticeClass") -> tuple:
    return tuple(map(tuple, int_adjugate(L.basis)))


def _relative_matrix(L: LatticeClass, M: LatticeClass) -> list[list[int]]:
    """adj(M) L, an integer matrix equal to det(M) M^-1 L with det(M) = p^(sum e_i)."""
    if L.p != M.p or L.n != M.n:
        raise PreconditionError("lattices live in different spaces")
    return int_matmul(_adjugate(M), L.basis)


def relative_exponents(L: LatticeClass, M: LatticeClass) -> list[int]:
    """Exponents a_i with M^-1 L ~ diag(p^a_i), i.e. the elementary divisors of L relative to M."""
    shift = sum(M.exponents())
    X = _relative_matrix(L, M)
    return [a - shift for a in int_elementary_exponents(X, L.p)]


def int_matmul(A, B) -> list[list[int]]:
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, c)) for c in cols] for row in A]


def _v(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _min_v(xs, p: int) -> int:
    return min(_v(x, p) for x in xs if x)


def distance(L: LatticeClass, M: LatticeClass) -> int:
    """Graph distance in the 1-skeleton: spread of the elementary divisors.

    For n <= 3 the spread comes straight from determinantal divisors
    (minimal valuations of k x k minors); otherwise by elimination.
    """
    n, p = L.n, L.p
    if n > 3 or n != M.n:
        a = relative_exponents(L, M)
        return a[-1] - a[0]
    if L == M:
        return 0
    X = _relative_matrix(L, M)
    d_n = (n - 1) * sum(M.exponents()) + sum(L.exponents())
    d1 = _min_v((x for row in X for x in row), p)
    if n == 2:
        return d_n - 2 * d1
    minors = (
        X[r0][c0] * X[r1][c1] - X[r0][c1] * X[r1][c0]
        for r0, r1 in ((0, 1), (0, 2), (1, 2))
        for c0, c1 in ((0, 1), (0, 2), (1, 2))
    )
    d2 = _min_v(minors, p)
    return d_n - d2 - d1


def frac_det(B: Sequence[Sequence]) -> Fraction:
    a = _fmat(B)
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def lattice_index_exponent(L_basis, M_basis, p: int) -> int:
    """log_p [M : L] when L lies inside M."""
    return val_p(frac_det(L_basis), p) - val_p(frac_det(M_basis), p)


def subspaces(n: int, p: int) -> list[list[tuple]]:
    """Proper nonzero subspaces of F_p^n, each as a list of RREF basis rows."""
    out = []
    for k in range(1, n):
        for pivots in itertools.combinations(range(n), k):
            free = [(r, c) for r in range(k) for c in range(n) if c > pivots[r] and c not in pivots]
            for vals in itertools.product(range(p), repeat=len(free)):
                rows = [[0] * n for _ in range(k)]
                for r, c in enumerate(pivots):
                    rows[r][c] = 1
                for (r, c), v in zip(free, vals):
                    rows[r][c] = v
                out.append([tuple(r) for r in rows])
    return out


@lru_cache(maxsize=None)
def _subspaces_cached(n: int, p: int) -> tuple:
    return tuple(tuple(s) for s in subspaces(n, p))


def subspace_count(n: int, p: int) -> int:
    total = 0
    for k in range(1, n):
        num = den = 1
        for i in range(k):
            num *= p ** (n - i) - 1
            den *= p ** (i + 1) - 1
        total += num // den
    return total


@lru_cache(maxsize=200_000)
def neighbors(L: LatticeClass) -> tuple:
    """All classes incident to L: the lattices strictly between pL and L."""
    n, p = L.n, L.p
    if subspace_count(n, p) > NEIGHBOR_CAP:
        raise BudgetError(f"n={n}, p={p}: too many neighbours to enumerate")
    B = L.basis
    pB = [[p * x for x in row] for row in B]
    out = []
    for S in _subspaces_cached(n, p):
        gens = [[sum(B[i][t] * s[t] for t in range(n)) for s in S] for i in range(n)]
        M = [gens[i] + pB[i] for i in range(n)]
        out.append(canonical_lattice(M, p))
    return tuple(out)


def bfs(
    start: LatticeClass,
    radius: int,
    allowed: Callable[[LatticeClass], bool] | None = None,
) -> dict:
    """Breadth-first distances from ``start`` up to ``radius``, optionally within a vertex filter."""
    dist = {start: 0}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if dist[x] == radius:
            continue
        for y in neighbors(x):
            if y not in dist and (allowed is None or allowed(y)):
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def ball_graph(center: LatticeClass, radius: int) -> tuple:
    """Vertices of the ball (BFS order) and the induced adjacency lists."""
    dist = bfs(center, radius)
    verts = list(dist)
    index = {v: i for i, v in enumerate(verts)}
    adj = [[index[y] for y in neighbors(v) if y in index] for v in verts]
    return verts, adj


def all_pairs_bfs(adj: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(adj)
    out = []
    for s in range(n):
        d = [-1] * n
        d[s] = 0
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if d[y] < 0:
                    d[y] = d[x] + 1
                    q.append(y)
        out.append(d)
    return out


def act_on_lattice(g_rows: Sequence[Sequence], L: LatticeClass) -> LatticeClass:
    """g . L for a matrix g in GL(n, Z_(p)) or GL(n, Q_p) given by rational entries."""
    return canonical_lattice(frac_matmul(g_rows, L.basis), L.p)


def translate(L: LatticeClass, vals: Sequence[int], t: int = 1) -> LatticeClass:
    """s^t . L with s = diag(p^vals)."""
    p = L.p
    s = [[Fraction(p) ** (t * vals[i]) if i == j else 0 for j in range(L.n)] for i in range(L.n)]
    return act_on_lattice(s, L)


def orbit_displacement(phi: VirtualEndo, t: int) -> int:
    """distance([Lambda_0], s^t [Lambda_0])."""
    if t < 0:
        raise PreconditionError("t must be non-negative")
    L0 = standard_vertex(phi.n, phi.p)
    return distance(L0, translate(L0, phi.vals, t))


def displacement_table(phi: VirtualEndo, t_max: int) -> list[tuple]:
    return [(t, orbit_displacement(phi, t)) for t in range(t_max + 1)]


# -- apartment and chambers ----------------------------------------------------

@dataclass(frozen=True)
class ApartmentVertex:
    """Vertex [sum p^a_i Z_p e_i] of the standard apartment; a is taken mod (1,...,1)."""

    a: tuple

    def __post_init__(self):
        lo = min(self.a)
        object.__setattr__(self, "a", tuple(int(x) - lo for x in self.a))

    def to_lattice(self, p: int) -> LatticeClass:
        return diagonal_vertex(self.a, p)

    @classmethod
    def from_lattice(cls, L: LatticeClass) -> "ApartmentVertex":
        if not L.is_diagonal():
            raise PreconditionError("class does not lie in the standard apartment")
        return cls(L.exponents())

    def neighbors(self) -> list:
        n = len(self.a)
        out = []
        for k in range(1, n):
            for S in itertools.combinations(range(n), k):
                out.append(ApartmentVertex(tuple(x + (i in S) for i, x in enumerate(self.a))))
        return out


def apartment_distance(x: ApartmentVertex, y: ApartmentVertex) -> int:
    diff = [a - b for a, b in zip(x.a, y.a)]
    return max(diff) - min(diff)


def in_standard_apartment(L: LatticeClass) -> bool:
    return L.is_diagonal()


@dataclass(frozen=True)
class Chamber:
    vertices: tuple

    def __post_init__(self):
        vs = self.vertices
        n = vs[0].n
        if len(vs) != n:
            raise PreconditionError(f"a chamber has {n} vertices")
        for a, b in itertools.combinations(vs, 2):
            if a == b or not incident(a, b):
                raise PreconditionError("chamber vertices must be pairwise incident")

    def chain(self) -> list:
        """Representatives L_0 > L_1 > ... > L_{n-1} > p L_0 with index p at each step."""
        vs = self.vertices
        p, n = vs[0].p, vs[0].n
        top = [list(map(Fraction, r)) for r in vs[0].basis]
        reps = [(0, top)]
        for L in vs[1:]:
            X = _rel(L, vs[0])
            s = -_min_val((x for row in X for x in row), p)
            rep = [[x * Fraction(p) ** s for x in row] for row in L.basis]
            reps.append((lattice_index_exponent(rep, top, p), rep))
        reps.sort(key=lambda t: t[0])
        if [i for i, _ in reps] != list(range(n)):
            raise PreconditionError("vertices do not form a periodic chain with index-p steps")
        chain = [rep for _, rep in reps]
        bottom = [[p * x for x in row] for row in top]
        for a, b in zip(chain, chain[1:] + [bottom]):
            if not contains(a, b, p):
                raise PreconditionError("chain is not nested")
        return chain


def standard_chamber(n: int, p: int) -> Chamber:
    """The chamber C spanned by [Lambda_0], ..., [Lambda_{n-1}]."""
    return Chamber(tuple(standard_lattice(i, n, p) for i in range(n)))
