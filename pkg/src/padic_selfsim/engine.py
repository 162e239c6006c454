"""Self-similar action of SL(n, Z_p) on the tree X* built from a virtual endomorphism.

Letters are cosets of Gamma(p^m).  For g and a letter i, the image letter j is
the coset of g h_i and the restriction is ``phi(h_j^-1 g h_i)``.  Each
restriction costs T certified digits, so acting on words of length D needs
``K >= m + D*T``; every entry point checks this up front.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .congruence import GroupElement, Transversal, coset_lookup, enumerate_transversal
from .endo import VirtualEndo, apply, make_endo
from .errors import PrecisionError, PreconditionError
from .padic import DEFAULT_PRECISION, PMatrix


@dataclass(frozen=True)
class Action:
    transversal: Transversal
    endo: VirtualEndo

    def __post_init__(self):
        T, phi = self.transversal, self.endo
        if (T.n, T.p, T.m) != (phi.n, phi.p, phi.m):
            raise PreconditionError("transversal and endomorphism disagree on n, p or level")
        if not T.reps[0].is_identity():
            raise PreconditionError("letter 0 must be represented by the identity")

    @property
    def d(self) -> int:
        return self.transversal.d

    @property
    def m(self) -> int:
        return self.endo.m

    @property
    def T(self) -> int:
        return self.endo.T

    def required_precision(self, depth: int) -> int:
        return self.m + depth * self.T

    def max_depth(self, K: int) -> int:
        return (K - self.m) // self.T

    def check_budget(self, g: GroupElement, depth: int) -> None:
        need = self.required_precision(depth)
        if g.K < need:
            reach = max(self.max_depth(g.K), 0)
            raise PrecisionError(
                f"precision exhausted at depth {reach + 1}: depth {depth} needs K >= {need}, "
                f"element has K = {g.K}",
                required=need,
                available=g.K,
            )


def default_action(K: int = DEFAULT_PRECISION) -> Action:
    """n=2, p=2, conjugator valuations (1, -1): level m=2, alphabet of 48 letters."""
    return build_action(2, [1, -1], K)


def build_action(p: int, vals: Sequence[int], K: int = DEFAULT_PRECISION, cap: int | None = None) -> Action:
    phi = make_endo(p, vals)
    kwargs = {} if cap is None else {"cap": cap}
    return Action(enumerate_transversal(phi.n, p, phi.m, K, **kwargs), phi)


# -- words ---------------------------------------------------------------------

def parse_word(text: str, d: int) -> tuple:
    """Digits for d <= 10 ("012"), '.'-separated letters otherwise ("12.0.47")."""
    text = text.strip()
    if not text:
        return ()
    parts = text.split(".") if ("." in text or d > 10) else list(text)
    try:
        word = tuple(int(x) for x in parts)
    except ValueError:
        raise PreconditionError(f"cannot parse word {text!r}") from None
    check_word(word, d)
    return word


def format_word(word: Sequence[int], d: int) -> str:
    if d > 10:
        return ".".join(str(x) for x in word)
    return "".join(str(x) for x in word)


def check_word(word: Sequence[int], d: int) -> None:
    for x in word:
        if not 0 <= x < d:
            raise PreconditionError(f"letter {x} outside alphabet of size {d}")


# -- the action ----------------------------------------------------------------

def _act_letter(A: Action, g: GroupElement, i: int) -> tuple:
    reps = A.transversal.reps
    gh = g @ reps[i]
    j = coset_lookup(A.transversal, gh)
    return j, apply(A.endo, reps[j].inverse() @ gh)


def act_letter(A: Action, g: GroupElement, i: int) -> tuple:
    """(g(i), g|_i)."""
    check_word((i,), A.d)
    A.check_budget(g, 1)
    return _act_letter(A, g, i)


def _walk(A: Action, g: GroupElement, w: Sequence[int]) -> tuple:
    check_word(w, A.d)
    A.check_budget(g, len(w))
    out = []
    for x in w:
        y, g = _act_letter(A, g, x)
        out.append(y)
    return tuple(out), g


def act_word(A: Action, g: GroupElement, w: Sequence[int]) -> tuple:
    return _walk(A, g, w)[0]


def restriction(A: Action, g: GroupElement, v: Sequence[int]) -> GroupElement:
    return _walk(A, g, v)[1]


def act_and_restrict(A: Action, g: GroupElement, v: Sequence[int]) -> tuple:
    """(g(v), g|_v) in one pass."""
    return _walk(A, g, v)


def letter_permutation(A: Action, g: GroupElement) -> tuple:
    """The permutation g induces on the first level; needs only m digits."""
    if g.K < A.m:
        raise PrecisionError("insufficient precision for coset lookup", A.m, g.K)
    T = A.transversal
    return tuple(coset_lookup(T, g @ h) for h in T.reps)


def check_transitive_level1(A: Action, generators: Iterable[GroupElement]) -> tuple:
    """BFS orbit of letter 0 under the group generated by ``generators``.

    Returns (sorted orbit, covers_all_of_X).
    """
    perms = [letter_permutation(A, g) for g in generators]
    # Inverses act by the inverse permutations, so the orbit of a finite
    # permutation group is reached from the generators alone.
    orbit = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for perm in perms:
                y = perm[x]
                if y not in orbit:
                    orbit.add(y)
                    nxt.append(y)
        frontier = nxt
    return tuple(sorted(orbit)), len(orbit) == A.d


# -- portraits -----------------------------------------------------------------

@dataclass(frozen=True)
class Portrait:
    d: int
    depth: int
    nodes: dict  # word tuple -> permutation tuple

    def to_json(self) -> str:
        items = [
            {"word": list(w), "perm": list(perm)}
            for w, perm in sorted(self.nodes.items(), key=lambda kv: (len(kv[0]), kv[0]))
        ]
        return json.dumps({"d": self.d, "depth": self.depth, "nodes": items})

    def image(self, w: Sequence[int]) -> tuple:
        out = []
        for k, x in enumerate(w):
            out.append(self.nodes[tuple(w[:k])][x])
        return tuple(out)

    def is_trivial(self) -> bool:
        ident = tuple(range(self.d))
        return all(perm == ident for perm in self.nodes.values())


def portrait(A: Action, g: GroupElement, D: int) -> Portrait:
    """Letter permutations at every node of depth < D (these fix the action on X^D)."""
    if D < 0:
        raise PreconditionError("depth must be non-negative")
    A.check_budget(g, D)
    nodes = {}
    layer = [((), g)]
    for level in range(D):
        nxt = []
        for word, r in layer:
            perm = []
            for i in range(A.d):
                j, ri = _act_letter(A, r, i)
                perm.append(j)
                if level + 1 < D:
                    nxt.append((word + (i,), ri))
            nodes[word] = tuple(perm)
        layer = nxt
    return Portrait(A.d, D, nodes)


def separating_depth(A: Action, g: GroupElement, D_max: int = 10):
    """Smallest l <= D_max such that g moves some word of length l, else None.

    Level l is trivial iff every restriction at depth l-1 lies in Gamma(p^m),
    so the search walks restriction *elements* rather than nodes: for the
    candidate l, a restriction at depth j only matters modulo p^(m+(l-1-j)T),
    and nodes whose restrictions agree there have identical subtrees up to
    depth l.  Deduplicating on that residue keeps the frontier small.

    When K cannot reach D_max the search stops at the reachable depth and
    raises PrecisionError if nothing was separated by then.
    """
    if D_max < 0:
        raise PreconditionError("depth must be non-negative")
    reach = min(D_max, A.max_depth(g.K) + 1)
    m, T = A.m, A.T
    reps = A.transversal.reps
    rep_inv = [h.inverse() for h in reps]
    for level in range(1, reach + 1):
        frontier = {g.truncate(m + (level - 1) * T).rows: g.truncate(m + (level - 1) * T)}
        for depth in range(level):
            if depth == level - 1:
                if any(not r.is_identity(m) for r in frontier.values()):
                    return level
                break
            prec = m + (level - 2 - depth) * T
            nxt = {}
            for r in frontier.values():
                if not r.is_identity(m):
                    return depth + 1
                for h, hinv in zip(reps, rep_inv):
                    child = apply(A.endo, hinv @ r @ h).truncate(prec)
                    nxt.setdefault(child.rows, child)
            frontier = nxt
    if reach < D_max:
        need = A.required_precision(D_max - 1)
        raise PrecisionError(
            f"precision exhausted: element acts trivially to depth {reach}; "
            f"depth {D_max} needs K >= {need}",
            required=need,
            available=g.K,
        )
    return None


def element_from_flat(flat: Sequence[int], n: int, p: int, K: int) -> GroupElement:
    rows = [list(flat[i * n:(i + 1) * n]) for i in range(n)]
    return GroupElement.from_rows(rows, p, K)
