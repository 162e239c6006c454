import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_selfsim.errors import NotInvertibleError, PrecisionError, PreconditionError
from padic_selfsim.padic import (
    PMatrix,
    TruncatedPadic,
    mat_det,
    mat_inverse,
    reduce,
    unit_inverse,
    val_p,
)

primes = st.sampled_from([2, 3, 5, 7])


@pytest.mark.parametrize("x, p, expected", [(12, 2, 2), (Fraction(1, 9), 3, -2), (5, 3, 0), (-48, 2, 4)])
def test_val_p(x, p, expected):
    assert val_p(x, p) == expected


def test_val_p_zero():
    with pytest.raises(PreconditionError, match="valuation of zero undefined"):
        val_p(0, 2)


def test_nonprime_rejected():
    with pytest.raises(PreconditionError):
        TruncatedPadic(4, 1, 3)


@pytest.mark.parametrize("p, K, value, expected", [(2, 4, 3, 11), (3, 2, 1, 1), (5, 3, 7, 18)])
def test_unit_inverse_examples(p, K, value, expected):
    assert unit_inverse(TruncatedPadic(p, value, K)).value == expected


def test_unit_inverse_scan_oracle():
    # brute-force scan of residues mod 125
    found = [y for y in range(125) if 7 * y % 125 == 1]
    assert found == [18]
    assert unit_inverse(TruncatedPadic(5, 7, 3)).value == found[0]


def test_unit_inverse_non_unit():
    with pytest.raises(NotInvertibleError, match="not invertible at this precision"):
        unit_inverse(TruncatedPadic(2, 6, 5))


def test_mixed_precision_truncates_to_minimum():
    x = TruncatedPadic(3, 10, 5)
    y = TruncatedPadic(3, 20, 2)
    for z in (x + y, x * y, x - y):
        assert z.K == 2
    assert (x + y).value == 30 % 9


def test_value_is_reduced():
    x = TruncatedPadic.of(-1, 2, 4)
    assert x.value == 15 and x.signed() == -1


def test_valuation_capped_at_precision():
    assert TruncatedPadic(2, 0, 6).valuation() == 6
    assert TruncatedPadic(2, 8, 6).valuation() == 3


def test_truncate_cannot_raise_precision():
    with pytest.raises(PrecisionError):
        TruncatedPadic(2, 1, 3).truncate(5)


@settings(max_examples=200)
@given(primes, st.integers(1, 30), st.integers(), st.integers(), st.integers())
def test_ring_laws(p, K, a, b, c):
    x, y, z = (TruncatedPadic.of(t, p, K) for t in (a, b, c))
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == TruncatedPadic(p, 0, K)


@settings(max_examples=200)
@given(primes, st.integers(1, 30), st.integers())
def test_unit_inverse_involutive(p, K, a):
    x = TruncatedPadic.of(a, p, K)
    if not x.is_unit():
        return
    inv = unit_inverse(x)
    assert (x * inv).value == 1 % p**K
    assert unit_inverse(inv) == x


def test_mat_det_examples():
    assert mat_det(PMatrix.identity(3, 2, 8)).value == 1
    assert mat_det(PMatrix.from_rows([[3, 0], [0, 1]], 2, 3)).value == 3
    assert mat_det(PMatrix.from_rows([[0, 1], [-1, 0]], 5, 4)).value == 1


def _random_matrix(rng, n, p, K):
    mod = p**K
    return PMatrix.from_rows([[rng.randrange(mod) for _ in range(n)] for _ in range(n)], p, K)


def test_mat_det_multiplicative():
    rng = random.Random(1)
    for _ in range(1000):
        p = rng.choice([2, 3, 5])
        n = rng.choice([2, 3])
        A = _random_matrix(rng, n, p, rng.randint(1, 12))
        B = _random_matrix(rng, n, p, rng.randint(1, 12))
        assert mat_det(A @ B) == mat_det(A) * mat_det(B)


def test_mat_inverse_examples():
    I = PMatrix.identity(2, 3, 5)
    assert mat_inverse(I) == I
    U = PMatrix.from_rows([[1, 1], [0, 1]], 2, 6)
    assert mat_inverse(U).rows == ((1, 63), (0, 1))


def test_mat_inverse_random_unit_det():
    rng = random.Random(2)
    done = 0
    while done < 50:
        M = _random_matrix(rng, 3, 3, 5)
        if not mat_det(M).is_unit():
            continue
        N = mat_inverse(M)
        assert (M @ N).is_identity() and (N @ M).is_identity()
        done += 1


def test_mat_inverse_singular():
    with pytest.raises(NotInvertibleError, match="matrix not invertible over Z_p"):
        mat_inverse(PMatrix.from_rows([[2, 0], [0, 1]], 2, 4))


def test_reduce_examples():
    assert reduce(PMatrix.identity(2, 2, 5), 3) == ((1, 0), (0, 1))
    rng = random.Random(3)
    a, b, c, d = (rng.randrange(1000) for _ in range(4))
    M = PMatrix.from_rows([[1 + 4 * a, 4 * b], [4 * c, 1 + 4 * d]], 2, 10)
    assert reduce(M, 2) == ((1, 0), (0, 1))
    N = _random_matrix(rng, 3, 5, 4)
    assert reduce(N, 1) == tuple(tuple(x % 5 for x in r) for r in N.rows)


def test_reduce_beyond_precision():
    with pytest.raises(PrecisionError, match="insufficient certified precision"):
        reduce(PMatrix.identity(2, 2, 3), 4)


def test_reduce_is_homomorphism():
    rng = random.Random(4)
    for _ in range(300):
        p, K = rng.choice([2, 3]), rng.randint(2, 10)
        A, B = _random_matrix(rng, 2, p, K), _random_matrix(rng, 2, p, K)
        m = rng.randint(1, K)
        mod = p**m
        ra, rb = reduce(A, m), reduce(B, m)
        prod = tuple(
            tuple(sum(ra[i][k] * rb[k][j] for k in range(2)) % mod for j in range(2)) for i in range(2)
        )
        assert reduce(A @ B, m) == prod


def test_matrix_mixed_precision():
    A = PMatrix.identity(2, 2, 8)
    B = PMatrix.identity(2, 2, 3)
    assert (A @ B).K == 3
