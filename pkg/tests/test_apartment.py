import math
import re
from fractions import Fraction
from pathlib import Path

import pytest

from padic_selfsim.apartment import (
    BASE_ALCOVE,
    alcove_of,
    alcove_vertices,
    apartment_window,
    emit_apartment_svg,
    gallery_of_segment,
    window_alcoves,
)
from padic_selfsim.errors import PreconditionError

GOLDEN = Path(__file__).parent / "golden" / "apartment_default.svg"


def dense_gallery(start, end, samples=10_000):
    """Alcove ids met by equally spaced points on the segment, consecutive repeats removed."""
    (u0, w0), (u1, w1) = start, end
    seq = []
    for k in range(samples):
        t = Fraction(2 * k + 1, 2 * samples)
        alc = alcove_of(u0 + t * (u1 - u0), w0 + t * (w1 - w0))
        if not seq or seq[-1] != alc:
            seq.append(alc)
    return tuple(seq)


def shares_wall(a, b):
    return len(set(alcove_vertices(a)) & set(alcove_vertices(b))) == 2


def test_base_alcove_contains_default_point():
    b = apartment_window(N=0)
    assert b.gallery == (BASE_ALCOVE,)
    assert alcove_of(*b.start) == BASE_ALCOVE


@pytest.mark.parametrize("N", [1, 2, 3])
def test_gallery_matches_dense_sampling(N):
    b = apartment_window(N=N)
    assert b.gallery == dense_gallery(b.start, b.end)
    for a, c in zip(b.gallery, b.gallery[1:]):
        assert shares_wall(a, c)


@pytest.mark.parametrize(
    "vals, x", [((2, 0, -2), (Fraction(1, 3) + Fraction(1, 97), Fraction(1, 3), Fraction(1, 3) - Fraction(1, 97))),
                ((1, -3, 2), (Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)))]
)
def test_other_lines(vals, x):
    b = apartment_window(vals=vals, x=x, N=1)
    assert b.gallery == dense_gallery(b.start, b.end)


def test_translation_vector():
    b = apartment_window(N=2)
    assert (b.end[0] - b.start[0], b.end[1] - b.start[1]) == (2, 2)


def test_window_alcoves():
    assert window_alcoves(0) == [BASE_ALCOVE]
    for r in range(1, 5):
        alcs = window_alcoves(r)
        assert len(set(alcs)) == len(alcs)
        for a in alcs:
            assert len(alcove_vertices(a)) == 3


def test_alcove_vertices_enclose_centroid():
    for alc in window_alcoves(2):
        pts = alcove_vertices(alc)
        cu = sum(Fraction(p[0]) for p in pts) / 3
        cw = sum(Fraction(p[1]) for p in pts) / 3
        assert alcove_of(cu, cw) == alc


def test_errors():
    with pytest.raises(PreconditionError, match="general position"):
        apartment_window(x=(Fraction(1, 2), Fraction(1, 2), 0))
    with pytest.raises(PreconditionError, match="degenerate"):
        apartment_window(vals=(1, 1, -2))
    with pytest.raises(PreconditionError):
        apartment_window(vals=(1, -1))
    with pytest.raises(PreconditionError, match="general position"):
        # the segment from the barycentre of C passes through a vertex
        gallery_of_segment((Fraction(-1, 3), Fraction(-1, 3)), (Fraction(1), Fraction(1)))


def test_svg_golden():
    svg = emit_apartment_svg(apartment_window())
    assert svg == GOLDEN.read_text(encoding="utf-8")
    assert svg == emit_apartment_svg(apartment_window())


def test_svg_content():
    b = apartment_window()
    svg = emit_apartment_svg(b)
    assert svg.count("<polygon") == len(b.alcoves)
    in_window = set(b.gallery) & set(b.alcoves)
    assert svg.count('fill="#bde0fe"') == len(in_window - {BASE_ALCOVE})
    assert svg.count('fill="#f4a261"') == 1
    assert 'stroke-dasharray' in svg and svg.count("<circle") == 2


def test_svg_point_marker_only():
    svg = emit_apartment_svg(apartment_window(N=0))
    assert "<line" not in svg and svg.count("<circle") == 1


def test_svg_radius_zero():
    svg = emit_apartment_svg(apartment_window(radius=0))
    assert svg.count("<polygon") == 1


def test_svg_coordinates_are_finite_decimals():
    svg = emit_apartment_svg(apartment_window(radius=2, N=3))
    for num in re.findall(r'"(-?\d+\.\d+)"', svg):
        assert math.isfinite(float(num))
