"""The standard apartment of SL(3, Q_p), its alcove tiling and the gallery of a line.

Points of the apartment are y in R^3 modulo (1,1,1), drawn in the plane
coordinates u = y1 - y2, w = y2 - y3.  Walls are u, w, u + w in Z, so an alcove
is named by the triple of floors (floor u, floor w, floor(u + w)).  The torus
element diag(p^v) translates by v, and all geometry here is exact (Fraction);
floats appear only when formatting SVG coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import PreconditionError

BASE_ALCOVE = (-1, -1, -1)
DEFAULT_BARYCENTRIC = (Fraction(29, 40), Fraction(7, 40), Fraction(4, 40))
DEFAULT_VALS = (1, 0, -1)


def alcove_of(u: Fraction, w: Fraction) -> tuple:
    return (math.floor(u), math.floor(w), math.floor(u + w))


def alcove_vertices(alc: Sequence[int]) -> tuple:
    """Corners (u, w) of an alcove, in a fixed order."""
    a, b, c = alc
    if c == a + b:
        return ((a, b), (a + 1, b), (a, b + 1))
    if c == a + b + 1:
        return ((a + 1, b), (a + 1, b + 1), (a, b + 1))
    raise PreconditionError(f"{tuple(alc)} is not an alcove")


def window_alcoves(radius: int) -> list:
    """Alcoves whose three floors are within ``radius`` of the base alcove's."""
    if radius < 0:
        raise PreconditionError("radius must be non-negative")
    lo, hi = -1 - radius, -1 + radius
    out = []
    for a in range(lo, hi + 1):
        for b in range(lo, hi + 1):
            for c in (a + b, a + b + 1):
                if lo <= c <= hi:
                    out.append((a, b, c))
    return out


def barycentric_to_point(bary: Sequence) -> tuple:
    """y = w0*[Lambda_0] + w1*[Lambda_1] + w2*[Lambda_2] with Lambda_i as apartment vectors."""
    w0, w1, w2 = (Fraction(x) for x in bary)
    if w0 + w1 + w2 != 1:
        raise PreconditionError("barycentric weights must sum to 1")
    if min(w0, w1, w2) <= 0:
        raise PreconditionError("point not in general position: x lies on a wall of C")
    return (Fraction(0), w2, w1 + w2)


def plane_coords(y: Sequence) -> tuple:
    return (Fraction(y[0]) - Fraction(y[1]), Fraction(y[1]) - Fraction(y[2]))


@dataclass(frozen=True)
class ApartmentBundle:
    p: int
    vals: tuple
    radius: int
    N: int
    x: tuple  # point in R^3 (Fractions)
    start: tuple  # (u, w) of x
    end: tuple  # (u, w) of s^N x
    alcoves: tuple
    gallery: tuple
    crossings: tuple  # parameters t in (0, 1) where a wall is crossed


def gallery_of_segment(start: tuple, end: tuple) -> tuple:
    """(gallery, crossing parameters) for the open segment start -> end."""
    u0, w0 = start
    du, dw = end[0] - u0, end[1] - w0
    events = []
    for f0, df in ((u0, du), (w0, dw), (u0 + w0, du + dw)):
        if f0.denominator == 1:
            raise PreconditionError("point not in general position: x lies on a wall")
        if df == 0:
            continue
        lo, hi = sorted((f0, f0 + df))
        for k in range(math.floor(lo) + 1, math.ceil(hi)):
            events.append((k - f0) / df)
    events.sort()
    for a, b in zip(events, events[1:]):
        if a == b:
            raise PreconditionError(
                "point not in general position: the line meets a codimension-2 face"
            )
    cuts = [Fraction(0)] + events + [Fraction(1)]
    gallery = []
    for a, b in zip(cuts, cuts[1:]):
        t = (a + b) / 2
        gallery.append(alcove_of(u0 + t * du, w0 + t * dw))
    return tuple(gallery), tuple(events)


def apartment_window(
    radius: int = 3,
    vals: Sequence[int] = DEFAULT_VALS,
    x: Sequence = DEFAULT_BARYCENTRIC,
    N: int = 2,
    p: int = 2,
    max_radius: int = 50,
    max_N: int = 100,
) -> ApartmentBundle:
    """Tiling of a window around C, the segment x -> s^N x and the alcoves it meets."""
    vals = tuple(int(v) for v in vals)
    if len(vals) != 3:
        raise PreconditionError("the apartment picture is for n = 3")
    if len(set(vals)) != 3:
        raise PreconditionError("degenerate conjugator: valuations must be pairwise distinct")
    if not 0 <= radius <= max_radius or not 0 <= N <= max_N:
        raise PreconditionError("radius or N outside configured bounds")
    y = barycentric_to_point(x)
    start = plane_coords(y)
    end = plane_coords([y[i] + N * vals[i] for i in range(3)])
    if alcove_of(*start) != BASE_ALCOVE:
        raise PreconditionError("x must lie in the base chamber")
    gallery, crossings = gallery_of_segment(start, end)
    return ApartmentBundle(
        p, vals, radius, N, tuple(y), start, end, tuple(window_alcoves(radius)), gallery, crossings
    )


# -- SVG -----------------------------------------------------------------------

SCALE = 48
_SQRT3_2 = math.sqrt(3) / 2


def _screen(u, w) -> tuple:
    return (SCALE * (float(u) + float(w) / 2), -SCALE * _SQRT3_2 * float(w))


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _xy(u, w) -> tuple:
    X, Y = _screen(u, w)
    return _fmt(X), _fmt(Y)


def _pt(u, w) -> str:
    return ",".join(_xy(u, w))


def emit_apartment_svg(bundle: ApartmentBundle) -> str:
    """Deterministic SVG 1.1 drawing of the bundle."""
    corners = [_screen(*v) for alc in bundle.alcoves for v in alcove_vertices(alc)]
    margin = SCALE / 2
    xmin = min(c[0] for c in corners) - margin
    xmax = max(c[0] for c in corners) + margin
    ymin = min(c[1] for c in corners) - margin
    ymax = max(c[1] for c in corners) + margin
    width, height = xmax - xmin, ymax - ymin
    gallery = set(bundle.gallery)
    vals = ",".join(str(v) for v in bundle.vals)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(xmin)} {_fmt(ymin)} {_fmt(width)} {_fmt(height)}" '
        f'width="{_fmt(width)}" height="{_fmt(height)}">',
        f"<title>Apartment of SL(3,Q_{bundle.p}): line through x and s^{bundle.N}.x, "
        f"s = diag(p^({vals}))</title>",
        "<defs>",
        f'<clipPath id="window"><rect x="{_fmt(xmin)}" y="{_fmt(ymin)}" '
        f'width="{_fmt(width)}" height="{_fmt(height)}"/></clipPath>',
        "</defs>",
        '<g id="tiling" stroke="#444444" stroke-width="1" stroke-linejoin="round">',
    ]
    for alc in sorted(bundle.alcoves):
        if alc == BASE_ALCOVE:
            fill = "#f4a261"
        elif alc in gallery:
            fill = "#bde0fe"
        else:
            fill = "#ffffff"
        pts = " ".join(_pt(*v) for v in alcove_vertices(alc))
        out.append(f'<polygon data-alcove="{alc[0]} {alc[1]} {alc[2]}" points="{pts}" fill="{fill}"/>')
    out.append("</g>")

    out.append('<g id="line" clip-path="url(#window)">')
    if bundle.N > 0:
        (u0, w0), (u1, w1) = bundle.start, bundle.end
        # extend well past the window so the infinite line is visible edge to edge
        reach = 4 * (bundle.radius + 2)
        du, dw = u1 - u0, w1 - w0
        norm = max(abs(du), abs(dw), abs(du + dw))
        ext_u, ext_w = du * reach / norm, dw * reach / norm
        a0, b0 = _xy(u0 - ext_u, w0 - ext_w)
        a1, b1 = _xy(u1 + ext_u, w1 + ext_w)
        out.append(
            f'<line x1="{a0}" y1="{b0}" x2="{a1}" y2="{b1}" '
            'stroke="#1d3557" stroke-width="1" stroke-dasharray="4 3"/>'
        )
        x0, y0 = _xy(u0, w0)
        x1, y1 = _xy(u1, w1)
        out.append(
            f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="#1d3557" stroke-width="2.5"/>'
        )
        out.append(f'<circle cx="{x1}" cy="{y1}" r="3.5" fill="#e63946"/>')
    x0, y0 = _xy(*bundle.start)
    out.append(f'<circle cx="{x0}" cy="{y0}" r="3.5" fill="#1d3557"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
