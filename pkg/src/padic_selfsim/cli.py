"""Command-line entry point: ``padic-selfsim <command> [options]``.

Exit codes: 0 success, 1 a check found a violation, 2 unparseable input,
3 precondition failure, 4 precision exhausted, 5 budget cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import apartment, building, engine, quaternion
from .congruence import (
    TRANSVERSAL_CAP,
    GroupElement,
    enumerate_transversal,
    random_group_element,
)
from .endo import (
    check_invariance,
    make_endo,
    normality_witness,
    SubgroupSpec,
)
from .errors import BudgetError, InvariantViolation, PrecisionError, PreconditionError
from .padic import DEFAULT_PRECISION, check_prime

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_PRECISION, EXIT_BUDGET = range(6)


class ParseError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    p: int
    n: int
    vals: tuple
    K: int
    seed: int
    fmt: str
    jobs: int
    budget: int

    def __post_init__(self):
        check_prime(self.p)
        if self.n < 2:
            raise PreconditionError("n must be at least 2")
        if len(self.vals) != self.n:
            raise PreconditionError(f"--vals has {len(self.vals)} entries but n = {self.n}")
        if self.K < 1:
            raise PreconditionError("precision must be positive")
        if self.jobs < 1 or self.budget < 1:
            raise PreconditionError("--jobs and --budget must be positive")

    def endo(self):
        return make_endo(self.p, self.vals)


DEFAULT_VALS = {2: (1, -1), 3: (1, 0, -1)}


def parse_ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(";", ",").replace(" ", ",").split(",") if x)
    except ValueError:
        raise ParseError(f"cannot parse integer list {text!r}") from None


def parse_rationals(text: str) -> list:
    try:
        return [Fraction(x) for x in text.replace(";", ",").replace(" ", ",").split(",") if x]
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"cannot parse rational list {text!r}") from None


def parse_matrix(text: str, rational: bool = False) -> list:
    """Row-major literal: '1,0,4,1' or '1 0; 4 1' (n inferred from the entry count)."""
    flat = parse_rationals(text) if rational else list(parse_ints(text))
    n = math.isqrt(len(flat))
    if n < 1 or n * n != len(flat):
        raise ParseError(f"matrix literal {text!r} does not have a square number of entries")
    return [flat[i * n:(i + 1) * n] for i in range(n)]


def make_config(args) -> RunConfig:
    vals = parse_ints(args.vals) if args.vals else None
    n = args.n
    if n is None:
        n = len(vals) if vals else getattr(args, "default_n", 2)
    if vals is None:
        if n not in DEFAULT_VALS:
            raise PreconditionError(f"no default valuations for n = {n}; pass --vals")
        vals = DEFAULT_VALS[n]
    return RunConfig(args.p, n, tuple(vals), args.precision, args.seed, args.format, args.jobs, args.budget)


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _matrix_rows(g: GroupElement) -> list:
    return [list(r) for r in g.rows]


def _element_from_args(args, cfg: RunConfig, A: engine.Action) -> GroupElement:
    if args.rep is not None:
        if not 0 <= args.rep < A.d:
            raise PreconditionError(f"--rep must be in [0, {A.d})")
        return A.transversal[args.rep]
    if args.matrix is None:
        raise ParseError("pass --matrix or --rep")
    rows = parse_matrix(args.matrix)
    if len(rows) != cfg.n:
        raise PreconditionError(f"matrix is {len(rows)}x{len(rows)} but n = {cfg.n}")
    return GroupElement.from_rows(rows, cfg.p, cfg.K)


def _action(cfg: RunConfig) -> engine.Action:
    phi = cfg.endo()
    return engine.Action(enumerate_transversal(cfg.n, cfg.p, phi.m, cfg.K, cap=cfg.budget), phi)


# -- commands ------------------------------------------------------------------

def cmd_transversal(args) -> int:
    cfg = make_config(args)
    m = args.m if args.m is not None else cfg.endo().m
    T = enumerate_transversal(cfg.n, cfg.p, m, max(cfg.K, m), cap=cfg.budget)
    _emit(args, T.to_json())
    return EXIT_OK


def cmd_act(args) -> int:
    cfg = make_config(args)
    A = _action(cfg)
    g = _element_from_args(args, cfg, A)
    w = _word_arg(args.word, A.d)
    image, r = engine.act_and_restrict(A, g, w)
    image_text = engine.format_word(image, A.d)
    if cfg.fmt == "json":
        _emit(args, json.dumps({
            "word": engine.format_word(w, A.d),
            "image": image_text,
            "restriction": _matrix_rows(r),
            "precision": r.K,
            "p": cfg.p,
        }))
    else:
        rows = "; ".join(" ".join(str(x) for x in row) for row in r.rows)
        _emit(args, f"image: {image_text}\nrestriction: [{rows}] (mod {cfg.p}^{r.K})\n")
    return EXIT_OK


def _word_arg(text: str, d: int) -> tuple:
    if not re.fullmatch(r"\s*(\d+(\.\d+)*)?\s*", text):
        raise ParseError(f"cannot parse word {text!r}")
    return engine.parse_word(text, d)


def cmd_portrait(args) -> int:
    cfg = make_config(args)
    A = _action(cfg)
    g = _element_from_args(args, cfg, A)
    P = engine.portrait(A, g, args.depth)
    _emit(args, P.to_json())
    return EXIT_OK


def _wreath_chunk(payload) -> int:
    p, vals, K, samples = payload
    A = engine.build_action(p, vals, K)
    return sum(_wreath_violations(A, g1, g2, v) for g1, g2, v in samples)


def _wreath_violations(A, g1, g2, v) -> int:
    img2, r2 = engine.act_and_restrict(A, g2, v)
    img1, r1 = engine.act_and_restrict(A, g1, img2)
    img12, r12 = engine.act_and_restrict(A, g1 @ g2, v)
    bad = int(img12 != img1)
    bad += int(not r12.congruent(r1 @ r2))
    if v:
        k = len(v) // 2
        split = engine.restriction(A, engine.restriction(A, g1, v[:k]), v[k:])
        bad += int(not split.congruent(engine.restriction(A, g1, v)))
    return bad


def wreath_samples(A: engine.Action, count: int, max_len: int, seed: int) -> list:
    rng = random.Random(seed)
    n, p, K = A.endo.n, A.endo.p, A.transversal.K
    out = []
    for _ in range(count):
        g1 = random_group_element(n, p, K, rng)
        g2 = random_group_element(n, p, K, rng)
        v = tuple(rng.randrange(A.d) for _ in range(rng.randint(0, max_len)))
        out.append((g1, g2, v))
    return out


def cmd_check_wreath(args) -> int:
    cfg = make_config(args)
    A = _action(cfg)
    A.check_budget(GroupElement.identity(cfg.n, cfg.p, cfg.K), args.max_len)
    samples = wreath_samples(A, args.samples, args.max_len, cfg.seed)
    if cfg.jobs > 1:
        chunks = [samples[i::cfg.jobs] for i in range(cfg.jobs)]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            violations = sum(pool.map(
                _wreath_chunk, [(cfg.p, cfg.vals, cfg.K, c) for c in chunks]
            ))
    else:
        violations = sum(_wreath_violations(A, *s) for s in samples)
    report = {"samples": len(samples), "max_len": args.max_len, "violations": violations}
    if cfg.fmt == "json":
        _emit(args, json.dumps(report))
    else:
        _emit(args, f"wreath identities: {len(samples)} samples, {violations} violations\n")
    return EXIT_OK if violations == 0 else EXIT_CHECK


def _subgroup_from_args(args, cfg: RunConfig, m: int) -> SubgroupSpec:
    level = args.level if args.level is not None else m
    if args.subgroup == "congruence":
        return SubgroupSpec("congruence", level)
    if args.subgroup == "center":
        return SubgroupSpec("center")
    if args.subgroup == "torus":
        return SubgroupSpec("diagonal-torus-intersection", level)
    gens = [GroupElement.from_rows(parse_matrix(t), cfg.p, cfg.K) for t in args.generator or []]
    if not gens:
        raise ParseError("--subgroup generated needs at least one --generator")
    return SubgroupSpec("finite-generated", level, tuple(gens))


def _verdict_json(v) -> dict:
    out = {"verdict": v.kind, "checked": v.checked}
    if v.found:
        out["witness"] = [_matrix_rows(x) for x in v.witness]
    return out


def cmd_invariance(args) -> int:
    cfg = make_config(args)
    phi = cfg.endo()
    N = _subgroup_from_args(args, cfg, phi.m)
    inv = check_invariance(phi, N, budget=min(cfg.budget, args.samples), seed=cfg.seed)
    nor = normality_witness(N, cfg.n, cfg.p, phi.m, budget=min(cfg.budget, args.samples), seed=cfg.seed)
    report = {
        "endo": json.loads(phi.to_json()),
        "subgroup": {"kind": N.kind, "level": N.level},
        "invariance": _verdict_json(inv),
        "normality": _verdict_json(nor),
    }
    if cfg.fmt == "json":
        _emit(args, json.dumps(report))
    else:
        lines = [f"subgroup {N.kind} (level {N.level}) under conjugation by diag(p^{list(phi.vals)})"]
        for name, v in (("phi-invariance", inv), ("normality in H0", nor)):
            lines.append(f"  {name}: {v.kind} after {v.checked} samples")
            if v.found:
                for x in v.witness:
                    lines.append(f"    {_matrix_rows(x)}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_building_distance(args) -> int:
    cfg = make_config(args)
    if args.ball is not None:
        center = building.standard_vertex(cfg.n, cfg.p)
        verts, adj = building.ball_graph(center, args.ball)
        edges = sorted({(min(i, j), max(i, j)) for i, nb in enumerate(adj) for j in nb})
        _emit(args, json.dumps({
            "p": cfg.p,
            "n": cfg.n,
            "radius": args.ball,
            "vertices": [[list(r) for r in v.basis] for v in verts],
            "edges": [list(e) for e in edges],
        }))
        return EXIT_OK
    L = _lattice_arg(args.source, cfg)
    M = _lattice_arg(args.target, cfg)
    d = building.distance(L, M)
    if cfg.fmt == "json":
        _emit(args, json.dumps({"from": [list(r) for r in L.basis], "to": [list(r) for r in M.basis], "distance": d}))
    else:
        _emit(args, f"{d}\n")
    return EXIT_OK


def _lattice_arg(text, cfg: RunConfig):
    if text is None:
        return building.standard_vertex(cfg.n, cfg.p)
    rows = parse_matrix(text, rational=True)
    return building.canonical_lattice(rows, cfg.p)


def cmd_displacement(args) -> int:
    cfg = make_config(args)
    phi = cfg.endo()
    table = building.displacement_table(phi, args.t_max)
    if cfg.fmt == "json":
        _emit(args, json.dumps({"endo": json.loads(phi.to_json()), "rows": [list(r) for r in table]}))
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "distance"])
        writer.writerows(table)
        _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_apartment_svg(args) -> int:
    cfg = make_config(args)
    if cfg.n != 3:
        raise PreconditionError("apartment-svg supports n = 3 only")
    x = parse_rationals(args.x) if args.x else apartment.DEFAULT_BARYCENTRIC
    if len(x) != 3:
        raise ParseError("--x takes three barycentric weights")
    bundle = apartment.apartment_window(args.radius, cfg.vals, x, args.N, cfg.p)
    _emit(args, apartment.emit_apartment_svg(bundle))
    return EXIT_OK


def _algebra(args, cfg: RunConfig):
    if args.a is None and args.b is None:
        return quaternion.default_algebra(cfg.p)
    if args.a is None or args.b is None:
        raise ParseError("pass both --a and --b")
    return quaternion.QuaternionAlgebra(cfg.p, args.a, args.b)


def cmd_quat_check(args) -> int:
    cfg = make_config(args)
    D = _algebra(args, cfg)
    out = {"algebra": D.to_dict(), "division": True}
    if args.coords:
        x = D.element(parse_ints(args.coords), cfg.K)
        if len(x.coords) != 4:
            raise ParseError("--coords takes four integers")
        n = quaternion.nrd(x)
        out["element"] = list(x.coords)
        out["nrd"] = n.signed()
        out["sl1"] = quaternion.sl1_member(x)
        out["w"] = None if n.is_zero() else n.valuation()
        if out["sl1"]:
            out["level"] = quaternion.filtration_level(x)
    g = D.uniformizer(cfg.K)
    worst = quaternion.conj_displacement(g, args.level, min(args.samples, cfg.budget), cfg.seed)
    out["dichotomy"] = json.loads(quaternion.dichotomy_fragment(D, min(args.samples, cfg.budget), worst))
    if cfg.fmt == "json":
        _emit(args, json.dumps(out))
    else:
        lines = [f"algebra ({D.a},{D.b}) over Q_{D.p}: division"]
        for key in ("element", "nrd", "sl1", "w", "level"):
            if key in out:
                lines.append(f"  {key}: {out[key]}")
        lines.append(f"  max level displacement under conjugation by a uniformizer: {worst}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def dichotomy_rows(cfg: RunConfig, t_max: int, samples: int, level: int, anisotropic_only: bool, D) -> list:
    phi = None if anisotropic_only else cfg.endo()
    g = D.uniformizer(cfg.K)
    rows = []
    for t in range(t_max + 1):
        iso = 0 if phi is None else building.orbit_displacement(phi, t)
        aniso = 0 if t == 0 else quaternion.conj_displacement(g, level, samples, cfg.seed + t, power=t)
        rows.append((t, iso, aniso))
    return rows


def cmd_dichotomy_report(args) -> int:
    cfg = make_config(args)
    D = _algebra(args, cfg)
    rows = dichotomy_rows(cfg, args.t_max, min(args.samples, cfg.budget), args.level, args.anisotropic_only, D)
    growing = any(b > a for (_, a, _), (_, b, _) in zip(rows, rows[1:]))
    bounded = all(r[2] == 0 for r in rows)
    if args.anisotropic_only:
        iso_note = "building of SL(1,D) is a single point: displacement 0 by definition"
    elif growing:
        iso_note = f"SL({cfg.n},Q_{cfg.p}): orbit of the standard vertex under conjugation is unbounded"
    else:
        iso_note = f"SL({cfg.n},Q_{cfg.p}): no growth observed"
    aniso_note = (
        f"SL(1,D), D=({D.a},{D.b})_Q{D.p}: conjugation preserves every filtration level (bounded)"
        if bounded
        else f"SL(1,D), D=({D.a},{D.b})_Q{D.p}: level displacement observed"
    )
    if cfg.fmt == "json":
        _emit(args, json.dumps({
            "endo": None if args.anisotropic_only else json.loads(cfg.endo().to_json()),
            "algebra": D.to_dict(),
            "rows": [{"t": t, "building_displacement": a, "quaternion_displacement": b} for t, a, b in rows],
            "isotropic": iso_note,
            "anisotropic": aniso_note,
        }))
    else:
        lines = [f"{'t':>3} {'building':>9} {'quaternion':>11}"]
        lines += [f"{t:>3} {a:>9} {b:>11}" for t, a, b in rows]
        lines += ["", iso_note, aniso_note]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-p", type=int, default=2, help="prime (default 2)")
    common.add_argument("-n", type=int, default=None, help="matrix size (default from --vals)")
    common.add_argument("--vals", default=None, help="conjugator valuations, e.g. 1,-1")
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="p-adic digits K")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "svg", "text"), default="text")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--budget", type=int, default=TRANSVERSAL_CAP, help="size cap for enumerations and samples")
    common.add_argument("-o", "--output", default=None, help="write to file instead of stdout")

    parser = argparse.ArgumentParser(prog="padic-selfsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, **defaults):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func, **defaults)
        return sp

    sp = add("transversal", cmd_transversal, "coset representatives of Gamma(p^m) as JSON")
    sp.add_argument("-m", type=int, default=None, help="congruence level (default: gap of --vals)")

    for name, func, text in (("act", cmd_act, "image of a word and the restriction"),
                             ("portrait", cmd_portrait, "portrait of an element as JSON")):
        sp = add(name, func, text)
        sp.add_argument("--matrix", help="row-major integer matrix, e.g. 1,0,4,1")
        sp.add_argument("--rep", type=int, help="use transversal representative h_k")
        if name == "act":
            sp.add_argument("--word", default="", help="digits, or '.'-separated letters when d > 10")
        else:
            sp.add_argument("--depth", type=int, default=1)

    sp = add("check-wreath", cmd_check_wreath, "verify the restriction cocycle identities on samples")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--max-len", type=int, default=4)

    sp = add("invariance", cmd_invariance, "search for non-invariance and non-normality witnesses")
    sp.add_argument("--subgroup", choices=("congruence", "center", "torus", "generated"), default="congruence")
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--generator", action="append", help="matrix literal (repeatable)")
    sp.add_argument("--samples", type=int, default=10)

    sp = add("building-distance", cmd_building_distance, "distance between two lattice classes")
    sp.add_argument("--from", dest="source", help="lattice basis (columns), rationals allowed")
    sp.add_argument("--to", dest="target", help="lattice basis (columns), rationals allowed")
    sp.add_argument("--ball", type=int, default=None, help="dump the ball of this radius as JSON instead")

    sp = add("displacement", cmd_displacement, "distance from [Lambda_0] to s^t [Lambda_0]")
    sp.add_argument("--t-max", type=int, default=8)

    sp = add("apartment-svg", cmd_apartment_svg, "SVG of the SL(3) apartment and the line x -> s.x", default_n=3)
    sp.add_argument("--radius", type=int, default=3)
    sp.add_argument("--N", type=int, default=2)
    sp.add_argument("--x", default=None, help="barycentric weights of x in C, e.g. 29/40,7/40,1/10")

    for name, func, text in (("quat-check", cmd_quat_check, "quaternion algebra checks"),
                             ("dichotomy-report", cmd_dichotomy_report, "isotropic vs anisotropic table")):
        sp = add(name, func, text)
        sp.add_argument("--a", type=int, default=None)
        sp.add_argument("--b", type=int, default=None)
        sp.add_argument("--samples", type=int, default=100)
        sp.add_argument("--level", type=int, default=1)
        if name == "quat-check":
            sp.add_argument("--coords", default=None, help="x0,x1,x2,x3")
        else:
            sp.add_argument("--t-max", type=int, default=8)
            sp.add_argument("--anisotropic-only", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PrecisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
