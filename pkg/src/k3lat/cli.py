"""Command-line front end: one job per call, one JSON report line on stdout.

Exit codes: 0 success, 2 unparseable input, 3 violated precondition,
4 failed internal check (including a false verification flag).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import re
import sys
import time
from fractions import Fraction
from typing import Any, Callable

from . import chern, isometry, mukai, orbits
from .exactlinalg import Matrix
from .isometry import InvariantError, RationalIsometry
from .lattices import Lattice, direct_sum, signature, standard_lattice

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_INVARIANT = 0, 2, 3, 4
_SAFE_INT = 2 ** 53


class ParseError(Exception):
    pass


# -- wire format --------------------------------------------------------------


def encode_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def encode_int(x: int):
    return x if abs(x) < _SAFE_INT else str(x)


def encode_matrix(M: Matrix) -> list[list[str]]:
    return [[encode_rational(x) for x in row] for row in M.rows()]


def encode_vector(v) -> list[str]:
    return [encode_rational(x) for x in v]


def encode_isometry(phi: RationalIsometry) -> list[list[str]]:
    return encode_matrix(phi.matrix)


_BARE_FRACTION = re.compile(r'(?<![\w"/.])(-?\d+/\d+)(?![\w"/.])')


def parse_json(text: str) -> Any:
    """JSON where bare ``p/q`` tokens are allowed as rationals."""
    try:
        return json.loads(_BARE_FRACTION.sub(r'"\1"', text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None


def parse_rational(x) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ParseError(f"not an exact rational: {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not an exact rational: {x!r}") from None


def _simplify(x: Fraction):
    return x.numerator if x.denominator == 1 else x


def parse_vector(data) -> tuple:
    if not isinstance(data, list):
        raise ParseError("a vector must be a JSON array")
    return tuple(_simplify(parse_rational(x)) for x in data)


def parse_int_vector(data) -> tuple[int, ...]:
    v = parse_vector(data)
    if any(type(x) is not int for x in v):
        raise ParseError("expected an integral vector")
    return v


def parse_matrix(data) -> Matrix:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ParseError("a matrix must be a non-empty array of rows")
    rows = [parse_vector(r) for r in data]
    if len({len(r) for r in rows}) != 1:
        raise ParseError("ragged matrix")
    return Matrix(rows)


def load_operand(text: str) -> Any:
    """A JSON literal, or ``@path`` naming a file with one JSON value."""
    if text.startswith("@"):
        try:
            with open(text[1:]) as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {text[1:]}: {exc.strerror}") from None
    return parse_json(text)


def parse_lattice(text: str) -> Lattice:
    """A standard name, a ``+``-separated sum of names, or an explicit Gram matrix."""
    text = text.strip()
    if text.startswith("[") or text.startswith("@"):
        data = load_operand(text)
        return Lattice(parse_matrix(data.get("gram") if isinstance(data, dict) else data))
    try:
        parts = [standard_lattice(p.strip()) for p in text.split("+")]
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return parts[0] if len(parts) == 1 else direct_sum(*parts)


def parse_isometry(L: Lattice, text: str) -> RationalIsometry:
    """A matrix literal, or a file object with a ``matrix`` or ``reflection`` key."""
    data = load_operand(text)
    if isinstance(data, dict):
        if "reflection" in data:
            return isometry.reflection(L, parse_int_vector(data["reflection"]))
        if "matrix" in data:
            data = data["matrix"]
        else:
            raise ParseError("isometry object needs a 'matrix' or 'reflection' key")
    M = parse_matrix(data)
    if M.shape != (L.rank, L.rank):
        raise ValueError(f"matrix shape {M.shape} does not match lattice rank {L.rank}")
    return RationalIsometry(L, M)


def _seed(args) -> int:
    env = os.environ.get("K3LAT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParseError("K3LAT_SEED must be an integer") from None
    return args.seed


# -- commands -----------------------------------------------------------------
# Each returns (result, verified) where verified maps check names to booleans.


def _isometry_arg(args) -> tuple[Lattice, RationalIsometry]:
    L = parse_lattice(args.lattice)
    return L, parse_isometry(L, args.isometry)


def cmd_cyclic_type(args):
    L, phi = _isometry_arg(args)
    qs = isometry.quotient_structure(phi)
    n = qs.cyclic_order
    I = isometry.coinvariant_sublattice(phi)
    return (
        {"cyclic_type": n, "elementary_divisors": qs.nontrivial},
        {"index_matches_basis": abs(I.det()) == qs.index,
         "image_integral": (phi.matrix @ I).is_integral()},
    )


def cmd_double_orbit(args):
    L, phi = _isometry_arg(args)
    if L.rank == 2 and L.gram == standard_lattice("U").gram:
        k1, pair, k2 = orbits.u_double_orbit_decompose(phi)
        result = {"pair": [pair.a, pair.b], "left": encode_isometry(k1), "right": encode_isometry(k2)}
        ok = k1 @ pair.isometry() @ k2 == phi
        return result, {"recomposes": ok}
    red = orbits.double_orbit_reduce(phi, canonical=not args.natural)
    result = {"pair": [red.pair.a, red.pair.b], "left": encode_isometry(red.g), "right": encode_isometry(red.h)}
    return result, {"recomposes": red.recompose() == phi,
                    "integral_factors": red.g.is_integral() and red.h.is_integral()}


def cmd_reduce(args):
    L, phi = _isometry_arg(args)
    red = orbits.double_orbit_reduce(phi, canonical=not args.natural)
    n = isometry.cyclic_type(phi)
    return (
        {"cyclic_type": n, "pair": [red.pair.a, red.pair.b],
         "g": encode_isometry(red.g), "h": encode_isometry(red.h)},
        {"recomposes": red.recompose() == phi,
         "integral_factors": red.g.is_integral() and red.h.is_integral(),
         "pair_product": red.pair.n == n},
    )


def cmd_decompose(args):
    L, phi = _isometry_arg(args)
    vectors = isometry.cartan_dieudonne(phi)
    product = isometry.compose_reflections(L, vectors)
    return (
        {"reflections": [encode_vector(v) for v in vectors], "length": len(vectors)},
        {"recomposes": product == phi, "length_bound": len(vectors) <= L.rank + 2},
    )


def cmd_discriminant(args):
    L, phi = _isometry_arg(args)
    I = isometry.coinvariant_sublattice(phi)
    M = orbits.discriminant_module(L, I)
    result: dict = {"elementary_divisors": list(M.elementary_divisors), "order": M.order}
    verified = {"order_is_index_squared": M.order == abs(I.det()) ** 2}
    if args.lagrangians:
        n = math.isqrt(M.order)
        if n * n != M.order:
            raise ValueError("module order is not a square, so it has no lagrangians")
        subgroups = orbits.enumerate_lagrangians(M, n, cap=args.cap)
        result["lagrangians"] = [[list(x) for x in H.generators] for H in subgroups]
        result["lagrangian_count"] = len(subgroups)
        verified["all_isotropic"] = all(M.is_isotropic(H) and H.order == n for H in subgroups)
    return result, verified


def cmd_congruence(args):
    L = parse_lattice(args.lattice)
    l1 = parse_int_vector(load_operand(args.l1))
    l2 = parse_int_vector(load_operand(args.l2))
    k = orbits.congruence_orbit_test(l1, l2, args.n, L)
    d1, d2 = L.norm(l1) // 2, L.norm(l2) // 2
    ok = k is None or (math.gcd(k, args.n) == 1 and (d1 - k * k * d2) % args.n == 0)
    return {"k": k, "congruent": k is not None}, {"witness_valid": ok}


def _mukai_vector(text: str) -> mukai.MukaiVector:
    data = load_operand(text)
    if isinstance(data, list) and len(data) == 3 and isinstance(data[1], list):
        r, c, s = data
        return mukai.MukaiVector(parse_rational(r), parse_vector(c), parse_rational(s))
    v = parse_vector(data)
    if len(v) != mukai.RANK + 2:
        raise ValueError(f"a Mukai vector needs {mukai.RANK + 2} coordinates")
    return mukai.MukaiVector(v[0], v[1:-1], v[-1])


def cmd_mukai_pairing(args):
    v, w = _mukai_vector(args.v), _mukai_vector(args.w)
    value = mukai.mukai_pairing(v, w)
    G = mukai.mukai_lattice().gram
    direct = sum(a * b for a, b in zip(v.as_tuple(), G @ w.as_tuple()))
    return {"pairing": encode_rational(value)}, {"matches_gram": value == direct}


def cmd_mukai_domain(args):
    x = parse_int_vector(load_operand(args.x))
    y = parse_int_vector(load_operand(args.y))
    if args.C is not None:
        C = parse_matrix(load_operand(args.C))
    else:
        rng = random.Random(_seed(args))
        C = Matrix([rng.choices(range(-9, 10), k=mukai.RANK) for _ in range(mukai.RANK)])
    qs = mukai.sheaf_isometry_domain(args.n, args.k, args.j, x, y, C)
    expected = args.n // math.gcd(args.j * args.k, args.n)
    return (
        {"elementary_divisors": list(qs.nontrivial), "cyclic_order": qs.cyclic_order},
        {"order_formula": qs.cyclic_order == expected},
    )


def cmd_mukai_universal(args):
    rep = mukai.verify_universal_example(args.n, args.s, j=args.j)
    return (
        {"n": rep.n, "s": rep.s, "j": rep.j, "k": rep.k,
         "image_of_h": encode_vector(rep.image_of_h),
         "c2_coefficient": rep.c2_coefficient,
         "c1_squared_coefficient": rep.c1_squared_coefficient},
        {"sends_h_to_h_hat": rep.sends_h_to_h_hat, "degree_four_expansion": rep.degree_four_matches,
         "sk_is_one_mod_n": (rep.s * rep.k - 1) % rep.n == 0},
    )


def _random_roots(rng: random.Random, rank: int) -> chern.RootBundle:
    return chern.RootBundle(Fraction(rng.randint(-7, 7), rng.randint(1, 7)) for _ in range(rank))


def cmd_chern_verify(args):
    rng = random.Random(_seed(args))
    D = args.degree
    checks = {"wedge2": True, "sym2": True, "tensor_square": True,
              "virtual_wedge2": True, "extract_graded": True, "r2_multiplicative": True}
    for _ in range(args.trials):
        F = _random_roots(rng, args.rank)
        B = _random_roots(rng, rng.randint(0, args.rank))
        ch = chern.ch_from_roots(F, D)
        chB = chern.ch_from_roots(B, D)
        checks["wedge2"] &= chern.wedge2_ch(F, D) == chern.wedge2_from_ch(ch)
        checks["sym2"] &= chern.sym2_ch(F, D) == chern.sym2_from_ch(ch)
        checks["tensor_square"] &= chern.wedge2_ch(F, D) + chern.sym2_ch(F, D) == ch * ch
        V = chern.VirtualBundle(F, B)
        checks["virtual_wedge2"] &= chern.virtual_wedge2(V, D) == chern.wedge2_from_ch(chern.ch_virtual(V, D))
        checks["extract_graded"] &= chern.extract_graded(chern.adams_cycles(ch)) == ch.components
        checks["r2_multiplicative"] &= chern.r2(ch * chB) == chern.r2(ch) * chern.r2(chB)
    return {"trials": args.trials, "rank": args.rank, "degree": D}, checks


def _selftest_cases() -> dict[str, Callable[[], bool]]:
    K3 = standard_lattice("K3")
    U = standard_lattice("U")
    x6 = (1, 3) + (0,) * 20

    def reduce_case():
        phi = isometry.embed_U_isometry(isometry.u_isometry(3, 2), K3)
        red = orbits.double_orbit_reduce(phi)
        return red.recompose() == phi and red.pair == orbits.UCanonicalPair(6, 1)

    return {
        "k3_signature": lambda: signature(K3) == (3, 19),
        "mukai_signature": lambda: signature(mukai.mukai_lattice()) == (4, 20),
        "reflection_cyclic_type": lambda: isometry.cyclic_type(isometry.reflection(K3, x6)) == 3,
        "u_pair": lambda: orbits.u_double_orbit_canonical(
            RationalIsometry(U, Matrix([["3/2", 0], [0, "2/3"]]))) == orbits.UCanonicalPair(3, 2),
        "double_orbit_reduction": reduce_case,
        "cartan_dieudonne": lambda: isometry.compose_reflections(
            U, isometry.cartan_dieudonne(isometry.u_isometry(5, 2))) == isometry.u_isometry(5, 2),
        "universal_example": lambda: mukai.verify_universal_example(3, 2).verified,
        "wedge2_identity": lambda: chern.wedge2_ch(chern.RootBundle([1, 2, "1/3"]), 6)
        == chern.wedge2_from_ch(chern.ch_from_roots(chern.RootBundle([1, 2, "1/3"]), 6)),
    }


def cmd_selftest(args):
    results = {}
    for name, case in _selftest_cases().items():
        try:
            results[name] = bool(case())
        except (ValueError, AssertionError) as exc:
            print(f"selftest {name}: {exc}", file=sys.stderr)
            results[name] = False
    return {"cases": len(results)}, results


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="k3lat", description="Exact computations with rational isometries of K3-type lattices.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_isometry(name, handler, help_text, lattice_default="K3"):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("--lattice", default=lattice_default, help="name (U, E8, E8_minus, K3, Mukai), sum like U+U, or Gram JSON")
        q.add_argument("--isometry", "--matrix", dest="isometry", required=True,
                       help="matrix JSON, or @file with a 'matrix' or 'reflection' key")
        q.set_defaults(handler=handler)
        return q

    with_isometry("cyclic-type", cmd_cyclic_type, "index structure of L / I_phi")
    q = with_isometry("double-orbit", cmd_double_orbit, "double coset representative")
    q.add_argument("--natural", action="store_true", help="keep the pair met during reduction")
    q = with_isometry("reduce-double-orbit", cmd_reduce, "factor phi = g f h with g, h integral")
    q.add_argument("--natural", action="store_true", help="keep the pair met during reduction")
    with_isometry("decompose-reflections", cmd_decompose, "write phi as a product of reflections")
    q = with_isometry("discriminant", cmd_discriminant, "discriminant module of I_phi")
    q.add_argument("--lagrangians", action="store_true", help="enumerate lagrangian subgroups")
    q.add_argument("--cap", type=int, default=10_000, help="largest module order to enumerate")

    q = sub.add_parser("congruence", help="orbit congruence test for two primitive vectors")
    q.add_argument("--lattice", default="K3")
    q.add_argument("--l1", required=True)
    q.add_argument("--l2", required=True)
    q.add_argument("--n", type=int, required=True)
    q.set_defaults(handler=cmd_congruence)

    q = sub.add_parser("mukai", help="Mukai lattice computations")
    msub = q.add_subparsers(dest="action", required=True)
    m = msub.add_parser("pairing")
    m.add_argument("--v", required=True, help="[r, [c...], s] or a flat 24-array")
    m.add_argument("--w", required=True)
    m.set_defaults(handler=cmd_mukai_pairing)
    m = msub.add_parser("domain")
    for flag in ("--n", "--k", "--j"):
        m.add_argument(flag, type=int, required=True)
    m.add_argument("--x", required=True)
    m.add_argument("--y", required=True)
    m.add_argument("--C", default=None, help="integral 22x22 matrix; random when omitted")
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(handler=cmd_mukai_domain)
    m = msub.add_parser("universal")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--s", type=int, required=True)
    m.add_argument("--j", type=int, default=1)
    m.set_defaults(handler=cmd_mukai_universal)

    q = sub.add_parser("chern", help="Chern character identities")
    csub = q.add_subparsers(dest="action", required=True)
    c = csub.add_parser("verify")
    c.add_argument("--rank", type=int, default=3)
    c.add_argument("--degree", type=int, default=6)
    c.add_argument("--trials", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(handler=cmd_chern_verify)

    q = sub.add_parser("selftest", help="run the built-in example checks")
    q.set_defaults(handler=cmd_selftest)
    return p


def _command_name(args) -> str:
    action = getattr(args, "action", None)
    return f"{args.command} {action}" if action else args.command


def run(argv: list[str] | None = None) -> tuple[int, dict | None]:
    """Parse and execute one job; returns ``(exit_code, report)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_OK if exc.code == 0 else EXIT_PARSE), None
    start = time.perf_counter()
    try:
        result, verified = args.handler(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE, None
    except (InvariantError, AssertionError) as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT, None
    except (ValueError, ZeroDivisionError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION, None
    report = {
        "command": _command_name(args),
        "result": result,
        "verified": verified,
        "timing": {"seconds": round(time.perf_counter() - start, 6)},
    }
    code = EXIT_OK if all(verified.values()) else EXIT_INVARIANT
    return code, report


def main(argv: list[str] | None = None) -> int:
    code, report = run(argv)
    if report is not None:
        print(json.dumps(report, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
