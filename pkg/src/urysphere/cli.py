"""Command-line front end.

Subcommands: gen, check, axioms, witness, ladder, verify.  Exit codes are a
stable contract: 0 success, 1 verification or property failure, 2 usage or
parse error.  Every command is deterministic under fixed flags; the default
seed comes from URY_SEED.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from fractions import Fraction

from . import sampling
from .errors import MetricViolation, ParseError, UryError
from .independence import check_sir_axioms
from .isometry_engine import FreeStrategy, LazyIsometry, Universe
from .metric_core import parse_rational, parse_space, serialize_space
from .witnesses import (
    Certificate,
    ladder_run,
    move1_conjugators,
    sphere_witness,
    two_kd_extension_step,
    verify_certificate,
)


def _default_seed() -> int:
    raw = os.environ.get("URY_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rational_flag(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ury",
        description="Exact finite metric spaces, independence checks, and "
                    "certified isometry constructions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="emit a random valid space file")
    gen.add_argument("--points", type=int, default=5)
    gen.add_argument("--den", type=int, default=12)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", default=None)

    check = sub.add_parser("check", help="validate a space file")
    check.add_argument("file")

    axioms = sub.add_parser("axioms", help="run the independence axiom battery")
    axioms.add_argument("--trials", type=int, default=200)
    axioms.add_argument("--points", type=int, default=8)
    axioms.add_argument("--den", type=int, default=24)
    axioms.add_argument("--seed", type=int, default=None)
    axioms.add_argument("--format", choices=("text", "structured"), default="text")
    axioms.add_argument("--out", default=None)
    axioms.add_argument("--inject-faulty-amalgam", action="store_true",
                        help=argparse.SUPPRESS)

    witness = sub.add_parser("witness", help="build and certify a construction")
    witness.add_argument("subkind", choices=("move1", "sphere", "alltypes", "2kd"))
    witness.add_argument("--k", type=_rational_flag, default=None)
    witness.add_argument("--d", type=_rational_flag, default=None)
    witness.add_argument("--d0", type=_rational_flag, default=None)
    witness.add_argument("--trials", type=int, default=1)
    witness.add_argument("--points", type=int, default=4)
    witness.add_argument("--den", type=int, default=8)
    witness.add_argument("--seed", type=int, default=None)
    witness.add_argument("--out", default=None)

    ladder = sub.add_parser("ladder", help="replay the doubling ladder")
    mode = ladder.add_mutually_exclusive_group()
    mode.add_argument("--symbolic", action="store_true", default=True)
    mode.add_argument("--concrete", dest="symbolic", action="store_false")
    ladder.add_argument("--trials", type=int, default=2)
    ladder.add_argument("--points", type=int, default=4)
    ladder.add_argument("--den", type=int, default=8)
    ladder.add_argument("--seed", type=int, default=None)
    ladder.add_argument("--out", default=None)

    verify = sub.add_parser("verify", help="re-check a certificate file")
    verify.add_argument("file")

    return parser


def cmd_gen(args) -> int:
    if args.points < 2:
        print("gen: --points must be at least 2", file=sys.stderr)
        return 2
    if args.den < 2:
        print("gen: --den must be at least 2", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else _default_seed()
    rng = random.Random(seed)
    space = sampling.random_space(rng, args.points, args.den)
    _write(serialize_space(space), args.out)
    return 0


def cmd_check(args) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"check: {exc}", file=sys.stderr)
        return 2
    try:
        parse_space(text)
    except ParseError as exc:
        print(f"check: parse error: {exc}", file=sys.stderr)
        return 2
    except MetricViolation as exc:
        print("check: metric violations:", file=sys.stderr)
        for line in exc.violations:
            print(f"  {line}", file=sys.stderr)
        return 1
    print("ok")
    return 0


def _faulty_amalgam(left, right, base):
    """Negative-control amalgam: min-max cross distances, not additive."""
    from .metric_core import ONE, validate_space

    base_t = tuple(dict.fromkeys(base))
    right_only = [r for r in right.points if r not in base_t]
    if not right_only:
        return left
    points = left.points + tuple(right_only)

    def cross(a, c):
        if not base_t:
            return ONE
        return min(max(left.dist(a, b), right.dist(b, c)) for b in base_t)

    rows = []
    for p in points:
        row = []
        for q in points:
            if p in left.points and q in left.points:
                row.append(left.dist(p, q))
            elif p in right.points and q in right.points:
                row.append(right.dist(p, q))
            elif p in left.points:
                row.append(cross(p, q))
            else:
                row.append(cross(q, p))
        rows.append(row)
    return validate_space(points, rows)


def cmd_axioms(args) -> int:
    if args.trials < 1:
        print("axioms: --trials must be positive", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else _default_seed()
    amalgam_fn = _faulty_amalgam if args.inject_faulty_amalgam else None
    report = check_sir_axioms(
        trials=args.trials, max_points=args.points, max_den=args.den,
        seed=seed, amalgam_fn=amalgam_fn)
    text = report.to_json() if args.format == "structured" else report.to_text()
    _write(text, args.out)
    return 0 if report.ok else 1


def _fresh_free_universe(seed: int, points: int, den: int) -> tuple[Universe, LazyIsometry]:
    rng = random.Random(seed)
    universe = Universe(sampling.random_space(rng, points, den))
    g = LazyIsometry(universe, "g", FreeStrategy())
    return universe, g


def cmd_witness(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    rng = random.Random(seed * 2_000_003 + 1)
    try:
        if args.subkind == "move1":
            if args.k is None:
                print("witness move1: --k is required", file=sys.stderr)
                return 2
            if not 0 < args.k <= 1:
                print("witness move1: --k must be in (0,1]", file=sys.stderr)
                return 2
            from .metric_core import validate_space

            space = validate_space(["a", "b"], [[0, args.k], [args.k, 0]])
            universe = Universe(space)
            g = LazyIsometry(universe, "g", FreeStrategy(), initial=[("a", "b")])
            cert = move1_conjugators(g, "a")
        elif args.subkind == "sphere":
            universe, g = _fresh_free_universe(seed, args.points, args.den)
            a = universe.space.points[0]
            g.evaluate(a)
            others = [p for p in universe.space.points[1:]]
            A = [a] + rng.sample(others, k=min(len(others), 2))
            _, cert = sphere_witness(g, A, a)
        elif args.subkind == "alltypes":
            d0 = args.d0 if args.d0 is not None else Fraction(1)
            if not 0 <= d0 <= 1:
                print("witness alltypes: --d0 must be in [0,1]", file=sys.stderr)
                return 2
            universe, g = _fresh_free_universe(seed, args.points, args.den)
            from .witnesses import alltypes_witness

            children = []
            for t in range(max(1, args.trials)):
                den2 = math.lcm(args.den, d0.denominator)
                if args.d is not None:
                    d = args.d
                    den2 = math.lcm(den2, d.denominator)
                else:
                    d = Fraction(rng.randint(1, max(1, int(d0 * den2))), den2)
                if d > d0:
                    print("witness alltypes: --d must not exceed --d0",
                          file=sys.stderr)
                    return 2
                pts = list(universe.space.points)
                base = rng.sample(pts, k=min(len(pts), rng.randint(1, 3)))
                p = sampling.random_profile(
                    rng, universe.space.restrict(base), den2, distance=d)
                _, child = alltypes_witness(g, p, d0)
                children.append(child)
            cert = children[0] if len(children) == 1 else Certificate(
                kind="batch", params={"count": str(len(children))},
                children=children)
        else:  # 2kd
            universe, g = _fresh_free_universe(seed, args.points, args.den)
            h = LazyIsometry(universe, "h", FreeStrategy())
            children = []
            for t in range(max(1, args.trials)):
                pts = list(universe.space.points)
                base = rng.sample(pts, k=min(len(pts), rng.randint(1, 2)))
                for x in base:
                    h.evaluate(x)
                den2 = args.den
                if args.d is not None:
                    den2 = math.lcm(den2, args.d.denominator)
                p = sampling.random_profile(
                    rng, universe.space.restrict(base), den2, distance=args.d)
                _, child = two_kd_extension_step(g, h, p)
                children.append(child)
            cert = children[0] if len(children) == 1 else Certificate(
                kind="batch", params={"count": str(len(children))},
                children=children)
    except UryError as exc:
        print(f"witness {args.subkind}: {exc}", file=sys.stderr)
        return 1
    _write(cert.to_json(), args.out)
    ok, report = verify_certificate(cert)
    if not ok:
        for line in report:
            print(f"witness: self-verification failed: {line}", file=sys.stderr)
        return 1
    return 0


def cmd_ladder(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        states, cert = ladder_run(
            symbolic=args.symbolic, seed=seed, trials=args.trials,
            points=args.points, den=args.den)
    except UryError as exc:
        print(f"ladder: {exc}", file=sys.stderr)
        return 1
    lines = ["step  threshold  doubled      guarantee"]
    for s in states:
        lines.append(
            f"{s.step:>4}  {str(s.threshold):>9}  "
            f"{s.doubled.text():>11}  {s.guarantee.text()}")
    lines.append(f"letters = {cert.params['letters']}  "
                 f"external factor = {cert.params['external_factor']}  "
                 f"total = {cert.params['total']}")
    for anomaly in cert.anomalies:
        lines.append(f"anomaly at step {anomaly['step']}: {anomaly['note']}")
    if not args.symbolic:
        lines.append(f"concrete certificates: {len(cert.children)}")
    print("\n".join(lines))
    if args.out:
        _write(cert.to_json(), args.out)
    ok, report = verify_certificate(cert)
    if not ok:
        for line in report:
            print(f"ladder: self-verification failed: {line}", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return 2
    try:
        cert = Certificate.from_json(text)
    except ParseError as exc:
        print(f"verify: parse error: {exc}", file=sys.stderr)
        return 2
    ok, report = verify_certificate(cert)
    if ok:
        print("certificate verified")
        return 0
    for line in report:
        print(f"mismatch: {line}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "check": cmd_check,
        "axioms": cmd_axioms,
        "witness": cmd_witness,
        "ladder": cmd_ladder,
        "verify": cmd_verify,
    }
    return handlers[args.command](args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
