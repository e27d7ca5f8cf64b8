"""Search for telescoping certificates and print them as catalog family blocks.

Run once when adding a family to the catalog; the printed block can be
pasted into ``src/hyperaccel/data/builtin.catalog``.

    python scripts/discover_certificates.py n3n 2n3n 2n-an cube nn-prefactor
"""

from __future__ import annotations

import argparse
import sys
import time

from hyperaccel.certify import derive_recursion, find_certificate, verify_certificate
from hyperaccel.exact import format_poly, format_ratfunc, parse_ratfunc
from hyperaccel.hyperterm import HyperTerm

SHAPES = {
    "n3n": (HyperTerm.build(["a", "b"], ["n", "3*n"]), 1),
    "2n3n": (HyperTerm.build(["a", "b"], ["2*n", "3*n"]), 1),
    "2n-an": (HyperTerm.build(["a", "b"], ["2*n", "a+n"]), 1),
    "cube": (HyperTerm.build(["a", "a", "a"], ["n", "n", "n"]), 2),
    "nn-prefactor": (HyperTerm.build(["a", "b"], ["n", "n"], prefactor=parse_ratfunc("1/(k+n)")), 1),
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("shapes", nargs="*", default=sorted(SHAPES))
    ap.add_argument("--degree-bound", type=int, default=8)
    args = ap.parse_args(argv)
    status = 0
    for name in args.shapes:
        F, r = SHAPES[name]
        t0 = time.perf_counter()
        cert = find_certificate(F, r=r, degree_bound=args.degree_bound)
        dt = time.perf_counter() - t0
        if cert is None or not verify_certificate(F, cert).holds:
            print(f"# {name}: no certificate within degree bound {args.degree_bound}", file=sys.stderr)
            status = 1
            continue
        rec = derive_recursion(F, cert)
        print(f"# {name}: found in {dt:.2f}s", file=sys.stderr)
        print(f"  r         {r}")
        print(f"  R         {format_ratfunc(cert.R)}")
        print(f"  p1        {format_poly(cert.p1)}")
        print(f"  p2        {format_poly(cert.p2)}")
        print(f"  g1        {format_ratfunc(rec.g1)}")
        print(f"  g2        {format_ratfunc(rec.g2)}")
        print()
    return status


if __name__ == "__main__":
    raise SystemExit(main())
