"""Digits gained per term for every catalog entry, against the predicted rate.

    python scripts/benchmark.py --digits 100
    python scripts/benchmark.py --digits 30 --family n3n
"""

from __future__ import annotations

import argparse
import math
import time

from hyperaccel.catalog import builtin_catalog, load_catalog, validate_entry


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=30)
    ap.add_argument("--family", action="append", default=[])
    ap.add_argument("--catalog")
    args = ap.parse_args(argv)
    cat = load_catalog(args.catalog) if args.catalog else builtin_catalog()

    print(f"{'entry':36} {'rate':>9} {'terms':>6} {'digits':>6} {'d/term':>7} {'pred':>6} {'sec':>7}")
    status = 0
    total = 0.0
    for e in cat.entries:
        if args.family and e.family not in args.family:
            continue
        rate = e.displayed.rate if e.displayed is not None else cat.family(e.family).rate
        t0 = time.perf_counter()
        rep = validate_entry(e, args.digits, cat)
        dt = time.perf_counter() - t0
        total += dt
        predicted = -math.log10(abs(rate.numerator / rate.denominator))
        print(f"{e.id:36} {str(rate):>9} {rep.terms:>6} {rep.digits:>6} "
              f"{rep.digits / rep.terms:>7.3f} {predicted:>6.3f} {dt:>7.3f}")
        status |= not rep.passed
    print(f"total {total:.2f}s")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
