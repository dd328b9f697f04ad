#!/usr/bin/env python3
"""Scan growing candidate balls for targets the ratio kernel cannot separate.

Runs the equivalence detector at increasing candidate radii and prints
the member set and certificate at each size.  On the free-group preset
the member set stays {e}; on the tree-times-line preset the whole line
fibre over the identity joins, one shell at a time.

Example:
    python3 scripts/reduced_boundary_scan.py --preset t3xZ --max-radius 4
"""

import argparse
import sys
import time

from treewalks import detect_R_mu, preset


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="f2-lazy-uniform")
    ap.add_argument("--max-radius", type=int, default=4)
    ap.add_argument("--probe-radius", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()

    walk = preset(args.preset)
    for radius in range(1, args.max_radius + 1):
        t0 = time.perf_counter()
        report = detect_R_mu(
            walk,
            candidate_radius=radius,
            probe_radius=args.probe_radius,
            tol=args.tol,
        )
        dt = time.perf_counter() - t0
        members = ", ".join(report.members())
        print(f"radius {radius} ({dt:.2f} s): members = {{{members}}}")
        print(f"  {report.certificate}; inverse-closed: {report.inverse_closed}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
