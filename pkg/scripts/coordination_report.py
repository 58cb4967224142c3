"""Properness and backhaul summary across network sizes.

Prints, for each symmetric antenna setup, the largest user count at
which the alignment system stays proper with and without transmitter
pairing, then the backhaul load of each coordination topology:

    python scripts/coordination_report.py --max-users 8
"""

import argparse

from pcia import backhaul_rate, dof_upper_bound, is_proper_generic, is_proper_partial


def properness_rows(max_users, antennas):
    rows = []
    for m, n in antennas:
        for k in range(2, max_users + 1):
            d_hat = dof_upper_bound([m] * k, [n] * k)
            if d_hat < k:
                continue
            generic = is_proper_generic(k, m, n)
            partial = is_proper_partial(k, m, n)
            rows.append((k, m, n, d_hat, generic.proper, partial.proper))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-users", type=int, default=8)
    args = parser.parse_args(argv)

    antennas = [(2, 2), (3, 3), (4, 4), (2, 3), (3, 2)]
    print(f"{'K':>2} {'m':>2} {'n':>2} {'dof':>4} {'generic':>8} {'paired':>7}")
    for k, m, n, d_hat, gen, par in properness_rows(args.max_users, antennas):
        print(f"{k:>2} {m:>2} {n:>2} {d_hat:>4} {str(gen):>8} {str(par):>7}")

    print()
    print(f"{'K':>2} {'partial ring':>13} {'partial line':>13} "
          f"{'full line':>10} {'full ring':>10}")
    for k in range(2, args.max_users + 1):
        loads = [backhaul_rate(k, topo, coord)
                 for coord, topo in (("partial", "ring"), ("partial", "line"),
                                     ("full", "line"), ("full", "ring"))]
        print(f"{k:>2} {loads[0]:>13} {loads[1]:>13} {loads[2]:>10} {loads[3]:>10}")


if __name__ == "__main__":
    main()
