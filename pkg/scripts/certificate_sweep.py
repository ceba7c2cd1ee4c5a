"""Sampled NSP / RIP / SSP certificates for Gaussian operators of growing size.

For each measurement count m, reports the worst sampled NSP margin (negative
means a violating null-space witness was found), the refined RIP lower bound
at the rank patterns (I_1, .., 2 r_n, .., I_N), theta at that bound, and the
SSP estimate Delta. Small domains only: operators are materialized densely.

    python scripts/certificate_sweep.py --shape 4 4 4 --ms 10 20 40 60 200
"""

import argparse
import sys

import numpy as np

from tenrec import guarantees as G
from tenrec.operators import gaussian_operator


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shape", type=int, nargs="+", default=[4, 4, 4])
    ap.add_argument("--ranks", type=int, nargs="+", default=[1, 1, 1])
    ap.add_argument("--ms", type=int, nargs="+", default=[10, 20, 40, 60, 120, 200])
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--rip-samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    shape, ranks = tuple(args.shape), tuple(args.ranks)

    print(f"{'m':>5}{'nsp margin':>12}{'verdict':>18}{'rip pattern':>13}{'theta':>9}{'ssp Delta':>11}")
    for m in args.ms:
        op = gaussian_operator(shape, m, np.random.default_rng([args.seed, m]))
        nsp = G.check_nsp(op, ranks, args.samples, args.seed)
        deltas = []
        for n in range(len(shape)):
            pattern = list(shape)
            pattern[n] = min(2 * ranks[n], shape[n])
            deltas.append(G.estimate_rip(op, pattern, args.rip_samples, 50, args.seed).estimate)
        delta = max(deltas)
        th = f"{G.theta(delta):.3f}" if delta < 1 else "-"
        ssp = G.estimate_ssp(op, args.samples, 10, args.seed)
        d_hat = ssp.details.get("delta_hat", float("nan"))
        print(f"{m:>5}{nsp.estimate:>12.3f}{nsp.verdict:>18}{delta:>13.3f}{th:>9}{d_hat:>11.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
