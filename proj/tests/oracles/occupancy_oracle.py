"""Conditional CDF reference table for every occupancy multiplicity pattern.

Uses the exact-convolution density and mpmath quadrature from
detection_oracle.py at the scenario coefficients. The conditional CDF depends
on the occupancy vector only through m = (theta_k, theta_1 + theta_2,
theta_3 + theta_4, theta_5), so the 64 vectors reduce to 36 patterns.
"""
import itertools

import mpmath as mp

from detection_oracle import SCENARIO, cdf

THRESHOLDS = ("0.3", "0.6", "1.0", "1.5", "2.2", "3.0", "4.5", "7.0")


def main():
    n_s = 5
    for snr, coefs in SCENARIO.items():
        for m in itertools.product((0, 1), (0, 1, 2), (0, 1, 2), (0, 1)):
            comps = [(coefs[i], m[i]) for i in range(4) if m[i] > 0]
            vals = [cdf(mp.mpf(x), comps, coefs[4], n_s) for x in THRESHOLDS]
            body = ", ".join(mp.nstr(v, 17) for v in vals)
            print(f"    {{{snr}, {{{', '.join(map(str, m))}}}, {{{body}}}}},", flush=True)


if __name__ == "__main__":
    main()
