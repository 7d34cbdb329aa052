#!/usr/bin/env python3
"""Least-squares spectral calibration of the quadratic filter.

For each moving-average width T, fits the filter weight whose transfer
function best matches the moving average's and prints the ratio to the
closed-form width match 0.5 * (T / 2 pi)^4. The ratio is essentially
constant (~10.28) across widths, which is what hp_lambda_for_window
hard-codes.
"""

import argparse

from trendkit.calibration import calibrate_l2_spectral, hp_lambda_for_window


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--windows", type=int, nargs="+",
                        default=[20, 65, 130, 260, 520])
    args = parser.parse_args()

    print(f"{'T':>6} {'fitted lambda':>16} {'closed form':>16} {'ratio':>8}")
    for T in args.windows:
        fitted = calibrate_l2_spectral(T)
        reference = 0.5 * (T / (2 * 3.141592653589793)) ** 4
        print(f"{T:>6} {fitted:16.4g} {hp_lambda_for_window(T):16.4g} "
              f"{fitted / reference:8.4f}")


if __name__ == "__main__":
    main()
