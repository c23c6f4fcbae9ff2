#!/usr/bin/env python3
"""Print the first-iteration predictor across an SNR range (CSV to stdout)."""

import argparse

from clup.model import snr_db_to_sigma
from clup.theory import solve_first_iteration

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha", type=float, default=0.8)
    parser.add_argument("--snr-start", type=float, default=10.0)
    parser.add_argument("--snr-stop", type=float, default=16.0)
    parser.add_argument("--snr-step", type=float, default=0.5)
    args = parser.parse_args()

    print("snr_db,gamma_hat,c1z_hat,xi,p_err1,d1_pred,d2_pred")
    snr = args.snr_start
    while snr <= args.snr_stop + 1e-9:
        t = solve_first_iteration(args.alpha, snr_db_to_sigma(snr))
        print(
            f"{snr:g},{t.gamma_hat:.6f},{t.c1z_hat:.6f},{t.xi:.6f},"
            f"{t.p_err1:.6g},{t.d1_pred:.6f},{t.d2_pred:.6f}"
        )
        snr += args.snr_step
