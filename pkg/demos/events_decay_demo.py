"""Empirical decay suites: decoupling, negative dependence, sigma tails, exchange.

Bounds with unnamed absolute constants become decay checks: the script prints
each estimate chain and whether it decays the way the theory predicts.
"""

import numpy as np

from lsvlab import bump, ensemble, events

SEED = 42


def main():
    rad = ensemble.rademacher()
    gau = ensemble.standard_gaussian()

    print("== decoupling: P(|<u,Y>| <= 0.5 and <w,Y> > t), Rademacher n=64 ==")
    frame = events.orthonormal_frame(64, 2, SEED)
    verdicts = events.decoupling_test(frame[0], frame[1], 0.5, (0.0, 1.0, 2.0, 3.0), rad, 100_000, SEED)
    for v in verdicts:
        print(f"  t={v.details['t']:.0f}: {v.statistic:.5f}  [{v.ci_low:.5f}, {v.ci_high:.5f}]")

    print()
    print("== negative dependence: ratio to eps along k, Rademacher n=400 ==")
    nd_frame = events.orthonormal_frame(400, 17, SEED)
    verdicts = events.negative_dependence_test(nd_frame[0], nd_frame[1:], 0.3, 0.5, rad, 100_000, SEED)
    for v in verdicts:
        print(f"  k={v.details['k']:>2}: ratio {v.details['ratio_to_eps']:.4f}"
              f"  (precondition value {v.details['precondition_value']:.2f})")

    print()
    print("== sigma tails at n=64, Gaussian ==")
    report = events.sigma_tail_tests(gau, 64, (1, 2, 3), (2.0, 3.0, 4.0, 5.0), 20_000, SEED, c_low=0.7)
    for v in report.lower:
        tag = " (underpowered)" if v.details["underpowered"] else ""
        print(f"  P(sigma_(n-{v.details['k']}) < 0.7 k/sqrt(n)) = {v.statistic:.4f}{tag}")
    print(f"  lower tail monotone in k: {report.lower_monotone_k}, upper tail monotone in t: {report.upper_monotone_t}")

    print()
    print("== exchange gap with the bump composite, n=100 ==")
    table = bump.build_table(grid_max=20.0, step=0.1)
    fn = events.BumpTestFunction(table, scale=4.0)
    u = np.full(100, 0.1)
    verdict = events.lindeberg_gap_test([u], rad, 100, 50_000, SEED, fn)
    print(f"  |E F(X) - E F(Z)| = {verdict.statistic:.2e}  vs bound {verdict.bound_value:.2e}"
          f"  (pass: {verdict.passed})")


if __name__ == "__main__":
    main()
