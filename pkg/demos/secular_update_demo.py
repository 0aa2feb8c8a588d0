"""The rank-one secular update, from a worked 2x2 example to a random oracle.

Appending a row Y to A* moves the squared singular values to the roots of
1 + sum <u_i,Y>^2/(sigma_i^2 - lam) = 0.  This script walks through the
hand-solvable [[1,0],[1,1]] case, a deflation case, the interlacing picture,
and finishes with a random comparison against the direct SVD.
"""

import numpy as np

from lsvlab import ensemble, secular, spectra


def main():
    print("== stacked [[1,0],[1,1]]: A* = [[1,0]], Y = (1,1) ==")
    p = secular.SecularProblem(np.array([1.0]), np.array([1.0]), 1.0)
    print("secular spectrum :", secular.secular_spectrum(p))
    print("direct SVD       :", spectra.singular_values([[1.0, 0.0], [1.0, 1.0]]))
    print("least root       :", secular.secular_least(p))

    print()
    print("== deflation: Y = (0,2) is orthogonal to the singular direction ==")
    p = secular.SecularProblem(np.array([1.0]), np.array([0.0]), 2.0)
    print("secular spectrum :", secular.secular_spectrum(p), "(stacked matrix is diag(1,2))")
    print("least root       :", secular.secular_least(p), "<- boundary flag: root sat on the pole")

    print()
    print("== interlacing: lam roots separated by the squared sigma* poles ==")
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 6))
    p = secular.problem_from_rows(a[:-1], a[-1])
    lam = np.sort(np.square(secular.secular_spectrum(p)))
    poles = np.sort(np.square(p.sigma_star))
    for j, pole in enumerate(poles):
        print(f"  lam_{j + 1} = {lam[j]:.4f}  <=  pole {pole:.4f}  <=  lam_{j + 2} = {lam[j + 1]:.4f}")

    print()
    print("== oracle: 200 random stacked matrices per law, n = 30 ==")
    for dist in (ensemble.standard_gaussian(), ensemble.rademacher()):
        worst = 0.0
        for trial in range(200):
            m = ensemble.sample_matrix(dist, 30, 30, 11, trial, role=f"demo/{dist.kind}")
            try:
                prob = secular.problem_from_rows(m.entries[:-1], m.entries[-1])
            except spectra.DegenerateKernelError:
                continue
            worst = max(
                worst,
                secular.spectrum_relative_error(
                    secular.secular_spectrum(prob),
                    spectra.singular_values(m.entries),
                    float(np.linalg.norm(m.entries)),
                ),
            )
        print(f"  {dist.kind:<10} worst relative error vs SVD: {worst:.2e}")

    print()
    print("== both update implications on 500 Gaussian matrices, n = 40 ==")
    ok = 0
    total = 0
    for trial in range(500):
        m = ensemble.sample_matrix(ensemble.standard_gaussian(), 40, 40, 12, trial)
        rep = secular.verify_update_implications(m.entries, 0.3)
        if not rep.skipped:
            total += 1
            ok += rep.both_ok
    print(f"  forward and converse hold in {ok}/{total} trials")


if __name__ == "__main__":
    main()
