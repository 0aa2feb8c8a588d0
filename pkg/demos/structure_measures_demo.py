"""Arithmetic structure of unit vectors: torus norm, LCD, characteristic decay.

A structured direction (all ones) hits the integer lattice at theta=sqrt(n)
and its LCD scan finds it early; the golden-ratio direction resists until the
Dirichlet regime.  Characteristic functions of lattice laws decay per the
torus-norm bound checked at the end.
"""

import math

import numpy as np

from lsvlab import ensemble, structure


def main():
    print("== torus norms ==")
    for v in ([0.5, 1.2], [3.0, -2.0, 0.0], [0.999]):
        print(f"  ||{v}||_T = {structure.torus_norm(v):.6f}")

    print()
    print("== LCD: structured vs badly approximable ==")
    n = 16
    ones = np.full(n, n**-0.5)
    result = structure.lcd(structure.LcdQuery(ones, theta_cap=10.0))
    print(f"  all-ones, n={n}: found theta = {result.theta:.6f}"
          f" (lattice hit exists at sqrt(n) = {math.sqrt(n)})")
    phi = (1 + math.sqrt(5)) / 2
    golden = np.array([1.0, phi])
    golden /= np.linalg.norm(golden)
    tight = structure.lcd(structure.LcdQuery(golden, theta_cap=2.0, gamma=0.1))
    print(f"  golden ratio, cap=2, gamma=0.1: {tight.kind}, worst margin {tight.certificate_gap:.4f}")
    wide = structure.lcd(structure.LcdQuery(golden, theta_cap=50.0, gamma=0.1))
    print(f"  golden ratio, cap=50: {wide.kind} at theta = {wide.theta:.4f}"
          " (every 2-vector is eventually caught by the Dirichlet regime)")

    print()
    print("== kernel vectors of random matrices are flat ==")
    m = ensemble.sample_matrix(ensemble.standard_gaussian(), 199, 200, 5, 0)
    vals = structure.flatness(m.entries, 3)
    print(f"  sup norms (kernel + 3 smallest): {np.round(vals, 4)}  vs n^(-1/4) = {200 ** -0.25:.4f}")

    print()
    print("== characteristic functions and the decay bound ==")
    rad = ensemble.rademacher()
    for u in ([0.05, -0.08, 0.02], [math.pi / 2, 0.3]):
        val = structure.char_fn_exact(rad, u)
        ok = structure.char_fn_bound_check(rad, u, 0.1)
        print(f"  |E e^(i<u,Y>)| = {val:.4e} for u={u}; torus-decay bound holds: {ok}")


if __name__ == "__main__":
    main()
