"""Rank-one secular update: recover the spectrum of A from its row-deleted A*.

Appending a row Y to A* turns (A*)^T A* into (A*)^T A* + Y^T Y, so the
squared singular values of A are the eigenvalues of a diagonal-plus-rank-one
matrix.  Working in the squared variable lam = x^2, they are the roots of

    f(lam) = 1 + sum_i w_i / (d_i - lam),

where d_i runs over the squared singular values of A* together with the pole
d = 0 for the kernel direction, and w_i is the squared inner product of Y
with the corresponding singular direction.  f is strictly increasing between
consecutive poles, so each root is isolated by a bracket and found by
bisection plus a Newton polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import corrector, spectra

# Inner products at or below DEFLATION_REL * ||Y||_2 are treated as absent;
# the corresponding singular value passes through unchanged.  Standard
# divide-and-conquer practice: avoids spurious pole-root collisions.
DEFLATION_REL = 1e-13

# Poles closer than this relative gap are merged before root isolation.
_MERGE_REL = 32 * np.finfo(np.float64).eps

_BIG = 1e300


@dataclass(frozen=True)
class SecularProblem:
    """Data defining the update equation.

    ``sigma_star`` holds the n-1 singular values of A* in ascending order,
    ``inner`` the aligned inner products of the new row with the singular
    directions, and ``kernel_inner`` the inner product with the kernel
    direction (whose singular value is 0).
    """

    sigma_star: np.ndarray
    inner: np.ndarray
    kernel_inner: float

    def __post_init__(self):
        ss = np.asarray(self.sigma_star, dtype=np.float64)
        iv = np.asarray(self.inner, dtype=np.float64)
        if ss.shape != iv.shape or ss.ndim != 1:
            raise ValueError("sigma_star and inner must be 1-D of equal length")
        if np.any(ss < 0):
            raise ValueError("sigma_star must be nonnegative")
        if np.any(np.diff(ss) < 0):
            raise ValueError("sigma_star must be ascending")
        if not (np.all(np.isfinite(ss)) and np.all(np.isfinite(iv)) and math.isfinite(self.kernel_inner)):
            raise ValueError("non-finite problem data")
        object.__setattr__(self, "sigma_star", ss)
        object.__setattr__(self, "inner", iv)

    @property
    def y_norm(self):
        # The singular directions of A* plus the kernel direction form an
        # orthonormal basis, so ||Y||^2 is recoverable from the inner products.
        return math.sqrt(math.fsum([x * x for x in self.inner] + [self.kernel_inner**2]))


@dataclass(frozen=True)
class SecularLeast:
    """Least singular value of the updated matrix, with degeneracy flags."""

    value: float
    deflated: bool = False   # kernel_inner vanished: least singular value is 0
    boundary: bool = False   # root collided with a deflated pole; value is that pole


@dataclass(frozen=True)
class ImplicationReport:
    """Outcome of checking both directions of the update implications."""

    premise1: bool = False
    antecedent: bool = False
    forward_ok: bool = False
    converse_ok: bool = False
    skipped: bool = False
    sigma_n: float = math.nan
    sigma_n1_star: float = math.nan
    kernel_abs_inner: float = math.nan
    chi_tilde: float = math.nan

    @property
    def both_ok(self):
        return self.forward_ok and self.converse_ok


def problem_from_rows(Astar, Y):
    """Build a SecularProblem from an (n-1) x n matrix and its new row."""
    a = spectra.as_array(Astar)
    rows, cols = a.shape
    if rows != cols - 1:
        raise spectra.SpectraInputError(f"expected (n-1) x n input, got {rows} x {cols}")
    y = np.asarray(Y, dtype=np.float64)
    summary = spectra.smallest_singular_pairs(a, rows)
    sigma_asc = summary.sigma_ascending
    inner = summary.smallest_vectors @ y
    kernel_inner = float(summary.kernel_vector @ y)
    return SecularProblem(sigma_asc, inner, kernel_inner)


def _neumaier_secular(d, w, lam):
    """f(lam) = 1 + sum w_i/(d_i - lam), compensated over terms.

    ``lam`` is an array; the term loop is sequential so a Neumaier correction
    can run, while each step stays vectorised across the evaluation points.
    Terms are clipped to +-1e300: near-pole evaluations only need the sign.
    """
    s = np.ones_like(lam)
    c = np.zeros_like(lam)
    for di, wi in zip(d, w):
        t = np.clip(wi / (di - lam), -_BIG, _BIG)
        new = s + t
        c += np.where(np.abs(s) >= np.abs(t), (s - new) + t, (t - new) + s)
        s = new
    return s + c


def _secular_derivative(d, w, lam):
    return np.clip(
        sum(wi / np.square(di - lam) for di, wi in zip(d, w)), 0.0, _BIG
    )


def _interval_roots(d, w, bisect_iters=40, newton_steps=2):
    """All roots of 1 + sum w_i/(d_i - lam) for active poles d (ascending).

    One root lives strictly between consecutive poles and one above the top
    pole (bounded by d_max + sum w).  Returns the roots ascending.
    """
    d = np.asarray(d, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    m = len(d)
    if m == 0:
        return np.empty(0)
    total_w = float(np.sum(w))
    lo = np.nextafter(d, np.inf)
    hi = np.empty(m)
    if m > 1:
        hi[:-1] = np.nextafter(d[1:], -np.inf)
    hi[-1] = np.nextafter(d[-1] + max(total_w, np.finfo(float).tiny), np.inf)
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        below = _neumaier_secular(d, w, mid) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    lam = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        fval = _neumaier_secular(d, w, lam)
        fprime = _secular_derivative(d, w, lam)
        with np.errstate(invalid="ignore", divide="ignore"):
            step = np.where(fprime > 0, fval / fprime, 0.0)
        lam = np.clip(lam - step, lo, hi)
    return lam


def _assemble_poles(p):
    """Deflate and merge, returning (active d, active w, passthrough sigmas)."""
    thr = DEFLATION_REL * p.y_norm
    d_all = np.concatenate(([0.0], np.square(p.sigma_star)))
    z_all = np.concatenate(([p.kernel_inner], p.inner))
    s_all = np.concatenate(([0.0], p.sigma_star))
    active = np.abs(z_all) > thr
    passthrough = list(s_all[~active])
    d_act = d_all[active]
    w_act = np.square(z_all[active])
    s_act = s_all[active]
    # Merge (numerically) repeated poles: the secular function only has poles
    # at distinct values; extras pass straight through to the output.
    d_merged, w_merged = [], []
    for di, wi, si in zip(d_act, w_act, s_act):
        if d_merged and di - d_merged[-1] <= _MERGE_REL * max(di, 1e-300):
            w_merged[-1] += wi
            passthrough.append(si)
        else:
            d_merged.append(di)
            w_merged.append(wi)
    return np.array(d_merged), np.array(w_merged), passthrough


def secular_spectrum(p):
    """The n singular values of the updated matrix, descending.

    Agrees with a direct SVD of the stacked matrix; deflated values are exact
    copies of the corresponding sigma_star entries.
    """
    d_act, w_act, passthrough = _assemble_poles(p)
    roots = _interval_roots(d_act, w_act)
    values = np.concatenate((np.sqrt(np.maximum(roots, 0.0)), passthrough))
    return np.sort(values)[::-1]


def secular_least(p, eps_hint=None):
    """Least singular value of the updated matrix via the lowest secular root.

    Solves 1 + sum_i <u_i,Y>^2/(sigma_i^2 - x^2) = <u,Y>^2/x^2 on
    (0, sigma_{n-1}); both sides are monotone there so the root is unique.
    Degenerate configurations are resolved by deflation and flagged.
    """
    thr = DEFLATION_REL * p.y_norm
    if abs(p.kernel_inner) <= thr:
        return SecularLeast(0.0, deflated=True)
    if p.sigma_star.size and p.sigma_star[0] <= 0.0:
        raise ValueError("secular_least requires sigma_{n-1} > 0")
    d_act, w_act, passthrough = _assemble_poles(p)
    # kernel term survived deflation, so d_act[0] == 0 with w_act[0] > 0
    deflated_positive = [s for s in passthrough if s > 0.0]
    if len(d_act) == 1:
        # Every non-kernel direction deflated: the lowest root is exactly the
        # kernel weight, but a deflated pole below it wins.
        candidate = math.sqrt(w_act[0])
        if deflated_positive and min(deflated_positive) < candidate:
            return SecularLeast(float(min(deflated_positive)), boundary=True)
        return SecularLeast(candidate)
    lo = np.float64(np.finfo(np.float64).tiny)
    hi = np.nextafter(d_act[1], -np.inf)
    if eps_hint is not None and 0.0 < eps_hint**2 < hi:
        # Use the hint to pre-shrink one side of the bracket when possible.
        guess = np.float64(eps_hint**2)
        if _neumaier_secular(d_act, w_act, np.array([guess]))[0] < 0.0:
            lo = guess
        else:
            hi = guess
    lo = np.array([lo])
    hi = np.array([hi])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = _neumaier_secular(d_act, w_act, mid) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    lam = 0.5 * (lo + hi)
    for _ in range(3):
        fval = _neumaier_secular(d_act, w_act, lam)
        fprime = _secular_derivative(d_act, w_act, lam)
        with np.errstate(invalid="ignore", divide="ignore"):
            step = np.where(fprime > 0, fval / fprime, 0.0)
        lam = np.clip(lam - step, lo, hi)
    value = math.sqrt(max(float(lam[0]), 0.0))
    if deflated_positive and min(deflated_positive) < value:
        return SecularLeast(float(min(deflated_positive)), boundary=True)
    return SecularLeast(value)


def spectrum_relative_error(candidate, reference, frobenius):
    """Worst elementwise relative disagreement between two spectra.

    Entries at or below the rank-deficiency scale (RANK_DEFICIENCY_REL times
    the Frobenius norm) are a singular atom: no floating-point pair of
    algorithms can agree there in relative terms, so both sides must simply
    classify them as zero; +inf is returned if they disagree on that.  All
    other entries compare as |a - b| / b.
    """
    candidate = np.asarray(candidate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    floor = spectra.RANK_DEFICIENCY_REL * frobenius
    zero_class = reference <= floor
    if np.any(candidate[zero_class] > floor):
        return math.inf
    live = ~zero_class
    if not np.any(live):
        return 0.0
    return float(np.max(np.abs(candidate[live] - reference[live]) / reference[live]))


def verify_update_implications(A, eps):
    """Check both implication directions of the update bound on one matrix.

    Splits A into its first n-1 rows and last row, computes every quantity
    with the spectral oracle, and reports whether

      sigma_{n-1}(A*) >= eps^(3/4) n^(-1/2)  and  sigma_n(A) <= eps n^(-1/2)
          imply  |<u,Y>| <= (1 + eps^(1/4)) eps n^(-1/2) chi_tilde(Y)

    and, unconditionally, sigma_n(A) > eps n^(-1/2) implies
    |<u,Y>| > eps n^(-1/2) chi_tilde(Y).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    a = spectra.as_array(A)
    n, cols = a.shape
    if n != cols:
        raise spectra.SpectraInputError("expected a square matrix")
    astar = a[:-1]
    y = a[-1]
    try:
        u = spectra.kernel_vector(astar)
    except spectra.DegenerateKernelError:
        return ImplicationReport(skipped=True)
    ctx = corrector.correction_context(astar)
    chi_tilde = corrector.chi_full(ctx, y)
    sigma_n = float(spectra.singular_values(a)[-1])
    sigma_n1_star = float(ctx.spectral.sigma_ascending[0])
    ku = abs(float(u @ y))
    scale = eps * n**-0.5
    premise1 = sigma_n1_star >= eps**0.75 * n**-0.5
    antecedent = sigma_n <= scale
    forward_ok = (not (premise1 and antecedent)) or (ku <= (1.0 + eps**0.25) * scale * chi_tilde)
    converse_ok = antecedent or (ku > scale * chi_tilde)
    return ImplicationReport(
        premise1=premise1,
        antecedent=antecedent,
        forward_ok=forward_ok,
        converse_ok=converse_ok,
        sigma_n=sigma_n,
        sigma_n1_star=sigma_n1_star,
        kernel_abs_inner=ku,
        chi_tilde=chi_tilde,
    )
