"""Arithmetic-structure measures of unit vectors.

Torus norm (Euclidean distance to the integer lattice), least common
denominator (smallest theta pulling theta*v near the lattice), exact
characteristic functions for the built-in laws, the characteristic-function
decay check, and sup-norm flatness of the smallest singular vectors.

The LCD is computed by a certified grid scan with local refinement rather
than lattice reduction: at desk scale the scan is exact enough, and the grid
log itself is the certificate that no smaller scanned theta qualified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectra

DEFAULT_ALPHA = 1.0
DEFAULT_GAMMA = 0.5

_UNIT_TOL = 1e-12


class UnsupportedLawError(ValueError):
    """No closed-form characteristic function for this law."""


class LcdBudgetError(RuntimeError):
    """The scan exceeded its evaluation budget; carries the partial result."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


def torus_norm(v):
    """sqrt(sum_i min_{z in Z} |v_i - z|^2): distance from v to Z^n.

    Uses fsum so monotone comparisons against the Euclidean norm hold exactly.
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite entries")
    d = np.abs(v - np.round(v))
    return math.sqrt(math.fsum((d * d).tolist()))


def _torus_sq_rows(mat):
    """Row-wise squared torus norm; plain float64 sums for bulk work."""
    d = np.abs(mat - np.round(mat))
    return np.einsum("ij,ij->i", d, d)


@dataclass(frozen=True)
class LcdQuery:
    """Search parameters for the least common denominator of a unit vector."""

    v: np.ndarray
    theta_cap: float
    alpha: float = DEFAULT_ALPHA
    gamma: float = DEFAULT_GAMMA
    grid_step: float = 0.0  # 0 means gamma / 4

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
            raise ValueError("v must be a unit vector")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.theta_cap < 0.0:
            raise ValueError("theta_cap must be nonnegative")
        step = self.grid_step if self.grid_step > 0.0 else self.gamma / 4.0
        if step > self.gamma / 4.0 + 1e-15:
            raise ValueError("grid_step must be at most gamma / 4")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "grid_step", step)


@dataclass(frozen=True)
class LcdResult:
    kind: str  # "found" | "exceeds_cap"
    theta: float | None = None
    certificate_gap: float | None = None
    scanned: int = 0
    empty_scan: bool = False

    @property
    def found(self):
        return self.kind == "found"


def _lcd_margin(q, thetas):
    """dist(theta v, Z^n) - min(gamma ||theta v||_2, sqrt(alpha n)); negative = hit."""
    pts = np.outer(thetas, q.v)
    dist = np.sqrt(_torus_sq_rows(pts))
    cap = math.sqrt(q.alpha * len(q.v))
    threshold = np.minimum(q.gamma * np.abs(thetas) * np.linalg.norm(q.v), cap)
    return dist - threshold


def lcd(q, max_evaluations=50_000_000, chunk=8192):
    """Scan theta in (0, theta_cap] for the defining inequality.

    Returns the smallest grid-bracketed theta that satisfies it, refined by
    local bisection to 1e-9, or ExceedsCap with the worst margin seen.  The
    grid step is at most gamma/4; dist(theta v, Z^n) is 1-Lipschitz in theta,
    so the scan cannot skip a crossing wider than the step.
    """
    step = q.grid_step
    n_steps = int(math.floor(q.theta_cap / step))
    thetas = step * np.arange(1, n_steps + 1)
    if n_steps == 0 or thetas[-1] < q.theta_cap - 1e-15:
        thetas = np.append(thetas, q.theta_cap)
    if q.theta_cap <= 0.0:
        return LcdResult("exceeds_cap", certificate_gap=math.inf, scanned=0, empty_scan=True)
    if len(thetas) * len(q.v) > max_evaluations:
        scanned = int(max_evaluations // len(q.v))
        partial = _scan(q, thetas[:scanned], step)
        if partial.found:
            return partial
        raise LcdBudgetError(
            f"scan budget exhausted after {scanned} of {len(thetas)} grid points",
            partial,
        )
    return _scan(q, thetas, step, chunk)


def _scan(q, thetas, step, chunk=8192):
    worst = math.inf
    for start in range(0, len(thetas), chunk):
        block = thetas[start : start + chunk]
        margin = _lcd_margin(q, block)
        hits = np.nonzero(margin < 0.0)[0]
        if hits.size:
            j = start + int(hits[0])
            theta_hit = thetas[j]
            theta_prev = thetas[j - 1] if j > 0 else max(theta_hit - step, 0.0)
            theta = _refine(q, theta_prev, theta_hit)
            return LcdResult("found", theta=theta, scanned=j + 1)
        worst = min(worst, float(margin.min()))
    return LcdResult("exceeds_cap", certificate_gap=worst, scanned=len(thetas))


def _refine(q, lo, hi, tol=1e-9):
    """Bisect toward the smallest satisfying theta in (lo, hi].

    Keeps the invariant that hi satisfies the inequality and lo does not, so
    the returned value satisfies it and sits within tol of the boundary.
    """
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _lcd_margin(q, np.array([mid]))[0] < 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def _char_factors(dist, u):
    if dist.kind == "rademacher":
        return np.abs(np.cos(u))
    if dist.kind == "gaussian":
        return np.exp(-0.5 * np.square(u))
    if dist.kind == "uniform":
        return np.abs(np.sinc(math.sqrt(3.0) * u / math.pi))
    if dist.kind == "discrete":
        support = np.asarray(dist.support)
        probs = np.asarray(dist.probs)
        return np.abs(np.cos(np.outer(u, support)) @ probs)
    raise UnsupportedLawError(f"no closed-form characteristic function for {dist.kind!r}")


def char_fn_exact(dist, u):
    """|E exp(i <u, Y>)| = prod_j |phi_xi(u_j)| for product measures."""
    u = np.asarray(u, dtype=np.float64)
    return float(np.prod(_char_factors(dist, u)))


def char_fn_bound_check(dist, u, c0, r_points=1000, slack=1e-6):
    """Check the decay estimate |E e^{i<u,Y>}| <= exp(-c0 inf_r ||r u||_T^2).

    The infimum over r in [1, 1/c0] is evaluated on a geometric grid; the
    integrand is Lipschitz on that compact interval so 1000 points plus the
    stated slack are enough.
    """
    if not 0.0 < c0 <= 1.0:
        raise ValueError("c0 must lie in (0, 1]")
    u = np.asarray(u, dtype=np.float64)
    rs = np.geomspace(1.0, 1.0 / c0, r_points)
    inf_torus_sq = float(_torus_sq_rows(np.outer(rs, u)).min())
    return char_fn_exact(dist, u) <= math.exp(-c0 * inf_torus_sq) + slack


def flatness(Mstar, k):
    """Sup norms of the kernel vector and the k smallest singular vectors.

    Returns k+1 values: (||v||_inf, ||v_{n-1}||_inf, ..., ||v_{n-k}||_inf).
    Raises DegenerateKernelError when the kernel is not unique.
    """
    a = spectra.as_array(Mstar)
    rows, cols = a.shape
    if rows != cols - 1:
        raise spectra.SpectraInputError(f"expected (n-1) x n input, got {rows} x {cols}")
    if not 1 <= k <= rows:
        raise ValueError(f"k={k} out of range [1, {rows}]")
    summary = spectra.smallest_singular_pairs(a, k)
    if summary.sigma[-1] <= spectra.RANK_DEFICIENCY_REL * np.linalg.norm(a):
        raise spectra.DegenerateKernelError("rank-deficient M*; flatness skipped")
    norms = [float(np.abs(summary.kernel_vector).max())]
    norms.extend(float(np.abs(row).max()) for row in summary.smallest_vectors)
    return np.array(norms)
