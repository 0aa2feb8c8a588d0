"""Correction factors chi / chi_tilde and the (delta_n, ell) schedule.

chi_tilde^2(Y) = 1 + sum over all n-1 singular directions of
<v_i,Y>^2 / sigma_i^2; chi^2(Y) keeps only the ell smallest directions.
Sums run through math.fsum so chi <= chi_tilde holds exactly, not just up to
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectra

DEFAULT_C_SCHED = 1.0 / 16.0


class DegenerateSpectrumError(RuntimeError):
    """A zero singular value makes the correction factor undefined."""


def schedule(n, c_sched=DEFAULT_C_SCHED):
    """(delta_n, ell) used by the truncation: (ln n)^(-c) and floor(sqrt(ln n)).

    Natural log, floored, clamped to at least 1.  Any fixed convention keeps
    the asymptotics; this one is recorded so results are comparable.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    log_n = math.log(n)
    delta_n = log_n ** (-c_sched)
    ell = max(1, math.floor(math.sqrt(log_n)))
    return delta_n, ell


@dataclass(frozen=True)
class CorrectionContext:
    """Spectral data of M* plus the truncation parameters.

    ``spectral`` carries all n-1 singular values and all right singular
    vectors (ascending by singular value), so both the full and the truncated
    factor are computable from one context.
    """

    spectral: spectra.SpectralSummary
    ell: int
    delta_n: float
    n: int
    c_sched: float = DEFAULT_C_SCHED

    def __post_init__(self):
        if not 1 <= self.ell <= self.n - 1:
            raise ValueError(f"ell={self.ell} out of range [1, {self.n - 1}]")


def correction_context(Mstar, ell=None, c_sched=DEFAULT_C_SCHED):
    """Build a CorrectionContext from the (n-1) x n matrix M*."""
    a = spectra.as_array(Mstar)
    rows, cols = a.shape
    if rows != cols - 1:
        raise spectra.SpectraInputError(f"expected (n-1) x n input, got {rows} x {cols}")
    n = cols
    delta_n, ell_default = schedule(max(n, 3), c_sched)
    if ell is None:
        ell = min(ell_default, n - 1)
    summary = spectra.smallest_singular_pairs(a, rows)
    return CorrectionContext(summary, ell, delta_n, n, c_sched)


def _weighted_terms(ctx, Y):
    y = np.asarray(Y, dtype=np.float64)
    if y.shape != (ctx.n,):
        raise ValueError(f"Y must have length {ctx.n}")
    sigma_asc = ctx.spectral.sigma_ascending
    if np.any(sigma_asc <= 0.0):
        raise DegenerateSpectrumError("zero singular value in M*; resample")
    proj = ctx.spectral.smallest_vectors @ y
    return np.square(proj / sigma_asc)


def chi_full(ctx, Y):
    """Full correction factor chi_tilde(Y) >= 1."""
    terms = _weighted_terms(ctx, Y)
    return math.sqrt(1.0 + math.fsum(terms.tolist()))


def chi_trunc(ctx, Y):
    """Truncated factor chi(Y) >= 0 from the ell smallest singular pairs."""
    terms = _weighted_terms(ctx, Y)
    return math.sqrt(math.fsum(terms[: ctx.ell].tolist()))


def truncation_gap(ctx, Y):
    """Relative gap |chi_tilde^2 / chi^2 - 1|, +inf when chi vanishes.

    Diagnostic only: the harness aggregates its distribution conditioned on
    the regularity event, there is no per-call pass/fail.
    """
    terms = _weighted_terms(ctx, Y)
    chi2 = math.fsum(terms[: ctx.ell].tolist())
    if chi2 == 0.0:
        return math.inf
    chi_tilde2 = 1.0 + math.fsum(terms.tolist())
    return abs(chi_tilde2 / chi2 - 1.0)
