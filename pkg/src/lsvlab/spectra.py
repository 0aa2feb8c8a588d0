"""Singular values, smallest singular vectors, and kernel vectors.

This module is the spectral oracle for everything else in the library, so the
accuracy contract matters: singular values come from LAPACK's bidiagonal
reduction + implicit-shift QR path (via numpy), which computes even the tiny
singular values of a dense matrix to high relative accuracy.  Vectors get a
deterministic sign convention so tests can compare them directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import MatrixSample

# A matrix is treated as rank deficient when sigma_min <= this times ||A||_F.
# Continuous ensembles are almost surely full rank; discrete ensembles can be
# genuinely singular and the caller must see that event, not garbage vectors.
RANK_DEFICIENCY_REL = 1e-10


class SpectraInputError(ValueError):
    """Non-finite entries or malformed input matrix."""


class DegenerateKernelError(RuntimeError):
    """The (n-1) x n matrix is rank deficient, so its kernel is not unique."""


def as_array(A):
    """Accept a MatrixSample or anything array-like; validate finiteness."""
    if isinstance(A, MatrixSample):
        a = A.entries
    else:
        a = np.asarray(A, dtype=np.float64)
    if a.ndim != 2:
        raise SpectraInputError("expected a 2-D matrix")
    if a.size == 0:
        raise SpectraInputError("matrix must have at least one row and column")
    if not np.all(np.isfinite(a)):
        raise SpectraInputError("matrix contains non-finite entries")
    return a


def fix_sign(v, tol=1e-14):
    """Flip v so its first coordinate of meaningful size is positive."""
    scale = np.linalg.norm(v)
    if scale == 0.0:
        return v
    idx = np.nonzero(np.abs(v) > tol * scale)[0]
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


@dataclass(frozen=True)
class SpectralSummary:
    """Sorted singular values plus the smallest right singular vectors.

    ``sigma`` is descending.  ``smallest_vectors`` has one row per vector,
    ordered by ascending singular value (row 0 belongs to the smallest sigma).
    ``kernel_vector`` is present iff rows < cols.
    """

    sigma: np.ndarray
    smallest_vectors: np.ndarray
    kernel_vector: np.ndarray | None
    source_dims: tuple

    @property
    def sigma_ascending(self):
        return self.sigma[::-1]


def singular_values(A):
    """All singular values of A, descending."""
    a = as_array(A)
    return np.linalg.svd(a, compute_uv=False)


def smallest_singular_pairs(A, k):
    """SpectralSummary with the k smallest right singular pairs of A.

    Ties are resolved by whatever orthonormal basis of the invariant subspace
    the factorization produces; callers must not rely on a particular choice.
    """
    a = as_array(A)
    rows, cols = a.shape
    n_sv = min(rows, cols)
    if not 1 <= k <= n_sv:
        raise ValueError(f"k={k} out of range [1, {n_sv}]")
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    vectors = np.array([fix_sign(vt[n_sv - 1 - i]) for i in range(k)])
    kernel = None
    if rows < cols:
        kernel = fix_sign(vt[cols - 1])
    return SpectralSummary(s, vectors, kernel, (rows, cols))


def kernel_vector(Astar):
    """Unit kernel vector of a full-row-rank (n-1) x n matrix.

    Raises DegenerateKernelError when sigma_{n-1} falls under the
    rank-deficiency threshold; the caller decides whether to resample.
    """
    a = as_array(Astar)
    rows, cols = a.shape
    if rows != cols - 1:
        raise SpectraInputError(f"expected (n-1) x n input, got {rows} x {cols}")
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    fro = np.linalg.norm(a)
    if rows > 0 and s[-1] <= RANK_DEFICIENCY_REL * fro:
        raise DegenerateKernelError(
            f"sigma_min={s[-1]:.3e} <= {RANK_DEFICIENCY_REL} * ||A||_F; kernel not unique"
        )
    return fix_sign(vt[cols - 1])


def is_rank_deficient(A):
    """Rank-deficiency flag used for the singular-atom count at eps = 0."""
    a = as_array(A)
    s = np.linalg.svd(a, compute_uv=False)
    return bool(s[-1] <= RANK_DEFICIENCY_REL * np.linalg.norm(a))
