"""Entry distributions and seeded, reproducible sampling of random matrices.

Every law shipped here has mean 0 and variance 1; construction rejects
anything else.  Sampling is organised around deterministic substreams: the
generator used for a trial is a pure function of ``(seed, trial, role)``, so
parallel and serial execution produce bit-identical output regardless of
scheduling.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

SQRT3 = math.sqrt(3.0)

# Guard against accidentally materialising a matrix that will not fit in RAM.
MAX_SAMPLE_ENTRIES = 1 << 27

_VALIDATION_TOL = 1e-12


class DistributionError(ValueError):
    """The requested entry law violates the mean-0 / variance-1 contract."""


class SizingError(ValueError):
    """rows * cols exceeds the configured memory budget."""


@dataclass(frozen=True)
class EntryDistribution:
    """Specification of the iid entry law.

    ``kind`` is one of ``rademacher``, ``gaussian``, ``uniform`` (symmetric on
    [-sqrt(3), sqrt(3)]) or ``discrete`` (symmetric finite support).  ``mean``
    and ``variance`` are always 0 and 1 after validation; ``psi2_estimate`` is
    the finite-p estimate of the subgaussian norm computed at construction.
    """

    kind: str
    support: tuple = ()
    probs: tuple = ()
    mean: float = field(init=False, default=0.0)
    variance: float = field(init=False, default=1.0)
    psi2_estimate: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.kind not in ("rademacher", "gaussian", "uniform", "discrete"):
            raise DistributionError(f"unknown distribution kind: {self.kind!r}")
        if self.kind == "discrete":
            self._validate_discrete()
        elif self.support or self.probs:
            raise DistributionError("support/probs are only valid for kind='discrete'")
        object.__setattr__(self, "psi2_estimate", psi2_estimate(self, p_max=16))

    def _validate_discrete(self):
        support = tuple(float(x) for x in self.support)
        probs = tuple(float(p) for p in self.probs)
        if len(support) != len(probs) or not support:
            raise DistributionError("support and probs must be equal-length and nonempty")
        if len(set(support)) != len(support):
            raise DistributionError("support values must be distinct")
        if any(not math.isfinite(x) for x in support):
            raise DistributionError("support values must be finite")
        if any(p < 0 for p in probs):
            raise DistributionError("probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > _VALIDATION_TOL:
            raise DistributionError("probabilities must sum to 1")
        weight = dict(zip(support, probs))
        for x, p in weight.items():
            if -x not in weight or weight[-x] != p:
                raise DistributionError("discrete law must be symmetric about 0")
        mean = math.fsum(p * x for x, p in zip(support, probs))
        var = math.fsum(p * x * x for x, p in zip(support, probs))
        if abs(mean) > _VALIDATION_TOL:
            raise DistributionError(f"law has mean {mean}, must be 0")
        if abs(var - 1.0) > _VALIDATION_TOL:
            raise DistributionError(f"law has variance {var}, must be 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    def spec(self):
        """JSON-style document used in experiment config files."""
        doc = {"kind": self.kind}
        if self.kind == "discrete":
            doc["support"] = list(self.support)
            doc["probs"] = list(self.probs)
        return doc


def rademacher():
    """Uniform on {-1, +1}."""
    return EntryDistribution("rademacher")


def standard_gaussian():
    return EntryDistribution("gaussian")


def uniform_symmetric():
    """Uniform on [-sqrt(3), sqrt(3)] (variance 1)."""
    return EntryDistribution("uniform")


def discrete_symmetric(support, probs):
    return EntryDistribution("discrete", tuple(support), tuple(probs))


def from_spec(doc):
    """Build a distribution from the config-file document form."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DistributionError("distribution spec must be a dict with a 'kind' field")
    kind = doc["kind"]
    if kind == "discrete":
        return discrete_symmetric(doc.get("support", ()), doc.get("probs", ()))
    return EntryDistribution(kind)


def abs_moment(dist, p):
    """E|xi|^p in closed form."""
    if dist.kind == "rademacher":
        return 1.0
    if dist.kind == "gaussian":
        return 2.0 ** (p / 2.0) * math.gamma((p + 1) / 2.0) / math.sqrt(math.pi)
    if dist.kind == "uniform":
        return SQRT3**p / (p + 1)
    return math.fsum(q * abs(x) ** p for x, q in zip(dist.support, dist.probs))


def psi2_estimate(dist, p_max=16):
    """max over integer p in [1, p_max] of p^(-1/2) * (E|xi|^p)^(1/p).

    Moments are evaluated in closed form, so the truncated supremum is exact
    up to rounding.
    """
    if p_max < 2:
        raise ValueError("p_max must be at least 2")
    best = 0.0
    for p in range(1, p_max + 1):
        best = max(best, p ** (-0.5) * abs_moment(dist, p) ** (1.0 / p))
    return best


@dataclass(frozen=True)
class MatrixSample:
    """A sampled dense matrix together with its provenance.

    Resampling with the same (seed, distribution, rows, cols, trial)
    reproduces ``entries`` bit for bit.
    """

    rows: int
    cols: int
    entries: np.ndarray
    seed: int
    distribution: EntryDistribution
    trial: int = 0


def _role_key(role):
    digest = hashlib.blake2b(role.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def substream(seed, trial, role="main"):
    """Deterministic per-trial generator, a pure function of its arguments.

    Worker processes calling this with the same arguments get identical
    streams, which is what makes every experiment independent of the worker
    count.
    """
    ss = np.random.SeedSequence((int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial), _role_key(role)))
    return np.random.Generator(np.random.PCG64(ss))


def sample_array(dist, stream, shape):
    """Draw an array of iid variates from ``dist``, advancing ``stream``."""
    if dist.kind == "rademacher":
        return stream.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0
    if dist.kind == "gaussian":
        return stream.standard_normal(shape)
    if dist.kind == "uniform":
        return stream.uniform(-SQRT3, SQRT3, size=shape)
    support = np.asarray(dist.support, dtype=np.float64)
    idx = stream.choice(len(support), size=shape, p=np.asarray(dist.probs))
    return support[idx]


def sample_entry(dist, stream):
    """One variate from the law; advances the stream deterministically."""
    return float(sample_array(dist, stream, ()))


def sample_matrix(dist, rows, cols, seed, trial=0, role=None):
    """Sample a rows x cols matrix with iid entries from ``dist``.

    The substream is derived from (seed, trial, role) only, so sampling trial
    k never depends on whether trials 0..k-1 were sampled first.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be at least 1")
    if rows * cols > MAX_SAMPLE_ENTRIES:
        raise SizingError(f"{rows}x{cols} exceeds the {MAX_SAMPLE_ENTRIES}-entry budget")
    if role is None:
        role = f"matrix/{dist.kind}"
    stream = substream(seed, trial, role)
    entries = sample_array(dist, stream, (rows, cols))
    return MatrixSample(rows, cols, entries, int(seed), dist, int(trial))


def sample_vector(dist, n, seed, trial=0, role="vector"):
    """Sample a length-n iid vector on its own substream."""
    stream = substream(seed, trial, f"{role}/{dist.kind}")
    return sample_array(dist, stream, (n,))


BUILTIN_DISTRIBUTIONS = {
    "rademacher": rademacher,
    "gaussian": standard_gaussian,
    "uniform": uniform_symmetric,
}
