"""Top-level Monte Carlo experiments and their file plumbing.

The core experiment estimates P(sigma_n(M) <= eps * n^(-1/2)) on a grid of
eps values, with nested counting on one shared sample, Wilson 99% intervals,
and deterministic per-trial substreams so the result is byte-identical for
any worker count.  The module also carries the Gaussian and additive
reference curves, the universality comparison, and the run-experiment entry
point that writes the frozen-schema CSVs plus a JSON manifest.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import ensemble, events, spectra
from .stats import wilson_interval

__version__ = "0.1.0"

# The exponentially small eps regime is out of empirical reach at desk scale;
# refusing is more honest than emitting vacuous zero counts.
MIN_EPS = 1e-8

TAIL_CSV_HEADER = "eps,count,trials,estimate,ci_low,ci_high"

_PROFILE_TRIALS_DEFAULT = 32


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offender."""

    def __init__(self, message, field_name):
        super().__init__(message)
        self.field = field_name


def fmt17(x):
    """Floats serialised with 17 significant digits for bit-exact round trips."""
    return format(float(x), ".17g")


def dyadic_grid(eps_min, eps_max):
    """{eps_min * 2^j} intersected with (0, eps_max], ascending, inclusive top."""
    if eps_min <= 0 or eps_max < eps_min:
        raise ConfigError("need 0 < eps_min <= eps_max", "eps_grid")
    out = []
    val = eps_min
    while val <= eps_max:
        out.append(val)
        val *= 2.0
    return out


def edelman_reference(eps):
    """Exact Gaussian upper bound: P(sigma_n(G) <= eps n^(-1/2)) <= eps."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return min(float(eps), 1.0)


def spielman_teng_reference(eps, n, c_exp):
    """Additive reference curve eps + exp(-c_exp * n), capped at 1.

    c_exp is a plotting convention, not a value from any source result.
    """
    if c_exp <= 0:
        raise ValueError("c_exp must be positive")
    return min(1.0, float(eps) + math.exp(-c_exp * n))


@dataclass(frozen=True)
class ExperimentConfig:
    dist: ensemble.EntryDistribution
    n: int
    trials: int
    eps_grid: tuple
    seed: int
    workers: int = 1
    output: str | None = None
    profile_trials: int = _PROFILE_TRIALS_DEFAULT

    def __post_init__(self):
        if self.n < 8:
            raise ConfigError("n must be at least 8", "n")
        if self.trials < 1000:
            raise ConfigError("trials must be at least 1000", "trials")
        eps = tuple(float(e) for e in self.eps_grid)
        if not eps:
            raise ConfigError("eps_grid must be nonempty", "eps_grid")
        if any(e < 0 for e in eps):
            raise ConfigError("eps values must be nonnegative", "eps_grid")
        if any(0 < e < MIN_EPS for e in eps):
            raise ConfigError(
                f"eps < {MIN_EPS} is below desk-scale resolution; refusing to "
                "emit vacuous zeros",
                "eps_grid",
            )
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_grid must be strictly ascending", "eps_grid")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1", "workers")
        object.__setattr__(self, "eps_grid", eps)


def config_from_document(doc):
    """Parse the JSON-style config document, naming any missing field."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "config")
    for key in ("dist", "n", "trials", "eps_grid", "seed"):
        if key not in doc:
            raise ConfigError(f"missing required config field: {key!r}", key)
    try:
        dist = ensemble.from_spec(doc["dist"])
    except ensemble.DistributionError as exc:
        raise ConfigError(str(exc), "dist") from exc
    grid_spec = doc["eps_grid"]
    if isinstance(grid_spec, dict):
        if "dyadic" in grid_spec:
            lohi = grid_spec["dyadic"]
            grid = dyadic_grid(float(lohi["min"]), float(lohi["max"]))
        else:
            raise ConfigError("eps_grid object must carry a 'dyadic' key", "eps_grid")
    else:
        grid = [float(e) for e in grid_spec]
    return ExperimentConfig(
        dist=dist,
        n=int(doc["n"]),
        trials=int(doc["trials"]),
        eps_grid=tuple(grid),
        seed=int(doc["seed"]),
        workers=int(doc.get("workers", 1)),
        output=doc.get("output"),
        profile_trials=int(doc.get("profile_trials", _PROFILE_TRIALS_DEFAULT)),
    )


@dataclass(frozen=True)
class TailEstimate:
    """Per-eps counts, point estimates and Wilson 99% intervals."""

    dist: ensemble.EntryDistribution
    n: int
    eps_grid: tuple
    counts: tuple
    trials: int
    estimates: tuple
    ci: tuple
    seed: int
    singular_count: int = 0

    def csv_rows(self):
        lines = [TAIL_CSV_HEADER]
        for eps, cnt, est, (lo, hi) in zip(self.eps_grid, self.counts, self.estimates, self.ci):
            lines.append(
                ",".join([fmt17(eps), str(cnt), str(self.trials), fmt17(est), fmt17(lo), fmt17(hi)])
            )
        return "\n".join(lines) + "\n"


def _tail_shard(args):
    """Count threshold hits for a contiguous trial range (worker entry point).

    Per-trial substreams depend only on (seed, trial, role), so the shard
    boundaries never influence the counts.
    """
    dist_spec, n, thresholds, seed, start, stop = args
    dist = ensemble.from_spec(dist_spec)
    role = f"tail/{dist.kind}"
    hist = np.zeros(len(thresholds) + 1, dtype=np.int64)
    singular = 0
    thr = np.asarray(thresholds)
    for trial in range(start, stop):
        m = ensemble.sample_matrix(dist, n, n, seed, trial, role=role)
        s = np.linalg.svd(m.entries, compute_uv=False)
        sigma_n = s[-1]
        if sigma_n <= spectra.RANK_DEFICIENCY_REL * np.linalg.norm(m.entries):
            singular += 1
        hist[np.searchsorted(thr, sigma_n, side="left")] += 1
    return hist, singular


def _resolve_workers(cfg_workers):
    env = os.environ.get("LSV_LAB_WORKERS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError("LSV_LAB_WORKERS must be an integer", "workers") from exc
        if value < 1:
            raise ConfigError("LSV_LAB_WORKERS must be at least 1", "workers")
        return value
    return cfg_workers


def tail_probability(cfg):
    """Estimate P(sigma_n <= eps * n^(-1/2)) for every eps in the config.

    All eps share one sample (nested counting), the comparison is an exact
    floating-point <=, and the merge over shards is a plain sum, so the
    result is deterministic given the seed and independent of worker count.
    """
    workers = _resolve_workers(cfg.workers)
    thresholds = tuple(e * cfg.n**-0.5 for e in cfg.eps_grid)
    shards = _shard_ranges(cfg.trials, workers)
    args = [
        (cfg.dist.spec(), cfg.n, thresholds, cfg.seed, start, stop)
        for start, stop in shards
    ]
    if workers == 1:
        results = [_tail_shard(a) for a in args]
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=workers) as pool:
            results = pool.map(_tail_shard, args)
    hist = np.sum([h for h, _ in results], axis=0)
    singular = int(sum(s for _, s in results))
    counts = tuple(int(c) for c in np.cumsum(hist[:-1]))
    estimates = tuple(c / cfg.trials for c in counts)
    ci = tuple(wilson_interval(c, cfg.trials) for c in counts)
    return TailEstimate(
        dist=cfg.dist,
        n=cfg.n,
        eps_grid=cfg.eps_grid,
        counts=counts,
        trials=cfg.trials,
        estimates=estimates,
        ci=ci,
        seed=cfg.seed,
        singular_count=singular,
    )


def _shard_ranges(trials, workers):
    per = 64 if workers > 1 else trials
    shards = []
    start = 0
    while start < trials:
        stop = min(start + per, trials)
        shards.append((start, stop))
        start = stop
    return shards


@dataclass(frozen=True)
class UniversalityReport:
    """Paired tail estimates for a law and the Gaussian reference ensemble."""

    subject: TailEstimate
    gaussian: TailEstimate
    ratios: tuple
    ci_overlap: tuple          # per eps, after 15% multiplicative slack
    max_discrepancy: float
    atom_counts: tuple         # (subject singular count, gaussian singular count)

    @property
    def all_overlap(self):
        return all(self.ci_overlap)


def universality_compare(dist, cfg, slack=0.15):
    """Run the tail experiment for ``dist`` and for the Gaussian, then compare.

    Substreams are independent because the sampling role is tagged with the
    distribution kind.  CIs are widened multiplicatively by ``slack`` before
    the overlap check; the eps = 0 singular atom is reported separately and
    never enters the ratio columns.
    """
    cfg_subject = ExperimentConfig(
        dist=dist, n=cfg.n, trials=cfg.trials, eps_grid=cfg.eps_grid,
        seed=cfg.seed, workers=cfg.workers,
    )
    cfg_gauss = ExperimentConfig(
        dist=ensemble.standard_gaussian(), n=cfg.n, trials=cfg.trials,
        eps_grid=cfg.eps_grid, seed=cfg.seed, workers=cfg.workers,
    )
    subject = tail_probability(cfg_subject)
    gauss = tail_probability(cfg_gauss)
    ratios = []
    overlaps = []
    for est_s, est_g, ci_s, ci_g in zip(
        subject.estimates, gauss.estimates, subject.ci, gauss.ci
    ):
        ratios.append(est_s / est_g if est_g > 0 else math.inf if est_s > 0 else 1.0)
        lo_s, hi_s = ci_s[0] / (1 + slack), ci_s[1] * (1 + slack)
        lo_g, hi_g = ci_g[0] / (1 + slack), ci_g[1] * (1 + slack)
        overlaps.append(max(lo_s, lo_g) <= min(hi_s, hi_g))
    finite = [r for r in ratios if math.isfinite(r)]
    max_disc = max((abs(r - 1.0) for r in finite), default=0.0)
    return UniversalityReport(
        subject=subject,
        gaussian=gauss,
        ratios=tuple(ratios),
        ci_overlap=tuple(overlaps),
        max_discrepancy=max_disc,
        atom_counts=(subject.singular_count, gauss.singular_count),
    )


def _events_csv(cfg):
    lines = [
        "trial,r1,r2,r3,r4,e_flat,e_lcd_approx,e_star,degenerate_kernel,"
        "sigma_n1_scaled,r4_partial_sum,kernel_sup_norm"
    ]
    count = min(cfg.profile_trials, cfg.trials)
    for trial in range(count):
        m = ensemble.sample_matrix(
            cfg.dist, cfg.n, cfg.n, cfg.seed, trial, role=f"profile/{cfg.dist.kind}"
        )
        p = events.regularity_profile(m.entries)
        w = p.witnesses
        r4_sum = math.fsum(np.square(w.inner_abs[: w.k3]).tolist())
        lines.append(
            ",".join(
                [str(trial)]
                + [str(int(b)) for b in (p.r1, p.r2, p.r3, p.r4, p.e_flat, p.e_lcd_approx, p.e_star, p.degenerate_kernel)]
                + [fmt17(w.sigma_scaled[0]), fmt17(r4_sum), fmt17(w.flat_norms[0])]
            )
        )
    return "\n".join(lines) + "\n"


def run_experiment(config_path):
    """Run the tail experiment described by a JSON config file.

    Writes tail.csv (frozen schema), events.csv (profile summary) and
    manifest.json into the configured output directory.  Exit codes: 0
    success, 2 invalid config, 3 unwritable output, 4 sizing error.  Given an
    identical config the CSV bodies are byte-identical; only the manifest
    carries timing.
    """
    started = time.time()
    try:
        with open(config_path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read {config_path}: {exc}")
        return 2
    try:
        cfg = config_from_document(doc)
    except ConfigError as exc:
        print(f"config error in field {exc.field!r}: {exc}")
        return 2
    out_dir = cfg.output or "."
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        print(f"output error: cannot write to {out_dir}: {exc}")
        return 3
    try:
        estimate = tail_probability(cfg)
        events_body = _events_csv(cfg)
    except ensemble.SizingError as exc:
        print(f"sizing error: {exc}")
        return 4
    with open(os.path.join(out_dir, "tail.csv"), "w") as fh:
        fh.write(estimate.csv_rows())
    with open(os.path.join(out_dir, "events.csv"), "w") as fh:
        fh.write(events_body)
    manifest = {
        "config": doc,
        "seed": cfg.seed,
        "library_version": __version__,
        "wall_time_seconds": time.time() - started,
        "trials": cfg.trials,
        "workers": _resolve_workers(cfg.workers),
        "singular_count": estimate.singular_count,
        "psi2_estimate": cfg.dist.psi2_estimate,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0
