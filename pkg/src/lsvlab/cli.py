"""Command-line front end: ``lsv-lab <subcommand>``.

Every subcommand emits CSV (to --out, or stdout with "-") with floats at 17
significant digits.  Exit codes: 0 success, 2 invalid arguments or config,
3 unwritable output, 4 sizing/budget errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bump, corrector, ensemble, events, harness, secular, spectra, structure
from .harness import fmt17


def _parse_dist(text):
    if text.strip().startswith("{"):
        return ensemble.from_spec(json.loads(text))
    return ensemble.from_spec({"kind": text.strip()})


def _write(out, body):
    if out in (None, "-"):
        sys.stdout.write(body)
        return
    with open(out, "w") as fh:
        fh.write(body)


def _cmd_tail(args):
    if args.config:
        return harness.run_experiment(args.config)
    cfg = harness.ExperimentConfig(
        dist=_parse_dist(args.dist), n=args.n, trials=args.trials,
        eps_grid=tuple(args.eps), seed=args.seed, workers=args.workers,
    )
    est = harness.tail_probability(cfg)
    _write(args.out, est.csv_rows())
    return 0


def _cmd_compare(args):
    cfg = harness.ExperimentConfig(
        dist=_parse_dist(args.dist), n=args.n, trials=args.trials,
        eps_grid=tuple(args.eps), seed=args.seed, workers=args.workers,
    )
    report = harness.universality_compare(cfg.dist, cfg)
    lines = ["eps,estimate_subject,estimate_gaussian,ratio,ci_overlap"]
    for eps, es, eg, ratio, ok in zip(
        cfg.eps_grid, report.subject.estimates, report.gaussian.estimates,
        report.ratios, report.ci_overlap,
    ):
        lines.append(
            ",".join([fmt17(eps), fmt17(es), fmt17(eg), fmt17(ratio), str(int(ok))])
        )
    lines.append(f"# singular_atoms subject={report.atom_counts[0]} gaussian={report.atom_counts[1]}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_secular_check(args):
    dist = _parse_dist(args.dist)
    lines = ["trial,n,max_rel_error"]
    for trial in range(args.trials):
        stream = ensemble.substream(args.seed, trial, "secular-check/n")
        n = int(stream.integers(2, args.n + 1))
        m = ensemble.sample_matrix(dist, n, n, args.seed, trial, role=f"secular-check/{dist.kind}")
        astar, y = m.entries[:-1], m.entries[-1]
        try:
            problem = secular.problem_from_rows(astar, y)
        except spectra.DegenerateKernelError:
            lines.append(f"{trial},{n},nan")
            continue
        mine = secular.secular_spectrum(problem)
        ref = spectra.singular_values(m.entries)
        err = secular.spectrum_relative_error(mine, ref, np.linalg.norm(m.entries))
        lines.append(f"{trial},{n},{fmt17(err)}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_chi_check(args):
    dist = _parse_dist(args.dist)
    ell = None if args.ell == "auto" else int(args.ell)
    lines = ["trial,chi,chi_tilde,gap,r_indicator"]
    for trial in range(args.trials):
        m = ensemble.sample_matrix(dist, args.n, args.n, args.seed, trial, role=f"chi-check/{dist.kind}")
        mstar, x = m.entries[:-1], m.entries[-1]
        try:
            ctx = corrector.correction_context(mstar, ell=ell)
            chi = corrector.chi_trunc(ctx, x)
            chi_t = corrector.chi_full(ctx, x)
            gap = corrector.truncation_gap(ctx, x)
        except corrector.DegenerateSpectrumError:
            lines.append(f"{trial},nan,nan,nan,0")
            continue
        r_ind = 0
        if args.n >= 16:
            r_ind = int(events.regularity_profile(m.entries, lcd_cap=args.lcd_cap).r)
        lines.append(
            f"{trial},{fmt17(chi)},{fmt17(chi_t)},{fmt17(gap)},{r_ind}"
        )
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_events(args):
    dist = _parse_dist(args.dist)
    lines = ["trial,r1,r2,r3,r4,e_flat,e_lcd_approx,e_star,degenerate_kernel"]
    for trial in range(args.trials):
        m = ensemble.sample_matrix(dist, args.n, args.n, args.seed, trial, role=f"profile/{dist.kind}")
        p = events.regularity_profile(m.entries, lcd_cap=args.lcd_cap)
        flags = (p.r1, p.r2, p.r3, p.r4, p.e_flat, p.e_lcd_approx, p.e_star, p.degenerate_kernel)
        lines.append(",".join([str(trial)] + [str(int(b)) for b in flags]))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _kernel_vector_for(dist, n, seed):
    for trial in range(64):
        m = ensemble.sample_matrix(dist, n - 1, n, seed, trial, role=f"kernel/{dist.kind}")
        try:
            return spectra.kernel_vector(m.entries)
        except spectra.DegenerateKernelError:
            continue
    raise RuntimeError("could not sample a full-rank matrix in 64 attempts")


def _verdict_lines(header, rows):
    lines = [header]
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def _cmd_smallball(args):
    dist = _parse_dist(args.dist)
    v = _kernel_vector_for(dist, args.n, args.seed)
    grid = args.eps or harness.dyadic_grid(0.05, 0.8)
    verdicts = events.small_ball_test(v, dist, grid, args.trials, args.seed)
    rows = [
        ",".join([fmt17(v_.details["eps"]), fmt17(v_.statistic), fmt17(v_.ci_low),
                  fmt17(v_.ci_high), fmt17(v_.details["ratio"]), str(int(v_.passed))])
        for v_ in verdicts
    ]
    _write(args.out, _verdict_lines("eps,estimate,ci_low,ci_high,ratio,pass", rows))
    return 0


def _cmd_decouple(args):
    dist = _parse_dist(args.dist)
    frame = events.orthonormal_frame(args.n, 2, args.seed)
    try:
        verdicts = events.decoupling_test(
            frame[0], frame[1], args.eps_level, (0.0, 1.0, 2.0, 3.0),
            dist, args.trials, args.seed,
        )
    except events.UnderpoweredError as exc:
        print(f"underpowered: {exc}")
        return 4
    rows = [
        ",".join([fmt17(v.details["t"]), fmt17(v.statistic), fmt17(v.ci_low),
                  fmt17(v.ci_high), str(int(v.passed))])
        for v in verdicts
    ]
    _write(args.out, _verdict_lines("t,estimate,ci_low,ci_high,pass", rows))
    return 0


def _cmd_negdep(args):
    dist = _parse_dist(args.dist)
    frame = events.orthonormal_frame(args.n, 17, args.seed)
    try:
        verdicts = events.negative_dependence_test(
            frame[0], frame[1:], args.eps_level, args.c_small,
            dist, args.trials, args.seed,
        )
    except events.UnderpoweredError as exc:
        print(f"underpowered: {exc}")
        return 4
    rows = [
        ",".join([str(v.details["k"]), fmt17(v.statistic), fmt17(v.details["ratio_to_eps"]),
                  fmt17(v.ci_low), fmt17(v.ci_high), str(int(v.passed))])
        for v in verdicts
    ]
    _write(args.out, _verdict_lines("k,estimate,ratio_to_eps,ci_low,ci_high,pass", rows))
    return 0


def _cmd_sigtails(args):
    dist = _parse_dist(args.dist)
    report = events.sigma_tail_tests(
        dist, args.n, (1, 2, 3), (2.0, 3.0, 4.0, 5.0), args.trials, args.seed,
    )
    rows = []
    for v in report.lower:
        rows.append(",".join(["lower", str(v.details["k"]), "", fmt17(v.statistic),
                              fmt17(v.ci_low), fmt17(v.ci_high),
                              str(int(not v.details["underpowered"]))]))
    for k, row in report.upper.items():
        for v in row:
            rows.append(",".join(["upper", str(k), fmt17(v.details["t"]), fmt17(v.statistic),
                                  fmt17(v.ci_low), fmt17(v.ci_high),
                                  str(int(not v.details["underpowered"]))]))
    rows.append(f"# lower_monotone_k={int(report.lower_monotone_k)} upper_monotone_t={int(report.upper_monotone_t)}")
    _write(args.out, _verdict_lines("tail,k,t,estimate,ci_low,ci_high,powered", rows))
    return 0


def _cmd_lindeberg(args):
    dist = _parse_dist(args.dist)
    u = np.full(args.n, args.n**-0.5)
    verdict = events.lindeberg_gap_test([u], dist, args.n, args.trials, args.seed)
    body = _verdict_lines(
        "gap,bound,ci_low,ci_high,pass",
        [",".join([fmt17(verdict.statistic), fmt17(verdict.bound_value),
                   fmt17(verdict.ci_low), fmt17(verdict.ci_high), str(int(verdict.passed))])],
    )
    _write(args.out, body)
    return 0


def _load_vector(spec_text):
    if spec_text.startswith("ones:"):
        n = int(spec_text.split(":", 1)[1])
        return np.full(n, n**-0.5)
    values = []
    with open(spec_text) as fh:
        for line in fh:
            line = line.strip()
            if line:
                values.append(float(line))
    return np.asarray(values)


def _cmd_lcd(args):
    v = _load_vector(args.vector)
    norm = np.linalg.norm(v)
    if norm == 0:
        print("vector must be nonzero")
        return 2
    q = structure.LcdQuery(v / norm, theta_cap=args.cap, alpha=args.alpha, gamma=args.gamma)
    try:
        result = structure.lcd(q)
    except structure.LcdBudgetError as exc:
        print(f"budget error: {exc}")
        return 4
    if result.found:
        print(f"found,{fmt17(result.theta)}")
    else:
        print(f"exceeds_cap,{fmt17(result.certificate_gap)}")
    return 0


def _cmd_bump(args):
    table = bump.build_table(grid_max=args.grid_max, step=args.step)
    lines = ["x,psi,bound"]
    c = table.decay_constant_fit
    for x, val in zip(table.grid, table.psi_values):
        lines.append(",".join([fmt17(x), fmt17(val), fmt17(math.exp(-c * math.sqrt(abs(x) + 1.0)))]))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _add_common(p, n_default=64, trials_default=2000):
    p.add_argument("--n", type=int, default=n_default)
    p.add_argument("--dist", type=str, default="gaussian")
    p.add_argument("--trials", type=int, default=trials_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default="-")


def build_parser():
    parser = argparse.ArgumentParser(prog="lsv-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tail", help="tail-probability experiment")
    p.add_argument("--config", type=str, default=None)
    _add_common(p)
    p.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.5])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_tail)

    p = sub.add_parser("compare", help="universality comparison against Gaussian")
    _add_common(p)
    p.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("secular-check", help="secular spectrum vs direct SVD")
    _add_common(p, n_default=40, trials_default=200)
    p.set_defaults(func=_cmd_secular_check)

    p = sub.add_parser("chi-check", help="correction factors per trial")
    _add_common(p, n_default=64, trials_default=200)
    p.add_argument("--ell", type=str, default="auto")
    p.add_argument("--lcd-cap", type=float, default=1e4)
    p.set_defaults(func=_cmd_chi_check)

    p = sub.add_parser("events", help="regularity profiles per trial")
    _add_common(p, n_default=64, trials_default=100)
    p.add_argument("--lcd-cap", type=float, default=1e4)
    p.set_defaults(func=_cmd_events)

    p = sub.add_parser("smallball", help="small-ball probability estimates")
    _add_common(p, n_default=64, trials_default=20000)
    p.add_argument("--eps", type=float, nargs="+", default=None)
    p.set_defaults(func=_cmd_smallball)

    p = sub.add_parser("decouple", help="joint small-ball and tail decay")
    _add_common(p, n_default=64, trials_default=200000)
    p.add_argument("--eps-level", type=float, default=0.5)
    p.set_defaults(func=_cmd_decouple)

    p = sub.add_parser("negdep", help="negative dependence decay in k")
    _add_common(p, n_default=400, trials_default=200000)
    p.add_argument("--eps-level", type=float, default=0.3)
    p.add_argument("--c-small", type=float, default=0.5)
    p.set_defaults(func=_cmd_negdep)

    p = sub.add_parser("sigtails", help="lower/upper tails of small singular values")
    _add_common(p, n_default=64, trials_default=20000)
    p.set_defaults(func=_cmd_sigtails)

    p = sub.add_parser("lindeberg", help="exchange gap against its bound")
    _add_common(p, n_default=100, trials_default=100000)
    p.set_defaults(func=_cmd_lindeberg)

    p = sub.add_parser("lcd", help="least common denominator scan")
    p.add_argument("--vector", type=str, required=True, help="file of one real per line, or ones:<n>")
    p.add_argument("--gamma", type=float, default=structure.DEFAULT_GAMMA)
    p.add_argument("--alpha", type=float, default=structure.DEFAULT_ALPHA)
    p.add_argument("--cap", type=float, required=True)
    p.set_defaults(func=_cmd_lcd)

    p = sub.add_parser("bump", help="bump table with decay bound")
    p.add_argument("--grid-max", type=float, default=30.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--out", type=str, default="-")
    p.set_defaults(func=_cmd_bump)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except harness.ConfigError as exc:
        print(f"config error in field {exc.field!r}: {exc}")
        return 2
    except ensemble.SizingError as exc:
        print(f"sizing error: {exc}")
        return 4
    except (ensemble.DistributionError, ValueError, json.JSONDecodeError) as exc:
        print(f"invalid arguments: {exc}")
        return 2
    except OSError as exc:
        print(f"output error: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
