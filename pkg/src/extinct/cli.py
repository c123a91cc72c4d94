"""Command-line interface.

Subcommands: gen-dist, predict, baxter, sim, compare, grid, markov.  Every
command is deterministic given its full flag set (seeds included), writes
CSV/JSON only, and embeds the resolved configuration in its outputs.  Exit
codes: 0 success, 2 validation error, 3 numerical failure, 4 cost guard.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import baxter as bx
from . import dist as dist_mod
from . import io as io_mod
from . import law, markov, sim, stats
from .errors import ExtinctError, SchemaMismatch

_THREADS_ENV = "EXTINCT_THREADS"


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(_THREADS_ENV, "1")))
    except ValueError:
        return 1


def _subseed(*parts: int) -> int:
    entropy = [int(p) % 2**63 for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _progress(i: int, total: int, label: str):
    step = max(1, total // 10)
    if i % step == 0 or i == total:
        print(f"{label}: {i}/{total}", file=sys.stderr)


def _load_params(args) -> law.LawParams:
    d = io_mod.read_distribution(args.dist)
    return law.LawParams(d, args.n_samples)


def cmd_gen_dist(args) -> int:
    d = dist_mod.gen_with_entropy(args.m, args.entropy, args.seed, args.tol)
    io_mod.write_distribution(args.out, d)
    print(f"m={d.m} entropy_norm={d.entropy_norm!r} -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    params = _load_params(args)
    config = io_mod.ExperimentConfig(
        command="predict", n_samples=args.n_samples, dist_path=args.dist,
        taus=args.tau, quantiles=args.quantiles, mean=True, out=args.out)
    est = law.mean_first_extinction(params)
    report = {
        "schema_version": io_mod.SCHEMA_VERSION,
        "config": config.to_dict(),
        "mean": est.value,
        "mean_error": est.error,
    }
    if args.quantiles:
        report["quantiles"] = {repr(q): law.quantile(params, q)
                               for q in args.quantiles}
    if args.tau:
        taus = np.array(args.tau, dtype=float)
        cdf = law.min_cdf(params, taus)
        pdf = law.min_pdf(params, taus)
        rows = [[float(t), float(c), float(f)]
                for t, c, f in zip(taus, cdf, pdf)]
        if args.cdf_out:
            io_mod.write_table(args.cdf_out, ["tau", "cdf", "pdf"], rows, config)
        report["cdf_points"] = rows
    if args.out:
        io_mod.write_json(args.out, report)
    print(f"mean={est.value!r} error={est.error!r}")
    return 0


def cmd_baxter(args) -> int:
    params = _load_params(args)
    cap = params.dist.m if args.force else bx.DEFAULT_SUBSET_CAP
    terms = bx.BaxterTerms.from_params(params, subset_cap=cap)
    t0 = time.perf_counter()
    exact = bx.exact_mean(terms)
    elapsed = time.perf_counter() - t0
    est = law.mean_first_extinction(params)
    rel = abs(est.value - exact) / abs(exact)
    report = {
        "schema_version": io_mod.SCHEMA_VERSION,
        "config": io_mod.ExperimentConfig(
            command="baxter", n_samples=args.n_samples, dist_path=args.dist,
            force=args.force or None, out=args.out).to_dict(),
        "exact_mean": exact,
        "subset_terms": bx.cost_estimate(params.dist.m),
        "wall_seconds": elapsed,
        "quadrature_mean": est.value,
        "quadrature_error": est.error,
        "relative_difference": rel,
    }
    if args.out:
        io_mod.write_json(args.out, report)
    print(f"exact={exact!r} quadrature={est.value!r} rel_diff={rel:.3e} "
          f"({report['subset_terms']} terms in {elapsed:.3f}s)")
    return 0


def cmd_sim(args) -> int:
    params = _load_params(args)
    threads = args.threads
    config = io_mod.ExperimentConfig(
        command=f"sim-{args.engine}", n_samples=args.n_samples,
        dist_path=args.dist, trials=args.trials, seed=args.seed,
        dt=args.dt if args.engine == "sde" else None,
        substeps=args.substeps if args.engine == "sde" else None,
        max_steps=args.max_steps, threads=threads, out=args.out)
    if args.engine == "resample":
        sample_set = sim.resample_many(params, args.trials, args.seed,
                                       args.max_steps, threads=threads)
    else:
        opts = sim.SdeOptions(dt=args.dt, substeps=args.substeps,
                              max_steps=args.max_steps)
        sample_set = sim.sde_many(params, opts, args.trials, args.seed,
                                  threads=threads)
    _progress(args.trials, args.trials, f"{args.engine} trials")
    sample_set.require_uncensored()  # all-censored runs are a hard failure
    io_mod.write_sample_set(args.out, sample_set, config)
    summary = stats.summarize(sample_set.taus())
    print(f"trials={args.trials} censored={sample_set.n_censored} "
          f"mean={summary.mean!r} sem={summary.sem!r} -> {args.out}")
    return 0


def _check_sidecar(samples_path, params: law.LawParams):
    meta = io_mod.read_json(io_mod.sidecar_path(samples_path))
    stored = meta.get("params", {})
    if stored.get("n_samples") != params.n_samples:
        raise SchemaMismatch(
            f"--n-samples {params.n_samples} does not match the sample "
            f"file's n_samples {stored.get('n_samples')}")
    stored_p = np.asarray(stored.get("dist", {}).get("p", []), dtype=float)
    if stored_p.size != params.dist.m or not np.allclose(
            stored_p, params.dist.probs, rtol=0, atol=1e-12):
        raise SchemaMismatch(
            "--dist does not match the distribution stored with the samples")


def cmd_compare(args) -> int:
    sample_set = io_mod.read_sample_set(args.samples)
    taus = sample_set.require_uncensored()
    summary = stats.summarize(taus)
    config = io_mod.ExperimentConfig(
        command="compare", samples_path=args.samples,
        samples_b_path=args.samples_b, dist_path=args.dist,
        n_samples=args.n_samples, out=args.out)

    if args.samples_b:
        other = io_mod.read_sample_set(args.samples_b)
        ks = stats.ks_two_sample(taus, other.require_uncensored())
        theory_mean = None
        z = None
    else:
        if args.dist:
            if args.n_samples is None:
                raise SchemaMismatch("--n-samples is required with --dist")
            params = law.LawParams(io_mod.read_distribution(args.dist),
                                   args.n_samples)
            _check_sidecar(args.samples, params)
        else:
            params = sample_set.params
        ks = stats.ks_one_sample(taus, lambda t: law.min_cdf(params, t))
        theory_mean = law.mean_first_extinction(params).value
        z = stats.z_compat(summary, theory_mean) if summary.count >= 2 else None
        if args.overlay_out:
            xs = np.sort(taus)
            emp = stats.ecdf(taus)
            rows = [[float(t), float(emp(t)), float(law.min_cdf(params, t))]
                    for t in xs]
            io_mod.write_table(args.overlay_out, ["tau", "ecdf", "theory_cdf"],
                               rows, config)
    report = io_mod.comparison_report(ks, summary, theory_mean, z)
    report["config"] = config.to_dict()
    if args.out:
        io_mod.write_json(args.out, report)
    print(f"mode={ks.mode} D={ks.d_stat!r} p={ks.p_value!r}"
          + (f" z={z!r}" if z is not None else ""))
    return 0


def cmd_grid(args) -> int:
    if not args.m_list or not args.n_list:
        raise SchemaMismatch("--m-list and --n-list must be nonempty")
    threads = args.threads
    config = io_mod.ExperimentConfig(
        command="grid", m_list=args.m_list, n_list=args.n_list,
        entropy=args.entropy, dists_per_cell=args.dists_per_cell,
        trials_per_dist=args.trials_per_dist, seed=args.seed,
        threads=threads, out=args.out)
    rows = []
    for im, m in enumerate(args.m_list):
        for iN, n in enumerate(args.n_list):
            try:
                taus = []
                theory_means = []
                for d in range(args.dists_per_cell):
                    dseed = _subseed(args.seed, im, iN, d)
                    dd = dist_mod.gen_with_entropy(m, args.entropy, dseed)
                    params = law.LawParams(dd, n)
                    theory_means.append(law.mean_first_extinction(params).value)
                    sample = sim.resample_many(
                        params, args.trials_per_dist,
                        _subseed(args.seed, im, iN, d, 1), threads=threads)
                    taus.extend(sample.require_uncensored().tolist())
                summary = stats.summarize(taus)
                theory = float(np.mean(theory_means))
                z = stats.z_compat(summary, theory)
                rows.append([m, n, summary.mean, theory, z])
            except ExtinctError as exc:  # mark the cell, keep going
                print(f"cell m={m} n={n} failed: {exc}", file=sys.stderr)
                rows.append([m, n, float("nan"), float("nan"), float("nan")])
            _progress(im * len(args.n_list) + iN + 1,
                      len(args.m_list) * len(args.n_list), "grid cells")
    io_mod.write_table(args.out, ["m", "n", "mean_sim", "mean_theory", "z"],
                       rows, config)
    print(f"grid {len(args.m_list)}x{len(args.n_list)} -> {args.out}")
    return 0


def cmd_markov(args) -> int:
    threads = args.threads
    config = io_mod.ExperimentConfig(
        command="markov", m=args.states, entropy=args.entropy,
        n_samples=args.n_samples, runs=args.runs, seed=args.seed,
        max_cycles=args.max_cycles, threads=threads, out=args.out)
    chain = markov.random_chain(args.states, args.entropy, args.seed)
    if args.chain_out:
        io_mod.write_chain(args.chain_out, chain)
    sample_set, ks = markov.collapse_experiment(
        chain, args.n_samples, args.runs, args.seed,
        max_cycles=args.max_cycles, threads=threads)
    io_mod.write_sample_set(args.out, sample_set, config)
    est = law.mean_first_extinction(sample_set.params)
    summary = stats.summarize(sample_set.require_uncensored())
    z = stats.z_compat(summary, est.value) if summary.count >= 2 else None
    report = io_mod.comparison_report(ks, summary, est.value, z)
    report["config"] = config.to_dict()
    report["predicted_mean_error"] = est.error
    report["stationary_entropy"] = chain.stationary.entropy_norm
    if args.report:
        io_mod.write_json(args.report, report)
    print(f"runs={args.runs} mean={summary.mean!r} predicted={est.value!r} "
          f"D={ks.d_stat!r} p={ks.p_value!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extinct",
        description="First-extinction times under finite-sample resampling: "
                    "closed-form predictions, exact subset-sum oracle, Monte "
                    "Carlo simulation, and self-training collapse experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dist", help="generate a distribution with a "
                                        "target normalized entropy")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--entropy", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=dist_mod.ENTROPY_TOLERANCE)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_dist)

    p = sub.add_parser("predict", help="closed-form mean/CDF/quantiles")
    p.add_argument("--dist", required=True)
    p.add_argument("--n-samples", type=int, required=True)
    p.add_argument("--mean", action="store_true",
                   help="kept for symmetry; the mean is always reported")
    p.add_argument("--tau", type=_float_list, default=None,
                   help="comma-separated times for CDF/PDF evaluation")
    p.add_argument("--quantiles", type=_float_list, default=None)
    p.add_argument("--out")
    p.add_argument("--cdf-out")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("baxter", help="exact subset-sum mean (O(2^M))")
    p.add_argument("--dist", required=True)
    p.add_argument("--n-samples", type=int, required=True)
    p.add_argument("--force", action="store_true",
                   help="lift the M <= 30 cost guard")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_baxter)

    p = sub.add_parser("sim", help="Monte Carlo first-extinction samples")
    p.add_argument("engine", choices=["resample", "sde"])
    p.add_argument("--dist", required=True)
    p.add_argument("--n-samples", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--substeps", type=int, default=1)
    p.add_argument("--max-steps", type=int, default=sim.DEFAULT_MAX_STEPS)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sim)

    p = sub.add_parser("compare", help="KS comparison: samples vs theory, "
                                       "or samples vs samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--samples-b")
    p.add_argument("--dist")
    p.add_argument("--n-samples", type=int)
    p.add_argument("--out")
    p.add_argument("--overlay-out")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("grid", help="theory-vs-simulation z-scores over an "
                                    "(M, N) grid")
    p.add_argument("--m-list", type=_int_list, required=True)
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--entropy", type=float, required=True)
    p.add_argument("--dists-per-cell", type=int, default=10)
    p.add_argument("--trials-per-dist", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_grid)

    p = sub.add_parser("markov", help="self-training collapse experiment on "
                                      "a random chain")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--entropy", type=float, required=True,
                   help="target normalized entropy of the stationary "
                        "distribution")
    p.add_argument("--n-samples", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-cycles", type=int, default=markov.DEFAULT_MAX_CYCLES)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--chain-out")
    p.set_defaults(fn=cmd_markov)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ExtinctError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:  # missing/unreadable input files
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
