"""Command line: ``simulate``, ``fit``, ``reconstruct`` and ``simstudy``."""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import rng as rngs
from .bsl import PosteriorSample, posterior_summary, run_mcmc
from .config import RunConfig, SimConfig, study_echo, study_from_mapping
from .epidemic import EpidemicCurve
from .errors import ConfigError, MisreportError, SchemaError
from .latent import PARAMS, LatentStructure, simulate_latent
from .misreporting import MisreportParams, observe
from .model import ModelSpec, parameter_names
from .reconstruction import reconstruct
from .series_io import (
    ObservedSeries,
    load_config,
    load_series,
    read_header,
    read_table,
    table_csv,
    write_series,
    write_text,
)
from .simstudy import aggregate, report_csv, report_text, run_study

log = logging.getLogger("misreport_bsl")


def cmd_simulate(args) -> None:
    cfg = SimConfig.from_mapping(load_config(args.config))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    T = cfg.T
    c1, c2 = np.zeros(T), np.zeros(T)
    if cfg.confinement:
        c1[cfg.confinement[0] : cfg.confinement[1]] = 1.0
    if cfg.vaccination_start is not None:
        c2[int(cfg.vaccination_start) :] = 1.0
    truth = dict(cfg.truth)
    missing = [n for n in parameter_names(cfg.model, (np.ptp(c1) > 0, np.ptp(c2) > 0)) if n not in truth]
    if missing:
        raise ConfigError(f"simulate config lacks truth values for {missing}")
    structure = LatentStructure(cfg.model, **{n: truth[n] for n in PARAMS[cfg.model]})
    curve = EpidemicCurve(m=truth["m"], k=truth["k"], A0=cfg.A0, beta1=truth.get("beta1", 0.0),
                          beta2=truth.get("beta2", 0.0), c1=c1, c2=c2, T=T)
    x = simulate_latent(structure, curve, T, rngs.stream(cfg.seed, rngs.DATA)).x
    y = observe(x, MisreportParams(truth["omega"], truth["q"]), rngs.stream(cfg.seed, rngs.OBSERVE))
    dates = [cfg.start_date + i * dt.timedelta(days=7) for i in range(T)]
    echo = cfg.echo()
    out = Path(args.out)
    write_series(out / f"{cfg.name}.csv", [ObservedSeries(cfg.region, dates, y, c1, c2)], echo)
    rows = [(cfg.region, d.isoformat(), float(v)) for d, v in zip(dates, x)]
    write_text(out / f"{cfg.name}_truth.csv", table_csv(("region", "date", "hidden"), rows), echo)


def _fit_one(job):
    series, cfg = job
    model = ModelSpec.for_series(cfg.model, series.y, series.c1, series.c2, priors=cfg.priors,
                                 A0=cfg.A0, use_covariates=cfg.use_covariates)
    return run_mcmc(model, series.y, cfg.sampler)


def cmd_fit(args) -> None:
    cfg = RunConfig.from_mapping(load_config(args.config))
    if args.seed is not None:
        cfg = replace(cfg, sampler=replace(cfg.sampler, seed=args.seed))
    series = load_series(args.data)
    jobs = [(s, cfg) for s in series]
    if args.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            samples = list(pool.map(_fit_one, jobs))
    else:
        samples = [_fit_one(j) for j in jobs]
    out = Path(args.out)
    for s, sample in zip(series, samples):
        echo = fit_echo(s.region_id, cfg, sample)
        write_posterior(out / s.region_id / "posterior_draws.csv", sample, echo)
        summary = posterior_summary(sample, 0.95)
        rows = [(n, iv.median, iv.lower, iv.upper) for n, iv in summary.items()]
        write_text(out / s.region_id / "estimates.csv", table_csv(("parameter", "median", "p2_5", "p97_5"), rows), echo)
        log.info("%s: acceptance %.3f", s.region_id, sample.acceptance_rate)


def fit_echo(region: str, cfg: RunConfig, sample: PosteriorSample) -> dict:
    """Resolved run config (default priors and A0 filled in) plus run metadata."""
    resolved = replace(
        cfg,
        priors={k[len("prior_"):]: tuple(v) for k, v in sample.config_echo.items() if k.startswith("prior_")},
        A0=sample.config_echo["A0"],
    )
    return {"region": region, **resolved.echo(), "T": sample.config_echo["T"],
            "acceptance_rate": sample.acceptance_rate}


def write_posterior(path, sample: PosteriorSample, echo: dict):
    rows = [tuple(float(v) for v in d) + (float(ll),) for d, ll in zip(sample.draws, sample.logliks)]
    return write_text(path, table_csv(sample.names + ("loglik",), rows), echo)


def read_posterior(path) -> PosteriorSample:
    header, rows = read_table(path)
    for col in ("omega", "q"):
        if col not in header:
            raise SchemaError(f"schema error: posterior file lacks column '{col}'")
    names = tuple(h for h in header if h != "loglik")
    data = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(len(rows), len(header))
    echo = read_header(path)
    ll = data[:, header.index("loglik")] if "loglik" in header else np.full(len(rows), np.nan)
    return PosteriorSample(names, data[:, [header.index(n) for n in names]], ll,
                           float(echo.get("acceptance_rate", np.nan)), int(echo.get("seed", 0)), echo)


def cmd_reconstruct(args) -> None:
    sample = read_posterior(args.posterior)
    echo = sample.config_echo
    series = load_series(args.data)
    region = args.region or echo.get("region")
    chosen = [s for s in series if s.region_id == region] if region else series[:1]
    if not chosen:
        raise SchemaError(f"schema error: region {region!r} not found in {args.data}")
    s = chosen[0]
    seed = args.seed if args.seed is not None else int(echo.get("seed", 0))
    n_rep = int(echo.get("n_draws_per_theta", 10))
    max_draws = int(echo.get("max_reconstruct_draws", 1000))
    bands = reconstruct(s.y, sample, n_rep, rngs.derive_seed(seed, rngs.RECONSTRUCT), max_draws)
    out_echo = {"region": s.region_id, "seed": seed, "n_draws_per_theta": n_rep, "max_reconstruct_draws": max_draws}
    out = Path(args.out)
    rows = [(d.isoformat(), float(y), a, b, c) for d, y, a, b, c in zip(s.dates, s.y, bands.p2_5, bands.p50, bands.p97_5)]
    write_text(out / "bands.csv", table_csv(("date", "observed", "p2_5", "p50", "p97_5"), rows), out_echo)
    obs = float(s.y.sum())
    totals = [
        ("observed_total", obs, obs, obs),
        ("estimated_total", *bands.estimated_total),
        ("reported_fraction", *bands.reported_fraction),
    ]
    write_text(out / "totals.csv", table_csv(("quantity", "median", "p2_5", "p97_5"), totals), out_echo)


def cmd_simstudy(args) -> None:
    cfg = study_from_mapping(load_config(args.config))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    results = run_study(cfg, threads=args.threads)
    rows = aggregate(results)
    echo = study_echo(cfg)
    out = Path(args.out)
    write_text(out / "simstudy_report.csv", report_csv(rows), echo)
    write_text(out / "simstudy_report.txt", report_text(rows), echo)
    cells = []
    for r in results:
        if r.failed:
            cells.append((r.structure, r.cell, r.replicate, "-", "", "", "", "", r.error))
        for p, m in r.metrics.items():
            cells.append((r.structure, r.cell, r.replicate, p, r.truth[p], m["bias"], m["interval_length"],
                          int(m["covered"]), ""))
    cols = ("structure", "cell", "replicate", "parameter", "truth", "bias", "interval_length", "covered", "error")
    write_text(out / "simstudy_cells.csv", table_csv(cols, cells), echo)
    sys.stdout.write(report_text(rows))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="misreport-bsl", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--threads", type=int, default=1, help="worker processes")

    sp = sub.add_parser("simulate", help="simulate a misreported series and its hidden truth")
    sp.add_argument("--config", required=True)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="BSL posterior per region")
    sp.add_argument("--data", required=True)
    sp.add_argument("--config", required=True)
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("reconstruct", help="posterior bands of the hidden series")
    sp.add_argument("--data", required=True)
    sp.add_argument("--posterior", required=True)
    sp.add_argument("--region", default=None)
    common(sp)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("simstudy", help="bias / interval length / coverage study")
    sp.add_argument("--config", required=True)
    common(sp)
    sp.set_defaults(func=cmd_simstudy)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except MisreportError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR IO: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
