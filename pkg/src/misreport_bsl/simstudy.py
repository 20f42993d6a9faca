"""Monte Carlo harness: bias, interval length and coverage of the BSL fit over a parameter grid."""

from __future__ import annotations

import io
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as rngs
from .bsl import MCMCSettings, posterior_summary, run_mcmc
from .epidemic import EpidemicCurve
from .errors import MisreportError, ParameterError
from .latent import PARAMS, Kind, LatentStructure, simulate_latent
from .misreporting import MisreportParams, observe
from .model import ModelSpec

log = logging.getLogger(__name__)

GRID_PARAMS = {
    Kind.ARCH1: ("phi1", "alpha0", "alpha1", "omega", "q"),
    Kind.AR1: ("alpha", "omega", "q"),
    Kind.MA1: ("theta", "omega", "q"),
    Kind.ARMA11: ("alpha", "theta", "omega", "q"),
}
DEFAULT_LEVELS = (0.3, 0.5, 0.7)
REPORT_COLUMNS = ("Structure", "Parameter", "Bias", "AbsBias", "AIL", "Coverage (%)", "N", "Failed")


@dataclass
class StudyConfig:
    """Grid, truth values and sampler settings for a study.

    ``beta_binding`` says which parameter the fixed "beta" truth is given to:
    the growth rate ``k`` (default) or the confinement effect ``beta1``, in
    which case the confinement indicator is on for the middle third of the
    series and ``k`` takes the value ``k``.
    """

    structures: tuple[str, ...] = ("AR1",)
    grid: dict[str, tuple[float, ...]] = field(default_factory=dict)
    T: int = 1000
    replicates: int = 5
    n_cells: int | None = 4
    phi0: float = 2.0
    sigma_eps: float = 1.0
    m: float = 0.2
    beta: float = 0.4
    beta_binding: str = "k"
    k: float = 0.4
    A0: float = 0.1
    priors: dict[str, tuple[float, float]] = field(default_factory=lambda: {"m": (-1.0, 3.0), "k": (0.01, 2.0)})
    sampler: MCMCSettings = field(default_factory=lambda: MCMCSettings(n_iter=6000, n_burn=2000, n_sim=50))
    seed: int = 0

    def __post_init__(self):
        self.structures = tuple(Kind(s) for s in self.structures)
        if not self.structures:
            raise ParameterError("no structures selected")
        if self.beta_binding not in ("k", "beta1"):
            raise ParameterError("beta_binding must be 'k' or 'beta1'")
        for name, values in self.grid.items():
            if len(values) == 0:
                raise ParameterError(f"empty grid for {name}")
        if self.replicates < 1:
            raise ParameterError("replicates must be positive")

    def levels(self, name: str) -> tuple[float, ...]:
        return tuple(self.grid.get(name, DEFAULT_LEVELS))

    def cells(self, kind: Kind) -> list[dict[str, float]]:
        """Grid points for ``kind``: the full product, or a Latin-hypercube subset of ``n_cells``."""
        names = GRID_PARAMS[kind]
        full = [dict(zip(names, v)) for v in itertools.product(*(self.levels(n) for n in names))]
        if not self.n_cells or self.n_cells >= len(full):
            return full
        g = rngs.stream(self.seed, rngs.DATA, list(Kind).index(kind), 10**6)
        cols = []
        for n in names:
            lv = self.levels(n)
            # each level used as evenly as possible
            cols.append(g.permutation(np.arange(self.n_cells) % len(lv)))
        return [{n: self.levels(n)[cols[i][c]] for i, n in enumerate(names)} for c in range(self.n_cells)]

    def truth(self, kind: Kind, cell: dict[str, float]) -> dict[str, float]:
        t = {"phi0": self.phi0, "sigma_eps": self.sigma_eps, "m": self.m}
        t.update(cell)
        if self.beta_binding == "k":
            t["k"] = self.beta
        else:
            t["k"], t["beta1"] = self.k, self.beta
        return t

    def calendar(self):
        if self.beta_binding != "beta1":
            return None
        c1 = np.zeros(self.T)
        c1[self.T // 3 : 2 * self.T // 3] = 1.0
        return c1


@dataclass
class CellResult:
    structure: str
    cell: int
    replicate: int
    truth: dict[str, float]
    metrics: dict[str, dict[str, float]] = field(default_factory=dict)
    runtime: float = 0.0
    failed: bool = False
    error: str = ""


def simulate_observed(kind, truth: dict[str, float], T: int, A0: float, c1, seed: int):
    """Hidden and observed series at the given truth."""
    structure = LatentStructure(kind, **{n: truth[n] for n in PARAMS[Kind(kind)]})
    curve = EpidemicCurve(m=truth["m"], k=truth["k"], A0=A0, beta1=truth.get("beta1", 0.0),
                          beta2=truth.get("beta2", 0.0), c1=c1, T=T)
    x = simulate_latent(structure, curve, T, rngs.stream(seed, rngs.DATA))
    y = observe(x, MisreportParams(truth["omega"], truth["q"]), rngs.stream(seed, rngs.OBSERVE))
    return x.x, y


def run_cell(config: StudyConfig, kind, cell: dict[str, float], replicate: int, cell_index: int = 0) -> CellResult:
    """Simulate at the cell's truth, fit, and score the 95% intervals."""
    kind = Kind(kind)
    truth = config.truth(kind, cell)
    seed = rngs.derive_seed(config.seed, list(Kind).index(kind), cell_index, replicate)
    result = CellResult(kind.value, cell_index, replicate, truth)
    start = time.perf_counter()
    try:
        c1 = config.calendar()
        _, y = simulate_observed(kind, truth, config.T, config.A0, c1, seed)
        model = ModelSpec.for_series(kind, y, c1=c1, priors=config.priors, A0=config.A0)
        for name, value in truth.items():
            i = model.space.index(name)
            if not model.space.lo[i] <= value <= model.space.hi[i]:
                raise ParameterError(f"truth {name}={value} outside prior box {model.space.boxes()[name]}")
        sample = run_mcmc(model, y, replace(config.sampler, seed=seed))
        summary = posterior_summary(sample, 0.95)
        for name in np.array(model.space.names)[model.space.free]:
            s, v = summary[name], truth[name]
            result.metrics[name] = {
                "bias": s.median - v,
                "abs_bias": abs(s.median - v),
                "interval_length": s.upper - s.lower,
                "covered": float(s.lower <= v <= s.upper),
            }
    except MisreportError as exc:
        result.failed, result.error = True, f"{exc.code}: {exc}"
        log.warning("cell %s/%d/%d failed: %s", kind.value, cell_index, replicate, result.error)
    result.runtime = time.perf_counter() - start
    return result


def _run(args):
    return run_cell(*args)


def run_study(config: StudyConfig, threads: int = 1) -> list[CellResult]:
    """Run every (structure, cell, replicate). Results come back in key order."""
    jobs = [
        (config, kind, cell, r, ci)
        for kind in config.structures
        for ci, cell in enumerate(config.cells(kind))
        for r in range(config.replicates)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run, jobs))
    else:
        results = [_run(j) for j in jobs]
    return sorted(results, key=lambda r: (list(Kind).index(Kind(r.structure)), r.cell, r.replicate))


@dataclass
class ReportRow:
    structure: str
    parameter: str
    bias: float
    abs_bias: float
    ail: float
    coverage: float
    n: int
    failed: int


def aggregate(results: list[CellResult]) -> list[ReportRow]:
    """Average bias, absolute bias, interval length and coverage per (structure, parameter)."""
    if not results:
        raise ParameterError("no results to aggregate")
    rows = []
    for structure in dict.fromkeys(r.structure for r in results):
        mine = [r for r in results if r.structure == structure]
        ok = [r for r in mine if not r.failed]
        failed = len(mine) - len(ok)
        params = list(dict.fromkeys(p for r in ok for p in r.metrics))
        for p in params:
            m = [r.metrics[p] for r in ok if p in r.metrics]
            rows.append(ReportRow(
                structure, p,
                float(np.mean([v["bias"] for v in m])),
                float(np.mean([v["abs_bias"] for v in m])),
                float(np.mean([v["interval_length"] for v in m])),
                100.0 * float(np.mean([v["covered"] for v in m])),
                len(m), failed,
            ))
        if not params:
            rows.append(ReportRow(structure, "-", np.nan, np.nan, np.nan, np.nan, 0, failed))
    return rows


def report_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    buf.write(",".join(REPORT_COLUMNS) + "\n")
    for r in rows:
        buf.write(f"{r.structure},{r.parameter},{r.bias:.6f},{r.abs_bias:.6f},{r.ail:.6f},{r.coverage:.2f},{r.n},{r.failed}\n")
    return buf.getvalue()


def report_text(rows: list[ReportRow]) -> str:
    cells = [REPORT_COLUMNS] + [
        (r.structure, r.parameter, f"{r.bias:.3f}", f"{r.abs_bias:.3f}", f"{r.ail:.3f}", f"{r.coverage:.2f}%", str(r.n), str(r.failed))
        for r in rows
    ]
    widths = [max(len(c[i]) for c in cells) for i in range(len(REPORT_COLUMNS))]
    lines = ["  ".join(c[i].rjust(widths[i]) for i in range(len(c))) for c in cells]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"
