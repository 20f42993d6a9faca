"""Flat run/simulation/study configs built from ``key = value`` mappings.

Prior boxes are given as ``prior_<param> = [lo, hi]`` and per-parameter
proposal scales as ``scale_<param> = s``.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import asdict, dataclass, field, fields

from .bsl import MCMCSettings
from .errors import ConfigError
from .latent import Kind
from .simstudy import GRID_PARAMS, StudyConfig


def _split(cfg: dict, prefix: str) -> dict:
    return {k[len(prefix):]: v for k, v in cfg.items() if k.startswith(prefix)}


# run metadata echoed into output headers; ignored when a header is fed back as config
METADATA_KEYS = {"region", "T", "acceptance_rate"}


def _check_keys(cfg: dict, allowed: set[str], prefixes=("prior_", "scale_")):
    unknown = [k for k in cfg if k not in allowed and not k.startswith(prefixes)]
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")


def _box(name, v):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"prior_{name} must be a two-element list")
    return (float(v[0]), float(v[1]))


SAMPLER_KEYS = {f.name for f in fields(MCMCSettings)} - {"proposal_scales"}


def _sampler(cfg: dict, defaults: MCMCSettings | None = None) -> MCMCSettings:
    base = asdict(defaults) if defaults else {}
    base.update({k: cfg[k] for k in SAMPLER_KEYS if k in cfg})
    scales = {k: float(v) for k, v in _split(cfg, "scale_").items()}
    base["proposal_scales"] = scales or None
    try:
        return MCMCSettings(**base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class RunConfig:
    model: Kind = Kind.AR1
    priors: dict = field(default_factory=dict)
    sampler: MCMCSettings = field(default_factory=MCMCSettings)
    n_draws_per_theta: int = 10
    max_reconstruct_draws: int = 1000
    A0: float | None = None
    use_covariates: bool = True

    @classmethod
    def from_mapping(cls, cfg: dict) -> "RunConfig":
        _check_keys(cfg, SAMPLER_KEYS | METADATA_KEYS
                    | {"model", "n_draws_per_theta", "max_reconstruct_draws", "A0", "use_covariates"})
        try:
            return cls(
                model=Kind(cfg.get("model", "AR1")),
                priors={k: _box(k, v) for k, v in _split(cfg, "prior_").items()},
                sampler=_sampler(cfg),
                n_draws_per_theta=int(cfg.get("n_draws_per_theta", 10)),
                max_reconstruct_draws=int(cfg.get("max_reconstruct_draws", 1000)),
                A0=cfg.get("A0"),
                use_covariates=bool(cfg.get("use_covariates", True)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def echo(self) -> dict:
        out = {"model": self.model.value}
        out.update({k: v for k, v in asdict(self.sampler).items() if k != "proposal_scales"})
        out.update({f"scale_{k}": v for k, v in (self.sampler.proposal_scales or {}).items()})
        out.update({f"prior_{k}": list(v) for k, v in self.priors.items()})
        out.update(n_draws_per_theta=self.n_draws_per_theta, max_reconstruct_draws=self.max_reconstruct_draws,
                   use_covariates=self.use_covariates)
        if self.A0 is not None:
            out["A0"] = self.A0
        return out


TRUTH_KEYS = ("phi0", "phi1", "alpha0", "alpha1", "alpha", "theta", "sigma_eps", "omega", "q", "m", "k", "beta1", "beta2")


@dataclass
class SimConfig:
    """Truth and layout of a synthetic series.

    Covariate windows are 0-based half-open week ranges ``[start, end)``;
    ``vaccination_start`` switches the second indicator on for good.
    """

    model: Kind = Kind.AR1
    T: int = 104
    name: str = "synthetic_region"
    region: str = "synthetic"
    start_date: dt.date = dt.date(2020, 2, 23)
    A0: float = 10.0
    seed: int = 0
    truth: dict = field(default_factory=dict)
    confinement: tuple[int, int] | None = None
    vaccination_start: int | None = None

    @classmethod
    def from_mapping(cls, cfg: dict) -> "SimConfig":
        allowed = {"model", "T", "name", "region", "start_date", "A0", "seed", "confinement", "vaccination_start"}
        _check_keys(cfg, allowed | set(TRUTH_KEYS), prefixes=())
        start = cfg.get("start_date", "2020-02-23")
        try:
            start = start if isinstance(start, dt.date) else dt.date.fromisoformat(str(start))
            conf = cfg.get("confinement")
            return cls(
                model=Kind(cfg.get("model", "AR1")),
                T=int(cfg.get("T", 104)),
                name=str(cfg.get("name", "synthetic_region")),
                region=str(cfg.get("region", "synthetic")),
                start_date=start,
                A0=float(cfg.get("A0", 10.0)),
                seed=int(cfg.get("seed", 0)),
                truth={k: float(cfg[k]) for k in TRUTH_KEYS if k in cfg},
                confinement=tuple(int(v) for v in conf) if conf else None,
                vaccination_start=cfg.get("vaccination_start"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def echo(self) -> dict:
        out = {"model": self.model.value, "T": self.T, "name": self.name, "region": self.region,
               "start_date": self.start_date.isoformat(), "A0": self.A0, "seed": self.seed}
        if self.confinement:
            out["confinement"] = list(self.confinement)
        if self.vaccination_start is not None:
            out["vaccination_start"] = self.vaccination_start
        out.update(self.truth)
        return out


def study_from_mapping(cfg: dict) -> StudyConfig:
    """Study config. ``grid_values`` sets the default levels; ``grid_<param>`` overrides one parameter."""
    scalar = {"T", "replicates", "n_cells", "phi0", "sigma_eps", "m", "beta", "beta_binding", "k", "A0", "seed"}
    _check_keys(cfg, SAMPLER_KEYS | scalar | {"structures", "grid_values"}, prefixes=("prior_", "scale_", "grid_"))
    defaults = StudyConfig()
    kw = {k: cfg[k] for k in scalar if k in cfg}
    if kw.get("n_cells") == 0:
        kw["n_cells"] = None
    grid = {}
    levels = cfg.get("grid_values")
    names = {n for ps in GRID_PARAMS.values() for n in ps}
    if levels is not None:
        grid = {n: tuple(float(v) for v in levels) for n in names}
    for k, v in _split(cfg, "grid_").items():
        if k == "values":
            continue
        if k not in names:
            raise ConfigError(f"grid_{k}: not a grid parameter")
        grid[k] = tuple(float(x) for x in v)
    priors = dict(defaults.priors)
    priors.update({k: _box(k, v) for k, v in _split(cfg, "prior_").items()})
    sampler_cfg = {k: v for k, v in cfg.items() if k in SAMPLER_KEYS or k.startswith("scale_")}
    try:
        return StudyConfig(
            structures=tuple(cfg.get("structures", ("AR1",))),
            grid=grid,
            priors=priors,
            sampler=_sampler(sampler_cfg, defaults.sampler),
            **kw,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def study_echo(c: StudyConfig) -> dict:
    out = {"structures": [s.value for s in c.structures]}
    out.update({k: getattr(c, k) for k in ("T", "replicates", "phi0", "sigma_eps", "m", "beta", "beta_binding", "k", "A0", "seed")})
    out["n_cells"] = c.n_cells or 0
    out.update({f"grid_{k}": list(v) for k, v in sorted(c.grid.items())})
    out.update({f"prior_{k}": list(v) for k, v in c.priors.items()})
    out.update({k: v for k, v in asdict(c.sampler).items() if k not in ("proposal_scales", "seed")})
    out.update({f"scale_{k}": v for k, v in (c.sampler.proposal_scales or {}).items()})
    return out
