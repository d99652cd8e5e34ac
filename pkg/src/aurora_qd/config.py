"""Run and suite configuration: dataclasses plus INI loading.

The INI layout mirrors the dataclass structure section by section; every
key is optional and falls back to the dataclass default. Unknown sections
or keys raise, so typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, replace
from pathlib import Path

from .archive import CuriosityConfig
from .extractors import DEFAULT_UPDATE_BATCHES
from .tasks import ArenaConfig, BallisticConfig

VARIANTS = (
    "hand_coded", "genotype",
    "pca_pre", "pca_inc", "ae_pre", "ae_inc",
    "cvt_prior", "cvt_blind",
)

TRAINABLE_VARIANTS = ("pca_inc", "ae_inc")
PRETRAINED_VARIANTS = ("pca_pre", "ae_pre")
CVT_VARIANTS = ("cvt_prior", "cvt_blind")
# Variants that need a prior dataset, hence a task with a genotype grid.
PRIOR_VARIANTS = ("pca_pre", "ae_pre", "cvt_prior")


@dataclass(frozen=True)
class DrConfig:
    """Dimensionality-reduction settings shared by the learned variants."""

    latent_dim: int = 2
    conv_maps: int = 2
    kernel_size: int = 5
    stride: int = 2
    hidden_units: int = 5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    minibatch_size: int = 32
    max_epochs: int = 20000
    early_stop_window: int = 500
    n_repeats: int = 5
    val_fraction: float = 0.25
    warm_start: bool = False


@dataclass(frozen=True)
class CvtSettings:
    prior_samples: int = 10000
    prior_k: int = 10000
    blind_k: int = 100000
    refine_blind: bool = False
    kmeans_max_iter: int = 100
    centroids_path: str | None = None


@dataclass(frozen=True)
class MetricsConfig:
    klc_bins: int = 30
    klc_eps: float = 1e-6
    diversity_bins: int = 10


@dataclass(frozen=True)
class RunConfig:
    """Everything a single run needs; see configs/ for INI examples."""

    task: str = "ballistic"
    variant: str = "hand_coded"
    batches: int = 5000
    batch_size: int = 200
    seed: int = 0
    n_init: int | None = None
    target_capacity: int = 10000
    l_min: float = 1e-6
    sigma_fraction: float = 0.05
    update_batches: tuple = DEFAULT_UPDATE_BATCHES
    use_grid_index: bool = False
    reference: str | None = None
    out: str | None = None
    curiosity: CuriosityConfig = field(default_factory=CuriosityConfig)
    ballistic: BallisticConfig = field(default_factory=BallisticConfig)
    airhockey: ArenaConfig = field(default_factory=ArenaConfig)
    dr: DrConfig = field(default_factory=DrConfig)
    cvt: CvtSettings = field(default_factory=CvtSettings)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)

    @property
    def resolved_n_init(self):
        return self.batch_size if self.n_init is None else self.n_init

    def validate(self):
        if self.task not in ("ballistic", "airhockey"):
            raise ValueError(f"unknown task '{self.task}'")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant '{self.variant}'; choose from {VARIANTS}")
        if self.batches < 1:
            raise ValueError("batches must be at least 1")
        if self.batch_size < 0:
            raise ValueError("batch_size must be non-negative")
        if self.resolved_n_init < 2:
            raise ValueError("initial population must have at least 2 individuals")
        if self.variant in PRIOR_VARIANTS and self.task != "ballistic":
            raise ValueError(
                f"variant '{self.variant}' needs a prior genotype grid, "
                f"which task '{self.task}' does not define"
            )
        return self


@dataclass(frozen=True)
class SuiteConfig:
    """A batch of runs: every variant times every replication seed."""

    run: RunConfig = field(default_factory=RunConfig)
    variants: tuple = ("hand_coded", "genotype", "pca_inc", "ae_inc", "cvt_blind")
    replications: int = 5
    base_seed: int = 1
    parallel: int = 1

    def validate(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.parallel < 1:
            raise ValueError("parallel must be at least 1")
        for v in self.variants:
            replace(self.run, variant=v).validate()
        return self


def _parse_bool(raw, key):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"cannot parse boolean value '{raw}' for key '{key}'")


def _section_kwargs(parser, section, cls, special=()):
    """Cast a section's keys using the dataclass field defaults as type hints."""
    if not parser.has_section(section):
        return {}
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in parser.items(section):
        if key in special:
            continue
        if key not in defaults:
            raise ValueError(f"unknown key '{key}' in section [{section}]")
        default = defaults[key]
        raw = raw.strip()
        if raw == "":
            continue
        if isinstance(default, bool):
            kwargs[key] = _parse_bool(raw, key)
        elif isinstance(default, int):
            kwargs[key] = int(raw)
        elif isinstance(default, float):
            kwargs[key] = float(raw)
        elif isinstance(default, tuple):
            parts = [p for p in raw.replace(",", " ").split() if p]
            sample = default[0] if default else 0.0
            cast = int if isinstance(sample, int) else float
            kwargs[key] = tuple(cast(p) for p in parts)
        else:
            kwargs[key] = raw
    return kwargs


_RUN_INT_KEYS = {"batches", "batch_size", "seed", "n_init", "target_capacity"}
_RUN_FLOAT_KEYS = {"l_min", "sigma_fraction"}
_RUN_BOOL_KEYS = {"use_grid_index"}
_RUN_STR_KEYS = {"task", "variant", "reference", "out"}
_RUN_TUPLE_KEYS = {"update_batches"}


def _parse_run_section(parser):
    kwargs = {}
    if not parser.has_section("run"):
        return kwargs
    for key, raw in parser.items("run"):
        raw = raw.strip()
        if raw == "":
            continue
        if key in _RUN_INT_KEYS:
            kwargs[key] = int(raw)
        elif key in _RUN_FLOAT_KEYS:
            kwargs[key] = float(raw)
        elif key in _RUN_BOOL_KEYS:
            kwargs[key] = _parse_bool(raw, key)
        elif key in _RUN_TUPLE_KEYS:
            parts = [p for p in raw.replace(",", " ").split() if p]
            kwargs[key] = tuple(int(p) for p in parts)
        elif key in _RUN_STR_KEYS:
            kwargs[key] = raw
        else:
            raise ValueError(f"unknown key '{key}' in section [run]")
    return kwargs


def _parse_airhockey_section(parser):
    if not parser.has_section("airhockey"):
        return {}
    pair_keys = {"base_x", "base_y", "puck_start_x", "puck_start_y"}
    kwargs = _section_kwargs(parser, "airhockey", ArenaConfig, special=pair_keys)
    raw = dict(parser.items("airhockey"))
    base = list(ArenaConfig.base)
    puck = list(ArenaConfig.puck_start)
    if "base" in kwargs:
        base = list(kwargs.pop("base"))
    if "puck_start" in kwargs:
        puck = list(kwargs.pop("puck_start"))
    for i, key in enumerate(("base_x", "base_y")):
        if key in raw and raw[key].strip():
            base[i] = float(raw[key])
    for i, key in enumerate(("puck_start_x", "puck_start_y")):
        if key in raw and raw[key].strip():
            puck[i] = float(raw[key])
    kwargs["base"] = tuple(base)
    kwargs["puck_start"] = tuple(puck)
    return kwargs


_KNOWN_SECTIONS = ("run", "suite", "curiosity", "ballistic", "airhockey",
                   "dr", "cvt", "metrics")


def load_run_config(path):
    """Load a RunConfig from an INI file; missing keys keep their defaults."""
    parser = _read(path)
    run_kwargs = _parse_run_section(parser)
    config = RunConfig(
        curiosity=CuriosityConfig(**_section_kwargs(parser, "curiosity",
                                                    CuriosityConfig)),
        ballistic=BallisticConfig(**_section_kwargs(parser, "ballistic",
                                                    BallisticConfig)),
        airhockey=ArenaConfig(**_parse_airhockey_section(parser)),
        dr=DrConfig(**_section_kwargs(parser, "dr", DrConfig)),
        cvt=CvtSettings(**_section_kwargs(parser, "cvt", CvtSettings)),
        metrics=MetricsConfig(**_section_kwargs(parser, "metrics", MetricsConfig)),
        **run_kwargs,
    )
    return config.validate()


def load_suite_config(path):
    """Load a SuiteConfig; the [suite] section rides on top of a run config."""
    parser = _read(path)
    run = load_run_config(path)
    kwargs = {}
    if parser.has_section("suite"):
        for key, raw in parser.items("suite"):
            raw = raw.strip()
            if raw == "":
                continue
            if key in ("replications", "base_seed", "parallel"):
                kwargs[key] = int(raw)
            elif key == "variants":
                kwargs[key] = tuple(p for p in raw.replace(",", " ").split() if p)
            else:
                raise ValueError(f"unknown key '{key}' in section [suite]")
    return SuiteConfig(run=run, **kwargs).validate()


def _read(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read(path)
    for section in parser.sections():
        if section not in _KNOWN_SECTIONS:
            raise ValueError(f"unknown section [{section}] in {path}")
    return parser


def config_to_dict(config):
    """JSON-ready nested dict snapshot of a config dataclass."""
    return dataclasses.asdict(config)


_NESTED_SECTIONS = {
    "curiosity": CuriosityConfig,
    "ballistic": BallisticConfig,
    "airhockey": ArenaConfig,
    "dr": DrConfig,
    "cvt": CvtSettings,
    "metrics": MetricsConfig,
}


def config_from_dict(data):
    """Rebuild a RunConfig from a :func:`config_to_dict` snapshot."""
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED_SECTIONS:
            sub = {k: tuple(v) if isinstance(v, list) else v
                   for k, v in value.items()}
            kwargs[key] = _NESTED_SECTIONS[key](**sub)
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return RunConfig(**kwargs)
