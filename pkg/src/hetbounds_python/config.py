"""Typed configuration and the TOML / manifest loader.

Every section of the run file maps onto one frozen dataclass. The resolved
:class:`RunConfig` serializes back to the same layout, which is what
``manifest.json`` stores, so a run can be repeated from its manifest.
"""

import dataclasses
import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .build_basis import BasisSpec
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
DEFAULT_GRID = tuple(round(0.01 * i, 2) for i in range(1, 100))
SELECTION_LEARNERS = ("logistic", "probability_forest")
QUANTILE_LEARNERS = ("linear_quantile", "quantile_forest")
SUBCOMMANDS = ("estimate", "simulate", "coverage", "power")


@dataclass(frozen=True)
class TableSchema:
    """Column roles of an input CSV."""

    treatment: str
    selection: str
    outcome: str
    covariates: tuple = ()
    propensity: str | None = None
    propensity_value: float | None = None
    categorical: tuple = ()
    delimiter: str = ","
    overlap_floor: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.overlap_floor < 0.5:
            raise ConfigurationError(f"overlap_floor must lie in (0, 0.5), got {self.overlap_floor}")
        unknown = set(self.categorical) - set(self.covariates)
        if unknown:
            raise ConfigurationError(f"categorical columns {sorted(unknown)} are not listed as covariates")


@dataclass(frozen=True)
class LearnerConfig:
    """Nuisance learner choice and hyperparameters."""

    selection_learner: str = "logistic"
    quantile_learner: str = "linear_quantile"
    selection_mode: str = "joint"
    trees: int = 1000
    honesty_fraction: float = 0.5
    subsample_fraction: float = 0.5
    min_leaf_size: int = 5
    max_features: float | None = None
    grid: tuple = DEFAULT_GRID
    ridge_scale: float = 1e-6
    clip: float = 0.01
    control_quantiles: bool = True
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.selection_learner not in SELECTION_LEARNERS:
            raise ConfigurationError(f"unknown selection learner {self.selection_learner!r}")
        if self.quantile_learner not in QUANTILE_LEARNERS:
            raise ConfigurationError(f"unknown quantile learner {self.quantile_learner!r}")
        if self.selection_mode not in ("joint", "per_arm"):
            raise ConfigurationError(f"selection_mode must be 'joint' or 'per_arm', got {self.selection_mode!r}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ConfigurationError("quantile grid must be strictly increasing with at least two levels")
        if grid[0] <= 0.0 or grid[-1] >= 1.0:
            raise ConfigurationError("quantile grid must lie inside (0, 1)")
        if self.trees < 1:
            raise ConfigurationError("trees must be positive")
        if not 0.0 <= self.honesty_fraction < 1.0:
            raise ConfigurationError("honesty_fraction must lie in [0, 1)")
        if not 0.0 < self.subsample_fraction <= 1.0:
            raise ConfigurationError("subsample_fraction must lie in (0, 1]")
        if self.min_leaf_size < 1:
            raise ConfigurationError("min_leaf_size must be positive")
        if not 0.0 < self.clip < 0.5:
            raise ConfigurationError("clip must lie in (0, 0.5)")
        if self.ridge_scale < 0:
            raise ConfigurationError("ridge_scale must be non-negative")


@dataclass(frozen=True)
class ScoreConfig:
    """Which form of the bound scores to evaluate.

    ``correction`` is ``"orthogonal"`` or ``"literal"``; ``normalization`` is
    ``"local"`` (per-unit selection probability) or ``"global"`` (cell mean);
    ``alpha_u_propensity`` picks the control propensity used in the first
    literal upper-bound correction term.
    """

    correction: str = "orthogonal"
    normalization: str = "local"
    alpha_u_propensity: str = "symmetric"
    rounding: bool = True

    def __post_init__(self):
        if self.correction not in ("orthogonal", "literal"):
            raise ConfigurationError(f"unknown score correction {self.correction!r}")
        if self.normalization not in ("local", "global"):
            raise ConfigurationError(f"unknown score normalization {self.normalization!r}")
        if self.alpha_u_propensity not in ("symmetric", "literal"):
            raise ConfigurationError(f"unknown alpha_u_propensity {self.alpha_u_propensity!r}")


@dataclass(frozen=True)
class InferenceConfig:
    """Critical-value solver settings."""

    event: str = "relaxed"
    evaluator: str = "analytic"
    lattice_step: float = 0.01
    memoize: bool = True

    def __post_init__(self):
        if self.event not in ("relaxed", "literal"):
            raise ConfigurationError(f"unknown coverage event {self.event!r}")
        if self.evaluator not in ("analytic", "qmc"):
            raise ConfigurationError(f"unknown probability evaluator {self.evaluator!r}")
        if not 0.0 < self.lattice_step <= 0.1:
            raise ConfigurationError("lattice_step must lie in (0, 0.1]")


@dataclass(frozen=True)
class EstimatorSettings:
    """Everything the estimation pipeline needs besides the data."""

    learners: LearnerConfig = field(default_factory=LearnerConfig)
    scores: ScoreConfig = field(default_factory=ScoreConfig)
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    candidates: tuple = (
        BasisSpec("constant"),
        BasisSpec("bspline", order=2, knots=0),
        BasisSpec("bspline", order=3, knots=1),
        BasisSpec("bspline", order=4, knots=1),
        BasisSpec("bspline", order=4, knots=3),
    )
    candidates_upper: tuple | None = None
    share_basis: bool = False
    alpha: float = 0.05
    folds: int = 10
    bootstrap_reps: int = 0
    seed: int = 0
    n_jobs: int = 1
    nuisance: str = "estimated"

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ConfigurationError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        if self.folds < 2:
            raise ConfigurationError(f"folds must be at least 2, got {self.folds}")
        if self.bootstrap_reps < 0:
            raise ConfigurationError("bootstrap_reps must be non-negative")
        if not self.candidates:
            raise ConfigurationError("at least one basis candidate is required")
        if self.nuisance not in ("estimated", "oracle"):
            raise ConfigurationError(f"nuisance must be 'estimated' or 'oracle', got {self.nuisance!r}")

    @property
    def upper_candidates(self):
        return self.candidates if self.candidates_upper is None else self.candidates_upper


@dataclass(frozen=True)
class RoyConfig:
    """Generalized Roy design with selection on unobservables."""

    n: int = 2000
    p: int = 10
    gamma1: float = 1.3263478740408408
    sigma1: float = 0.2
    sigma0: float = 0.2
    rho: float = 0.5
    treat_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ConfigurationError("n and p must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ConfigurationError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.sigma1 <= 0 or self.sigma0 <= 0:
            raise ConfigurationError("outcome noise scales must be positive")
        if not 0.0 < self.treat_prob < 1.0:
            raise ConfigurationError("treat_prob must lie in (0, 1)")

    @property
    def gamma(self):
        gamma = np.zeros(self.p)
        gamma[0] = self.gamma1
        return gamma


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid: explicit ``values`` or ``points`` spaced over [lo, hi]."""

    lo: float | None = None
    hi: float | None = None
    points: int = 50
    values: tuple | None = None

    def __post_init__(self):
        if self.values is None and self.points < 1:
            raise ConfigurationError("grid must have at least one point")

    def resolve(self, z_values):
        """Return grid points, defaulting the range to the observed ``z_values``."""
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        z_values = np.asarray(z_values, dtype=float)
        lo = float(np.min(z_values)) if self.lo is None else self.lo
        hi = float(np.max(z_values)) if self.hi is None else self.hi
        return np.linspace(lo, hi, self.points)

    @classmethod
    def parse(cls, text):
        """Parse the ``--grid`` flag: ``lo,hi,points``."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 3:
            raise ConfigurationError(f"--grid expects lo,hi,points, got {text!r}")
        try:
            return cls(lo=float(parts[0]), hi=float(parts[1]), points=int(parts[2]))
        except ValueError as exc:
            raise ConfigurationError(f"--grid expects lo,hi,points, got {text!r}") from exc


@dataclass(frozen=True)
class HeterogeneityConfig:
    columns: tuple = ()
    kinds: tuple = ()

    def __post_init__(self):
        if len(self.columns) != len(self.kinds):
            raise ConfigurationError("heterogeneity columns and kinds must have equal length")


@dataclass(frozen=True)
class StudyConfig:
    """Replication settings for the Roy model studies."""

    reps: int = 500
    nuisance: str = "estimated"
    z_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    deviations: tuple = (-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    oracle_draws: int = 10_000_000

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigurationError(f"reps must be positive, got {self.reps}")
        if self.nuisance not in ("estimated", "oracle"):
            raise ConfigurationError(f"nuisance must be 'estimated' or 'oracle', got {self.nuisance!r}")


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of one CLI run."""

    subcommand: str = "estimate"
    alpha: float = 0.05
    folds: int = 10
    seed: int = 0
    threads: int = 0
    bootstrap_reps: int = 0
    output_dir: str = "hetbounds_out"
    data_path: str | None = None
    data: TableSchema | None = None
    heterogeneity: HeterogeneityConfig = field(default_factory=HeterogeneityConfig)
    grid: GridSpec | None = None
    learners: LearnerConfig = field(default_factory=LearnerConfig)
    scores: ScoreConfig = field(default_factory=ScoreConfig)
    basis: tuple = EstimatorSettings.candidates
    basis_upper: tuple | None = None
    share_basis: bool = False
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    simulation: RoyConfig = field(default_factory=RoyConfig)
    study: StudyConfig = field(default_factory=StudyConfig)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigurationError(f"unknown subcommand {self.subcommand!r}")

    @property
    def n_jobs(self):
        return -1 if self.threads <= 0 else self.threads

    def settings(self):
        """Build :class:`EstimatorSettings` from the run configuration."""
        learners = dataclasses.replace(self.learners, seed=self.seed, n_jobs=self.n_jobs)
        return EstimatorSettings(
            learners=learners,
            scores=self.scores,
            inference=self.inference,
            candidates=tuple(self.basis),
            candidates_upper=None if self.basis_upper is None else tuple(self.basis_upper),
            share_basis=self.share_basis,
            alpha=self.alpha,
            folds=self.folds,
            bootstrap_reps=self.bootstrap_reps,
            seed=self.seed,
            n_jobs=self.n_jobs,
            nuisance=self.study.nuisance,
        )

    def to_dict(self):
        """Nested plain-data form, same layout as the TOML file."""
        return _plain(dataclasses.asdict(self))


def _plain(value):
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def _build(cls, mapping, section):
    if mapping is None:
        return None
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"[{section}] must be a table")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(mapping) - names
    if unknown:
        raise ConfigurationError(f"unknown keys in [{section}]: {sorted(unknown)}")
    values = {key: tuple(item) if isinstance(item, list) else item for key, item in mapping.items()}
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigurationError(f"[{section}]: {exc}") from exc


def _candidates(items, section):
    if items is None:
        return None
    if not isinstance(items, (list, tuple)) or not items:
        raise ConfigurationError(f"[{section}] candidates must be a non-empty list")
    return tuple(_build(BasisSpec, dict(item), section) for item in items)


def run_config_from_dict(mapping):
    """Build a :class:`RunConfig` from the nested TOML / manifest layout.

    :param mapping: parsed configuration
    :type mapping: dict
    :returns: the resolved configuration
    :rtype: RunConfig
    """
    mapping = dict(mapping)
    sections = {
        "data": TableSchema,
        "heterogeneity": HeterogeneityConfig,
        "grid": GridSpec,
        "learners": LearnerConfig,
        "scores": ScoreConfig,
        "inference": InferenceConfig,
        "simulation": RoyConfig,
        "study": StudyConfig,
    }
    values = {}
    for name, cls in sections.items():
        if name in mapping:
            values[name] = _build(cls, mapping.pop(name), name)
    if "basis" in mapping:
        basis = mapping.pop("basis")
        if isinstance(basis, dict):
            basis = dict(basis)
            values["basis"] = _candidates(basis.pop("candidates", None), "basis") or EstimatorSettings.candidates
            values["basis_upper"] = _candidates(basis.pop("candidates_upper", None), "basis")
            values["share_basis"] = bool(basis.pop("share", False))
            if basis:
                raise ConfigurationError(f"unknown keys in [basis]: {sorted(basis)}")
        else:
            values["basis"] = _candidates(basis, "basis")
    if "basis_upper" in mapping:
        values["basis_upper"] = _candidates(mapping.pop("basis_upper"), "basis_upper")
    if "share_basis" in mapping:
        values["share_basis"] = bool(mapping.pop("share_basis"))
    mapping.pop("package", None)
    mapping.pop("version", None)
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(mapping) - names
    if unknown:
        raise ConfigurationError(f"unknown top-level keys: {sorted(unknown)}")
    values.update(mapping)
    return RunConfig(**values)


def load_run_config(path):
    """Read a TOML run file or a previous ``manifest.json``.

    :param path: file to read
    :type path: str or pathlib.Path
    :returns: the resolved configuration
    :rtype: RunConfig
    :examples: load_run_config("study.toml")
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file {path} does not exist")
    try:
        if path.suffix == ".json":
            with path.open("r", encoding="utf-8") as handle:
                document = json.load(handle)
            document = document.get("config", document)
        else:
            with path.open("rb") as handle:
                document = tomllib.load(handle)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    logger.debug("loaded configuration from %s", path)
    return run_config_from_dict(document)


def application_preset(config):
    """Reporting choices of the empirical application: 90% level, 10 folds, forests."""
    learners = dataclasses.replace(
        config.learners, selection_learner="probability_forest", quantile_learner="quantile_forest"
    )
    return dataclasses.replace(config, alpha=0.10, folds=10, learners=learners)
