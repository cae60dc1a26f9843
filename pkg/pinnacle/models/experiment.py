from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from pinnacle.models.chain import ChainSpec, Schedule
from pinnacle.models.lattice import ModelParams
from pinnacle.models.tail import Backend
from pinnacle.utils import constants
from pinnacle.utils.errors import ConfigError


class ExperimentKind(str, Enum):
    MAX_HEIGHT = 'MAX_HEIGHT'
    FLOOR_PLATEAU = 'FLOOR_PLATEAU'
    LDP_TAIL = 'LDP_TAIL'
    TILE_RELATION = 'TILE_RELATION'


def _member(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(str(value).strip().upper())
    except ValueError as err:
        raise ConfigError(f'{value!r} is not one of {[m.value for m in enum_cls]}') from err


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One experiment: the model, the box sides, and the chain settings shared by every trial.
    burnin=None means 200 sweeps per unit of L.
    """
    experiment: ExperimentKind
    params: ModelParams
    L_values: tuple[int, ...]
    trials: int = 1
    seed: int = constants.DEFAULT_SEED
    burnin: int | None = None
    sweeps: int = 0
    thinning: int = 1
    schedule: Schedule = Schedule.SEQUENTIAL
    output_dir: Path = Path(constants.OUTPUT_DIR)
    h_min: int = 1
    h_max: int = 10
    backend: Backend = Backend.ANALYTIC
    workers: int = constants.WORKERS
    coupled: bool = False
    rate_constant: float | None = None

    def __post_init__(self):
        object.__setattr__(self, 'experiment', _member(ExperimentKind, self.experiment))
        object.__setattr__(self, 'schedule', _member(Schedule, self.schedule))
        object.__setattr__(self, 'backend', _member(Backend, self.backend))
        object.__setattr__(self, 'L_values', tuple(int(L) for L in self.L_values))
        object.__setattr__(self, 'output_dir', Path(self.output_dir))
        if not self.L_values:
            raise ConfigError('At least one L is required')
        small = [L for L in self.L_values if L < constants.MIN_EXPERIMENT_SIDE]
        if small:
            raise ConfigError(f'Every L must be >= {constants.MIN_EXPERIMENT_SIDE}, got {small}')
        if self.trials < 1:
            raise ConfigError(f'trials must be >= 1, got {self.trials}')
        if self.sweeps < 0 or (self.burnin is not None and self.burnin < 0):
            raise ConfigError('sweep counts must be >= 0')
        if self.thinning < 1:
            raise ConfigError(f'thin must be >= 1, got {self.thinning}')
        if self.h_min > self.h_max:
            raise ConfigError(f'h_min={self.h_min} exceeds h_max={self.h_max}')
        if self.workers < 1:
            raise ConfigError(f'workers must be >= 1, got {self.workers}')

    def trial_seed(self, L: int, trial: int) -> int:
        """Independent per-trial seed derived from (seed, L, trial)"""
        return int(np.random.SeedSequence([self.seed, L, trial]).generate_state(1, dtype=np.uint64)[0])

    def chain_spec(self, L: int, trial: int, params: ModelParams | None = None, keep_snapshots: bool = False) -> ChainSpec:
        return ChainSpec(
            params=params or self.params,
            L=L,
            seed=self.trial_seed(L, trial),
            sweeps_burnin=self.burnin,
            sweeps_sample=self.sweeps,
            thinning=self.thinning,
            schedule=self.schedule,
            keep_snapshots=keep_snapshots,
        )


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """
    Attributes:
        config: the experiment that produced the report
        trials: per-(L, trial) rows, ordered by L then trial
        summary: per-L (or per-h) aggregates
        tables: further named tables (histograms, level statistics, fits)
    """
    config: ExperimentConfig
    trials: pd.DataFrame
    summary: pd.DataFrame
    tables: dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.config.experiment.value.lower()

    def frames(self) -> dict[str, pd.DataFrame]:
        return {'trials': self.trials, 'summary': self.summary, **self.tables}

    def write(self, storage) -> list[Path]:
        """Write every table as <experiment>_<table>.csv through a Storage"""
        paths = []
        for key, frame in self.frames().items():
            table = f'{self.name}_{key}'
            storage.write_frame(table, frame, ', '.join(str(c) for c in frame.columns))
            paths.append(storage.path(table))
        return paths
