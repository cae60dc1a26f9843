import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError


logger = logging.getLogger(__name__)


class Schedule(str, Enum):
    SEQUENTIAL = 'SEQUENTIAL'
    CHECKERBOARD = 'CHECKERBOARD'


@dataclass(frozen=True)
class ChainSpec:
    params: ModelParams
    L: int
    seed: int = constants.DEFAULT_SEED
    sweeps_burnin: int | None = None
    sweeps_sample: int = 0
    thinning: int = 1
    schedule: Schedule = Schedule.SEQUENTIAL
    keep_snapshots: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'schedule', Schedule(self.schedule))
        if self.L < 1:
            raise DomainError(f'L must be positive, got {self.L}')
        if self.sweeps_burnin is None:
            object.__setattr__(self, 'sweeps_burnin', constants.BURNIN_PER_SIDE * self.L)
        if self.thinning < 1:
            raise DomainError(f'thinning must be >= 1, got {self.thinning}')
        if self.sweeps_burnin < 0 or self.sweeps_sample < 0:
            raise DomainError('sweep counts must be >= 0')
        if self.params.beta < constants.ROUGHENING_BETA:
            logger.warning('beta=%g is below the roughening estimate %g; the surface is rough',
                           self.params.beta, constants.ROUGHENING_BETA)

    @property
    def n_retained(self) -> int:
        return self.sweeps_sample // self.thinning

    @property
    def key(self) -> np.uint64:
        return np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF)

    def with_seed(self, seed: int) -> 'ChainSpec':
        return ChainSpec(
            params=self.params, L=self.L, seed=seed, sweeps_burnin=self.sweeps_burnin,
            sweeps_sample=self.sweeps_sample, thinning=self.thinning, schedule=self.schedule,
            keep_snapshots=self.keep_snapshots,
        )

    def with_params(self, params: ModelParams) -> 'ChainSpec':
        return ChainSpec(
            params=params, L=self.L, seed=self.seed, sweeps_burnin=self.sweeps_burnin,
            sweeps_sample=self.sweeps_sample, thinning=self.thinning, schedule=self.schedule,
            keep_snapshots=self.keep_snapshots,
        )


@dataclass(frozen=True, eq=False)
class SampleStream:
    """
    Retained samples of one chain.

    Attributes:
        spec: the chain that produced the samples
        observables: one row per retained sample, columns SAMPLE_COLUMNS
        snapshots: (n, L, L) heights of every retained sample, or None when not kept
        final: the configuration after the last sweep
    """
    spec: ChainSpec
    observables: pd.DataFrame
    snapshots: np.ndarray | None
    final: HeightConfig

    def __post_init__(self):
        if self.snapshots is not None:
            self.snapshots.setflags(write=False)

    def __len__(self):
        return len(self.observables)

    @property
    def center_heights(self) -> np.ndarray:
        return self.observables['center_height'].to_numpy()

    def snapshot(self, k: int) -> HeightConfig:
        if self.snapshots is None:
            raise DomainError('Stream was run with keep_snapshots=False')
        return HeightConfig(heights=self.snapshots[k], boundary_height=self.spec.params.boundary_height)


@dataclass(frozen=True, eq=False)
class PairedStream:
    """Two chains driven by shared uniforms, with the per-sweep ordering check"""
    lower: SampleStream
    upper: SampleStream
    ordered: np.ndarray = field(repr=False)

    @property
    def violations(self) -> int:
        return int((~self.ordered).sum())
