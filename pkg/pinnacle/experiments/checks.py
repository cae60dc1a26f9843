import logging
import math
from typing import NamedTuple

import numpy as np
import pandas as pd

from pinnacle.models.chain import ChainSpec
from pinnacle.models.lattice import HeightConfig
from pinnacle.models.tail import TailEstimate
from pinnacle.simulations.sampler import run_chain
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError


logger = logging.getLogger(__name__)

N_BATCHES = 20


def check_tile_relation(beta: float, h_range, tail: TailEstimate) -> pd.DataFrame:
    """
    Admissible tile side lengths (4 beta + 2) / tail(h) <= l <= (4 beta + 4) / tail(h)

    Args:
        beta: inverse temperature
        h_range: levels to tabulate
        tail: tail estimate covering every level in h_range with a positive value

    Returns:
        DataFrame with TILE_COLUMNS; log_l_min stays finite where l_min overflows
    """
    if not beta > 0:
        raise DomainError(f'beta must be positive, got {beta}')
    table = tail.table.set_index('h')
    rows = []
    for h in h_range:
        if h not in table.index:
            raise DomainError(f'Tail has no value at h={h}')
        neg_log = float(table.at[h, 'neg_log_tail'])
        if math.isinf(neg_log):
            raise DomainError(f'Tail vanishes at h={h}; no tile side satisfies the relation')
        with np.errstate(over='ignore'):
            scale = float(np.exp(neg_log))
        rows.append((
            int(h),
            float(table.at[h, 'tail']),
            (4 * beta + 2) * scale,
            (4 * beta + 4) * scale,
            math.log(4 * beta + 2) + neg_log,
        ))
    return pd.DataFrame(rows, columns=constants.TILE_COLUMNS.split(', '))


class EquilibrationCheck(NamedTuple):
    observable: str
    hot_mean: float
    cold_mean: float
    hot_se: float
    cold_se: float

    @property
    def difference(self) -> float:
        return abs(self.hot_mean - self.cold_mean)

    @property
    def tolerance(self) -> float:
        return 2 * math.hypot(self.hot_se, self.cold_se)

    @property
    def agree(self) -> bool:
        return self.difference <= self.tolerance


def pyramid_start(L: int, boundary_height: int, height: int) -> HeightConfig:
    """boundary + min(height, distance to the outside): admissible for every p, floor included"""
    idx = np.arange(L)
    depth = np.minimum(idx + 1, L - idx)
    distance = np.minimum.outer(depth, depth)
    return HeightConfig(heights=boundary_height + np.minimum(height, distance), boundary_height=boundary_height)


def batch_means(values, n_batches: int = N_BATCHES) -> tuple[float, float]:
    """Mean and batch-means standard error of a correlated series"""
    values = np.asarray(values, dtype=np.float64)
    n_batches = min(n_batches, len(values))
    if n_batches < 2:
        raise DomainError(f'Batch means need at least 2 samples, got {len(values)}')
    means = np.array([b.mean() for b in np.array_split(values, n_batches)])
    return float(values.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))


def check_equilibration(spec: ChainSpec, observable: str = 'mean_height', hot_height: int | None = None) -> EquilibrationCheck:
    """
    Run the chain from a hot start (a pyramid hot_height above the boundary, default
    L // 4) and from a cold flat start, and compare the time averages of `observable`

    Args:
        spec: chain to check; needs at least two retained samples
        observable: one of the sample columns other than sweep_index
        hot_height: plateau height of the hot start

    Returns:
        EquilibrationCheck; `agree` is True when the means differ by at most 2 combined SE
    """
    columns = constants.SAMPLE_COLUMNS.split(', ')[1:]
    if observable not in columns:
        raise DomainError(f'observable must be one of {columns}, got {observable!r}')
    if spec.n_retained < 2:
        raise DomainError(f'Equilibration check needs at least 2 retained samples, got {spec.n_retained}')
    j = spec.params.boundary_height
    hot_height = max(spec.L // 4, 1) if hot_height is None else hot_height
    if hot_height < 0:
        raise DomainError(f'hot_height must be >= 0, got {hot_height}')

    hot = run_chain(spec, pyramid_start(spec.L, j, hot_height)).observables[observable]
    cold = run_chain(spec, HeightConfig.flat(spec.L, j, j)).observables[observable]
    hot_mean, hot_se = batch_means(hot)
    cold_mean, cold_se = batch_means(cold)
    check = EquilibrationCheck(observable, hot_mean, cold_mean, hot_se, cold_se)
    log = logger.info if check.agree else logger.warning
    log('%s: hot %.4f +- %.4f, cold %.4f +- %.4f (L=%d)', observable, hot_mean, hot_se, cold_mean, cold_se, spec.L)
    return check
