import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from pinnacle.models.chain import ChainSpec
from pinnacle.models.lattice import ModelParams
from pinnacle.utils.errors import ValidityError


class Backend(str, Enum):
    ANALYTIC = 'ANALYTIC'
    EMPIRICAL = 'EMPIRICAL'


TAIL_COLUMNS = ['h', 'tail', 'neg_log_tail', 'se', 'n_samples']


@dataclass(frozen=True, eq=False)
class TailEstimate:
    """
    Estimate of P(eta_0 >= h) over a range of h.

    Attributes:
        backend: ANALYTIC (leading-order surrogate) or EMPIRICAL (chain frequencies)
        params: model parameters the tail refers to
        table: one row per h, columns TAIL_COLUMNS; neg_log_tail keeps the analytic
            surrogate usable where the tail itself underflows
        rate_constant: constant the analytic rate was built with, if any
        spec: chain that produced the samples (EMPIRICAL)
    """
    backend: Backend
    params: ModelParams
    table: pd.DataFrame = field(repr=False)
    rate_constant: float | None = None
    spec: ChainSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, 'backend', Backend(self.backend))
        missing = [c for c in TAIL_COLUMNS if c not in self.table]
        if missing:
            raise ValidityError(f'Tail table is missing columns {missing}')
        table = self.table[TAIL_COLUMNS].sort_values('h').reset_index(drop=True)
        if table['h'].duplicated().any():
            raise ValidityError('Tail table has repeated h values')
        tail = table['tail'].to_numpy(dtype=np.float64)
        if ((tail < 0) | (tail > 1)).any():
            raise ValidityError('Tail values must lie in [0, 1]')
        neg_log = table['neg_log_tail'].to_numpy(dtype=np.float64)
        if (np.diff(neg_log) < -1e-12).any():
            raise ValidityError('Tail must be non-increasing in h')
        if self.backend == Backend.EMPIRICAL and (table['n_samples'] < 1).any():
            raise ValidityError('Empirical tail entries need at least one sample')
        object.__setattr__(self, 'table', table)

    @property
    def h_values(self) -> np.ndarray:
        return self.table['h'].to_numpy()

    @property
    def n_samples(self) -> int:
        return int(self.table['n_samples'].max()) if len(self.table) else 0

    def __call__(self, h: int) -> float:
        rows = self.table[self.table['h'] == h]
        if len(rows):
            return float(rows['tail'].iloc[0])
        if len(self.table) and h < self.table['h'].iloc[0] and self.backend == Backend.EMPIRICAL:
            return 1.0
        if len(self.table) and h > self.table['h'].iloc[-1] and self.backend == Backend.EMPIRICAL:
            return 0.0
        raise KeyError(f'h={h} is outside the tabulated range')

    @classmethod
    def from_frame(cls, data: pd.DataFrame, params: ModelParams, backend: Backend = Backend.EMPIRICAL) -> 'TailEstimate':
        """Build from a table holding at least h and tail; missing columns are derived"""
        data = data.copy()
        if 'neg_log_tail' not in data:
            with np.errstate(divide='ignore'):
                data['neg_log_tail'] = -np.log(data['tail'].astype(np.float64))
        if 'se' not in data:
            data['se'] = 0.0
        if 'n_samples' not in data:
            data['n_samples'] = 1
        return cls(backend=backend, params=params, table=data[TAIL_COLUMNS])


def tail_frame(h_values, neg_log_tail, se=None, n_samples=None) -> pd.DataFrame:
    neg_log_tail = np.asarray(neg_log_tail, dtype=np.float64)
    n = len(neg_log_tail)
    return pd.DataFrame({
        'h': np.asarray(h_values, dtype=np.int64),
        'tail': np.exp(-neg_log_tail),
        'neg_log_tail': neg_log_tail,
        'se': np.zeros(n) if se is None else np.asarray(se, dtype=np.float64),
        'n_samples': np.ones(n, dtype=np.int64) if n_samples is None else np.asarray(n_samples, dtype=np.int64),
    })


def is_finite_constant(c) -> bool:
    return c is not None and math.isfinite(c) and c > 0
