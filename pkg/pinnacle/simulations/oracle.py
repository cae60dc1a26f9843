import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, StateSpaceTooLarge


logger = logging.getLogger(__name__)

CHUNK_STATES = 1 << 18


@dataclass(frozen=True, eq=False)
class TruncatedEnsemble:
    """
    Exact Gibbs law on a tiny box with heights cut to [lo, hi].

    States are coded in mixed radix: site k = row * L + col holds digit
    height - lo, site 0 most significant. `codes` lists the admissible codes in
    increasing order, or is None when every code in range(n_states) is
    admissible (the dense case); `probabilities` is aligned with it.

    Attributes:
        L: box side
        K: height cutoff
        params: model parameters
        lo, hi: height range
        codes: admissible codes or None
        probabilities: normalized probability of each admissible state
        log_partition: log Z over the truncated state space
    """
    L: int
    K: int
    params: ModelParams
    lo: int
    hi: int
    codes: np.ndarray | None = field(repr=False)
    probabilities: np.ndarray = field(repr=False)
    log_partition: float

    @property
    def base(self) -> int:
        return self.hi - self.lo + 1

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def n_states(self) -> int:
        return len(self.probabilities)

    @property
    def partition_value(self) -> float:
        return math.exp(self.log_partition)

    def encode(self, heights: np.ndarray) -> np.ndarray:
        """Codes of an (n, L, L) stack of configs; -1 where a height is out of range"""
        flat = np.asarray(heights, dtype=np.int64).reshape(-1, self.n_sites) - self.lo
        inside = ((flat >= 0) & (flat < self.base)).all(axis=1)
        powers = self.base ** np.arange(self.n_sites - 1, -1, -1, dtype=np.int64)
        codes = flat @ powers
        codes[~inside] = -1
        return codes

    def decode(self, code: int) -> HeightConfig:
        digits = []
        for _ in range(self.n_sites):
            code, d = divmod(int(code), self.base)
            digits.append(d)
        heights = np.array(digits[::-1], dtype=np.int64).reshape(self.L, self.L) + self.lo
        return HeightConfig(heights=heights, boundary_height=self.params.boundary_height)

    def index_of(self, codes: np.ndarray) -> np.ndarray:
        """Row of each code in `probabilities`, -1 when not admissible"""
        codes = np.asarray(codes, dtype=np.int64)
        if self.codes is None:
            return np.where((codes >= 0) & (codes < self.n_states), codes, -1)
        pos = np.searchsorted(self.codes, codes)
        pos = np.clip(pos, 0, len(self.codes) - 1)
        return np.where(self.codes[pos] == codes, pos, -1)

    def probability(self, config: HeightConfig) -> float:
        idx = int(self.index_of(self.encode(config.heights[None]))[0])
        return 0.0 if idx < 0 else float(self.probabilities[idx])

    def _site_digits(self, site: tuple[int, int]):
        """Yield (slice, digits of `site`) chunk by chunk over the table"""
        s = site[0] * self.L + site[1]
        power = self.base ** (self.n_sites - 1 - s)
        for start in range(0, self.n_states, CHUNK_STATES):
            stop = min(start + CHUNK_STATES, self.n_states)
            codes = np.arange(start, stop, dtype=np.int64) if self.codes is None else self.codes[start:stop]
            yield slice(start, stop), (codes // power) % self.base

    def marginal_law(self, site: tuple[int, int]) -> pd.Series:
        """P(eta_site = k) for k in [lo, hi]"""
        if not (0 <= site[0] < self.L and 0 <= site[1] < self.L):
            raise DomainError(f'Site {site} is not inside the {self.L}x{self.L} box')
        law = np.zeros(self.base)
        for rows, digits in self._site_digits(site):
            law += np.bincount(digits, weights=self.probabilities[rows], minlength=self.base)
        return pd.Series(law, index=np.arange(self.lo, self.hi + 1), name='probability')

    def to_frame(self) -> pd.DataFrame:
        codes = np.arange(self.n_states, dtype=np.int64) if self.codes is None else self.codes
        return pd.DataFrame({'config_hash': codes, 'probability': self.probabilities})


def height_range(K: int, params: ModelParams) -> tuple[int, int]:
    """[j-K, j+K], cut at 0 under the floor"""
    j = params.boundary_height
    lo, hi = j - K, j + K
    if params.floor:
        lo = max(0, lo)
    return lo, hi


def _chunk_energy(codes: np.ndarray, L: int, lo: int, base: int, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Energies and admissibility of a block of codes"""
    n = L * L
    digits = np.empty((len(codes), n), dtype=np.int64)
    rest = codes.copy()
    for k in range(n - 1, -1, -1):
        rest, digits[:, k] = np.divmod(rest, base)
    P = np.full((len(codes), L + 2, L + 2), params.boundary_height, dtype=np.int64)
    P[:, 1:-1, 1:-1] = digits.reshape(-1, L, L) + lo
    dh = P[:, 1:-1, 1:] - P[:, 1:-1, :-1]
    dv = P[:, 1:, 1:-1] - P[:, :-1, 1:-1]
    ok = np.ones(len(codes), dtype=bool)
    if params.is_rsos:
        ok = (np.abs(dh) <= 1).all(axis=(1, 2)) & (np.abs(dv) <= 1).all(axis=(1, 2))
    energy = params.bond_cost(dh).sum(axis=(1, 2)) + params.bond_cost(dv).sum(axis=(1, 2))
    return energy.astype(np.float64), ok


def enumerate_ensemble(L: int, K: int, params: ModelParams) -> TruncatedEnsemble:
    """
    Exhaustive Boltzmann table on the L x L box with heights cut to the K-window

    Args:
        L: box side, at most 4
        K: height cutoff
        params: model parameters (floor and p = inf restrict the state space)

    Returns:
        TruncatedEnsemble with normalized probabilities
    """
    if not 1 <= L <= constants.ORACLE_MAX_SIDE:
        raise DomainError(f'Exact enumeration needs 1 <= L <= {constants.ORACLE_MAX_SIDE}, got {L}')
    if K < 0:
        raise DomainError(f'K must be >= 0, got {K}')
    lo, hi = height_range(K, params)
    base = hi - lo + 1
    n_states = base ** (L * L)
    if n_states > constants.ORACLE_MAX_STATES:
        raise StateSpaceTooLarge(
            f'{n_states} states exceed the budget of {constants.ORACLE_MAX_STATES}', count=n_states
        )

    log_weights = np.empty(n_states, dtype=np.float64)
    keep = np.ones(n_states, dtype=bool) if params.is_rsos else None
    for start in range(0, n_states, CHUNK_STATES):
        stop = min(start + CHUNK_STATES, n_states)
        energy, ok = _chunk_energy(np.arange(start, stop, dtype=np.int64), L, lo, base, params)
        log_weights[start:stop] = -params.beta * energy
        if keep is not None:
            keep[start:stop] = ok

    codes = None
    if keep is not None:
        codes = np.flatnonzero(keep).astype(np.int64)
        log_weights = log_weights[codes]

    log_z = float(logsumexp(log_weights))
    log_weights -= log_z
    probabilities = np.exp(log_weights, out=log_weights)
    if (probabilities <= 0).any():
        logger.warning('Some truncated states underflow to probability 0 at beta=%g', params.beta)
    logger.info('enumerated %d admissible states on L=%d, K=%d', len(probabilities), L, K)

    return TruncatedEnsemble(
        L=L, K=K, params=params, lo=lo, hi=hi, codes=codes,
        probabilities=probabilities, log_partition=log_z,
    )


def marginal_tail(ensemble: TruncatedEnsemble, site: tuple[int, int], h: int) -> float:
    """P(eta_site >= h) under the table"""
    law = ensemble.marginal_law(site)
    return float(law[law.index >= h].sum())


def tail_ratio(ensemble: TruncatedEnsemble, site: tuple[int, int], h: int) -> float:
    """P(eta_site >= h+1) / P(eta_site = h)"""
    law = ensemble.marginal_law(site)
    at_h = float(law.get(h, 0.0))
    if at_h == 0.0:
        raise DomainError(f'P(eta = {h}) is zero on this ensemble')
    return float(law[law.index >= h + 1].sum()) / at_h


def total_variation(ensemble: TruncatedEnsemble, snapshots: np.ndarray) -> float:
    """
    Total-variation distance between the empirical law of an (n, L, L) stack of
    configs and the table; samples outside the table count fully against it.
    """
    snapshots = np.asarray(snapshots)
    n = len(snapshots)
    if n == 0:
        raise DomainError('No samples to compare')
    idx = ensemble.index_of(ensemble.encode(snapshots))
    outside = int((idx < 0).sum())
    seen, counts = np.unique(idx[idx >= 0], return_counts=True)
    exact = ensemble.probabilities[seen]
    empirical = counts / n
    gap = np.abs(empirical - exact).sum() + (1.0 - exact.sum()) + outside / n
    return 0.5 * float(gap)
