import logging
import time

import numpy as np
import pandas as pd

from pinnacle.models.chain import ChainSpec, PairedStream, SampleStream, Schedule
from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.simulations import kernels
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, OrderingViolation


logger = logging.getLogger(__name__)


def _neighbor_heights(config: HeightConfig, site: tuple[int, int]) -> list[int]:
    return [config.height(s) for s in config.neighbors(site)]


def conditional_law(config: HeightConfig, site: tuple[int, int], params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """
    Single-site conditional distribution on the heat-bath window

    Returns:
        (support, probabilities) with weight(k) proportional to exp(-beta * sum_y |k - eta_y|^p)
    """
    config.check_site(site)
    n0, n1, n2, n3 = _neighbor_heights(config, site)
    a, b = kernels.candidate_range(n0, n1, n2, n3, params.p, params.floor, params.window)
    support = np.arange(a, b + 1, dtype=np.int64)
    nbrs = np.array([n0, n1, n2, n3], dtype=np.int64)
    energy = params.bond_cost(support[:, None] - nbrs[None, :]).sum(axis=1).astype(np.float64)
    weights = np.exp(-params.beta * (energy - energy.min()))
    return support, weights / weights.sum()


def heat_bath_update(config: HeightConfig, site: tuple[int, int], params: ModelParams, random_draw: float) -> HeightConfig:
    """
    Resample one site from its exact conditional by inverse CDF

    Args:
        config: current configuration
        site: interior site (row, col)
        params: model parameters
        random_draw: uniform in [0, 1)

    Returns:
        A new HeightConfig differing from `config` at most at `site`
    """
    config.check_site(site)
    if not 0.0 <= random_draw < 1.0:
        raise DomainError(f'random_draw must lie in [0, 1), got {random_draw}')
    n0, n1, n2, n3 = _neighbor_heights(config, site)
    k = kernels.draw_height(n0, n1, n2, n3, params.beta, params.p, params.floor, params.window, float(random_draw))
    return config.with_height(site, int(k))


class Sampler:
    def __init__(self, spec: ChainSpec):
        self.spec = spec
        self.params = spec.params

    def _check_initial(self, initial: HeightConfig, params: ModelParams) -> None:
        if initial.L != self.spec.L:
            raise DomainError(f'Initial config has L={initial.L}, chain expects L={self.spec.L}')
        if initial.boundary_height != params.boundary_height:
            raise DomainError(
                f'Initial boundary {initial.boundary_height} differs from params boundary {params.boundary_height}'
            )
        initial.check_admissible(params)

    def _advance(self, P: np.ndarray, params: ModelParams, first_sweep: int, n_sweeps: int) -> None:
        if n_sweeps <= 0:
            return
        key = self.spec.key
        if self.spec.schedule == Schedule.SEQUENTIAL:
            kernels.run_sequential(P, params.beta, params.p, params.floor, params.window, key, first_sweep, n_sweeps)
            return
        for s in range(first_sweep, first_sweep + n_sweeps):
            kernels.parity_half_sweep(P, params.beta, params.p, params.floor, params.window, key, s, 0)
            kernels.parity_half_sweep(P, params.beta, params.p, params.floor, params.window, key, s, 1)

    @staticmethod
    def _observe(P: np.ndarray) -> tuple[int, float, int]:
        inner = P[1:-1, 1:-1]
        c = inner.shape[0] // 2
        return int(inner.max()), float(inner.mean()), int(inner[c, c])

    def _stream(self, rows: list, snapshots: np.ndarray | None, P: np.ndarray, params: ModelParams) -> SampleStream:
        observables = pd.DataFrame(rows, columns=constants.SAMPLE_COLUMNS.split(', '))
        observables = observables.astype({'sweep_index': np.int64, 'max_height': np.int64,
                                          'mean_height': np.float64, 'center_height': np.int64})
        final = HeightConfig(heights=P[1:-1, 1:-1], boundary_height=params.boundary_height)
        return SampleStream(spec=self.spec.with_params(params), observables=observables,
                            snapshots=snapshots, final=final)

    def run(self, initial: HeightConfig) -> SampleStream:
        """
        Burn in, then sample, retaining every `thinning`-th sampling sweep

        Args:
            initial: admissible starting configuration

        Returns:
            SampleStream with one observable row (and snapshot) per retained sweep
        """
        spec, params = self.spec, self.params
        self._check_initial(initial, params)
        P = initial.padded()
        L = spec.L

        start = time.perf_counter()
        self._advance(P, params, 0, spec.sweeps_burnin)
        sweep = spec.sweeps_burnin

        n_keep = spec.n_retained
        snapshots = np.empty((n_keep, L, L), dtype=np.int32) if spec.keep_snapshots else None
        rows = []
        for k in range(n_keep):
            self._advance(P, params, sweep, spec.thinning)
            sweep += spec.thinning
            rows.append(((k + 1) * spec.thinning, *self._observe(P)))
            if snapshots is not None:
                snapshots[k] = P[1:-1, 1:-1]
            if (k + 1) % (constants.PROGRESS_EVERY * 100) == 0:
                logger.info('%d/%d samples', k + 1, n_keep)
        self._advance(P, params, sweep, spec.sweeps_sample - n_keep * spec.thinning)

        logger.debug('chain L=%d finished in %.2fs', L, time.perf_counter() - start)
        return self._stream(rows, snapshots, P, params)

    def pair(
            self,
            lower_init: HeightConfig,
            upper_init: HeightConfig,
            lower_params: ModelParams | None = None,
            upper_params: ModelParams | None = None,
    ) -> PairedStream:
        """
        Run two chains on the same uniforms and check sitewise order after every sweep

        Args:
            lower_init: starting config of the lower chain
            upper_init: starting config of the upper chain, >= lower_init sitewise
            lower_params: parameters of the lower chain, defaults to spec.params
            upper_params: parameters of the upper chain, defaults to spec.params

        Returns:
            PairedStream with both streams and one ordering flag per sweep
        """
        spec = self.spec
        lower_params = lower_params or self.params
        upper_params = upper_params or self.params
        self._check_initial(lower_init, lower_params)
        self._check_initial(upper_init, upper_params)
        if lower_params.boundary_height > upper_params.boundary_height:
            raise DomainError('lower chain boundary must not exceed the upper chain boundary')
        if not kernels.is_ordered(lower_init.heights, upper_init.heights):
            raise DomainError('lower_init must be <= upper_init at every site')

        lower, upper = lower_init.padded(), upper_init.padded()
        n_sweeps = spec.sweeps_burnin + spec.sweeps_sample
        ordered = np.ones(n_sweeps, dtype=bool)
        lower_rows, upper_rows = [], []
        keep = spec.keep_snapshots
        n_keep = spec.n_retained
        lower_snaps = np.empty((n_keep, spec.L, spec.L), dtype=np.int32) if keep else None
        upper_snaps = np.empty((n_keep, spec.L, spec.L), dtype=np.int32) if keep else None

        kept = 0
        for sweep in range(n_sweeps):
            self._advance(lower, lower_params, sweep, 1)
            self._advance(upper, upper_params, sweep, 1)
            if not kernels.is_ordered(lower, upper):
                ordered[sweep] = False
                raise OrderingViolation(f'Sitewise order lost at sweep {sweep}')
            s = sweep - spec.sweeps_burnin
            if s >= 0 and (s + 1) % spec.thinning == 0 and kept < n_keep:
                lower_rows.append((s + 1, *self._observe(lower)))
                upper_rows.append((s + 1, *self._observe(upper)))
                if keep:
                    lower_snaps[kept] = lower[1:-1, 1:-1]
                    upper_snaps[kept] = upper[1:-1, 1:-1]
                kept += 1

        return PairedStream(
            lower=self._stream(lower_rows, lower_snaps, lower, lower_params),
            upper=self._stream(upper_rows, upper_snaps, upper, upper_params),
            ordered=ordered,
        )


def run_chain(spec: ChainSpec, initial: HeightConfig) -> SampleStream:
    return Sampler(spec).run(initial)


def monotone_pair(
        spec: ChainSpec,
        lower_init: HeightConfig,
        upper_init: HeightConfig,
        lower_params: ModelParams | None = None,
        upper_params: ModelParams | None = None,
) -> PairedStream:
    return Sampler(spec).pair(lower_init, upper_init, lower_params=lower_params, upper_params=upper_params)
