import logging
import time
from pathlib import Path

import numpy as np

from pinnacle.experiments.checks import check_equilibration
from pinnacle.lattice.snapshots import read_snapshot, write_snapshot
from pinnacle.models.chain import ChainSpec
from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.simulations.sampler import run_chain
from pinnacle.utils import constants
from pinnacle.utils.errors import ConfigError
from pinnacle.utils.storage import Storage


logger = logging.getLogger(__name__)


def run_simulate(
        params: ModelParams,
        L: int,
        seed: int = constants.DEFAULT_SEED,
        burnin: int | None = None,
        sweeps: int = 0,
        thin: int = 1,
        schedule: str = 'SEQUENTIAL',
        init: str | Path | None = None,
        snapshot_every: int | None = None,
        snapshot_dir: str | Path | None = None,
        check: bool = False,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> Path:
    """
    Run one chain and write its observables, the final configuration and, if asked,
    a snapshot every `snapshot_every` sampling sweeps

    Args:
        snapshot_every: sampling sweeps between written snapshots, a multiple of thin
        snapshot_dir: where snapshots go, defaults to <out_dir>/snapshots
        out: path of the samples table, defaults to <out_dir>/samples.csv

    Returns:
        Path of the samples table
    """
    if snapshot_every is not None and (snapshot_every < 1 or snapshot_every % thin != 0):
        raise ConfigError(f'snapshot_every must be a positive multiple of thin={thin}, got {snapshot_every}')
    spec = ChainSpec(params=params, L=L, seed=seed, sweeps_burnin=burnin, sweeps_sample=sweeps,
                     thinning=thin, schedule=schedule, keep_snapshots=snapshot_every is not None)
    if init is None:
        initial = HeightConfig.flat(L, params.boundary_height, params.boundary_height)
    else:
        initial, init_params = read_snapshot(init)
        if initial.L != L:
            raise ConfigError(f'Initial snapshot {init} has L={initial.L}, expected {L}')
        logger.info('Starting from %s (written with %s)', init, init_params)

    start = time.perf_counter()
    stream = run_chain(spec, initial)
    logger.info('%d sweeps on L=%d in %.2fs', spec.sweeps_burnin + spec.sweeps_sample, L, time.perf_counter() - start)

    with Storage(out_dir) as storage:
        storage.write_frame(out or 'samples', stream.observables, constants.SAMPLE_COLUMNS)
        write_snapshot(stream.final, params, storage.out_dir / 'final.txt')
        if snapshot_every is not None:
            target = Path(snapshot_dir) if snapshot_dir is not None else storage.out_dir / 'snapshots'
            sweep_index = stream.observables['sweep_index'].to_numpy()
            for k in np.flatnonzero(sweep_index % snapshot_every == 0):
                write_snapshot(stream.snapshot(k), params, target / f'{sweep_index[k]:06d}.txt')
        if check:
            result = check_equilibration(spec)
            storage.write_table(
                table='equilibration',
                columns='observable, hot_mean, cold_mean, hot_se, cold_se, agree',
                rows=[(*result, result.agree)],
            )
        return storage.path(out or 'samples')
