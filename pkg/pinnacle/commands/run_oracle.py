import logging
from pathlib import Path

from pinnacle.models.chain import ChainSpec
from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.simulations.oracle import enumerate_ensemble, total_variation
from pinnacle.simulations.sampler import run_chain
from pinnacle.utils import constants
from pinnacle.utils.storage import Storage


logger = logging.getLogger(__name__)


def run_oracle(
        params: ModelParams,
        L: int,
        K: int,
        compare_sweeps: int = 0,
        schedule: str = 'SEQUENTIAL',
        thin: int = 1,
        seed: int = constants.DEFAULT_SEED,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> float | None:
    """
    Write the exact truncated law, every site's tail table and, when compare_sweeps > 0,
    the total-variation distance of a sampler run against it

    Returns:
        The total-variation distance, or None without a comparison
    """
    ensemble = enumerate_ensemble(L, K, params)
    rows = []
    for i in range(L):
        for j in range(L):
            law = ensemble.marginal_law((i, j))
            tail = law[::-1].cumsum()[::-1]
            rows += [(i, j, int(h), float(t)) for h, t in tail.items()]

    tv = None
    with Storage(out_dir) as storage:
        storage.write_frame(out or 'oracle', ensemble.to_frame(), constants.ORACLE_COLUMNS)
        storage.write_table(table='marginals', columns=constants.MARGINAL_COLUMNS, rows=rows)
        if compare_sweeps > 0:
            spec = ChainSpec(params=params, L=L, seed=seed, sweeps_sample=compare_sweeps, thinning=thin,
                             schedule=schedule)
            stream = run_chain(spec, HeightConfig.flat(L, params.boundary_height, params.boundary_height))
            tv = total_variation(ensemble, stream.snapshots)
            logger.info('total variation over %d samples: %.5f', len(stream), tv)
            storage.write_table(
                table='oracle_tv',
                columns='L, K, schedule, samples, total_variation',
                rows=[(L, K, spec.schedule.value, len(stream), tv)],
            )
    return tv
