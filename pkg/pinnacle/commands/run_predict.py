import logging
from pathlib import Path

import pandas as pd

from pinnacle.models.lattice import ModelParams
from pinnacle.models.tail import Backend, TailEstimate
from pinnacle.predict.predictors import predict_table
from pinnacle.predict.rates import analytic_tail_estimate, asymptote_table
from pinnacle.predict.tails import tail_from_samples
from pinnacle.utils import constants
from pinnacle.utils.errors import ConfigError
from pinnacle.utils.storage import Storage


logger = logging.getLogger(__name__)


def load_tail(path: str | Path, params: ModelParams) -> TailEstimate:
    """
    EMPIRICAL tail from a CSV: either a samples table (center_height column) or a
    table with at least h and tail
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f'No tail table at {path}')
    data = pd.read_csv(path)
    if 'center_height' in data:
        return tail_from_samples(data['center_height'].to_numpy(), params)
    if not {'h', 'tail'} <= set(data.columns):
        raise ConfigError(f'{path} needs a center_height column or h and tail columns')
    return TailEstimate.from_frame(data, params)


def run_predict(
        params: ModelParams,
        L_values: list[float],
        h_min: int = 1,
        h_max: int = 200,
        rate_constant: float | None = None,
        backend: str | Backend | None = None,
        tail_file: str | Path | None = None,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> pd.DataFrame:
    """
    M, H and M* per L from the analytic tail or from a tabulated empirical one

    Args:
        backend: ANALYTIC or EMPIRICAL, inferred from tail_file when left out
        tail_file: CSV read by load_tail, required by the EMPIRICAL backend
    """
    if backend is None:
        backend = Backend.ANALYTIC if tail_file is None else Backend.EMPIRICAL
    elif not isinstance(backend, Backend):
        try:
            backend = Backend(backend.upper())
        except ValueError as err:
            raise ConfigError(f'Unknown backend {backend!r}, expected {[b.value for b in Backend]}') from err
    if backend == Backend.EMPIRICAL and tail_file is None:
        raise ConfigError('The EMPIRICAL backend needs a tail table')
    if backend == Backend.ANALYTIC and tail_file is not None:
        raise ConfigError(f'A tail table ({tail_file}) is only read by the EMPIRICAL backend')

    if backend == Backend.ANALYTIC:
        h_first = max(h_min, 2) if params.p == 2 else h_min
        tail = analytic_tail_estimate(params, range(h_first, h_max + 1), rate_constant)
    else:
        tail = load_tail(tail_file, params)
    table = predict_table(L_values, params.beta, tail)

    with Storage(out_dir) as storage:
        storage.write_frame(out or 'predict', table, constants.PREDICT_COLUMNS)
        if backend == Backend.ANALYTIC:
            asymptotes = asymptote_table(params.p, params.beta, L_values, rate_constant)
            storage.write_frame('asymptotes', asymptotes, 'L, M_asymptote, H_asymptote, M_star_asymptote')
    return table
