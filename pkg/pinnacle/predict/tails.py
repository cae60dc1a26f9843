import logging

import numpy as np

from pinnacle.models.chain import ChainSpec, SampleStream
from pinnacle.models.lattice import ModelParams
from pinnacle.models.tail import Backend, TailEstimate, tail_frame
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, MisuseError


logger = logging.getLogger(__name__)


def _check_unfloored(params: ModelParams) -> None:
    if params.floor:
        raise MisuseError('Empirical tails estimate the unfloored law; this stream was run with a floor')
    if params.boundary_height != 0:
        raise MisuseError(f'Empirical tails need boundary 0, got {params.boundary_height}')


def tail_from_samples(values, params: ModelParams, spec: ChainSpec | None = None) -> TailEstimate:
    """
    Frequencies of {value >= h} with binomial standard errors that treat every
    sample as independent; h runs from one below the smallest to one above the
    largest value seen
    """
    _check_unfloored(params)
    values = np.asarray(values)
    n = len(values)
    if n == 0:
        raise DomainError('No samples to estimate a tail from')
    h_values = np.arange(int(values.min()) - 1, int(values.max()) + 2)
    hits = np.array([(values >= h).sum() for h in h_values])
    tail = hits / n
    se = np.sqrt(tail * (1 - tail) / n)
    with np.errstate(divide='ignore'):
        neg_log = -np.log(tail)
    return TailEstimate(
        backend=Backend.EMPIRICAL,
        params=params,
        table=tail_frame(h_values, neg_log, se=se, n_samples=np.full(len(h_values), n)),
        spec=spec,
    )


def empirical_tail(stream: SampleStream, site: tuple[int, int] | None = None) -> TailEstimate:
    """
    Empirical P(eta_site >= h) from one chain

    Args:
        stream: samples of an unfloored chain with boundary 0
        site: (row, col), defaults to the center; other sites need snapshots

    Returns:
        EMPIRICAL TailEstimate
    """
    params = stream.spec.params
    _check_unfloored(params)
    L = stream.spec.L
    if L < constants.MIN_TAIL_SIDE:
        logger.warning('L=%d is below %d; the center still feels the boundary', L, constants.MIN_TAIL_SIDE)

    if site is None or tuple(site) == (L // 2, L // 2):
        values = stream.center_heights
    else:
        if stream.snapshots is None:
            raise DomainError('Tails away from the center need a stream run with keep_snapshots=True')
        values = np.asarray(stream.snapshots[:, site[0], site[1]])
    return tail_from_samples(values, params, spec=stream.spec)
