import logging
import math
from typing import NamedTuple

import numpy as np
import pandas as pd

from pinnacle.models.lattice import ModelParams
from pinnacle.models.tail import Backend, TailEstimate
from pinnacle.predict.rates import analytic_tail_estimate, asymptote_table, threshold_crossing
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError


logger = logging.getLogger(__name__)

# neg-log comparisons treat values this close as attained
ATTAINED = 1e-12
DEFAULT_H_MAX = 200


class LevelPrediction(NamedTuple):
    """
    value: the integer prediction
    crossing: real-valued leading-order crossing (ANALYTIC backend), else None
    asymptote: closed-form asymptote, else None
    truncated: the tail never fell below the threshold inside the table
    degenerate: the threshold is >= 1 or nothing in the table meets it
    """
    value: int
    crossing: float | None = None
    asymptote: float | None = None
    truncated: bool = False
    degenerate: bool = False


def m_exponent(L: float) -> float:
    """-log(L^-2 (log L)^5)"""
    return 2 * math.log(L) - 5 * math.log(math.log(L))


def h_exponent(L: float, beta: float) -> float:
    """-log(5 beta / L)"""
    return math.log(L) - math.log(5 * beta)


def _scan(tail: TailEstimate, x: float, name: str) -> tuple[int, bool, bool]:
    """Largest tabulated h with -log tail(h) <= x, i.e. tail(h) >= e^-x"""
    table = tail.table
    if not len(table):
        raise DomainError('Tail table is empty')
    meets = table['neg_log_tail'].to_numpy() <= x + ATTAINED * max(1.0, abs(x))
    h = table['h'].to_numpy()
    if meets.all():
        logger.warning('%s: tail stays above the threshold up to the last tabulated h=%d', name, h[-1])
        return int(h[-1]), True, False
    if not meets.any():
        logger.warning('%s: no tabulated h meets the threshold, returning %d', name, h[0] - 1)
        return int(h[0]) - 1, False, True
    return int(h[np.flatnonzero(meets)[-1]]), False, False


def predict_M(L: float, tail: TailEstimate) -> LevelPrediction:
    """
    Largest h with tail(h) >= L^-2 (log L)^5

    Args:
        L: box side, > e
        tail: analytic or empirical tail

    Returns:
        LevelPrediction; the ANALYTIC backend adds the real crossing and the asymptote
    """
    if not L > math.e:
        raise DomainError(f'L must exceed e so that log log L > 0, got {L}')
    x = m_exponent(L)
    value, truncated, degenerate = _scan(tail, x, 'M')
    crossing = asymptote = None
    if tail.backend == Backend.ANALYTIC:
        p, beta = tail.params.p, tail.params.beta
        crossing = threshold_crossing(p, beta, x, tail.rate_constant)
        asymptote = float(asymptote_table(p, beta, [L], tail.rate_constant)['M_asymptote'].iloc[0])
    return LevelPrediction(value, crossing, asymptote, truncated, degenerate)


def predict_H(L: float, beta: float, tail: TailEstimate) -> LevelPrediction:
    """
    Largest h with tail(h) >= 5 beta / L; 0 when 5 beta / L >= 1
    """
    if not L > math.e:
        raise DomainError(f'L must exceed e so that log log L > 0, got {L}')
    asymptote = crossing = None
    if tail.backend == Backend.ANALYTIC:
        p = tail.params.p
        asymptote = float(asymptote_table(p, beta, [L], tail.rate_constant)['H_asymptote'].iloc[0])
    if 5 * beta / L >= 1:
        logger.warning('H: threshold 5*beta/L = %g >= 1 is degenerate, H = 0', 5 * beta / L)
        return LevelPrediction(0, 0.0 if asymptote is not None else None, asymptote, False, True)
    x = h_exponent(L, beta)
    value, truncated, degenerate = _scan(tail, x, 'H')
    if tail.backend == Backend.ANALYTIC:
        crossing = threshold_crossing(tail.params.p, beta, x, tail.rate_constant)
    return LevelPrediction(value, crossing, asymptote, truncated, degenerate)


def predict_M_star(L: float, beta: float, tail: TailEstimate | None = None) -> LevelPrediction:
    """
    Center of the floored maximum window {M*, M*+1, M*+2}: the plateau height H
    plus the height M of the maximum above it, for p = 2
    """
    if tail is None:
        tail = analytic_tail_estimate(ModelParams(p=2, beta=beta), range(2, DEFAULT_H_MAX + 1))
    if tail.params.p != 2:
        raise DomainError(f'The floored-maximum window is defined for p = 2, got p={tail.params.p}')
    M = predict_M(L, tail)
    H = predict_H(L, beta, tail)
    crossing = None if M.crossing is None else M.crossing + H.crossing
    asymptote = (1 + math.sqrt(2)) / (2 * math.sqrt(math.pi * beta)) * math.sqrt(math.log(L) * math.log(math.log(L)))
    if H.degenerate:
        logger.warning('M*: plateau threshold degenerate at L=%g, window centered on H=%d', L, H.value)
    return LevelPrediction(H.value + M.value, crossing, asymptote, M.truncated or H.truncated, H.degenerate)


def predict_table(L_values, beta: float, tail: TailEstimate) -> pd.DataFrame:
    """One row per L with the integer predictions, crossings, asymptotes and ratios"""
    rows = []
    for L in L_values:
        M = predict_M(L, tail)
        H = predict_H(L, beta, tail)
        star = predict_M_star(L, beta, tail) if tail.params.p == 2 else LevelPrediction(
            M.value + H.value,
            None if M.crossing is None else M.crossing + H.crossing,
            None if M.asymptote is None else M.asymptote + H.asymptote,
        )
        # ratios on the crossings when available, the integer scan otherwise
        m_ref = M.crossing if M.crossing else M.value
        rows.append({
            'L': L,
            'M': M.value,
            'H': H.value,
            'M_star': star.value,
            'M_crossing': M.crossing,
            'H_crossing': H.crossing,
            'M_star_crossing': star.crossing,
            'M_asymptote': M.asymptote,
            'H_asymptote': H.asymptote,
            'M_star_asymptote': star.asymptote,
            'H_over_M': (H.crossing if M.crossing else H.value) / m_ref if m_ref else np.nan,
            'M_star_over_M': (star.crossing if M.crossing else star.value) / m_ref if m_ref else np.nan,
        })
    return pd.DataFrame(rows, columns=constants.PREDICT_COLUMNS.split(', '))
