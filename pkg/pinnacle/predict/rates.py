"""
Leading-order large-deviation rates -log P(eta_0 >= h) for every exponent p.

  p = 1        4 beta h
  1 < p < 2    c_p beta h^p             (c_p from the p-energy minimizer)
  p = 2        2 pi beta h^2 / log h    (h >= 2)
  2 < p < inf  c beta h^2               (c between the two bracket constants)
  p = inf      4 (beta + 2 log(27/16)) h^2

Lower-order corrections are dropped throughout, so every value here is a
surrogate for the true tail.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from pinnacle.asm.formula import rsos_rate_constant
from pinnacle.models.lattice import ModelParams
from pinnacle.models.tail import Backend, TailEstimate, is_finite_constant, tail_frame
from pinnacle.utils.errors import DomainError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateTable:
    """
    Attributes:
        params: p and beta
        rate_constant: c_p for 1 < p < 2, the chosen c for 2 < p < inf; ignored otherwise
        bracket: (c1, c2) bracket constants for 2 < p < inf, optional
    """
    params: ModelParams
    rate_constant: float | None = None
    bracket: tuple[float, float] | None = None

    def __post_init__(self):
        p = self.params.p
        if (1 < p < 2 or 2 < p < math.inf) and not is_finite_constant(self.rate_constant):
            raise DomainError(f'p={p} needs a positive rate constant, got {self.rate_constant}')

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def label(self) -> str:
        if 2 < self.p < math.inf:
            return f'bracket-dependent (c={self.rate_constant:g})'
        return 'leading-order'

    @property
    def quadratic_constant(self) -> float:
        """Coefficient of h^2 for 2 < p <= inf"""
        if self.params.is_rsos:
            return rsos_rate_constant(self.beta).center
        if 2 < self.p < math.inf:
            return self.rate_constant * self.beta
        raise DomainError(f'p={self.p} has no h^2 rate')

    def exponent(self, h):
        """r_p(beta, h), vectorized over h"""
        h = np.asarray(h, dtype=np.float64)
        p, beta = self.p, self.beta
        if p == 1:
            out = 4 * beta * h
        elif p < 2:
            out = self.rate_constant * beta * np.abs(h) ** p
        elif p == 2:
            if (h < 2).any():
                raise DomainError(f'The p=2 rate is defined for h >= 2, got min h={h.min():g}')
            out = 2 * math.pi * beta * h ** 2 / np.log(h)
        else:
            out = self.quadratic_constant * h ** 2
        return float(out) if out.ndim == 0 else out

    def bracket_exponents(self, h) -> tuple:
        """(c1 beta h^2, c2 beta h^2) for 2 < p < inf"""
        if not (2 < self.p < math.inf and self.bracket):
            raise DomainError('Rate brackets exist only for 2 < p < inf with bracket constants given')
        h = np.asarray(h, dtype=np.float64)
        c1, c2 = self.bracket
        return c1 * self.beta * h ** 2, c2 * self.beta * h ** 2


def analytic_tail(params: ModelParams, h, rate_constant: float | None = None):
    """exp(-r_p(beta, h)), the leading-order surrogate of P(eta_0 >= h)"""
    exponent = RateTable(params, rate_constant).exponent(h)
    if np.ndim(exponent):
        return np.exp(-exponent)
    return math.exp(-exponent)


def analytic_tail_estimate(params: ModelParams, h_values, rate_constant: float | None = None) -> TailEstimate:
    """Analytic surrogate tabulated over h_values"""
    table = RateTable(params, rate_constant)
    h_values = np.asarray(list(h_values), dtype=np.int64)
    frame = tail_frame(h_values, table.exponent(h_values))
    return TailEstimate(backend=Backend.ANALYTIC, params=params, table=frame, rate_constant=rate_constant)


def threshold_crossing(p: float, beta: float, x: float, rate_constant: float | None = None) -> float:
    """
    Real h with r_p(beta, h) = x to leading order; for p = 2 the first-order
    inverse h = sqrt(x log x / (4 pi beta))

    Returns:
        The crossing, 0 when x leaves no positive solution
    """
    if not beta > 0:
        raise DomainError(f'beta must be positive, got {beta}')
    if x <= 0:
        return 0.0
    if p == 1:
        return x / (4 * beta)
    if p == 2:
        if x <= 1:
            return 0.0
        return math.sqrt(x * math.log(x) / (4 * math.pi * beta))
    if math.isinf(p):
        return math.sqrt(x / rsos_rate_constant(beta).center)
    if not is_finite_constant(rate_constant):
        raise DomainError(f'p={p} needs a positive rate constant, got {rate_constant}')
    if p < 2:
        return (x / (rate_constant * beta)) ** (1 / p)
    return math.sqrt(x / (rate_constant * beta))


def asymptote_table(p: float, beta: float, L_values, rate_constant: float | None = None) -> pd.DataFrame:
    """
    Closed-form centers of the maximum (M) and of the floored plateau (H), and
    their sum (the floored maximum M*), per box side
    """
    rows = []
    for L in L_values:
        log_L = math.log(L)
        if p == 1:
            M = log_L / (2 * beta)
            H = float(math.ceil(log_L / (4 * beta)))
        elif p == 2:
            if log_L <= 1:
                raise DomainError(f'The p=2 asymptote needs log log L > 0, got L={L}')
            M = math.sqrt(log_L * math.log(log_L) / (2 * math.pi * beta))
            H = M / math.sqrt(2)
        elif math.isinf(p):
            M = math.sqrt(2 * log_L / rsos_rate_constant(beta).center)
            H = M / math.sqrt(2)
        else:
            if not is_finite_constant(rate_constant):
                raise DomainError(f'p={p} needs a positive rate constant, got {rate_constant}')
            if p < 2:
                M = (2 * log_L / (rate_constant * beta)) ** (1 / p)
                H = 0.5 ** (1 / p) * M
            else:
                M = math.sqrt(2 * log_L / (rate_constant * beta))
                H = M / math.sqrt(2)
        rows.append({'L': L, 'M_asymptote': M, 'H_asymptote': H, 'M_star_asymptote': M + H})
    return pd.DataFrame(rows)
