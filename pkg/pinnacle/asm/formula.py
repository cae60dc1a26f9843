import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import sympy as sp

from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, ValidityError


@dataclass(frozen=True, eq=False)
class ASMatrix:
    """Square {-1, 0, 1} matrix, rows and columns summing to 1 with alternating nonzero signs"""
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.array(self.entries, dtype=np.int64, copy=True)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidityError(f'ASM must be square, got shape {A.shape}')
        if not np.isin(A, (-1, 0, 1)).all():
            raise ValidityError('ASM entries must lie in {-1, 0, 1}')
        for name, M in (('row', A), ('column', A.T)):
            if not M.size:
                break
            # partial sums stay in {0, 1} and end at 1 exactly when signs alternate from +1
            partial = np.cumsum(M, axis=1)
            bad = (partial < 0).any(axis=1) | (partial > 1).any(axis=1) | (partial[:, -1] != 1)
            if bad.any():
                raise ValidityError(f'ASM {name} {int(np.argmax(bad))} does not alternate in sign from +1 to a sum of 1')
        A.setflags(write=False)
        object.__setattr__(self, 'entries', A)

    @property
    def h(self) -> int:
        return self.entries.shape[0]

    def key(self) -> bytes:
        return self.entries.tobytes()

    def __eq__(self, other):
        if not isinstance(other, ASMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.h, self.key()))

    def render(self) -> str:
        return '\n'.join(' '.join(f'{v:2d}' for v in row) for row in self.entries)


def asm_product_formula(h: int) -> int:
    """A(h) = prod_{k=0}^{h-1} (3k+1)! / (h+k)!"""
    if h < 0:
        raise DomainError(f'h must be >= 0, got {h}')
    value = sp.prod([sp.factorial(3 * k + 1) / sp.factorial(h + k) for k in range(h)])
    return int(sp.Integer(value))


def asm_growth_ratio(h: int) -> float:
    """log A(h) / h^2 against its limit log(3 sqrt(3) / 4)"""
    if h < 1:
        raise DomainError(f'h must be >= 1, got {h}')
    return math.log(asm_product_formula(h)) / h ** 2 / constants.ASM_GROWTH


class RateBracket(NamedTuple):
    center: float
    half_width: Callable[[float], float]

    def bounds(self, C: float = 1.0) -> tuple[float, float]:
        w = self.half_width(C)
        return self.center - w, self.center + w


def rsos_rate_constant(beta: float) -> RateBracket:
    """
    Coefficient of h^2 in -log P(eta_0 >= h) for the restricted model:
    4 (beta + 2 log(27/16)), bracketed by 4 C exp(-beta)
    """
    if not beta > 0:
        raise DomainError(f'beta must be positive, got {beta}')
    center = 4 * (beta + 2 * constants.LOG_27_16)
    return RateBracket(center=center, half_width=lambda C: 4 * C * math.exp(-beta))
