import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, SolverError


logger = logging.getLogger(__name__)

MIN_KERNEL_WINDOW = 8


@dataclass(frozen=True, eq=False)
class KernelTable:
    """
    Potential kernel a(x) on the square window [-R, R]^2.

    Attributes:
        R: window half-width
        values: (2R+1, 2R+1) grid, values[x + R, y + R] = a(x, y)
        residual: max |Laplacian a| off the origin inside the window
    """
    R: int
    values: np.ndarray = field(repr=False)
    residual: float

    def __post_init__(self):
        self.values.setflags(write=False)

    def __call__(self, x: int, y: int) -> float:
        if abs(x) > self.R or abs(y) > self.R:
            raise DomainError(f'({x}, {y}) is outside the kernel window of half-width {self.R}')
        return float(self.values[x + self.R, y + self.R])

    def source_strength(self) -> float:
        """(1/4) sum of a over the neighbors of the origin, 1 for the unit source"""
        return sum(self(dx, dy) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))) / 4

    def to_frame(self) -> pd.DataFrame:
        xs, ys = np.meshgrid(np.arange(-self.R, self.R + 1), np.arange(-self.R, self.R + 1), indexing='ij')
        return pd.DataFrame({'x': xs.ravel(), 'y': ys.ravel(), 'a': self.values.ravel()})


def kernel_asymptote(x, y):
    """(2/pi)(log|x| + kappa)"""
    return 2 / math.pi * (np.log(np.hypot(x, y)) + constants.KAPPA)


def potential_kernel(R: int, tol: float = constants.DEFAULT_TOL) -> KernelTable:
    """
    Solve for a on the window with a(0) = 0, a harmonic off the origin and
    the two-term expansion imposed on the window edge

    Args:
        R: window half-width, at least 8
        tol: max Laplacian residual allowed off the origin

    Returns:
        KernelTable
    """
    if R < MIN_KERNEL_WINDOW:
        raise DomainError(f'Kernel window half-width must be >= {MIN_KERNEL_WINDOW}, got {R}')
    n = 2 * R + 1
    xs, ys = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1), indexing='ij')
    edge = (np.abs(xs) == R) | (np.abs(ys) == R)
    origin = (xs == 0) & (ys == 0)

    grid = np.zeros((n, n))
    grid[edge] = kernel_asymptote(xs[edge], ys[edge])

    free = ~edge & ~origin
    index = np.full((n, n), -1, dtype=np.int64)
    index[free] = np.arange(int(free.sum()))
    fi, fj = np.nonzero(free)

    rows = [index[fi, fj]]
    cols = [index[fi, fj]]
    vals = [np.full(len(fi), 4.0)]
    rhs = np.zeros(len(fi))
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = fi + di, fj + dj
        target = index[ni, nj]
        known = target < 0
        rhs[index[fi[known], fj[known]]] += grid[ni[known], nj[known]]
        rows.append(index[fi[~known], fj[~known]])
        cols.append(target[~known])
        vals.append(np.full(int((~known).sum()), -1.0))
    A = sps.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(len(fi), len(fi)))
    grid[free] = spla.spsolve(A, rhs)

    lap = (grid[2:, 1:-1] + grid[:-2, 1:-1] + grid[1:-1, 2:] + grid[1:-1, :-2]) / 4 - grid[1:-1, 1:-1]
    lap[R - 1, R - 1] = 0.0
    residual = float(np.abs(lap).max())
    if residual > tol:
        raise SolverError(f'Potential kernel solve left residual {residual:.3e} > {tol:.1e}', residual=residual)
    logger.debug('potential kernel on R=%d, a(1,0)=%.6f', R, grid[R + 1, R])
    return KernelTable(R=R, values=grid, residual=residual)
