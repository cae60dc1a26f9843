import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from numba import njit, prange

from pinnacle.harmonic.ball import DiscreteBall, discrete_ball
from pinnacle.harmonic.dirichlet import solve_dirichlet
from pinnacle.utils import constants
from pinnacle.utils.errors import ConvergenceError, DomainError


logger = logging.getLogger(__name__)

MIN_RADIUS = 4
DEFAULT_PVAR_TOL = 1e-8
HESSIAN_FLOOR = 1e-8
ARMIJO = 1e-4
MAX_HALVINGS = 60


@dataclass(frozen=True, eq=False)
class PMinimizer:
    """
    Minimizer of sum_{x~y} |phi_x - phi_y|^p over phi pinned to 1 at the origin
    and 0 outside B_R.

    Attributes:
        p: exponent in (1, inf)
        ball: the truncation ball B_R
        values: phi at every row of ball.sites
        energy: E(phi)
        residual: max |dE/dphi_x| over the free sites
        iterations: Newton steps or coordinate sweeps taken
        method: 'newton' or 'coordinate'
    """
    p: float
    ball: DiscreteBall
    values: np.ndarray = field(repr=False)
    energy: float
    residual: float
    iterations: int
    method: str

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def R(self) -> float:
        return self.ball.r

    def value(self, x: int, y: int) -> float:
        row = self.ball.row(x, y)
        return 0.0 if row < 0 else float(self.values[row])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'x': self.ball.sites[:, 0], 'y': self.ball.sites[:, 1], 'phi': self.values})


def p_energy(ball: DiscreteBall, values: np.ndarray, p: float) -> float:
    """sum over bonds touching B_R of |phi_a - phi_b|^p"""
    d = values[ball.bonds[:, 0]] - values[ball.bonds[:, 1]]
    return float(np.sum(np.abs(d) ** p))


def p_gradient(ball: DiscreteBall, values: np.ndarray, p: float) -> np.ndarray:
    """dE/dphi at every row of ball.sites"""
    a, b = ball.bonds[:, 0], ball.bonds[:, 1]
    d = values[a] - values[b]
    flux = p * np.abs(d) ** (p - 1) * np.sign(d)
    grad = np.zeros(len(values))
    np.add.at(grad, a, flux)
    np.add.at(grad, b, -flux)
    return grad


def _free_rows(ball: DiscreteBall) -> np.ndarray:
    rows = np.arange(ball.n_inner)
    return rows[rows != ball.origin]


def _residual(ball: DiscreteBall, values: np.ndarray, p: float, free: np.ndarray) -> float:
    return float(np.abs(p_gradient(ball, values, p)[free]).max(initial=0.0))


def _hessian(ball: DiscreteBall, values: np.ndarray, p: float, column: np.ndarray, n_free: int):
    """Sparse Hessian over the free sites, bond weights p(p-1)|d|^(p-2) with |d| floored"""
    a, b = ball.bonds[:, 0], ball.bonds[:, 1]
    d = np.maximum(np.abs(values[a] - values[b]), HESSIAN_FLOOR)
    w = p * (p - 1) * d ** (p - 2)
    ca, cb = column[a], column[b]
    rows, cols, vals = [], [], []
    for u, v in ((ca, cb), (cb, ca)):
        keep = u >= 0
        rows.append(u[keep])
        cols.append(u[keep])
        vals.append(w[keep])
        both = keep & (v >= 0)
        rows.append(u[both])
        cols.append(v[both])
        vals.append(-w[both])
    return sps.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n_free, n_free))


def _newton(ball: DiscreteBall, p: float, tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    free = _free_rows(ball)
    column = np.full(len(ball.sites), -1, dtype=np.int64)
    column[free] = np.arange(len(free))

    phi = np.array(solve_dirichlet(ball.r, 1.0).values)
    energy = p_energy(ball, phi, p)
    for it in range(max_iter):
        grad = p_gradient(ball, phi, p)[free]
        residual = float(np.abs(grad).max(initial=0.0))
        if residual <= tol:
            return phi, residual, it
        step = -spla.spsolve(_hessian(ball, phi, p, column, len(free)), grad)
        slope = float(grad @ step)
        if slope >= 0:
            step, slope = -grad, -float(grad @ grad)

        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = phi.copy()
            trial[free] += t * step
            trial_energy = p_energy(ball, trial, p)
            if trial_energy <= energy + ARMIJO * t * slope:
                break
            t /= 2
        else:
            raise ConvergenceError(
                f'Line search stalled for p={p}, R={ball.r} at residual {residual:.3e}', residual=residual
            )
        phi, energy = trial, trial_energy
        logger.debug('newton step %d: E=%.12f, residual=%.3e, t=%g', it, energy, residual, t)

    residual = _residual(ball, phi, p, free)
    if residual > tol:
        raise ConvergenceError(
            f'Newton did not reach tol={tol:.1e} in {max_iter} steps for p={p}, R={ball.r} '
            f'(residual {residual:.3e})',
            residual=residual,
        )
    return phi, residual, max_iter


@njit(cache=True)
def _minimize_site(n0, n1, n2, n3, p, steps):
    """argmin_t sum_k |t - n_k|^p by bisection on the increasing derivative"""
    lo = min(min(n0, n1), min(n2, n3))
    hi = max(max(n0, n1), max(n2, n3))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        slope = 0.0
        for n in (n0, n1, n2, n3):
            d = mid - n
            if d > 0:
                slope += d ** (p - 1)
            elif d < 0:
                slope -= (-d) ** (p - 1)
        if slope > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@njit(cache=True, parallel=True)
def _red_black_sweep(G, free, p, steps):
    """One sweep over the free cells, even then odd (i + j) parity; returns the largest change"""
    n = G.shape[0]
    largest = 0.0
    for parity in range(2):
        changes = np.zeros(n)
        for i in prange(1, n - 1):
            for j in range(1, n - 1):
                if (i + j) % 2 != parity or not free[i, j]:
                    continue
                new = _minimize_site(G[i - 1, j], G[i + 1, j], G[i, j - 1], G[i, j + 1], p, steps)
                change = abs(new - G[i, j])
                if change > changes[i]:
                    changes[i] = change
                G[i, j] = new
        largest = max(largest, changes.max())
    return largest


def _coordinate(ball: DiscreteBall, p: float, tol: float, max_sweeps: int) -> tuple[np.ndarray, float, int]:
    free_rows = _free_rows(ball)
    o = ball.offset
    n = 2 * o + 1
    # grid padded by one more ring so every free cell has four in-grid neighbors
    G = np.zeros((n + 2, n + 2))
    free = np.zeros((n + 2, n + 2), dtype=np.bool_)
    sites = ball.sites
    start = solve_dirichlet(ball.r, 1.0).values
    G[sites[:, 0] + o + 1, sites[:, 1] + o + 1] = start
    free[sites[free_rows, 0] + o + 1, sites[free_rows, 1] + o + 1] = True

    def collect():
        return G[sites[:, 0] + o + 1, sites[:, 1] + o + 1].copy()

    for sweep in range(1, max_sweeps + 1):
        _red_black_sweep(G, free, p, constants.BISECTION_STEPS)
        if sweep % 10 == 0 or sweep == max_sweeps:
            phi = collect()
            residual = _residual(ball, phi, p, free_rows)
            if residual <= tol:
                return phi, residual, sweep
        if sweep % (constants.PROGRESS_EVERY * 10) == 0:
            logger.info('coordinate descent p=%g R=%g: sweep %d, residual %.3e', p, ball.r, sweep, residual)

    phi = collect()
    residual = _residual(ball, phi, p, free_rows)
    raise ConvergenceError(
        f'Coordinate descent did not reach tol={tol:.1e} in {max_sweeps} sweeps for p={p}, R={ball.r} '
        f'(residual {residual:.3e})',
        residual=residual,
    )


def minimize_p_energy(
        p: float,
        R: float,
        tol: float = DEFAULT_PVAR_TOL,
        method: str = 'newton',
        max_iter: int | None = None,
) -> PMinimizer:
    """
    Minimize the p-Dirichlet energy on B_R with phi_0 = 1

    Args:
        p: exponent, 1 < p < inf
        R: truncation radius, >= 4
        tol: bound on max |dE/dphi_x| at the free sites
        method: 'newton' (damped Newton with a sparse Hessian) or
            'coordinate' (red-black single-site bisection, for small R)
        max_iter: Newton steps or coordinate sweeps before giving up

    Returns:
        PMinimizer
    """
    if not 1 < p < math.inf:
        raise DomainError(f'p must lie in (1, inf), got {p}')
    if R < MIN_RADIUS:
        raise DomainError(f'R must be >= {MIN_RADIUS}, got {R}')
    if tol <= 0:
        raise DomainError(f'tol must be positive, got {tol}')

    ball = discrete_ball(R)
    start = time.perf_counter()
    if method == 'newton':
        phi, residual, iterations = _newton(ball, p, tol, max_iter or constants.NEWTON_MAX_ITER)
    elif method == 'coordinate':
        phi, residual, iterations = _coordinate(ball, p, tol, max_iter or constants.COORDINATE_MAX_SWEEPS)
    else:
        raise DomainError(f"method must be 'newton' or 'coordinate', got {method!r}")

    energy = p_energy(ball, phi, p)
    logger.info('p=%g R=%g: E=%.10f after %d %s iterations in %.2fs',
                p, R, energy, iterations, method, time.perf_counter() - start)
    return PMinimizer(p=p, ball=ball, values=phi, energy=energy, residual=residual,
                      iterations=iterations, method=method)


def radius_sweep(p: float, radii, tol: float = DEFAULT_PVAR_TOL, method: str = 'newton') -> pd.DataFrame:
    """E(phi*) over increasing R, the running estimate of the rate constant"""
    rows = []
    for R in radii:
        m = minimize_p_energy(p, R, tol=tol, method=method)
        rows.append((p, R, m.energy, m.residual, m.iterations))
    return pd.DataFrame(rows, columns=constants.PVAR_COLUMNS.split(', '))
