import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from cachetools import LRUCache, cached

from pinnacle.harmonic.ball import DiscreteBall, discrete_ball
from pinnacle.lattice.energy import hamiltonian
from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, SolverError


logger = logging.getLogger(__name__)

REFINE_STEPS = 5


@dataclass(frozen=True, eq=False)
class PinnacleProfile:
    """
    Real field on B_r and its boundary with phi_0 = h and phi = 0 on the boundary

    Attributes:
        ball: the domain
        values: phi at every row of ball.sites
        h: peak height
        residual: max |Laplacian phi| over B_r minus the origin
    """
    ball: DiscreteBall
    values: np.ndarray = field(repr=False)
    h: float
    residual: float = 0.0

    def __post_init__(self):
        self.values.setflags(write=False)

    def value(self, x: int, y: int) -> float:
        row = self.ball.row(x, y)
        return 0.0 if row < 0 else float(self.values[row])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'x': self.ball.sites[:, 0],
            'y': self.ball.sites[:, 1],
            'phi': self.values,
        })


class ConductanceCheck(NamedTuple):
    direct: float
    identity: float


def _laplacian_system(ball: DiscreteBall, pinned_origin: bool):
    """
    Sparse matrix of 4 phi_x - sum_y phi_y over the free ball sites.

    Returns:
        (matrix, free rows of ball.sites, column of each ball row or -1)
    """
    n = ball.n_inner
    free = np.arange(n)
    if pinned_origin:
        free = free[free != ball.origin]
    column = np.full(len(ball.sites), -1, dtype=np.int64)
    column[free] = np.arange(len(free))

    nbrs = ball.neighbor_rows()[free]
    rows = [np.arange(len(free))]
    cols = [np.arange(len(free))]
    vals = [np.full(len(free), 4.0)]
    for k in range(4):
        target = column[nbrs[:, k]]
        mask = target >= 0
        rows.append(np.flatnonzero(mask))
        cols.append(target[mask])
        vals.append(np.full(int(mask.sum()), -1.0))
    A = sps.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(free), len(free)),
    )
    return A, free, column


@cached(cache=LRUCache(maxsize=8))
def _factorized(r: float, pinned_origin: bool):
    ball = discrete_ball(r)
    A, free, column = _laplacian_system(ball, pinned_origin)
    return A, spla.factorized(A), free, column


def _solve(r: float, pinned_origin: bool, rhs: np.ndarray, tol: float) -> np.ndarray:
    """Direct solve with a few steps of iterative refinement until the max residual is <= tol"""
    A, solve, _, _ = _factorized(r, pinned_origin)
    x = solve(rhs)
    for _ in range(REFINE_STEPS):
        res = rhs - A @ x
        # residual of 4 phi - sum phi is 4x the Laplacian residual
        if np.abs(res).max(initial=0.0) / 4 <= tol:
            return x
        x = x + solve(res)
    res = np.abs(rhs - A @ x).max(initial=0.0) / 4
    if res > tol:
        raise SolverError(f'Dirichlet solve on r={r} stalled at residual {res:.3e} > {tol:.1e}', residual=res)
    return x


def harmonic_residual(profile: PinnacleProfile) -> float:
    """max |(1/4) sum_y (phi_y - phi_x)| over B_r minus the origin"""
    ball = profile.ball
    nbrs = ball.neighbor_rows()
    phi = profile.values
    lap = phi[nbrs].sum(axis=1) / 4 - phi[:ball.n_inner]
    lap[ball.origin] = 0.0
    return float(np.abs(lap).max(initial=0.0))


def hitting_field(r: float, tol: float = constants.DEFAULT_TOL) -> np.ndarray:
    """P_x(tau_0 < tau_boundary) at every row of discrete_ball(r).sites"""
    ball = discrete_ball(r)
    _, _, free, column = _factorized(r, True)
    nbrs = ball.neighbor_rows()[free]
    rhs = (nbrs == ball.origin).sum(axis=1).astype(np.float64)
    phi = np.zeros(len(ball.sites))
    phi[free] = _solve(r, True, rhs, tol)
    phi[ball.origin] = 1.0
    return phi


def solve_dirichlet(r: float, h: float, tol: float = constants.DEFAULT_TOL) -> PinnacleProfile:
    """
    Discrete harmonic profile on B_r minus the origin, pinned to h at 0 and 0 outside

    Args:
        r: ball radius (>= 1)
        h: peak height
        tol: max Laplacian residual allowed

    Returns:
        PinnacleProfile, equal to h * P_x(tau_0 < tau_boundary)
    """
    if tol <= 0:
        raise DomainError(f'tol must be positive, got {tol}')
    ball = discrete_ball(r)
    # one solve at h = 1 serves every h; scaling keeps the residual within h * tol
    phi = hitting_field(r, tol / max(1.0, abs(h))) * h
    profile = PinnacleProfile(ball=ball, values=phi, h=h)
    residual = harmonic_residual(profile)
    return PinnacleProfile(ball=ball, values=phi, h=h, residual=residual)


def dirichlet_energy(profile: PinnacleProfile) -> float:
    """Sum of squared gradients over every bond touching B_r"""
    a, b = profile.ball.bonds[:, 0], profile.ball.bonds[:, 1]
    d = profile.values[a] - profile.values[b]
    return float(np.dot(d, d))


def expected_exit_time(r: float, tol: float = constants.DEFAULT_TOL) -> float:
    """E_0 tau_boundary from (Laplacian m) = -1 on B_r, m = 0 outside"""
    ball = discrete_ball(r)
    _, _, free, column = _factorized(r, False)
    m = _solve(r, False, np.full(len(free), 4.0), tol)
    return float(m[column[ball.origin]])


def conductance_identity_check(r: float, h: float, tol: float = constants.DEFAULT_TOL) -> ConductanceCheck:
    """
    Energy of the Dirichlet solution computed directly and through
    I_r(h) = 4 h^2 sum_x P_x(tau_0 < tau_boundary) / E_0 tau_boundary
    """
    if r < 2:
        raise DomainError(f'conductance identity check needs r >= 2, got {r}')
    ball = discrete_ball(r)
    direct = dirichlet_energy(solve_dirichlet(r, h, tol))
    hitting = hitting_field(r, tol)[:ball.n_inner].sum()
    identity = 4 * h * h * hitting / expected_exit_time(r, tol)
    return ConductanceCheck(direct=direct, identity=float(identity))


def asymptotic_I(r: float, h: float) -> float:
    """2 pi h^2 / (log r + kappa)"""
    if r <= 1:
        raise DomainError(f'asymptotic_I needs r > 1, got {r}')
    return 2 * math.pi * h * h / (math.log(r) + constants.KAPPA)


def hitting_probabilities(r: float, tol: float = constants.DEFAULT_TOL) -> tuple[pd.DataFrame, float]:
    """
    Escape probabilities P_x(tau_boundary < tau_0) against (log|x| + kappa)/(log r + kappa)

    Returns:
        (per-site table for 1 < |x| < r, fitted C of |diff| <= C (1/|x|^2 + 1/r) / log r)
    """
    ball = discrete_ball(r)
    phi = hitting_field(r, tol)[:ball.n_inner]
    norms = ball.norms[:ball.n_inner]
    mask = (norms > 1) & (norms < r)
    escape = 1.0 - phi[mask]
    formula = (np.log(norms[mask]) + constants.KAPPA) / (math.log(r) + constants.KAPPA)
    diff = np.abs(escape - formula)
    scale = (1 / norms[mask] ** 2 + 1 / r) / math.log(r)
    table = pd.DataFrame({
        'x': ball.inner[mask, 0],
        'y': ball.inner[mask, 1],
        'norm': norms[mask],
        'escape': escape,
        'formula': formula,
        'diff': diff,
    })
    return table, float((diff / scale).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class RoundedPinnacle:
    """Integer pinnacle on a box centered at the origin, boundary 0"""
    config: HeightConfig
    support_size: int
    support_radius: float
    energy: int


def round_profile(profile: PinnacleProfile) -> RoundedPinnacle:
    """
    Nearest-integer rounding with every value below 1 sent to 0

    Returns:
        RoundedPinnacle with the support size and radius and the exact p = 2 energy
    """
    ball = profile.ball
    phi = np.asarray(profile.values)
    q = np.where(phi < 1.0, 0, np.floor(phi + 0.5)).astype(np.int64)

    o = ball.offset
    heights = np.zeros((2 * o + 1, 2 * o + 1), dtype=np.int64)
    inner = ball.inner
    heights[inner[:, 0] + o, inner[:, 1] + o] = q[:ball.n_inner]
    config = HeightConfig(heights=heights, boundary_height=0)

    support = q[:ball.n_inner] > 0
    radius = float(ball.norms[:ball.n_inner][support].max()) if support.any() else -1.0
    energy = hamiltonian(config, ModelParams(p=2, beta=1.0))
    return RoundedPinnacle(config=config, support_size=int(support.sum()), support_radius=radius, energy=int(energy))


def pinnacle_comparison(h_values, tol: float = constants.DEFAULT_TOL) -> pd.DataFrame:
    """
    Spike against pinnacle: for each h >= 2 compare a one-site spike (4 h^2),
    the real pinnacle at r = h / log h, its rounding, and 2 pi h^2 / log h.
    """
    rows = []
    for h in h_values:
        if h < 2:
            raise DomainError(f'pinnacle comparison needs h >= 2, got {h}')
        r = h / math.log(h)
        profile = solve_dirichlet(r, h, tol)
        rows.append({
            'h': h,
            'r': r,
            'spike_energy': 4 * h * h,
            'pinnacle_energy': dirichlet_energy(profile),
            'rounded_energy': round_profile(profile).energy,
            'asymptotic_energy': 2 * math.pi * h * h / math.log(h),
        })
    return pd.DataFrame(rows)
