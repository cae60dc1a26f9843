from dataclasses import dataclass, field

import numpy as np
from cachetools import LRUCache, cached

from pinnacle.utils.errors import DomainError


@dataclass(frozen=True, eq=False)
class DiscreteBall:
    """
    Closed Euclidean ball B_r = {x in Z^2 : |x| <= r} and its external boundary.

    Attributes:
        r: radius
        sites: (n + m, 2) integer coordinates, the n ball sites first, then the m boundary sites
        n_inner: n, the number of ball sites
        origin: row of (0, 0) in `sites`
        bonds: (k, 2) rows of `sites` joined by a bond with at least one end in the ball
        lookup: grid of row indices over [-R-1, R+1]^2, -1 off the ball and boundary
    """
    r: float
    sites: np.ndarray = field(repr=False)
    n_inner: int
    origin: int
    bonds: np.ndarray = field(repr=False)
    lookup: np.ndarray = field(repr=False)

    @property
    def offset(self) -> int:
        return (self.lookup.shape[0] - 1) // 2

    @property
    def inner(self) -> np.ndarray:
        return self.sites[:self.n_inner]

    @property
    def boundary(self) -> np.ndarray:
        return self.sites[self.n_inner:]

    @property
    def norms(self) -> np.ndarray:
        return np.hypot(self.sites[:, 0], self.sites[:, 1])

    def row(self, x: int, y: int) -> int:
        o = self.offset
        if abs(x) > o or abs(y) > o:
            return -1
        return int(self.lookup[x + o, y + o])

    def neighbor_rows(self) -> np.ndarray:
        """(n_inner, 4) rows of the four neighbors of each ball site"""
        o = self.offset
        inner = self.inner
        out = np.empty((self.n_inner, 4), dtype=np.int64)
        for k, (dx, dy) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
            out[:, k] = self.lookup[inner[:, 0] + dx + o, inner[:, 1] + dy + o]
        return out


@cached(cache=LRUCache(maxsize=16))
def discrete_ball(r: float) -> DiscreteBall:
    if not r >= 1:
        raise DomainError(f'Ball radius must be >= 1, got {r}')
    R = int(np.floor(r))
    o = R + 1
    xs, ys = np.meshgrid(np.arange(-o, o + 1), np.arange(-o, o + 1), indexing='ij')
    inside = xs * xs + ys * ys <= r * r + 1e-9

    near = np.zeros_like(inside)
    near[1:, :] |= inside[:-1, :]
    near[:-1, :] |= inside[1:, :]
    near[:, 1:] |= inside[:, :-1]
    near[:, :-1] |= inside[:, 1:]
    outside = near & ~inside

    inner = np.column_stack([xs[inside], ys[inside]])
    boundary = np.column_stack([xs[outside], ys[outside]])
    sites = np.vstack([inner, boundary]).astype(np.int64)

    lookup = np.full(xs.shape, -1, dtype=np.int64)
    lookup[sites[:, 0] + o, sites[:, 1] + o] = np.arange(len(sites))
    origin = int(lookup[o, o])

    # a bond is kept if it joins two listed sites and touches the ball
    bonds = []
    for dx, dy in ((1, 0), (0, 1)):
        tx, ty = sites[:, 0] + dx, sites[:, 1] + dy
        valid = (np.abs(tx) <= o) & (np.abs(ty) <= o)
        dst = np.full(len(sites), -1, dtype=np.int64)
        dst[valid] = lookup[tx[valid] + o, ty[valid] + o]
        rows = np.flatnonzero(dst >= 0)
        pairs = np.column_stack([rows, dst[rows]])
        touches = (pairs[:, 0] < len(inner)) | (pairs[:, 1] < len(inner))
        bonds.append(pairs[touches])
    bonds = np.vstack(bonds)

    for arr in (sites, bonds, lookup):
        arr.setflags(write=False)
    return DiscreteBall(r=float(r), sites=sites, n_inner=len(inner), origin=origin, bonds=bonds, lookup=lookup)
