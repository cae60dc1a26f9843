"""
Level lines of a height configuration.

Coordinates: sites are config (row, col) indices. Dual vertex (i, j) is the
corner shared by sites (i-1, j-1), (i, j-1), (i, j), (i-1, j); i, j run over
[0, L]. Compass names refer to the array axes: north is +col, east is +row.
Around a dual vertex the four arms are N (crossing the bond between its two
+col sites), E (between its two +row sites), S and W. At a vertex where four
contour edges meet, N pairs with E and S with W, which splits the vertex along
the NW-SE diagonal.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from pinnacle.models.lattice import HeightConfig
from pinnacle.utils.utils import macroscopic_threshold


logger = logging.getLogger(__name__)

N, E, S, W = 0, 1, 2, 3
ARM_NAMES = 'NESW'
# arm -> (vertex step, whether the crossed bond is a row bond)
ARM_STEP = {N: (0, 1), E: (1, 0), S: (0, -1), W: (-1, 0)}
NON_LINKED_TURNS = (frozenset((N, W)), frozenset((S, E)))


def _opposite(arm: int) -> int:
    return (arm + 2) % 4


def _linked(arm: int) -> int:
    return arm ^ 1


@dataclass(frozen=True, eq=False)
class GeometricContour:
    """
    Closed circuit of dual edges.

    Attributes:
        L: box side
        edges: crossed bonds in circuit order, each as a pair of config sites
            (a site index of -1 or L is a boundary site)
        vertices: dual vertices visited, vertices[k] is where edges[k] starts
        turn_vertices: dual vertices where the circuit turns through a non-linked pair
    """
    L: int
    edges: tuple = field(repr=False)
    vertices: tuple = field(repr=False)
    turn_vertices: tuple = field(repr=False, default=())

    @property
    def length(self) -> int:
        return len(self.edges)

    def __len__(self):
        return self.length

    @cached_property
    def interior(self) -> np.ndarray:
        """
        (L, L) mask of V_gamma, the sites with odd crossing parity along +col;
        a circuit that touches itself at a vertex excludes the pocket it pinches off
        """
        n = self.L + 2
        crossed = np.zeros((n, n), dtype=np.int64)
        for (r1, c1), (r2, c2) in self.edges:
            if r1 == r2:
                # col bond (r, c)-(r, c+1), crossed by a ray from (r, c') for c' <= c
                crossed[r1 + 1, min(c1, c2) + 1] += 1
        parity = np.cumsum(crossed[:, ::-1], axis=1)[:, ::-1] % 2
        return parity[1:-1, 1:-1].astype(bool)

    @property
    def area(self) -> int:
        return int(self.interior.sum())

    @cached_property
    def boundary_sites(self) -> frozenset:
        """Endpoints of every crossed bond plus the four sites around every non-linked turn"""
        sites = {s for edge in self.edges for s in edge}
        for i, j in self.turn_vertices:
            sites.update(((i - 1, j - 1), (i, j - 1), (i, j), (i - 1, j)))
        return frozenset(sites)

    def _inside(self, site) -> bool:
        r, c = site
        return 0 <= r < self.L and 0 <= c < self.L and bool(self.interior[r, c])

    @property
    def inner_boundary(self) -> frozenset:
        return frozenset(s for s in self.boundary_sites if self._inside(s))

    @property
    def outer_boundary(self) -> frozenset:
        return frozenset(s for s in self.boundary_sites if not self._inside(s))


@dataclass(frozen=True, eq=False)
class LevelLineSet:
    """
    Contours separating {eta >= h} from {eta < h}. A contour is positive when
    {eta >= h} lies on its inside and negative when it lies outside.
    """
    h: int
    L: int
    contours: tuple = field(repr=False)
    positive: tuple = field(repr=False)

    def __len__(self):
        return len(self.contours)

    def __iter__(self):
        return iter(zip(self.contours, self.positive))

    def positive_contours(self) -> list[GeometricContour]:
        return [c for c, pos in self if pos]

    def negative_contours(self) -> list[GeometricContour]:
        return [c for c, pos in self if not pos]

    @property
    def total_length(self) -> int:
        return sum(c.length for c in self.contours)

    def select(self, keep) -> 'LevelLineSet':
        kept = [(c, pos) for c, pos in self if keep(c)]
        return LevelLineSet(
            h=self.h, L=self.L,
            contours=tuple(c for c, _ in kept),
            positive=tuple(pos for _, pos in kept),
        )


def _discordance(config: HeightConfig, h: int):
    """Above-level mask on the padded grid and the discordant row and col bonds"""
    U = config.padded() >= h
    row_bonds = U[1:, :] != U[:-1, :]  # (a, b)-(a+1, b)
    col_bonds = U[:, 1:] != U[:, :-1]  # (a, b)-(a, b+1)
    return U, row_bonds, col_bonds


def discordant_bond_count(config: HeightConfig, h: int) -> int:
    """Number of bonds with exactly one endpoint at height >= h"""
    _, row_bonds, col_bonds = _discordance(config, h)
    return int(row_bonds.sum() + col_bonds.sum())


def _arm_bond(i: int, j: int, arm: int) -> tuple:
    """Padded-grid bond crossed by `arm` of dual vertex (i, j): ('r', a, b) or ('c', a, b)"""
    if arm == N:
        return 'r', i, j + 1
    if arm == S:
        return 'r', i, j
    if arm == E:
        return 'c', i + 1, j
    return 'c', i, j


def extract_level_lines(config: HeightConfig, h: int) -> LevelLineSet:
    """
    Decompose the discordant dual edges at level h into circuits

    Args:
        config: heights with a constant boundary
        h: level

    Returns:
        LevelLineSet; every discordant dual edge lies on exactly one contour
    """
    L = config.L
    U, row_bonds, col_bonds = _discordance(config, h)

    def present(bond) -> bool:
        kind, a, b = bond
        grid = row_bonds if kind == 'r' else col_bonds
        return 0 <= a < grid.shape[0] and 0 <= b < grid.shape[1] and bool(grid[a, b])

    def arms(i, j) -> list[int]:
        return [arm for arm in (N, E, S, W) if present(_arm_bond(i, j, arm))]

    def sites_of(bond) -> tuple:
        # padded (a, b) -> config (a-1, b-1)
        kind, a, b = bond
        if kind == 'r':
            return (a - 1, b - 1), (a, b - 1)
        return (a - 1, b - 1), (a - 1, b)

    used = set()
    contours, positive = [], []
    starts = [('r', int(a), int(b)) for a, b in np.argwhere(row_bonds)]
    starts += [('c', int(a), int(b)) for a, b in np.argwhere(col_bonds)]
    for first in starts:
        if first in used:
            continue
        kind, a, b = first
        # leave the vertex below the bond (row bond) or to its west (col bond)
        vertex, out = ((a, b - 1), N) if kind == 'r' else ((a - 1, b), E)
        edges, vertices, turns = [], [], []
        bond = first
        while True:
            used.add(bond)
            edges.append(sites_of(bond))
            vertices.append(vertex)
            di, dj = ARM_STEP[out]
            vertex = (vertex[0] + di, vertex[1] + dj)
            arrival = _opposite(out)
            here = arms(*vertex)
            out = _linked(arrival) if len(here) == 4 else next(x for x in here if x != arrival)
            if frozenset((arrival, out)) in NON_LINKED_TURNS:
                turns.append(vertex)
            bond = _arm_bond(*vertex, out)
            if bond == first:
                break

        contour = GeometricContour(L=L, edges=tuple(edges), vertices=tuple(vertices), turn_vertices=tuple(turns))
        # sign from which endpoint of the first crossed bond is above the level
        p, q = edges[0]
        high = p if U[p[0] + 1, p[1] + 1] else q
        contours.append(contour)
        positive.append(contour._inside(high))

    logger.debug('level %d: %d contours', h, len(contours))
    return LevelLineSet(h=h, L=L, contours=tuple(contours), positive=tuple(positive))


def macroscopic_filter(levels: LevelLineSet, L: int | None = None) -> LevelLineSet:
    """Keep contours strictly longer than (log L)^2"""
    threshold = macroscopic_threshold(L if L is not None else levels.L)
    return levels.select(lambda c: c.length > threshold)
