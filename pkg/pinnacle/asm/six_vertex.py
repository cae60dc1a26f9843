"""
Six-vertex configurations with domain-wall boundary on the vertex grid {0..h-1}^2,
and their bijections with path families and alternating sign matrices.

Each path of a family is extended by a stub entering from the left at its
starting row and a stub leaving through the bottom at its end column, so every
left and bottom boundary edge is occupied and every top and right one is empty.
At a vertex where all four edges are occupied the two paths touch without
crossing: the one arriving from the west leaves south and the one arriving
from the north leaves east.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from pinnacle.asm.formula import ASMatrix
from pinnacle.asm.paths import PathFamily
from pinnacle.utils import constants
from pinnacle.utils.errors import StateSpaceTooLarge, ValidityError


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SixVertexConfig:
    """
    Attributes:
        horizontal: (h, h+1) occupancy, horizontal[y, x + 1] is the edge from (x, y) to (x+1, y), x = -1..h-1
        vertical: (h+1, h) occupancy, vertical[y, x] is the edge from (x, y-1) to (x, y), y = 0..h
    """
    h: int
    horizontal: np.ndarray = field(repr=False)
    vertical: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = self.h
        H = np.array(self.horizontal, dtype=np.int64, copy=True)
        V = np.array(self.vertical, dtype=np.int64, copy=True)
        if H.shape != (h, h + 1) or V.shape != (h + 1, h):
            raise ValidityError(f'Edge arrays for h={h} must be {(h, h + 1)} and {(h + 1, h)}, got {H.shape}, {V.shape}')
        if not (np.isin(H, (0, 1)).all() and np.isin(V, (0, 1)).all()):
            raise ValidityError('Edge occupancies must be 0 or 1')
        if h and not (H[:, 0].all() and not H[:, -1].any() and V[0, :].all() and not V[-1, :].any()):
            raise ValidityError('Boundary edges break the domain-wall pattern')
        for y in range(h):
            for x in range(h):
                w, n, e, s = H[y, x], V[y + 1, x], H[y, x + 1], V[y, x]
                if w + n != e + s:
                    raise ValidityError(f'Vertex ({x}, {y}) has {w + n} incoming and {e + s} outgoing edges')
        H.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, 'horizontal', H)
        object.__setattr__(self, 'vertical', V)

    def edges(self, x: int, y: int) -> tuple[int, int, int, int]:
        """(west, north, east, south) occupancy at vertex (x, y)"""
        return (int(self.horizontal[y, x]), int(self.vertical[y + 1, x]),
                int(self.horizontal[y, x + 1]), int(self.vertical[y, x]))

    def render(self) -> str:
        """Top row first; one symbol per vertex type"""
        symbols = {(0, 0, 0, 0): '.', (1, 0, 1, 0): '-', (0, 1, 0, 1): '|',
                   (1, 0, 0, 1): '7', (0, 1, 1, 0): 'L', (1, 1, 1, 1): '+'}
        return '\n'.join(
            ''.join(symbols[self.edges(x, y)] for x in range(self.h))
            for y in range(self.h - 1, -1, -1)
        )


def paths_to_six_vertex(family: PathFamily) -> SixVertexConfig:
    h = family.h
    H = np.zeros((h, h + 1), dtype=np.int64)
    V = np.zeros((h + 1, h), dtype=np.int64)
    for i, ys in enumerate(family.heights):
        k = h - 1 - i
        H[k, 0] = 1
        top = k
        for s in range(k + 1):
            bottom = ys[s] if s < k else 0
            V[bottom + 1:top + 1, s] = 1
            if s < k:
                H[ys[s], s + 1] = 1
            top = bottom
        V[0, k] = 1
    return SixVertexConfig(h=h, horizontal=H, vertical=V)


def six_vertex_to_paths(config: SixVertexConfig) -> PathFamily:
    """Trace every path from its left stub, touching paths kept apart at full vertices"""
    h = config.h
    heights = []
    for i in range(h):
        k = h - 1 - i
        x, y, came_from = 0, k, 'W'
        ys = []
        while True:
            w, n, e, s = config.edges(x, y)
            if w and n and e and s:
                go = 'S' if came_from == 'W' else 'E'
            else:
                go = 'E' if e else 'S'
            if go == 'E':
                ys.append(y)
                x, came_from = x + 1, 'W'
            elif y == 0:
                break
            else:
                y, came_from = y - 1, 'N'
        if x != k:
            raise ValidityError(f'Path entering at row {k} leaves through column {x}, expected {k}')
        heights.append(tuple(ys))
    return PathFamily(h=h, heights=tuple(heights))


def six_vertex_to_asm(config: SixVertexConfig) -> ASMatrix:
    """Entry at vertex (x, y) is west minus east occupancy; matrix row r is y = h-1-r"""
    H = config.horizontal
    entries = (H[:, :-1] - H[:, 1:])[::-1]
    return ASMatrix(entries=entries)


def asm_to_six_vertex(matrix: ASMatrix) -> SixVertexConfig:
    h = matrix.h
    A = np.asarray(matrix.entries)[::-1]  # A[y, x]
    H = np.ones((h, h + 1), dtype=np.int64)
    H[:, 1:] = 1 - np.cumsum(A, axis=1)
    V = np.zeros((h + 1, h), dtype=np.int64)
    V[:h] = np.cumsum(A[::-1], axis=0)[::-1]
    return SixVertexConfig(h=h, horizontal=H, vertical=V)


def six_vertex_count(h: int) -> int:
    """
    Domain-wall configurations counted row by row from the top; the state is
    the occupancy of the vertical edges entering the row from above
    """
    if h > constants.SIX_VERTEX_MAX_H:
        raise StateSpaceTooLarge(
            f'Transfer count is limited to h <= {constants.SIX_VERTEX_MAX_H}, got {h}', count=h
        )
    if h == 0:
        return 1

    def rows(above: tuple[int, ...]):
        """Every vertical occupancy leaving a row downward, given the row's top edges"""
        def walk(x: int, carry: int, below: list[int]):
            if x == h:
                if carry == 0:
                    yield tuple(below)
                return
            incoming = carry + above[x]
            options = ((0, 0),) if incoming == 0 else ((1, 1),) if incoming == 2 else ((1, 0), (0, 1))
            for east, south in options:
                below.append(south)
                yield from walk(x + 1, east, below)
                below.pop()

        yield from walk(0, 1, [])

    states = {(0,) * h: 1}
    for _ in range(h):
        nxt = {}
        for above, count in states.items():
            for below in rows(above):
                nxt[below] = nxt.get(below, 0) + count
        states = nxt
    return states.get((1,) * h, 0)
