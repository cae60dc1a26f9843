"""
Edge-disjoint, non-crossing down-right path families at the minimal endpoints.

Path i (i = 0..h-1) runs from (0, k_i) to (k_i, 0) with k_i = h-1-i, taking
unit steps (+1, 0) and (0, -1). It is stored by its heights: y_i(s) is the
height of its horizontal step from x = s to x = s+1, for s < k_i, so
k_i >= y_i(0) >= ... >= y_i(k_i - 1) >= 0. Path h-1 is the single point (0, 0).
"""
import logging
from dataclasses import dataclass

from pinnacle.utils import constants
from pinnacle.utils.errors import StateSpaceTooLarge, ValidityError


logger = logging.getLogger(__name__)


def _k(h: int, i: int) -> int:
    return h - 1 - i


@dataclass(frozen=True)
class PathFamily:
    h: int
    heights: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        heights = tuple(tuple(int(y) for y in path) for path in self.heights)
        object.__setattr__(self, 'heights', heights)
        if len(heights) != self.h:
            raise ValidityError(f'Expected {self.h} paths, got {len(heights)}')
        for i, ys in enumerate(heights):
            k = _k(self.h, i)
            if len(ys) != k:
                raise ValidityError(f'Path {i} needs {k} horizontal steps, got {len(ys)}')
            if any(not 0 <= y <= k for y in ys) or any(a < b for a, b in zip(ys, ys[1:])):
                raise ValidityError(f'Path {i} is not a down-right path from (0, {k}) to ({k}, 0): {ys}')
        for i in range(self.h - 1):
            upper, lower = heights[i], heights[i + 1]
            k = _k(self.h, i + 1)
            for s in range(k):
                if lower[s] >= upper[s]:
                    raise ValidityError(f'Paths {i} and {i + 1} share or cross a horizontal edge at column {s}')
            for s in range(k + 1):
                below = lower[s - 1] if s > 0 else k
                if below > upper[s]:
                    raise ValidityError(f'Paths {i} and {i + 1} share a vertical edge at x={s}')

    @property
    def endpoints(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(a, b): path i ends at (a_i, 0) and starts at (0, b_i); both are (h-1, ..., 0)"""
        u = tuple(range(self.h - 1, -1, -1))
        return u, u

    def lengths(self) -> list[int]:
        return [2 * _k(self.h, i) for i in range(self.h)]

    def steps(self, i: int) -> str:
        """Path i as a word in R (right) and D (down)"""
        k = _k(self.h, i)
        ys = self.heights[i]
        out, y = [], k
        for s in range(k):
            out.append('D' * (y - ys[s]))
            out.append('R')
            y = ys[s]
        out.append('D' * y)
        return ''.join(out)

    def render(self) -> str:
        return '\n'.join(f'{i}: {self.steps(i) or "."}' for i in range(self.h))


def _path_choices(k: int, upper: tuple[int, ...] | None):
    """Every height sequence of a path with span k lying strictly inside `upper` without sharing edges"""
    if upper is not None and k > upper[0]:
        return

    def bound(s: int, prev: int) -> int:
        top = prev
        if upper is not None:
            top = min(top, upper[s] - 1, upper[s + 1])
        return top

    def extend(prefix: list[int]):
        s = len(prefix)
        if s == k:
            yield tuple(prefix)
            return
        prev = prefix[-1] if prefix else k
        for y in range(bound(s, prev), -1, -1):
            prefix.append(y)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def iter_path_families(h: int):
    """Depth-first over paths from the outermost inward"""
    if h > constants.PATH_FAMILY_MAX_H:
        raise StateSpaceTooLarge(
            f'Exhaustive path enumeration is limited to h <= {constants.PATH_FAMILY_MAX_H}, got {h}', count=h
        )

    def extend(prefix: list[tuple[int, ...]]):
        i = len(prefix)
        if i == h:
            yield PathFamily(h=h, heights=tuple(prefix))
            return
        for ys in _path_choices(_k(h, i), prefix[-1] if prefix else None):
            prefix.append(ys)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def enumerate_path_families(h: int) -> int:
    """Number of families at the minimal endpoints (h-1, ..., 0)"""
    count = sum(1 for _ in iter_path_families(h))
    logger.info('h=%d: %d path families', h, count)
    return count
