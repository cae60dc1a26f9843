import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, ValidityError


logger = logging.getLogger(__name__)

DEFAULT_SEARCH_BUDGET = 20_000


@dataclass(frozen=True, eq=False)
class NestedContourFamily:
    """
    Nested circuits gamma_1 ⊇ ... ⊇ gamma_h around the origin, each given by the
    set of sites it encloses. A dual edge of gamma_i is a bond with exactly one
    endpoint enclosed.

    Attributes:
        interiors: (h, n, n) boolean masks over the window [-o, o]^2, largest first
        offset: o, so that interiors[i, x + o, y + o] says whether (x, y) is enclosed
    """
    interiors: np.ndarray = field(repr=False)
    offset: int

    def __post_init__(self):
        masks = np.array(self.interiors, dtype=bool, copy=True)
        if masks.ndim != 3 or masks.shape[1] != masks.shape[2] or masks.shape[1] != 2 * self.offset + 1:
            raise ValidityError(f'interiors must have shape (h, 2o+1, 2o+1), got {masks.shape}')
        o = self.offset
        for i, mask in enumerate(masks):
            if not mask[o, o]:
                raise ValidityError(f'Circuit {i + 1} does not enclose the origin')
            if mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any():
                raise ValidityError(f'Circuit {i + 1} touches the edge of the window')
            _, n_parts = ndimage.label(mask)
            if n_parts != 1:
                raise ValidityError(f'Circuit {i + 1} encloses {n_parts} separate regions')
            if not np.array_equal(ndimage.binary_fill_holes(mask), mask):
                raise ValidityError(f'Circuit {i + 1} encloses a hole, so it is not a single circuit')
        for i in range(len(masks) - 1):
            if (masks[i + 1] & ~masks[i]).any():
                raise ValidityError(f'Circuit {i + 2} is not nested inside circuit {i + 1}')
        masks.setflags(write=False)
        object.__setattr__(self, 'interiors', masks)

    @property
    def h(self) -> int:
        return len(self.interiors)

    @classmethod
    def from_rectangles(cls, extents, offset: int | None = None) -> 'NestedContourFamily':
        """
        Args:
            extents: per circuit (left, right, down, up) >= 0, enclosing
                -left <= x <= right and -down <= y <= up
            offset: window half-width, defaults to one more than the largest extent
        """
        extents = np.asarray(extents, dtype=np.int64).reshape(-1, 4)
        if (extents < 0).any():
            raise ValidityError('Rectangle extents must be >= 0')
        o = int(extents.max(initial=0)) + 1 if offset is None else offset
        xs = np.arange(-o, o + 1)
        masks = np.zeros((len(extents), 2 * o + 1, 2 * o + 1), dtype=bool)
        for k, (left, right, down, up) in enumerate(extents):
            inx = (xs >= -left) & (xs <= right)
            iny = (xs >= -down) & (xs <= up)
            masks[k] = inx[:, None] & iny[None, :]
        return cls(interiors=masks, offset=o)

    @classmethod
    def pyramid(cls, h: int) -> 'NestedContourFamily':
        """Concentric squares of side 2j+1, j = h-1 down to 0; every edge used once"""
        return cls.from_rectangles([(j, j, j, j) for j in range(h - 1, -1, -1)])

    @classmethod
    def stacked(cls, h: int, half_width: int = 0) -> 'NestedContourFamily':
        """h copies of one square of side 2 * half_width + 1"""
        w = half_width
        return cls.from_rectangles([(w, w, w, w)] * h)

    def multiplicities(self) -> tuple[np.ndarray, np.ndarray]:
        """Delta_e on the horizontal-neighbor and vertical-neighbor bonds of the window"""
        m = self.interiors
        dx = (m[:, 1:, :] != m[:, :-1, :]).sum(axis=0)
        dy = (m[:, :, 1:] != m[:, :, :-1]).sum(axis=0)
        return dx, dy

    def lengths(self) -> np.ndarray:
        """|gamma_i| for every circuit"""
        m = self.interiors
        return (m[:, 1:, :] != m[:, :-1, :]).sum(axis=(1, 2)) + (m[:, :, 1:] != m[:, :, :-1]).sum(axis=(1, 2))


def nested_energy(family: NestedContourFamily, p: float) -> float:
    """sum over dual edges of Delta_e^p"""
    if not p >= 1:
        raise DomainError(f'p must be >= 1, got {p}')
    dx, dy = family.multiplicities()
    delta = np.concatenate([dx[dx > 0], dy[dy > 0]]).astype(np.float64)
    return float(np.sum(delta ** p))


@dataclass(frozen=True, eq=False)
class NestedProbeResult:
    h: int
    p: float
    family: NestedContourFamily
    energy: float
    evaluations: int
    exhaustive: bool

    @property
    def ratio(self) -> float:
        return self.energy / self.h ** 2

    def extents(self) -> list[tuple[int, int, int, int]]:
        """(left, right, down, up) of each circuit"""
        o = self.family.offset
        out = []
        for mask in self.family.interiors:
            xs = np.flatnonzero(mask.any(axis=1)) - o
            ys = np.flatnonzero(mask.any(axis=0)) - o
            out.append((int(-xs[0]), int(xs[-1]), int(-ys[0]), int(ys[-1])))
        return out


def _square_count(h: int) -> int:
    # non-increasing half-width sequences of length h with values in [0, 2h]
    return math.comb(3 * h, h)


def _square_energy(widths, p: float) -> float:
    """Energy of centered squares: distinct half-widths never share an edge"""
    values, counts = np.unique(np.asarray(widths), return_counts=True)
    return float(np.sum(counts.astype(np.float64) ** p * (8 * values + 4)))


def _exhaustive_squares(h: int, p: float) -> tuple[list[int], float, int]:
    best, best_energy, n = None, math.inf, 0
    for widths in itertools.combinations_with_replacement(range(2 * h, -1, -1), h):
        n += 1
        e = _square_energy(widths, p)
        if e < best_energy:
            best, best_energy = list(widths), e
    return best, best_energy, n


def _rectangle_energy(extents: np.ndarray, p: float) -> float:
    return nested_energy(NestedContourFamily.from_rectangles(extents, offset=2 * len(extents) + 1), p)


def _local_search(h: int, p: float, budget: int, rng: np.random.Generator) -> tuple[np.ndarray, float, int]:
    """Greedy +-1 moves on rectangle sides, kept monotone, restarted from the pyramid and the stacked family"""
    cap = 2 * h
    seeds = [
        np.array([(j, j, j, j) for j in range(h - 1, -1, -1)], dtype=np.int64),
        np.zeros((h, 4), dtype=np.int64),
    ]
    random_starts = (rng.integers(0, cap + 1, size=(h, 4)) for _ in itertools.count())
    best, best_energy = seeds[0], _rectangle_energy(seeds[0], p)
    n = 1
    for start in itertools.chain(seeds, random_starts):
        if n >= budget:
            break
        current = -np.sort(-start, axis=0)
        energy = _rectangle_energy(current, p)
        n += 1
        stall = 0
        while n < budget and stall < 8 * h:
            i, side = int(rng.integers(h)), int(rng.integers(4))
            trial = current.copy()
            trial[i, side] += 1 if rng.random() < 0.5 else -1
            column = trial[:, side]
            if column[i] < 0 or column[i] > cap or (np.diff(column) > 0).any():
                stall += 1
                continue
            e = _rectangle_energy(trial, p)
            n += 1
            if e <= energy:
                stall = 0 if e < energy else stall + 1
                current, energy = trial, e
            else:
                stall += 1
        if energy < best_energy:
            best, best_energy = current, energy
    return best, best_energy, n


def probe_nested_lower_bound(
        h: int,
        p: float,
        search_budget: int = DEFAULT_SEARCH_BUDGET,
        seed: int = constants.DEFAULT_SEED,
) -> NestedProbeResult:
    """
    Search nested axis-aligned rectangle families for the smallest nested energy

    Centered squares are searched exhaustively when their count fits the budget;
    otherwise a seeded local search over rectangle sides runs for `search_budget`
    energy evaluations. The result is the best family found, not a certified minimum.

    Args:
        h: number of circuits, 1 <= h <= 12
        p: exponent, > 2
        search_budget: energy evaluations allowed
        seed: seed of the local search

    Returns:
        NestedProbeResult with the best family, its energy and E / h^2
    """
    if not 1 <= h <= constants.NESTED_PROBE_MAX_H:
        raise DomainError(f'h must lie in [1, {constants.NESTED_PROBE_MAX_H}], got {h}')
    if not p > 2:
        raise DomainError(f'The nested probe targets p > 2, got {p}')

    if _square_count(h) <= search_budget:
        widths, energy, n = _exhaustive_squares(h, p)
        family = NestedContourFamily.from_rectangles([(w, w, w, w) for w in widths])
        exhaustive = True
    else:
        extents, energy, n = _local_search(h, p, search_budget, np.random.default_rng(seed))
        family = NestedContourFamily.from_rectangles(extents)
        exhaustive = False
    # recompute on the family itself so the reported energy is the exact one
    energy = nested_energy(family, p)
    logger.info('nested probe h=%d p=%g: E=%g (E/h^2=%.4f) after %d evaluations%s',
                h, p, energy, energy / h ** 2, n, ' (exhaustive)' if exhaustive else '')
    return NestedProbeResult(h=h, p=p, family=family, energy=energy, evaluations=n, exhaustive=exhaustive)
