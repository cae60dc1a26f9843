import logging
from collections import deque
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from pinnacle.models.lattice import HeightConfig
from pinnacle.utils.errors import DomainError


logger = logging.getLogger(__name__)

STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class PathEvent(NamedTuple):
    occurred: bool
    path: tuple = ()
    distance: float = 0.0


class CircuitEvent(NamedTuple):
    """
    occurred: whether a *-connected circuit of sites >= j encloses the sub-box
    circuit: the witness circuit when it occurred
    blocking_path: a 4-connected path of sites <= j-1 from the sub-box to the
        outer layer of the box when it did not
    """
    occurred: bool
    circuit: frozenset = frozenset()
    blocking_path: tuple = ()


def _bfs_path(mask: np.ndarray, sources, target_test) -> tuple:
    """Shortest 4-connected path inside `mask` from any source to a site passing target_test"""
    parent = {}
    queue = deque()
    for s in sources:
        parent[s] = None
        queue.append(s)
    while queue:
        site = queue.popleft()
        if target_test(site):
            path = []
            while site is not None:
                path.append(site)
                site = parent[site]
            return tuple(path[::-1])
        i, j = site
        for di, dj in STEPS:
            nxt = (i + di, j + dj)
            if 0 <= nxt[0] < mask.shape[0] and 0 <= nxt[1] < mask.shape[1] and mask[nxt] and nxt not in parent:
                parent[nxt] = site
                queue.append(nxt)
    return ()


def _farthest_pair(sites: np.ndarray) -> tuple[tuple, tuple, float]:
    """Diameter of a site set from its per-row extreme sites, which hold every hull vertex"""
    order = np.lexsort((sites[:, 1], sites[:, 0]))
    sites = sites[order]
    rows, first = np.unique(sites[:, 0], return_index=True)
    last = np.r_[first[1:], len(sites)] - 1
    ends = sites[np.unique(np.r_[first, last])]
    diff = ends[:, None, :] - ends[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    a, b = np.unravel_index(np.argmax(dist), dist.shape)
    return tuple(int(v) for v in ends[a]), tuple(int(v) for v in ends[b]), float(dist[a, b])


def detect_path_event(config: HeightConfig, r: float, h: int) -> PathEvent:
    """
    Whether some 4-connected cluster of sites with height != h holds two sites
    at Euclidean distance >= r

    Returns:
        PathEvent with a witness path joining the two sites inside the cluster
    """
    if not r > 0:
        raise DomainError(f'r must be positive, got {r}')
    mask = config.heights != h
    labels, n = ndimage.label(mask)
    best = None
    for k in range(1, n + 1):
        sites = np.argwhere(labels == k)
        a, b, d = _farthest_pair(sites)
        if d >= r and (best is None or d > best[2]):
            best = (a, b, d)
    if best is None:
        return PathEvent(occurred=False)
    a, b, d = best
    path = _bfs_path(mask, [a], lambda s: s == b)
    return PathEvent(occurred=True, path=path, distance=d)


def sub_box(L: int, margin: int) -> tuple[slice, slice]:
    """Centered sub-box of side L - margin"""
    if margin < 0:
        raise DomainError(f'margin must be >= 0, got {margin}')
    side = L - margin
    if side < 1:
        raise DomainError(f'margin {margin} leaves no sub-box inside L={L}')
    lo = (L - side) // 2
    return slice(lo, lo + side), slice(lo, lo + side)


def detect_circuit_event(config: HeightConfig, j: int, margin: int) -> CircuitEvent:
    """
    Whether the sites at height >= j hold a *-connected circuit whose interior,
    circuit included, contains the centered sub-box of side L - margin.

    By planar duality this fails exactly when a 4-connected path of sites <= j-1
    joins the sub-box to the outside of the box.
    """
    L = config.L
    box = sub_box(L, margin)
    inside = np.zeros((L, L), dtype=bool)
    inside[box] = True

    # low sites joined to the outside through low sites
    low = np.pad(config.heights <= j - 1, 1, constant_values=True)
    labels, _ = ndimage.label(low)
    exterior = (labels == labels[0, 0])[1:-1, 1:-1]

    if (exterior & inside).any():
        low_mask = config.heights <= j - 1
        sources = [tuple(int(v) for v in s) for s in np.argwhere(exterior & inside)]
        path = _bfs_path(low_mask, sources, lambda s: s[0] in (0, L - 1) or s[1] in (0, L - 1))
        return CircuitEvent(occurred=False, blocking_path=path)

    # the region left once the exterior low cluster is removed, around the sub-box
    labels, _ = ndimage.label(~exterior)
    region = ndimage.binary_fill_holes(labels == labels[box][0, 0])
    padded = np.pad(region, 1)
    edge = region & ~ndimage.binary_erosion(padded)[1:-1, 1:-1]
    circuit = frozenset(tuple(int(v) for v in s) for s in np.argwhere(edge))
    return CircuitEvent(occurred=True, circuit=circuit)
