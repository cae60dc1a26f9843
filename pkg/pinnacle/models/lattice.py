import math
from dataclasses import dataclass, field

import numpy as np

from pinnacle.utils import constants
from pinnacle.utils.errors import AdmissibilityError, DomainError
from pinnacle.utils.utils import format_p


@dataclass(frozen=True)
class ModelParams:
    """
    Parameters of a p-power gradient height model

    Attributes:
        p: gradient exponent, 1 <= p, math.inf for the restricted (RSOS) model
        beta: inverse temperature
        floor: condition on every interior height being >= 0
        boundary_height: constant height outside the box
    """
    p: float
    beta: float
    floor: bool = False
    boundary_height: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'p', float(self.p))
        object.__setattr__(self, 'beta', float(self.beta))
        object.__setattr__(self, 'boundary_height', int(self.boundary_height))
        if not self.p >= 1:
            raise DomainError(f'p must be >= 1, got {self.p}')
        if not self.beta > 0 or math.isinf(self.beta):
            raise DomainError(f'beta must be a positive finite number, got {self.beta}')
        if self.floor and self.boundary_height < 0:
            raise DomainError(f'floored model needs boundary_height >= 0, got {self.boundary_height}')

    @property
    def is_rsos(self) -> bool:
        return math.isinf(self.p)

    @property
    def exact_energy(self) -> bool:
        """p in {1, 2, inf}: energies are integers"""
        return self.p in (1.0, 2.0) or self.is_rsos

    @property
    def window(self) -> int:
        """Half-width W of the heat-bath candidate window around the neighbor range"""
        if self.is_rsos:
            return 1
        return math.ceil((constants.WINDOW_MASS_EXPONENT / self.beta) ** (1 / self.p)) + constants.WINDOW_PAD

    def bond_cost(self, d):
        """|d|^p for an integer gradient d (array or scalar)"""
        d = np.abs(d)
        if self.p == 1.0:
            return d
        if self.p == 2.0:
            return d * d
        if self.is_rsos:
            return (d != 0).astype(np.int64) if isinstance(d, np.ndarray) else int(d != 0)
        return d.astype(np.float64) ** self.p if isinstance(d, np.ndarray) else float(d) ** self.p

    def with_boundary(self, boundary_height: int) -> 'ModelParams':
        return ModelParams(p=self.p, beta=self.beta, floor=self.floor, boundary_height=boundary_height)

    def with_floor(self, floor: bool) -> 'ModelParams':
        return ModelParams(p=self.p, beta=self.beta, floor=floor, boundary_height=self.boundary_height)

    def __repr__(self):
        return f'ModelParams(p={format_p(self.p)}, beta={self.beta:g}, floor={self.floor}, boundary={self.boundary_height})'


@dataclass(frozen=True)
class Bond:
    """
    Nearest-neighbor bond between two sites given as (row, col) array indices.
    An index of -1 or L denotes a boundary site just outside the box.
    """
    a: tuple[int, int]
    b: tuple[int, int]

    def __post_init__(self):
        if abs(self.a[0] - self.b[0]) + abs(self.a[1] - self.b[1]) != 1:
            raise DomainError(f'Bond endpoints {self.a} and {self.b} are not nearest neighbors')

    def is_boundary(self, L: int) -> bool:
        return not (_inside(self.a, L) and _inside(self.b, L))


def _inside(site: tuple[int, int], L: int) -> bool:
    return 0 <= site[0] < L and 0 <= site[1] < L


@dataclass(frozen=True, eq=False)
class HeightConfig:
    """
    Integer heights on an L x L box plus one constant boundary height.

    Sites are (row, col) array indices in [0, L)^2; row 0 is y = 1 in the
    snapshot text format. The heights array is kept read-only.
    """
    heights: np.ndarray
    boundary_height: int = 0
    L: int = field(init=False)

    def __post_init__(self):
        heights = np.array(self.heights, dtype=np.int64, copy=True)
        if heights.ndim != 2 or heights.shape[0] != heights.shape[1] or heights.shape[0] < 1:
            raise DomainError(f'heights must be a non-empty square grid, got shape {heights.shape}')
        heights.setflags(write=False)
        object.__setattr__(self, 'heights', heights)
        object.__setattr__(self, 'boundary_height', int(self.boundary_height))
        object.__setattr__(self, 'L', heights.shape[0])

    @classmethod
    def flat(cls, L: int, height: int = 0, boundary_height: int = 0) -> 'HeightConfig':
        return cls(heights=np.full((L, L), height, dtype=np.int64), boundary_height=boundary_height)

    @property
    def center(self) -> tuple[int, int]:
        return self.L // 2, self.L // 2

    @property
    def max_height(self) -> int:
        return int(self.heights.max())

    @property
    def mean_height(self) -> float:
        return float(self.heights.mean())

    def padded(self) -> np.ndarray:
        """Writable (L+2) x (L+2) copy with the boundary ring filled in"""
        P = np.full((self.L + 2, self.L + 2), self.boundary_height, dtype=np.int64)
        P[1:-1, 1:-1] = self.heights
        return P

    def height(self, site: tuple[int, int]) -> int:
        if _inside(site, self.L):
            return int(self.heights[site])
        return self.boundary_height

    def neighbors(self, site: tuple[int, int]) -> list[tuple[int, int]]:
        i, j = site
        return [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]

    def with_height(self, site: tuple[int, int], value: int) -> 'HeightConfig':
        self.check_site(site)
        heights = self.heights.copy()
        heights[site] = value
        return HeightConfig(heights=heights, boundary_height=self.boundary_height)

    def shifted(self, c: int) -> 'HeightConfig':
        return HeightConfig(heights=self.heights + c, boundary_height=self.boundary_height + c)

    def check_site(self, site: tuple[int, int]) -> None:
        if not _inside(site, self.L):
            raise DomainError(f'Site {site} is not inside the {self.L}x{self.L} box')

    def bonds(self):
        """All bonds with at least one endpoint in the box, each once"""
        L = self.L
        for i in range(L):
            for j in range(-1, L):
                yield Bond((i, j), (i, j + 1))
        for i in range(-1, L):
            for j in range(L):
                yield Bond((i, j), (i + 1, j))

    def gradients(self) -> tuple[np.ndarray, np.ndarray]:
        """Horizontal (L, L+1) and vertical (L+1, L) height differences over interior-incident bonds"""
        P = self.padded()
        return P[1:-1, 1:] - P[1:-1, :-1], P[1:, 1:-1] - P[:-1, 1:-1]

    def check_admissible(self, params: ModelParams) -> None:
        """
        Raise AdmissibilityError if the config breaks the floor or, for p = inf,
        the |grad| <= 1 restriction; the message names the first violating bond.
        """
        if params.floor and self.heights.min() < 0:
            site = tuple(int(v) for v in np.argwhere(self.heights < 0)[0])
            raise AdmissibilityError(f'Floored config has negative height at site {site}')
        if params.is_rsos:
            dh, dv = self.gradients()
            bad = np.argwhere(np.abs(dh) > 1)
            if bad.size:
                i, k = (int(v) for v in bad[0])
                bond = Bond((i, k - 1), (i, k))
                raise AdmissibilityError(f'RSOS restriction violated on bond {bond.a}-{bond.b}', bond=bond)
            bad = np.argwhere(np.abs(dv) > 1)
            if bad.size:
                k, j = (int(v) for v in bad[0])
                bond = Bond((k - 1, j), (k, j))
                raise AdmissibilityError(f'RSOS restriction violated on bond {bond.a}-{bond.b}', bond=bond)

    def is_admissible(self, params: ModelParams) -> bool:
        try:
            self.check_admissible(params)
        except AdmissibilityError:
            return False
        return True

    def __eq__(self, other):
        if not isinstance(other, HeightConfig):
            return NotImplemented
        return self.boundary_height == other.boundary_height and np.array_equal(self.heights, other.heights)

    def __hash__(self):
        return hash((self.boundary_height, self.heights.tobytes()))

    def __repr__(self):
        return f'HeightConfig(L={self.L}, boundary={self.boundary_height}, max={self.max_height})'
