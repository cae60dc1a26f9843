import numpy as np
import pytest

from pinnacle.models.lattice import HeightConfig, ModelParams


@pytest.fixture
def dg():
    """Discrete Gaussian, beta = 1"""
    return ModelParams(p=2, beta=1.0)


@pytest.fixture
def sos():
    return ModelParams(p=1, beta=1.5)


@pytest.fixture
def rsos():
    return ModelParams(p=float('inf'), beta=1.0)


@pytest.fixture
def spike():
    def make(L: int = 5, h: int = 1, site: tuple[int, int] | None = None) -> HeightConfig:
        heights = np.zeros((L, L), dtype=np.int64)
        heights[site if site is not None else (L // 2, L // 2)] = h
        return HeightConfig(heights=heights)
    return make


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / 'out'
