from pathlib import Path

import numpy as np

from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.utils.errors import ConfigError
from pinnacle.utils.utils import format_p, parse_bool, parse_p


def format_snapshot(config: HeightConfig, params: ModelParams) -> str:
    """
    Text form: header 'L p beta floor boundary_height', then L rows of heights,
    row 1 = y = 1. repr() of beta keeps the round trip bit-exact.
    """
    header = f'{config.L} {format_p(params.p)} {params.beta!r} {int(params.floor)} {config.boundary_height}'
    rows = [' '.join(str(int(v)) for v in row) for row in config.heights]
    return '\n'.join([header, *rows]) + '\n'


def parse_snapshot(text: str) -> tuple[HeightConfig, ModelParams]:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ConfigError('Empty snapshot')
    fields = lines[0].split()
    if len(fields) != 5:
        raise ConfigError(f'Snapshot header needs 5 fields, got {lines[0]!r}')
    L = int(fields[0])
    params = ModelParams(
        p=parse_p(fields[1]),
        beta=float(fields[2]),
        floor=parse_bool(fields[3]),
        boundary_height=int(fields[4]),
    )
    if len(lines) != L + 1:
        raise ConfigError(f'Snapshot declares L={L} but has {len(lines) - 1} rows')
    heights = np.array([[int(v) for v in line.split()] for line in lines[1:]], dtype=np.int64)
    if heights.shape != (L, L):
        raise ConfigError(f'Snapshot rows do not form a {L}x{L} grid')
    return HeightConfig(heights=heights, boundary_height=params.boundary_height), params


def write_snapshot(config: HeightConfig, params: ModelParams, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_snapshot(config, params))
    return path


def read_snapshot(path: str | Path) -> tuple[HeightConfig, ModelParams]:
    return parse_snapshot(Path(path).read_text())
