import logging
from pathlib import Path

from dotenv import dotenv_values

from pinnacle.models.experiment import ExperimentConfig, ExperimentKind
from pinnacle.models.lattice import ModelParams
from pinnacle.utils import constants
from pinnacle.utils.errors import ConfigError, DomainError
from pinnacle.utils.utils import parse_bool, parse_int_list, parse_p


logger = logging.getLogger(__name__)

REQUIRED_KEYS = ['experiment', 'p', 'beta']
OPTIONAL_KEYS = [
    'floor', 'boundary', 'L', 'trials', 'seed', 'burnin', 'sweeps', 'thin', 'schedule',
    'output_dir', 'h_min', 'h_max', 'backend', 'workers', 'coupled', 'rate_constant',
]

# floor setting each experiment runs with when the file leaves it out
DEFAULT_FLOOR = {
    ExperimentKind.MAX_HEIGHT: False,
    ExperimentKind.FLOOR_PLATEAU: True,
    ExperimentKind.LDP_TAIL: False,
    ExperimentKind.TILE_RELATION: False,
}


def _number(values: dict, key: str, cast, default=None):
    raw = values.get(key)
    if raw is None or str(raw).strip() == '':
        return default
    try:
        return cast(str(raw).strip())
    except ValueError as err:
        raise ConfigError(f'{key} = {raw!r} is not a valid {cast.__name__}') from err


def parse_config(values: dict, source: str = '<dict>') -> ExperimentConfig:
    """
    Build an ExperimentConfig from key = value pairs

    Args:
        values: raw string values keyed as in an experiment file
        source: where the values came from, for error messages

    Returns:
        ExperimentConfig
    """
    unknown = sorted(set(values) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS))
    if unknown:
        raise ConfigError(f'{source}: unknown keys {unknown}')
    missing = [k for k in REQUIRED_KEYS if not values.get(k)]
    if missing:
        raise ConfigError(f'{source}: missing required keys {missing}')

    try:
        experiment = ExperimentKind(str(values['experiment']).strip().upper())
    except ValueError as err:
        raise ConfigError(f'{source}: unknown experiment {values["experiment"]!r}') from err

    if values.get('L'):
        L_values = parse_int_list(values['L'])
    elif experiment == ExperimentKind.TILE_RELATION:
        L_values = [constants.MIN_TAIL_SIDE]
    else:
        raise ConfigError(f'{source}: missing required key L')

    floor = DEFAULT_FLOOR[experiment] if values.get('floor') is None else parse_bool(values['floor'])
    try:
        params = ModelParams(
            p=parse_p(values['p']),
            beta=_number(values, 'beta', float),
            floor=floor,
            boundary_height=_number(values, 'boundary', int, 0),
        )
    except DomainError as err:
        raise ConfigError(f'{source}: {err}') from err

    kwargs = {
        'trials': _number(values, 'trials', int, 1),
        'seed': _number(values, 'seed', int, constants.DEFAULT_SEED),
        'burnin': _number(values, 'burnin', int),
        'sweeps': _number(values, 'sweeps', int, 0),
        'thinning': _number(values, 'thin', int, 1),
        'h_min': _number(values, 'h_min', int, 1),
        'h_max': _number(values, 'h_max', int, 10),
        'workers': _number(values, 'workers', int, constants.WORKERS),
        'rate_constant': _number(values, 'rate_constant', float),
        'coupled': parse_bool(values.get('coupled') or False),
    }
    for key, field_name in [('schedule', 'schedule'), ('backend', 'backend'), ('output_dir', 'output_dir')]:
        if values.get(key):
            kwargs[field_name] = str(values[key]).strip()

    config = ExperimentConfig(experiment=experiment, params=params, L_values=tuple(L_values), **kwargs)
    logger.debug('%s: %s', source, config)
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an experiment file of `key = value` lines"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f'No experiment file at {path}')
    return parse_config(dotenv_values(path), source=str(path))
