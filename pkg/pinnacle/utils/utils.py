import math

import pandas as pd

from pinnacle.utils.errors import ConfigError


def to_rows(data) -> list[tuple]:
    """
    Return data as a list of row tuples for the CSV writer
    """
    if isinstance(data, pd.DataFrame):
        return [tuple(x) for x in data.to_numpy()]

    if isinstance(data, list):
        return [tuple(x) for x in data]

    raise TypeError(f'Cannot convert {type(data).__name__} to rows')


def parse_p(value) -> float:
    """Parse an exponent given as a number or as 'inf' / 'infinity' / 'rsos'"""
    if isinstance(value, (int, float)):
        p = float(value)
    else:
        text = str(value).strip().lower()
        if text in ('inf', 'infinity', 'rsos'):
            return math.inf
        try:
            p = float(text)
        except ValueError as err:
            raise ConfigError(f'Cannot read exponent p from {value!r}') from err
    if not p >= 1:
        raise ConfigError(f'Exponent p must be >= 1, got {value!r}')
    return p


def format_p(p: float) -> str:
    return 'inf' if math.isinf(p) else f'{p:g}'


def parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off', ''):
        return False
    raise ConfigError(f'Cannot read a boolean from {value!r}')


def parse_int_list(value) -> list[int]:
    """'32, 64,128' -> [32, 64, 128]"""
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    try:
        return [int(v) for v in str(value).replace(' ', '').split(',') if v]
    except ValueError as err:
        raise ConfigError(f'Cannot read an integer list from {value!r}') from err


def macroscopic_threshold(L: float) -> float:
    """(log L)^2, natural log"""
    return math.log(L) ** 2


def parse_levels(value) -> tuple[int, int]:
    """'2..5' -> (2, 5); a single level '3' -> (3, 3)"""
    text = str(value).replace(' ', '')
    low, _, high = text.partition('..')
    try:
        levels = (int(low), int(high or low))
    except ValueError as err:
        raise ConfigError(f'Cannot read a level range from {value!r}, expected h1..h2') from err
    if levels[0] > levels[1]:
        raise ConfigError(f'Empty level range {value!r}')
    return levels
