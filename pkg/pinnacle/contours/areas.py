import logging

import pandas as pd

from pinnacle.contours.level_lines import LevelLineSet, extract_level_lines, macroscopic_filter
from pinnacle.models.lattice import HeightConfig


logger = logging.getLogger(__name__)


def _level_row(levels: LevelLineSet, L: int) -> dict:
    macroscopic = macroscopic_filter(levels, L)
    areas = [c.area for c in levels.positive_contours()]
    max_area = max(areas, default=0)
    return {
        'h': levels.h,
        'n_contours': len(levels),
        'n_macroscopic': len(macroscopic),
        'max_area': max_area,
        'total_area': sum(areas),
        'area_fraction': max_area / L ** 2,
        'has_negative_macroscopic': bool(macroscopic.negative_contours()),
    }


def area_statistics(levels, L: int) -> pd.DataFrame:
    """
    One row per level: contour count, macroscopic contours of either sign, largest and
    total area enclosed by positive contours, largest area over L^2, and whether a
    macroscopic negative contour exists

    Args:
        levels: a LevelLineSet or an iterable of them
        L: box side
    """
    if isinstance(levels, LevelLineSet):
        levels = [levels]
    rows = [_level_row(lv, L) for lv in levels]
    columns = ['h', 'n_contours', 'n_macroscopic', 'max_area', 'total_area', 'area_fraction',
               'has_negative_macroscopic']
    return pd.DataFrame(rows, columns=columns)


def level_scan(config: HeightConfig, h_values) -> pd.DataFrame:
    """area_statistics over every level in h_values"""
    return area_statistics([extract_level_lines(config, h) for h in h_values], config.L)
