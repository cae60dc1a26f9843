import logging
from pathlib import Path

from pinnacle.harmonic.kernel import kernel_asymptote, potential_kernel
from pinnacle.utils import constants
from pinnacle.utils.storage import Storage


logger = logging.getLogger(__name__)


def run_kernel(
        R: int,
        tol: float = constants.DEFAULT_TOL,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> float:
    """Tabulate a(x) on [-R, R]^2 and return a((1, 0))"""
    table = potential_kernel(R, tol)
    frame = table.to_frame()
    logger.info('a(1,0) = %.6f, source strength %.6f', table(1, 0), table.source_strength())

    # residual against the two-term expansion along the positive axis
    axis = frame[(frame['y'] == 0) & (frame['x'] > 0)].copy()
    axis['asymptote'] = kernel_asymptote(axis['x'].to_numpy(), 0)
    axis['residual'] = (axis['a'] - axis['asymptote']).abs()

    with Storage(out_dir) as storage:
        storage.write_frame(out or 'kernel', frame, constants.KERNEL_COLUMNS)
        storage.write_frame('kernel_axis', axis, 'x, a, asymptote, residual')
    return table(1, 0)
