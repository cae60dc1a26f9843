import logging
from pathlib import Path

import pandas as pd

from pinnacle.contours.areas import level_scan
from pinnacle.contours.events import detect_circuit_event, detect_path_event
from pinnacle.contours.level_lines import discordant_bond_count, extract_level_lines
from pinnacle.lattice.energy import hamiltonian
from pinnacle.lattice.snapshots import read_snapshot
from pinnacle.utils.errors import ConfigError
from pinnacle.utils.storage import Storage


logger = logging.getLogger(__name__)


def _snapshot_files(target: Path) -> list[Path]:
    if target.is_dir():
        files = sorted(target.glob('*.txt'))
    else:
        files = [target]
    if not files or not files[0].exists():
        raise ConfigError(f'No snapshots found at {target}')
    return files


def run_analyze(
        target: str | Path,
        h_min: int = 1,
        h_max: int | None = None,
        path_event: tuple[float, int] | None = None,
        circuit_event: tuple[int, int] | None = None,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> pd.DataFrame:
    """
    Re-analyze snapshot files offline: energy, level-line statistics per level and,
    if asked, the path event (r, h) and circuit event (j, margin)

    Args:
        target: a snapshot file or a directory of them
        h_min, h_max: levels to scan, h_max defaults to each snapshot's maximum
        out: path of the level table, defaults to <out_dir>/levels.csv

    Returns:
        The level table over all snapshots
    """
    frames, summary, events = [], [], []
    for path in _snapshot_files(Path(target)):
        config, params = read_snapshot(path)
        top = config.max_height if h_max is None else h_max
        levels = level_scan(config, range(h_min, top + 1))
        levels.insert(0, 'snapshot', path.name)
        frames.append(levels)
        for h in range(h_min, top + 1):
            lines = extract_level_lines(config, h)
            if lines.total_length != discordant_bond_count(config, h):
                logger.warning('%s: level %d contour length differs from its discordant bonds', path.name, h)
        summary.append((path.name, config.L, config.max_height, config.mean_height, hamiltonian(config, params)))

        if path_event is not None:
            r, h = path_event
            event = detect_path_event(config, r, h)
            events.append((path.name, 'path', f'r={r:g} h={h}', event.occurred, len(event.path)))
        if circuit_event is not None:
            j, margin = circuit_event
            event = detect_circuit_event(config, j, margin)
            witness = len(event.circuit) if event.occurred else len(event.blocking_path)
            events.append((path.name, 'circuit', f'j={j} margin={margin}', event.occurred, witness))

    table = pd.concat(frames, ignore_index=True)
    with Storage(out_dir) as storage:
        storage.write_frame(out or 'levels', table, ', '.join(table.columns))
        storage.write_table(table='snapshots', columns='snapshot, L, max_height, mean_height, energy', rows=summary)
        if events:
            storage.write_table(table='events', columns='snapshot, event, arguments, occurred, witness_size',
                                rows=events)
    return table
