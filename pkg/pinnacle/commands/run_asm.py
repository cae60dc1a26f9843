import logging
from pathlib import Path

from pinnacle.asm.formula import asm_growth_ratio, asm_product_formula
from pinnacle.asm.paths import enumerate_path_families, iter_path_families
from pinnacle.asm.six_vertex import paths_to_six_vertex, six_vertex_count, six_vertex_to_asm
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError
from pinnacle.utils.storage import Storage


logger = logging.getLogger(__name__)

COUNTERS = {
    'enumerate': (enumerate_path_families, constants.PATH_FAMILY_MAX_H),
    'sixvertex': (six_vertex_count, constants.SIX_VERTEX_MAX_H),
    'formula': (asm_product_formula, None),
}
MODE_ALIASES = {'paths': 'enumerate', 'six-vertex': 'sixvertex'}


def dump_bijection(h: int, out_dir: str | Path) -> list[Path]:
    """
    Write every path family at level h, its six-vertex grid and its ASM into three
    files whose blocks line up family by family
    """
    renderings = {'paths': [], 'six_vertex': [], 'asm': []}
    for k, family in enumerate(iter_path_families(h)):
        config = paths_to_six_vertex(family)
        renderings['paths'].append(f'# family {k}\n{family.render()}')
        renderings['six_vertex'].append(f'# family {k}\n{config.render()}')
        renderings['asm'].append(f'# family {k}\n{six_vertex_to_asm(config).render()}')

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, blocks in renderings.items():
        path = out_dir / f'{name}_h{h}.txt'
        path.write_text('\n\n'.join(blocks) + '\n')
        paths.append(path)
    logger.info('%d families written to %s', len(renderings['paths']), out_dir)
    return paths


def run_asm(
        h: int,
        modes: list[str] | None = None,
        dump_dir: str | Path | None = None,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> dict[tuple[int, str], int]:
    """
    Count the families at levels 1..h by each mode; a mode is skipped above its own
    limit. Also writes log A(h) / h^2 against its limit and, with `dump_dir`, the
    level-h bijection.
    """
    modes = [MODE_ALIASES.get(m, m) for m in modes or COUNTERS]
    unknown = [m for m in modes if m not in COUNTERS]
    if unknown:
        raise DomainError(f'Unknown modes {unknown}, expected {list(COUNTERS)}')
    if h < 1:
        raise DomainError(f'h must be >= 1, got {h}')

    counts = {}
    for mode in modes:
        counter, limit = COUNTERS[mode]
        for level in range(1, h + 1):
            if limit is not None and level > limit:
                logger.warning('%s counts stop at h=%d', mode, limit)
                break
            counts[(level, mode)] = counter(level)

    with Storage(out_dir) as storage:
        storage.write_table(
            table=out or 'asm_counts',
            columns=constants.ASM_COLUMNS,
            rows=[(level, mode, str(count)) for (level, mode), count in sorted(counts.items())],
        )
        storage.write_table(
            table='asm_growth',
            columns='h, growth_ratio',
            rows=[(level, asm_growth_ratio(level)) for level in range(1, h + 1)],
        )
    if dump_dir is not None:
        dump_bijection(h, dump_dir)
    return counts
