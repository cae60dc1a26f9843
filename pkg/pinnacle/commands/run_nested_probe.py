from pathlib import Path

from pinnacle.pvar.nested import DEFAULT_SEARCH_BUDGET, probe_nested_lower_bound
from pinnacle.utils import constants
from pinnacle.utils.storage import Storage
from pinnacle.utils.utils import format_p


def run_nested_probe(
        h_values: list[int],
        p: float,
        search_budget: int = DEFAULT_SEARCH_BUDGET,
        seed: int = constants.DEFAULT_SEED,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> list[float]:
    """Best nested rectangle family per h; family is written as 'l r d u' extents joined by ';'"""
    rows = []
    for h in h_values:
        result = probe_nested_lower_bound(h, p, search_budget=search_budget, seed=seed)
        family = '; '.join(' '.join(str(v) for v in ext) for ext in result.extents())
        rows.append((h, format_p(p), result.energy, result.ratio, family))

    with Storage(out_dir) as storage:
        storage.write_table(table=out or 'nested_probe', columns=constants.NESTED_COLUMNS, rows=rows)
    return [row[3] for row in rows]
