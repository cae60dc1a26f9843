import logging
from pathlib import Path

import pandas as pd

from pinnacle.utils import constants
from pinnacle.utils.utils import to_rows


logger = logging.getLogger(__name__)


class Storage:
    def __init__(
            self,
            out_dir: str | Path | None = None
    ) -> None:
        """
        Initializes a Storage object writing CSV tables under one directory

        Args:
            out_dir (str | Path | None): target directory, defaults to PINNACLE_OUTPUT_DIR
        """
        self.out_dir = Path(out_dir if out_dir is not None else constants.OUTPUT_DIR)
        self.written: list[Path] = []

    def __enter__(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_type is None and self.written:
            logger.info('%d tables written to %s', len(self.written), self.out_dir)

    def path(self, table: str | Path) -> Path:
        """A bare table name lands in out_dir with a .csv suffix; a path is used as given"""
        table = Path(table)
        if table.suffix or table.parent != Path('.'):
            return table
        return self.out_dir / f'{table}.csv'

    def write_table(
            self,
            table: str | Path,
            columns: str,
            rows,
            chunk_size: int = 100_000,
            append: bool = False,
    ) -> int:
        """
        Write rows to a CSV table with a header naming the columns

        Args:
            table (str | Path): table name or explicit file path
            columns (str): comma-separated column names
            rows (list[tuple] | pd.DataFrame): ordered row tuples matching columns order
            chunk_size (int): number of rows per write call
            append (bool): append to an existing table instead of replacing it

        Returns:
            int: number of rows written
        """
        cols = [c.strip() for c in columns.split(',')]
        n_cols = len(cols)
        rows = to_rows(rows)

        # ensure row widths match columns
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise ValueError(
                    f'Row {i} has {len(row)} values but expected {n_cols} for columns {cols}'
                )

        path = self.path(table)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = not (append and path.exists())
        mode = 'a' if append else 'w'

        total = 0
        if not rows:
            pd.DataFrame(columns=cols).to_csv(path, index=False, mode=mode, header=header)
        for i in range(0, len(rows), chunk_size):
            batch = pd.DataFrame(rows[i:i + chunk_size], columns=cols)
            batch.to_csv(path, index=False, mode=mode, header=header)
            mode, header = 'a', False
            total += len(batch)

        self.written.append(path)
        logger.info('%d rows written to %s', total, path)
        return total

    def write_frame(self, table: str | Path, data: pd.DataFrame, columns: str) -> int:
        """Order a DataFrame by `columns` and write it"""
        data = data[columns.split(', ')]
        return self.write_table(table=table, columns=columns, rows=data)

    def read_table(self, table: str | Path) -> pd.DataFrame:
        path = self.path(table)
        if not path.exists():
            raise FileNotFoundError(f'No table at {path}')
        return pd.read_csv(path)
