import logging
import time
from pathlib import Path

from pinnacle.experiments.config import load_config
from pinnacle.experiments.runner import run_experiment as run
from pinnacle.models.experiment import ExperimentReport
from pinnacle.utils.storage import Storage


logger = logging.getLogger(__name__)


def run_experiment(config_path: str | Path, out_dir: str | Path | None = None) -> ExperimentReport:
    """Load an experiment file, run it and write every report table"""
    config = load_config(config_path)
    start = time.perf_counter()
    report = run(config)
    logger.info('%s finished in %.1f min', config.experiment.value, (time.perf_counter() - start) / 60)
    with Storage(out_dir if out_dir is not None else config.output_dir) as storage:
        report.write(storage)
    return report
