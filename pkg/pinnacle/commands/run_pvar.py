from pathlib import Path

import pandas as pd

from pinnacle.pvar.minimizer import DEFAULT_PVAR_TOL, minimize_p_energy, radius_sweep
from pinnacle.utils import constants
from pinnacle.utils.storage import Storage


def run_pvar(
        p: float,
        radii: list[int],
        tol: float = DEFAULT_PVAR_TOL,
        method: str = 'newton',
        profile: bool = False,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> pd.DataFrame:
    """p-energy minima over the radii; `profile` also writes the minimizer at the largest radius"""
    sweep = radius_sweep(p, radii, tol=tol, method=method)
    with Storage(out_dir) as storage:
        storage.write_frame(out or 'pvar', sweep, constants.PVAR_COLUMNS)
        if profile:
            result = minimize_p_energy(p, max(radii), tol=tol, method=method)
            storage.write_frame('pvar_profile', result.to_frame(), constants.PROFILE_COLUMNS)
    return sweep
