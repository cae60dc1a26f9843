from pathlib import Path

from pinnacle.harmonic.dirichlet import (
    asymptotic_I,
    conductance_identity_check,
    dirichlet_energy,
    expected_exit_time,
    hitting_probabilities,
    pinnacle_comparison,
    solve_dirichlet,
)
from pinnacle.utils import constants
from pinnacle.utils.storage import Storage


def run_dirichlet(
        r: float,
        h: float = 1.0,
        tol: float = constants.DEFAULT_TOL,
        hitting: bool = False,
        compare_h: list[int] | None = None,
        out: str | Path | None = None,
        out_dir: str | Path | None = None,
) -> float:
    """
    Solve the pinned-peak Dirichlet problem on B_r and write the profile with its
    energy, the conductance-identity value, the asymptote and E_0 tau

    Returns:
        The Dirichlet energy I_r(h)
    """
    profile = solve_dirichlet(r, h, tol)
    energy = dirichlet_energy(profile)
    identity = conductance_identity_check(r, h, tol).identity if r >= 2 else float('nan')
    asymptote = asymptotic_I(r, h) if r > 1 else float('nan')

    with Storage(out_dir) as storage:
        storage.write_frame(out or 'profile', profile.to_frame(), constants.PROFILE_COLUMNS)
        storage.write_table(
            table='profile_summary',
            columns=constants.PROFILE_SUMMARY_COLUMNS,
            rows=[(r, h, energy, identity, asymptote, expected_exit_time(r, tol))],
        )
        if hitting:
            table, C = hitting_probabilities(r, tol)
            table['C'] = C
            storage.write_frame('hitting', table, 'x, y, norm, escape, formula, diff, C')
        if compare_h:
            comparison = pinnacle_comparison(compare_h, tol)
            storage.write_frame('pinnacle_comparison', comparison, ', '.join(comparison.columns))
    return energy
