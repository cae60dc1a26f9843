import numpy as np

from pinnacle.models.lattice import Bond, HeightConfig, ModelParams
from pinnacle.utils.errors import AdmissibilityError


def hamiltonian(config: HeightConfig, params: ModelParams) -> float:
    """
    Sum of |grad|^p over every bond with at least one endpoint in the box

    Args:
        config: heights and boundary height
        params: model parameters; for p = inf the energy counts non-flat bonds

    Returns:
        The energy. Exact integers for p in {1, 2, inf}, float otherwise.
    """
    if params.is_rsos:
        config.check_admissible(params.with_floor(False))
    dh, dv = config.gradients()
    total = params.bond_cost(dh).sum() + params.bond_cost(dv).sum()
    if params.exact_energy:
        return int(total)
    return float(total)


def local_energy(config: HeightConfig, site: tuple[int, int], value: int, params: ModelParams) -> float:
    """Energy of the <= 4 bonds at `site` if it held `value`"""
    nbrs = np.array([config.height(s) for s in config.neighbors(site)], dtype=np.int64)
    d = value - nbrs
    if params.is_rsos:
        bad = np.flatnonzero(np.abs(d) > 1)
        if bad.size:
            other = config.neighbors(site)[int(bad[0])]
            raise AdmissibilityError(
                f'Height {value} at {site} differs by more than 1 from {other}',
                bond=Bond(site, other),
            )
    total = params.bond_cost(d).sum()
    return int(total) if params.exact_energy else float(total)


def energy_delta(config: HeightConfig, site: tuple[int, int], new_height: int, params: ModelParams) -> float:
    """
    Energy change of a single-site move, from the incident bonds only

    Args:
        config: current configuration
        site: interior site (row, col)
        new_height: proposed height
        params: model parameters

    Returns:
        hamiltonian(after) - hamiltonian(before)
    """
    config.check_site(site)
    before = local_energy(config, site, config.height(site), params)
    after = local_energy(config, site, int(new_height), params)
    return after - before
