import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

from pinnacle.asm.formula import rsos_rate_constant
from pinnacle.contours.areas import level_scan
from pinnacle.experiments.checks import check_tile_relation
from pinnacle.models.chain import SampleStream
from pinnacle.models.experiment import ExperimentConfig, ExperimentKind, ExperimentReport
from pinnacle.models.lattice import HeightConfig
from pinnacle.models.tail import Backend, TailEstimate, is_finite_constant
from pinnacle.predict.predictors import predict_M, predict_M_star
from pinnacle.predict.rates import analytic_tail_estimate
from pinnacle.predict.tails import tail_from_samples
from pinnacle.simulations.sampler import monotone_pair, run_chain
from pinnacle.utils import constants
from pinnacle.utils.errors import ConfigError, DomainError
from pinnacle.utils.utils import format_p


logger = logging.getLogger(__name__)

# fewer hits than this at level h and the empirical tail at h is dropped
MIN_TAIL_HITS = 10
PREDICTION_H_MAX = 200


def _mean_height(stream: SampleStream) -> float:
    """Time average over retained samples, the final configuration when nothing was retained"""
    if len(stream):
        return float(stream.observables['mean_height'].mean())
    return stream.final.mean_height


def _histogram(heights: np.ndarray) -> pd.Series:
    levels, counts = np.unique(np.asarray(heights), return_counts=True)
    return pd.Series(counts, index=levels.astype(np.int64))


def best_pair(counts: pd.Series) -> tuple[int, float]:
    """
    Lower level of the two consecutive integers carrying the most mass, and that mass as a fraction

    Args:
        counts: occurrences indexed by integer level
    """
    if counts.empty or counts.sum() == 0:
        raise DomainError('Cannot take the best pair of an empty histogram')
    counts = counts.groupby(level=0).sum().sort_index()
    full = counts.reindex(range(int(counts.index.min()), int(counts.index.max()) + 2), fill_value=0)
    mass = full.to_numpy()
    pair = mass[:-1] + mass[1:]
    k = int(np.argmax(pair))
    return int(full.index[k]), float(pair[k] / counts.sum())


def _run_trials(config: ExperimentConfig, trial_fn, L_values=None) -> list:
    """
    Run trial_fn(config, L, trial) for every (L, trial), in that order.
    Results come back in task order whether or not a process pool is used.
    """
    L_values = config.L_values if L_values is None else L_values
    tasks = [(L, t) for L in L_values for t in range(config.trials)]
    start = time.perf_counter()
    if config.workers > 1 and len(tasks) > 1:
        logger.info('%d trials on %d workers', len(tasks), config.workers)
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            results = list(ex.map(partial(trial_fn, config), *zip(*tasks)))
    else:
        results = []
        for i, (L, t) in enumerate(tasks):
            results.append(trial_fn(config, L, t))
            logger.info('%d/%d trials (L=%d)', i + 1, len(tasks), L)
    logger.info('%d trials finished in %.2fs', len(tasks), time.perf_counter() - start)
    return results


def _analytic_tail(config: ExperimentConfig) -> TailEstimate | None:
    """Analytic surrogate used for the predicted levels; None when p needs a constant that was not given"""
    p = config.params.p
    if (1 < p < 2 or 2 < p < math.inf) and not is_finite_constant(config.rate_constant):
        return None
    h_first = 2 if p == 2 else 1
    return analytic_tail_estimate(config.params.with_floor(False), range(h_first, PREDICTION_H_MAX + 1),
                                  config.rate_constant)


# maximum height

def _max_trial(config: ExperimentConfig, L: int, trial: int) -> dict:
    spec = config.chain_spec(L, trial, keep_snapshots=False)
    stream = run_chain(spec, HeightConfig.flat(L, config.params.boundary_height, config.params.boundary_height))
    return {
        'L': L,
        'trial': trial,
        'seed': spec.seed,
        'max_height': stream.final.max_height,
        'mean_height': _mean_height(stream),
    }


def run_max_experiment(config: ExperimentConfig) -> ExperimentReport:
    """
    Maximum of the unfloored surface: one equilibrated configuration per (L, trial),
    then the per-L histogram of the maximum, its median and mode, and the mass of the
    best two consecutive integers

    Args:
        config: MAX_HEIGHT experiment with the floor off

    Returns:
        ExperimentReport with tables trials, summary, histogram
    """
    if config.params.floor:
        raise ConfigError('MAX_HEIGHT runs the unfloored model; set floor = false')
    trials = pd.DataFrame(_run_trials(config, _max_trial), columns=constants.MAX_TRIAL_COLUMNS.split(', '))

    tail = _analytic_tail(config)
    rows, hist_rows = [], []
    for L, group in trials.groupby('L', sort=True):
        counts = _histogram(group['max_height'])
        low, mass = best_pair(counts)
        rows.append({
            'L': L,
            'trials': len(group),
            'median': float(group['max_height'].median()),
            'mode': int(counts.idxmax()),
            'best_pair_low': low,
            'best_pair_mass': mass,
            'mean_height': float(group['mean_height'].mean()),
            'M_predicted': predict_M(L, tail).value if tail is not None else np.nan,
        })
        hist_rows += [(L, int(h), int(c), c / counts.sum()) for h, c in counts.items()]

    histogram = pd.DataFrame(hist_rows, columns=['L', 'max_height', 'count', 'fraction'])
    return ExperimentReport(config=config, trials=trials, summary=pd.DataFrame(rows),
                            tables={'histogram': histogram})


# floored plateau

def _floor_trial(config: ExperimentConfig, L: int, trial: int) -> dict:
    params = config.params
    spec = config.chain_spec(L, trial, keep_snapshots=False)
    flat = HeightConfig.flat(L)
    unfloored_mean = np.nan
    if config.coupled:
        pair = monotone_pair(spec, flat, flat, lower_params=params.with_floor(False), upper_params=params)
        stream = pair.upper
        unfloored_mean = _mean_height(pair.lower)
    else:
        stream = run_chain(spec, flat)

    final = stream.final
    counts = _histogram(final.heights)
    low, fraction = best_pair(counts)
    levels = level_scan(final, range(config.h_min, config.h_max + 1))
    levels.insert(0, 'trial', trial)
    levels.insert(0, 'L', L)
    row = {
        'L': L,
        'trial': trial,
        'seed': spec.seed,
        'modal_level': int(counts.idxmax()),
        'modal_fraction': fraction,
        'mean_height': _mean_height(stream),
        'unfloored_mean': unfloored_mean,
        'floored_max': final.max_height,
    }
    return {'row': row, 'histogram': counts, 'levels': levels}


def run_floor_experiment(config: ExperimentConfig) -> ExperimentReport:
    """
    Entropic repulsion under a floor: per-trial height histogram, modal level, mass
    on the best two levels, mean height (against the coupled unfloored chain when
    `coupled`), the floored maximum and whether it falls in {M*, M*+1, M*+2} (p = 2),
    and the contour statistics of every level from h_min to h_max

    Args:
        config: FLOOR_PLATEAU experiment with the floor on and boundary 0

    Returns:
        ExperimentReport with tables trials, summary, histogram, levels
    """
    params = config.params
    if not params.floor:
        raise ConfigError('FLOOR_PLATEAU needs floor = true')
    if params.boundary_height != 0:
        raise ConfigError(f'FLOOR_PLATEAU needs boundary = 0, got {params.boundary_height}')

    results = _run_trials(config, _floor_trial)
    trials = pd.DataFrame([r['row'] for r in results])
    windows = {L: predict_M_star(L, params.beta).value if params.p == 2 else None for L in config.L_values}
    trials['in_window'] = [
        None if windows[L] is None else bool(windows[L] <= m <= windows[L] + 2)
        for L, m in zip(trials['L'], trials['floored_max'])
    ]
    trials = trials[constants.FLOOR_TRIAL_COLUMNS.split(', ')]

    rows, hist_rows = [], []
    for L in config.L_values:
        mask = (trials['L'] == L).to_numpy()
        group = trials[mask]
        counts = pd.concat([r['histogram'] for r, m in zip(results, mask) if m]).groupby(level=0).sum()
        low, fraction = best_pair(counts)
        in_window = group['in_window'].dropna()
        rows.append({
            'L': L,
            'trials': len(group),
            'modal_level': int(counts.idxmax()),
            'modal_fraction': fraction,
            'best_pair_low': low,
            'mean_height': float(group['mean_height'].mean()),
            'unfloored_mean': float(group['unfloored_mean'].mean()) if config.coupled else np.nan,
            'floored_max_median': float(group['floored_max'].median()),
            'M_star_predicted': windows[L] if windows[L] is not None else np.nan,
            'in_window_fraction': float(in_window.astype(float).mean()) if len(in_window) else np.nan,
        })
        hist_rows += [(L, int(h), int(c), c / counts.sum()) for h, c in counts.items()]

    levels = pd.concat([r['levels'] for r in results], ignore_index=True)
    return ExperimentReport(
        config=config,
        trials=trials,
        summary=pd.DataFrame(rows),
        tables={
            'histogram': pd.DataFrame(hist_rows, columns=['L', 'height', 'count', 'fraction']),
            'levels': levels,
        },
    )


# large-deviation tail

def _center_trial(config: ExperimentConfig, L: int, trial: int) -> np.ndarray:
    spec = config.chain_spec(L, trial, keep_snapshots=False)
    return run_chain(spec, HeightConfig.flat(L)).center_heights


def _pooled_tail(config: ExperimentConfig, L: int, results: list) -> TailEstimate:
    values = np.concatenate(results)
    return tail_from_samples(values, config.params, spec=config.chain_spec(L, 0, keep_snapshots=False))


def tail_shape(p: float, h):
    """Leading h-dependence of -log P(eta_0 >= h): h, h^p, h^2 / log h or h^2"""
    h = np.asarray(h, dtype=np.float64)
    if p == 1:
        return h
    if p < 2:
        return h ** p
    if p == 2:
        return h ** 2 / np.log(h)
    return h ** 2


def reference_coefficient(config: ExperimentConfig) -> float:
    """Coefficient of tail_shape in the leading-order rate, NaN when it needs an unknown constant"""
    p, beta = config.params.p, config.params.beta
    if p == 1:
        return 4 * beta
    if p == 2:
        return 2 * math.pi * beta
    if math.isinf(p):
        return rsos_rate_constant(beta).center
    if is_finite_constant(config.rate_constant):
        return config.rate_constant * beta
    return np.nan


def fit_tail(table: pd.DataFrame, p: float) -> dict:
    """
    Weighted least-squares fit of -log tail = c * tail_shape(p, h)

    Returns:
        coefficient, its standard error and a 95% band, and the points used
    """
    data = table[table['h'] >= (2 if p == 2 else 1)]
    out = {'coefficient': np.nan, 'coefficient_se': np.nan, 'ci_low': np.nan, 'ci_high': np.nan,
           'n_points': len(data)}
    if data.empty:
        logger.warning('No tail points left to fit at p=%s', format_p(p))
        return out
    x = tail_shape(p, data['h'].to_numpy())
    y = data['neg_log_tail'].to_numpy()
    sigma = np.maximum(data['neg_log_se'].to_numpy(), 1e-12)
    popt, pcov = curve_fit(lambda s, c: c * s, x, y, p0=[y[0] / x[0]], sigma=sigma, absolute_sigma=True)
    se = float(np.sqrt(pcov[0, 0])) if np.isfinite(pcov[0, 0]) else np.nan
    out.update({
        'coefficient': float(popt[0]),
        'coefficient_se': se,
        'ci_low': float(popt[0] - 1.96 * se),
        'ci_high': float(popt[0] + 1.96 * se),
    })
    return out


def _is_convex(values: np.ndarray, slack: np.ndarray | None = None) -> bool:
    if len(values) < 3:
        return True
    second = np.diff(values, 2)
    slack = 0 if slack is None else slack[1:-1]
    return bool((second >= -slack).all())


def _point_ratios_decreasing(table: pd.DataFrame) -> bool:
    """pi(h) / pi(h-1) with pi(h) = tail(h) - tail(h+1), decreasing over consecutive observed h"""
    tail = table.set_index('h')['tail']
    point = tail - tail.shift(-1)
    ratios = (point / point.shift(1)).replace(np.inf, np.nan).dropna()
    return bool((np.diff(ratios.to_numpy()) <= 1e-12).all())


def run_ldp_tail_experiment(config: ExperimentConfig) -> ExperimentReport:
    """
    Empirical center-height tail of the unfloored model: -log P(eta_0 >= h) with
    standard errors for h_min..h_max, pooled over trials, fitted against the
    p-dependent shape; levels with fewer than MIN_TAIL_HITS hits are dropped

    Args:
        config: LDP_TAIL experiment, floor off, every L >= 64, sweeps > 0

    Returns:
        ExperimentReport with per-(L, h) rows in `trials` and one fit row per L in `summary`
    """
    params = config.params
    if params.floor:
        raise ConfigError('LDP_TAIL estimates the unfloored law; set floor = false')
    if params.boundary_height != 0:
        raise ConfigError(f'LDP_TAIL needs boundary = 0, got {params.boundary_height}')
    small = [L for L in config.L_values if L < constants.MIN_TAIL_SIDE]
    if small:
        raise ConfigError(f'LDP_TAIL needs L >= {constants.MIN_TAIL_SIDE}, got {small}')
    if config.sweeps < config.thinning:
        raise ConfigError('LDP_TAIL needs sweeps >= thin so that samples are retained')

    results = _run_trials(config, _center_trial)
    reference = reference_coefficient(config)
    frames, rows = [], []
    for k, L in enumerate(config.L_values):
        pooled = results[k * config.trials:(k + 1) * config.trials]
        table = _pooled_tail(config, L, pooled).table
        table = table[(table['h'] >= config.h_min) & (table['h'] <= config.h_max)].copy()
        table['n_hits'] = np.rint(table['tail'] * table['n_samples']).astype(np.int64)
        dropped = table.loc[table['n_hits'] < MIN_TAIL_HITS, 'h'].tolist()
        if dropped:
            logger.warning('L=%d: dropping h=%s with fewer than %d hits (support floor)', L, dropped, MIN_TAIL_HITS)
        table = table[table['n_hits'] >= MIN_TAIL_HITS].copy()
        table['neg_log_se'] = table['se'] / table['tail']
        table.insert(0, 'L', L)
        frames.append(table[constants.LDP_COLUMNS.split(', ')])

        fit = fit_tail(table, params.p)
        rows.append({
            'L': L,
            'p': format_p(params.p),
            'beta': params.beta,
            **fit,
            'reference': reference,
            'relative_error': abs(fit['coefficient'] / reference - 1) if not math.isnan(reference) else np.nan,
            'convex': _is_convex(table['neg_log_tail'].to_numpy(), 2 * table['neg_log_se'].to_numpy()),
            'ratios_decreasing': _point_ratios_decreasing(table),
            'dropped': ' '.join(str(h) for h in dropped),
        })

    trials = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=constants.LDP_COLUMNS.split(', '))
    return ExperimentReport(config=config, trials=trials, summary=pd.DataFrame(rows))


# tile relation

def run_tile_experiment(config: ExperimentConfig) -> ExperimentReport:
    """
    Tile side-length windows for h_min..h_max from the analytic tail, or from the
    pooled center heights of chains at the first L (EMPIRICAL backend)
    """
    params = config.params.with_floor(False)
    h_range = list(range(config.h_min, config.h_max + 1))
    if config.backend == Backend.ANALYTIC:
        tail = analytic_tail_estimate(params, h_range, config.rate_constant)
        L = None
    else:
        if config.sweeps < config.thinning:
            raise ConfigError('An EMPIRICAL tile relation needs sweeps >= thin')
        L = config.L_values[0]
        tail = _pooled_tail(config, L, _run_trials(config, _center_trial, L_values=[L]))
        tabulated = set(tail.h_values.tolist())
        seen = [h for h in h_range if h in tabulated and tail(h) > 0]
        if len(seen) < len(h_range):
            logger.warning('Empirical tail at L=%d covers h=%s of the requested range', L, seen)
        h_range = seen

    table = check_tile_relation(params.beta, h_range, tail)
    summary = pd.DataFrame([{
        'p': format_p(params.p),
        'beta': params.beta,
        'backend': config.backend.value,
        'L': L,
        'n_levels': len(table),
        'min_l_min': float(table['l_min'].min()) if len(table) else np.nan,
        'max_l_max': float(table['l_max'].max()) if len(table) else np.nan,
    }])
    return ExperimentReport(config=config, trials=table, summary=summary)


RUNNERS = {
    ExperimentKind.MAX_HEIGHT: run_max_experiment,
    ExperimentKind.FLOOR_PLATEAU: run_floor_experiment,
    ExperimentKind.LDP_TAIL: run_ldp_tail_experiment,
    ExperimentKind.TILE_RELATION: run_tile_experiment,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    logger.info('Running %s for L=%s, %d trial(s) each', config.experiment.value, list(config.L_values), config.trials)
    return RUNNERS[config.experiment](config)
