import os

import sympy as sp
from dotenv import load_dotenv


load_dotenv()
OUTPUT_DIR = os.getenv('PINNACLE_OUTPUT_DIR', 'output')
LOG_LEVEL = os.getenv('PINNACLE_LOG_LEVEL', 'INFO')
WORKERS = int(os.getenv('PINNACLE_WORKERS', '1'))
DEFAULT_SEED = int(os.getenv('PINNACLE_SEED', '20240601'))
DEFAULT_TOL = float(os.getenv('PINNACLE_TOL', '1e-10'))

# Green's function constants
EULER_GAMMA = float(sp.EulerGamma.evalf(30))
KAPPA = float((sp.EulerGamma + sp.Rational(3, 2) * sp.log(2)).evalf(30))
LOG_27_16 = float(sp.log(sp.Rational(27, 16)).evalf(30))
ASM_GROWTH = float(sp.log(3 * sp.sqrt(3) / 4).evalf(30))  # log(3*sqrt(3)/4)

# sampler
WINDOW_MASS_EXPONENT = 40.0  # window keeps all but ~exp(-40) of the conditional mass
WINDOW_PAD = 2
BURNIN_PER_SIDE = 200
ROUGHENING_BETA = 0.665
PROGRESS_EVERY = 1000

# oracle / combinatorics budgets
ORACLE_MAX_STATES = 10**8
ORACLE_MAX_SIDE = 4
PATH_FAMILY_MAX_H = 5
SIX_VERTEX_MAX_H = 8
NESTED_PROBE_MAX_H = 12

# level lines
MIN_EXPERIMENT_SIDE = 8
MIN_TAIL_SIDE = 64

# pvar
BISECTION_STEPS = 60
NEWTON_MAX_ITER = 200
COORDINATE_MAX_SWEEPS = 200_000

# CSV columns
SAMPLE_COLUMNS = 'sweep_index, max_height, mean_height, center_height'
ORACLE_COLUMNS = 'config_hash, probability'
MARGINAL_COLUMNS = 'site_x, site_y, h, tail'
PROFILE_COLUMNS = 'x, y, phi'
PROFILE_SUMMARY_COLUMNS = 'r, h, energy, identity_energy, asymptotic_energy, exit_time'
KERNEL_COLUMNS = 'x, y, a'
PVAR_COLUMNS = 'p, R, energy, residual, iterations'
NESTED_COLUMNS = 'h, p, energy, ratio, family'
ASM_COLUMNS = 'h, mode, count'
PREDICT_COLUMNS = 'L, M, H, M_star, M_crossing, H_crossing, M_star_crossing, M_asymptote, H_asymptote, M_star_asymptote, H_over_M, M_star_over_M'
LEVEL_COLUMNS = 'h, n_contours, n_macroscopic, max_area, total_area, has_negative_macroscopic'
TILE_COLUMNS = 'h, tail, l_min, l_max, log_l_min'
MAX_TRIAL_COLUMNS = 'L, trial, seed, max_height, mean_height'
FLOOR_TRIAL_COLUMNS = 'L, trial, seed, modal_level, modal_fraction, mean_height, unfloored_mean, floored_max, in_window'
LDP_COLUMNS = 'L, h, tail, se, neg_log_tail, neg_log_se, n_hits'
