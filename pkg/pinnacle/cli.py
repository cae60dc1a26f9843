import argparse
import logging
import sys
from pathlib import Path

from pinnacle.commands.run_analyze import run_analyze
from pinnacle.commands.run_asm import COUNTERS, MODE_ALIASES, run_asm
from pinnacle.commands.run_dirichlet import run_dirichlet
from pinnacle.commands.run_experiment import run_experiment
from pinnacle.commands.run_kernel import run_kernel
from pinnacle.commands.run_nested_probe import run_nested_probe
from pinnacle.commands.run_oracle import run_oracle
from pinnacle.commands.run_predict import run_predict
from pinnacle.commands.run_pvar import run_pvar
from pinnacle.commands.run_simulate import run_simulate
from pinnacle.models.lattice import ModelParams
from pinnacle.models.tail import Backend
from pinnacle.pvar.minimizer import DEFAULT_PVAR_TOL
from pinnacle.pvar.nested import DEFAULT_SEARCH_BUDGET
from pinnacle.utils import constants
from pinnacle.utils.errors import ConfigError, PinnacleError
from pinnacle.utils.utils import parse_int_list, parse_levels, parse_p


logger = logging.getLogger('pinnacle')


def _float_list(value: str) -> list[float]:
    try:
        return [float(v) for v in value.replace(' ', '').split(',') if v]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f'Cannot read a number list from {value!r}') from err


def _model_args(parser: argparse.ArgumentParser, floor: bool = True) -> None:
    parser.add_argument('--p', type=parse_p, default=2.0, help="gradient exponent, a number >= 1 or 'inf'")
    parser.add_argument('--beta', type=float, required=True)
    if floor:
        parser.add_argument('--floor', action='store_true', help='condition on heights >= 0')
        parser.add_argument('--boundary', type=int, default=0, help='boundary height')


def _params(args) -> ModelParams:
    return ModelParams(p=args.p, beta=args.beta, floor=getattr(args, 'floor', False),
                       boundary_height=getattr(args, 'boundary', 0))


def _out_arg(parser: argparse.ArgumentParser, table: str) -> None:
    parser.add_argument('--out', default=None, metavar='CSV',
                        help=f'path of the {table} table (default <out-dir>/{table}.csv)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='pinnacle-lab', description='Integer-height surface simulations and checks')
    parser.add_argument('--out-dir', default=None,
                        help=f'directory for every table (default {constants.OUTPUT_DIR}, or the folder of --out)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('simulate', help='run one heat-bath chain')
    _model_args(p)
    p.add_argument('--L', type=int, required=True)
    p.add_argument('--seed', type=int, default=constants.DEFAULT_SEED)
    p.add_argument('--burnin', type=int, default=None)
    p.add_argument('--sweeps', type=int, default=0)
    p.add_argument('--thin', type=int, default=1)
    p.add_argument('--schedule', default='SEQUENTIAL', type=str.upper, choices=['SEQUENTIAL', 'CHECKERBOARD'])
    p.add_argument('--init', default=None, help='snapshot file to start from')
    p.add_argument('--snapshot-every', type=int, default=None, metavar='N',
                   help='write a snapshot every N sampling sweeps, a multiple of --thin')
    p.add_argument('--snapshot-dir', default=None, metavar='D', help='snapshot folder (default <out-dir>/snapshots)')
    p.add_argument('--snapshots', action='store_true', help='write every retained snapshot')
    p.add_argument('--check', action='store_true', help='hot/cold equilibration check')
    _out_arg(p, 'samples')

    p = sub.add_parser('oracle', help='exact law on a tiny box')
    _model_args(p)
    p.add_argument('--L', type=int, required=True)
    p.add_argument('--K', type=int, required=True)
    p.add_argument('--compare-sweeps', type=int, default=0)
    p.add_argument('--thin', type=int, default=1)
    p.add_argument('--schedule', default='SEQUENTIAL', type=str.upper, choices=['SEQUENTIAL', 'CHECKERBOARD'])
    p.add_argument('--seed', type=int, default=constants.DEFAULT_SEED)
    _out_arg(p, 'oracle')

    p = sub.add_parser('dirichlet', help='pinned-peak harmonic profile on B_r')
    p.add_argument('--r', type=float, required=True)
    p.add_argument('--h', type=float, default=1.0)
    p.add_argument('--tol', type=float, default=constants.DEFAULT_TOL)
    p.add_argument('--hitting', action='store_true')
    p.add_argument('--compare-h', type=parse_int_list, default=None)
    _out_arg(p, 'profile')

    p = sub.add_parser('kernel', help='potential kernel on [-R, R]^2')
    p.add_argument('--R', type=int, required=True)
    p.add_argument('--tol', type=float, default=constants.DEFAULT_TOL)
    _out_arg(p, 'kernel')

    p = sub.add_parser('pvar', help='p-energy minimizers over radii')
    p.add_argument('--p', type=parse_p, required=True)
    p.add_argument('--R', type=parse_int_list, required=True, help='comma list of radii')
    p.add_argument('--tol', type=float, default=DEFAULT_PVAR_TOL)
    p.add_argument('--method', default='newton', choices=['newton', 'coordinate'])
    p.add_argument('--profile', action='store_true')
    _out_arg(p, 'pvar')

    p = sub.add_parser('nested-probe', help='nested rectangle energy probe')
    p.add_argument('--p', type=parse_p, required=True)
    p.add_argument('--h', type=parse_int_list, required=True, help='comma list of circuit counts')
    p.add_argument('--budget', type=int, default=DEFAULT_SEARCH_BUDGET)
    p.add_argument('--seed', type=int, default=constants.DEFAULT_SEED)
    _out_arg(p, 'nested_probe')

    p = sub.add_parser('asm', help='path family / six-vertex / ASM counts')
    p.add_argument('--h', '--h-max', dest='h', type=int, required=True, help='count levels 1..h')
    p.add_argument('--mode', action='append', choices=[*COUNTERS, *MODE_ALIASES], default=None)
    p.add_argument('--dump-bijection', default=None, metavar='DIR',
                   help='write the level-h path families, six-vertex grids and matrices to DIR')
    _out_arg(p, 'asm_counts')

    p = sub.add_parser('predict', help='M, H and M* per box side')
    _model_args(p, floor=False)
    p.add_argument('--L', type=_float_list, required=True, help='comma list of box sides')
    p.add_argument('--h-min', type=int, default=1)
    p.add_argument('--h-max', type=int, default=200)
    p.add_argument('--rate-constant', type=float, default=None)
    p.add_argument('--backend', type=str.upper, default=None, choices=[b.value for b in Backend],
                   help='ANALYTIC, or EMPIRICAL with --tail-csv (default from --tail-csv)')
    p.add_argument('--tail-csv', '--tail', dest='tail_csv', default=None,
                   help='CSV of samples or of h, tail (EMPIRICAL backend)')
    _out_arg(p, 'predict')

    p = sub.add_parser('analyze', help='offline contour analysis of snapshots')
    p.add_argument('target', nargs='?', default=None, help='snapshot file or directory')
    p.add_argument('--snapshot', default=None, help='snapshot file or directory')
    p.add_argument('--levels', type=parse_levels, default=None, metavar='H1..H2')
    p.add_argument('--h-min', type=int, default=1)
    p.add_argument('--h-max', type=int, default=None)
    p.add_argument('--path-event', nargs=2, type=float, default=None, metavar=('R', 'H'))
    p.add_argument('--circuit-event', nargs=2, type=int, default=None, metavar=('J', 'MARGIN'))
    _out_arg(p, 'levels')

    p = sub.add_parser('experiment', help='run an experiment file')
    p.add_argument('config', help='key = value experiment file')
    return parser


def dispatch(args) -> None:
    out = getattr(args, 'out', None)
    out_dir = args.out_dir
    if out_dir is None and out is not None:
        out_dir = Path(out).parent
    match args.command:
        case 'simulate':
            snapshot_every = args.snapshot_every
            if snapshot_every is None and (args.snapshots or args.snapshot_dir is not None):
                snapshot_every = args.thin
            run_simulate(_params(args), args.L, seed=args.seed, burnin=args.burnin, sweeps=args.sweeps,
                         thin=args.thin, schedule=args.schedule, init=args.init, snapshot_every=snapshot_every,
                         snapshot_dir=args.snapshot_dir, check=args.check, out=out, out_dir=out_dir)
        case 'oracle':
            run_oracle(_params(args), args.L, args.K, compare_sweeps=args.compare_sweeps,
                       schedule=args.schedule, thin=args.thin, seed=args.seed, out=out, out_dir=out_dir)
        case 'dirichlet':
            run_dirichlet(args.r, args.h, tol=args.tol, hitting=args.hitting, compare_h=args.compare_h,
                          out=out, out_dir=out_dir)
        case 'kernel':
            run_kernel(args.R, tol=args.tol, out=out, out_dir=out_dir)
        case 'pvar':
            run_pvar(args.p, args.R, tol=args.tol, method=args.method, profile=args.profile, out=out, out_dir=out_dir)
        case 'nested-probe':
            run_nested_probe(args.h, args.p, search_budget=args.budget, seed=args.seed, out=out, out_dir=out_dir)
        case 'asm':
            run_asm(args.h, modes=args.mode, dump_dir=args.dump_bijection, out=out, out_dir=out_dir)
        case 'predict':
            run_predict(_params(args), args.L, h_min=args.h_min, h_max=args.h_max, rate_constant=args.rate_constant,
                        backend=args.backend, tail_file=args.tail_csv, out=out, out_dir=out_dir)
        case 'analyze':
            if (args.target is None) == (args.snapshot is None):
                raise ConfigError('analyze needs one snapshot file or directory, positional or --snapshot')
            h_min, h_max = args.levels if args.levels is not None else (args.h_min, args.h_max)
            path_event = None if args.path_event is None else (args.path_event[0], int(args.path_event[1]))
            run_analyze(args.snapshot or args.target, h_min=h_min, h_max=h_max, path_event=path_event,
                        circuit_event=args.circuit_event, out=out, out_dir=out_dir)
        case 'experiment':
            run_experiment(args.config, out_dir=out_dir)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, constants.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        dispatch(args)
    except PinnacleError as err:
        logger.error('%s: %s', type(err).__name__, err)
        return err.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
