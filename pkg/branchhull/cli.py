r"""
Command line interface

Subcommands:

- ``solve`` -- solve a hull program given as matrix files

- ``phase`` -- compute a phase portrait of exact recovery

- ``flatten`` -- remove a smooth distortion from a PGM image

- ``project`` -- project one point onto a hyperbola branch

Exit codes are 0 on success, 1 on invalid input and 2 if the solver did not converge.
"""
import argparse
import logging
import os
import sys

from branchhull.solver.problem import ProblemInstance, SolverConfig
from branchhull.solver.projection import HyperbolaBranch, project2, project3, projection_case
from branchhull.solver.admm import solve
from branchhull.experiment.dictionary import PartialDCTDictionary, BesselDictionary, MatrixDictionary, TVStructure
from branchhull.experiment.phase_portrait import run_phase_grid
from branchhull.experiment.distortion_removal import flatten_image
from branchhull.util.matrix_file import read_matrix, read_vector, write_matrix, write_phase_portrait
from branchhull.util.pgm_file import read_pgm, write_pgm

BRANCHHULL_SEED = os.environ.get('BRANCHHULL_SEED')

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2

class ArgumentParser(argparse.ArgumentParser):
    """
    Argument parser that exits with the input error code on invalid arguments.
    """
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, '{}: error: {}\n'.format(self.prog, message))

def default_seed():
    """
    Return the seed given by the environment variable ``BRANCHHULL_SEED``, or ``0``.
    """
    if BRANCHHULL_SEED is None:
        return 0
    try:
        return int(BRANCHHULL_SEED)
    except ValueError as e:
        raise ValueError('BRANCHHULL_SEED must be an integer, not {!r}'.format(BRANCHHULL_SEED)) from e

def positive_int_list(text):
    """
    Return the list of positive integers in the comma-separated string ``text``.

    EXAMPLES::

        >>> positive_int_list('12,140')
        [12, 140]
        >>> positive_int_list('12,x')
        Traceback (most recent call last):
        ...
        argparse.ArgumentTypeError: expected a comma-separated list of positive integers, not '12,x'
    """
    try:
        values = [int(a) for a in text.split(',')]
    except ValueError:
        values = []
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError('expected a comma-separated list of positive integers, not {!r}'.format(text))
    return values

def nonnegative_int(text):
    """
    Return the nonnegative integer given by ``text``.

    EXAMPLES::

        >>> nonnegative_int('0')
        0
        >>> nonnegative_int('-1')
        Traceback (most recent call last):
        ...
        argparse.ArgumentTypeError: expected a nonnegative integer, not '-1'
    """
    try:
        value = int(text)
    except ValueError:
        value = -1
    if value < 0:
        raise argparse.ArgumentTypeError('expected a nonnegative integer, not {!r}'.format(text))
    return value

def parse_point(text):
    """
    Return the point given as ``x,w`` or ``x,w,xi``.
    """
    try:
        point = [float(a) for a in text.split(',')]
    except ValueError as e:
        raise ValueError('malformed point {!r}'.format(text)) from e
    if len(point) not in (2, 3):
        raise ValueError('a point must have 2 or 3 coordinates, not {}'.format(len(point)))
    return point

def parse_dictionary(text, seed):
    """
    Return the dictionary described by ``dct:<n>``, ``bessel:<n>`` or ``file:<path>``.

    EXAMPLES::

        >>> parse_dictionary('dct:3', 1)
        Partial DCT dictionary with 3 columns (seed=1)
        >>> parse_dictionary('wavelet:3', 1)
        Traceback (most recent call last):
        ...
        ValueError: unknown dictionary 'wavelet:3', expected dct:<n>, bessel:<n> or file:<path>
    """
    kind, _, argument = text.partition(':')
    if kind == 'file' and argument:
        return MatrixDictionary(read_matrix(argument), normalize=True)
    if kind in ('dct', 'bessel') and argument.isdigit() and int(argument) > 0:
        cls = PartialDCTDictionary if kind == 'dct' else BesselDictionary
        return cls(int(argument), seed=seed)
    raise ValueError('unknown dictionary {!r}, expected dct:<n>, bessel:<n> or file:<path>'.format(text))

def command_solve(args):
    """
    Solve the instance given by matrix files and write the solution.
    """
    B, C = read_matrix(args.b), read_matrix(args.c)
    instance = ProblemInstance(B, C, read_vector(args.y), read_vector(args.t))
    structure = None
    if args.structure is not None:
        structure = read_matrix(args.structure)
    elif args.image_rows is not None:
        L = instance.dimensions()[0]
        if L % args.image_rows != 0:
            raise ValueError('{} measurements do not form an image with {} rows'.format(L, args.image_rows))
        structure = TVStructure(args.image_rows, L // args.image_rows)
    config = SolverConfig(mode=args.mode, lam=args.lam, rho=args.rho, max_iters=args.iters,
                          tol_primal=args.tol, tol_dual=args.tol, structure=structure)
    solution = solve(instance, config, verbose=args.verbose)
    write_matrix(args.out_h, solution.h_hat)
    write_matrix(args.out_m, solution.m_hat)
    if args.out_xi is not None:
        write_matrix(args.out_xi, solution.xi_hat)
    print('objective={:.17g}'.format(solution.objective))
    print('primal_residual={:.6e}'.format(solution.primal_residual))
    print('dual_residual={:.6e}'.format(solution.dual_residual))
    print('iterations={}'.format(solution.iters_used))
    print('converged={}'.format(solution.converged))
    return EXIT_OK if solution.converged else EXIT_NOT_CONVERGED

def command_phase(args):
    """
    Compute a phase portrait and write it to a file.
    """
    seed = default_seed() if args.seed is None else args.seed
    cells = run_phase_grid(args.n_list, args.l_list, trials=args.trials, rho=args.rho, threshold=args.threshold,
                           seed=seed, max_iters=args.iters, tol=args.tol, max_workers=args.workers, verbose=args.verbose)
    write_phase_portrait(args.out, cells, C=args.line_constant)
    for c in cells:
        print('N={} L={} successes={} trials={} success_rate={:g}'.format(c.N, c.L, c.successes, c.trials, c.success_rate()))
    return EXIT_OK

def command_flatten(args):
    """
    Remove the distortion of an image and write the result.
    """
    seed = default_seed() if args.seed is None else args.seed
    image = read_pgm(args.input)
    dictionary = parse_dictionary(args.dict, seed)
    result = flatten_image(image, dictionary, lam=args.lam, rho=args.rho, max_iters=args.iters, tol=args.tol, verbose=args.verbose)
    write_pgm(args.out, result.recovered)
    if args.out_m is not None:
        write_matrix(args.out_m, result.m_hat)
    if args.out_xi is not None:
        write_matrix(args.out_xi, result.xi_hat)
    print('iterations={}'.format(result.solution.iters_used))
    print('converged={}'.format(result.solution.converged))
    return EXIT_OK

def command_project(args):
    """
    Project a point onto a hyperbola branch and print it with the active case.
    """
    point = parse_point(args.point)
    branch = HyperbolaBranch(args.y, args.t, s=args.s)
    projected = project3(point, branch) if len(point) == 3 else project2(point, branch)
    print('point=({})'.format(', '.join('{:.6f}'.format(a + 0.0) for a in projected)))
    print('case={}'.format(projection_case(point, branch)))
    return EXIT_OK

def make_parser():
    """
    Return the argument parser of the command line interface.
    """
    parser = ArgumentParser(prog='branchhull', description='Sparse bilinear inverse problems with known signs.')
    parser.add_argument('--verbose', action='store_true', help='log solver progress')
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    p = subparsers.add_parser('solve', help='solve a hull program given as matrix files')
    p.add_argument('--b', required=True, help='matrix file of B')
    p.add_argument('--c', required=True, help='matrix file of C')
    p.add_argument('--y', required=True, help='vector file of the measurements')
    p.add_argument('--t', required=True, help='vector file of the signs of B h')
    p.add_argument('--mode', choices=('noiseless', 'robust', 'tv'), default='noiseless')
    p.add_argument('--lambda', dest='lam', type=float, default=1e3, help='slack penalty')
    p.add_argument('--rho', type=float, default=1.0, help='ADMM step')
    p.add_argument('--iters', type=int, default=10000, help='maximum number of iterations')
    p.add_argument('--tol', type=float, default=1e-10, help='primal and dual residual tolerance')
    p.add_argument('--structure', help='matrix file of P (robust and tv modes)')
    p.add_argument('--image-rows', type=int, help='total variation of an image with this many rows (tv mode)')
    p.add_argument('--out-h', required=True)
    p.add_argument('--out-m', required=True)
    p.add_argument('--out-xi')
    p.set_defaults(run=command_solve)

    p = subparsers.add_parser('phase', help='compute a phase portrait of exact recovery')
    p.add_argument('--n-list', type=positive_int_list, required=True, help='comma-separated values of N = K')
    p.add_argument('--l-list', type=positive_int_list, required=True, help='comma-separated values of L')
    p.add_argument('--trials', type=nonnegative_int, default=10)
    p.add_argument('--rho', type=float, default=1.0)
    p.add_argument('--threshold', type=float, default=1e-6, help='success threshold')
    p.add_argument('--seed', type=int, help='base seed (default: $BRANCHHULL_SEED or 0)')
    p.add_argument('--iters', type=int, default=10000)
    p.add_argument('--tol', type=float, default=1e-10)
    p.add_argument('--workers', type=int, default=1, help='number of worker processes')
    p.add_argument('--line-constant', type=float, default=0.25, help='constant C of the theory line')
    p.add_argument('--out', required=True)
    p.set_defaults(run=command_phase)

    p = subparsers.add_parser('flatten', help='remove a smooth distortion from a PGM image')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--dict', required=True, help='dct:<n>, bessel:<n> or file:<path>')
    p.add_argument('--lambda', dest='lam', type=float, default=1e3)
    p.add_argument('--rho', type=float, default=1e-4)
    p.add_argument('--iters', type=int, default=2000)
    p.add_argument('--tol', type=float, default=1e-6)
    p.add_argument('--seed', type=int, help='dictionary seed (default: $BRANCHHULL_SEED or 0)')
    p.add_argument('--out', required=True)
    p.add_argument('--out-m')
    p.add_argument('--out-xi')
    p.set_defaults(run=command_flatten)

    p = subparsers.add_parser('project', help='project one point onto a hyperbola branch')
    p.add_argument('--y', type=float, required=True)
    p.add_argument('--s', type=int)
    p.add_argument('--t', type=int, required=True)
    p.add_argument('--point', required=True, help='x,w or x,w,xi')
    p.set_defaults(run=command_project)
    return parser

def main(argv=None):
    r"""
    Run the command line interface with the arguments ``argv`` and return the exit code.

    EXAMPLES::

        >>> main(['project', '--y', '1', '--s', '1', '--t', '1', '--point', '0,0,0'])
        point=(0.594604, 0.840896, 0.594604)
        case=4
        0
        >>> main(['project', '--y', '1', '--t', '1', '--point', '2,1,0'])
        point=(2.000000, 1.000000, 0.000000)
        case=1
        0
        >>> main(['project', '--y', '0', '--t', '1', '--point', '3,-1,2'])
        point=(3.000000, 0.000000, 2.000000)
        case=2
        0
        >>> main(['project', '--y', '1', '--t', '1', '--point', '1'])
        1

    Solving an instance given as files::

        >>> import contextlib, io, os, tempfile
        >>> d = tempfile.mkdtemp()
        >>> path = lambda name: os.path.join(d, name)
        >>> for name, value in [('B', [[1.0]]), ('C', [[1.0]]), ('y', [1.0]), ('t', [1.0])]:
        ...     write_matrix(path(name), value)
        >>> files = ['--b', path('B'), '--c', path('C'), '--y', path('y'), '--t', path('t'), '--out-h', path('h'), '--out-m', path('m')]
        >>> with contextlib.redirect_stdout(io.StringIO()) as out:
        ...     code = main(['solve'] + files)
        >>> code, out.getvalue().splitlines()[-1]
        (0, 'converged=True')
        >>> [round(float(read_vector(path(name))[0]), 6) for name in ('h', 'm')]
        [1.0, 1.0]
        >>> with contextlib.redirect_stdout(io.StringIO()) as out:
        ...     code = main(['solve', '--iters', '1'] + files)
        >>> code
        2
        >>> main(['solve'] + files[:4] + files[6:])
        1
        >>> main(['solve', '--b', path('missing')] + files[2:])
        1

    Phase portraits are reproducible::

        >>> with contextlib.redirect_stdout(io.StringIO()) as out:
        ...     main(['phase', '--n-list', '20', '--l-list', '4,60', '--trials', '2', '--iters', '3000', '--seed', '7', '--out', path('first.csv')])
        ...     main(['phase', '--n-list', '20', '--l-list', '4,60', '--trials', '2', '--iters', '3000', '--seed', '7', '--out', path('second.csv')])
        >>> open(path('first.csv')).read() == open(path('second.csv')).read()
        True
        >>> main(['phase', '--n-list', '20', '--l-list', '4', '--trials', '0', '--out', path('empty.csv')])
        N=20 L=4 successes=0 trials=0 success_rate=0
        0
        >>> main(['phase', '--n-list', '20,-3', '--l-list', '4', '--out', path('bad.csv')])
        1
        >>> main(['phase', '--n-list', '20', '--l-list', '4', '--trials', '-1', '--out', path('bad.csv')])
        1

    Images::

        >>> write_pgm(path('flat.pgm'), GrayImage(np.full((6, 6), 90.0)))
        >>> with contextlib.redirect_stdout(io.StringIO()):
        ...     code = main(['flatten', '--in', path('flat.pgm'), '--dict', 'dct:3', '--iters', '50', '--out', path('flat_out.pgm')])
        >>> code
        0
        >>> sorted(set(read_pgm(path('flat_out.pgm')).vector().tolist()))
        [255.0]
        >>> image = synthetic_distorted_image(12, 12, 3, seed=4)[0]
        >>> write_pgm(path('distorted.pgm'), GrayImage(60 * image.array()))
        >>> with contextlib.redirect_stdout(io.StringIO()):
        ...     code = main(['flatten', '--in', path('distorted.pgm'), '--dict', 'bessel:4', '--iters', '50', '--out', path('out.pgm'), '--out-m', path('m.csv')])
        >>> code
        0
        >>> read_pgm(path('out.pgm')).shape(), read_vector(path('m.csv')).shape
        ((12, 12), (4,))
        >>> write_matrix(path('dict.csv'), np.ones((5, 2)))
        >>> main(['flatten', '--in', path('distorted.pgm'), '--dict', 'file:' + path('dict.csv'), '--out', path('never.pgm')])
        1

    A full-size image::

        >>> large = synthetic_distorted_image(128, 128, 3, seed=1)[0]
        >>> write_pgm(path('large.pgm'), GrayImage(255 * large.array() / large.array().max()))
        >>> with contextlib.redirect_stdout(io.StringIO()):
        ...     code = main(['flatten', '--in', path('large.pgm'), '--dict', 'dct:3', '--iters', '10', '--out', path('large_out.pgm')])
        >>> code, read_pgm(path('large_out.pgm')).shape()
        (0, (128, 128))
    """
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format='%(name)s: %(message)s', stream=sys.stderr)
    try:
        return args.run(args)
    except (ValueError, ArithmeticError, OSError) as e:
        print('branchhull {}: error: {}'.format(args.command, e), file=sys.stderr)
        return EXIT_INPUT_ERROR
