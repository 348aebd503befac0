r"""
Phase portraits of exact recovery, and properties of the hull program on synthetic instances
"""
from dataclasses import dataclass
from functools import partial
import logging
import numpy as np
import scipy.sparse

from branchhull.solver.problem import ProblemInstance, SolverConfig, Solution, balanced_scaling
from branchhull.solver.projection import project_set
from branchhull.solver.admm import solve
from .dictionary import make_gaussian

logger = logging.getLogger(__name__)

def sparsity_for(N):
    """
    Return the number of nonzero entries used for signals of length ``N``: `0.05 N` rounded half away from zero, at least one.

    EXAMPLES::

        >>> [sparsity_for(N) for N in (10, 20, 30, 50, 100, 300)]
        [1, 1, 2, 3, 5, 15]
    """
    return max(1, (N + 10) // 20)

def sparse_sign_vector(n, count, rng):
    r"""
    Return a vector of length ``n`` with ``count`` entries `\pm 1` at random positions and zeros elsewhere.
    """
    v = np.zeros(n)
    support = rng.choice(n, size=count, replace=False)
    v[support] = rng.choice([-1.0, 1.0], size=count)
    return v

def make_instance(N, K, L, sparsity_count, seed=0, sparsity_count_h=None):
    r"""
    Return a random instance with Gaussian dictionaries and a sparse `\pm 1` ground truth.

    INPUT:

    - ``N``, ``K`` -- positive integers, the lengths of `m` and `h`

    - ``L`` -- a positive integer, the number of measurements

    - ``sparsity_count`` -- the number of nonzero entries of `m` (and of `h`, unless ``sparsity_count_h`` is given)

    - ``seed`` -- (default: ``0``) the random seed

    OUTPUT:

    A :class:`~branchhull.solver.problem.ProblemInstance` with entries of `B` and `C` distributed as
    `N(0, 1/L)`, carrying its ground truth.

    EXAMPLES::

        >>> P = make_instance(20, 15, 12, 3, seed=1); P
        Bilinear problem instance with L=12, K=15, N=20
        >>> h, m = P.truth()
        >>> int(np.count_nonzero(h)), int(np.count_nonzero(m)), sorted(set(np.abs(h[h != 0]).tolist()))
        (3, 3, [1.0])
        >>> bool(np.allclose(P.y(), (P.B() @ h) * (P.C() @ m), rtol=0, atol=1e-14))
        True
        >>> bool(np.array_equal(make_instance(20, 15, 12, 3, seed=2).truth()[1] != 0, m != 0))
        False
        >>> make_instance(5, 5, 4, 6)
        Traceback (most recent call last):
        ...
        ValueError: sparsity must be between 1 and min(K, N) = 5
    """
    sparsity_count_h = sparsity_count if sparsity_count_h is None else sparsity_count_h
    if min(N, K, L) < 1:
        raise ValueError('dimensions must be positive')
    if not (1 <= sparsity_count <= min(K, N) and 1 <= sparsity_count_h <= min(K, N)):
        raise ValueError('sparsity must be between 1 and min(K, N) = {}'.format(min(K, N)))
    rng = np.random.default_rng(seed)
    B = make_gaussian(L, K, seed=rng)
    C = make_gaussian(L, N, seed=rng)
    h = sparse_sign_vector(K, sparsity_count_h, rng)
    m = sparse_sign_vector(N, sparsity_count, rng)
    return ProblemInstance.from_truth(B, C, h, m)

def recovery_error(h_hat, m_hat, instance):
    r"""
    Return `\|(\hat h, \hat m) - (\tilde h, \tilde m)\|_2` for the balanced ground truth `(\tilde h, \tilde m)`.
    """
    h, m = instance.balanced_truth()
    return float(np.linalg.norm(np.concatenate([np.asarray(h_hat) - h, np.asarray(m_hat) - m])))

def is_success(solution, instance, threshold=1e-6):
    r"""
    Return ``True`` if ``solution`` is within ``threshold`` of the balanced ground truth of ``instance``.

    INPUT:

    - ``solution`` -- a :class:`~branchhull.solver.problem.Solution` or a pair ``(h, m)``

    - ``instance`` -- a :class:`~branchhull.solver.problem.ProblemInstance` with ground truth

    - ``threshold`` -- (default: ``1e-6``) a positive real

    EXAMPLES::

        >>> P = make_instance(10, 10, 8, 2, seed=0)
        >>> h, m = P.balanced_truth()
        >>> is_success((h, m), P, threshold=1e-10)
        True
        >>> is_success((2 * h, m / 2), P, threshold=1e-10)
        False
        >>> is_success((-h, -m), P)
        False
        >>> is_success((h, m), ProblemInstance(P.B(), P.C(), P.y(), P.t()))
        Traceback (most recent call last):
        ...
        ValueError: instance has no ground truth
    """
    if isinstance(solution, Solution):
        h_hat, m_hat = solution.h_hat, solution.m_hat
    else:
        h_hat, m_hat = solution
    return recovery_error(h_hat, m_hat, instance) < threshold

@dataclass(frozen=True)
class PhaseCell:
    """
    Outcome of the recovery trials at one point ``(N, L)`` of a phase portrait.
    """
    N: int
    K: int
    L: int
    S1: int
    S2: int
    trials: int
    successes: int
    seed_base: int

    def success_rate(self):
        """
        Return the fraction of successful trials (``0.0`` without trials).

        EXAMPLES::

            >>> PhaseCell(20, 20, 8, 1, 1, 4, 3, 0).success_rate()
            0.75
        """
        return self.successes / self.trials if self.trials else 0.0

def trial_seed(seed, N, L, trial):
    """
    Return the seed of one trial, a stable hash of ``(seed, N, L, trial)``.

    EXAMPLES::

        >>> trial_seed(0, 20, 8, 1) == trial_seed(0, 20, 8, 1), trial_seed(0, 20, 8, 1) == trial_seed(0, 20, 8, 2)
        (True, False)
    """
    return int(np.random.SeedSequence([seed, N, L, trial]).generate_state(1)[0])

def phase_trial(key, rho=1.0, threshold=1e-6, max_iters=10000, tol=1e-10):
    """
    Return ``key`` and whether the noiseless program recovers the instance of one trial.

    INPUT:

    - ``key`` -- a tuple ``(N, L, seed)``
    """
    N, L, seed = key
    instance = make_instance(N, N, L, sparsity_for(N), seed=seed)
    config = SolverConfig(mode='noiseless', rho=rho, max_iters=max_iters, tol_primal=tol, tol_dual=tol)
    return key, is_success(solve(instance, config), instance, threshold)

def run_phase_grid(N_list, L_list, trials=10, rho=1.0, threshold=1e-6, seed=0, max_iters=10000, tol=1e-10, max_workers=1, verbose=False):
    r"""
    Return the phase portrait over the grid ``N_list`` times ``L_list``, as a list of :class:`PhaseCell`.

    Every cell uses `K = N` and sparsity :func:`sparsity_for` of `N` for both factors, and solves the
    noiseless program for ``trials`` independent instances.

    INPUT:

    - ``N_list``, ``L_list`` -- nonempty lists of positive integers

    - ``trials`` -- (default: ``10``) a nonnegative integer, the number of instances per cell

    - ``rho`` -- (default: ``1.0``) the ADMM step

    - ``threshold`` -- (default: ``1e-6``) the success threshold of :func:`is_success`

    - ``seed`` -- (default: ``0``) the base seed; trial seeds are given by :func:`trial_seed`

    - ``max_iters``, ``tol`` -- (default: ``10000``, ``1e-10``) the solver budget and residual tolerances

    - ``max_workers`` -- (default: ``1``) the number of worker processes, or ``None`` to use ``os.cpu_count()``

    - ``verbose`` -- (default: ``False``) if ``True``, log every cell at level INFO

    EXAMPLES::

        >>> cells = run_phase_grid([20], [4, 8], trials=0)
        >>> [(c.L, c.trials, c.successes) for c in cells]
        [(4, 0, 0), (8, 0, 0)]
        >>> run_phase_grid([20], [4], trials=-1)
        Traceback (most recent call last):
        ...
        ValueError: trials must be a nonnegative integer
        >>> cells = run_phase_grid([20], [60], trials=2, max_iters=3000)
        >>> cells[0]
        PhaseCell(N=20, K=20, L=60, S1=1, S2=1, trials=2, successes=2, seed_base=0)

    TESTS:

    The table depends only on the seed, also when the trials run in parallel::

        >>> first = run_phase_grid([10, 20], [8, 16], trials=2, max_iters=100, seed=3)
        >>> first == run_phase_grid([10, 20], [8, 16], trials=2, max_iters=100, seed=3, max_workers=2)
        True

    Success becomes more likely with more measurements::

        >>> rates = [c.success_rate() for c in run_phase_grid([20], [4, 40, 80], trials=4)]
        >>> all(later >= earlier - 0.25 for earlier, later in zip(rates, rates[1:]))
        True

    Far above and far below the line of :func:`theory_line` with `C = 0.25`::

        >>> above, below = run_phase_grid([100], [140, 12], trials=10)
        >>> above.success_rate() >= 0.8, below.success_rate() <= 0.2
        (True, True)
    """
    if not N_list or not L_list:
        raise ValueError('N_list and L_list must be nonempty')
    if int(trials) != trials or trials < 0:
        raise ValueError('trials must be a nonnegative integer')
    level = logging.INFO if verbose else logging.DEBUG
    keys = [(N, L, trial_seed(seed, N, L, trial)) for N in N_list for L in L_list for trial in range(trials)]
    trial = partial(phase_trial, rho=rho, threshold=threshold, max_iters=max_iters, tol=tol)
    outcome = {}
    if max_workers == 1:
        for key in keys:
            outcome[key] = trial(key)[1]
    else:
        from concurrent.futures import ProcessPoolExecutor, as_completed
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            futures = {executor.submit(trial, key) for key in keys}
            for f in as_completed(futures):
                key, success = f.result()
                outcome[key] = success
    cells = []
    for N in N_list:
        S = sparsity_for(N)
        for L in L_list:
            successes = sum(outcome[(N, L, trial_seed(seed, N, L, t))] for t in range(trials))
            cell = PhaseCell(N, N, L, S, S, trials, int(successes), seed)
            logger.log(level, 'N = {}, L = {}: {} of {} trials succeeded'.format(N, L, cell.successes, trials))
            cells.append(cell)
    return cells

def theory_line(S1, S2, K, N, C=0.25):
    r"""
    Return `C (S_1 + S_2) \log^2(K + N)`, with the natural logarithm.

    EXAMPLES::

        >>> round(theory_line(5, 5, 100, 100), 2)
        70.18
        >>> theory_line(5, 5, 100, 100, C=0)
        0.0
        >>> bool(np.isclose(theory_line(2, 3, 40, 40, C=0.5), 2 * theory_line(2, 3, 40, 40)))
        True
    """
    return float(C * (S1 + S2) * np.log(K + N)**2)

def lp_constraints_hold(h, m, instance, truth_balanced=None, tol=1e-9):
    r"""
    Return ``True`` if ``(h, m)`` satisfies the linear constraints
    `s_\ell (b_\ell^T h \, c_\ell^T \tilde m + b_\ell^T \tilde h \, c_\ell^T m) \geq 2 |y_\ell|` for the balanced truth `(\tilde h, \tilde m)`.

    The linear constraint set contains the feasible set of the noiseless hull program.

    INPUT:

    - ``truth_balanced`` -- (default: ``instance.balanced_truth()``) the pair `(\tilde h, \tilde m)`

    - ``tol`` -- (default: ``1e-9``) relative tolerance for rounding errors

    EXAMPLES::

        >>> P = make_instance(10, 10, 6, 2, seed=4)
        >>> h, m = P.balanced_truth()
        >>> lp_constraints_hold(h, m, P)
        True
        >>> lp_constraints_hold(np.zeros(10), np.zeros(10), P)
        False

    TESTS:

    Feasible points of the hull program satisfy the linear constraints::

        >>> contained = True
        >>> for k in range(100):
        ...     P = make_instance(8, 8, 5, 2, seed=k)
        ...     contained &= all(lp_constraints_hold(h, m, P) for h, m in sample_feasible_points(P, 100, seed=k))
        >>> contained
        True
    """
    if truth_balanced is None:
        truth_balanced = instance.balanced_truth()
    h_tilde, m_tilde = truth_balanced
    B, C = instance.B(), instance.C()
    lhs = instance.s() * ((B @ h) * (C @ m_tilde) + (B @ h_tilde) * (C @ m))
    rhs = 2 * np.abs(instance.y())
    return bool(np.all(lhs >= rhs - tol * (1 + rhs)))

def sample_feasible_points(instance, count, seed=0):
    r"""
    Return ``count`` random pairs ``(h, m)`` feasible for the noiseless hull program of ``instance``.

    Random points `(x, w)` are projected onto the hull set and pulled back through `B` and `C`, which
    requires `L \leq \min(K, N)` so that both dictionaries are onto.

    EXAMPLES::

        >>> P = make_instance(8, 8, 5, 2, seed=0)
        >>> points = sample_feasible_points(P, 20, seed=1)
        >>> len(points), max(feasibility_violation(h, m, None, P) for h, m in points) <= 1e-9
        (20, True)
        >>> sample_feasible_points(make_instance(8, 8, 9, 2), 1)
        Traceback (most recent call last):
        ...
        ValueError: sampling feasible points needs L <= min(K, N)
    """
    L, K, N = instance.dimensions()
    if L > min(K, N):
        raise ValueError('sampling feasible points needs L <= min(K, N)')
    rng = np.random.default_rng(seed)
    B_pinv, C_pinv = [np.linalg.pinv(A.toarray() if scipy.sparse.issparse(A) else A) for A in (instance.B(), instance.C())]
    points = []
    for _ in range(count):
        u = project_set(rng.standard_normal(2 * L) * rng.uniform(0.1, 3.0), instance)
        points.append((B_pinv @ u[L:], C_pinv @ u[:L]))
    return points

def corrupt_signs(instance, indices):
    """
    Return ``instance`` with the measurements at ``indices`` negated, as an instance without ground truth.

    EXAMPLES::

        >>> P = ProblemInstance([[1.0], [1.0]], [[1.0], [2.0]], [1.0, 2.0], [1.0, 1.0])
        >>> corrupt_signs(P, [1]).y().tolist()
        [1.0, -2.0]
    """
    y = np.array(instance.y())
    y[list(indices)] *= -1
    return ProblemInstance(instance.B(), instance.C(), y, instance.t())

def robust_recovery_error(solution, instance):
    r"""
    Return the distance of the balanced scaling of ``(solution.h_hat, solution.m_hat)`` to the balanced truth of ``instance``.

    The slack penalty moves the optimal scale of `(h, m)` away from the balanced one, so the
    recovery is measured modulo scaling. A vanishing factor gives ``inf``.

    EXAMPLES:

    One flipped sign among sixty measurements is recovered by the robust program, which puts
    the slack on the outlier::

        >>> P = make_instance(30, 30, 60, 2, seed=5)
        >>> Q = corrupt_signs(P, [7])
        >>> outcomes = []
        >>> for lam in (1.0, 10.0, 100.0):
        ...     solution = solve(Q, SolverConfig(mode='robust', lam=lam))
        ...     outcomes.append((robust_recovery_error(solution, P) < 1e-3, int(np.argmax(np.abs(solution.xi_hat)))))
        >>> (True, 7) in outcomes
        True
        >>> robust_recovery_error(Solution(np.zeros(30), np.zeros(30), np.zeros(60), 0.0, 0, 0.0, 0.0, True), P)
        inf
    """
    try:
        h_hat, m_hat = balanced_scaling(solution.h_hat, solution.m_hat)
    except ValueError:
        return float('inf')
    return recovery_error(h_hat, m_hat, instance)
