r"""
Scaled ADMM for the BranchHull programs

All three programs are instances of

.. MATH::

    \min \|P h\|_1 + \|m\|_1 + \lambda \|\xi\|_1 \quad \text{subject to} \quad s_\ell (\xi_\ell + c_\ell^T m) b_\ell^T h \geq |y_\ell|,\ t_\ell b_\ell^T h \geq 0.

With `z = (m, h, \lambda \xi)`, `u = E z = (C m, B h, \xi)` constrained to the hull set and
`v = Q z = (m, P h, \lambda \xi)` carrying the objective `\|v\|_1`, the scaled iteration is

.. MATH::

    u \leftarrow \mathrm{proj}(E z - \alpha), \quad
    v \leftarrow S_{1/\rho}(Q z - \beta), \quad
    z \leftarrow (E^T E + Q^T Q)^{-1} (E^T (\alpha + u) + Q^T (\beta + v)),

followed by `\alpha \leftarrow \alpha + u - E z` and `\beta \leftarrow \beta + v - Q z`.
The program without slack drops the third block of `u`, `v` and `z`.
"""
from dataclasses import dataclass
import logging
import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .problem import Solution, objective, feasibility_violation
from .projection import project_set

logger = logging.getLogger(__name__)

def soft_threshold(v, c):
    r"""
    Return the entrywise soft thresholding `\mathrm{sign}(v_i) \max(|v_i| - c, 0)` of ``v``.

    EXAMPLES::

        >>> soft_threshold(np.array([2.0, -0.5, -3.0]), 1.0).tolist()
        [1.0, 0.0, -2.0]
        >>> soft_threshold(np.zeros(2), 0.5).tolist()
        [0.0, 0.0]
        >>> v = np.array([1.5, -0.25, 3.0])
        >>> bool(np.array_equal(soft_threshold(v, 1e-300), v))
        True
        >>> soft_threshold(np.ones(2), 0.0)
        Traceback (most recent call last):
        ...
        ValueError: c must be positive
    """
    if not c > 0:
        raise ValueError('c must be positive')
    v = np.asarray(v, dtype=float)
    return v - np.clip(v, -c, c)

def _gram(A):
    """
    Return `A^T A`, sparse if ``A`` is sparse.
    """
    if scipy.sparse.issparse(A):
        return (A.T @ A).tocsc()
    return A.T @ A

def _add(X, Y):
    """
    Return ``X + Y``, sparse only if both summands are sparse.
    """
    if scipy.sparse.issparse(X) and scipy.sparse.issparse(Y):
        return (X + Y).tocsc()
    X = X.toarray() if scipy.sparse.issparse(X) else X
    Y = Y.toarray() if scipy.sparse.issparse(Y) else Y
    return np.asarray(X + Y)

def _factor(A, name):
    """
    Return a function solving linear systems with the symmetric positive definite matrix ``A``.

    Dense blocks use a Cholesky factorization, sparse blocks a sparse LU factorization.
    """
    if scipy.sparse.issparse(A):
        try:
            return scipy.sparse.linalg.factorized(A.tocsc())
        except RuntimeError as e:
            raise ValueError('the {} block of the z-update is singular'.format(name)) from e
    try:
        factor = scipy.linalg.cho_factor(A)
    except np.linalg.LinAlgError as e:
        raise ValueError('the {} block of the z-update is not positive definite'.format(name)) from e
    return lambda rhs: scipy.linalg.cho_solve(factor, rhs)

class SplitOperators:
    r"""
    The linear maps `E` and `Q` of the ADMM splitting, with a factorization of `M = E^T E + Q^T Q`.

    `M` is block diagonal with blocks `C^T C + I_N`, `B^T B + P^T P` and `(\lambda^{-2} + 1) I_L`,
    so the z-update solves two small systems and one diagonal one.
    """
    def __init__(self, instance, config):
        """
        Initialize the operators of ``instance`` for the program selected by ``config``.

        EXAMPLES::

            >>> P = ProblemInstance([[1.0, 0.0]], [[2.0]], [1.0], [1.0])
            >>> SplitOperators(P, SolverConfig(mode='robust', lam=10.0))
            ADMM operators with u of length 3, v of length 4, z of length 4
            >>> SplitOperators(P, SolverConfig())
            ADMM operators with u of length 2, v of length 3, z of length 3
        """
        L, K, N = instance.dimensions()
        self._L, self._K, self._N = L, K, N
        self._B = instance.B()
        self._C = instance.C()
        self._slack = config.has_slack()
        self._lam = config.penalty()
        self._P = config.structure_matrix(B=self._B, K=K)
        if self._P.shape[1] != K:
            raise ValueError('P must have {} columns, not {}'.format(K, self._P.shape[1]))
        self._J = self._P.shape[0]
        self._solve_m = _factor(_add(_gram(self._C), scipy.sparse.identity(N, format='csc')), 'm')
        self._solve_h = _factor(_add(_gram(self._B), _gram(self._P)), 'h')
        self._diagonal = 1.0 / self._lam**2 + 1.0

    def __repr__(self):
        """
        Return a string representation of these operators.
        """
        return 'ADMM operators with u of length {}, v of length {}, z of length {}'.format(*self.sizes())

    def sizes(self):
        """
        Return the lengths of the vectors ``u``, ``v`` and ``z``.
        """
        L, K, N, J = self._L, self._K, self._N, self._J
        if self._slack:
            return (3 * L, N + J + L, N + K + L)
        return (2 * L, N + J, N + K)

    def has_slack(self):
        """
        Return ``True`` if the vectors carry the slack block.
        """
        return self._slack

    def penalty(self):
        r"""
        Return the slack penalty `\lambda`.
        """
        return self._lam

    def split(self, z):
        r"""
        Return the blocks `(m, h, \lambda \xi)` of ``z`` (the last one empty without slack).
        """
        N, K = self._N, self._K
        return z[:N], z[N:N + K], z[N + K:]

    def E(self, z):
        """
        Return `E z`.
        """
        m, h, scaled_xi = self.split(z)
        return np.concatenate([self._C @ m, self._B @ h, scaled_xi / self._lam])

    def E_transpose(self, u):
        r"""
        Return `E^T u`.
        """
        L = self._L
        return np.concatenate([self._C.T @ u[:L], self._B.T @ u[L:2 * L], u[2 * L:] / self._lam])

    def Q(self, z):
        """
        Return `Q z`.
        """
        m, h, scaled_xi = self.split(z)
        return np.concatenate([m, self._P @ h, scaled_xi])

    def Q_transpose(self, v):
        r"""
        Return `Q^T v`.
        """
        N, J = self._N, self._J
        return np.concatenate([v[:N], self._P.T @ v[N:N + J], v[N + J:]])

    def M(self, z):
        r"""
        Return `(E^T E + Q^T Q) z`.
        """
        return self.E_transpose(self.E(z)) + self.Q_transpose(self.Q(z))

    def solve(self, rhs):
        r"""
        Return the solution `z` of `(E^T E + Q^T Q) z = \mathrm{rhs}`, using the block factorization.

        TESTS::

            >>> rng = np.random.default_rng(1)
            >>> P = ProblemInstance(rng.standard_normal((20, 6)), rng.standard_normal((20, 5)), rng.standard_normal(20), np.ones(20))
            >>> ops = SplitOperators(P, SolverConfig(mode='robust', lam=10.0, structure=rng.standard_normal((4, 6))))
            >>> worst = 0.0
            >>> for trial in range(20):
            ...     rhs = rng.standard_normal(ops.sizes()[2])
            ...     worst = max(worst, float(np.linalg.norm(ops.M(ops.solve(rhs)) - rhs) / np.linalg.norm(rhs)))
            >>> worst <= 1e-8
            True
        """
        m, h, scaled_xi = self.split(np.asarray(rhs, dtype=float))
        return np.concatenate([self._solve_m(m), self._solve_h(h), scaled_xi / self._diagonal])

    def E_matrix(self):
        """
        Return `E` as a dense matrix.
        """
        blocks = [self._C, self._B]
        if self._slack:
            blocks.append(scipy.sparse.identity(self._L) / self._lam)
        return scipy.sparse.block_diag([scipy.sparse.csr_matrix(A) for A in blocks]).toarray()

    def Q_matrix(self):
        """
        Return `Q` as a dense matrix.
        """
        blocks = [scipy.sparse.identity(self._N), self._P]
        if self._slack:
            blocks.append(scipy.sparse.identity(self._L))
        return scipy.sparse.block_diag([scipy.sparse.csr_matrix(A) for A in blocks]).toarray()

    def matrix(self):
        r"""
        Return `M = E^T E + Q^T Q` assembled as a dense matrix from `E` and `Q`.

        TESTS:

        The assembled matrix has the block diagonal form used by :meth:`solve`::

            >>> rng = np.random.default_rng(2)
            >>> B, C = rng.standard_normal((15, 4)), rng.standard_normal((15, 3))
            >>> P = ProblemInstance(B, C, rng.standard_normal(15), np.ones(15))
            >>> ops = SplitOperators(P, SolverConfig(mode='robust', lam=4.0))
            >>> blocks = [C.T @ C + np.eye(3), B.T @ B + np.eye(4), (1 / 16 + 1) * np.eye(15)]
            >>> float(np.abs(ops.matrix() - scipy.linalg.block_diag(*blocks)).max()) <= 1e-10
            True
            >>> ops = SplitOperators(P, SolverConfig())
            >>> float(np.abs(ops.matrix() - scipy.linalg.block_diag(*blocks[:2])).max()) <= 1e-10
            True

        With the total variation structure `P = D B` of a `3 \times 5` image::

            >>> B, C = rng.standard_normal((15, 4)), rng.standard_normal((15, 3))
            >>> P = ProblemInstance(B, C, rng.standard_normal(15), np.ones(15))
            >>> ops = SplitOperators(P, SolverConfig(mode='tv', lam=4.0, structure=TVStructure(3, 5)))
            >>> DB = TVStructure(3, 5).D().toarray() @ B
            >>> blocks = [C.T @ C + np.eye(3), B.T @ B + DB.T @ DB, (1 / 16 + 1) * np.eye(15)]
            >>> float(np.abs(ops.matrix() - scipy.linalg.block_diag(*blocks)).max()) <= 1e-10
            True
        """
        E = self.E_matrix()
        Q = self.Q_matrix()
        return E.T @ E + Q.T @ Q

@dataclass(frozen=True, eq=False)
class SolverState:
    """
    Iterate of the scaled ADMM: primal blocks ``u``, ``v``, ``z`` and scaled duals ``alpha``, ``beta``.
    """
    u: np.ndarray
    v: np.ndarray
    z: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    iteration: int = 0

def initial_state(operators):
    """
    Return the all-zero starting state for ``operators``.

    EXAMPLES::

        >>> P = ProblemInstance([[1.0]], [[1.0]], [1.0], [1.0])
        >>> state = initial_state(SplitOperators(P, SolverConfig(mode='robust')))
        >>> state.u.tolist(), state.z.tolist(), state.iteration
        ([0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 0)
    """
    u_size, v_size, z_size = operators.sizes()
    return SolverState(np.zeros(u_size), np.zeros(v_size), np.zeros(z_size), np.zeros(u_size), np.zeros(v_size), 0)

def admm_step(state, instance, config, operators):
    r"""
    Return the state after one scaled ADMM iteration from ``state``.

    INPUT:

    - ``state`` -- a :class:`SolverState`

    - ``instance`` -- a :class:`~branchhull.solver.problem.ProblemInstance`

    - ``config`` -- a :class:`~branchhull.solver.problem.SolverConfig`

    - ``operators`` -- the :class:`SplitOperators` of ``instance`` and ``config``

    EXAMPLES:

    From the zero state the first step projects the origin and thresholds zero::

        >>> P = ProblemInstance([[1.0], [1.0]], [[1.0], [1.0]], [1.0, 0.0], [1.0, 1.0])
        >>> config = SolverConfig(mode='robust', lam=10.0)
        >>> ops = SplitOperators(P, config)
        >>> state = admm_step(initial_state(ops), P, config, ops)
        >>> state.u.round(6).tolist()
        [0.594604, 0.0, 0.840896, 0.0, 0.594604, 0.0]
        >>> state.v.tolist(), state.iteration
        ([0.0, 0.0, 0.0, 0.0], 1)
    """
    z = state.z
    u = project_set(operators.E(z) - state.alpha, instance)
    v = soft_threshold(operators.Q(z) - state.beta, 1.0 / config.step_size())
    z = operators.solve(operators.E_transpose(state.alpha + u) + operators.Q_transpose(state.beta + v))
    alpha = state.alpha + u - operators.E(z)
    beta = state.beta + v - operators.Q(z)
    return SolverState(u, v, z, alpha, beta, state.iteration + 1)

def residuals(previous, state, config, operators):
    r"""
    Return the primal residual `\|u - E z\| + \|v - Q z\|` and the dual residual `\rho \|M (z - z_{\text{previous}})\|`.
    """
    primal = np.linalg.norm(state.u - operators.E(state.z)) + np.linalg.norm(state.v - operators.Q(state.z))
    dual = config.step_size() * np.linalg.norm(operators.M(state.z - previous.z))
    return float(primal), float(dual)

def iterate(instance, config, operators=None, state=None):
    """
    Yield the ADMM iterates of ``instance``, at most ``config.max_iterations()`` of them.

    EXAMPLES:

    Every iterate ``u`` lies in the hull set::

        >>> rng = np.random.default_rng(4)
        >>> P = ProblemInstance.from_truth(rng.standard_normal((10, 4)), rng.standard_normal((10, 4)), rng.standard_normal(4), rng.standard_normal(4))
        >>> config = SolverConfig(mode='robust', lam=2.0, max_iters=200)
        >>> worst = 0.0
        >>> for state in iterate(P, config):
        ...     L = 10
        ...     x, w, xi = state.u[:L], state.u[L:2 * L], state.u[2 * L:]
        ...     hull = np.abs(P.y()) - P.s() * (xi + x) * w
        ...     worst = max(worst, float(hull.max()), float((-P.t() * w).max()))
        >>> state.iteration, worst <= 1e-9
        (200, True)
    """
    if operators is None:
        operators = SplitOperators(instance, config)
    if state is None:
        state = initial_state(operators)
    for _ in range(config.max_iterations()):
        state = admm_step(state, instance, config, operators)
        yield state

def solve(instance, config, verbose=False):
    r"""
    Return the :class:`~branchhull.solver.problem.Solution` of the BranchHull program of ``instance``.

    The iteration stops when the primal residual is at most ``tol_primal`` and the dual residual
    at most ``tol_dual``, or after ``max_iters`` iterations; then ``converged`` is ``False``.

    INPUT:

    - ``instance`` -- a :class:`~branchhull.solver.problem.ProblemInstance`

    - ``config`` -- a :class:`~branchhull.solver.problem.SolverConfig`

    - ``verbose`` -- (default: ``False``) if ``True``, log progress at level INFO instead of DEBUG

    EXAMPLES:

    A single measurement `h m \geq 1` has the balanced minimizer `h = m = 1`::

        >>> P = ProblemInstance([[1.0]], [[1.0]], [1.0], [1.0])
        >>> solution = solve(P, SolverConfig(mode='robust', lam=1e6, rho=1.0))
        >>> [round(float(solution.h_hat[0]), 6), round(float(solution.m_hat[0]), 6)]
        [1.0, 1.0]
        >>> abs(float(solution.xi_hat[0])) < 1e-6
        True
        >>> solution = solve(P, SolverConfig())
        >>> solution.converged, round(solution.objective, 8)
        (True, 2.0)

    Vanishing measurements have the minimizer zero, reached in the first step::

        >>> rng = np.random.default_rng(0)
        >>> Z = ProblemInstance(rng.standard_normal((6, 3)), rng.standard_normal((6, 2)), np.zeros(6), np.ones(6))
        >>> solution = solve(Z, SolverConfig())
        >>> solution.converged, solution.iters_used, solution.h_hat.tolist(), solution.m_hat.tolist()
        (True, 1, [0.0, 0.0, 0.0], [0.0, 0.0])

    TESTS:

    Recovery of a sparse pair from Gaussian measurements, up to the balanced scaling::

        >>> P = make_instance(50, 50, 60, 2, seed=1)
        >>> solution = solve(P, SolverConfig())
        >>> h, m = P.balanced_truth()
        >>> float(np.linalg.norm(np.concatenate([solution.h_hat - h, solution.m_hat - m]))) < 1e-6
        True
        >>> solution.feasibility <= 10 * 1e-10
        True
        >>> solution.objective <= objective(h, m, None, SolverConfig()) + 1e-6
        True
        >>> instances = [make_instance(50, 50, 60, 2, seed=seed) for seed in range(10)]
        >>> sum(is_success(solve(Q, SolverConfig()), Q) for Q in instances) >= 9
        True

    A converged state is a fixed point of the iteration::

        >>> P = ProblemInstance([[1.0]], [[1.0]], [1.0], [1.0])
        >>> config = SolverConfig()
        >>> solution = solve(P, config)
        >>> ops = SplitOperators(P, config)
        >>> after = admm_step(solution.state, P, config, ops)
        >>> solution.converged, float(np.abs(after.z - solution.state.z).max()) <= 1e-9
        (True, True)

    Rescaling the ground truth by a power of two gives the same measurements, hence the same run::

        >>> rng = np.random.default_rng(8)
        >>> B, C = rng.standard_normal((12, 5)), rng.standard_normal((12, 5))
        >>> h, m = rng.standard_normal(5), rng.standard_normal(5)
        >>> config = SolverConfig(max_iters=300)
        >>> first = solve(ProblemInstance.from_truth(B, C, h, m), config)
        >>> second = solve(ProblemInstance.from_truth(B, C, 4 * h, m / 4), config)
        >>> bool(np.array_equal(first.h_hat, second.h_hat) and np.array_equal(first.m_hat, second.m_hat))
        True
    """
    L = instance.dimensions()[0]
    level = logging.INFO if verbose else logging.DEBUG
    operators = SplitOperators(instance, config)
    tol_primal, tol_dual = config.tolerances()
    log_every = config.log_every()
    state = initial_state(operators)
    history = []
    converged = False
    primal = dual = float('inf')
    for new_state in iterate(instance, config, operators, state):
        primal, dual = residuals(state, new_state, config, operators)
        state = new_state
        history.append((primal, dual))
        if log_every > 0 and state.iteration % log_every == 0:
            logger.log(level, 'iteration {}: primal residual {:.3e}, dual residual {:.3e}'.format(state.iteration, primal, dual))
        if primal <= tol_primal and dual <= tol_dual:
            converged = True
            break
    m_hat, h_hat, scaled_xi = operators.split(state.z)
    xi_hat = scaled_xi / config.penalty() if config.has_slack() else np.zeros(L)
    value = objective(h_hat, m_hat, xi_hat, config, instance)
    feasibility = feasibility_violation(h_hat, m_hat, xi_hat, instance)
    logger.log(logging.INFO, '{} after {} iterations: objective {:.6g}, primal residual {:.3e}, dual residual {:.3e}'.format(
        'converged' if converged else 'not converged', state.iteration, value, primal, dual))
    return Solution(h_hat.copy(), m_hat.copy(), xi_hat.copy(), value, state.iteration, primal, dual, converged,
                    feasibility=feasibility, history=tuple(history), state=state)
