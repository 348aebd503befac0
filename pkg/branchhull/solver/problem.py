r"""
Bilinear problem instances, solver configuration and solutions
"""
from dataclasses import dataclass, field
from typing import NamedTuple
import numpy as np
import scipy.sparse

MODES = ('noiseless', 'robust', 'tv')

def _as_operator(A, name):
    """
    Return ``A`` as a read-only dense matrix of floats, or as a sparse CSR matrix if it is sparse.
    """
    if scipy.sparse.issparse(A):
        return scipy.sparse.csr_matrix(A, dtype=float)
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise ValueError('{} must be a matrix'.format(name))
    A.flags.writeable = False
    return A

def _as_vector(v, name, length=None):
    """
    Return a read-only copy of ``v`` as a one-dimensional vector of floats.
    """
    v = np.array(v, dtype=float)
    if v.ndim == 2 and 1 in v.shape:
        v = v.reshape(-1)
    if v.ndim != 1:
        raise ValueError('{} must be a vector'.format(name))
    if length is not None and len(v) != length:
        raise ValueError('{} must have length {}, not {}'.format(name, length, len(v)))
    if not np.all(np.isfinite(v)):
        raise ValueError('{} must have finite entries'.format(name))
    v.flags.writeable = False
    return v

class BalancedPoint(NamedTuple):
    r"""
    Pair ``(h_tilde, m_tilde)`` with equal `\ell_1` norms.
    """
    h_tilde: np.ndarray
    m_tilde: np.ndarray

def balanced_scaling(h, m):
    r"""
    Return the rescaling `(c h, c^{-1} m)` of ``(h, m)`` with `\|c h\|_1 = \|c^{-1} m\|_1`.

    The entrywise product of `B(c h)` and `C(c^{-1} m)` does not depend on `c > 0`, so this is the
    representative of the scaling class that the `\ell_1` objective selects.

    INPUT:

    - ``h`` -- a vector with nonzero `\ell_1` norm

    - ``m`` -- a vector with nonzero `\ell_1` norm

    EXAMPLES::

        >>> [v.tolist() for v in balanced_scaling([1.0], [4.0])]
        [[2.0], [2.0]]
        >>> [v.tolist() for v in balanced_scaling([1.0, 1.0], [2.0, 0.0])]
        [[1.0, 1.0], [2.0, 0.0]]
        >>> [v.tolist() for v in balanced_scaling([3.0], [-3.0])]
        [[3.0], [-3.0]]
        >>> balanced_scaling([0.0], [1.0])
        Traceback (most recent call last):
        ...
        ValueError: cannot balance a pair with a zero factor

    TESTS:

    Balancing is idempotent::

        >>> rng = np.random.default_rng(3)
        >>> h, m = rng.standard_normal(7), 10 * rng.standard_normal(4)
        >>> once = balanced_scaling(h, m)
        >>> twice = balanced_scaling(*once)
        >>> bool(np.allclose(once.h_tilde, twice.h_tilde, rtol=1e-12, atol=0) and np.allclose(once.m_tilde, twice.m_tilde, rtol=1e-12, atol=0))
        True
        >>> bool(abs(np.abs(once.h_tilde).sum() - np.abs(once.m_tilde).sum()) <= 1e-12 * np.abs(once.m_tilde).sum())
        True
    """
    h = np.asarray(h, dtype=float)
    m = np.asarray(m, dtype=float)
    norm_h = np.abs(h).sum()
    norm_m = np.abs(m).sum()
    if norm_h == 0 or norm_m == 0:
        raise ValueError('cannot balance a pair with a zero factor')
    return BalancedPoint(h * np.sqrt(norm_m / norm_h), m * np.sqrt(norm_h / norm_m))

class ProblemInstance:
    r"""
    Bilinear inverse problem `y = (B h) \odot (C m)` with known signs ``s = sign(y)`` and ``t = sign(B h)``.

    Instances are immutable: all arrays are copied and marked read-only.
    """
    def __init__(self, B, C, y, t, s=None, truth=None):
        r"""
        Initialize this problem instance.

        INPUT:

        - ``B`` -- an `L \times K` matrix (dense, or sparse for structured dictionaries)

        - ``C`` -- an `L \times N` matrix

        - ``y`` -- a vector of `L` measurements

        - ``t`` -- a vector of `L` entries in `\{-1, +1\}`, the signs of `B h`

        - ``s`` -- (default: ``sign(y)``) a vector of `L` entries, must equal ``sign(y)``

        - ``truth`` -- (default: ``None``) a pair ``(h, m)`` generating ``y``

        EXAMPLES::

            >>> P = ProblemInstance([[1.0]], [[1.0]], [1.0], [1.0]); P
            Bilinear problem instance with L=1, K=1, N=1
            >>> ProblemInstance([[1.0]], [[1.0]], [1.0], [1.0], s=[-1.0])
            Traceback (most recent call last):
            ...
            ValueError: s must equal sign(y)
            >>> ProblemInstance([[1.0]], [[1.0]], [1.0], [0.0])
            Traceback (most recent call last):
            ...
            ValueError: entries of t must be +1 or -1
            >>> ProblemInstance([[1.0]], [[1.0]], [1.0], [1.0], truth=([2.0], [1.0]))
            Traceback (most recent call last):
            ...
            ValueError: truth does not reproduce the measurements y
        """
        self._B = _as_operator(B, 'B')
        self._C = _as_operator(C, 'C')
        L = self._B.shape[0]
        if L == 0:
            raise ValueError('an instance needs at least one measurement')
        if self._C.shape[0] != L:
            raise ValueError('B and C must have the same number of rows, not {} and {}'.format(L, self._C.shape[0]))
        self._y = _as_vector(y, 'y', L)
        sign_y = np.sign(self._y)
        self._s = sign_y if s is None else _as_vector(s, 's', L)
        if np.any(self._s != sign_y):
            raise ValueError('s must equal sign(y)')
        self._t = _as_vector(t, 't', L)
        if not np.all(np.abs(self._t) == 1):
            raise ValueError('entries of t must be +1 or -1')
        self._truth = None
        if truth is not None:
            h, m = truth
            h = _as_vector(h, 'h', self._B.shape[1])
            m = _as_vector(m, 'm', self._C.shape[1])
            w = self._B @ h
            x = self._C @ m
            if np.max(np.abs(w * x - self._y)) > 1e-12 * max(1.0, np.max(np.abs(self._y))):
                raise ValueError('truth does not reproduce the measurements y')
            nonzero = w != 0
            if np.any(self._t[nonzero] != np.sign(w[nonzero])):
                raise ValueError('t must equal sign(B h) wherever B h is nonzero')
            self._truth = (h, m)

    @classmethod
    def from_truth(cls, B, C, h, m):
        """
        Return the instance generated by the ground truth ``(h, m)``.

        Zero entries of ``B h`` get the sign ``t = +1``.

        EXAMPLES::

            >>> P = ProblemInstance.from_truth([[1.0, 0.0], [0.0, -1.0]], [[2.0], [3.0]], [1.0, 1.0], [1.0])
            >>> P.y().tolist(), P.s().tolist(), P.t().tolist()
            ([2.0, -3.0], [1.0, -1.0], [1.0, -1.0])
            >>> P.has_truth()
            True
        """
        B = _as_operator(B, 'B')
        C = _as_operator(C, 'C')
        h = _as_vector(h, 'h', B.shape[1])
        m = _as_vector(m, 'm', C.shape[1])
        w = B @ h
        y = w * (C @ m)
        t = np.where(w < 0, -1.0, 1.0)
        return cls(B, C, y, t, truth=(h, m))

    def __repr__(self):
        """
        Return a string representation of this problem instance.
        """
        L, K, N = self.dimensions()
        return 'Bilinear problem instance with L={}, K={}, N={}'.format(L, K, N)

    def B(self):
        """
        Return the dictionary `B` of the first factor.
        """
        return self._B

    def C(self):
        """
        Return the dictionary `C` of the second factor.
        """
        return self._C

    def y(self):
        """
        Return the measurement vector.
        """
        return self._y

    def s(self):
        """
        Return the measurement signs ``sign(y)``.
        """
        return self._s

    def t(self):
        """
        Return the known signs of ``B h``.
        """
        return self._t

    def truth(self):
        """
        Return the ground truth ``(h, m)`` if known, and ``None`` otherwise.
        """
        return self._truth

    def has_truth(self):
        """
        Return ``True`` if the ground truth of this instance is known.
        """
        return self._truth is not None

    def balanced_truth(self):
        """
        Return the balanced scaling of the ground truth.
        """
        if self._truth is None:
            raise ValueError('instance has no ground truth')
        return balanced_scaling(*self._truth)

    def dimensions(self):
        """
        Return the tuple ``(L, K, N)`` of dimensions of this instance.
        """
        return (self._B.shape[0], self._B.shape[1], self._C.shape[1])

class SolverConfig:
    r"""
    Configuration of the ADMM solver for the BranchHull programs.

    The generalized program minimizes `\|P h\|_1 + \|m\|_1 + \lambda \|\xi\|_1` subject to the hull
    constraints. The mode selects the program:

    - ``'noiseless'`` -- no slack variable and `P = I`

    - ``'robust'`` -- slack variable with penalty `\lambda`, `P = I` unless a ``structure`` is given

    - ``'tv'`` -- slack variable, `P` given by ``structure`` (a
      :class:`~branchhull.experiment.dictionary.TVStructure`, meaning `P = D B`, or an explicit matrix)
    """
    def __init__(self, mode='noiseless', lam=1e3, rho=1.0, max_iters=10000, tol_primal=1e-10, tol_dual=1e-10, structure=None, log_every=100):
        r"""
        Initialize this solver configuration.

        INPUT:

        - ``mode`` -- (default: ``'noiseless'``) one of ``'noiseless'``, ``'robust'``, ``'tv'``

        - ``lam`` -- (default: ``1e3``) a positive real, the slack penalty `\lambda`

        - ``rho`` -- (default: ``1.0``) a positive real, the ADMM step `\rho`

        - ``max_iters`` -- (default: ``10000``) a positive integer

        - ``tol_primal``, ``tol_dual`` -- (default: ``1e-10``) positive reals, absolute residual thresholds

        - ``structure`` -- (default: ``None``, meaning `P = I`) a ``TVStructure`` or an explicit `J \times K` matrix

        - ``log_every`` -- (default: ``100``) log the residuals every this many iterations

        EXAMPLES::

            >>> SolverConfig(mode='robust', lam=10.0)
            ADMM configuration (mode=robust, lambda=10.0, rho=1.0, max_iters=10000)
            >>> SolverConfig(rho=0.0)
            Traceback (most recent call last):
            ...
            ValueError: rho must be positive
            >>> SolverConfig(mode='tv')
            Traceback (most recent call last):
            ...
            ValueError: mode 'tv' needs a structure matrix P
            >>> SolverConfig(mode='noiseless', structure=np.eye(2))
            Traceback (most recent call last):
            ...
            ValueError: mode 'noiseless' uses P = I and accepts no structure
        """
        if mode not in MODES:
            raise ValueError('mode must be one of {}'.format(', '.join(MODES)))
        if not lam > 0:
            raise ValueError('lam must be positive')
        if not rho > 0:
            raise ValueError('rho must be positive')
        if int(max_iters) != max_iters or max_iters < 1:
            raise ValueError('max_iters must be a positive integer')
        if not (tol_primal > 0 and tol_dual > 0):
            raise ValueError('tolerances must be positive')
        if mode == 'tv' and structure is None:
            raise ValueError("mode 'tv' needs a structure matrix P")
        if mode == 'noiseless' and structure is not None:
            raise ValueError("mode 'noiseless' uses P = I and accepts no structure")
        self._mode = mode
        self._lam = float(lam)
        self._rho = float(rho)
        self._max_iters = int(max_iters)
        self._tol_primal = float(tol_primal)
        self._tol_dual = float(tol_dual)
        if structure is not None and not hasattr(structure, 'D'):
            structure = _as_operator(structure, 'P')
        self._structure = structure
        self._log_every = int(log_every)

    def __repr__(self):
        """
        Return a string representation of this configuration.
        """
        return 'ADMM configuration (mode={}, lambda={}, rho={}, max_iters={})'.format(self._mode, self._lam, self._rho, self._max_iters)

    def mode(self):
        """
        Return the program mode.
        """
        return self._mode

    def has_slack(self):
        r"""
        Return ``True`` if the program of this configuration has the slack variable `\xi`.
        """
        return self._mode != 'noiseless'

    def penalty(self):
        r"""
        Return the slack penalty `\lambda`.
        """
        return self._lam

    def step_size(self):
        r"""
        Return the ADMM step `\rho`.
        """
        return self._rho

    def max_iterations(self):
        """
        Return the iteration budget.
        """
        return self._max_iters

    def tolerances(self):
        """
        Return the tuple ``(tol_primal, tol_dual)``.
        """
        return (self._tol_primal, self._tol_dual)

    def log_every(self):
        """
        Return the number of iterations between two residual log messages.
        """
        return self._log_every

    def structure(self):
        """
        Return the structure specification of `P` (``None`` for the identity).
        """
        return self._structure

    def structure_matrix(self, B=None, K=None):
        """
        Return the matrix `P` acting on `h`.

        INPUT:

        - ``B`` -- (default: ``None``) the dictionary `B`, needed when `P = D B`

        - ``K`` -- (default: ``None``) the length of `h`, needed when `P = I`
        """
        structure = self._structure
        if structure is None:
            if K is None:
                K = B.shape[1]
            return scipy.sparse.identity(K, format='csr')
        if hasattr(structure, 'D'):
            if B is None:
                raise ValueError('the total variation structure P = D B needs the dictionary B')
            if structure.D().shape[1] != B.shape[0]:
                raise ValueError('image of {} pixels does not match B with {} rows'.format(structure.D().shape[1], B.shape[0]))
            return structure.D() @ B
        if K is not None and structure.shape[1] != K:
            raise ValueError('P must have {} columns, not {}'.format(K, structure.shape[1]))
        return structure

@dataclass(frozen=True, eq=False)
class Solution:
    """
    Output of the ADMM solver: recovered point and convergence diagnostics.
    """
    h_hat: np.ndarray
    m_hat: np.ndarray
    xi_hat: np.ndarray
    objective: float
    iters_used: int
    primal_residual: float
    dual_residual: float
    converged: bool
    feasibility: float = 0.0
    history: tuple = ()
    state: object = field(default=None, repr=False, compare=False)

def objective(h, m, xi, config, instance=None):
    r"""
    Return the objective `\|P h\|_1 + \|m\|_1 + \lambda \|\xi\|_1` of the program selected by ``config``.

    In ``'noiseless'`` mode the slack term is omitted and `P = I`.

    INPUT:

    - ``h``, ``m``, ``xi`` -- vectors (``xi`` is ignored in ``'noiseless'`` mode and may be ``None``)

    - ``config`` -- a :class:`SolverConfig`

    - ``instance`` -- (default: ``None``) the instance, needed when `P = D B`

    EXAMPLES::

        >>> objective([1.0, -2.0], [0.5], [0.0], SolverConfig(mode='robust', lam=1.0))
        3.5
        >>> objective([0.0, 0.0], [0.0], [0.0], SolverConfig(mode='robust'))
        0.0
        >>> objective([1.0, 1.0], [1.0], [0.0], SolverConfig(mode='tv', structure=[[-1.0, 1.0], [1.0, -1.0]]))
        1.0
        >>> objective([1.0], [1.0], [0.0], SolverConfig(mode='tv', structure=[[-1.0, 1.0]]))
        Traceback (most recent call last):
        ...
        ValueError: P must have 1 columns, not 2

    TESTS:

    Along the scaling class `(c h, c^{-1} m)` the objective is `c \|h\|_1 + c^{-1} \|m\|_1`, smallest at
    the balanced scaling with value `2 \sqrt{\|h\|_1 \|m\|_1}`::

        >>> rng = np.random.default_rng(6)
        >>> h, m = rng.standard_normal(7), 5 * rng.standard_normal(4)
        >>> a, b = float(np.abs(h).sum()), float(np.abs(m).sum())
        >>> grid = np.logspace(-3, 3, 60001)
        >>> config = SolverConfig()
        >>> values = np.array([objective(c * h, m / c, None, config) for c in grid])
        >>> bool(np.allclose(values, grid * a + b / grid, rtol=1e-12, atol=0))
        True
        >>> c_best = float(grid[np.argmin(values)])
        >>> bool(abs(c_best / np.sqrt(b / a) - 1) < 1e-3)
        True
        >>> bool(abs(float(values.min()) - 2 * np.sqrt(a * b)) <= 1e-6 * np.sqrt(a * b))
        True
        >>> h_tilde, m_tilde = balanced_scaling(h, m)
        >>> bool(np.allclose(h_tilde, np.sqrt(b / a) * h, rtol=1e-12) and np.allclose(m_tilde, np.sqrt(a / b) * m, rtol=1e-12))
        True
        >>> bool(np.allclose(h_tilde, c_best * h, rtol=1e-3))
        True
    """
    h = np.asarray(h, dtype=float)
    m = np.asarray(m, dtype=float)
    value = np.abs(m).sum()
    if not config.has_slack():
        return float(np.abs(h).sum() + value)
    B = None if instance is None else instance.B()
    P = config.structure_matrix(B=B, K=len(h))
    if P.shape[1] != len(h):
        raise ValueError('P must have {} columns, not {}'.format(len(h), P.shape[1]))
    xi = np.zeros(0) if xi is None else np.asarray(xi, dtype=float)
    return float(np.abs(P @ h).sum() + value + config.penalty() * np.abs(xi).sum())

def feasibility_violation(h, m, xi, instance):
    r"""
    Return the largest violation of the hull constraints `s_\ell(\xi_\ell + c_\ell^T m) b_\ell^T h \geq |y_\ell|` and `t_\ell b_\ell^T h \geq 0`.

    The result is zero if and only if ``(h, m, xi)`` is feasible. ``xi = None`` means `\xi = 0`.

    EXAMPLES::

        >>> P = ProblemInstance([[1.0]], [[1.0]], [1.0], [1.0])
        >>> feasibility_violation([2.0], [1.0], [0.0], P)
        0.0
        >>> feasibility_violation([0.0], [0.0], None, P)
        1.0
        >>> feasibility_violation([-1.0], [-1.0], None, P)
        1.0

    TESTS:

    The ground truth and its rescalings are feasible::

        >>> rng = np.random.default_rng(0)
        >>> B, C = rng.standard_normal((12, 5)), rng.standard_normal((12, 6))
        >>> Q = ProblemInstance.from_truth(B, C, rng.standard_normal(5), rng.standard_normal(6))
        >>> h, m = Q.truth()
        >>> feasibility_violation(h, m, None, Q) <= 1e-12
        True
        >>> feasibility_violation(*Q.balanced_truth(), None, Q) <= 1e-12
        True
    """
    L, K, N = instance.dimensions()
    h = _as_vector(h, 'h', K)
    m = _as_vector(m, 'm', N)
    xi = np.zeros(L) if xi is None else _as_vector(xi, 'xi', L)
    w = instance.B() @ h
    x = instance.C() @ m
    hull = np.abs(instance.y()) - instance.s() * (xi + x) * w
    branch = -instance.t() * w
    return float(max(0.0, hull.max(), branch.max()))
