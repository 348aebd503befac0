r"""
Euclidean projection onto the hyperbola branch sets of the BranchHull programs

The feasible set decouples over measurements. For one measurement it is

.. MATH::

    \{(x, w, \xi) : s (\xi + x) w \geq |y|,\ t w \geq 0\}

or its analogue without the slack `\xi`. Off the feasible set and for `y \neq 0` the projection
lies on the boundary, where the KKT conditions reduce to the quartic

.. MATH::

    k w^4 - k w' w^3 + s |y| \sigma' w - y^2 = 0

with `k = 2, \sigma' = x' + \xi'` (slack present) or `k = 1, \sigma' = x'` (no slack), and
multiplier `\mu = (|y| - s \sigma' w) / (k w^2)` which moves each summand of `\sigma` by `\mu s w`.
"""
import logging
import numpy as np

from .quartic import REAL_THRESHOLD, companion_roots, polish_real_roots

logger = logging.getLogger(__name__)

# roots with |w| below this are discarded, since s (xi + x) w >= |y| > 0 forbids w = 0
MIN_ROOT = 1e-12
# relative tolerance of the check w = w' + mu s sigma' + k mu^2 w at the selected root
CONSISTENCY_TOLERANCE = 1e-8

class HyperbolaBranch:
    r"""
    Constraint set of one measurement: `s (\xi + x) w \geq |y|` and `t w \geq 0`.
    """
    def __init__(self, y, t, s=None):
        """
        Initialize this branch.

        INPUT:

        - ``y`` -- a finite real, the measurement

        - ``t`` -- ``+1`` or ``-1``, the sign of `w`

        - ``s`` -- (default: ``sign(y)``) must equal ``sign(y)``

        EXAMPLES::

            >>> HyperbolaBranch(-2.0, 1)
            Hyperbola branch with y=-2.0, s=-1, t=1
            >>> HyperbolaBranch(1.0, 0)
            Traceback (most recent call last):
            ...
            ValueError: t must be +1 or -1
            >>> HyperbolaBranch(1.0, 1, s=0)
            Traceback (most recent call last):
            ...
            ValueError: s must equal sign(y)
        """
        y = float(y)
        if not np.isfinite(y):
            raise ValueError('y must be finite')
        if t not in (1, -1):
            raise ValueError('t must be +1 or -1')
        sign_y = int(np.sign(y))
        if s is not None and s != sign_y:
            raise ValueError('s must equal sign(y)')
        self._y = y
        self._s = sign_y
        self._t = int(t)

    def __repr__(self):
        """
        Return a string representation of this branch.
        """
        return 'Hyperbola branch with y={}, s={}, t={}'.format(self._y, self._s, self._t)

    def y(self):
        """
        Return the measurement of this branch.
        """
        return self._y

    def s(self):
        """
        Return the sign of the measurement.
        """
        return self._s

    def t(self):
        """
        Return the sign of `w` on this branch.
        """
        return self._t

    def violation(self, point):
        r"""
        Return the largest constraint violation of ``point``, a pair `(x, w)` or a triple `(x, w, \xi)`.

        EXAMPLES::

            >>> HyperbolaBranch(1.0, 1).violation((2.0, 1.0, 0.0))
            0.0
            >>> HyperbolaBranch(1.0, 1).violation((0.5, 1.0))
            0.5
        """
        x, w, xi = _unpack(point)
        sigma = x if xi is None else x + xi
        return float(max(0.0, abs(self._y) - self._s * sigma * w, -self._t * w))

def _unpack(point):
    """
    Return ``(x, w, xi)`` from a pair or a triple, with ``xi = None`` for a pair.
    """
    point = np.asarray(point, dtype=float)
    if point.shape == (2,):
        return point[0], point[1], None
    if point.shape == (3,):
        return point[0], point[1], point[2]
    raise ValueError('a point must be a pair (x, w) or a triple (x, w, xi)')

def _project_rows(y, s, t, x, w, xi=None):
    """
    Return the projections ``(x, w, xi)`` of a batch of points, one per measurement.

    ``xi = None`` selects the set without slack. Inputs are one-dimensional arrays of equal length.
    """
    k = 1 if xi is None else 2
    sigma = x if xi is None else x + xi
    abs_y = np.abs(y)
    x_new = x.copy()
    w_new = w.copy()
    xi_new = None if xi is None else xi.copy()

    # measurements y = 0 only constrain the sign of w
    wrong_side = t * w < 0
    half_line = (y == 0) & wrong_side
    w_new[half_line] = 0.0

    # the remaining infeasible measurements project onto the boundary s sigma w = |y|
    hull = (y != 0) & ((s * sigma * w < abs_y) | wrong_side)
    if not np.any(hull):
        return x_new, w_new, xi_new
    rows = np.flatnonzero(hull)
    yr, sr, tr, wr, sigmar = y[rows], s[rows], t[rows], w[rows], sigma[rows]
    n = len(rows)
    coefficients = np.column_stack([np.full(n, float(k)), -k * wr, np.zeros(n), sr * np.abs(yr) * sigmar, -yr**2])
    roots = companion_roots(coefficients)
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        # real parts of complex pairs are polished too; they only survive if admissible
        candidates = polish_real_roots(coefficients, roots.real)
        mu = (np.abs(yr)[:, None] - sr[:, None] * sigmar[:, None] * candidates) / (k * candidates**2)
        distance = k * (mu * candidates)**2 + (candidates - wr[:, None])**2
    # every admissible candidate is a feasible boundary point, so the closest one is the projection
    admissible = (tr[:, None] * candidates > 0) & (np.abs(candidates) >= MIN_ROOT)
    admissible &= mu >= -REAL_THRESHOLD * np.maximum(1.0, np.abs(mu))
    admissible &= np.isfinite(distance)
    distance = np.where(admissible, distance, np.inf)
    best = np.argmin(distance, axis=1)
    index = np.arange(n)
    if not np.all(np.isfinite(distance[index, best])):
        failed = rows[~np.isfinite(distance[index, best])][0]
        raise ArithmeticError('no admissible root of the projection quartic for y = {}'.format(y[failed]))
    w_root = candidates[index, best]
    mu_root = mu[index, best]
    shift = mu_root * sr * w_root
    consistency = np.abs(wr + mu_root * sr * sigmar + k * mu_root**2 * w_root - w_root)
    if np.any(consistency > CONSISTENCY_TOLERANCE * (1 + np.abs(w_root))):
        logger.warning('projection stationarity residual: {}'.format(float(consistency.max())))
    w_new[rows] = w_root
    x_new[rows] = x[rows] + shift
    if xi is not None:
        xi_new[rows] = xi[rows] + shift
    return x_new, w_new, xi_new

def project3(point, branch):
    r"""
    Return the Euclidean projection of `(x', w', \xi')` onto the set of ``branch``.

    INPUT:

    - ``point`` -- a triple `(x', w', \xi')` of finite reals

    - ``branch`` -- a :class:`HyperbolaBranch`

    OUTPUT:

    A numpy array `(x, w, \xi)`.

    EXAMPLES::

        >>> project3((2.0, 1.0, 0.0), HyperbolaBranch(1.0, 1)).tolist()
        [2.0, 1.0, 0.0]
        >>> project3((0.0, 0.0, 0.0), HyperbolaBranch(1.0, 1)).round(6).tolist()
        [0.594604, 0.840896, 0.594604]
        >>> project3((3.0, -1.0, 2.0), HyperbolaBranch(0.0, 1)).tolist()
        [3.0, 0.0, 2.0]
        >>> project3((0.0, 0.0, 0.0), HyperbolaBranch(-1.0, -1)).round(6).tolist()
        [0.594604, -0.840896, 0.594604]

    TESTS:

    Random branches and inputs, compared with a minimization over the boundary parameterized by
    `w` (for fixed `\sigma = x + \xi` the best split moves `x` and `\xi` equally)::

        >>> from scipy.optimize import minimize_scalar
        >>> rng = np.random.default_rng(7)
        >>> grid = np.logspace(-4, 4, 4001)
        >>> optimal = feasible = idempotent = True
        >>> for trial in range(1000):
        ...     y = rng.choice([-1, 1]) * rng.uniform(0.1, 3.0)
        ...     branch = HyperbolaBranch(y, int(rng.choice([-1, 1])))
        ...     p = 2 * rng.standard_normal(3)
        ...     q = project3(p, branch)
        ...     feasible &= branch.violation(q) <= 1e-9
        ...     idempotent &= bool(np.allclose(project3(q, branch), q, rtol=0, atol=1e-9))
        ...     if branch.violation(p) == 0:
        ...         optimal &= bool(np.array_equal(p, q))
        ...         continue
        ...     s, t = branch.s(), branch.t()
        ...     def squared_distance(a):
        ...         w = t * a
        ...         return (w - p[1])**2 + (s * abs(y) / w - p[0] - p[2])**2 / 2
        ...     values = squared_distance(grid)
        ...     i = int(np.argmin(values))
        ...     refined = minimize_scalar(squared_distance, bounds=(grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]), method='bounded', options={'xatol': 1e-12})
        ...     oracle = float(min(values[i], refined.fun))
        ...     optimal &= float(np.sum((q - p)**2)) <= oracle + 1e-6
        >>> optimal, feasible, idempotent
        (True, True, True)

    Projections onto a convex set are nonexpansive::

        >>> nonexpansive = True
        >>> for trial in range(500):
        ...     branch = HyperbolaBranch(rng.uniform(-3, 3), int(rng.choice([-1, 1])))
        ...     p, r = 2 * rng.standard_normal(3), 2 * rng.standard_normal(3)
        ...     nonexpansive &= bool(np.linalg.norm(project3(p, branch) - project3(r, branch)) <= np.linalg.norm(p - r) + 1e-9)
        >>> nonexpansive
        True

    Crossing the boundary of the feasible set moves the output continuously::

        >>> branch = HyperbolaBranch(2.0, 1)
        >>> boundary = np.array([1.0, 1.0, 1.0])
        >>> normal = np.array([1.0, 2.0, 1.0]) / np.sqrt(6)
        >>> eps = 1e-6
        >>> inside, outside = project3(boundary + eps * normal, branch), project3(boundary - eps * normal, branch)
        >>> bool(np.linalg.norm(inside - outside) <= 3 * eps)
        True
    """
    x, w, xi = _unpack(point)
    if xi is None:
        raise ValueError('project3 needs a triple (x, w, xi)')
    if not np.all(np.isfinite([x, w, xi])):
        raise ValueError('the point must have finite entries')
    x, w, xi = _project_rows(np.array([branch.y()]), np.array([float(branch.s())]), np.array([float(branch.t())]),
                             np.array([x]), np.array([w]), np.array([xi]))
    return np.array([x[0], w[0], xi[0]])

def project2(point, branch):
    r"""
    Return the Euclidean projection of `(x', w')` onto `\{(x, w) : s x w \geq |y|, t w \geq 0\}`.

    INPUT:

    - ``point`` -- a pair `(x', w')` of finite reals

    - ``branch`` -- a :class:`HyperbolaBranch`

    EXAMPLES::

        >>> project2((0.0, 0.0), HyperbolaBranch(1.0, 1)).round(12).tolist()
        [1.0, 1.0]
        >>> project2((3.0, 2.0), HyperbolaBranch(1.0, 1)).tolist()
        [3.0, 2.0]
        >>> project2((5.0, 4.0), HyperbolaBranch(0.0, -1)).tolist()
        [5.0, 0.0]

    TESTS:

    Agreement with a minimization over the boundary `x = s |y| / w`::

        >>> rng = np.random.default_rng(11)
        >>> grid = np.logspace(-4, 4, 4001)
        >>> optimal = feasible = True
        >>> for trial in range(300):
        ...     y = rng.choice([-1, 1]) * rng.uniform(0.1, 3.0)
        ...     branch = HyperbolaBranch(y, int(rng.choice([-1, 1])))
        ...     p = 2 * rng.standard_normal(2)
        ...     q = project2(p, branch)
        ...     feasible &= branch.violation(q) <= 1e-9
        ...     if branch.violation(p) > 0:
        ...         w = branch.t() * grid
        ...         oracle = float(np.min((w - p[1])**2 + (branch.s() * abs(y) / w - p[0])**2))
        ...         optimal &= float(np.sum((q - p)**2)) <= oracle + 1e-6
        >>> optimal, feasible
        (True, True)
    """
    x, w, xi = _unpack(point)
    if xi is not None:
        raise ValueError('project2 needs a pair (x, w)')
    if not np.all(np.isfinite([x, w])):
        raise ValueError('the point must have finite entries')
    x, w, _ = _project_rows(np.array([branch.y()]), np.array([float(branch.s())]), np.array([float(branch.t())]),
                            np.array([x]), np.array([w]))
    return np.array([x[0], w[0]])

def projection_case(point, branch):
    """
    Return the active case of the projection of ``point`` onto ``branch``.

    OUTPUT:

    ``1`` if ``point`` is feasible, ``2`` if only the sign of `w` is violated for `y = 0`, and
    ``4`` if the projection lies on the hyperbola boundary.

    EXAMPLES::

        >>> projection_case((2.0, 1.0, 0.0), HyperbolaBranch(1.0, 1))
        1
        >>> projection_case((3.0, -1.0, 2.0), HyperbolaBranch(0.0, 1))
        2
        >>> projection_case((0.0, 0.0), HyperbolaBranch(1.0, 1))
        4
    """
    if branch.violation(point) == 0:
        return 1
    if branch.y() == 0:
        return 2
    return 4

def project_set(points, instance):
    r"""
    Return the projection of ``points`` onto the feasible set of ``instance``, one measurement at a time.

    INPUT:

    - ``points`` -- a vector of length `3L` laid out as blocks `(x, w, \xi)`, or of length `2L`
      laid out as `(x, w)` for the program without slack

    - ``instance`` -- a :class:`~branchhull.solver.problem.ProblemInstance`

    EXAMPLES::

        >>> P = ProblemInstance([[1.0], [1.0]], [[1.0], [1.0]], [1.0, 1.0], [1.0, 1.0])
        >>> project_set([2.0, 0.0, 1.0, 0.0, 0.0, 0.0], P).round(6).tolist()
        [2.0, 0.594604, 1.0, 0.840896, 0.0, 0.594604]
        >>> project_set([2.0, 0.0, 1.0, 0.0], P).round(12).tolist()
        [2.0, 1.0, 1.0, 1.0]
        >>> project_set([1.0, 2.0, 3.0], P)
        Traceback (most recent call last):
        ...
        ValueError: points must have length 6 or 4, not 3

    TESTS:

    Agreement with :func:`project3` applied to each measurement::

        >>> rng = np.random.default_rng(5)
        >>> L = 40
        >>> y = rng.standard_normal(L) * (rng.uniform(size=L) > 0.1)
        >>> Q = ProblemInstance(np.eye(L), np.eye(L), y, rng.choice([-1.0, 1.0], size=L))
        >>> u = 2 * rng.standard_normal(3 * L)
        >>> projected = project_set(u, Q)
        >>> looped = np.array([project3(u[[l, L + l, 2 * L + l]], HyperbolaBranch(y[l], int(Q.t()[l]))) for l in range(L)])
        >>> bool(np.allclose(projected.reshape(3, L).T, looped, rtol=0, atol=1e-12))
        True
        >>> bool(np.allclose(project_set(projected, Q), projected, rtol=0, atol=1e-12))
        True
    """
    L = instance.dimensions()[0]
    points = np.asarray(points, dtype=float)
    if points.shape not in ((3 * L,), (2 * L,)):
        raise ValueError('points must have length {} or {}, not {}'.format(3 * L, 2 * L, points.size))
    if not np.all(np.isfinite(points)):
        raise ValueError('points must have finite entries')
    x, w = points[:L], points[L:2 * L]
    xi = points[2 * L:] if len(points) == 3 * L else None
    x, w, xi = _project_rows(instance.y(), instance.s(), instance.t(), x, w, xi)
    return np.concatenate([x, w] if xi is None else [x, w, xi])
