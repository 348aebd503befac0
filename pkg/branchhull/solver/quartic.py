r"""
Real roots of quartic polynomials
"""
import logging
import numpy as np

logger = logging.getLogger(__name__)

# imaginary parts below this (relative to 1 + |real part|) count as rounding noise
REAL_THRESHOLD = 1e-9
# eigenvalues closer than this (relative) are one multiple root split by rounding
CLUSTER_THRESHOLD = 1e-6

class Quartic:
    r"""
    Polynomial `a_4 w^4 + a_3 w^3 + a_2 w^2 + a_1 w + a_0` with real coefficients.

    A vanishing leading coefficient is allowed; the roots are then those of the lower degree polynomial.
    """
    def __init__(self, a4, a3, a2, a1, a0):
        """
        Initialize this quartic polynomial.

        INPUT:

        - ``a4``, ``a3``, ``a2``, ``a1``, ``a0`` -- finite real coefficients, highest degree first

        EXAMPLES::

            >>> Quartic(2, 0, 0, 0, -1)
            Quartic polynomial 2.0*w^4 - 1.0
            >>> Quartic(1, 0, float('nan'), 0, 0)
            Traceback (most recent call last):
            ...
            ValueError: coefficients must be finite
        """
        coefficients = np.array([a4, a3, a2, a1, a0], dtype=float)
        if not np.all(np.isfinite(coefficients)):
            raise ValueError('coefficients must be finite')
        coefficients.flags.writeable = False
        self._coefficients = coefficients

    def __repr__(self):
        """
        Return a string representation of this quartic polynomial.
        """
        terms = []
        for power, a in zip(range(4, -1, -1), self._coefficients):
            if a == 0:
                continue
            monomial = '' if power == 0 else ('*w' if power == 1 else '*w^{}'.format(power))
            if not terms:
                terms.append('{}{}'.format(a, monomial))
            else:
                terms.append('{} {}{}'.format('-' if a < 0 else '+', abs(a), monomial))
        return 'Quartic polynomial {}'.format(' '.join(terms) if terms else '0')

    def coefficients(self):
        """
        Return the coefficients ``(a4, a3, a2, a1, a0)`` of this quartic polynomial.
        """
        return self._coefficients

    def degree(self):
        """
        Return the degree of this polynomial (``-1`` for the zero polynomial).

        EXAMPLES::

            >>> Quartic(0, 0, 1, 0, -1).degree()
            2
        """
        nonzero = np.flatnonzero(self._coefficients)
        return -1 if len(nonzero) == 0 else 4 - int(nonzero[0])

    def magnitude(self):
        """
        Return ``max(1, |a_i|)``, the scale used for residual tolerances.
        """
        return max(1.0, float(np.abs(self._coefficients).max()))

    def __call__(self, w):
        """
        Return the value of this polynomial at ``w``.
        """
        return np.polyval(self._coefficients, w)

    def derivative(self, w):
        """
        Return the value of the derivative of this polynomial at ``w``.
        """
        return np.polyval(np.polyder(self._coefficients), w)

    def companion_matrix(self):
        """
        Return the companion matrix of this polynomial, whose eigenvalues are its roots.

        EXAMPLES::

            >>> Quartic(0, 0, 2, -4, 6).companion_matrix().tolist()
            [[2.0, -3.0], [1.0, 0.0]]
        """
        d = self.degree()
        if d < 0:
            raise ValueError('the zero polynomial has no isolated roots')
        c = self._coefficients[4 - d:]
        companion = np.zeros((d, d))
        if d > 0:
            companion[0, :] = -c[1:] / c[0]
            companion[np.arange(1, d), np.arange(d - 1)] = 1.0
        return companion

    def roots(self):
        """
        Return the roots of this polynomial as a list of ``(root, multiplicity)`` with complex roots.

        Eigenvalues of the companion matrix that agree up to rounding are merged into one
        multiple root.

        EXAMPLES::

            >>> sorted((round(z.real, 8) + 0.0, round(z.imag, 8) + 0.0, k) for z, k in Quartic(1, -2, 2, -2, 1).roots())
            [(0.0, -1.0, 1), (0.0, 1.0, 1), (1.0, 0.0, 2)]
            >>> Quartic(0, 0, 0, 0, 0).roots()
            Traceback (most recent call last):
            ...
            ValueError: the zero polynomial has no isolated roots
        """
        companion = self.companion_matrix()
        if companion.shape[0] == 0:
            return []
        eigenvalues = sorted(np.linalg.eigvals(companion), key=lambda z: (z.real, z.imag))
        clusters = []
        for z in eigenvalues:
            for cluster in clusters:
                center = np.mean(cluster)
                if abs(z - center) <= CLUSTER_THRESHOLD * (1 + abs(center)):
                    cluster.append(z)
                    break
            else:
                clusters.append([z])
        return [(complex(np.mean(cluster)), len(cluster)) for cluster in clusters]

def _polish(q, w, multiplicity, steps=3):
    """
    Return ``w`` improved by Newton steps on ``q``, keeping only steps that decrease ``|q(w)|``.

    Multiple roots use the step scaled by their multiplicity, which restores quadratic convergence.
    """
    value = q(w)
    for _ in range(steps):
        slope = q.derivative(w)
        if value == 0 or slope == 0:
            break
        candidate = w - multiplicity * value / slope
        candidate_value = q(candidate)
        if not abs(candidate_value) < abs(value):
            break
        w, value = candidate, candidate_value
    return float(w)

def real_roots(q, tol=1e-10):
    r"""
    Return the real roots of the quartic ``q`` as a sorted list of ``(root, multiplicity)``.

    INPUT:

    - ``q`` -- a :class:`Quartic`

    - ``tol`` -- (default: ``1e-10``) residual tolerance relative to ``q.magnitude()``

    ALGORITHM:

    Eigenvalues of the companion matrix, merged into multiple roots when they agree up to
    rounding, classified as real when the imaginary part is at most `10^{-9}(1 + |\mathrm{Re}|)`, and
    polished by Newton steps.

    EXAMPLES::

        >>> [(round(w, 4), k) for w, k in real_roots(Quartic(2, 0, 0, 0, -1))]
        [(-0.8409, 1), (0.8409, 1)]
        >>> all(abs(Quartic(2, 0, 0, 0, -1)(w)) < 1e-12 for w, _ in real_roots(Quartic(2, 0, 0, 0, -1)))
        True
        >>> [(round(w, 8), k) for w, k in real_roots(Quartic(1, -3, 3, -3, 2))]
        [(1.0, 1), (2.0, 1)]
        >>> [(round(w, 8), k) for w, k in real_roots(Quartic(1, -2, 2, -2, 1))]
        [(1.0, 2)]
        >>> real_roots(Quartic(1, 0, 1, 0, 1))
        []
        >>> [(round(w, 8), k) for w, k in real_roots(Quartic(0, 0, 1, 0, -4))]
        [(-2.0, 1), (2.0, 1)]
        >>> real_roots(Quartic(0, 0, 0, 0, 0))
        Traceback (most recent call last):
        ...
        ValueError: the zero polynomial has no isolated roots

    TESTS:

    Quartics constructed from known roots, with four real roots or with two real roots and a
    complex pair::

        >>> rng = np.random.default_rng(2024)
        >>> worst_error = worst_residual = 0.0
        >>> counts_match = True
        >>> for trial in range(1000):
        ...     k = 4 if trial % 2 == 0 else 2
        ...     r = np.sort(rng.uniform(-3, 3, size=k))
        ...     while k > 1 and np.min(np.diff(r)) < 1e-3:
        ...         r = np.sort(rng.uniform(-3, 3, size=k))
        ...     factors = list(r)
        ...     if k == 2:
        ...         z = complex(rng.uniform(-3, 3), rng.uniform(0.5, 2))
        ...         factors += [z, z.conjugate()]
        ...     q = Quartic(*np.real(np.poly(factors)))
        ...     found = real_roots(q)
        ...     counts_match &= sum(m for _, m in q.roots()) == 4
        ...     counts_match &= [m for _, m in found] == [1] * k
        ...     worst_error = max(worst_error, float(np.max(np.abs(np.array([w for w, _ in found]) - r))))
        ...     worst_residual = max(worst_residual, max(abs(float(q(w))) for w, _ in found))
        >>> counts_match, worst_error < 1e-8, worst_residual < 1e-10
        (True, True, True)
    """
    result = []
    for z, multiplicity in q.roots():
        if abs(z.imag) > REAL_THRESHOLD * (1 + abs(z.real)):
            continue
        w = _polish(q, z.real, multiplicity)
        if abs(q(w)) > tol * q.magnitude():
            logger.warning('quartic root residual above tolerance: {} at w = {}'.format(abs(q(w)), w))
        result.append((w, multiplicity))
    result.sort()
    return result

def companion_roots(coefficients):
    """
    Return the four complex roots of each quartic in a batch.

    INPUT:

    - ``coefficients`` -- an array of shape ``(n, 5)``, one quartic per row with nonzero leading coefficient

    OUTPUT:

    An array of shape ``(n, 4)`` holding the eigenvalues of the stacked companion matrices.

    EXAMPLES::

        >>> roots = companion_roots([[1, -3, 3, -3, 2], [2, 0, 0, 0, -1]])
        >>> sorted(round(z.real, 6) for z in roots[0] if abs(z.imag) < 1e-9)
        [1.0, 2.0]
        >>> companion_roots(np.zeros((0, 5))).shape
        (0, 4)
    """
    coefficients = np.asarray(coefficients, dtype=float)
    n = coefficients.shape[0]
    if n == 0:
        return np.zeros((0, 4), dtype=complex)
    companion = np.zeros((n, 4, 4))
    companion[:, 0, :] = -coefficients[:, 1:] / coefficients[:, :1]
    companion[:, [1, 2, 3], [0, 1, 2]] = 1.0
    return np.linalg.eigvals(companion)

def polish_real_roots(coefficients, w, steps=3):
    """
    Return the real root estimates ``w`` improved by Newton steps, for a batch of quartics.

    A step is kept only where it decreases the absolute value of the polynomial.

    INPUT:

    - ``coefficients`` -- an array of shape ``(n, 5)``

    - ``w`` -- an array of shape ``(n, k)`` of real estimates, ``k`` per quartic

    EXAMPLES::

        >>> polish_real_roots([[2, 0, 0, 0, -1]], [[0.84]]).round(12).tolist()
        [[0.840896415254]]
    """
    a = np.asarray(coefficients, dtype=float)[:, :, None]
    w = np.array(w, dtype=float)

    def value(w):
        return (((a[:, 0] * w + a[:, 1]) * w + a[:, 2]) * w + a[:, 3]) * w + a[:, 4]

    def slope(w):
        return ((4 * a[:, 0] * w + 3 * a[:, 1]) * w + 2 * a[:, 2]) * w + a[:, 3]

    p = value(w)
    for _ in range(steps):
        dp = slope(w)
        usable = dp != 0
        candidate = np.where(usable, w - p / np.where(usable, dp, 1.0), w)
        candidate_value = value(candidate)
        better = np.abs(candidate_value) < np.abs(p)
        w = np.where(better, candidate, w)
        p = np.where(better, candidate_value, p)
    return w
