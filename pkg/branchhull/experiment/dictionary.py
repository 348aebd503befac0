r"""
Dictionaries and total variation structure
"""
from abc import ABC, abstractmethod
import numpy as np
import scipy.fft
import scipy.sparse
import scipy.sparse.linalg
import scipy.special

def frobenius_normalize(A, L=None):
    r"""
    Return ``A`` rescaled to Frobenius norm `\sqrt{L}`, where `L` defaults to the number of rows.

    EXAMPLES::

        >>> A = frobenius_normalize(np.arange(6.0).reshape(3, 2))
        >>> round(float(np.linalg.norm(A)), 12)
        1.732050807569
    """
    L = A.shape[0] if L is None else L
    norm = scipy.sparse.linalg.norm(A) if scipy.sparse.issparse(A) else np.linalg.norm(A)
    if norm == 0:
        raise ValueError('cannot normalize the zero matrix')
    return A * (np.sqrt(L) / norm)

def make_gaussian(L, n, scale=None, seed=0):
    r"""
    Return an `L \times n` matrix of independent normal entries times ``scale`` (default `1/\sqrt{L}`).

    EXAMPLES::

        >>> bool(np.array_equal(make_gaussian(5, 3, seed=2), make_gaussian(5, 3, seed=2)))
        True
        >>> bool(np.array_equal(make_gaussian(5, 3, seed=2), make_gaussian(5, 3, seed=3)))
        False

    TESTS::

        >>> abs(float(make_gaussian(1000, 1000, scale=1.0, seed=10).mean())) < 0.005
        True
        >>> abs(float(make_gaussian(100, 10000, seed=11).var()) - 0.01) < 0.0005
        True
    """
    if L < 1 or n < 1:
        raise ValueError('L and n must be positive')
    if scale is None:
        scale = 1 / np.sqrt(L)
    rng = np.random.default_rng(seed)
    return scale * rng.standard_normal((L, n))

def dct_matrix(L):
    r"""
    Return the `L \times L` orthonormal inverse DCT matrix, whose columns are the DCT basis vectors.

    EXAMPLES::

        >>> dct_matrix(4)[:, 0].tolist()
        [0.5, 0.5, 0.5, 0.5]
        >>> F = dct_matrix(9)
        >>> float(np.abs(F.T @ F - np.eye(9)).max()) < 1e-12
        True
    """
    return scipy.fft.idct(np.eye(L), norm='ortho', axis=0)

def make_partial_dct(L, n_cols, seed=0, include_ones_column=True, normalize=True):
    r"""
    Return an `L \times n` dictionary of randomly selected DCT basis vectors.

    INPUT:

    - ``L`` -- a positive integer, the signal length

    - ``n_cols`` -- a positive integer at most ``L``

    - ``seed`` -- (default: ``0``) the random seed

    - ``include_ones_column`` -- (default: ``True``) make the first column constant one, and draw the
      others from the non-constant basis vectors

    - ``normalize`` -- (default: ``True``) rescale to Frobenius norm `\sqrt{L}`

    EXAMPLES::

        >>> C = make_partial_dct(32, 6, seed=1, normalize=False)
        >>> C[:, 0].tolist() == [1.0] * 32
        True
        >>> G = C[:, 1:].T @ C[:, 1:]
        >>> float(np.abs(G - np.eye(5)).max()) < 1e-10
        True
        >>> round(float(np.linalg.norm(make_partial_dct(32, 6, seed=1))**2), 10)
        32.0
        >>> make_partial_dct(4, 5)
        Traceback (most recent call last):
        ...
        ValueError: n_cols must be at most L = 4
    """
    if n_cols < 1:
        raise ValueError('n_cols must be positive')
    if n_cols > L:
        raise ValueError('n_cols must be at most L = {}'.format(L))
    rng = np.random.default_rng(seed)
    F = dct_matrix(L)
    if include_ones_column:
        selected = 1 + rng.choice(L - 1, size=n_cols - 1, replace=False)
        C = np.column_stack([np.ones(L), F[:, selected]])
    else:
        C = F[:, rng.choice(L, size=n_cols, replace=False)]
    return frobenius_normalize(C) if normalize else C

def bessel_orders(L):
    r"""
    Return the grid `g_i = -9 + 14 (i - 1) / (L - 1)` for `i = 1, \ldots, L`.

    EXAMPLES::

        >>> bessel_orders(3).tolist()
        [-9.0, -2.0, 5.0]
    """
    if L < 2:
        raise ValueError('L must be at least 2')
    return -9 + 14 * np.arange(L) / (L - 1)

def make_bessel(L, n_cols, seed=0, include_ones_column=True, normalize=True):
    r"""
    Return an `L \times n` dictionary of smooth columns sampled from Bessel functions of the first kind.

    Each column draws `z \sim N(0, I_3)` and has entries
    `J_{g_i / (6 + 0.1 |z_1|) + 5 |z_2|}(0.1 + 10 |z_3|)` with `g` as in :func:`bessel_orders`.

    EXAMPLES::

        >>> C = make_bessel(50, 4, seed=3)
        >>> C.shape, C[:, 0].tolist() == [C[0, 0]] * 50
        ((50, 4), True)
        >>> round(float(np.linalg.norm(C)**2), 10)
        50.0

    TESTS:

    Values of the Bessel functions used here::

        >>> float(scipy.special.jv(0, 0))
        1.0
        >>> round(float(scipy.special.jv(0.5, np.pi / 2)), 5)
        0.63662
        >>> rng = np.random.default_rng(0)
        >>> worst = 0.0
        >>> for trial in range(200):
        ...     z = rng.standard_normal(3)
        ...     nu = bessel_orders(40) / (6 + 0.1 * abs(z[0])) + 5 * abs(z[1])
        ...     x = 0.1 + 10 * abs(z[2])
        ...     lhs = scipy.special.jv(nu - 1, x) + scipy.special.jv(nu + 1, x)
        ...     rhs = 2 * nu / x * scipy.special.jv(nu, x)
        ...     worst = max(worst, float(np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs)))))
        >>> worst < 1e-8
        True
    """
    if n_cols < 1:
        raise ValueError('n_cols must be positive')
    rng = np.random.default_rng(seed)
    g = bessel_orders(L)
    columns = [np.ones(L)] if include_ones_column else []
    while len(columns) < n_cols:
        z = np.abs(rng.standard_normal(3))
        columns.append(scipy.special.jv(g / (6 + 0.1 * z[0]) + 5 * z[1], 0.1 + 10 * z[2]))
    C = np.column_stack(columns)
    if not np.all(np.isfinite(C)):
        raise ArithmeticError('Bessel dictionary has non-finite entries')
    return frobenius_normalize(C) if normalize else C

class Dictionary(ABC):
    r"""
    Recipe for an `L \times n` dictionary matrix.
    """
    def __init__(self, normalize=False):
        r"""
        Initialize this dictionary.

        INPUT:

        - ``normalize`` -- (default: ``False``) rescale the matrix to Frobenius norm `\sqrt{L}`
        """
        self._normalize = normalize

    @abstractmethod
    def _build(self, L):
        """
        Return the matrix of this dictionary for signals of length ``L``, before normalization.
        """
        pass

    @abstractmethod
    def __repr__(self):
        pass

    def normalized(self):
        r"""
        Return ``True`` if matrices of this dictionary have Frobenius norm `\sqrt{L}`.
        """
        return self._normalize

    def matrix(self, L):
        """
        Return the matrix of this dictionary for signals of length ``L``.

        EXAMPLES::

            >>> D = GaussianDictionary(3, seed=5, normalize=True)
            >>> D
            Gaussian dictionary with 3 columns (seed=5, Frobenius normalized)
            >>> round(float(np.linalg.norm(D.matrix(8))**2), 10)
            8.0
        """
        A = self._build(L)
        return frobenius_normalize(A, L) if self._normalize else A

class GaussianDictionary(Dictionary):
    """
    Dictionary with independent normal entries.
    """
    def __init__(self, n_cols, scale=None, seed=0, normalize=False):
        super().__init__(normalize)
        self._n_cols = n_cols
        self._scale = scale
        self._seed = seed

    def __repr__(self):
        return 'Gaussian dictionary with {} columns (seed={}{})'.format(self._n_cols, self._seed, ', Frobenius normalized' if self._normalize else '')

    def _build(self, L):
        return make_gaussian(L, self._n_cols, self._scale, self._seed)

class IdentityDictionary(Dictionary):
    """
    The identity, stored as a sparse matrix.

    EXAMPLES::

        >>> IdentityDictionary().matrix(3).toarray().tolist()
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    """
    def __repr__(self):
        return 'Identity dictionary'

    def _build(self, L):
        return scipy.sparse.identity(L, format='csr')

class PartialDCTDictionary(Dictionary):
    """
    Dictionary of randomly selected DCT basis vectors, see :func:`make_partial_dct`.
    """
    def __init__(self, n_cols, seed=0, include_ones_column=True, normalize=True):
        super().__init__(normalize)
        self._n_cols = n_cols
        self._seed = seed
        self._ones = include_ones_column

    def __repr__(self):
        return 'Partial DCT dictionary with {} columns (seed={})'.format(self._n_cols, self._seed)

    def _build(self, L):
        return make_partial_dct(L, self._n_cols, self._seed, self._ones, normalize=False)

class BesselDictionary(Dictionary):
    """
    Dictionary of sampled Bessel functions, see :func:`make_bessel`.
    """
    def __init__(self, n_cols, seed=0, include_ones_column=True, normalize=True):
        super().__init__(normalize)
        self._n_cols = n_cols
        self._seed = seed
        self._ones = include_ones_column

    def __repr__(self):
        return 'Bessel dictionary with {} columns (seed={})'.format(self._n_cols, self._seed)

    def _build(self, L):
        return make_bessel(L, self._n_cols, self._seed, self._ones, normalize=False)

class MatrixDictionary(Dictionary):
    """
    Dictionary given by an explicit matrix, e.g. read from a file.

    EXAMPLES::

        >>> MatrixDictionary([[1.0], [2.0]]).matrix(3)
        Traceback (most recent call last):
        ...
        ValueError: dictionary has 2 rows, not 3
    """
    def __init__(self, matrix, normalize=False):
        super().__init__(normalize)
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError('a dictionary must be a matrix')
        self._matrix = matrix

    def __repr__(self):
        return 'Dictionary given by a {} x {} matrix'.format(*self._matrix.shape)

    def _build(self, L):
        if self._matrix.shape[0] != L:
            raise ValueError('dictionary has {} rows, not {}'.format(self._matrix.shape[0], L))
        return self._matrix.copy()

def lower_integer_part(x):
    r"""
    Return the greatest integer `n` with `x - 1 < n \leq x`.

    EXAMPLES::

        >>> lower_integer_part(2.5), lower_integer_part(3), lower_integer_part(-0.5)
        (2, 3, -1)

    TESTS::

        >>> all(x - 1 < lower_integer_part(x) <= x for x in np.linspace(-5, 5, 1001))
        True
    """
    return int(np.floor(x))

class TVStructure:
    r"""
    Vertical and horizontal difference operators of a `p \times q` image vectorized column by column.

    Every row of `D_v` takes the difference of two vertically adjacent pixels in the same column,
    every row of `D_h` of two horizontally adjacent pixels in the same row.
    """
    def __init__(self, p, q):
        """
        Initialize the difference operators of a ``p`` by ``q`` image.

        EXAMPLES::

            >>> T = TVStructure(2, 2); T
            Total variation structure of a 2 x 2 image
            >>> T.D_v().toarray().tolist()
            [[-1.0, 1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 1.0]]
            >>> T.D_h().toarray().tolist()
            [[-1.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 1.0]]
            >>> TVStructure(1, 5)
            Traceback (most recent call last):
            ...
            ValueError: an image needs at least 2 rows and 2 columns
        """
        if p < 2 or q < 2:
            raise ValueError('an image needs at least 2 rows and 2 columns')
        self._p = p
        self._q = q
        L = p * q
        # 1-based: row i of D_v has -1 at j = i + (i - 1)/(p - 1) rounded down and +1 at j + 1
        i = np.arange(1, L - q + 1)
        j = i + np.array([lower_integer_part(k) for k in (i - 1) / (p - 1)])
        self._D_v = self._differences(j - 1, j, L)
        i = np.arange(1, L - p + 1)
        self._D_h = self._differences(i - 1, i - 1 + p, L)
        self._D = scipy.sparse.vstack([self._D_v, self._D_h], format='csr')

    @staticmethod
    def _differences(minus, plus, L):
        r"""
        Return the sparse matrix with rows `e_{\mathrm{plus}} - e_{\mathrm{minus}}` (0-based indices).
        """
        n = len(minus)
        rows = np.concatenate([np.arange(n), np.arange(n)])
        columns = np.concatenate([minus, plus])
        values = np.concatenate([-np.ones(n), np.ones(n)])
        return scipy.sparse.csr_matrix((values, (rows, columns)), shape=(n, L))

    def __repr__(self):
        """
        Return a string representation of this structure.
        """
        return 'Total variation structure of a {} x {} image'.format(self._p, self._q)

    def shape(self):
        """
        Return the image shape ``(p, q)``.
        """
        return (self._p, self._q)

    def D_v(self):
        """
        Return the vertical difference operator.

        EXAMPLES::

            >>> T = TVStructure(4, 3)
            >>> rows = np.tile(np.arange(1.0, 5.0), 3)
            >>> (T.D_v() @ rows).tolist() == [1.0] * 9
            True
        """
        return self._D_v

    def D_h(self):
        """
        Return the horizontal difference operator.
        """
        return self._D_h

    def D(self):
        """
        Return the stacked difference operator of shape ``(2L - p - q, L)``.

        EXAMPLES::

            >>> D = TVStructure(3, 5).D()
            >>> D.shape
            (22, 15)
            >>> bool(np.all(D @ np.full(15, 7.0) == 0))
            True
            >>> A = D.toarray()
            >>> bool(np.all((A == -1).sum(axis=1) == 1) and np.all((A == 1).sum(axis=1) == 1) and np.all(A.sum(axis=1) == 0))
            True
        """
        return self._D

    def total_variation(self, pixels):
        r"""
        Return the anisotropic total variation `\|D x\|_1` of the column-major pixel vector ``pixels``.

        EXAMPLES::

            >>> TVStructure(2, 2).total_variation([0.0, 1.0, 0.0, 1.0])
            2.0
        """
        return float(np.abs(self._D @ np.asarray(pixels, dtype=float)).sum())

def make_tv_structure(p, q):
    """
    Return the :class:`TVStructure` of a ``p`` by ``q`` image.
    """
    return TVStructure(p, q)
