r"""
Removal of smooth multiplicative distortions from grayscale images

An image `y` is modeled as the entrywise product of a piecewise constant image `h` (so `B = I`)
and a smooth distortion `C m`. The total variation program with known signs `t = 1` recovers
`h` up to scale; the output is rescaled to the gray levels `[0, 255]`.
"""
import logging
from typing import NamedTuple
import numpy as np
import scipy.sparse

from branchhull.solver.problem import ProblemInstance, SolverConfig, Solution
from branchhull.solver.admm import solve
from .dictionary import PartialDCTDictionary, TVStructure, frobenius_normalize

logger = logging.getLogger(__name__)

# relative spread of the recovered image below which the output is a constant image
FLAT_THRESHOLD = 1e-6

class GrayImage:
    """
    Grayscale image with ``p`` rows and ``q`` columns, vectorized column by column.
    """
    def __init__(self, pixels):
        """
        Initialize this image from a ``p`` by ``q`` array of finite pixel values.

        EXAMPLES::

            >>> img = GrayImage([[1, 2, 3], [4, 5, 6]]); img
            Grayscale image with 2 rows and 3 columns
            >>> img.vector().tolist()
            [1.0, 4.0, 2.0, 5.0, 3.0, 6.0]
            >>> GrayImage([[1.0, float('inf')]])
            Traceback (most recent call last):
            ...
            ValueError: pixels must be finite
        """
        pixels = np.array(pixels, dtype=float)
        if pixels.ndim != 2 or pixels.size == 0:
            raise ValueError('an image must be a nonempty two-dimensional array')
        if not np.all(np.isfinite(pixels)):
            raise ValueError('pixels must be finite')
        pixels.flags.writeable = False
        self._pixels = pixels

    @classmethod
    def from_vector(cls, vector, p, q):
        """
        Return the ``p`` by ``q`` image with the column-major pixel vector ``vector``.

        EXAMPLES::

            >>> GrayImage.from_vector([1, 4, 2, 5, 3, 6], 2, 3).array().tolist()
            [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]
        """
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (p * q,):
            raise ValueError('an image with {} rows and {} columns has {} pixels, not {}'.format(p, q, p * q, vector.size))
        return cls(vector.reshape((p, q), order='F'))

    def __repr__(self):
        """
        Return a string representation of this image.
        """
        return 'Grayscale image with {} rows and {} columns'.format(*self._pixels.shape)

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self._pixels, other._pixels)

    def shape(self):
        """
        Return the tuple ``(p, q)``.
        """
        return self._pixels.shape

    def array(self):
        """
        Return the pixels as a ``p`` by ``q`` array.
        """
        return self._pixels

    def vector(self):
        """
        Return the column-major pixel vector.
        """
        return self._pixels.reshape(-1, order='F')

def rescale_to_gray(w):
    """
    Return ``w`` mapped affinely onto ``[0, 255]`` (minimum to 0, maximum to 255).

    A vector whose spread is negligible relative to its magnitude maps to the constant 255.

    EXAMPLES::

        >>> rescale_to_gray(np.array([2.0, 4.0, 3.0])).tolist()
        [0.0, 255.0, 127.5]
        >>> rescale_to_gray(np.array([5.0, 5.0])).tolist()
        [255.0, 255.0]
    """
    lo, hi = float(w.min()), float(w.max())
    if hi - lo <= FLAT_THRESHOLD * max(abs(lo), abs(hi)):
        return np.full(len(w), 255.0)
    return 255 * (w - lo) / (hi - lo)

class FlattenResult(NamedTuple):
    """
    Output of :func:`flatten_image`.
    """
    recovered: GrayImage
    m_hat: np.ndarray
    xi_hat: np.ndarray
    solution: Solution

def flatten_image(image, dictionary, lam=1e3, rho=1e-4, max_iters=2000, tol=1e-6, verbose=False):
    r"""
    Return the piecewise constant factor of ``image``, with the distortion coefficients and slack.

    INPUT:

    - ``image`` -- a :class:`GrayImage` with at least two rows and two columns

    - ``dictionary`` -- a :class:`~branchhull.experiment.dictionary.Dictionary` for the distortion,
      rescaled to Frobenius norm `\sqrt{L}`

    - ``lam`` -- (default: ``1e3``) the slack penalty

    - ``rho`` -- (default: ``1e-4``) the ADMM step

    - ``max_iters``, ``tol`` -- (default: ``2000``, ``1e-6``) the solver budget and residual tolerances

    - ``verbose`` -- (default: ``False``) if ``True``, log progress at level INFO

    OUTPUT:

    A :class:`FlattenResult`; the recovered image is `\hat h` rescaled to ``[0, 255]``.

    EXAMPLES:

    A constant image stays constant::

        >>> result = flatten_image(GrayImage(np.full((6, 5), 100.0)), PartialDCTDictionary(3, seed=1), max_iters=100)
        >>> result.recovered
        Grayscale image with 6 rows and 5 columns
        >>> sorted(set(result.recovered.vector().tolist()))
        [255.0]

    A distorted piecewise constant image::

        >>> image, foreground, distortion, dictionary = synthetic_distorted_image(10, 10, 3, seed=2)
        >>> result = flatten_image(image, dictionary, max_iters=200)
        >>> pixels = result.recovered.vector()
        >>> float(pixels.min()), float(pixels.max()), result.m_hat.shape, result.xi_hat.shape
        (0.0, 255.0, (3,), (100,))

    TESTS:

    Multiplying the image by `c` and the step by `1 / \sqrt{c}` scales every iterate by
    `\sqrt{c}`, so the output image does not change::

        >>> first = flatten_image(image, dictionary, rho=1e-2, max_iters=200, tol=1e-300)
        >>> second = flatten_image(GrayImage(4 * image.array()), dictionary, rho=5e-3, max_iters=200, tol=1e-300)
        >>> first.solution.iters_used == second.solution.iters_used == 200
        True
        >>> float(np.abs(first.recovered.vector() - second.recovered.vector()).max()) < 1e-6
        True
        >>> relative_error_up_to_scale(second.solution.h_hat, first.solution.h_hat) < 1e-6
        True

    The recovered factor has less total variation than the distorted input::

        >>> image, foreground, distortion, dictionary = synthetic_distorted_image(16, 16, 3, seed=0)
        >>> result = flatten_image(image, dictionary, max_iters=200)
        >>> tv = TVStructure(16, 16)
        >>> tv.total_variation(result.solution.h_hat) <= tv.total_variation(image.vector())
        True
    """
    p, q = image.shape()
    L = p * q
    structure = TVStructure(p, q)
    B = scipy.sparse.identity(L, format='csr')
    C = frobenius_normalize(dictionary.matrix(L), L)
    if scipy.sparse.issparse(C):
        C = C.toarray()
    instance = ProblemInstance(B, C, image.vector(), np.ones(L))
    config = SolverConfig(mode='tv', lam=lam, rho=rho, max_iters=max_iters, tol_primal=tol, tol_dual=tol, structure=structure)
    solution = solve(instance, config, verbose=verbose)
    if not solution.converged:
        logger.warning('image solve did not converge in {} iterations (primal residual {:.3e}, dual residual {:.3e})'.format(
            solution.iters_used, solution.primal_residual, solution.dual_residual))
    recovered = GrayImage.from_vector(rescale_to_gray(B @ solution.h_hat), p, q)
    return FlattenResult(recovered, solution.m_hat, solution.xi_hat, solution)

def synthetic_distorted_image(p, q, n_cols=3, seed=0):
    r"""
    Return a piecewise constant image times a smooth positive DCT distortion.

    The foreground has the value 1, with a rectangle of value 2; the distortion `C m` has minimum 1.

    OUTPUT:

    A tuple ``(image, foreground, distortion, dictionary)`` where ``foreground`` and ``distortion``
    are column-major pixel vectors and ``dictionary`` generates the distortion.

    EXAMPLES::

        >>> image, foreground, distortion, dictionary = synthetic_distorted_image(16, 16, seed=0)
        >>> image, dictionary
        (Grayscale image with 16 rows and 16 columns, Partial DCT dictionary with 3 columns (seed=0))
        >>> sorted(set(foreground.tolist())), round(float(distortion.min()), 12)
        ([1.0, 2.0], 1.0)
        >>> bool(np.array_equal(image.vector(), foreground * distortion))
        True
    """
    rng = np.random.default_rng(seed)
    foreground = np.ones((p, q))
    foreground[p // 4:(3 * p) // 4, q // 3:(2 * q) // 3] = 2.0
    foreground = foreground.reshape(-1, order='F')
    dictionary = PartialDCTDictionary(n_cols, seed=seed)
    C = dictionary.matrix(p * q)
    coefficients = np.concatenate([[0.0], 0.5 * rng.standard_normal(n_cols - 1)])
    variation = C @ coefficients
    coefficients[0] = (1 - variation.min()) / C[0, 0]
    distortion = C @ coefficients
    return GrayImage.from_vector(foreground * distortion, p, q), foreground, distortion, dictionary

def relative_error_up_to_scale(estimate, target):
    r"""
    Return `\min_c \|c \cdot \mathrm{estimate} - \mathrm{target}\|_2 / \|\mathrm{target}\|_2`.

    EXAMPLES::

        >>> relative_error_up_to_scale([2.0, 4.0], [1.0, 2.0])
        0.0
        >>> relative_error_up_to_scale([1.0, 0.0], [0.0, 1.0])
        1.0
    """
    estimate = np.asarray(estimate, dtype=float)
    target = np.asarray(target, dtype=float)
    denominator = float(estimate @ estimate)
    c = float(estimate @ target) / denominator if denominator > 0 else 0.0
    return float(np.linalg.norm(c * estimate - target) / np.linalg.norm(target))
