r"""
Grayscale images in the PGM format

The reader accepts the ASCII (``P2``) and binary (``P5``) variants with comments in the header;
the writer emits binary ``P5`` with maximum value 255.
"""
import numpy as np

from branchhull.experiment.distortion_removal import GrayImage

WHITESPACE = b' \t\n\r\v\f'

def _header_tokens(data, count):
    """
    Return the first ``count`` header tokens of ``data`` and the offset just past the last one.

    Comments run from ``#`` to the end of the line.
    """
    tokens = []
    i = 0
    while len(tokens) < count:
        while i < len(data) and (data[i] in WHITESPACE or data[i] == ord('#')):
            if data[i] == ord('#'):
                while i < len(data) and data[i] not in b'\r\n':
                    i += 1
            else:
                i += 1
        start = i
        while i < len(data) and data[i] not in WHITESPACE and data[i] != ord('#'):
            i += 1
        if start == i:
            raise ValueError('truncated PGM header')
        tokens.append(data[start:i])
    return tokens, i

def read_pgm(filename):
    """
    Return the :class:`~branchhull.experiment.distortion_removal.GrayImage` stored in the PGM file ``filename``.

    EXAMPLES::

        >>> import os, tempfile
        >>> filename = os.path.join(tempfile.mkdtemp(), 'ascii.pgm')
        >>> _ = open(filename, 'w').write('P2\\n# two rows\\n3 2\\n255\\n0 10 20\\n30 40 255\\n')
        >>> image = read_pgm(filename); image
        Grayscale image with 2 rows and 3 columns
        >>> image.array().tolist()
        [[0.0, 10.0, 20.0], [30.0, 40.0, 255.0]]
        >>> _ = open(filename, 'w').write('P6\\n1 1\\n255\\n')
        >>> read_pgm(filename)
        Traceback (most recent call last):
        ...
        ValueError: not a PGM file (magic number P6)
    """
    with open(filename, 'rb') as f:
        data = f.read()
    (magic, width, height, maxval), offset = _header_tokens(data, 4)
    if magic not in (b'P2', b'P5'):
        raise ValueError('not a PGM file (magic number {})'.format(magic.decode('ascii', 'replace')))
    try:
        q, p, maxval = int(width), int(height), int(maxval)
    except ValueError as e:
        raise ValueError('malformed PGM header') from e
    if p < 1 or q < 1 or not 0 < maxval < 65536:
        raise ValueError('invalid PGM dimensions or maximum value')
    if magic == b'P5':
        dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
        # a single whitespace byte separates the header from the raster
        raster = data[offset + 1:offset + 1 + p * q * dtype.itemsize]
        if len(raster) != p * q * dtype.itemsize:
            raise ValueError('truncated PGM raster')
        pixels = np.frombuffer(raster, dtype=dtype)
    else:
        text = b'\n'.join(line.split(b'#')[0] for line in data[offset:].splitlines())
        try:
            pixels = np.array([int(a) for a in text.split()[:p * q]])
        except ValueError as e:
            raise ValueError('malformed PGM raster') from e
        if len(pixels) != p * q:
            raise ValueError('truncated PGM raster')
    if np.any(pixels > maxval):
        raise ValueError('PGM pixel value above the maximum value {}'.format(maxval))
    return GrayImage(pixels.reshape(p, q).astype(float))

def write_pgm(filename, image):
    """
    Write ``image`` to the file ``filename`` as a binary PGM, rounding pixels to integers in ``[0, 255]``.

    EXAMPLES::

        >>> import os, tempfile
        >>> filename = os.path.join(tempfile.mkdtemp(), 'binary.pgm')
        >>> image = GrayImage([[0, 128, 255], [7, 300, -4]])
        >>> write_pgm(filename, image)
        >>> open(filename, 'rb').read()[:11]
        b'P5\\n3 2\\n255\\n'
        >>> read_pgm(filename).array().tolist()
        [[0.0, 128.0, 255.0], [7.0, 255.0, 0.0]]

    TESTS::

        >>> pixels = np.random.default_rng(1).integers(0, 256, size=(9, 13))
        >>> write_pgm(filename, GrayImage(pixels))
        >>> read_pgm(filename) == GrayImage(pixels)
        True
    """
    p, q = image.shape()
    pixels = np.clip(np.rint(image.array()), 0, 255).astype(np.uint8)
    with open(filename, 'wb') as f:
        f.write('P5\n{} {}\n255\n'.format(q, p).encode('ascii'))
        f.write(pixels.tobytes())
