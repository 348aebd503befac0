r"""
Plain text matrix and phase portrait files
"""
import numpy as np

from branchhull.experiment.phase_portrait import PhaseCell

PHASE_PORTRAIT_HEADER = 'N,K,L,S1,S2,trials,successes,success_rate'

def write_matrix(filename, A):
    """
    Write the matrix ``A`` to the file ``filename``.

    The first line is ``rows,cols``, followed by one line of comma-separated values per row,
    with 17 significant digits so that every double is reproduced exactly. A vector is written as
    a single column.

    EXAMPLES::

        >>> import os, tempfile
        >>> filename = os.path.join(tempfile.mkdtemp(), 'A.csv')
        >>> write_matrix(filename, [[1.0, 0.1], [-2.5, 1e-20]])
        >>> print(open(filename).read(), end='')
        2,2
        1,0.10000000000000001
        -2.5,9.9999999999999995e-21
        >>> read_matrix(filename).tolist()
        [[1.0, 0.1], [-2.5, 1e-20]]
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ValueError('only matrices and vectors can be written')
    with open(filename, 'w') as f:
        f.write('{},{}\n'.format(*A.shape))
        for row in A:
            f.write(','.join('{:.17g}'.format(a) for a in row) + '\n')

def read_matrix(filename):
    """
    Return the matrix stored in the file ``filename``.

    EXAMPLES::

        >>> import os, tempfile
        >>> filename = os.path.join(tempfile.mkdtemp(), 'bad.csv')
        >>> _ = open(filename, 'w').write('2,2\\n1,2\\n3\\n')
        >>> read_matrix(filename)
        Traceback (most recent call last):
        ...
        ValueError: line 3 of the matrix file has 1 entries, expected 2

    TESTS::

        >>> rng = np.random.default_rng(0)
        >>> A = rng.standard_normal((7, 3)) * 10.0**rng.integers(-300, 300, size=(7, 3))
        >>> write_matrix(filename, A)
        >>> bool(np.array_equal(read_matrix(filename), A))
        True
    """
    with open(filename) as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        raise ValueError('the matrix file is empty')
    try:
        rows, cols = (int(n) for n in lines[0].split(','))
    except ValueError as e:
        raise ValueError("the first line of a matrix file must be 'rows,cols'") from e
    if len(lines) - 1 != rows:
        raise ValueError('the matrix file has {} rows, expected {}'.format(len(lines) - 1, rows))
    A = np.zeros((rows, cols))
    for i, line in enumerate(lines[1:]):
        entries = line.split(',')
        if len(entries) != cols:
            raise ValueError('line {} of the matrix file has {} entries, expected {}'.format(i + 2, len(entries), cols))
        try:
            A[i] = [float(a) for a in entries]
        except ValueError as e:
            raise ValueError('line {} of the matrix file has a malformed number'.format(i + 2)) from e
    if not np.all(np.isfinite(A)):
        raise ValueError('the matrix file has non-finite entries')
    return A

def read_vector(filename):
    """
    Return the vector stored in the file ``filename`` as a single row or column.
    """
    A = read_matrix(filename)
    if 1 not in A.shape:
        raise ValueError('the file {} holds a {} x {} matrix, not a vector'.format(filename, *A.shape))
    return A.reshape(-1)

def write_phase_portrait(filename, cells, C=0.25):
    """
    Write the phase portrait ``cells`` to the file ``filename``, with the constant ``C`` of the theory line.

    EXAMPLES::

        >>> import os, tempfile
        >>> filename = os.path.join(tempfile.mkdtemp(), 'phase.csv')
        >>> write_phase_portrait(filename, [PhaseCell(20, 20, 8, 1, 1, 10, 7, 0), PhaseCell(20, 20, 4, 1, 1, 0, 0, 0)])
        >>> print(open(filename).read(), end='')
        N,K,L,S1,S2,trials,successes,success_rate
        20,20,8,1,1,10,7,0.7
        20,20,4,1,1,0,0,0
        # line: C=0.25
        >>> cells, C = read_phase_portrait(filename)
        >>> cells[0].successes, cells[1].trials, C
        (7, 0, 0.25)
    """
    with open(filename, 'w') as f:
        f.write(PHASE_PORTRAIT_HEADER + '\n')
        for c in cells:
            f.write('{},{},{},{},{},{},{},{:g}\n'.format(c.N, c.K, c.L, c.S1, c.S2, c.trials, c.successes, c.success_rate()))
        f.write('# line: C={:g}\n'.format(C))

def read_phase_portrait(filename, seed_base=0):
    """
    Return the cells and the theory line constant stored in the phase portrait file ``filename``.

    The file does not record seeds; the cells get ``seed_base``.
    """
    cells = []
    C = None
    with open(filename) as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines or lines[0] != PHASE_PORTRAIT_HEADER:
        raise ValueError('a phase portrait file starts with the header {}'.format(PHASE_PORTRAIT_HEADER))
    for line in lines[1:]:
        if line.startswith('# line: C='):
            C = float(line[len('# line: C='):])
            continue
        fields = line.split(',')
        if len(fields) != 8:
            raise ValueError('malformed phase portrait row: {}'.format(line))
        N, K, L, S1, S2, trials, successes = (int(a) for a in fields[:7])
        cells.append(PhaseCell(N, K, L, S1, S2, trials, successes, seed_base))
    return cells, C
