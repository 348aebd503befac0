import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.special
import pytest

import branchhull.all

# Doctests are written against the NumPy < 2 scalar repr.
if np.lib.NumpyVersion(np.__version__) >= '2.0.0':
    np.set_printoptions(legacy='1.25')

@pytest.fixture(autouse=True)
def add_namespace(doctest_namespace):
    doctest_namespace['np'] = np
    doctest_namespace['scipy'] = scipy
    for name in dir(branchhull.all):
        if not name.startswith('_'):
            doctest_namespace[name] = getattr(branchhull.all, name)
