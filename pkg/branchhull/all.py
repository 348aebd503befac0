from .solver.all import *
from .experiment.all import *
from .util.matrix_file import read_matrix, read_vector, write_matrix, read_phase_portrait, write_phase_portrait
from .util.pgm_file import read_pgm, write_pgm
