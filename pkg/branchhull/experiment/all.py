from .dictionary import Dictionary, GaussianDictionary, IdentityDictionary, PartialDCTDictionary, BesselDictionary, MatrixDictionary
from .dictionary import TVStructure, make_tv_structure, make_gaussian, make_partial_dct, make_bessel, bessel_orders, dct_matrix, frobenius_normalize, lower_integer_part
from .phase_portrait import PhaseCell, make_instance, is_success, run_phase_grid, theory_line, lp_constraints_hold, sample_feasible_points, corrupt_signs, robust_recovery_error, recovery_error, sparsity_for, trial_seed
from .distortion_removal import GrayImage, FlattenResult, flatten_image, synthetic_distorted_image, relative_error_up_to_scale, rescale_to_gray
