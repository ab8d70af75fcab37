"""graftlab: Finsler geometry of SL(d,R)/SO(d), total positivity, and
grafting deformations of Fuchsian surface-group representations.

The package is organized around six layers:

- ``scaled``: overflow-safe matrix products and log-coordinate spectra;
- ``symspace``: the symmetric space, the irreducible SL(2,R) embedding,
  Cartan/Jordan projections, the polyhedral Finsler metric, Busemann
  vectors, flats and diamonds;
- ``polynorm``: symmetric polyhedral norms on R^n, diamonds and crowns,
  Euclidean projection, quasi-ruled certification, geodesic tracking;
- ``positivity``: total positivity tests, semigroup certificates,
  contraction coefficients, eigenvalue-gap growth;
- ``surface``: surface-group gluing, graph-of-groups bending,
  intersection numbers, admissible paths, grafting parameters;
- ``cli`` / ``experiments`` / ``ledger``: the executable surface with
  CSV emission and calibration-pinned regression constants.
"""

from .config import DEFAULTS, Tolerances
from .scaled import (ScaledMatrix, SpectralLog, WedgeProduct, eig_log_moduli,
                     exterior_power, psl_defect, psl_equal, scaled_inv,
                     scaled_mul, scaled_pow, svd_log)
from .symspace import (DiamondDistanceBound, FinslerFunctional, Flag,
                       FlatChart, SymPoint, act, basepoint, busemann_vector,
                       cartan_between, distance_to_diamond, finsler_distance,
                       finsler_norm, finsler_translation_length, flag_transverse,
                       flat_point, flat_through, h2_distance_from_identity,
                       hyperbolic_direction, point_of, sl2_generators, tau_embed)
from .polynorm import (DiamondDescription, PolyNorm, PolyPath, crown_contains,
                       diamond, hausdorff_distance, max_norm, norm_eval,
                       project_to_diamond, quasi_ruled_defect, track_geodesic,
                       weyl_norm)
from .positivity import (AdmissibleDefectReport, PositivityReport, Verdict,
                         admissible_increment_certificate, birkhoff_contraction,
                         eigen_gaps, quasi_ruled_defect_of_admissible,
                         subspace_angle, total_positivity)
from .surface import (AdmissiblePath, Edge, Flat, FuchsianData, GraftingDatum,
                      GraphOfGroups, Hyperbolic, admissible_evaluate, bend,
                      collar_size, cylinder_height, genus2_fuchsian,
                      normal_form, one_holed_torus, random_admissible)
from .ledger import RegressionLedger

__version__ = "0.1.0"
