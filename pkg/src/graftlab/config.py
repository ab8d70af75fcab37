"""Default numerical tolerances, collected in one place.

Every tolerance used by the library is a parameter of the operation that
consumes it; the values below are only the defaults.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # unit-determinant contract for scaled matrices (relative)
    det_rel: float = 1e-8
    # recentering shift allowed for spectra of unit-determinant inputs
    recenter: float = 1e-8
    # slack when checking that a vector is sorted in descending order
    descending: float = 1e-10
    # |sum of entries| allowed for trace-free vectors
    sum_zero: float = 1e-8
    # entrywise comparison after projective scale alignment
    psl_equal: float = 1e-8
    # minor positivity threshold, relative to the largest minor of its order
    minor_rel: float = 1e-10
    # active-set detection for polyhedral norms (relative)
    active_rel: float = 1e-9
    # flat-chart evaluation consistency
    chart: float = 1e-7
    # certified-geodesic length defect
    geodesic_cert: float = 1e-7
    # minimal eigenvalue gap for an element to count as loxodromic
    loxodromy_gap: float = 1e-6
    # symmetry defect allowed for positive-definite points
    spd_sym: float = 1e-10


DEFAULTS = Tolerances()
