"""Gauss, Jacobi and Kloosterman sums over finite fields, and the
equidistribution of normalized multivariate Jacobi sums on the unit circle."""

from .characters import (CharSubset, full_subset, random_subset, random_tail,
                         enumerate_a_circle, count_a_circle)
from .charsums import (GaussTable, JacobiValue, KloostermanTable, gauss_all, gauss_direct,
                       jacobi_direct, jacobi_via_gauss, kloosterman_all, kloosterman_direct,
                       moment, moments, s_sum)
from .equidist import (AngleSet, BoundReport, DiscrepancyReport, angles_from_subsets,
                       discrepancy_exact, erdos_turan_rhs)
from .field import FieldSpec, build_field

__all__ = [
    "CharSubset", "full_subset", "random_subset", "random_tail", "enumerate_a_circle",
    "count_a_circle", "GaussTable", "JacobiValue", "KloostermanTable", "gauss_all",
    "gauss_direct", "jacobi_direct", "jacobi_via_gauss", "kloosterman_all",
    "kloosterman_direct", "moment", "moments", "s_sum", "AngleSet", "BoundReport",
    "DiscrepancyReport", "angles_from_subsets", "discrepancy_exact", "erdos_turan_rhs",
    "FieldSpec", "build_field",
]

__version__ = "0.1.0"
