"""Exact q-expansions, Eisenstein series and zeta products for prime detection."""

from qmprime.algebra import (
    CycValue,
    DirichletCharacter,
    enumerate_characters,
    kronecker_character,
)
from qmprime.detector import (
    DetectionReport,
    Progression,
    progression_intersection,
    scan_detection,
    sign_changes,
    v_set,
)
from qmprime.eisenstein import (
    EisensteinSpec,
    HSpec,
    PrimeCoefficientPolynomial,
    eisenstein_qexp,
    finite_prime_check,
    h_qexp,
    l_value,
    prime_coefficient_polynomial,
    spanning_set,
)
from qmprime.macmahon import MacMahonTable, macmahon_table, verify_prime_identity
from qmprime.qseries import QSeries, delta_series
from qmprime.wexpr import WExpression, certify_prime_detection, decompose, quadruple_expression

__version__ = "0.1.0"

__all__ = [
    "CycValue",
    "DetectionReport",
    "DirichletCharacter",
    "EisensteinSpec",
    "HSpec",
    "MacMahonTable",
    "PrimeCoefficientPolynomial",
    "Progression",
    "QSeries",
    "WExpression",
    "certify_prime_detection",
    "decompose",
    "delta_series",
    "eisenstein_qexp",
    "enumerate_characters",
    "finite_prime_check",
    "h_qexp",
    "kronecker_character",
    "l_value",
    "macmahon_table",
    "prime_coefficient_polynomial",
    "progression_intersection",
    "quadruple_expression",
    "scan_detection",
    "sign_changes",
    "spanning_set",
    "v_set",
    "verify_prime_identity",
]
