from .pairing import (
    Srs,
    commit_poly,
    open_poly,
    trusted_setup,
    verify_kzg,
)
from .polynomial import P, DensePolynomial, interpolate, lagrange_basis

__all__ = [
    "P",
    "DensePolynomial",
    "Srs",
    "commit_poly",
    "interpolate",
    "lagrange_basis",
    "open_poly",
    "trusted_setup",
    "verify_kzg",
]
