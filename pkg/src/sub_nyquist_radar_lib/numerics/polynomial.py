import numpy as np
import numpy.polynomial.polynomial as poly
import scipy.linalg

from sub_nyquist_radar_lib.utils.exceptions import DomainError


def poly_roots(coeffs) -> np.ndarray:
    """Roots of sum_k coeffs[k] z**k (ascending order) as companion-matrix eigenvalues."""
    coeffs = np.asarray(coeffs, dtype=complex)
    nonzero = np.flatnonzero(coeffs)
    if nonzero.size == 0:
        raise DomainError("The zero polynomial has no well-defined roots.")

    # trim so the leading coefficient is nonzero
    coeffs = coeffs[:nonzero[-1] + 1]
    if coeffs.size == 1:
        return np.zeros(0, dtype=complex)

    # reversed companion as in numpy.polynomial, eigenvalues via LAPACK (balanced)
    companion = poly.polycompanion(coeffs)[::-1, ::-1]
    return scipy.linalg.eigvals(companion)


def poly_from_roots(roots) -> np.ndarray:
    return poly.polyfromroots(np.asarray(roots, dtype=complex))


def poly_eval(coeffs, z) -> np.ndarray:
    return poly.polyval(z, np.asarray(coeffs, dtype=complex))
