import dataclasses

import numpy as np
import scipy.linalg

from sub_nyquist_radar_lib.utils.constant import HERMITIAN_TOLERANCE
from sub_nyquist_radar_lib.utils.exceptions import ContractViolation


@dataclasses.dataclass(frozen=True)
class EigResult:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # unitary, column k pairs with eigenvalues[k]


@dataclasses.dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    s: np.ndarray  # descending, non-negative
    Vh: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return self.Vh.conj().T


def herm_eig(A: np.ndarray) -> EigResult:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolation(f"Square matrix expected, got shape {A.shape}.")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.conj().T), initial=0.0) > HERMITIAN_TOLERANCE * scale:
        raise ContractViolation("Matrix is not Hermitian.")

    eigenvalues, eigenvectors = scipy.linalg.eigh(A)
    order = np.argsort(eigenvalues, kind="stable")[::-1]
    return EigResult(eigenvalues[order], eigenvectors[:, order])


def svd(A: np.ndarray, full_matrices: bool = False) -> SvdResult:
    U, s, Vh = scipy.linalg.svd(np.asarray(A), full_matrices=full_matrices, lapack_driver="gesvd")
    return SvdResult(U, s, Vh)


def singular_values(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(A)


def pinv(A: np.ndarray) -> np.ndarray:
    return scipy.linalg.pinv(np.asarray(A))


@dataclasses.dataclass(frozen=True)
class RankReport:
    min_singular_value: float
    max_singular_value: float
    full_rank: bool
    threshold: float  # relative to max_singular_value
    diagnostic: str = ""
    trials: int | None = None
    success_rate: float | None = None

    @property
    def margin(self) -> float:
        """sigma_min / (threshold * sigma_max); above 1 means full rank."""
        floor = self.threshold * self.max_singular_value
        if floor == 0:
            return 0.0 if self.min_singular_value == 0 else np.inf
        return self.min_singular_value / floor


def rank_report(A: np.ndarray, threshold: float, expected_rank: int | None = None) -> RankReport:
    """Full-rank verdict: sigma_min > threshold * sigma_max over the first `expected_rank` values."""
    A = np.asarray(A)
    expected_rank = min(A.shape) if expected_rank is None else expected_rank
    s = singular_values(A)
    if expected_rank == 0:
        return RankReport(0.0, 0.0, True, threshold, "empty")
    if s.size < expected_rank:
        return RankReport(0.0, float(s[0]) if s.size else 0.0, False, threshold,
                          f"at most {s.size} singular values for rank {expected_rank}")
    sigma_max = float(s[0])
    sigma_min = float(s[expected_rank - 1])
    full_rank = sigma_max > 0 and sigma_min > threshold * sigma_max
    diagnostic = "" if full_rank else f"sigma_min={sigma_min:.3e} below {threshold:.1e}*sigma_max"
    return RankReport(sigma_min, sigma_max, full_rank, threshold, diagnostic)
