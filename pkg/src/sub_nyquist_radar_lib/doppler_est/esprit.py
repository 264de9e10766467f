import concurrent.futures
import dataclasses
import pathlib

import numpy as np
import pandas as pd
import scipy.linalg

from sub_nyquist_radar_lib.numerics.linalg import svd, singular_values
from sub_nyquist_radar_lib.utils.constant import EIGENVALUE_FLOOR
from sub_nyquist_radar_lib.utils.exceptions import ContractViolation, EstimationFailure
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.unit import Seconds

logger = LoggerFactory.get_logger(__name__)


@dataclasses.dataclass(frozen=True)
class DopplerEstimate:
    dopplers: tuple[np.ndarray, ...]  # Hz, one ascending array per delay class

    @property
    def K_per_class(self) -> list[int]:
        return [len(d) for d in self.dopplers]


def hankel_matrix(alpha_hat: np.ndarray) -> np.ndarray:
    """(L - P + 1) x P Hankel matrix, P = floor(L / 2) + 1."""
    L = len(alpha_hat)
    P = L // 2 + 1
    return scipy.linalg.hankel(alpha_hat[:L - P + 1], alpha_hat[L - P:])


def hankel_spectrum(alpha_hat) -> np.ndarray:
    return singular_values(hankel_matrix(np.asarray(alpha_hat, dtype=complex)))


def wrap_doppler(nu, T: Seconds):
    """Reduce to the principal band [-1/(2T), 1/(2T))."""
    return (np.mod(np.asarray(nu, dtype=float) * T + 0.5, 1) - 0.5) / T


def _rotation_ls(W: np.ndarray) -> np.ndarray:
    return scipy.linalg.lstsq(W[:-1], W[1:])[0]


def _rotation_tls(W: np.ndarray) -> np.ndarray:
    K = W.shape[1]
    V = svd(np.hstack([W[:-1], W[1:]])).V
    return -V[:K, K:] @ scipy.linalg.inv(V[K:, K:])


def esprit(alpha_hat,
           K: int,
           T: Seconds,
           tls: bool = False,
           ) -> np.ndarray:
    """Doppler shifts (Hz, ascending) of the K tones in one coefficient sequence."""
    alpha_hat = np.asarray(alpha_hat, dtype=complex)
    L = len(alpha_hat)
    if L < 2 * K:
        raise ContractViolation(f"ESPRIT needs L >= 2K, got L={L}, K={K}.")
    if K == 0:
        return np.zeros(0)

    # right singular vectors span the shift-invariant P-dimensional subspace
    W = svd(hankel_matrix(alpha_hat)).Vh[:K].T
    try:
        Phi = _rotation_tls(W) if tls else _rotation_ls(W)
        z = scipy.linalg.eigvals(Phi)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EstimationFailure(f"ESPRIT rotation could not be solved: {e}")
    if not np.all(np.isfinite(z)) or np.any(z == 0):
        raise EstimationFailure("ESPRIT rotation is defective.", diagnostics={"eigenvalues": z})

    # eigenvalues off the unit circle keep their angle
    return np.sort(wrap_doppler(np.angle(z) / (2 * np.pi * T), T))


def model_order(values,
                n_samples: int,
                criterion: str = "mdl",
                ) -> tuple[int, np.ndarray]:
    """Information-criterion order estimate over candidates 0..p-1 from descending eigenvalues."""
    values = np.asarray(values, dtype=float)
    if np.any(values < 0) or np.any(np.diff(values) > 0):
        raise ContractViolation("Values must be non-negative and descending.")
    if criterion not in ("mdl", "aic"):
        raise ContractViolation(f"Unknown criterion {criterion!r}.")

    p = values.size
    if p == 0:
        return 0, np.zeros(0)
    values = np.maximum(values, max(EIGENVALUE_FLOOR * values[0], np.finfo(float).tiny))
    curve = np.zeros(p)
    for k in range(p):
        tail = values[k:]
        log_ratio = np.mean(np.log(tail)) - np.log(np.mean(tail))  # log(geometric / arithmetic)
        likelihood = -n_samples * (p - k) * log_ratio
        free = k * (2 * p - k)
        if criterion == "mdl":
            curve[k] = likelihood + 0.5 * free * np.log(n_samples)
        else:
            curve[k] = 2 * likelihood + 2 * free
    return int(np.argmin(curve)), curve


def estimate_order(alpha_hat: np.ndarray, criterion: str = "mdl") -> int:
    H = hankel_matrix(np.asarray(alpha_hat, dtype=complex))
    K, _ = model_order(singular_values(H) ** 2, H.shape[0], criterion)
    return min(K, len(alpha_hat) // 2)


def estimate_dopplers(Theta_hat: np.ndarray,
                      K_per_class: list[int],
                      T: Seconds,
                      tls: bool = False,
                      workers: int = 1,
                      ) -> DopplerEstimate:
    """ESPRIT on each row of Theta_hat; rows are independent."""
    if len(K_per_class) != Theta_hat.shape[0]:
        raise ContractViolation(f"{len(K_per_class)} class orders for {Theta_hat.shape[0]} rows.")
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            dopplers = list(executor.map(lambda row, K: esprit(row, K, T, tls), Theta_hat, K_per_class))
    else:
        dopplers = [esprit(row, K, T, tls) for row, K in zip(Theta_hat, K_per_class)]
    return DopplerEstimate(tuple(dopplers))


def export_hankel_spectra(Theta_hat: np.ndarray, directory: str | pathlib.Path) -> pathlib.Path:
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = [{"class": i, "index": k, "singular_value": s}
            for i, row in enumerate(Theta_hat)
            for k, s in enumerate(hankel_spectrum(row))]
    path = directory / "hankel_spectra.csv"
    pd.DataFrame(rows, columns=["class", "index", "singular_value"]).to_csv(
        path, index=False, float_format="%.12g", lineterminator="\n")
    logger.info(f"Wrote {path}")
    return path
