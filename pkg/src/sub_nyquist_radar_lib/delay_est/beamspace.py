import dataclasses

import numpy as np

from sub_nyquist_radar_lib.aic.measurement_matrix import MeasurementMatrix
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.numerics.linalg import herm_eig, rank_report, RankReport
from sub_nyquist_radar_lib.utils.constant import RANK_THRESHOLD, WHITENING_MAX_CONDITION
from sub_nyquist_radar_lib.utils.exceptions import ContractViolation
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.unit import Seconds

logger = LoggerFactory.get_logger(__name__)


def steering(f: float, N: int) -> np.ndarray:
    """a[n] = exp(-j 2 pi n f), f = tau / T."""
    return np.exp(-2j * np.pi * np.arange(N) * f)


def steering_matrix(freqs, N: int) -> np.ndarray:
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    return np.exp(-2j * np.pi * np.outer(np.arange(N), freqs))


def centered_bins(N: int) -> np.ndarray:
    """DFT bin indices in FFT order, upper half read as negative frequencies."""
    return np.fft.fftfreq(N, d=1 / N)


def delay_ramp(freqs, N: int) -> np.ndarray:
    """Per-bin phase of a delay f = tau / T, N x K, on the centered bins."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    return np.exp(-2j * np.pi * np.outer(centered_bins(N), freqs))


def freq_to_delay(f, T: Seconds):
    return T * np.mod(np.asarray(f, dtype=float) + 1, 1)


def delay_to_freq(tau, T: Seconds):
    f = np.asarray(tau, dtype=float) / T
    return np.where(f < 0.5, f, f - 1)


def wrap_delay(tau, T: Seconds):
    """Reduce a delay difference to [-T/2, T/2), the delay axis being T-periodic."""
    return (np.mod(np.asarray(tau, dtype=float) / T + 0.5, 1) - 0.5) * T


@dataclasses.dataclass(frozen=True)
class BeamspaceModel:
    Bf: np.ndarray  # M x N, M F^-1 G with columns in bin order -N/2 .. N/2-1
    G_diag: np.ndarray  # DFT of the zero-padded pulse
    params: RadarParams

    @property
    def M(self) -> int:
        return self.Bf.shape[0]

    @property
    def N(self) -> int:
        return self.Bf.shape[1]

    def response(self, freqs) -> np.ndarray:
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        # column n carries bin n - N//2
        offset = np.exp(2j * np.pi * (self.N // 2) * freqs)
        return (self.Bf @ steering_matrix(freqs, self.N)) * offset[None, :]

    def transformed(self, W: np.ndarray) -> "BeamspaceModel":
        return BeamspaceModel(W @ self.Bf, self.G_diag, self.params)


def build_beamspace(mat: MeasurementMatrix, pulse: np.ndarray, params: RadarParams) -> BeamspaceModel:
    pulse = np.asarray(pulse)
    if pulse.shape != (mat.N,):
        raise ContractViolation(f"Pulse must be zero-padded to N={mat.N}, got {pulse.shape}.")
    G = np.fft.fft(pulse)
    # row m of M F^-1 is the inverse DFT of row m of M
    Bf = np.fft.fftshift(np.fft.ifft(mat.data, axis=1) * G[None, :], axes=1)
    return BeamspaceModel(Bf, G, params)


def sample_covariance(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[1] < 1:
        raise ContractViolation(f"Data matrix with at least one column expected, got {S.shape}.")
    R = S @ S.conj().T / S.shape[1]
    return (R + R.conj().T) / 2


@dataclasses.dataclass(frozen=True)
class WhiteningTransform:
    W: np.ndarray  # (M M^H)^(-1/2), identity when aborted
    condition: float
    aborted: bool = False

    def apply(self, data: np.ndarray, is_covariance: bool = False) -> np.ndarray:
        if is_covariance:
            return self.W @ data @ self.W.conj().T
        return self.W @ data


def whitening_transform(mat: MeasurementMatrix) -> WhiteningTransform:
    gram = mat.data @ mat.data.conj().T
    eig = herm_eig((gram + gram.conj().T) / 2)
    lambda_max = eig.eigenvalues[0]
    lambda_min = eig.eigenvalues[-1]
    condition = np.inf if lambda_min <= 0 else float(lambda_max / lambda_min)
    if condition > WHITENING_MAX_CONDITION:
        logger.warning(f"M M^H is ill-conditioned (cond={condition:.3e}); whitening aborted.")
        return WhiteningTransform(np.eye(mat.M, dtype=complex), condition, aborted=True)

    V = eig.eigenvectors
    W = (V * (1 / np.sqrt(eig.eigenvalues))[None, :]) @ V.conj().T
    return WhiteningTransform(W, condition)


def whiten(data: np.ndarray,
           mat: MeasurementMatrix,
           is_covariance: bool = False,
           ) -> tuple[np.ndarray, WhiteningTransform]:
    transform = whitening_transform(mat)
    return transform.apply(data, is_covariance), transform


def theorem2_check(Theta: np.ndarray, threshold: float = RANK_THRESHOLD) -> RankReport:
    """Full-row-rank test of the coefficient matrix (K_tau x L)."""
    Theta = np.asarray(Theta)
    return rank_report(Theta, threshold, expected_rank=Theta.shape[0])
