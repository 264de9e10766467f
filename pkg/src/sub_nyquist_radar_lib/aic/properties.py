import dataclasses
import math

import numpy as np

from sub_nyquist_radar_lib.aic.measurement_matrix import MeasurementMatrix, MatrixKind, make_matrix
from sub_nyquist_radar_lib.model import signal
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.numerics.linalg import RankReport, rank_report
from sub_nyquist_radar_lib.utils.constant import RANK_THRESHOLD
from sub_nyquist_radar_lib.utils.exceptions import ContractViolation
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.util import derive_seed, make_rng

logger = LoggerFactory.get_logger(__name__)

NOISE_BATCH = 1000  # noise vectors per batch
NOMINAL_TOLERANCE = 0.05


def _matrix_data(mat: MeasurementMatrix | np.ndarray) -> np.ndarray:
    if isinstance(mat, MeasurementMatrix):
        return mat.data
    return np.asarray(mat)


@dataclasses.dataclass(frozen=True)
class NoiseStatsReport:
    row_variances: np.ndarray
    mean_variance: float
    nominal_variance: float  # N N0 B / M
    expected_variances: np.ndarray  # |row|^2 N0 B
    trials: int

    @property
    def matches_nominal(self) -> bool:
        if self.nominal_variance == 0:
            return self.mean_variance == 0
        expected = float(np.mean(self.expected_variances))
        return abs(expected - self.nominal_variance) <= NOMINAL_TOLERANCE * self.nominal_variance


def compressed_noise_stats(mat: MeasurementMatrix,
                           N0: float,  # W/Hz
                           B: float,  # Hz
                           trials: int = 10_000,
                           seed: int = 0,
                           ) -> NoiseStatsReport:
    """Monte-Carlo per-entry variance of M n for white Nyquist noise of variance N0 B."""
    if trials < 1000:
        raise ContractViolation(f"At least 1000 trials are needed, got {trials}.")
    data = _matrix_data(mat)
    M, N = data.shape
    variance = N0 * B
    rng = np.random.default_rng(seed)

    power = np.zeros(M)
    for start in range(0, trials, NOISE_BATCH):
        count = min(NOISE_BATCH, trials - start)
        noise = np.sqrt(variance / 2) * (rng.standard_normal((N, count)) + 1j * rng.standard_normal((N, count)))
        power += np.sum(np.abs(data @ noise) ** 2, axis=1)
    row_variances = power / trials

    report = NoiseStatsReport(row_variances=row_variances,
                              mean_variance=float(np.mean(row_variances)),
                              nominal_variance=N * variance / M,
                              expected_variances=np.sum(np.abs(data) ** 2, axis=1) * variance,
                              trials=trials)
    if variance > 0 and not report.matches_nominal:
        logger.info(f"Compressed noise variance {report.mean_variance:.4e} deviates from N N0 B / M.")
    return report


def com_ratio(mat: MeasurementMatrix | np.ndarray, x: np.ndarray) -> float:
    """|M x|^2 / |x|^2"""
    x = np.asarray(x)
    return float(np.sum(np.abs(_matrix_data(mat) @ x) ** 2) / np.sum(np.abs(x) ** 2))


@dataclasses.dataclass(frozen=True)
class ComReport:
    kind: MatrixKind
    M: int
    N: int
    epsilon: float
    trials: int
    empirical_tail: float
    bound_exponent: float | None  # -log(tail / 2) / M


def com_test(kind: MatrixKind | str,
             M: int,
             N: int,
             epsilon: float,
             trials: int,
             seed: int = 0,
             ) -> ComReport:
    """Fraction of (matrix, unit vector) draws with | |Mx|^2 - 1 | >= epsilon."""
    if not 0 < epsilon < 1:
        raise ContractViolation(f"epsilon must lie in (0, 1), got {epsilon}.")
    kind = MatrixKind(kind)
    violations = 0
    for trial in range(trials):
        mat = make_matrix(kind, M, N, seed=derive_seed(seed, trial, 0))
        rng = make_rng(seed, trial, 1)
        x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        if abs(com_ratio(mat, x) - 1) >= epsilon:
            violations += 1

    tail = violations / trials
    exponent = -math.log(tail / 2) / M if tail > 0 else None
    return ComReport(kind, M, N, epsilon, trials, tail, exponent)


def rank_check(mat: MeasurementMatrix | np.ndarray,
               Psi: np.ndarray,
               threshold: float = RANK_THRESHOLD,
               ) -> RankReport:
    data = _matrix_data(mat)
    K = Psi.shape[1]
    if K > data.shape[0]:
        return RankReport(0.0, 0.0, False, threshold, f"K_tau={K} exceeds M={data.shape[0]}")
    return rank_report(data @ Psi, threshold, expected_rank=K)


def rank_probability(kind: MatrixKind | str,
                     params: RadarParams,
                     K_tau: int,
                     trials: int,
                     seed: int = 0,
                     threshold: float = RANK_THRESHOLD,
                     ) -> RankReport:
    """Monte-Carlo full-column-rank rate of M Psi over random matrices and random off-grid delays."""
    if K_tau > params.M:
        return RankReport(0.0, 0.0, False, threshold, f"K_tau={K_tau} exceeds M={params.M}",
                          trials=trials, success_rate=0.0)

    successes = 0
    sigma_min = np.inf
    sigma_max = 0.0
    for trial in range(trials):
        mat = make_matrix(kind, params.M, params.N, seed=derive_seed(seed, trial, 0))
        delays = make_rng(seed, trial, 1).uniform(0, params.tau_max, K_tau)
        report = rank_check(mat, signal.atoms(delays, params), threshold)
        successes += report.full_rank
        sigma_min = min(sigma_min, report.min_singular_value)
        sigma_max = max(sigma_max, report.max_singular_value)

    rate = successes / trials
    return RankReport(float(sigma_min), float(sigma_max), successes == trials, threshold,
                      f"{successes}/{trials} full rank", trials=trials, success_rate=rate)


def inverse_dft_matrix(N: int) -> np.ndarray:
    n = np.arange(N)
    return np.exp(2j * np.pi * (np.outer(n, n) % N) / N) / N


def xampling_degeneracy_check(mat: MeasurementMatrix | np.ndarray,
                              G: np.ndarray,
                              A: np.ndarray,
                              strict: bool = True,
                              tolerance: float = 1e-10,
                              ) -> tuple[bool, float]:
    """Check M F^-1 = [I_M | 0] and M Psi = G_M A_M for a partial-Fourier M."""
    if strict and isinstance(mat, MeasurementMatrix) and mat.kind != MatrixKind.PARTIAL_FOURIER:
        raise ContractViolation(f"Degeneracy check needs a partial_fourier matrix, got {mat.kind.value}.")
    data = _matrix_data(mat)
    M, N = data.shape

    Finv = inverse_dft_matrix(N)
    selector = np.eye(M, N)
    residual_selector = float(np.max(np.abs(data @ Finv - selector)))

    Psi = Finv @ (G[:, None] * A)
    residual_atoms = float(np.max(np.abs(data @ Psi - G[:M, None] * A[:M, :])))

    residual = max(residual_selector, residual_atoms)
    return residual < tolerance, residual
