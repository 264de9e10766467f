import dataclasses
import enum
import pathlib

import numpy as np
import pandas as pd

from sub_nyquist_radar_lib.delay_est.beamspace import BeamspaceModel, freq_to_delay, steering
from sub_nyquist_radar_lib.numerics.linalg import herm_eig
from sub_nyquist_radar_lib.numerics.polynomial import poly_roots
from sub_nyquist_radar_lib.utils.constant import (
    SUBSPACE_GAP_MIN, SEARCH_GRID_RATIO, ROOT_SEPARATION_FACTOR, CLUSTER_TOLERANCE_RATIO,
    POLISH_MAX_ITERATIONS,
)
from sub_nyquist_radar_lib.utils.exceptions import ConfigError, ContractViolation, DomainError, EstimationFailure
from sub_nyquist_radar_lib.utils.logger import LoggerFactory

logger = LoggerFactory.get_logger(__name__)

ROW_CHUNK = 64  # beamformer rows transformed per FFT batch
COEFFICIENT_FLOOR = 1e-13  # relative; smaller end coefficients are roots at 0 or infinity


class DelayMethod(enum.Enum):
    ROOT_MUSIC = "root_music"
    SPECTRAL_MUSIC = "spectral_music"


@dataclasses.dataclass(frozen=True)
class MusicConfig:
    K_tau: int
    D: int = SEARCH_GRID_RATIO  # Nyquist grid / search grid
    whiten: bool | None = None  # None: on unless the matrix is partial_fourier
    cluster_tol: float | None = None  # s, None means CLUSTER_TOLERANCE_RATIO * tau0
    polish: bool = True  # Newton refinement of root-MUSIC frequencies

    def __post_init__(self):
        if self.K_tau < 1:
            raise ConfigError(f"K_tau must be at least 1, got {self.K_tau}.")
        if self.D < 1:
            raise ConfigError(f"Grid refinement D must be at least 1, got {self.D}.")


@dataclasses.dataclass(frozen=True)
class DelayEstimate:
    taus: np.ndarray  # s, ascending
    freqs: np.ndarray  # normalized, in [-1/2, 1/2), aligned with taus
    subspace_gap: float  # lambda_K / lambda_K+1
    method: DelayMethod
    eigenvalues: np.ndarray
    diagnostics: dict = dataclasses.field(default_factory=dict)

    @property
    def K_tau(self) -> int:
        return len(self.taus)


def _wrap(f):
    return np.mod(np.asarray(f, dtype=float) + 0.5, 1) - 0.5


def _circular_distance(f1, f2):
    return np.abs(_wrap(np.asarray(f1) - np.asarray(f2)))


def signal_subspace_split(R: np.ndarray, K_tau: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Eigenvalues, noise subspace E_n and subspace gap of the sample covariance."""
    M = R.shape[0]
    if not 0 < K_tau < M:
        raise ContractViolation(f"Need 0 < K_tau < M, got K_tau={K_tau}, M={M}.")
    eig = herm_eig(R)
    values = eig.eigenvalues
    if values[0] <= 0:
        raise EstimationFailure("Covariance has no energy.", diagnostics={"eigenvalues": values})

    floor = max(values[K_tau], np.finfo(float).eps * values[0])
    gap = float(values[K_tau - 1] / floor)
    if gap <= SUBSPACE_GAP_MIN:
        raise EstimationFailure(f"No signal subspace: eigenvalue gap {gap:.12g}.",
                                diagnostics={"eigenvalues": values, "subspace_gap": gap})
    return values, eig.eigenvectors[:, K_tau:], gap


def _chunked_power_fft(rows: np.ndarray, n: int, modulation: np.ndarray | None = None) -> np.ndarray:
    """sum over rows of |FFT_n(row)|^2, rows processed in chunks"""
    power = np.zeros(n)
    for start in range(0, rows.shape[0], ROW_CHUNK):
        chunk = rows[start:start + ROW_CHUNK]
        if modulation is not None:
            chunk = chunk * modulation[None, :]
        power += np.sum(np.abs(np.fft.fft(chunk, n=n, axis=1)) ** 2, axis=0)
    return power


class DelayEstimatorBase:
    method: DelayMethod = None

    def __init__(self, cfg: MusicConfig):
        self._cfg = cfg

    @property
    def cfg(self) -> MusicConfig:
        return self._cfg

    def estimate(self, R: np.ndarray, model: BeamspaceModel) -> DelayEstimate:
        values, En, gap = signal_subspace_split(R, self._cfg.K_tau)
        Hb = En.conj().T @ model.Bf
        diagnostics = {}
        freqs = self._frequencies(Hb, model, diagnostics)
        freqs = self._cluster(freqs, model, diagnostics)

        taus = freq_to_delay(freqs, model.params.T)
        order = np.argsort(taus, kind="stable")
        return DelayEstimate(taus=taus[order], freqs=freqs[order], subspace_gap=gap,
                             method=self.method, eigenvalues=values, diagnostics=diagnostics)

    def _frequencies(self, Hb: np.ndarray, model: BeamspaceModel, diagnostics: dict) -> np.ndarray:
        raise NotImplementedError

    def _cluster(self, freqs: np.ndarray, model: BeamspaceModel, diagnostics: dict) -> np.ndarray:
        tolerance = self._cfg.cluster_tol
        if tolerance is None:
            tolerance = CLUSTER_TOLERANCE_RATIO * model.params.tau0
        tolerance_f = tolerance / model.params.T

        clusters: list[list[float]] = []
        for f in freqs:
            for cluster in clusters:
                if _circular_distance(f, cluster[0]) <= tolerance_f:
                    cluster.append(f)
                    break
            else:
                clusters.append([f])

        if len(clusters) < len(freqs):
            logger.info(f"Merged {len(freqs)} delay estimates into {len(clusters)} clusters.")
            diagnostics["merged"] = len(freqs) - len(clusters)
        # mean taken relative to the first member so clusters across +-1/2 stay together
        return np.array([_wrap(c[0] + np.mean(_wrap(np.array(c) - c[0]))) for c in clusters])


class SpectralMusicEstimator(DelayEstimatorBase):
    """Beamspace spectral MUSIC on the grid f = -1/2 + g / (N D)."""

    method = DelayMethod.SPECTRAL_MUSIC

    def pseudospectrum(self, Hb: np.ndarray, model: BeamspaceModel) -> tuple[np.ndarray, np.ndarray]:
        N = model.N
        size = N * self._cfg.D
        grid = -0.5 + np.arange(size) / size
        # a(-1/2 + g/(ND))[n] = (-1)^n exp(-j 2 pi n g / (ND))
        alternating = (-1.0) ** np.arange(N)
        numerator = _chunked_power_fft(model.Bf, size, alternating)
        denominator = _chunked_power_fft(Hb, size, alternating)
        return grid, numerator / np.maximum(denominator, np.finfo(float).tiny)

    def _frequencies(self, Hb: np.ndarray, model: BeamspaceModel, diagnostics: dict) -> np.ndarray:
        grid, spectrum = self.pseudospectrum(Hb, model)
        diagnostics["grid"] = grid
        diagnostics["pseudospectrum"] = spectrum

        peaks = np.flatnonzero((spectrum > np.roll(spectrum, 1)) & (spectrum > np.roll(spectrum, -1)))
        if peaks.size < self._cfg.K_tau:
            raise EstimationFailure(
                f"Found {peaks.size} pseudospectrum peaks for K_tau={self._cfg.K_tau}.",
                diagnostics={"peaks": grid[peaks]})
        # larger value first, then smaller frequency
        ranked = peaks[np.lexsort((grid[peaks], -spectrum[peaks]))]
        return grid[ranked[:self._cfg.K_tau]]


class RootMusicEstimator(DelayEstimatorBase):
    """Beamspace root MUSIC: roots of the null polynomial sum_m c_m w^m, w = exp(-j 2 pi f)."""

    method = DelayMethod.ROOT_MUSIC

    @staticmethod
    def null_polynomial(Hb: np.ndarray) -> np.ndarray:
        """Ascending coefficients c_-(N-1) .. c_(N-1); c_m is the m-th diagonal sum of Hb^H Hb."""
        N = Hb.shape[1]
        # diagonal sums of Hb^H Hb are the summed row autocorrelations
        correlation = np.fft.ifft(_chunked_power_fft(Hb, 2 * N))
        return np.concatenate([correlation[N + 1:], correlation[:N]])

    @staticmethod
    def null_spectrum(Hb: np.ndarray, f: float) -> float:
        return float(np.sum(np.abs(Hb @ steering(f, Hb.shape[1])) ** 2))

    def _select(self, roots: np.ndarray, N: int) -> np.ndarray:
        folded = np.where(np.abs(roots) > 1, 1 / np.conj(roots), roots)
        distance = np.abs(1 - np.abs(folded))
        angles = np.angle(folded)
        separation = 2 * np.pi / (ROOT_SEPARATION_FACTOR * N)

        selected: list[float] = []
        for index in np.lexsort((angles, distance)):
            angle = angles[index]
            if all(abs(np.angle(np.exp(1j * (angle - other)))) >= separation for other in selected):
                selected.append(angle)
                if len(selected) == self._cfg.K_tau:
                    break
        return np.array(selected)

    def polish(self, Hb: np.ndarray, f: float) -> float:
        """Newton iterations on the null spectrum, step clamped to 1/(4N)."""
        N = Hb.shape[1]
        phase = -2j * np.pi * np.arange(N)
        max_step = 1 / (ROOT_SEPARATION_FACTOR * N)
        value = self.null_spectrum(Hb, f)
        for _ in range(POLISH_MAX_ITERATIONS):
            a = steering(f, N)
            u = Hb @ a
            u1 = Hb @ (phase * a)
            u2 = Hb @ (phase ** 2 * a)
            first = 2 * np.real(np.vdot(u, u1))
            second = 2 * (np.sum(np.abs(u1) ** 2) + np.real(np.vdot(u, u2)))
            if second <= 0:
                break
            step = float(np.clip(-first / second, -max_step, max_step))
            candidate = self.null_spectrum(Hb, f + step)
            if candidate > value:
                break
            f, value = f + step, candidate
            if abs(step) < 1e-15:
                break
        return float(_wrap(f))

    def _frequencies(self, Hb: np.ndarray, model: BeamspaceModel, diagnostics: dict) -> np.ndarray:
        N = model.N
        coeffs = self.null_polynomial(Hb)
        significant = np.flatnonzero(np.abs(coeffs) > COEFFICIENT_FLOOR * np.max(np.abs(coeffs), initial=0))
        if significant.size:
            coeffs = coeffs[significant[0]:significant[-1] + 1]
        try:
            roots = poly_roots(coeffs)
        except DomainError as e:
            raise EstimationFailure(f"Null polynomial is degenerate: {e}")
        diagnostics["roots"] = roots

        angles = self._select(roots, N)
        if angles.size < self._cfg.K_tau:
            raise EstimationFailure(
                f"Found {angles.size} separated roots for K_tau={self._cfg.K_tau}.",
                diagnostics={"roots": roots})

        freqs = _wrap(-angles / (2 * np.pi))
        if self._cfg.polish:
            freqs = np.array([self.polish(Hb, f) for f in freqs])
        return freqs


class DelayEstimatorFactory:
    @staticmethod
    def create_delay_estimator(method: DelayMethod | str, cfg: MusicConfig) -> DelayEstimatorBase:
        match DelayMethod(method):
            case DelayMethod.ROOT_MUSIC:
                return RootMusicEstimator(cfg)
            case DelayMethod.SPECTRAL_MUSIC:
                return SpectralMusicEstimator(cfg)


def music_spectrum(R: np.ndarray, model: BeamspaceModel, cfg: MusicConfig) -> DelayEstimate:
    return SpectralMusicEstimator(cfg).estimate(R, model)


def root_music(R: np.ndarray, model: BeamspaceModel, cfg: MusicConfig) -> DelayEstimate:
    return RootMusicEstimator(cfg).estimate(R, model)


def export_diagnostics(estimate: DelayEstimate, directory: str | pathlib.Path) -> list[pathlib.Path]:
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    prefix = estimate.method.value
    tables = {
        "eigenvalues": pd.DataFrame({"index": np.arange(estimate.eigenvalues.size),
                                     "eigenvalue": estimate.eigenvalues}),
    }
    if "pseudospectrum" in estimate.diagnostics:
        tables["pseudospectrum"] = pd.DataFrame({"frequency": estimate.diagnostics["grid"],
                                                 "pseudospectrum": estimate.diagnostics["pseudospectrum"]})
    if "roots" in estimate.diagnostics:
        roots = estimate.diagnostics["roots"]
        tables["roots"] = pd.DataFrame({"real": roots.real, "imag": roots.imag, "modulus": np.abs(roots)})

    paths = []
    for name, table in tables.items():
        path = directory / f"{prefix}_{name}.csv"
        table.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
        paths.append(path)
        logger.info(f"Wrote {path}")
    return paths
