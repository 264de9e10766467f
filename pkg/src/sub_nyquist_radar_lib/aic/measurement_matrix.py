import dataclasses
import enum
import pathlib

import numpy as np

from sub_nyquist_radar_lib.utils.exceptions import ConfigError, ContractViolation
from sub_nyquist_radar_lib.utils.logger import LoggerFactory

logger = LoggerFactory.get_logger(__name__)


class MatrixKind(enum.Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    PARTIAL_FOURIER = "partial_fourier"
    RANDOM_DEMOD = "random_demod"


class MeasurementMatrix:
    kind: MatrixKind = None

    def __init__(self,
                 M: int,  # measurements per PRI
                 N: int,  # Nyquist samples per PRI
                 seed: int | None = None,
                 ):
        if not 0 < M < N:
            raise ConfigError(f"Measurement matrix needs 0 < M < N, got M={M}, N={N}.")
        self._M = M
        self._N = N
        self._seed = seed
        self._data = self._build()

    def _build(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def M(self) -> int:
        return self._M

    @property
    def N(self) -> int:
        return self._N

    @property
    def seed(self) -> int | None:
        return self._seed

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def row_scaling(self) -> str:
        raise NotImplementedError

    def dump(self, path: str | pathlib.Path) -> None:
        # row-major, little-endian (real, imag) float64 pairs
        self._data.astype("<c16").tofile(path)
        logger.info(f"Measurement matrix {self.kind.value} {self._M}x{self._N} dumped to {path}")

    @classmethod
    def load(cls, path: str | pathlib.Path, kind: MatrixKind, M: int, N: int,
             seed: int | None = None) -> "MeasurementMatrix":
        data = np.fromfile(path, dtype="<c16").reshape(M, N)
        return ExplicitMatrix(data, kind=kind, seed=seed)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(M={self._M}, N={self._N}, seed={self._seed})"


class GaussianMatrix(MeasurementMatrix):
    kind = MatrixKind.GAUSSIAN

    def _build(self) -> np.ndarray:
        rng = np.random.default_rng(self._seed)
        shape = (self._M, self._N)
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2 * self._M)

    @property
    def row_scaling(self) -> str:
        return "entry variance 1/M"


class BernoulliMatrix(MeasurementMatrix):
    kind = MatrixKind.BERNOULLI

    def _build(self) -> np.ndarray:
        rng = np.random.default_rng(self._seed)
        signs = rng.choice([-1.0, 1.0], size=(self._M, self._N))
        return (signs / np.sqrt(self._M)).astype(complex)

    @property
    def row_scaling(self) -> str:
        return "entries +-1/sqrt(M)"


class PartialFourierMatrix(MeasurementMatrix):
    """First M rows of the N-point DFT matrix, exp(-j 2 pi m n / N)."""

    kind = MatrixKind.PARTIAL_FOURIER

    def __init__(self, M: int, N: int, seed: int | None = None, normalized: bool = False):
        self._normalized = normalized
        super().__init__(M, N, seed)

    def _build(self) -> np.ndarray:
        m = np.arange(self._M)
        n = np.arange(self._N)
        # reduce the exponent modulo N before scaling by 2 pi
        data = np.exp(-2j * np.pi * (np.outer(m, n) % self._N) / self._N)
        if self._normalized:
            data /= np.sqrt(self._N)
        return data

    @property
    def row_scaling(self) -> str:
        return "1/sqrt(N)" if self._normalized else "unnormalized"


class RandomDemodMatrix(MeasurementMatrix):
    """Random-demodulator AIC: M disjoint integrate-and-dump windows of N/M chips."""

    kind = MatrixKind.RANDOM_DEMOD

    def __init__(self, M: int, N: int, seed: int | None = None, chips: np.ndarray | None = None):
        if M <= 0 or N % M != 0:
            raise ConfigError(f"random_demod needs M to divide N, got M={M}, N={N}.")
        self._chips = None if chips is None else np.asarray(chips, dtype=float)
        super().__init__(M, N, seed)

    def _build(self) -> np.ndarray:
        window = self._N // self._M
        chips = self._chips
        if chips is None:
            chips = np.random.default_rng(self._seed).choice([-1.0, 1.0], size=self._N)
        if chips.shape != (self._N,):
            raise ConfigError(f"Expected {self._N} chips, got {chips.shape}.")

        data = np.zeros((self._M, self._N), dtype=complex)
        for m in range(self._M):
            block = slice(m * window, (m + 1) * window)
            data[m, block] = chips[block] / np.sqrt(window)
        return data

    @property
    def row_scaling(self) -> str:
        return "chips +-1/sqrt(N/M)"


class ExplicitMatrix(MeasurementMatrix):
    def __init__(self, data: np.ndarray, kind: MatrixKind = MatrixKind.GAUSSIAN, seed: int | None = None):
        self._explicit = np.asarray(data, dtype=complex)
        self.kind = kind
        super().__init__(self._explicit.shape[0], self._explicit.shape[1], seed)

    def _build(self) -> np.ndarray:
        return self._explicit

    @property
    def row_scaling(self) -> str:
        return "explicit"


class MeasurementMatrixFactory:
    __KINDS = {
        MatrixKind.GAUSSIAN: GaussianMatrix,
        MatrixKind.BERNOULLI: BernoulliMatrix,
        MatrixKind.PARTIAL_FOURIER: PartialFourierMatrix,
        MatrixKind.RANDOM_DEMOD: RandomDemodMatrix,
    }

    @classmethod
    def create(cls, kind: MatrixKind | str, M: int, N: int, seed: int | None = None,
               **kwargs) -> MeasurementMatrix:
        try:
            kind = MatrixKind(kind)
        except ValueError:
            raise ConfigError(f"Unknown measurement matrix kind {kind!r}.")
        return cls.__KINDS[kind](M, N, seed, **kwargs)

    @staticmethod
    def from_chips(chips, M: int) -> RandomDemodMatrix:
        chips = np.asarray(chips, dtype=float)
        return RandomDemodMatrix(M, chips.size, chips=chips)


def make_matrix(kind: MatrixKind | str, M: int, N: int, seed: int | None = None, **kwargs) -> MeasurementMatrix:
    return MeasurementMatrixFactory.create(kind, M, N, seed, **kwargs)


@dataclasses.dataclass(frozen=True)
class DataMatrix:
    samples: np.ndarray  # M x L
    with_clutter: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape


def compress(mat: MeasurementMatrix,
             R_nyq: np.ndarray,
             noise_nyq: np.ndarray | None = None,
             clutter_nyq: np.ndarray | None = None,
             ) -> DataMatrix:
    """S = M (R + noise [+ clutter]), no hidden normalization."""
    R_nyq = np.asarray(R_nyq)
    if R_nyq.ndim != 2 or R_nyq.shape[0] != mat.N:
        raise ContractViolation(f"Echo shape {R_nyq.shape} does not match a {mat.M}x{mat.N} matrix.")
    total = R_nyq.astype(complex)
    for extra in (noise_nyq, clutter_nyq):
        if extra is None:
            continue
        if np.shape(extra) != R_nyq.shape:
            raise ContractViolation(f"Shape {np.shape(extra)} does not match echo {R_nyq.shape}.")
        total = total + extra
    return DataMatrix(mat.data @ total, with_clutter=clutter_nyq is not None)
