import dataclasses

import numpy as np

from sub_nyquist_radar_lib.aic.measurement_matrix import MeasurementMatrix
from sub_nyquist_radar_lib.delay_est.beamspace import build_beamspace
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.numerics.linalg import pinv, rank_report, RankReport
from sub_nyquist_radar_lib.utils.constant import RANK_THRESHOLD
from sub_nyquist_radar_lib.utils.exceptions import ContractViolation, RankDeficiencyError
from sub_nyquist_radar_lib.utils.unit import Hertz, Seconds


@dataclasses.dataclass(frozen=True)
class DopplerVector:
    nu: Hertz
    L: int
    T: Seconds

    @property
    def b(self) -> np.ndarray:
        """b[l] = exp(j 2 pi nu l T)"""
        return np.exp(2j * np.pi * self.nu * np.arange(self.L) * self.T)


@dataclasses.dataclass(frozen=True)
class CoeffMatrix:
    Theta_hat: np.ndarray  # K_tau x L
    row_delays: np.ndarray  # s, one per row
    noise_gain: np.ndarray  # row norms of (M Psi)^+
    rank: RankReport

    @property
    def K_tau(self) -> int:
        return self.Theta_hat.shape[0]


def compressed_atoms(mat: MeasurementMatrix,
                     taus,
                     pulse: np.ndarray,
                     params: RadarParams,
                     ) -> np.ndarray:
    """M Psi (M x K) for the model-matched atoms at `taus`."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    return build_beamspace(mat, pulse, params).response(taus / params.T)


def extract_coeffs(S: np.ndarray,
                   mat: MeasurementMatrix,
                   taus_hat,
                   pulse: np.ndarray,
                   params: RadarParams,
                   threshold: float = RANK_THRESHOLD,
                   ) -> CoeffMatrix:
    """Theta_hat = (M Psi)^+ S at the estimated delays."""
    S = np.asarray(S)
    if S.shape[0] != mat.M:
        raise ContractViolation(f"Data has {S.shape[0]} rows, matrix has M={mat.M}.")
    taus_hat = np.atleast_1d(np.asarray(taus_hat, dtype=float))
    MPsi = compressed_atoms(mat, taus_hat, pulse, params)

    report = rank_report(MPsi, threshold, expected_rank=taus_hat.size)
    if not report.full_rank:
        raise RankDeficiencyError(f"M Psi at the estimated delays is rank deficient: {report.diagnostic}",
                                  report=report)

    P = pinv(MPsi)
    return CoeffMatrix(Theta_hat=P @ S,
                       row_delays=taus_hat,
                       noise_gain=np.linalg.norm(P, axis=1),
                       rank=report)
