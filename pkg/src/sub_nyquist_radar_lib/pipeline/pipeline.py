import dataclasses
import enum
import itertools

import numpy as np
import yaml

from sub_nyquist_radar_lib.aic.measurement_matrix import MeasurementMatrix, MatrixKind, DataMatrix
from sub_nyquist_radar_lib.delay_est.beamspace import build_beamspace, whitening_transform, sample_covariance
from sub_nyquist_radar_lib.delay_est.music import MusicConfig, DelayMethod, DelayEstimate, DelayEstimatorFactory
from sub_nyquist_radar_lib.doppler_est.coefficients import CoeffMatrix, extract_coeffs, compressed_atoms
from sub_nyquist_radar_lib.doppler_est.esprit import estimate_dopplers, estimate_order, model_order
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.scene import Target
from sub_nyquist_radar_lib.numerics.linalg import herm_eig, pinv, rank_report
from sub_nyquist_radar_lib.utils.constant import RANK_THRESHOLD, LARGE_RESIDUAL_RATIO
from sub_nyquist_radar_lib.utils.exceptions import (
    ConfigError, ContractViolation, RadarLibError, RankDeficiencyError,
)
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.unit import Hertz, Seconds

logger = LoggerFactory.get_logger(__name__)

ALLOCATION_SLACK = 2  # automatic per-class orders may exceed detection_K by this much
COLLISION_COHERENCE = 1 - 1e-6


class PipelineMethod(enum.Enum):
    GESEDD1 = "gesedd1"  # root MUSIC + ESPRIT
    GESEDD2 = "gesedd2"  # spectral MUSIC + ESPRIT

    @property
    def delay_method(self) -> DelayMethod:
        if self == PipelineMethod.GESEDD1:
            return DelayMethod.ROOT_MUSIC
        return DelayMethod.SPECTRAL_MUSIC


class Stage(enum.Enum):
    FILTER = "filter"
    WHITEN = "whiten"
    COVARIANCE = "covariance"
    DELAY = "delay"
    COEFFICIENTS = "coefficients"
    DOPPLER = "doppler"
    REFLECTIVITY = "reflectivity"
    DETECTION = "detection"


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    music: MusicConfig
    method: PipelineMethod = PipelineMethod.GESEDD1
    K_per_class: int | tuple[int, ...] | None = 1  # None: model order per class
    auto_K_tau: bool = False  # model order on the covariance eigenvalues
    clutter_filter: Hertz | None = None  # Doppler stopband half-width
    invert_filter: bool = False  # keep the stopband instead
    detection_K: int | None = None  # None: every estimated pair
    tls: bool = False
    criterion: str = "mdl"
    workers: int = 1  # threads for per-class ESPRIT

    def __post_init__(self):
        if self.detection_K is not None and self.detection_K < 1:
            raise ConfigError(f"detection_K must be at least 1, got {self.detection_K}.")

    @property
    def K_tau(self) -> int:
        return self.music.K_tau


@dataclasses.dataclass(frozen=True)
class EstimatedClass:
    tau: Seconds
    dopplers: tuple[float, ...]
    amplitudes: tuple[complex, ...]

    def targets(self) -> list[Target]:
        return [Target(self.tau, nu, alpha) for nu, alpha in zip(self.dopplers, self.amplitudes)]


@dataclasses.dataclass
class EstimateReport:
    method: PipelineMethod
    classes: list[EstimatedClass] = dataclasses.field(default_factory=list)
    targets: list[Target] = dataclasses.field(default_factory=list)  # detected, |alpha| descending
    metrics: dict = dataclasses.field(default_factory=dict)
    diagnostics: dict = dataclasses.field(default_factory=dict)
    failed_stage: Stage | None = None
    error: str | None = None
    delay_estimate: DelayEstimate | None = None  # not part of the record
    coefficients: CoeffMatrix | None = None  # not part of the record

    @property
    def ok(self) -> bool:
        return self.failed_stage is None

    @property
    def large_residual(self) -> bool:
        return bool(self.diagnostics.get("large_residual", False))

    def to_record(self) -> str:
        record = {
            "method": self.method.value,
            "ok": self.ok,
            "failed_stage": None if self.failed_stage is None else self.failed_stage.value,
            "error": self.error,
            "classes": [{"tau": c.tau, "dopplers": list(c.dopplers), "amplitudes": list(c.amplitudes)}
                        for c in self.classes],
            "targets": [{"tau": t.tau, "nu": t.nu, "alpha": t.alpha} for t in self.targets],
            "metrics": self.metrics,
            "diagnostics": self.diagnostics,
        }
        return yaml.safe_dump(_plain(record), sort_keys=False)


def _plain(value):
    """numpy and complex values to YAML-safe builtins"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, enum.Enum):
        return value.value
    return value


def doppler_lowpass(S_c: np.ndarray,
                    cutoff: Hertz,
                    T: Seconds,
                    invert: bool = False,
                    ) -> np.ndarray:
    """Zero the slow-time DFT bins with |f| <= cutoff (keep only those when `invert`)."""
    if not 0 < cutoff < 1 / (2 * T):
        raise ConfigError(f"Cutoff {cutoff} Hz must lie in (0, {1 / (2 * T)}) Hz.")
    S_c = np.asarray(S_c)
    spectrum = np.fft.fft(S_c, axis=1)
    stopband = np.abs(np.fft.fftfreq(S_c.shape[1], d=T)) <= cutoff
    spectrum[:, ~stopband if invert else stopband] = 0
    return np.fft.ifft(spectrum, axis=1)


def ls_reflectivity(s_prime: np.ndarray,
                    pairs: list[tuple[float, float]],
                    mat: MeasurementMatrix,
                    pulse: np.ndarray,
                    params: RadarParams,
                    threshold: float = RANK_THRESHOLD,
                    ) -> tuple[np.ndarray, float]:
    """Least-squares amplitudes on the dictionary b(nu) kron M psi(tau); returns (alpha, residual)."""
    s_prime = np.asarray(s_prime)
    if s_prime.shape != (mat.M * params.L,):
        raise ContractViolation(f"s' must have length M L = {mat.M * params.L}, got {s_prime.shape}.")
    if len(pairs) == 0:
        return np.zeros(0, dtype=complex), float(np.linalg.norm(s_prime))

    taus = np.array([tau for tau, _ in pairs])
    MPsi = compressed_atoms(mat, taus, pulse, params)
    slow_time = np.arange(params.L) * params.T
    dictionary = np.column_stack([
        np.kron(np.exp(2j * np.pi * nu * slow_time), MPsi[:, k])
        for k, (_, nu) in enumerate(pairs)
    ])

    report = rank_report(dictionary, threshold, expected_rank=len(pairs))
    if not report.full_rank:
        colliding = _colliding_pairs(dictionary, pairs)
        raise RankDeficiencyError(f"Reflectivity dictionary is rank deficient, colliding pairs {colliding}.",
                                  report=report, colliding_pairs=colliding)

    alpha = pinv(dictionary) @ s_prime
    return alpha, float(np.linalg.norm(s_prime - dictionary @ alpha))


def _colliding_pairs(dictionary: np.ndarray, pairs: list) -> list:
    norms = np.linalg.norm(dictionary, axis=0)
    norms[norms == 0] = 1
    coherence = np.abs(dictionary.conj().T @ dictionary) / np.outer(norms, norms)
    np.fill_diagonal(coherence, 0)
    colliding = [(pairs[i], pairs[j]) for i, j in itertools.combinations(range(len(pairs)), 2)
                 if coherence[i, j] >= COLLISION_COHERENCE]
    if not colliding:
        i, j = np.unravel_index(np.argmax(coherence), coherence.shape)
        colliding = [(pairs[min(i, j)], pairs[max(i, j)])]
    return colliding


def detect_topk(targets: list[Target], K: int) -> tuple[list[Target], bool]:
    """Top K by |alpha|, ties by smaller tau then smaller nu; flag is set when fewer than K exist."""
    ranked = sorted(targets, key=lambda t: (-abs(t.alpha), t.tau, t.nu))
    return ranked[:K], K > len(ranked)


def _class_orders(Theta_hat: np.ndarray, cfg: PipelineConfig) -> list[int]:
    K_tau, L = Theta_hat.shape
    if isinstance(cfg.K_per_class, int):
        return [cfg.K_per_class] * K_tau
    if cfg.K_per_class is not None:
        if len(cfg.K_per_class) != K_tau:
            raise ContractViolation(f"{len(cfg.K_per_class)} class orders for {K_tau} estimated delays.")
        return list(cfg.K_per_class)

    orders = [max(1, estimate_order(row, cfg.criterion)) for row in Theta_hat]
    if cfg.detection_K is not None:
        cap = max(K_tau, cfg.detection_K + ALLOCATION_SLACK)
        while sum(orders) > cap:
            orders[int(np.argmax(orders))] -= 1
    return orders


def run(S: np.ndarray | DataMatrix,
        mat: MeasurementMatrix,
        pulse: np.ndarray,
        params: RadarParams,
        cfg: PipelineConfig,
        ) -> EstimateReport:
    """Delays, then Dopplers per delay class, then reflectivities and top-K detection."""
    report = EstimateReport(method=cfg.method)
    diagnostics = report.diagnostics
    data = S.samples if isinstance(S, DataMatrix) else np.asarray(S)
    stage = Stage.FILTER
    try:
        if data.shape != (mat.M, params.L):
            raise ContractViolation(f"Data shape {data.shape} does not match M x L = ({mat.M}, {params.L}).")
        if cfg.clutter_filter is not None:
            data = doppler_lowpass(data, cfg.clutter_filter, params.T, cfg.invert_filter)

        stage = Stage.WHITEN
        model = build_beamspace(mat, pulse, params)
        whitening = cfg.music.whiten
        if whitening is None:
            whitening = mat.kind != MatrixKind.PARTIAL_FOURIER
        whitened = data
        if whitening:
            transform = whitening_transform(mat)
            diagnostics["whitening_condition"] = transform.condition
            diagnostics["whitening_aborted"] = transform.aborted
            whitened = transform.apply(data)
            model = model.transformed(transform.W)

        stage = Stage.COVARIANCE
        R = sample_covariance(whitened)
        music_cfg = cfg.music
        if cfg.auto_K_tau:
            # the sample covariance has rank at most L
            eigenvalues = np.clip(herm_eig(R).eigenvalues[:min(mat.M, params.L)], 0, None)
            K_tau, _ = model_order(eigenvalues, params.L, cfg.criterion)
            music_cfg = dataclasses.replace(music_cfg, K_tau=int(np.clip(K_tau, 1, mat.M - 1)))
            diagnostics["K_tau_estimated"] = music_cfg.K_tau

        stage = Stage.DELAY
        logger.debug(f"Estimating {music_cfg.K_tau} delays with {cfg.method.delay_method.value}")
        estimator = DelayEstimatorFactory.create_delay_estimator(cfg.method.delay_method, music_cfg)
        delays = estimator.estimate(R, model)
        report.delay_estimate = delays
        diagnostics["subspace_gap"] = delays.subspace_gap
        diagnostics["taus"] = delays.taus

        stage = Stage.COEFFICIENTS
        coeffs = extract_coeffs(data, mat, delays.taus, pulse, params)
        report.coefficients = coeffs
        diagnostics["rank_margin"] = coeffs.rank.margin
        diagnostics["noise_gain"] = coeffs.noise_gain

        stage = Stage.DOPPLER
        orders = _class_orders(coeffs.Theta_hat, cfg)
        dopplers = estimate_dopplers(coeffs.Theta_hat, orders, params.T, cfg.tls, cfg.workers)
        diagnostics["K_per_class"] = orders

        stage = Stage.REFLECTIVITY
        pairs = [(tau, nu) for tau, nus in zip(delays.taus, dopplers.dopplers) for nu in nus]
        s_prime = data.reshape(-1, order="F")
        alpha, residual = ls_reflectivity(s_prime, pairs, mat, pulse, params)
        energy = float(np.linalg.norm(s_prime))
        diagnostics["residual"] = residual
        diagnostics["relative_residual"] = residual / energy if energy > 0 else 0.0
        diagnostics["large_residual"] = diagnostics["relative_residual"] > LARGE_RESIDUAL_RATIO

        stage = Stage.DETECTION
        offset = 0
        for tau, nus in zip(delays.taus, dopplers.dopplers):
            amplitudes = tuple(complex(a) for a in alpha[offset:offset + len(nus)])
            report.classes.append(EstimatedClass(float(tau), tuple(float(nu) for nu in nus), amplitudes))
            offset += len(nus)
        candidates = [t for c in report.classes for t in c.targets()]
        K = len(candidates) if cfg.detection_K is None else cfg.detection_K
        report.targets, short = detect_topk(candidates, K)
        diagnostics["detection_short"] = short

    except RadarLibError as e:
        report.failed_stage = stage
        report.error = str(e)
        diagnostics.update(getattr(e, "diagnostics", {}))
        logger.warning(f"Pipeline failed at stage {stage.value}: {e}")
        return report

    if diagnostics["large_residual"]:
        logger.warning(f"Large relative residual {diagnostics['relative_residual']:.3f}")
    logger.info(f"Pipeline finished with {len(report.targets)} targets")
    return report


if __name__ == "__main__":
    from sub_nyquist_radar_lib.aic.measurement_matrix import make_matrix, compress
    from sub_nyquist_radar_lib.model.scene import Scene, DelayClass
    from sub_nyquist_radar_lib.model.signal import echo_matrix, padded_pulse

    params = RadarParams(B=1e8, T=2.56e-6, T_p=0.64e-6, L=32, M=64)
    scene = Scene((
        DelayClass(0.337e-6, ((1.3 * params.nu0, 1.0),)),
        DelayClass(0.912e-6, ((-4.6 * params.nu0, 0.7j), (6.2 * params.nu0, 0.4))),
    ))
    mat = make_matrix("gaussian", params.M, params.N, seed=1)
    S = compress(mat, echo_matrix(scene, params))
    cfg = PipelineConfig(music=MusicConfig(K_tau=2), K_per_class=(1, 2))
    print(run(S, mat, padded_pulse(params), params, cfg).to_record())
