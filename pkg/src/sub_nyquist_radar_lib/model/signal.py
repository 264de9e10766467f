import enum
import math

import numpy as np

from sub_nyquist_radar_lib.aic.measurement_matrix import MeasurementMatrix
from sub_nyquist_radar_lib.delay_est.beamspace import delay_ramp
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.scene import Scene, DelayClass, NoiseParams, ClutterParams
from sub_nyquist_radar_lib.utils.exceptions import ContractViolation, DomainError
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.unit import UnitConverter, Decibel, Seconds

logger = LoggerFactory.get_logger(__name__)

CLUTTER_CHUNK = 256  # scatterers synthesized per batch


class AtomMode(enum.Enum):
    MODEL_MATCHED = "model_matched"  # circular frequency-domain delay
    PHYSICAL = "physical"  # direct time-domain shift


def lfm_pulse(params: RadarParams) -> np.ndarray:
    """Centered unit-amplitude up-chirp sampled at the Nyquist rate."""
    i = np.arange(params.pulse_samples)
    t = i * params.T_nyq - params.T_p / 2
    return np.exp(1j * np.pi * (params.B / params.T_p) * t ** 2)


def padded_pulse(params: RadarParams) -> np.ndarray:
    g = np.zeros(params.N, dtype=complex)
    g[:params.pulse_samples] = lfm_pulse(params)
    return g


def pulse_spectrum(params: RadarParams) -> np.ndarray:
    # diagonal of G
    return np.fft.fft(padded_pulse(params))


def _check_delays(taus: np.ndarray, params: RadarParams) -> None:
    outside = (taus < 0) | (taus >= params.tau_max)
    if np.any(outside):
        raise DomainError(f"Delays {taus[outside]} s outside [0, {params.tau_max}) s.")


def atoms(taus,
          params: RadarParams,
          mode: AtomMode = AtomMode.MODEL_MATCHED,
          ) -> np.ndarray:
    """Atom matrix Psi (N x K), one column psi(tau) per delay."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    _check_delays(taus, params)
    if taus.size == 0:
        return np.zeros((params.N, 0), dtype=complex)

    if AtomMode(mode) == AtomMode.MODEL_MATCHED:
        G = pulse_spectrum(params)
        A = delay_ramp(taus / params.T, params.N)
        return np.fft.ifft(G[:, None] * A, axis=0)

    # delay in samples, snapped onto the grid when it is numerically on it
    offsets = taus * params.B
    nearest = np.round(offsets)
    offsets = np.where(np.abs(offsets - nearest) < 1e-9, nearest, offsets)

    x = np.arange(params.N)[:, None] - offsets[None, :]
    inside = (x >= 0) & (x < params.pulse_samples)
    t = x * params.T_nyq - params.T_p / 2
    return np.where(inside, np.exp(1j * np.pi * (params.B / params.T_p) * t ** 2), 0)


def atom(tau: Seconds,
         params: RadarParams,
         mode: AtomMode = AtomMode.MODEL_MATCHED,
         ) -> np.ndarray:
    return atoms([tau], params, mode)[:, 0]


def doppler_vector(nu: float, params: RadarParams) -> np.ndarray:
    # b(nu), pulse-indexed (stop-and-hop)
    return np.exp(2j * np.pi * nu * np.arange(params.L) * params.T)


def coeff_sequence(delay_class: DelayClass, params: RadarParams) -> np.ndarray:
    sequence = np.zeros(params.L, dtype=complex)
    for nu, alpha in delay_class.members:
        sequence += alpha * doppler_vector(nu, params)
    return sequence


def theta_matrix(scene: Scene, params: RadarParams) -> np.ndarray:
    if scene.K_tau == 0:
        return np.zeros((0, params.L), dtype=complex)
    return np.vstack([coeff_sequence(c, params) for c in scene.classes])


def echo_matrix(scene: Scene,
                params: RadarParams,
                mode: AtomMode = AtomMode.MODEL_MATCHED,
                ) -> np.ndarray:
    """Nyquist-rate CPI echo R = Psi Theta (N x L)."""
    if scene.K_tau == 0:
        return np.zeros((params.N, params.L), dtype=complex)
    return atoms(scene.delays, params, mode) @ theta_matrix(scene, params)


def noise_level(R: np.ndarray, snr_db: Decibel, params: RadarParams) -> float:
    """Per-sample noise variance N0*B giving the requested SNR against the mean per-pulse energy."""
    if R.size == 0:
        raise ContractViolation("Echo matrix is empty.")
    snr = UnitConverter.db_to_power_ratio(snr_db)
    if math.isinf(snr):
        return 0.0
    pulse_energy = float(np.mean(np.sum(np.abs(R) ** 2, axis=0)))
    if pulse_energy == 0:
        raise DomainError("SNR is undefined for an all-zero echo.")
    return pulse_energy / (params.N * snr)


def noise_params_for(R: np.ndarray, snr_db: Decibel, params: RadarParams, seed: int) -> NoiseParams:
    return NoiseParams(N0=noise_level(R, snr_db, params) / params.B, seed=seed)


def nyquist_noise(R: np.ndarray,
                  snr_db: Decibel,
                  params: RadarParams,
                  noise: NoiseParams,
                  ) -> np.ndarray:
    variance = noise_level(R, snr_db, params)
    if variance == 0:
        return np.zeros_like(R, dtype=complex)
    rng = np.random.default_rng(noise.seed)
    samples = rng.standard_normal(R.shape) + 1j * rng.standard_normal(R.shape)
    return np.sqrt(variance / 2) * samples


def add_noise(R: np.ndarray,
              snr_db: Decibel,
              params: RadarParams,
              noise: NoiseParams,
              ) -> np.ndarray:
    return R + nyquist_noise(R, snr_db, params, noise)


def gen_clutter(params: RadarParams,
                cp: ClutterParams,
                mat: MeasurementMatrix,
                ref_echo: np.ndarray | None,
                mode: AtomMode = AtomMode.MODEL_MATCHED,
                ) -> np.ndarray:
    """Swerling-0 clutter (N x L) scaled to the compressed-domain SCR against `ref_echo`."""
    if cp.is_clutter_free:
        return np.zeros((params.N, params.L), dtype=complex)
    cp.validate(params)

    rng = np.random.default_rng(cp.seed)
    width = params.nu0 if cp.doppler_bin_width is None else cp.doppler_bin_width
    delays = rng.uniform(cp.delay_span[0], cp.delay_span[1], cp.n_scatterers)
    dopplers = rng.uniform(-width / 2, width / 2, cp.n_scatterers)
    phases = rng.uniform(0, 2 * np.pi, cp.n_scatterers)

    slow_time = np.arange(params.L) * params.T
    clutter = np.zeros((params.N, params.L), dtype=complex)
    for start in range(0, cp.n_scatterers, CLUTTER_CHUNK):
        chunk = slice(start, start + CLUTTER_CHUNK)
        Psi = atoms(delays[chunk], params, mode)
        Theta = np.exp(1j * phases[chunk])[:, None] * np.exp(2j * np.pi * dopplers[chunk, None] * slow_time)
        clutter += Psi @ Theta

    ref_energy = 0.0 if ref_echo is None else float(np.sum(np.abs(mat.data @ ref_echo) ** 2))
    if ref_energy == 0:
        logger.warning("Reference echo is zero; clutter left unscaled.")
        return clutter

    clutter_energy = float(np.sum(np.abs(mat.data @ clutter) ** 2))
    scr = UnitConverter.db_to_power_ratio(cp.scr_db)
    return clutter * np.sqrt(ref_energy / (clutter_energy * scr))
