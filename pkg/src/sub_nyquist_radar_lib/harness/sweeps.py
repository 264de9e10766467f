import concurrent.futures
import dataclasses
import enum
import math
import pathlib
import time

import numpy as np
import pandas as pd

from sub_nyquist_radar_lib.aic.measurement_matrix import make_matrix, compress
from sub_nyquist_radar_lib.aic.properties import rank_probability, com_test
from sub_nyquist_radar_lib.delay_est.beamspace import theorem2_check
from sub_nyquist_radar_lib.delay_est.music import export_diagnostics
from sub_nyquist_radar_lib.doppler_est.esprit import export_hankel_spectra
from sub_nyquist_radar_lib.harness.config import RunConfig
from sub_nyquist_radar_lib.harness.metrics import match_and_rrmse, pooled_rrmse, MatchResult
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.scene import Scene, DelayClass, Target, ClutterParams, draw_scene
from sub_nyquist_radar_lib.model.signal import (
    echo_matrix, gen_clutter, noise_params_for, nyquist_noise, padded_pulse, theta_matrix,
)
from sub_nyquist_radar_lib.pipeline.pipeline import run, EstimateReport
from sub_nyquist_radar_lib.utils.exceptions import ConfigError
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.util import derive_seed, make_rng

logger = LoggerFactory.get_logger(__name__)

METRIC_COLUMNS = ["sweep_value", "rrmse_tau", "rrmse_nu", "success_rate", "mean_runtime_s", "trials"]
POOLING = "rms over targets and successful trials"
DECOHERING_OFFSET = 5.0  # resolution cells between the decohering target and its partner

# seed stream keys
SCENE_KEY, MATRIX_KEY, NOISE_KEY, CLUTTER_KEY = range(4)


class SweepKind(enum.Enum):
    SNR = 0
    RESOLUTION = 1
    CLUTTER = 2
    THEOREM1 = 3
    THEOREM2 = 4
    COM = 5
    ONCE = 6


@dataclasses.dataclass(frozen=True)
class TrialJob:
    cfg: RunConfig
    kind: SweepKind
    point: int
    trial: int
    value: float
    filter_enabled: bool = True


@dataclasses.dataclass(frozen=True)
class TrialResult:
    success: bool
    tau_errors: np.ndarray
    nu_errors: np.ndarray
    runtime_s: float
    failed_stage: str | None = None


@dataclasses.dataclass(frozen=True)
class MetricRow:
    sweep_value: float
    rrmse_tau: float
    rrmse_nu: float
    success_rate: float
    mean_runtime_s: float
    trials: int


def simulate(cfg: RunConfig,
             truth: Scene,
             snr_db: float,
             scr_db: float,
             keys: tuple[int, ...],
             clutter_filter: float | None = None,
             ) -> tuple[EstimateReport, float]:
    """Synthesize S = M (R + noise + clutter) for `truth` and run the pipeline; returns (report, seconds)."""
    params = cfg.params
    matrix_seed = cfg.matrix.seed if cfg.matrix.seed is not None else derive_seed(cfg.seed, *keys, MATRIX_KEY)
    mat = make_matrix(cfg.matrix.kind, params.M, params.N, seed=matrix_seed)
    R = echo_matrix(truth, params, cfg.mode)

    clutter = None
    if not (math.isinf(scr_db) and scr_db > 0):
        cp = ClutterParams(n_scatterers=cfg.clutter.n_scatterers,
                           scr_db=scr_db,
                           delay_span=tuple(cfg.clutter.delay_span),
                           doppler_bin_width=cfg.clutter.doppler_bin_width,
                           seed=derive_seed(cfg.seed, *keys, CLUTTER_KEY))
        clutter = gen_clutter(params, cp, mat, R, cfg.mode)

    noise = None
    if not math.isinf(snr_db):
        # pure-clutter scenes calibrate the noise against the clutter
        reference = R if np.any(R) else clutter
        if reference is not None and np.any(reference):
            noise_params = noise_params_for(reference, snr_db, params, derive_seed(cfg.seed, *keys, NOISE_KEY))
            noise = nyquist_noise(reference, snr_db, params, noise_params)

    S = compress(mat, R, noise, clutter)
    pipeline_cfg = cfg.pipeline.build(truth, clutter_filter)
    start = time.perf_counter()
    report = run(S, mat, padded_pulse(params), params, pipeline_cfg)
    return report, time.perf_counter() - start


def score(report: EstimateReport, truth: Scene, params: RadarParams,
          principal: list[int] | None = None) -> tuple[bool, MatchResult | None]:
    if not report.ok or truth.K == 0 or len(report.targets) != truth.K:
        return False, None
    match = match_and_rrmse(report.targets, truth.targets, params)
    if principal is not None:
        match = dataclasses.replace(match, tau_errors=match.tau_errors[principal],
                                    nu_errors=match.nu_errors[principal])
    return True, match


def resolution_scene(cfg: RunConfig, rng: np.random.Generator, separation: float) -> Scene:
    """Two equal-amplitude targets `separation` cells apart plus a decohering third target."""
    if separation <= 0:
        raise ConfigError(f"Separation {separation} makes the two targets identical.")
    params = cfg.params
    delay_low, delay_high = cfg.scene.delay_range
    doppler_low, doppler_high = cfg.scene.doppler_range
    phases = np.exp(2j * np.pi * rng.uniform(0, 1, 3))

    if cfg.sweep.resolution_mode == "ntd":
        tau1 = rng.uniform(delay_low, delay_high - separation * params.tau0)
        tau2 = tau1 + separation * params.tau0
        nu = rng.uniform(doppler_low, doppler_high - DECOHERING_OFFSET * params.nu0)
        targets = [Target(tau1, nu, phases[0]), Target(tau2, nu, phases[1]),
                   Target(tau2, nu + DECOHERING_OFFSET * params.nu0, phases[2])]
    else:
        tau1 = rng.uniform(delay_low, delay_high - DECOHERING_OFFSET * params.tau0)
        nu1 = rng.uniform(doppler_low, doppler_high - separation * params.nu0)
        nu2 = nu1 + separation * params.nu0
        targets = [Target(tau1, nu1, phases[0]), Target(tau1, nu2, phases[1]),
                   Target(tau1 + DECOHERING_OFFSET * params.tau0, nu2, phases[2])]
    return Scene.from_targets(targets)


def run_trial(job: TrialJob) -> TrialResult:
    cfg = job.cfg
    params = cfg.params
    keys = (job.kind.value, job.point, job.trial)
    rng = make_rng(cfg.seed, *keys, SCENE_KEY)
    principal = None
    clutter_filter = None
    scr_db = math.inf

    match job.kind:
        case SweepKind.SNR:
            truth = draw_scene(rng, params, cfg.scene.to_spec())
            snr_db = job.value
        case SweepKind.RESOLUTION:
            truth = resolution_scene(cfg, rng, job.value)
            snr_db = cfg.sweep.resolution_snr_db
            principal = [0, 1]
            if not theorem2_check(theta_matrix(truth, params)).full_rank:
                logger.warning(f"Resolution scene violates the Doppler distinctness premise: {truth}")
                return TrialResult(False, np.zeros(0), np.zeros(0), math.nan, "scene")
        case SweepKind.CLUTTER:
            truth = draw_scene(rng, params, cfg.scene.to_spec(doppler_exclusion=cfg.clutter.cutoff))
            snr_db = cfg.sweep.clutter_snr_db
            scr_db = job.value
            clutter_filter = cfg.clutter.cutoff if job.filter_enabled else None
        case _:
            raise ConfigError(f"{job.kind} is not a metric sweep.")

    report, runtime = simulate(cfg, truth, snr_db, scr_db, keys, clutter_filter)
    success, match = score(report, truth, params, principal)
    if not success:
        stage = None if report.failed_stage is None else report.failed_stage.value
        return TrialResult(False, np.zeros(0), np.zeros(0), runtime, stage)
    return TrialResult(True, match.tau_errors, match.nu_errors, runtime)


def _execute(jobs: list[TrialJob], workers: int) -> list[TrialResult]:
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(run_trial, jobs))
    return [run_trial(job) for job in jobs]


def aggregate(value: float, results: list[TrialResult], record_runtime: bool) -> MetricRow:
    successful = [r for r in results if r.success]
    trials = len(results)
    runtime = math.nan
    if record_runtime and trials > 0:
        runtime = float(np.nanmean([r.runtime_s for r in results]))
    return MetricRow(sweep_value=value,
                     rrmse_tau=pooled_rrmse([r.tau_errors for r in successful]),
                     rrmse_nu=pooled_rrmse([r.nu_errors for r in successful]),
                     success_rate=len(successful) / trials if trials else 0.0,
                     mean_runtime_s=runtime,
                     trials=trials)


def _metric_sweep(cfg: RunConfig, kind: SweepKind, values: list[float], filter_enabled: bool = True) -> pd.DataFrame:
    if len(values) == 0:
        raise ConfigError(f"Sweep axis for {kind.name.lower()} is empty.")
    rows = []
    for point, value in enumerate(values):
        jobs = [TrialJob(cfg, kind, point, trial, value, filter_enabled) for trial in range(cfg.sweep.trials)]
        row = aggregate(value, _execute(jobs, cfg.workers), cfg.output.record_runtime)
        logger.info(f"{kind.name.lower()} point {value}: rrmse_tau={row.rrmse_tau:.4g} "
                    f"rrmse_nu={row.rrmse_nu:.4g} success={row.success_rate:.3f}")
        rows.append(dataclasses.asdict(row))
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


def sweep_snr(cfg: RunConfig) -> pd.DataFrame:
    return _metric_sweep(cfg, SweepKind.SNR, cfg.sweep.snr_db)


def sweep_resolution(cfg: RunConfig) -> pd.DataFrame:
    rows = []
    for point, value in enumerate(cfg.sweep.separations):
        if value <= 0:
            logger.warning(f"Separation {value} gives identical targets; point skipped.")
            rows.append(dataclasses.asdict(MetricRow(value, math.nan, math.nan, 0.0, math.nan, 0)))
            continue
        jobs = [TrialJob(cfg, SweepKind.RESOLUTION, point, trial, value) for trial in range(cfg.sweep.trials)]
        row = aggregate(value, _execute(jobs, cfg.workers), cfg.output.record_runtime)
        logger.info(f"{cfg.sweep.resolution_mode} {value}: rrmse_tau={row.rrmse_tau:.4g} "
                    f"success={row.success_rate:.3f}")
        rows.append(dataclasses.asdict(row))
    if not rows:
        raise ConfigError("Resolution sweep axis is empty.")
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


def sweep_clutter(cfg: RunConfig, filter_enabled: bool | None = None) -> pd.DataFrame:
    params = cfg.params
    cutoff = cfg.clutter.cutoff
    if not 0 < cutoff < params.nu_max:
        raise ConfigError(f"Clutter cutoff {cutoff} Hz must lie in (0, {params.nu_max}) Hz.")
    if cutoff >= max(abs(v) for v in cfg.scene.doppler_range):
        raise ConfigError(f"Clutter cutoff {cutoff} Hz leaves no Doppler passband.")
    enabled = cfg.sweep.clutter_filter if filter_enabled is None else filter_enabled
    return _metric_sweep(cfg, SweepKind.CLUTTER, cfg.sweep.scr_db, enabled)


def _fitted_exponent(table: pd.DataFrame) -> float:
    """c2 from 1 - p = exp(-c2 M), least squares through the origin over 0 < p < 1."""
    usable = table[(table.success_rate > 0) & (table.success_rate < 1)]
    if usable.empty:
        return math.nan
    y = -np.log(1 - usable.success_rate.to_numpy())
    x = usable.M.to_numpy(dtype=float)
    return float(np.dot(x, y) / np.dot(x, x))


def sweep_theorem1(cfg: RunConfig) -> pd.DataFrame:
    rows = []
    for point, (K_tau, M) in enumerate((K, M) for K in cfg.sweep.theorem1_K_tau for M in cfg.sweep.theorem1_M):
        params = RadarParams.from_samples(N=cfg.sweep.theorem1_N, M=M, L=cfg.radar.L, B=cfg.radar.B)
        report = rank_probability(cfg.matrix.kind, params, K_tau, cfg.sweep.trials,
                                  seed=derive_seed(cfg.seed, SweepKind.THEOREM1.value, point))
        rows.append({"M": M, "N": params.N, "K_tau": K_tau, "success_rate": report.success_rate,
                     "min_singular_value": report.min_singular_value, "trials": report.trials})
        logger.info(f"theorem1 M={M} K_tau={K_tau}: success={report.success_rate:.3f}")

    table = pd.DataFrame(rows, columns=["M", "N", "K_tau", "success_rate", "min_singular_value", "trials"])
    exponents = {K: _fitted_exponent(group) for K, group in table.groupby("K_tau")}
    table["fitted_c2"] = table.K_tau.map(exponents)
    return table


def theorem2_scene(rng: np.random.Generator, params: RadarParams, K_tau: int,
                   delay_range: tuple[float, float], doppler_range: tuple[float, float],
                   coherent: bool) -> Scene:
    """Coherent: one shared Doppler with proportional amplitudes. Otherwise each class owns a unique Doppler."""
    delays = np.sort(rng.choice(np.linspace(*delay_range, num=K_tau * 8, endpoint=False), K_tau, replace=False))
    low, high = doppler_range
    cells = int((high - low) / params.nu0)
    if cells < K_tau + 1:
        raise ConfigError(f"Doppler range holds {cells} cells, {K_tau + 1} needed.")
    dopplers = low + (rng.choice(cells, K_tau + 1, replace=False) + 0.5 + rng.uniform(-0.2, 0.2, K_tau + 1)) * params.nu0
    shared = dopplers[0]

    if coherent:
        base = np.exp(2j * np.pi * rng.uniform())
        return Scene(tuple(DelayClass(float(tau), ((float(shared), complex(rng.uniform(0.1, 1) * base)),))
                           for tau in delays))
    classes = []
    for tau, own in zip(delays, dopplers[1:]):
        amplitudes = rng.uniform(0.1, 1, 2) * np.exp(2j * np.pi * rng.uniform(0, 1, 2))
        classes.append(DelayClass(float(tau), ((float(shared), complex(amplitudes[0])),
                                               (float(own), complex(amplitudes[1])))))
    return Scene(tuple(classes))


def sweep_theorem2(cfg: RunConfig) -> pd.DataFrame:
    params = cfg.params
    rows = []
    for point, K_tau in enumerate(cfg.sweep.theorem2_K_tau):
        for coherent in (True, False):
            passed = 0
            for trial in range(cfg.sweep.trials):
                rng = make_rng(cfg.seed, SweepKind.THEOREM2.value, point, int(coherent), trial)
                scene = theorem2_scene(rng, params, K_tau, tuple(cfg.scene.delay_range),
                                       tuple(cfg.scene.doppler_range), coherent)
                passed += theorem2_check(theta_matrix(scene, params)).full_rank
            rows.append({"K_tau": K_tau, "family": "coherent" if coherent else "distinct",
                         "pass_rate": passed / cfg.sweep.trials, "trials": cfg.sweep.trials})
    return pd.DataFrame(rows, columns=["K_tau", "family", "pass_rate", "trials"])


def sweep_com(cfg: RunConfig) -> pd.DataFrame:
    rows = []
    for point, (kind, M) in enumerate((k, M) for k in cfg.sweep.com_kinds for M in cfg.sweep.com_M):
        report = com_test(kind, M, cfg.sweep.com_N, cfg.sweep.com_epsilon, cfg.sweep.trials,
                          seed=derive_seed(cfg.seed, SweepKind.COM.value, point))
        rows.append({"kind": report.kind.value, "M": M, "N": report.N, "epsilon": report.epsilon,
                     "trials": report.trials, "empirical_tail": report.empirical_tail,
                     "bound_exponent": math.nan if report.bound_exponent is None else report.bound_exponent})
        logger.info(f"com {kind} M={M}: tail={report.empirical_tail:.4g}")
    return pd.DataFrame(rows, columns=["kind", "M", "N", "epsilon", "trials", "empirical_tail", "bound_exponent"])


def run_once(cfg: RunConfig,
             directory: str | pathlib.Path | None = None,
             ) -> tuple[EstimateReport, Scene, MatchResult | None]:
    """One random scene at the configured SNR/SCR with full diagnostics."""
    params = cfg.params
    keys = (SweepKind.ONCE.value, 0, 0)
    truth = draw_scene(make_rng(cfg.seed, *keys, SCENE_KEY), params, cfg.scene.to_spec())
    report, runtime = simulate(cfg, truth, cfg.noise.snr_db, cfg.clutter.scr_db, keys)
    success, match = score(report, truth, params)
    if success:
        report.metrics.update({"rrmse_tau": match.rrmse_tau, "rrmse_nu": match.rrmse_nu})
    if cfg.output.record_runtime:
        report.metrics["runtime_s"] = runtime

    if directory is not None:
        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "report.yaml").write_text(report.to_record())
        if report.delay_estimate is not None:
            export_diagnostics(report.delay_estimate, directory)
        if report.coefficients is not None:
            export_hankel_spectra(report.coefficients.Theta_hat, directory)
        logger.info(f"Run-once outputs written to {directory}")
    return report, truth, match
