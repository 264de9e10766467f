import dataclasses
import itertools

import numpy as np
import scipy.optimize

from sub_nyquist_radar_lib.delay_est.beamspace import wrap_delay
from sub_nyquist_radar_lib.doppler_est.esprit import wrap_doppler
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.scene import Target

EXHAUSTIVE_MAX_K = 6


@dataclasses.dataclass(frozen=True)
class MatchResult:
    rrmse_tau: float
    rrmse_nu: float
    assignment: list[tuple[int, int]]  # (estimate index, truth index), ordered by truth index
    tau_errors: np.ndarray  # normalized by tau0, wrapped modulo T, aligned with the assignment
    nu_errors: np.ndarray  # normalized by nu0, wrapped into the band


def _normalized_errors(est: list[Target], truth: list[Target], params: RadarParams) -> tuple[np.ndarray, np.ndarray]:
    tau_hat = np.array([t.tau for t in est])[:, None]
    nu_hat = np.array([t.nu for t in est])[:, None]
    tau = np.array([t.tau for t in truth])[None, :]
    nu = np.array([t.nu for t in truth])[None, :]
    d_tau = wrap_delay(tau_hat - tau, params.T) / params.tau0
    d_nu = wrap_doppler(nu_hat - nu, params.T) / params.nu0
    return d_tau, d_nu


def _exhaustive(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    K = cost.shape[0]
    columns = np.arange(K)
    best, best_cost = None, np.inf
    for permutation in itertools.permutations(range(K)):
        total = cost[list(permutation), columns].sum()
        if total < best_cost:
            best, best_cost = permutation, total
    return np.array(best), columns


def match_and_rrmse(est: list[Target], truth: list[Target], params: RadarParams) -> MatchResult:
    """Optimal one-to-one matching on (dtau/tau0)^2 + (dnu/nu0)^2, then RRMSE over matched pairs."""
    if len(est) == 0 or len(truth) == 0:
        return MatchResult(np.nan, np.nan, [], np.zeros(0), np.zeros(0))

    d_tau, d_nu = _normalized_errors(est, truth, params)
    cost = d_tau ** 2 + d_nu ** 2
    if len(est) == len(truth) and len(truth) <= EXHAUSTIVE_MAX_K:
        rows, columns = _exhaustive(cost)
    else:
        rows, columns = scipy.optimize.linear_sum_assignment(cost)
        order = np.argsort(columns)
        rows, columns = rows[order], columns[order]

    tau_errors = d_tau[rows, columns]
    nu_errors = d_nu[rows, columns]
    return MatchResult(rrmse_tau=float(np.sqrt(np.mean(tau_errors ** 2))),
                       rrmse_nu=float(np.sqrt(np.mean(nu_errors ** 2))),
                       assignment=[(int(r), int(c)) for r, c in zip(rows, columns)],
                       tau_errors=tau_errors,
                       nu_errors=nu_errors)


def pooled_rrmse(errors: list[np.ndarray]) -> float:
    """RMS over all targets of all trials (not the mean of per-trial RRMSEs)."""
    values = np.concatenate(errors) if errors else np.zeros(0)
    if values.size == 0:
        return np.nan
    return float(np.sqrt(np.mean(values ** 2)))
