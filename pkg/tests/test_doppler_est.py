import numpy as np
import pytest
import scipy.linalg

from sub_nyquist_radar_lib.aic.measurement_matrix import compress
from sub_nyquist_radar_lib.doppler_est.coefficients import DopplerVector, compressed_atoms, extract_coeffs
from sub_nyquist_radar_lib.doppler_est.esprit import (
    hankel_matrix, hankel_spectrum, wrap_doppler, esprit, model_order, estimate_order, estimate_dopplers,
    export_hankel_spectra,
)
from sub_nyquist_radar_lib.model.scene import Scene, DelayClass
from sub_nyquist_radar_lib.model.signal import echo_matrix, theta_matrix, atoms
from sub_nyquist_radar_lib.utils.exceptions import ContractViolation, RankDeficiencyError

T = 1e-4


def _tones(dopplers, amplitudes, L=32):
    l = np.arange(L)
    return sum(a * np.exp(2j * np.pi * nu * l * T) for nu, a in zip(dopplers, amplitudes))


def test_doppler_vector_modulus(params):
    b = DopplerVector(3.3 * params.nu0, params.L, params.T).b
    assert b.shape == (params.L,)
    np.testing.assert_allclose(np.abs(b), 1.0)


def test_compressed_atoms_match_direct_product(params, gaussian, pulse):
    taus = [0.21e-6, 1.03e-6]
    direct = gaussian.data @ atoms(taus, params)
    np.testing.assert_allclose(compressed_atoms(gaussian, taus, pulse, params), direct, atol=1e-10)


def test_extract_coeffs_is_exact_at_true_delays(params, gaussian, pulse, three_class_scene):
    S = compress(gaussian, echo_matrix(three_class_scene, params)).samples
    coeffs = extract_coeffs(S, gaussian, three_class_scene.delays, pulse, params)
    Theta = theta_matrix(three_class_scene, params)
    np.testing.assert_allclose(coeffs.Theta_hat, Theta, atol=1e-9 * np.max(np.abs(Theta)))
    assert coeffs.rank.full_rank
    assert coeffs.noise_gain.shape == (3,)


def test_extract_coeffs_of_the_atoms_is_identity(params, gaussian, pulse):
    taus = [0.3e-6, 0.8e-6]
    S = compressed_atoms(gaussian, taus, pulse, params)
    np.testing.assert_allclose(extract_coeffs(S, gaussian, taus, pulse, params).Theta_hat, np.eye(2), atol=1e-10)


def test_noise_propagation_matches_noise_gain(params, gaussian, pulse, rng):
    taus = [0.3e-6, 0.8e-6, 1.1e-6]
    energies = np.zeros(3)
    trials = 200
    for _ in range(trials):
        noise = (rng.standard_normal((params.M, params.L)) + 1j * rng.standard_normal((params.M, params.L))) / np.sqrt(2)
        coeffs = extract_coeffs(noise, gaussian, taus, pulse, params)
        energies += np.sum(np.abs(coeffs.Theta_hat) ** 2, axis=1)
    expected = coeffs.noise_gain ** 2 * params.L
    np.testing.assert_allclose(energies / trials, expected, rtol=0.1)


def test_extract_coeffs_rank_failure(params, gaussian, pulse):
    S = np.zeros((params.M, params.L))
    with pytest.raises(RankDeficiencyError) as info:
        extract_coeffs(S, gaussian, [0.4e-6, 0.4e-6], pulse, params)
    assert info.value.report is not None
    assert not info.value.report.full_rank
    with pytest.raises(ContractViolation):
        extract_coeffs(np.zeros((params.M + 1, params.L)), gaussian, [0.4e-6], pulse, params)


def test_hankel_shape_and_rank():
    alpha = _tones([1234.0], [1.0])
    H = hankel_matrix(alpha)
    assert H.shape == (16, 17)
    assert H[3, 5] == alpha[8]
    s = hankel_spectrum(alpha)
    assert s[1] < 1e-10 * s[0]


def test_wrap_doppler():
    assert wrap_doppler(0.0, T) == 0.0
    assert wrap_doppler(1 / T + 100.0, T) == pytest.approx(100.0)
    assert wrap_doppler(0.5 / T, T) == pytest.approx(-0.5 / T)


def test_esprit_single_tone():
    nu = 0.37 / T
    estimate = esprit(_tones([nu], [0.8j]), 1, T)
    assert estimate[0] == pytest.approx(nu, rel=1e-12)


def test_esprit_zero_doppler():
    assert abs(esprit(np.ones(32), 1, T)[0]) * T < 1e-12


def test_esprit_two_tones_match_annihilating_filter():
    dopplers = [-1234.5, 2718.2]
    alpha = _tones(dopplers, [1.0, 0.6 - 0.2j])
    estimate = esprit(alpha, 2, T)
    np.testing.assert_allclose(estimate, dopplers, atol=1e-9 / T)

    # annihilating filter: alpha[l] + h1 alpha[l-1] + h2 alpha[l-2] = 0
    A = scipy.linalg.toeplitz(alpha[1:-1], alpha[1::-1])
    h = scipy.linalg.lstsq(A, -alpha[2:])[0]
    roots = np.roots(np.concatenate([[1.0], h]))
    oracle = np.sort(np.angle(roots) / (2 * np.pi * T))
    np.testing.assert_allclose(estimate, oracle, atol=1e-9 / T)


def test_esprit_conjugation_negates_dopplers():
    dopplers = [-1500.0, 400.0, 3100.0]
    alpha = _tones(dopplers, [1.0, 0.7j, 0.5])
    np.testing.assert_allclose(esprit(alpha.conj(), 3, T), np.sort(-esprit(alpha, 3, T)), atol=1e-9 / T)


def test_esprit_aliased_doppler_lands_in_band():
    alpha = _tones([1000.0 + 1 / T], [1.0])
    assert esprit(alpha, 1, T)[0] == pytest.approx(1000.0)


def test_esprit_tls_agrees_on_noiseless_data():
    alpha = _tones([-2100.0, 900.0], [1.0, 0.3])
    np.testing.assert_allclose(esprit(alpha, 2, T, tls=True), esprit(alpha, 2, T), atol=1e-8 / T)


def test_esprit_contract():
    with pytest.raises(ContractViolation):
        esprit(np.ones(3), 2, T)
    assert esprit(np.ones(4), 0, T).size == 0


def test_model_order_examples():
    assert model_order([10, 10, 10] + [1e-6] * 7, 1000)[0] == 3
    assert model_order([2.0] * 8, 1000)[0] == 0
    assert model_order([5.0] + [0.01] * 6, 500)[0] == 1
    assert model_order([10, 10, 10] + [1e-6] * 7, 1000, criterion="aic")[0] == 3
    with pytest.raises(ContractViolation):
        model_order([1.0, 2.0], 10)
    with pytest.raises(ContractViolation):
        model_order([2.0, 1.0], 10, criterion="bic")


def test_estimate_order_keeps_every_tone(rng):
    alpha = _tones([-3000.0, 500.0, 2200.0], [1.0, 0.8, 0.6])
    alpha = alpha + 1e-3 * (rng.standard_normal(32) + 1j * rng.standard_normal(32))
    assert 3 <= estimate_order(alpha) <= 16


def test_classes_are_estimated_independently():
    rows = np.vstack([_tones([700.0], [1.0]), _tones([-1500.0, 2500.0], [1.0, 0.5])])
    estimate = estimate_dopplers(rows, [1, 2], T)
    assert estimate.K_per_class == [1, 2]
    perturbed = rows.copy()
    perturbed[1] = _tones([4000.0, -900.0], [0.2, 1.0])
    np.testing.assert_array_equal(estimate_dopplers(perturbed, [1, 2], T).dopplers[0], estimate.dopplers[0])
    threaded = estimate_dopplers(rows, [1, 2], T, workers=2)
    for serial, parallel in zip(estimate.dopplers, threaded.dopplers):
        np.testing.assert_array_equal(serial, parallel)
    with pytest.raises(ContractViolation):
        estimate_dopplers(rows, [1], T)


def test_doppler_estimates_from_pipeline_coefficients(params, gaussian, pulse):
    scene = Scene((DelayClass(0.4e-6, ((2.3 * params.nu0, 1.0), (-5.1 * params.nu0, 0.5j))),
                   DelayClass(1.2e-6, ((7.7 * params.nu0, 0.8),))))
    S = compress(gaussian, echo_matrix(scene, params)).samples
    coeffs = extract_coeffs(S, gaussian, scene.delays, pulse, params)
    estimate = estimate_dopplers(coeffs.Theta_hat, [2, 1], params.T)
    np.testing.assert_allclose(estimate.dopplers[0], np.sort(scene.classes[0].dopplers), atol=1e-6 * params.nu0)
    np.testing.assert_allclose(estimate.dopplers[1], scene.classes[1].dopplers, atol=1e-6 * params.nu0)


def test_export_hankel_spectra(tmp_path):
    rows = np.vstack([_tones([700.0], [1.0]), _tones([-1500.0], [1.0])])
    path = export_hankel_spectra(rows, tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == "class,index,singular_value"
    assert len(lines) == 1 + 2 * 16
